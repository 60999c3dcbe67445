#pragma once

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

#include "langlearn/agent.hpp"
#include "langlearn/scene.hpp"

namespace langlearn {

// Aligned scenes and tokenized labels for one minibatch.
struct Batch {
  std::vector<SceneVector> scenes;
  std::vector<std::vector<int>> labels;  // token ids, specials excluded

  std::size_t size() const { return scenes.size(); }
};

Batch make_batch(const AgentState& agent,
                 std::span<const std::pair<Scene, Label>> items);

// Scene latent h: feedforward encoder output.
Eigen::VectorXd encode(const AgentState& agent, const SceneVector& scene);
Eigen::MatrixXd encode_batch(const AgentState& agent,
                             const std::vector<SceneVector>& scenes);

// Label latent z: reader LSTM over BOS + tokens + EOS, final state projected.
Eigen::VectorXd read_label(const AgentState& agent, const Label& label);
Eigen::VectorXd read_tokens(const AgentState& agent, const std::vector<int>& tokens);

enum class DecodeMode { kGreedy, kSample };

struct GenerateResult {
  Label label;
  bool truncated = false;  // hit max_decode_len without emitting EOS
};

// Greedy decoding from a scene (or a precomputed latent): h seeds the
// writer's initial hidden state, decoding starts at BOS and stops at EOS or
// max_decode_len. The sampling mode draws from the output softmax instead of
// taking the argmax and is excluded from evaluation runs.
GenerateResult generate_label(const AgentState& agent, const SceneVector& scene);
GenerateResult generate_from_latent(const AgentState& agent,
                                    const Eigen::VectorXd& latent);
GenerateResult generate_label(const AgentState& agent, const SceneVector& scene,
                              DecodeMode mode, Rng* rng);

// Losses below accumulate parameter gradients into *grad (same layout as
// AgentState::params) when grad is non-null, so combined losses sum
// naturally into one buffer.

// Teacher-forced tokenwise cross-entropy, mean over non-pad positions; EOS
// is a predicted token.
double token_cross_entropy(const AgentState& agent, const Batch& batch,
                           Eigen::VectorXd* grad);

// Symmetric NTXent over in-batch scene/label latent pairs: cosine (or dot)
// similarities scaled by 1/temperature, cross-entropy against the matching
// index, both directions averaged. Requires batch size >= 2.
double ntxent_inbatch(const AgentState& agent, const Batch& batch,
                      Eigen::VectorXd* grad);

struct CandidateLoss {
  double loss = 0.0;
  int predicted = 0;       // argmax candidate, for guessing-accuracy logging
  bool degenerate = false; // single candidate: loss 0 by definition
};

// Pick-the-scene-given-a-label loss: softmax over similarity(z(label),
// h(candidate)) / temperature, cross-entropy against target_index.
CandidateLoss candidate_contrastive(const AgentState& agent,
                                    const std::vector<int>& label_tokens,
                                    const std::vector<SceneVector>& candidates,
                                    int target_index, Eigen::VectorXd* grad);

}  // namespace langlearn
