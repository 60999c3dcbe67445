#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "langlearn/agent.hpp"
#include "langlearn/language.hpp"
#include "langlearn/metrics.hpp"
#include "langlearn/net.hpp"

namespace langlearn {

struct TrainerOptions {
  int rounds = 100;
  int exposure_batch_size = 5;
  int production_batch_size = 5;
  int distractor_count = 3;
  AngleDiffMode angle_mode = AngleDiffMode::kCircular;
  AgentConfig agent;
};

// One guessing trial: the target scene against distinct distractors drawn
// from the other training scenes. All agents of a language see identical
// sets: the draw is seeded by (language seed, round, item index), not by the
// agent.
struct DistractorSet {
  Scene target;
  std::vector<Scene> distractors;
};

// Per-round presentation plan. Every block covers all training items exactly
// once; the orders are per-agent seeded shuffles.
struct RoundPlan {
  int round = 0;  // 1-based
  std::vector<std::size_t> exposure_order;
  std::vector<std::size_t> guessing_order;
  std::vector<std::size_t> production_order;
  std::vector<DistractorSet> distractors;  // indexed by canonical item index
};

RoundPlan make_round_plan(const InputLanguage& lang, int round, int distractor_count,
                          Rng& agent_rng);

struct RoundLosses {
  double exposure = 0.0;    // mean combined loss per exposure minibatch
  double guessing = 0.0;    // mean combined loss per guessing trial
  double production = 0.0;  // mean generative loss per production minibatch
};

// Per-agent, per-round test outcome.
struct RoundRecord {
  std::string language_id;
  double structure = 0.0;
  std::uint64_t agent_seed = 0;
  int round = 0;
  std::vector<Label> memorization_labels;    // canonical train-scene order
  double production_similarity = 0.0;
  std::vector<Label> generalization_labels;  // canonical test-scene order
  double generalization_score = 0.0;
  bool generalization_degenerate = false;
  double guessing_accuracy = 0.0;
  RoundLosses losses;
};

struct ExposureResult {
  double mean_loss = 0.0;
  int contrastive_skipped = 0;  // tail minibatches too small for negatives
};

struct GuessingResult {
  double mean_loss = 0.0;
  double accuracy = 0.0;
};

// The three training blocks. Each runs one optimizer step per minibatch
// (exposure, production) or per trial (guessing).
ExposureResult run_exposure_block(AgentState& agent,
                                  const std::vector<std::pair<Scene, Label>>& items,
                                  const std::vector<std::size_t>& order,
                                  int batch_size);
GuessingResult run_guessing_block(AgentState& agent,
                                  const std::vector<std::pair<Scene, Label>>& items,
                                  const std::vector<std::size_t>& order,
                                  const std::vector<DistractorSet>& distractors);
double run_production_block(AgentState& agent,
                            const std::vector<std::pair<Scene, Label>>& items,
                            const std::vector<std::size_t>& order, int batch_size);

struct MemorizationResult {
  std::vector<Label> labels;  // canonical train-scene order
  double similarity = 0.0;
};

struct GeneralizationResult {
  std::vector<Label> labels;  // canonical test-scene order
  double score = 0.0;
  bool degenerate = false;
};

// Greedy production for every training scene; no parameter updates.
MemorizationResult memorization_test(const AgentState& agent,
                                     const std::vector<std::pair<Scene, Label>>& train_items);

// Greedy production for every test scene, scored against the agent's own
// productions for the training scenes from the same round.
GeneralizationResult generalization_test(
    const AgentState& agent, const std::vector<Scene>& test_scenes,
    const std::vector<std::pair<Scene, Label>>& train_productions,
    AngleDiffMode angle_mode);

// The full protocol: per round exposure -> guessing -> production ->
// memorization test -> generalization test. Deterministic in
// (language, seed, options). Optionally hands back the trained agent.
std::vector<RoundRecord> train_agent(const InputLanguage& lang, std::uint64_t seed,
                                     const TrainerOptions& options,
                                     AgentState* final_state = nullptr);

}  // namespace langlearn
