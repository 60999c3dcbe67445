#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "langlearn/language.hpp"
#include "langlearn/rng.hpp"

namespace langlearn {

enum class Similarity { kCosine, kDot };

struct AgentConfig {
  int hidden_dim = 50;
  int embed_dim = 50;
  int encoder_out_dim = 50;
  int encoder_layers = 2;  // 1 = single affine layer; 2 = affine-tanh-affine
  double alpha_con = 0.1;
  double temperature = 0.1;  // NTXent similarity scale is 1/temperature
  double learning_rate = 1e-3;
  int max_decode_len = static_cast<int>(kDefaultMaxLabelLen);
  Similarity similarity = Similarity::kCosine;

  void validate() const;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

// Character <-> token-id mapping. Ids 0..2 are the specials; alphabet
// characters follow in alphabet order.
struct Vocab {
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kFirstChar = 3;

  std::string alphabet;

  int size() const { return static_cast<int>(alphabet.size()) + kFirstChar; }
  int id_of(char c) const;
  char char_of(int id) const;
  std::vector<int> encode(const Label& label) const;
  Label decode(const std::vector<int>& ids) const;
};

// Learnable tensors in parameter-vector order. The embedding appears once;
// the writer input layer, the writer output projection, and the reader input
// layer all map into that single storage block.
enum class Tensor : int {
  kEncW1 = 0,   // hidden x 6 (or encoder_out x 6 for a 1-layer encoder)
  kEncB1,       // hidden (or encoder_out)
  kEncW2,       // encoder_out x hidden (absent for 1-layer)
  kEncB2,       // encoder_out (absent for 1-layer)
  kEmbed,       // vocab x embed (shared three ways)
  kWriterWx,    // 4*hidden x embed
  kWriterWh,    // 4*hidden x hidden
  kWriterB,     // 4*hidden
  kWriterOutB,  // vocab (additive bias of the tied output layer)
  kReaderWx,    // 4*hidden x embed
  kReaderWh,    // 4*hidden x hidden
  kReaderB,     // 4*hidden
  kProjW,       // encoder_out x hidden (reader final-state projection)
  kProjB,       // encoder_out
  kCount,
};

struct TensorShape {
  long rows = 0;
  long cols = 0;
  long offset = 0;
  bool is_bias = false;
  long size() const { return rows * cols; }
};

// Offsets of every tensor inside the flat parameter vector.
class ParamLayout {
 public:
  ParamLayout() = default;
  ParamLayout(const AgentConfig& config, int vocab_size);

  long total_size() const { return total_; }
  const TensorShape& shape(Tensor t) const {
    return shapes_[static_cast<int>(t)];
  }

  Eigen::Map<Eigen::MatrixXd> map(Eigen::VectorXd& flat, Tensor t) const {
    const TensorShape& s = shape(t);
    return {flat.data() + s.offset, s.rows, s.cols};
  }
  Eigen::Map<const Eigen::MatrixXd> map(const Eigen::VectorXd& flat, Tensor t) const {
    const TensorShape& s = shape(t);
    return {flat.data() + s.offset, s.rows, s.cols};
  }

 private:
  std::array<TensorShape, static_cast<int>(Tensor::kCount)> shapes_{};
  long total_ = 0;
};

// All learnable parameters plus optimizer moments, step counter, and the
// agent's RNG stream. Forward passes are deterministic functions of
// (AgentState, input).
struct AgentState {
  AgentConfig config;
  Vocab vocab;
  ParamLayout layout;
  Eigen::VectorXd params;
  Eigen::VectorXd adam_m;
  Eigen::VectorXd adam_v;
  std::int64_t step = 0;
  Rng rng;

  Eigen::Map<Eigen::MatrixXd> tensor(Tensor t) { return layout.map(params, t); }
  Eigen::Map<const Eigen::MatrixXd> tensor(Tensor t) const {
    return layout.map(params, t);
  }
};

// He initialization: weights ~ N(0, 2/fan_in) with fan_in = input dimension,
// biases zero except the LSTM forget gates, which start at 1.
AgentState init_agent(const AgentConfig& config, const std::string& alphabet,
                      std::uint64_t seed);

// One Adam update with bias correction. Throws NumericError on non-finite
// gradients or if any parameter goes non-finite after the step.
void adam_step(AgentState& agent, const Eigen::VectorXd& grad);

// Versioned binary checkpoint; round-trips the full state exactly.
void save_agent(const AgentState& agent, const std::filesystem::path& path);
AgentState load_agent(const std::filesystem::path& path);

}  // namespace langlearn
