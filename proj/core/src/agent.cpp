#include "langlearn/agent.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "langlearn/error.hpp"

namespace langlearn {

void AgentConfig::validate() const {
  if (hidden_dim <= 0 || embed_dim <= 0 || encoder_out_dim <= 0) {
    throw ValidationError("agent config: dimensions must be positive");
  }
  if (encoder_layers != 1 && encoder_layers != 2) {
    throw ValidationError("agent config: encoder_layers must be 1 or 2");
  }
  if (encoder_out_dim != hidden_dim) {
    // The encoder output seeds the writer's initial hidden state.
    throw ValidationError("agent config: encoder_out_dim must equal hidden_dim");
  }
  if (temperature <= 0.0) {
    throw ValidationError("agent config: temperature must be positive");
  }
  if (alpha_con < 0.0) {
    throw ValidationError("agent config: alpha_con must be non-negative");
  }
  if (max_decode_len <= 0) {
    throw ValidationError("agent config: max_decode_len must be positive");
  }
}

int Vocab::id_of(char c) const {
  const auto pos = alphabet.find(c);
  if (pos == std::string::npos) {
    throw ValidationError(std::string("character '") + c + "' not in alphabet");
  }
  return kFirstChar + static_cast<int>(pos);
}

char Vocab::char_of(int id) const {
  if (id < kFirstChar || id >= size()) {
    throw ValidationError("token id " + std::to_string(id) + " is not a character");
  }
  return alphabet[static_cast<std::size_t>(id - kFirstChar)];
}

std::vector<int> Vocab::encode(const Label& label) const {
  std::vector<int> ids;
  ids.reserve(label.size());
  for (char c : label) ids.push_back(id_of(c));
  return ids;
}

Label Vocab::decode(const std::vector<int>& ids) const {
  Label label;
  label.reserve(ids.size());
  for (int id : ids) label.push_back(char_of(id));
  return label;
}

ParamLayout::ParamLayout(const AgentConfig& config, int vocab_size) {
  const long h = config.hidden_dim;
  const long e = config.embed_dim;
  const long out = config.encoder_out_dim;
  const long v = vocab_size;
  const bool two_layer = config.encoder_layers == 2;

  auto set = [&](Tensor t, long rows, long cols, bool is_bias) {
    shapes_[static_cast<int>(t)] = {rows, cols, total_, is_bias};
    total_ += rows * cols;
  };

  set(Tensor::kEncW1, two_layer ? h : out, 6, false);
  set(Tensor::kEncB1, two_layer ? h : out, 1, true);
  set(Tensor::kEncW2, two_layer ? out : 0, two_layer ? h : 0, false);
  set(Tensor::kEncB2, two_layer ? out : 0, two_layer ? 1 : 0, true);
  set(Tensor::kEmbed, v, e, false);
  set(Tensor::kWriterWx, 4 * h, e, false);
  set(Tensor::kWriterWh, 4 * h, h, false);
  set(Tensor::kWriterB, 4 * h, 1, true);
  set(Tensor::kWriterOutB, v, 1, true);
  set(Tensor::kReaderWx, 4 * h, e, false);
  set(Tensor::kReaderWh, 4 * h, h, false);
  set(Tensor::kReaderB, 4 * h, 1, true);
  set(Tensor::kProjW, out, h, false);
  set(Tensor::kProjB, out, 1, true);
}

AgentState init_agent(const AgentConfig& config, const std::string& alphabet,
                      std::uint64_t seed) {
  config.validate();
  if (alphabet.empty()) {
    throw ValidationError("init_agent: empty alphabet");
  }

  AgentState agent;
  agent.config = config;
  agent.vocab = Vocab{alphabet};
  agent.layout = ParamLayout(config, agent.vocab.size());
  agent.params = Eigen::VectorXd::Zero(agent.layout.total_size());
  agent.adam_m = Eigen::VectorXd::Zero(agent.layout.total_size());
  agent.adam_v = Eigen::VectorXd::Zero(agent.layout.total_size());
  agent.step = 0;
  agent.rng = Rng(mix_seed(seed, 0x696e6974));

  for (int ti = 0; ti < static_cast<int>(Tensor::kCount); ++ti) {
    const TensorShape& s = agent.layout.shape(static_cast<Tensor>(ti));
    if (s.size() == 0 || s.is_bias) continue;
    const double stddev = std::sqrt(2.0 / static_cast<double>(s.cols));
    for (long i = 0; i < s.size(); ++i) {
      agent.params[s.offset + i] = agent.rng.normal(0.0, stddev);
    }
  }

  // Forget-gate bias starts at 1 (gate order i, f, g, o).
  const long h = config.hidden_dim;
  for (Tensor t : {Tensor::kWriterB, Tensor::kReaderB}) {
    auto bias = agent.tensor(t);
    bias.block(h, 0, h, 1).setOnes();
  }
  return agent;
}

void adam_step(AgentState& agent, const Eigen::VectorXd& grad) {
  if (grad.size() != agent.params.size()) {
    throw ValidationError("adam_step: gradient size mismatch");
  }
  if (!grad.allFinite()) {
    throw NumericError("adam_step: non-finite gradient at step " +
                       std::to_string(agent.step + 1));
  }
  agent.step += 1;
  const double lr = agent.config.learning_rate;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(agent.step));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(agent.step));

  agent.adam_m = kAdamBeta1 * agent.adam_m + (1.0 - kAdamBeta1) * grad;
  agent.adam_v.array() =
      kAdamBeta2 * agent.adam_v.array() + (1.0 - kAdamBeta2) * grad.array().square();
  agent.params.array() -=
      lr * (agent.adam_m.array() / bc1) /
      ((agent.adam_v.array() / bc2).sqrt() + kAdamEpsilon);

  if (!agent.params.allFinite()) {
    throw NumericError("adam_step: non-finite parameters after step " +
                       std::to_string(agent.step));
  }
}

namespace {

constexpr char kCheckpointMagic[9] = "LLAGENT1";

template <typename T>
void write_pod(std::ostream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw ParseError("checkpoint: truncated read");
  return value;
}

void write_string(std::ostream& os, const std::string& s) {
  write_pod<std::uint64_t>(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  const auto len = read_pod<std::uint64_t>(is);
  std::string s(len, '\0');
  is.read(s.data(), static_cast<std::streamsize>(len));
  if (!is) throw ParseError("checkpoint: truncated string");
  return s;
}

void write_vector(std::ostream& os, const Eigen::VectorXd& v) {
  write_pod<std::uint64_t>(os, static_cast<std::uint64_t>(v.size()));
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Eigen::VectorXd read_vector(std::istream& is) {
  const auto n = read_pod<std::uint64_t>(is);
  Eigen::VectorXd v(static_cast<long>(n));
  is.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw ParseError("checkpoint: truncated vector");
  return v;
}

}  // namespace

void save_agent(const AgentState& agent, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");

  os.write(kCheckpointMagic, 8);
  write_pod<std::int32_t>(os, agent.config.hidden_dim);
  write_pod<std::int32_t>(os, agent.config.embed_dim);
  write_pod<std::int32_t>(os, agent.config.encoder_out_dim);
  write_pod<std::int32_t>(os, agent.config.encoder_layers);
  write_pod<double>(os, agent.config.alpha_con);
  write_pod<double>(os, agent.config.temperature);
  write_pod<double>(os, agent.config.learning_rate);
  write_pod<std::int32_t>(os, agent.config.max_decode_len);
  write_pod<std::int32_t>(os, static_cast<std::int32_t>(agent.config.similarity));
  write_string(os, agent.vocab.alphabet);
  write_pod<std::int64_t>(os, agent.step);
  write_vector(os, agent.params);
  write_vector(os, agent.adam_m);
  write_vector(os, agent.adam_v);
  std::ostringstream rng_text;
  rng_text << agent.rng;
  write_string(os, rng_text.str());
  if (!os) throw Error("write failed: " + path.string());
}

AgentState load_agent(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open checkpoint: " + path.string());

  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
    throw ParseError("checkpoint: bad magic in " + path.string());
  }
  AgentConfig config;
  config.hidden_dim = read_pod<std::int32_t>(is);
  config.embed_dim = read_pod<std::int32_t>(is);
  config.encoder_out_dim = read_pod<std::int32_t>(is);
  config.encoder_layers = read_pod<std::int32_t>(is);
  config.alpha_con = read_pod<double>(is);
  config.temperature = read_pod<double>(is);
  config.learning_rate = read_pod<double>(is);
  config.max_decode_len = read_pod<std::int32_t>(is);
  config.similarity = static_cast<Similarity>(read_pod<std::int32_t>(is));

  AgentState agent;
  agent.config = config;
  agent.vocab = Vocab{read_string(is)};
  agent.layout = ParamLayout(config, agent.vocab.size());
  agent.step = read_pod<std::int64_t>(is);
  agent.params = read_vector(is);
  agent.adam_m = read_vector(is);
  agent.adam_v = read_vector(is);
  if (agent.params.size() != agent.layout.total_size()) {
    throw ParseError("checkpoint: parameter count does not match layout");
  }
  std::istringstream rng_text(read_string(is));
  rng_text >> agent.rng;
  if (rng_text.fail()) throw ParseError("checkpoint: bad rng state");
  return agent;
}

}  // namespace langlearn
