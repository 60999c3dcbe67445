#include "langlearn/net.hpp"

#include <algorithm>
#include <cmath>

#include "langlearn/error.hpp"

namespace langlearn {

namespace {

constexpr double kNormEpsilon = 1e-12;

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd sigmoid(const MatrixXd& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

// ---------------------------------------------------------------------------
// Encoder
// ---------------------------------------------------------------------------

struct EncoderTrace {
  MatrixXd x;    // 6 x B
  MatrixXd act;  // hidden x B, tanh activations (2-layer only)
  MatrixXd out;  // encoder_out x B
};

EncoderTrace encoder_forward(const AgentState& a,
                             const std::vector<SceneVector>& scenes) {
  const long batch = static_cast<long>(scenes.size());
  EncoderTrace tr;
  tr.x.resize(6, batch);
  for (long b = 0; b < batch; ++b) {
    for (int i = 0; i < 6; ++i) tr.x(i, b) = scenes[static_cast<std::size_t>(b)][i];
  }
  const auto w1 = a.tensor(Tensor::kEncW1);
  const auto b1 = a.tensor(Tensor::kEncB1);
  if (a.config.encoder_layers == 2) {
    tr.act = ((w1 * tr.x).colwise() + b1.col(0)).array().tanh().matrix();
    const auto w2 = a.tensor(Tensor::kEncW2);
    const auto b2 = a.tensor(Tensor::kEncB2);
    tr.out = (w2 * tr.act).colwise() + b2.col(0);
  } else {
    tr.out = (w1 * tr.x).colwise() + b1.col(0);
  }
  return tr;
}

void encoder_backward(const AgentState& a, const EncoderTrace& tr,
                      const MatrixXd& dout, VectorXd& grad) {
  const ParamLayout& layout = a.layout;
  if (a.config.encoder_layers == 2) {
    layout.map(grad, Tensor::kEncW2) += dout * tr.act.transpose();
    layout.map(grad, Tensor::kEncB2).col(0) += dout.rowwise().sum();
    const auto w2 = a.tensor(Tensor::kEncW2);
    const MatrixXd dact = w2.transpose() * dout;
    const MatrixXd dpre = (dact.array() * (1.0 - tr.act.array().square())).matrix();
    layout.map(grad, Tensor::kEncW1) += dpre * tr.x.transpose();
    layout.map(grad, Tensor::kEncB1).col(0) += dpre.rowwise().sum();
  } else {
    layout.map(grad, Tensor::kEncW1) += dout * tr.x.transpose();
    layout.map(grad, Tensor::kEncB1).col(0) += dout.rowwise().sum();
  }
}

// ---------------------------------------------------------------------------
// LSTM (gate order i, f, g, o). Columns are batch items; sequences shorter
// than the longest one freeze their state at their own length, so the final
// step always holds every column's end state.
// ---------------------------------------------------------------------------

struct LstmStep {
  std::vector<int> ids;  // input token per column, -1 when frozen
  Eigen::ArrayXd mask;   // 1 active, 0 frozen
  MatrixXd x;            // embed x B
  MatrixXd gi, gf, gg, go, tanh_c;  // gate values before freezing
  MatrixXd c, h;                     // post-freeze state
};

struct LstmTrace {
  MatrixXd h0, c0;
  std::vector<LstmStep> steps;

  const MatrixXd& h_prev(std::size_t t) const { return t == 0 ? h0 : steps[t - 1].h; }
  const MatrixXd& c_prev(std::size_t t) const { return t == 0 ? c0 : steps[t - 1].c; }
};

LstmTrace lstm_forward(const AgentState& a, Tensor wx_t, Tensor wh_t, Tensor b_t,
                       const std::vector<std::vector<int>>& input_ids,
                       const MatrixXd& h0) {
  const long h = a.config.hidden_dim;
  const long e = a.config.embed_dim;
  const long batch = static_cast<long>(input_ids.size());
  std::size_t max_len = 0;
  for (const auto& ids : input_ids) max_len = std::max(max_len, ids.size());

  const auto embed = a.tensor(Tensor::kEmbed);
  const auto wx = a.tensor(wx_t);
  const auto wh = a.tensor(wh_t);
  const auto bias = a.tensor(b_t);

  LstmTrace tr;
  tr.h0 = h0;
  tr.c0 = MatrixXd::Zero(h, batch);
  tr.steps.resize(max_len);

  for (std::size_t t = 0; t < max_len; ++t) {
    LstmStep& step = tr.steps[t];
    step.ids.assign(static_cast<std::size_t>(batch), -1);
    step.mask = Eigen::ArrayXd::Zero(batch);
    step.x = MatrixXd::Zero(e, batch);
    for (long b = 0; b < batch; ++b) {
      const auto& ids = input_ids[static_cast<std::size_t>(b)];
      if (t < ids.size()) {
        step.ids[static_cast<std::size_t>(b)] = ids[t];
        step.mask(b) = 1.0;
        step.x.col(b) = embed.row(ids[t]).transpose();
      }
    }

    const MatrixXd& hp = tr.h_prev(t);
    const MatrixXd& cp = tr.c_prev(t);
    MatrixXd pre = wx * step.x + wh * hp;
    pre.colwise() += bias.col(0);

    step.gi = sigmoid(pre.topRows(h));
    step.gf = sigmoid(pre.middleRows(h, h));
    step.gg = pre.middleRows(2 * h, h).array().tanh().matrix();
    step.go = sigmoid(pre.bottomRows(h));

    MatrixXd c_new = step.gf.cwiseProduct(cp) + step.gi.cwiseProduct(step.gg);
    step.tanh_c = c_new.array().tanh().matrix();
    MatrixXd h_new = step.go.cwiseProduct(step.tanh_c);

    step.c = c_new;
    step.h = h_new;
    for (long b = 0; b < batch; ++b) {
      if (step.mask(b) == 0.0) {
        step.c.col(b) = cp.col(b);
        step.h.col(b) = hp.col(b);
      }
    }
  }
  return tr;
}

// dh_ext: per-step external gradient on h_t (may be empty); dh_final:
// gradient on the state after the last step. Embedding input gradients are
// scattered into d_embed; returns the gradient on h0.
MatrixXd lstm_backward(const AgentState& a, const LstmTrace& tr, Tensor wx_t,
                       Tensor wh_t, Tensor b_t,
                       const std::vector<MatrixXd>& dh_ext,
                       const MatrixXd& dh_final, VectorXd& grad,
                       MatrixXd& d_embed) {
  const long h = a.config.hidden_dim;
  const long batch = tr.h0.cols();
  const auto wx = a.tensor(wx_t);
  const auto wh = a.tensor(wh_t);

  auto g_wx = a.layout.map(grad, wx_t);
  auto g_wh = a.layout.map(grad, wh_t);
  auto g_b = a.layout.map(grad, b_t);

  MatrixXd dh_next = dh_final.size() ? dh_final : MatrixXd::Zero(h, batch);
  MatrixXd dc_next = MatrixXd::Zero(h, batch);

  for (std::size_t t = tr.steps.size(); t-- > 0;) {
    const LstmStep& step = tr.steps[t];
    MatrixXd dh_t = dh_next;
    if (!dh_ext.empty() && dh_ext[t].size()) dh_t += dh_ext[t];
    const MatrixXd& dc_t = dc_next;

    const MatrixXd& cp = tr.c_prev(t);
    const MatrixXd& hp = tr.h_prev(t);

    const MatrixXd d_o = dh_t.cwiseProduct(step.tanh_c);
    const MatrixXd dc_total =
        dc_t + (dh_t.array() * step.go.array() * (1.0 - step.tanh_c.array().square()))
                   .matrix();
    const MatrixXd d_f = dc_total.cwiseProduct(cp);
    const MatrixXd d_i = dc_total.cwiseProduct(step.gg);
    const MatrixXd d_g = dc_total.cwiseProduct(step.gi);

    MatrixXd da(4 * h, batch);
    da.topRows(h) = (d_i.array() * step.gi.array() * (1.0 - step.gi.array())).matrix();
    da.middleRows(h, h) =
        (d_f.array() * step.gf.array() * (1.0 - step.gf.array())).matrix();
    da.middleRows(2 * h, h) = (d_g.array() * (1.0 - step.gg.array().square())).matrix();
    da.bottomRows(h) = (d_o.array() * step.go.array() * (1.0 - step.go.array())).matrix();
    for (long b = 0; b < batch; ++b) {
      if (step.mask(b) == 0.0) da.col(b).setZero();
    }

    g_wx += da * step.x.transpose();
    g_wh += da * hp.transpose();
    g_b.col(0) += da.rowwise().sum();

    const MatrixXd dx = wx.transpose() * da;
    for (long b = 0; b < batch; ++b) {
      const int id = step.ids[static_cast<std::size_t>(b)];
      if (id >= 0) d_embed.row(id) += dx.col(b).transpose();
    }

    MatrixXd dh_prev = wh.transpose() * da;
    MatrixXd dc_prev = dc_total.cwiseProduct(step.gf);
    for (long b = 0; b < batch; ++b) {
      if (step.mask(b) == 0.0) {
        dh_prev.col(b) += dh_t.col(b);
        dc_prev.col(b) = dc_t.col(b);
      }
    }
    dh_next = std::move(dh_prev);
    dc_next = std::move(dc_prev);
  }
  return dh_next;
}

std::vector<std::vector<int>> reader_inputs(const Batch& batch) {
  std::vector<std::vector<int>> inputs(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    inputs[b].reserve(batch.labels[b].size() + 2);
    inputs[b].push_back(Vocab::kBos);
    inputs[b].insert(inputs[b].end(), batch.labels[b].begin(), batch.labels[b].end());
    inputs[b].push_back(Vocab::kEos);
  }
  return inputs;
}

// Final reader states projected to label latents; h_fin receives the
// per-column end states.
MatrixXd reader_latents(const AgentState& a, const LstmTrace& tr, MatrixXd& h_fin) {
  h_fin = tr.steps.empty() ? tr.h0 : tr.steps.back().h;
  const auto proj_w = a.tensor(Tensor::kProjW);
  const auto proj_b = a.tensor(Tensor::kProjB);
  return (proj_w * h_fin).colwise() + proj_b.col(0);
}

struct SimilarityTrace {
  MatrixXd shat;           // raw similarities (before 1/tau)
  Eigen::ArrayXd h_norm;   // per column of H
  Eigen::ArrayXd z_norm;   // per column of Z
};

SimilarityTrace similarity_forward(const AgentState& a, const MatrixXd& latents_h,
                                   const MatrixXd& latents_z) {
  SimilarityTrace tr;
  const long rows = latents_h.cols();
  const long cols = latents_z.cols();
  tr.shat.resize(rows, cols);
  if (a.config.similarity == Similarity::kCosine) {
    tr.h_norm = latents_h.colwise().norm().array();
    tr.z_norm = latents_z.colwise().norm().array();
    for (long i = 0; i < rows; ++i) {
      for (long j = 0; j < cols; ++j) {
        tr.shat(i, j) = latents_h.col(i).dot(latents_z.col(j)) /
                        ((tr.h_norm(i) + kNormEpsilon) * (tr.z_norm(j) + kNormEpsilon));
      }
    }
  } else {
    tr.shat = latents_h.transpose() * latents_z;
  }
  return tr;
}

// Backward through shat into dH and dZ given d(shat).
void similarity_backward(const AgentState& a, const SimilarityTrace& tr,
                         const MatrixXd& latents_h, const MatrixXd& latents_z,
                         const MatrixXd& dshat, MatrixXd& dh, MatrixXd& dz) {
  const long rows = tr.shat.rows();
  const long cols = tr.shat.cols();
  if (a.config.similarity == Similarity::kDot) {
    dh += latents_z * dshat.transpose();
    dz += latents_h * dshat;
    return;
  }
  for (long i = 0; i < rows; ++i) {
    const double hn = tr.h_norm(i);
    const double ha = hn + kNormEpsilon;
    for (long j = 0; j < cols; ++j) {
      const double d = dshat(i, j);
      if (d == 0.0) continue;
      const double zn = tr.z_norm(j);
      const double za = zn + kNormEpsilon;
      const double inv = 1.0 / (ha * za);
      dh.col(i) += d * (latents_z.col(j) * inv);
      if (hn > 0.0) {
        dh.col(i) -= d * tr.shat(i, j) / (hn * ha) * latents_h.col(i);
      }
      dz.col(j) += d * (latents_h.col(i) * inv);
      if (zn > 0.0) {
        dz.col(j) -= d * tr.shat(i, j) / (zn * za) * latents_z.col(j);
      }
    }
  }
}

double log_sum_exp(const VectorXd& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

VectorXd softmax(const VectorXd& v) {
  const double m = v.maxCoeff();
  VectorXd e = (v.array() - m).exp();
  return e / e.sum();
}

}  // namespace

Batch make_batch(const AgentState& agent,
                 std::span<const std::pair<Scene, Label>> items) {
  Batch batch;
  batch.scenes.reserve(items.size());
  batch.labels.reserve(items.size());
  for (const auto& [scene, label] : items) {
    batch.scenes.push_back(encode_scene(scene));
    batch.labels.push_back(agent.vocab.encode(label));
  }
  return batch;
}

Eigen::VectorXd encode(const AgentState& agent, const SceneVector& scene) {
  return encoder_forward(agent, {scene}).out.col(0);
}

Eigen::MatrixXd encode_batch(const AgentState& agent,
                             const std::vector<SceneVector>& scenes) {
  return encoder_forward(agent, scenes).out;
}

Eigen::VectorXd read_tokens(const AgentState& agent, const std::vector<int>& tokens) {
  Batch batch;
  batch.scenes.resize(1);
  batch.labels = {tokens};
  const auto inputs = reader_inputs(batch);
  const LstmTrace tr =
      lstm_forward(agent, Tensor::kReaderWx, Tensor::kReaderWh, Tensor::kReaderB,
                   inputs, MatrixXd::Zero(agent.config.hidden_dim, 1));
  MatrixXd h_fin;
  return reader_latents(agent, tr, h_fin).col(0);
}

Eigen::VectorXd read_label(const AgentState& agent, const Label& label) {
  return read_tokens(agent, agent.vocab.encode(label));
}

namespace {

// Decoding loop shared by the greedy and sampling modes. The picker chooses
// among EOS and the character ids; BOS/PAD are never emitted.
template <typename Picker>
GenerateResult decode_loop(const AgentState& agent, const VectorXd& latent,
                           Picker&& pick) {
  GenerateResult out;
  const long h = agent.config.hidden_dim;
  const auto embed = agent.tensor(Tensor::kEmbed);
  const auto wx = agent.tensor(Tensor::kWriterWx);
  const auto wh = agent.tensor(Tensor::kWriterWh);
  const auto bias = agent.tensor(Tensor::kWriterB);
  const auto out_b = agent.tensor(Tensor::kWriterOutB);

  VectorXd state_h = latent;
  VectorXd state_c = VectorXd::Zero(h);
  int prev = Vocab::kBos;
  out.truncated = true;
  for (int step = 0; step < agent.config.max_decode_len; ++step) {
    const VectorXd x = embed.row(prev).transpose();
    VectorXd pre = wx * x + wh * state_h + bias.col(0);
    const VectorXd gi = sigmoid(pre.topRows(h));
    const VectorXd gf = sigmoid(pre.middleRows(h, h));
    const VectorXd gg = pre.middleRows(2 * h, h).array().tanh().matrix();
    const VectorXd go = sigmoid(pre.bottomRows(h));
    state_c = gf.cwiseProduct(state_c) + gi.cwiseProduct(gg);
    state_h = go.cwiseProduct(state_c.array().tanh().matrix());

    const VectorXd logits = embed * state_h + out_b.col(0);
    const int chosen = pick(logits);
    if (chosen == Vocab::kEos) {
      out.truncated = false;
      break;
    }
    out.label.push_back(agent.vocab.char_of(chosen));
    prev = chosen;
  }
  return out;
}

}  // namespace

GenerateResult generate_from_latent(const AgentState& agent, const VectorXd& latent) {
  return decode_loop(agent, latent, [&](const VectorXd& logits) {
    int best = Vocab::kEos;
    for (int id = Vocab::kFirstChar; id < agent.vocab.size(); ++id) {
      if (logits(id) > logits(best)) best = id;
    }
    return best;
  });
}

GenerateResult generate_label(const AgentState& agent, const SceneVector& scene) {
  return generate_from_latent(agent, encode(agent, scene));
}

GenerateResult generate_label(const AgentState& agent, const SceneVector& scene,
                              DecodeMode mode, Rng* rng) {
  if (mode == DecodeMode::kGreedy) return generate_label(agent, scene);
  if (rng == nullptr) {
    throw ValidationError("generate_label: sampling mode needs an rng");
  }
  return decode_loop(agent, encode(agent, scene), [&](const VectorXd& logits) {
    std::vector<int> allowed;
    allowed.push_back(Vocab::kEos);
    for (int id = Vocab::kFirstChar; id < agent.vocab.size(); ++id) allowed.push_back(id);
    VectorXd sub(static_cast<long>(allowed.size()));
    for (std::size_t i = 0; i < allowed.size(); ++i) {
      sub(static_cast<long>(i)) = logits(allowed[i]);
    }
    const VectorXd probs = softmax(sub);
    double u = rng->uniform();
    for (std::size_t i = 0; i < allowed.size(); ++i) {
      u -= probs(static_cast<long>(i));
      if (u <= 0.0) return allowed[i];
    }
    return allowed.back();
  });
}

double token_cross_entropy(const AgentState& agent, const Batch& batch,
                           Eigen::VectorXd* grad) {
  const std::size_t batch_size = batch.size();
  if (batch_size == 0) {
    throw ValidationError("token_cross_entropy: empty batch");
  }
  if (batch.labels.size() != batch_size) {
    throw ValidationError("token_cross_entropy: scenes and labels misaligned");
  }

  const EncoderTrace enc = encoder_forward(agent, batch.scenes);

  std::vector<std::vector<int>> inputs(batch_size);
  std::vector<std::vector<int>> targets(batch_size);
  std::size_t total_positions = 0;
  for (std::size_t b = 0; b < batch_size; ++b) {
    inputs[b].push_back(Vocab::kBos);
    inputs[b].insert(inputs[b].end(), batch.labels[b].begin(), batch.labels[b].end());
    targets[b] = batch.labels[b];
    targets[b].push_back(Vocab::kEos);
    total_positions += targets[b].size();
  }

  const LstmTrace tr = lstm_forward(agent, Tensor::kWriterWx, Tensor::kWriterWh,
                                    Tensor::kWriterB, inputs, enc.out);

  const auto embed = agent.tensor(Tensor::kEmbed);
  const auto out_b = agent.tensor(Tensor::kWriterOutB);
  const double scale = 1.0 / static_cast<double>(total_positions);

  double loss = 0.0;
  std::vector<MatrixXd> dh_ext;
  if (grad) dh_ext.resize(tr.steps.size());
  MatrixXd d_embed;
  if (grad) d_embed = MatrixXd::Zero(agent.vocab.size(), agent.config.embed_dim);

  for (std::size_t t = 0; t < tr.steps.size(); ++t) {
    const LstmStep& step = tr.steps[t];
    const MatrixXd logits = (embed * step.h).colwise() + out_b.col(0);
    MatrixXd dlogits;
    if (grad) dlogits = MatrixXd::Zero(logits.rows(), logits.cols());
    for (std::size_t b = 0; b < batch_size; ++b) {
      if (t >= targets[b].size()) continue;
      const int target = targets[b][t];
      const VectorXd col = logits.col(static_cast<long>(b));
      loss += scale * (log_sum_exp(col) - col(target));
      if (grad) {
        VectorXd p = softmax(col);
        p(target) -= 1.0;
        dlogits.col(static_cast<long>(b)) = scale * p;
      }
    }
    if (grad) {
      d_embed += dlogits * step.h.transpose();
      agent.layout.map(*grad, Tensor::kWriterOutB).col(0) += dlogits.rowwise().sum();
      dh_ext[t] = embed.transpose() * dlogits;
    }
  }

  if (grad) {
    const MatrixXd dh0 =
        lstm_backward(agent, tr, Tensor::kWriterWx, Tensor::kWriterWh,
                      Tensor::kWriterB, dh_ext, MatrixXd(), *grad, d_embed);
    encoder_backward(agent, enc, dh0, *grad);
    agent.layout.map(*grad, Tensor::kEmbed) += d_embed;
  }
  return loss;
}

double ntxent_inbatch(const AgentState& agent, const Batch& batch,
                      Eigen::VectorXd* grad) {
  const long batch_size = static_cast<long>(batch.size());
  if (batch_size < 2) {
    throw ValidationError("ntxent_inbatch: need batch size >= 2 for negatives");
  }

  const EncoderTrace enc = encoder_forward(agent, batch.scenes);
  const auto inputs = reader_inputs(batch);
  const LstmTrace rtr =
      lstm_forward(agent, Tensor::kReaderWx, Tensor::kReaderWh, Tensor::kReaderB,
                   inputs, MatrixXd::Zero(agent.config.hidden_dim, batch_size));
  MatrixXd h_fin;
  const MatrixXd latents_z = reader_latents(agent, rtr, h_fin);

  const SimilarityTrace sim = similarity_forward(agent, enc.out, latents_z);
  const double inv_tau = 1.0 / agent.config.temperature;
  const MatrixXd scores = sim.shat * inv_tau;

  double loss = 0.0;
  MatrixXd dscores = MatrixXd::Zero(batch_size, batch_size);
  const double dir_scale = 0.5 / static_cast<double>(batch_size);

  for (long i = 0; i < batch_size; ++i) {  // scene -> label
    const VectorXd row = scores.row(i).transpose();
    loss += dir_scale * (log_sum_exp(row) - row(i));
    if (grad) {
      VectorXd p = softmax(row);
      p(i) -= 1.0;
      dscores.row(i) += dir_scale * p.transpose();
    }
  }
  for (long j = 0; j < batch_size; ++j) {  // label -> scene
    const VectorXd col = scores.col(j);
    loss += dir_scale * (log_sum_exp(col) - col(j));
    if (grad) {
      VectorXd p = softmax(col);
      p(j) -= 1.0;
      dscores.col(j) += dir_scale * p;
    }
  }

  if (grad) {
    const MatrixXd dshat = dscores * inv_tau;
    MatrixXd dh = MatrixXd::Zero(enc.out.rows(), batch_size);
    MatrixXd dz = MatrixXd::Zero(latents_z.rows(), batch_size);
    similarity_backward(agent, sim, enc.out, latents_z, dshat, dh, dz);

    agent.layout.map(*grad, Tensor::kProjW) += dz * h_fin.transpose();
    agent.layout.map(*grad, Tensor::kProjB).col(0) += dz.rowwise().sum();
    const MatrixXd dh_fin = agent.tensor(Tensor::kProjW).transpose() * dz;

    MatrixXd d_embed = MatrixXd::Zero(agent.vocab.size(), agent.config.embed_dim);
    lstm_backward(agent, rtr, Tensor::kReaderWx, Tensor::kReaderWh, Tensor::kReaderB,
                  {}, dh_fin, *grad, d_embed);
    agent.layout.map(*grad, Tensor::kEmbed) += d_embed;
    encoder_backward(agent, enc, dh, *grad);
  }
  return loss;
}

CandidateLoss candidate_contrastive(const AgentState& agent,
                                    const std::vector<int>& label_tokens,
                                    const std::vector<SceneVector>& candidates,
                                    int target_index, Eigen::VectorXd* grad) {
  const long n_candidates = static_cast<long>(candidates.size());
  if (n_candidates == 0) {
    throw ValidationError("candidate_contrastive: no candidates");
  }
  if (target_index < 0 || target_index >= n_candidates) {
    throw ValidationError("candidate_contrastive: target index out of range");
  }
  if (n_candidates == 1) {
    return {0.0, 0, true};  // probability 1; nothing to learn
  }

  const EncoderTrace enc = encoder_forward(agent, candidates);

  Batch label_batch;
  label_batch.scenes.resize(1);
  label_batch.labels = {label_tokens};
  const auto inputs = reader_inputs(label_batch);
  const LstmTrace rtr =
      lstm_forward(agent, Tensor::kReaderWx, Tensor::kReaderWh, Tensor::kReaderB,
                   inputs, MatrixXd::Zero(agent.config.hidden_dim, 1));
  MatrixXd h_fin;
  const MatrixXd latent_z = reader_latents(agent, rtr, h_fin);

  // One row (the label), candidates as columns.
  const SimilarityTrace sim = similarity_forward(agent, latent_z, enc.out);
  const double inv_tau = 1.0 / agent.config.temperature;
  const VectorXd scores = sim.shat.row(0).transpose() * inv_tau;

  CandidateLoss result;
  scores.maxCoeff(&result.predicted);
  result.loss = log_sum_exp(scores) - scores(target_index);

  if (grad) {
    VectorXd p = softmax(scores);
    p(target_index) -= 1.0;
    const MatrixXd dshat = p.transpose() * inv_tau;  // 1 x C

    MatrixXd dz = MatrixXd::Zero(latent_z.rows(), 1);
    MatrixXd dh = MatrixXd::Zero(enc.out.rows(), n_candidates);
    similarity_backward(agent, sim, latent_z, enc.out, dshat, dz, dh);

    agent.layout.map(*grad, Tensor::kProjW) += dz * h_fin.transpose();
    agent.layout.map(*grad, Tensor::kProjB).col(0) += dz.rowwise().sum();
    const MatrixXd dh_fin = agent.tensor(Tensor::kProjW).transpose() * dz;

    MatrixXd d_embed = MatrixXd::Zero(agent.vocab.size(), agent.config.embed_dim);
    lstm_backward(agent, rtr, Tensor::kReaderWx, Tensor::kReaderWh, Tensor::kReaderB,
                  {}, dh_fin, *grad, d_embed);
    agent.layout.map(*grad, Tensor::kEmbed) += d_embed;
    encoder_backward(agent, enc, dh, *grad);
  }
  return result;
}

}  // namespace langlearn
