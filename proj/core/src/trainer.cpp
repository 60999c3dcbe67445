#include "langlearn/trainer.hpp"

#include <algorithm>
#include <numeric>

#include "langlearn/error.hpp"

namespace langlearn {

namespace {

constexpr std::uint64_t kDistractorTag = 0x64697374;

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  return order;
}

}  // namespace

RoundPlan make_round_plan(const InputLanguage& lang, int round, int distractor_count,
                          Rng& agent_rng) {
  const std::size_t n = lang.train_scenes.size();
  if (distractor_count < 1 || static_cast<std::size_t>(distractor_count) >= n) {
    throw ValidationError("make_round_plan: distractor count must be in [1, n_train)");
  }

  RoundPlan plan;
  plan.round = round;
  plan.exposure_order = shuffled_indices(n, agent_rng);
  plan.guessing_order = shuffled_indices(n, agent_rng);
  plan.production_order = shuffled_indices(n, agent_rng);

  // Identical distractors for every agent learning this language: the draw
  // is keyed by (language seed, round, item).
  plan.distractors.resize(n);
  for (std::size_t item = 0; item < n; ++item) {
    Rng draw(mix_seed(lang.seed ^ kDistractorTag, static_cast<std::uint64_t>(round),
                      static_cast<std::uint64_t>(item)));
    std::vector<std::size_t> others;
    others.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != item) others.push_back(j);
    }
    draw.shuffle(others);
    DistractorSet& set = plan.distractors[item];
    set.target = lang.train_scenes[item];
    set.distractors.reserve(static_cast<std::size_t>(distractor_count));
    for (int k = 0; k < distractor_count; ++k) {
      set.distractors.push_back(lang.train_scenes[others[static_cast<std::size_t>(k)]]);
    }
  }
  return plan;
}

ExposureResult run_exposure_block(AgentState& agent,
                                  const std::vector<std::pair<Scene, Label>>& items,
                                  const std::vector<std::size_t>& order,
                                  int batch_size) {
  if (batch_size < 1) throw ValidationError("exposure block: batch size must be >= 1");

  ExposureResult result;
  int batches = 0;
  Eigen::VectorXd grad(agent.params.size());
  for (std::size_t start = 0; start < order.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end =
        std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    std::vector<std::pair<Scene, Label>> chunk;
    chunk.reserve(end - start);
    for (std::size_t i = start; i < end; ++i) chunk.push_back(items[order[i]]);
    const Batch batch = make_batch(agent, chunk);

    grad.setZero();
    double loss = token_cross_entropy(agent, batch, &grad);
    if (batch.size() >= 2) {
      Eigen::VectorXd con_grad = Eigen::VectorXd::Zero(grad.size());
      const double con = ntxent_inbatch(agent, batch, &con_grad);
      loss += agent.config.alpha_con * con;
      grad += agent.config.alpha_con * con_grad;
    } else {
      ++result.contrastive_skipped;  // a single item has no negatives
    }
    adam_step(agent, grad);
    result.mean_loss += loss;
    ++batches;
  }
  result.mean_loss /= static_cast<double>(batches);
  return result;
}

GuessingResult run_guessing_block(AgentState& agent,
                                  const std::vector<std::pair<Scene, Label>>& items,
                                  const std::vector<std::size_t>& order,
                                  const std::vector<DistractorSet>& distractors) {
  GuessingResult result;
  Eigen::VectorXd grad(agent.params.size());
  for (const std::size_t item : order) {
    const auto& [scene, label] = items[item];
    const DistractorSet& set = distractors[item];

    const Batch pair_batch = make_batch(agent, {{items[item]}});
    grad.setZero();
    double loss = token_cross_entropy(agent, pair_batch, &grad);

    std::vector<SceneVector> candidates;
    candidates.reserve(set.distractors.size() + 1);
    candidates.push_back(encode_scene(scene));
    for (const Scene& d : set.distractors) candidates.push_back(encode_scene(d));

    Eigen::VectorXd con_grad = Eigen::VectorXd::Zero(grad.size());
    const CandidateLoss con = candidate_contrastive(
        agent, agent.vocab.encode(label), candidates, 0, &con_grad);
    loss += agent.config.alpha_con * con.loss;
    grad += agent.config.alpha_con * con_grad;

    adam_step(agent, grad);
    result.mean_loss += loss;
    result.accuracy += con.predicted == 0 ? 1.0 : 0.0;
  }
  result.mean_loss /= static_cast<double>(order.size());
  result.accuracy /= static_cast<double>(order.size());
  return result;
}

double run_production_block(AgentState& agent,
                            const std::vector<std::pair<Scene, Label>>& items,
                            const std::vector<std::size_t>& order, int batch_size) {
  if (batch_size < 1) throw ValidationError("production block: batch size must be >= 1");

  double mean_loss = 0.0;
  int batches = 0;
  Eigen::VectorXd grad(agent.params.size());
  for (std::size_t start = 0; start < order.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end =
        std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    std::vector<std::pair<Scene, Label>> chunk;
    chunk.reserve(end - start);
    for (std::size_t i = start; i < end; ++i) chunk.push_back(items[order[i]]);
    const Batch batch = make_batch(agent, chunk);

    grad.setZero();
    const double loss = token_cross_entropy(agent, batch, &grad);
    adam_step(agent, grad);
    mean_loss += loss;
    ++batches;
  }
  return mean_loss / static_cast<double>(batches);
}

MemorizationResult memorization_test(
    const AgentState& agent, const std::vector<std::pair<Scene, Label>>& train_items) {
  MemorizationResult result;
  result.labels.reserve(train_items.size());
  std::vector<Label> gold;
  gold.reserve(train_items.size());
  for (const auto& [scene, label] : train_items) {
    result.labels.push_back(generate_label(agent, encode_scene(scene)).label);
    gold.push_back(label);
  }
  result.similarity = production_similarity(result.labels, gold);
  return result;
}

GeneralizationResult generalization_test(
    const AgentState& agent, const std::vector<Scene>& test_scenes,
    const std::vector<std::pair<Scene, Label>>& train_productions,
    AngleDiffMode angle_mode) {
  GeneralizationResult result;
  result.labels.reserve(test_scenes.size());
  std::vector<std::pair<Scene, Label>> test_productions;
  test_productions.reserve(test_scenes.size());
  for (const Scene& scene : test_scenes) {
    Label label = generate_label(agent, encode_scene(scene)).label;
    test_productions.emplace_back(scene, label);
    result.labels.push_back(std::move(label));
  }
  const GeneralizationScore score =
      generalization_score(train_productions, test_productions, angle_mode);
  result.score = score.value;
  result.degenerate = score.degenerate;
  return result;
}

std::vector<RoundRecord> train_agent(const InputLanguage& lang, std::uint64_t seed,
                                     const TrainerOptions& options,
                                     AgentState* final_state) {
  const ValidationReport report = validate_language(lang);
  if (!report.passed()) {
    throw ValidationError("train_agent: invalid language " + lang.id + ":\n" +
                          report.to_string());
  }
  if (options.rounds < 1) throw ValidationError("train_agent: rounds must be >= 1");

  AgentState agent = init_agent(options.agent, lang.alphabet, seed);
  const auto train_items = lang.train_items();

  std::vector<RoundRecord> records;
  records.reserve(static_cast<std::size_t>(options.rounds));
  for (int round = 1; round <= options.rounds; ++round) {
    const RoundPlan plan =
        make_round_plan(lang, round, options.distractor_count, agent.rng);

    RoundRecord record;
    record.language_id = lang.id;
    record.structure = lang.structure;
    record.agent_seed = seed;
    record.round = round;

    try {
      const ExposureResult exposure = run_exposure_block(
          agent, train_items, plan.exposure_order, options.exposure_batch_size);
      const GuessingResult guessing = run_guessing_block(
          agent, train_items, plan.guessing_order, plan.distractors);
      const double production = run_production_block(
          agent, train_items, plan.production_order, options.production_batch_size);

      record.losses = {exposure.mean_loss, guessing.mean_loss, production};
      record.guessing_accuracy = guessing.accuracy;
    } catch (const NumericError& e) {
      throw NumericError("train_agent: language " + lang.id + " seed " +
                         std::to_string(seed) + " round " + std::to_string(round) +
                         ": " + e.what());
    }

    MemorizationResult memo = memorization_test(agent, train_items);
    record.production_similarity = memo.similarity;

    std::vector<std::pair<Scene, Label>> own_train_productions;
    own_train_productions.reserve(train_items.size());
    for (std::size_t i = 0; i < train_items.size(); ++i) {
      own_train_productions.emplace_back(train_items[i].first, memo.labels[i]);
    }
    record.memorization_labels = std::move(memo.labels);

    GeneralizationResult gen = generalization_test(
        agent, lang.test_scenes, own_train_productions, options.angle_mode);
    record.generalization_score = gen.score;
    record.generalization_degenerate = gen.degenerate;
    record.generalization_labels = std::move(gen.labels);

    records.push_back(std::move(record));
  }
  if (final_state != nullptr) {
    *final_state = std::move(agent);
  }
  return records;
}

}  // namespace langlearn
