#include "langlearn/langgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "langlearn/error.hpp"
#include "langlearn/metrics.hpp"
#include "langlearn/rng.hpp"

namespace langlearn {

namespace {

// Sub-seed tags so the split, degradation, and suite streams are independent.
constexpr std::uint64_t kSplitTag = 0x73706c6974;
constexpr std::uint64_t kDegradeTag = 0x64656772;
constexpr std::uint64_t kSuiteTag = 0x7375697465;

}  // namespace

std::vector<Scene> GeneratorSpec::grid() const {
  std::vector<Scene> scenes;
  scenes.reserve(shape_morphemes.size() * angle_morphemes.size());
  for (int shape = 1; shape <= static_cast<int>(shape_morphemes.size()); ++shape) {
    for (const auto& [angle, morpheme] : angle_morphemes) {
      (void)morpheme;
      scenes.push_back({shape, angle});
    }
  }
  std::sort(scenes.begin(), scenes.end());
  return scenes;
}

std::string GeneratorSpec::alphabet() const {
  std::set<char> chars;
  for (const auto& m : shape_morphemes) chars.insert(m.begin(), m.end());
  for (const auto& [angle, m] : angle_morphemes) {
    (void)angle;
    chars.insert(m.begin(), m.end());
  }
  chars.insert(separator);
  return {chars.begin(), chars.end()};
}

GeneratorSpec default_generator_spec() {
  GeneratorSpec spec;
  spec.shape_morphemes = {"tup", "fas", "wef", "nif"};
  // Two-character circular sector code plus a fine-position character, so
  // that morpheme edit distance grows with circular angle distance.
  spec.angle_morphemes = {
      {30, "aat"}, {45, "aap"}, {60, "aam"},  {135, "aip"}, {150, "aim"},
      {225, "iip"}, {315, "iap"}, {330, "iam"}, {360, "aak"},
  };
  return spec;
}

GeneratorSpec default_suite_spec() {
  GeneratorSpec spec = default_generator_spec();
  spec.tolerance = 0.025;
  return spec;
}

SceneSplit split_scenes(const std::vector<Scene>& all, std::uint64_t seed) {
  if (all.size() != 36) {
    throw ValidationError("split_scenes: expected 36 scenes, got " +
                          std::to_string(all.size()));
  }
  for (const Scene& s : all) check_scene(s);

  Rng rng(mix_seed(seed, kSplitTag));
  std::vector<Scene> pool = all;
  constexpr int kMaxResamples = 1000;
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    rng.shuffle(pool);
    SceneSplit split;
    split.train.assign(pool.begin(), pool.begin() + 23);
    split.test.assign(pool.begin() + 23, pool.end());
    auto covers_all_shapes = [](const std::vector<Scene>& scenes) {
      std::set<int> shapes;
      for (const Scene& s : scenes) shapes.insert(s.shape);
      return static_cast<int>(shapes.size()) == kNumShapes;
    };
    if (covers_all_shapes(split.train) && covers_all_shapes(split.test)) {
      std::sort(split.train.begin(), split.train.end());
      std::sort(split.test.begin(), split.test.end());
      return split;
    }
  }
  throw ValidationError("split_scenes: shape coverage unreachable on this grid");
}

InputLanguage generate_compositional(const GeneratorSpec& spec, std::uint64_t seed) {
  if (spec.shape_morphemes.size() != static_cast<std::size_t>(kNumShapes)) {
    throw ValidationError("generate_compositional: need exactly 4 shape morphemes");
  }
  {
    std::set<std::string> unique(spec.shape_morphemes.begin(), spec.shape_morphemes.end());
    if (unique.size() != spec.shape_morphemes.size()) {
      throw ValidationError("generate_compositional: shape morpheme collision");
    }
  }
  {
    std::set<std::string> unique;
    for (const auto& [angle, m] : spec.angle_morphemes) {
      if (!scene_is_valid({1, angle})) {
        throw ValidationError("generate_compositional: angle off the grid: " +
                              std::to_string(angle));
      }
      if (m.empty() || !unique.insert(m).second) {
        throw ValidationError("generate_compositional: angle morpheme collision or empty");
      }
    }
  }

  InputLanguage lang;
  lang.id = "comp";
  lang.alphabet = spec.alphabet();
  lang.seed = seed;
  for (const Scene& scene : spec.grid()) {
    const Label label = spec.shape_morphemes[scene.shape - 1] + spec.separator +
                        spec.angle_morphemes.at(scene.angle);
    if (label.size() > kDefaultMaxLabelLen) {
      throw ValidationError("generate_compositional: label too long: " + label);
    }
    lang.items[scene] = label;
  }

  const SceneSplit split = split_scenes(spec.grid(), seed);
  lang.train_scenes = split.train;
  lang.test_scenes = split.test;
  lang.structure = topographic_similarity(lang, AngleDiffMode::kCircular);
  return lang;
}

namespace {

Label random_label(Rng& rng, const std::string& letters,
                   const std::vector<std::size_t>& lengths) {
  const std::size_t len = lengths[rng.index(lengths.size())];
  Label label;
  label.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    label.push_back(letters[rng.index(letters.size())]);
  }
  return label;
}

}  // namespace

InputLanguage degrade(const InputLanguage& lang, const GeneratorSpec& spec,
                      std::uint64_t seed) {
  const double target = spec.target_structure;
  if (std::abs(lang.structure - target) <= spec.tolerance) {
    InputLanguage out = lang;  // zero replacements accepted immediately
    out.seed = seed;
    return out;
  }

  // Random replacement strings use the letters only; the separator stays a
  // structural marker of the surviving compositional labels.
  std::string letters = lang.alphabet;
  letters.erase(std::remove(letters.begin(), letters.end(), spec.separator), letters.end());
  if (letters.empty()) {
    throw ValidationError("degrade: alphabet has no letters besides the separator");
  }
  std::vector<std::size_t> lengths;
  lengths.reserve(lang.items.size());
  for (const auto& [scene, label] : lang.items) {
    (void)scene;
    lengths.push_back(label.size());
  }

  const std::vector<std::pair<Scene, Label>> base = lang.all_items();
  const std::size_t n = base.size();
  std::set<Scene> train_set(lang.train_scenes.begin(), lang.train_scenes.end());

  // Replacing more labels lowers the structure score roughly monotonically;
  // start near the proportional estimate and jitter.
  const double depth = std::clamp(
      (lang.structure - target) / std::max(lang.structure, 1e-9), 0.0, 1.0);
  const long base_count = std::lround(depth * static_cast<double>(n));

  Rng rng(mix_seed(seed, kDegradeTag));
  for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
    std::vector<std::pair<Scene, Label>> candidate = base;

    const long jitter = static_cast<long>(rng.bounded(7)) - 3;
    const std::size_t replace_count = static_cast<std::size_t>(
        std::clamp(base_count + jitter, 0L, static_cast<long>(n)));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    for (std::size_t i = 0; i < replace_count; ++i) {
      candidate[order[i]].second = random_label(rng, letters, lengths);
    }

    // Optionally scramble some of the surviving assignments.
    if (replace_count < n && rng.uniform() < 0.3) {
      std::vector<std::size_t> keep(order.begin() + replace_count, order.end());
      rng.shuffle(keep);
      const std::size_t swap_count = rng.index(keep.size() + 1);
      std::vector<Label> moved;
      moved.reserve(swap_count);
      for (std::size_t i = 0; i < swap_count; ++i) moved.push_back(candidate[keep[i]].second);
      if (swap_count > 1) {
        std::rotate(moved.begin(), moved.begin() + 1, moved.end());
      }
      for (std::size_t i = 0; i < swap_count; ++i) candidate[keep[i]].second = moved[i];
    }

    std::vector<std::pair<Scene, Label>> train_items;
    train_items.reserve(train_set.size());
    for (const auto& item : candidate) {
      if (train_set.count(item.first)) train_items.push_back(item);
    }
    double structure = 0.0;
    try {
      structure = topographic_similarity(train_items, AngleDiffMode::kCircular);
    } catch (const UndefinedCorrelationError&) {
      continue;  // constant labels; reject the proposal
    }
    if (std::abs(structure - target) <= spec.tolerance) {
      InputLanguage out = lang;
      out.items.clear();
      for (const auto& [scene, label] : candidate) out.items[scene] = label;
      out.structure = structure;
      out.seed = seed;
      return out;
    }
  }
  throw UnreachableTargetError(
      "degrade: target " + std::to_string(target) + " +- " +
      std::to_string(spec.tolerance) + " not reached in " +
      std::to_string(spec.max_attempts) + " attempts (start " +
      std::to_string(lang.structure) + ")");
}

InputLanguage synthesize_language(const GeneratorSpec& spec, std::uint64_t seed) {
  InputLanguage comp = generate_compositional(spec, seed);
  InputLanguage out = degrade(comp, spec, seed);
  out.seed = seed;
  return out;
}

std::vector<InputLanguage> synthesize_suite(const std::vector<double>& targets,
                                            std::uint64_t master_seed,
                                            const GeneratorSpec& base_spec) {
  if (targets.empty()) {
    throw ValidationError("synthesize_suite: no targets");
  }
  if (!std::is_sorted(targets.begin(), targets.end())) {
    throw ValidationError("synthesize_suite: targets must be sorted ascending");
  }
  std::vector<InputLanguage> suite;
  suite.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    GeneratorSpec spec = base_spec;
    spec.target_structure = targets[i];
    InputLanguage lang = synthesize_language(spec, mix_seed(master_seed, kSuiteTag, i));
    char id[8];
    std::snprintf(id, sizeof(id), "L%02zu", i);
    lang.id = id;
    suite.push_back(std::move(lang));
  }
  return suite;
}

std::vector<InputLanguage> synthesize_suite(const std::vector<double>& targets,
                                            std::uint64_t master_seed) {
  return synthesize_suite(targets, master_seed, default_generator_spec());
}

std::vector<double> default_suite_targets(std::uint64_t master_seed,
                                          const GeneratorSpec& base_spec, int count) {
  if (count < 1) {
    throw ValidationError("default_suite_targets: count must be positive");
  }
  // The top language of the suite stays undegraded; its structure is the
  // maximum achievable and anchors the upper end of the spectrum.
  const InputLanguage top = generate_compositional(
      base_spec, mix_seed(master_seed, kSuiteTag, static_cast<std::uint64_t>(count - 1)));
  const double low = 0.05;
  const double high = top.structure;
  std::vector<double> targets(count);
  if (count == 1) {
    targets[0] = high;
    return targets;
  }
  for (int i = 0; i < count; ++i) {
    targets[i] = low + (high - low) * static_cast<double>(i) / (count - 1);
  }
  return targets;
}

}  // namespace langlearn
