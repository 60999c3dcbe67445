#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "langlearn/language.hpp"
#include "langlearn/scene.hpp"

namespace langlearn {

// Recipe for synthesizing one input language. The meaning grid is
// shapes x keys(angle_morphemes); the default spec spans the 36-scene grid.
struct GeneratorSpec {
  double target_structure = 1.0;
  double tolerance = 0.03;
  std::vector<std::string> shape_morphemes;  // one per shape, bijective
  std::map<int, std::string> angle_morphemes;  // angle -> morpheme, bijective
  char separator = '-';
  int max_attempts = 20000;

  std::vector<Scene> grid() const;
  std::string alphabet() const;  // sorted unique characters incl. separator
};

// Morpheme inventory whose pairwise edit distances track circular angle
// distance; yields a train-set structure score around 0.87-0.89.
GeneratorSpec default_generator_spec();

// default_generator_spec with the tolerance tightened to 0.025 so that ten
// evenly spaced targets stay pairwise separated by at least 0.04.
GeneratorSpec default_suite_spec();

// Deterministic seeded 23/13 partition of a 36-scene grid. Resamples until
// every shape appears in both splits.
struct SceneSplit {
  std::vector<Scene> train;  // 23, sorted
  std::vector<Scene> test;   // 13, sorted
};
SceneSplit split_scenes(const std::vector<Scene>& all, std::uint64_t seed);

// Fully compositional language: label = shape morpheme + separator + angle
// morpheme. Throws ValidationError on morpheme collisions.
InputLanguage generate_compositional(const GeneratorSpec& spec, std::uint64_t seed);

// Rejection sampling toward spec.target_structure: each attempt replaces a
// random subset of labels with random strings (lengths drawn from the
// language's own length distribution) and/or permutes label-scene
// assignments, until the recomputed train-set structure lands within
// target +- tolerance. Throws UnreachableTargetError after max_attempts.
InputLanguage degrade(const InputLanguage& lang, const GeneratorSpec& spec,
                      std::uint64_t seed);

// generate_compositional followed by degrade; the stored language seed
// regenerates the language byte-identically under the same spec.
InputLanguage synthesize_language(const GeneratorSpec& spec, std::uint64_t seed);

// One language per target (ascending), each from an independently derived
// sub-seed. Ids are "L00", "L01", ... in target order.
std::vector<InputLanguage> synthesize_suite(const std::vector<double>& targets,
                                            std::uint64_t master_seed,
                                            const GeneratorSpec& base_spec);
std::vector<InputLanguage> synthesize_suite(const std::vector<double>& targets,
                                            std::uint64_t master_seed);

// Ten targets evenly spanning [0.05, max_achievable], where max_achievable is
// the undegraded structure score of the suite's top language.
std::vector<double> default_suite_targets(std::uint64_t master_seed,
                                          const GeneratorSpec& base_spec,
                                          int count = 10);

}  // namespace langlearn
