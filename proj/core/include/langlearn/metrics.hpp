#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "langlearn/language.hpp"
#include "langlearn/scene.hpp"

namespace langlearn {

struct PairedProduction {
  Scene scene;
  Label produced;
  Label reference;
};

// Minimal insert/delete/substitute count with unit costs.
std::size_t levenshtein(std::string_view a, std::string_view b);

// levenshtein / max(len). Both strings empty is defined as 0.
double normalized_edit_distance(std::string_view a, std::string_view b);

// Mean over pairs of 1 - normalized_edit_distance(produced, reference).
double production_similarity(std::span<const PairedProduction> pairs);
double production_similarity(const std::vector<Label>& produced,
                             const std::vector<Label>& reference);

// Standard Pearson r. Throws UndefinedCorrelationError for fewer than three
// points or zero variance on either side.
double pearson(std::span<const double> xs, std::span<const double> ys);

// Topographic similarity: Pearson over all unordered item pairs between
// semantic difference and normalized edit distance. This is the structure
// score of a language (computed over its training items).
double topographic_similarity(std::span<const std::pair<Scene, Label>> items,
                              AngleDiffMode mode);
double topographic_similarity(const InputLanguage& lang, AngleDiffMode mode);

struct GeneralizationScore {
  double value = 0.0;
  bool degenerate = false;  // correlation was undefined and mapped to 0
};

// Pearson over all (test, train) cross pairs between semantic difference of
// the scenes and normalized edit distance of the labels. Undefined
// correlations map to 0 with the degenerate flag set.
GeneralizationScore generalization_score(
    std::span<const std::pair<Scene, Label>> train,
    std::span<const std::pair<Scene, Label>> test, AngleDiffMode mode);

// 1 - mean pairwise normalized edit distance between the labels produced by
// k >= 2 agents for the same scenes. labels_by_agent[a][s] is agent a's label
// for scene s; all agents must cover the same scene list.
double convergence_score(const std::vector<std::vector<Label>>& labels_by_agent);

}  // namespace langlearn
