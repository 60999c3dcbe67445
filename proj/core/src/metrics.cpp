#include "langlearn/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "langlearn/error.hpp"

namespace langlearn {

std::size_t levenshtein(std::string_view a, std::string_view b) {
  if (a.size() > b.size()) std::swap(a, b);  // keep the rolling row short
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0) return m;

  std::vector<std::size_t> row(n + 1);
  for (std::size_t i = 0; i <= n; ++i) row[i] = i;
  for (std::size_t j = 1; j <= m; ++j) {
    std::size_t diag = row[0];
    row[0] = j;
    for (std::size_t i = 1; i <= n; ++i) {
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      diag = row[i];
      row[i] = std::min({row[i] + 1, row[i - 1] + 1, sub});
    }
  }
  return row[n];
}

double normalized_edit_distance(std::string_view a, std::string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 0.0;  // both empty; distance defined as 0
  return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

double production_similarity(std::span<const PairedProduction> pairs) {
  if (pairs.empty()) {
    throw ValidationError("production_similarity: empty pair sequence");
  }
  double sum = 0.0;
  for (const auto& p : pairs) {
    sum += 1.0 - normalized_edit_distance(p.produced, p.reference);
  }
  return sum / static_cast<double>(pairs.size());
}

double production_similarity(const std::vector<Label>& produced,
                             const std::vector<Label>& reference) {
  if (produced.size() != reference.size()) {
    throw ValidationError("production_similarity: mismatched label counts");
  }
  if (produced.empty()) {
    throw ValidationError("production_similarity: empty pair sequence");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < produced.size(); ++i) {
    sum += 1.0 - normalized_edit_distance(produced[i], reference[i]);
  }
  return sum / static_cast<double>(produced.size());
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw ValidationError("pearson: length mismatch");
  }
  const std::size_t n = xs.size();
  if (n < 3) {
    throw UndefinedCorrelationError("pearson: need at least 3 points, got " +
                                    std::to_string(n));
  }
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mean_x;
    const double dy = ys[i] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedCorrelationError("pearson: constant input");
  }
  return sxy / std::sqrt(sxx * syy);
}

namespace {

void pair_series(std::span<const std::pair<Scene, Label>> items, AngleDiffMode mode,
                 std::vector<double>& sem, std::vector<double>& edit) {
  const std::size_t n = items.size();
  sem.clear();
  edit.clear();
  sem.reserve(n * (n - 1) / 2);
  edit.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sem.push_back(semantic_difference(items[i].first, items[j].first, mode));
      edit.push_back(normalized_edit_distance(items[i].second, items[j].second));
    }
  }
}

}  // namespace

double topographic_similarity(std::span<const std::pair<Scene, Label>> items,
                              AngleDiffMode mode) {
  if (items.size() < 3) {
    throw UndefinedCorrelationError(
        "topographic_similarity: need at least 3 items");
  }
  std::vector<double> sem, edit;
  pair_series(items, mode, sem, edit);
  return pearson(sem, edit);
}

double topographic_similarity(const InputLanguage& lang, AngleDiffMode mode) {
  const auto items = lang.train_items();
  return topographic_similarity(items, mode);
}

GeneralizationScore generalization_score(
    std::span<const std::pair<Scene, Label>> train,
    std::span<const std::pair<Scene, Label>> test, AngleDiffMode mode) {
  if (train.empty() || test.empty()) {
    throw ValidationError("generalization_score: empty train or test set");
  }
  std::vector<double> sem, edit;
  sem.reserve(train.size() * test.size());
  edit.reserve(train.size() * test.size());
  for (const auto& [test_scene, test_label] : test) {
    for (const auto& [train_scene, train_label] : train) {
      sem.push_back(semantic_difference(test_scene, train_scene, mode));
      edit.push_back(normalized_edit_distance(test_label, train_label));
    }
  }
  try {
    return {pearson(sem, edit), false};
  } catch (const UndefinedCorrelationError&) {
    return {0.0, true};
  }
}

double convergence_score(const std::vector<std::vector<Label>>& labels_by_agent) {
  const std::size_t k = labels_by_agent.size();
  if (k < 2) {
    throw ValidationError("convergence_score: need at least 2 agents");
  }
  const std::size_t n_scenes = labels_by_agent.front().size();
  if (n_scenes == 0) {
    throw ValidationError("convergence_score: no scenes");
  }
  for (const auto& labels : labels_by_agent) {
    if (labels.size() != n_scenes) {
      throw ValidationError("convergence_score: agents cover different scene counts");
    }
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < n_scenes; ++s) {
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = a + 1; b < k; ++b) {
        sum += normalized_edit_distance(labels_by_agent[a][s], labels_by_agent[b][s]);
        ++count;
      }
    }
  }
  return 1.0 - sum / static_cast<double>(count);
}

}  // namespace langlearn
