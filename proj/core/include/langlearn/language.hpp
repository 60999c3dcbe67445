#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "langlearn/scene.hpp"

namespace langlearn {

// Labels are plain character strings over a language's alphabet.
using Label = std::string;

inline constexpr std::size_t kDefaultMaxLabelLen = 16;

// A finite scene -> label mapping with a train/test split. Items are kept
// sorted by (shape, angle); that order is the canonical scene order used by
// every file format and record stream.
struct InputLanguage {
  std::string id;
  std::string alphabet;  // ordered character set (letters and the separator)
  std::map<Scene, Label> items;
  std::vector<Scene> train_scenes;  // sorted
  std::vector<Scene> test_scenes;   // sorted
  double structure = 0.0;           // topographic similarity over the train items
  std::uint64_t seed = 0;

  std::vector<std::pair<Scene, Label>> train_items() const;
  std::vector<std::pair<Scene, Label>> test_items() const;
  std::vector<std::pair<Scene, Label>> all_items() const;
  const Label& label_of(const Scene& scene) const;
  bool has_alphabet_char(char c) const;
};

struct ValidationIssue {
  std::string kind;  // "duplicate-scene", "empty-label", "alphabet-violation", ...
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool passed() const { return issues.empty(); }
  std::string to_string() const;
};

// Structural checks: duplicate scenes, empty labels, out-of-alphabet
// characters, oversized labels, split consistency. Failures are reported,
// not thrown.
ValidationReport validate_language(const InputLanguage& lang,
                                   std::size_t max_label_len = kDefaultMaxLabelLen);

// Text serialization. One document per language: header fields (id, alphabet,
// seed, structure) followed by one line per item. Round-trips exactly,
// including the structure score and the split.
void save_language(const InputLanguage& lang, const std::filesystem::path& path);
std::string serialize_language(const InputLanguage& lang);

// Throws ParseError with line diagnostics on malformed input. The stored
// structure score is cross-checked against a recomputation over the train
// items (circular mode) to 1e-9.
InputLanguage load_language(const std::filesystem::path& path);
InputLanguage parse_language(const std::string& text, const std::string& origin = "<string>");

}  // namespace langlearn
