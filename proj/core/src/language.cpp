#include "langlearn/language.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "langlearn/error.hpp"
#include "langlearn/metrics.hpp"

namespace langlearn {

namespace {

std::vector<std::pair<Scene, Label>> collect(const InputLanguage& lang,
                                             const std::vector<Scene>& scenes) {
  std::vector<std::pair<Scene, Label>> out;
  out.reserve(scenes.size());
  for (const Scene& s : scenes) {
    out.emplace_back(s, lang.label_of(s));
  }
  return out;
}

}  // namespace

std::vector<std::pair<Scene, Label>> InputLanguage::train_items() const {
  return collect(*this, train_scenes);
}

std::vector<std::pair<Scene, Label>> InputLanguage::test_items() const {
  return collect(*this, test_scenes);
}

std::vector<std::pair<Scene, Label>> InputLanguage::all_items() const {
  return {items.begin(), items.end()};
}

const Label& InputLanguage::label_of(const Scene& scene) const {
  auto it = items.find(scene);
  if (it == items.end()) {
    throw ValidationError("language " + id + ": no label for scene " + to_string(scene));
  }
  return it->second;
}

bool InputLanguage::has_alphabet_char(char c) const {
  return alphabet.find(c) != std::string::npos;
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const auto& issue : issues) {
    out += issue.kind + ": " + issue.detail + "\n";
  }
  return out;
}

ValidationReport validate_language(const InputLanguage& lang, std::size_t max_label_len) {
  ValidationReport report;
  auto add = [&](std::string kind, std::string detail) {
    report.issues.push_back({std::move(kind), std::move(detail)});
  };

  for (const auto& [scene, label] : lang.items) {
    if (!scene_is_valid(scene)) {
      add("invalid-scene", to_string(scene));
    }
    if (label.empty()) {
      add("empty-label", "scene " + to_string(scene));
      continue;
    }
    if (label.size() > max_label_len) {
      add("label-too-long", "scene " + to_string(scene) + " label '" + label + "'");
    }
    for (char c : label) {
      if (!lang.has_alphabet_char(c)) {
        add("alphabet-violation",
            "scene " + to_string(scene) + " label '" + label + "' char '" +
                std::string(1, c) + "'");
        break;
      }
    }
  }

  // Split membership must cover the item set exactly, with no overlap.
  // (The item map itself cannot hold duplicate scenes; duplicates are caught
  // at parse time.)
  std::set<Scene> train(lang.train_scenes.begin(), lang.train_scenes.end());
  std::set<Scene> test(lang.test_scenes.begin(), lang.test_scenes.end());
  if (train.size() != lang.train_scenes.size() || test.size() != lang.test_scenes.size()) {
    add("duplicate-scene", "repeated scene in split lists");
  }
  for (const Scene& s : train) {
    if (test.count(s)) add("split-overlap", to_string(s));
    if (!lang.items.count(s)) add("split-unknown-scene", to_string(s));
  }
  for (const Scene& s : test) {
    if (!lang.items.count(s)) add("split-unknown-scene", to_string(s));
  }
  if (train.size() + test.size() != lang.items.size()) {
    add("split-incomplete", "train+test does not cover the item set");
  }
  return report;
}

namespace {

constexpr const char* kFormatTag = "langlearn-language";
constexpr const char* kFormatVersion = "v1";

std::string format_double(double value) {
  // max_digits17 round-trips exactly through parse.
  std::ostringstream os;
  os.precision(17);
  os << value;
  return os.str();
}

}  // namespace

std::string serialize_language(const InputLanguage& lang) {
  std::ostringstream os;
  os << kFormatTag << " " << kFormatVersion << "\n";
  os << "id " << lang.id << "\n";
  os << "alphabet " << lang.alphabet << "\n";
  os << "seed " << lang.seed << "\n";
  os << "structure " << format_double(lang.structure) << "\n";
  std::set<Scene> train(lang.train_scenes.begin(), lang.train_scenes.end());
  for (const auto& [scene, label] : lang.items) {  // map iterates in (shape, angle) order
    os << "shape " << scene.shape << " angle " << scene.angle << " label " << label
       << " split " << (train.count(scene) ? "train" : "test") << "\n";
  }
  return os.str();
}

void save_language(const InputLanguage& lang, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot open " + path.string() + " for writing");
  }
  out << serialize_language(lang);
  if (!out) {
    throw Error("write failed: " + path.string());
  }
}

namespace {

[[noreturn]] void parse_fail(const std::string& origin, std::size_t line_no,
                             const std::string& what) {
  throw ParseError(origin + ":" + std::to_string(line_no) + ": " + what);
}

long parse_int(const std::string& token, const std::string& origin, std::size_t line_no,
               const char* field) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    parse_fail(origin, line_no, std::string("bad integer for field '") + field + "': " + token);
  }
  return value;
}

}  // namespace

InputLanguage parse_language(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  InputLanguage lang;
  bool saw_id = false, saw_alphabet = false, saw_seed = false, saw_structure = false;

  if (!std::getline(in, line)) {
    parse_fail(origin, 1, "empty file");
  }
  ++line_no;
  {
    std::istringstream ls(line);
    std::string tag, version;
    ls >> tag >> version;
    if (tag != kFormatTag || version != kFormatVersion) {
      parse_fail(origin, line_no, "expected header '" + std::string(kFormatTag) + " " +
                                      kFormatVersion + "', got '" + line + "'");
    }
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "id") {
      ls >> lang.id;
      saw_id = true;
    } else if (key == "alphabet") {
      ls >> lang.alphabet;
      saw_alphabet = true;
    } else if (key == "seed") {
      std::string tok;
      ls >> tok;
      try {
        lang.seed = std::stoull(tok);
      } catch (const std::exception&) {
        parse_fail(origin, line_no, "bad integer for field 'seed': " + tok);
      }
      saw_seed = true;
    } else if (key == "structure") {
      std::string tok;
      ls >> tok;
      try {
        lang.structure = std::stod(tok);
      } catch (const std::exception&) {
        parse_fail(origin, line_no, "bad real for field 'structure': " + tok);
      }
      saw_structure = true;
    } else if (key == "shape") {
      std::string shape_tok, angle_key, angle_tok, label_key, label, split_key, split;
      ls >> shape_tok >> angle_key >> angle_tok >> label_key >> label >> split_key >> split;
      if (ls.fail() || angle_key != "angle" || label_key != "label" || split_key != "split") {
        parse_fail(origin, line_no, "malformed item line: " + line);
      }
      Scene scene{static_cast<int>(parse_int(shape_tok, origin, line_no, "shape")),
                  static_cast<int>(parse_int(angle_tok, origin, line_no, "angle"))};
      if (!scene_is_valid(scene)) {
        parse_fail(origin, line_no, "scene off the grid: " + to_string(scene));
      }
      if (lang.items.count(scene)) {
        parse_fail(origin, line_no, "duplicate scene: " + to_string(scene));
      }
      lang.items[scene] = label;
      if (split == "train") {
        lang.train_scenes.push_back(scene);
      } else if (split == "test") {
        lang.test_scenes.push_back(scene);
      } else {
        parse_fail(origin, line_no, "split must be 'train' or 'test', got '" + split + "'");
      }
    } else {
      parse_fail(origin, line_no, "unknown field '" + key + "'");
    }
  }

  if (!saw_id) parse_fail(origin, line_no, "missing 'id' field");
  if (!saw_alphabet) parse_fail(origin, line_no, "missing 'alphabet' field");
  if (!saw_seed) parse_fail(origin, line_no, "missing 'seed' field");
  if (!saw_structure) parse_fail(origin, line_no, "missing 'structure' field");
  if (lang.items.empty()) parse_fail(origin, line_no, "no items");

  std::sort(lang.train_scenes.begin(), lang.train_scenes.end());
  std::sort(lang.test_scenes.begin(), lang.test_scenes.end());

  const ValidationReport report = validate_language(lang);
  if (!report.passed()) {
    throw ParseError(origin + ": invalid language:\n" + report.to_string());
  }

  // Stored structure must agree with a recomputation over the train items.
  const double recomputed = topographic_similarity(lang, AngleDiffMode::kCircular);
  if (std::abs(recomputed - lang.structure) > 1e-9) {
    throw ParseError(origin + ": stored structure " + format_double(lang.structure) +
                     " disagrees with recomputed " + format_double(recomputed));
  }
  return lang;
}

InputLanguage load_language(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open language file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_language(buffer.str(), path.string());
}

}  // namespace langlearn
