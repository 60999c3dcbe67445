#pragma once

#include <array>
#include <compare>
#include <string>
#include <vector>

namespace langlearn {

inline constexpr int kNumShapes = 4;
inline constexpr int kAngleStep = 15;  // valid angles are multiples of 15 in (0, 360]

// A meaning: one of four shapes moving at a grid angle. Angle 360 is a
// distinct attested value and is not folded onto 0.
struct Scene {
  int shape = 1;    // 1..4
  int angle = 360;  // degrees, multiple of 15, in (0, 360]

  auto operator<=>(const Scene&) const = default;
};

// 6-dim feature encoding: one-hot shape (4) + sin/cos of the angle.
using SceneVector = std::array<double, 6>;

enum class AngleDiffMode {
  kCircular,  // min(|d|, 360-|d|) / 180, bounded by 1
  kLiteral,   // |d| / 180, follows the formula's literal wording
};

bool scene_is_valid(const Scene& scene);

// Throws ValidationError if the scene is off the grid.
void check_scene(const Scene& scene);

SceneVector encode_scene(const Scene& scene);

// Shape term (0 if equal, 1 otherwise) plus the angle term.
double semantic_difference(const Scene& a, const Scene& b, AngleDiffMode mode);

// All 96 valid scenes, sorted by (shape, angle).
std::vector<Scene> full_scene_grid();

// The default 36-scene meaning space: 4 shapes x 9 attested angles.
std::vector<Scene> default_scene_grid();
const std::array<int, 9>& default_angle_inventory();

std::string to_string(const Scene& scene);
std::string to_string(AngleDiffMode mode);
AngleDiffMode angle_diff_mode_from_string(const std::string& name);

}  // namespace langlearn
