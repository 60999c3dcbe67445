#include "langlearn/scene.hpp"

#include <cmath>
#include <cstdlib>

#include "langlearn/error.hpp"

namespace langlearn {

bool scene_is_valid(const Scene& scene) {
  return scene.shape >= 1 && scene.shape <= kNumShapes && scene.angle > 0 &&
         scene.angle <= 360 && scene.angle % kAngleStep == 0;
}

void check_scene(const Scene& scene) {
  if (!scene_is_valid(scene)) {
    throw ValidationError("invalid scene: " + to_string(scene));
  }
}

SceneVector encode_scene(const Scene& scene) {
  check_scene(scene);
  SceneVector v{};
  v[scene.shape - 1] = 1.0;
  const double radians = scene.angle * M_PI / 180.0;
  v[4] = std::sin(radians);
  v[5] = std::cos(radians);
  return v;
}

double semantic_difference(const Scene& a, const Scene& b, AngleDiffMode mode) {
  check_scene(a);
  check_scene(b);
  const double shape_term = a.shape == b.shape ? 0.0 : 1.0;
  const double abs_delta = std::abs(a.angle - b.angle);
  double angle_term = 0.0;
  switch (mode) {
    case AngleDiffMode::kCircular:
      angle_term = std::min(abs_delta, 360.0 - abs_delta) / 180.0;
      break;
    case AngleDiffMode::kLiteral:
      angle_term = abs_delta / 180.0;
      break;
  }
  return shape_term + angle_term;
}

std::vector<Scene> full_scene_grid() {
  std::vector<Scene> scenes;
  scenes.reserve(kNumShapes * (360 / kAngleStep));
  for (int shape = 1; shape <= kNumShapes; ++shape) {
    for (int angle = kAngleStep; angle <= 360; angle += kAngleStep) {
      scenes.push_back({shape, angle});
    }
  }
  return scenes;
}

const std::array<int, 9>& default_angle_inventory() {
  // The nine angles attested in the published label examples.
  static const std::array<int, 9> angles = {30, 45, 60, 135, 150, 225, 315, 330, 360};
  return angles;
}

std::vector<Scene> default_scene_grid() {
  std::vector<Scene> scenes;
  scenes.reserve(kNumShapes * default_angle_inventory().size());
  for (int shape = 1; shape <= kNumShapes; ++shape) {
    for (int angle : default_angle_inventory()) {
      scenes.push_back({shape, angle});
    }
  }
  return scenes;
}

std::string to_string(const Scene& scene) {
  return "(shape " + std::to_string(scene.shape) + ", angle " +
         std::to_string(scene.angle) + ")";
}

std::string to_string(AngleDiffMode mode) {
  return mode == AngleDiffMode::kCircular ? "circular" : "literal";
}

AngleDiffMode angle_diff_mode_from_string(const std::string& name) {
  if (name == "circular") return AngleDiffMode::kCircular;
  if (name == "literal") return AngleDiffMode::kLiteral;
  throw ValidationError("unknown angle-diff mode: " + name);
}

}  // namespace langlearn
