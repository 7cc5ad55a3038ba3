#pragma once

#include "noir/camera.hpp"
#include "noir/image.hpp"
#include "noir/world.hpp"

namespace noir {

/// Camera images of a world state. Textures are fixed in world or object
/// coordinates, so moving an object moves its appearance with it.
struct SceneViews {
  Image top;
  Image gripper;
  Image side;
};

Image render_top(const WorldState& world, const CameraCalibration& calib);
Image render_gripper(const WorldState& world, int width = 360, int height = 240);
Image render_side(const WorldState& world, const CameraCalibration& calib);
SceneViews render_views(const WorldState& world, const CameraCalibration& calib);

}  // namespace noir
