#pragma once

#include <array>

#include <Eigen/Dense>

#include "noir/geometry.hpp"

namespace noir {

struct Pixel {
  double u = 0.0;  // column
  double v = 0.0;  // row
};

/// 3x3 homography H with [x y 1]^T ~ H [u v 1]^T from four correspondences
/// (direct linear transform). SingularCalibration on degenerate input.
Eigen::Matrix3d homography_from_points(const std::array<Pixel, 4>& from, const std::array<Pixel, 4>& to);

struct CameraCalibration {
  Eigen::Matrix3d top_homography = Eigen::Matrix3d::Identity();  // top-view pixel -> table (x, y)
  Eigen::Matrix<double, 2, 4> side_map = Eigen::Matrix<double, 2, 4>::Zero();  // (x, y, z, 1) -> side pixel
  int width = 360;
  int height = 240;

  /// Slight perspective on the top camera, oblique side camera.
  static CameraCalibration standard();
  /// The four table corners (0,0), (1,0), (1,1), (0,1) as top-view pixels.
  static std::array<Pixel, 4> standard_corner_pixels();

  void validate() const;
  Vec3 pixel_to_world(const Pixel& p) const;  // z = 0
  Pixel world_to_pixel(const Vec3& w) const;
  Pixel side_project(const Vec3& w) const;
};

}  // namespace noir
