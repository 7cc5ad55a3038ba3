#include "noir/camera.hpp"

#include <cmath>

#include "noir/error.hpp"

namespace noir {

Eigen::Matrix3d homography_from_points(const std::array<Pixel, 4>& from, const std::array<Pixel, 4>& to) {
  Eigen::Matrix<double, 8, 9> a = Eigen::Matrix<double, 8, 9>::Zero();
  for (int i = 0; i < 4; ++i) {
    const double u = from[i].u, v = from[i].v, x = to[i].u, y = to[i].v;
    a.row(2 * i) << u, v, 1, 0, 0, 0, -x * u, -x * v, -x;
    a.row(2 * i + 1) << 0, 0, 0, u, v, 1, -y * u, -y * v, -y;
  }
  const Eigen::JacobiSVD<Eigen::Matrix<double, 8, 9>> svd(a, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (s[7] < 1e-10 * s[0]) fail(ErrorCode::SingularCalibration, "degenerate point correspondences");
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Eigen::Matrix3d m;
  m << h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8];
  if (std::abs(m(2, 2)) > 1e-12) m /= m(2, 2);
  if (std::abs(m.determinant()) < 1e-14) fail(ErrorCode::SingularCalibration, "homography is singular");
  return m;
}

std::array<Pixel, 4> CameraCalibration::standard_corner_pixels() {
  return {Pixel{20, 228}, Pixel{340, 228}, Pixel{304, 12}, Pixel{56, 12}};
}

CameraCalibration CameraCalibration::standard() {
  CameraCalibration c;
  const std::array<Pixel, 4> world{Pixel{0, 0}, Pixel{1, 0}, Pixel{1, 1}, Pixel{0, 1}};
  c.top_homography = homography_from_points(standard_corner_pixels(), world);
  // u = 30 + 300 x + 30 y, v = 225 - 40 y - 600 z
  c.side_map << 300.0, 30.0, 0.0, 30.0, 0.0, -40.0, -600.0, 225.0;
  return c;
}

void CameraCalibration::validate() const {
  if (!top_homography.allFinite() || std::abs(top_homography.determinant()) < 1e-14) {
    fail(ErrorCode::SingularCalibration, "top homography is not invertible");
  }
  if (!side_map.allFinite() || side_map(1, 2) == 0.0) fail(ErrorCode::SingularCalibration, "side map must move with z");
}

Vec3 CameraCalibration::pixel_to_world(const Pixel& p) const {
  const Eigen::Vector3d h = top_homography * Eigen::Vector3d(p.u, p.v, 1.0);
  if (std::abs(h[2]) < 1e-15) fail(ErrorCode::SingularCalibration, "pixel maps to infinity");
  return {h[0] / h[2], h[1] / h[2], 0.0};
}

Pixel CameraCalibration::world_to_pixel(const Vec3& w) const {
  const Eigen::Vector3d h = top_homography.inverse() * Eigen::Vector3d(w.x, w.y, 1.0);
  if (std::abs(h[2]) < 1e-15) fail(ErrorCode::SingularCalibration, "point maps to infinity");
  return {h[0] / h[2], h[1] / h[2]};
}

Pixel CameraCalibration::side_project(const Vec3& w) const {
  const Eigen::Vector2d p = side_map * Eigen::Vector4d(w.x, w.y, w.z, 1.0);
  return {p[0], p[1]};
}

}  // namespace noir
