#include "noir/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "noir/rng.hpp"

namespace noir {
namespace {

using Rgb = std::array<double, 3>;

double hash01(long long a, long long b, std::uint64_t salt) {
  const std::uint64_t h = splitmix64(splitmix64(static_cast<std::uint64_t>(a) * 0x9E3779B1ULL ^ salt) +
                                     static_cast<std::uint64_t>(b));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

Rgb table_texture(double x, double y) {
  if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) {
    const double n = hash01(std::lround(std::floor(x * 30)), std::lround(std::floor(y * 30)), 7);
    return {40 + 20 * n, 40 + 20 * n, 45 + 20 * n};
  }
  const double grain = std::sin(2.0 * 3.14159265 * (9.0 * x + 0.6 * std::sin(13.0 * y)));
  const double n = hash01(std::lround(std::floor(x / 0.025)), std::lround(std::floor(y / 0.025)), 11);
  const double k = 18.0 * grain + 40.0 * (n - 0.5);
  return {170 + k, 140 + 0.8 * k, 100 + 0.6 * k};
}

Rgb object_texture(const WorldObject& o, double lx, double ly) {
  const std::uint64_t salt = hash_name(o.id);
  const double n = hash01(std::lround(std::floor(lx / 0.012)), std::lround(std::floor(ly / 0.012)), salt);
  double k = 70.0 * (n - 0.5);
  const double edge = std::min(o.half_size.x - std::abs(lx), o.half_size.y - std::abs(ly));
  double f = edge < 0.006 ? 0.55 : 1.0;
  if (o.has("container") && o.has("open") &&
      std::abs(lx) < 0.7 * o.half_size.x && std::abs(ly) < 0.7 * o.half_size.y) {
    f *= 0.45;
  }
  Rgb c{o.color[0] * f + k, o.color[1] * f + k, o.color[2] * f + k};
  if (o.has("filled") && o.has("container") &&
      std::hypot(lx, ly) < 0.6 * std::min(o.half_size.x, o.half_size.y)) {
    c = {120 + 0.3 * k, 70 + 0.3 * k, 30 + 0.3 * k};
  }
  return c;
}

std::vector<const WorldObject*> by_height(const WorldState& w) {
  std::vector<const WorldObject*> v;
  for (const auto& o : w.objects) v.push_back(&o);
  std::stable_sort(v.begin(), v.end(), [](const WorldObject* a, const WorldObject* b) { return a->top() < b->top(); });
  return v;
}

// Colour of the scene seen straight down at table point (x, y).
Rgb sample_top(const WorldState& w, const std::vector<const WorldObject*>& order, double x, double y) {
  Rgb c = table_texture(x, y);
  for (const WorldObject* o : order) {
    if (o->has("surface")) {
      for (const auto& cell : o->cells) {
        if (cell.wet && std::hypot(x - o->pose.p.x - cell.dx, y - o->pose.p.y - cell.dy) < 0.017) {
          const double n = hash01(std::lround(std::floor(x / 0.01)), std::lround(std::floor(y / 0.01)), 3);
          c = {o->color[0] + 30 * n, o->color[1] + 30 * n, o->color[2] + 20 * n};
        }
      }
      continue;
    }
    if (o->covers(x, y)) c = object_texture(*o, x - o->pose.p.x, y - o->pose.p.y);
  }
  const double r = std::hypot(x - w.gripper.pose.p.x, y - w.gripper.pose.p.y);
  if (r > 0.014 && r < 0.022) c = {25, 25, 30};
  return c;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

void put(Image& img, int x, int y, const Rgb& c) { img.set(x, y, to_byte(c[0]), to_byte(c[1]), to_byte(c[2])); }

// Paints the planar patch origin + a*da + b*db (pixels) for a in [a0,a1], b in [b0,b1].
template <typename Shade>
void paint_patch(Image& img, Eigen::Vector2d origin, Eigen::Vector2d da, Eigen::Vector2d db, double a0, double a1,
                 double b0, double b1, Shade shade) {
  Eigen::Matrix2d m;
  m.col(0) = da;
  m.col(1) = db;
  if (std::abs(m.determinant()) < 1e-12) return;
  const Eigen::Matrix2d inv = m.inverse();
  double umin = 1e9, umax = -1e9, vmin = 1e9, vmax = -1e9;
  for (double a : {a0, a1}) {
    for (double b : {b0, b1}) {
      const Eigen::Vector2d p = origin + a * da + b * db;
      umin = std::min(umin, p[0]);
      umax = std::max(umax, p[0]);
      vmin = std::min(vmin, p[1]);
      vmax = std::max(vmax, p[1]);
    }
  }
  const int x0 = std::max(0, static_cast<int>(std::floor(umin))), x1 = std::min(img.width - 1, static_cast<int>(std::ceil(umax)));
  const int y0 = std::max(0, static_cast<int>(std::floor(vmin))), y1 = std::min(img.height - 1, static_cast<int>(std::ceil(vmax)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Eigen::Vector2d ab = inv * (Eigen::Vector2d(x + 0.5, y + 0.5) - origin);
      if (ab[0] >= a0 && ab[0] <= a1 && ab[1] >= b0 && ab[1] <= b1) put(img, x, y, shade(ab[0], ab[1]));
    }
  }
}

}  // namespace

Image render_top(const WorldState& world, const CameraCalibration& calib) {
  Image img(calib.width, calib.height);
  const auto order = by_height(world);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const Vec3 w = calib.pixel_to_world({x + 0.5, y + 0.5});
      put(img, x, y, sample_top(world, order, w.x, w.y));
    }
  }
  return img;
}

Image render_gripper(const WorldState& world, int width, int height) {
  Image img(width, height);
  const auto order = by_height(world);
  const double scale = 900.0;
  const Vec3 g = world.gripper.pose.p;
  const WorldObject* held = world.gripper.held ? world.find(*world.gripper.held) : nullptr;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5 - 0.5 * width) / scale, v = (0.5 * height - y - 0.5) / scale;
      Rgb c = sample_top(world, order, g.x + u, g.y + v);
      // camera height fades the view a little
      const double fade = 1.0 - 0.3 * std::clamp(g.z, 0.0, 1.0);
      for (auto& ch : c) ch *= fade;
      if (held && y > 0.8 * height) c = object_texture(*held, u, (y - 0.9 * height) / scale);
      const bool jaw = (std::abs(x - 0.5 * width) > 0.12 * width && std::abs(x - 0.5 * width) < 0.16 * width &&
                        y > 0.7 * height);
      if (jaw) c = {35, 35, 40};
      put(img, x, y, c);
    }
  }
  return img;
}

Image render_side(const WorldState& world, const CameraCalibration& calib) {
  Image img(calib.width, calib.height);
  const Eigen::Matrix<double, 2, 4>& m = calib.side_map;
  const Eigen::Vector2d ex = m.col(0), ey = m.col(1), ez = m.col(2), c0 = m.col(3);
  // back wall (y = 1) above the table plane
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const Eigen::Vector2d p(x + 0.5, y + 0.5);
      Eigen::Matrix2d a;
      a.col(0) = ex;
      a.col(1) = ez;
      const Eigen::Vector2d xz = a.inverse() * (p - c0 - ey);
      if (xz[1] >= 0.0) {
        const double n = hash01(std::lround(std::floor(xz[0] / 0.03)), std::lround(std::floor(xz[1] / 0.03)), 17);
        const double band = 12.0 * std::sin(40.0 * xz[1]);
        put(img, x, y, {110 + 40 * n + band, 120 + 40 * n + band, 135 + 30 * n});
      } else {
        a.col(1) = ey;
        const Eigen::Vector2d xy = a.inverse() * (p - c0);
        put(img, x, y, table_texture(xy[0], xy[1]));
      }
    }
  }
  std::vector<const WorldObject*> order;
  for (const auto& o : world.objects) {
    if (!o.has("surface")) order.push_back(&o);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const WorldObject* a, const WorldObject* b) { return a->pose.p.y > b->pose.p.y; });
  for (const WorldObject* o : order) {
    const Vec3 p = o->pose.p;
    const Vec3 h = o->half_size;
    const Eigen::Vector2d top_origin = c0 + ex * p.x + ey * p.y + ez * o->top();
    paint_patch(img, top_origin, ex, ey, -h.x, h.x, -h.y, h.y,
                [&](double a, double b) { return object_texture(*o, a, b); });
    const Eigen::Vector2d front_origin = c0 + ex * p.x + ey * (p.y - h.y) + ez * p.z;
    paint_patch(img, front_origin, ex, ez, -h.x, h.x, 0.0, h.z, [&](double a, double b) {
      Rgb c = object_texture(*o, a, b - 0.5 * h.z);
      for (auto& ch : c) ch *= 0.85;
      return c;
    });
  }
  const Pixel g = calib.side_project(world.gripper.pose.p);
  for (int dy = -8; dy <= 2; ++dy) {
    for (int dx = -3; dx <= 3; ++dx) {
      const int x = static_cast<int>(std::lround(g.u)) + dx, y = static_cast<int>(std::lround(g.v)) + dy;
      if (x >= 0 && x < img.width && y >= 0 && y < img.height) put(img, x, y, {25, 25, 30});
    }
  }
  return img;
}

SceneViews render_views(const WorldState& world, const CameraCalibration& calib) {
  return {render_top(world, calib), render_gripper(world), render_side(world, calib)};
}

}  // namespace noir
