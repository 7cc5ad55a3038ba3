#include "noir/learning.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "noir/error.hpp"
#include "noir/text.hpp"

namespace noir {
namespace {

namespace fs = std::filesystem;

std::string state_file(const std::string& dir, std::size_t k, const char* view) {
  return (fs::path(dir) / ("s" + std::to_string(k) + "_" + view + ".ppm")).string();
}

std::string param_field(const std::optional<Vec3>& p, int axis) {
  return p ? text::exact((*p)[axis]) : "-";
}

}  // namespace

void DemoSequence::validate() const {
  if (states.size() < 2) fail(ErrorCode::InvalidArgument, "a demonstration needs at least two states");
  for (const auto& s : states) {
    if (s.obj.empty() || s.skill.empty()) fail(ErrorCode::InvalidArgument, "demo state missing annotations");
    if (!s.gripper.same_pixels(s.gripper) || s.top.width != states[0].top.width ||
        s.top.height != states[0].top.height || s.gripper.width != states[0].gripper.width ||
        s.gripper.height != states[0].gripper.height) {
      fail(ErrorCode::UnsupportedDims, "demo images differ in size");
    }
  }
}

void write_demo(const std::string& dir, const DemoSequence& demo) {
  demo.validate();
  fs::create_directories(dir);
  std::ofstream m(fs::path(dir) / "manifest.txt");
  if (!m) fail(ErrorCode::ParseError, "cannot write demo manifest in " + dir);
  m << "# noir-demo v1\n# task: " << demo.task_id << "\n";
  for (std::size_t k = 0; k < demo.states.size(); ++k) {
    const DemoState& s = demo.states[k];
    write_ppm(state_file(dir, k, "grip"), s.gripper);
    write_ppm(state_file(dir, k, "top"), s.top);
    if (s.side) write_ppm(state_file(dir, k, "side"), *s.side);
    m << k << ", " << s.obj << ", " << s.skill << ", " << param_field(s.param, 0) << ", " << param_field(s.param, 1)
      << ", " << param_field(s.param, 2) << "\n";
  }
}

DemoSequence read_demo(const std::string& dir) {
  std::ifstream m(fs::path(dir) / "manifest.txt");
  if (!m) fail(ErrorCode::ParseError, "no manifest.txt in " + dir);
  DemoSequence demo;
  std::string line;
  bool magic = false;
  while (std::getline(m, line)) {
    const std::string t = text::trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string body = text::trim(t.substr(1));
      if (body == "noir-demo v1") magic = true;
      if (body.rfind("task:", 0) == 0) demo.task_id = text::trim(body.substr(5));
      continue;
    }
    if (!magic) fail(ErrorCode::ParseError, "not a noir-demo v1 manifest");
    const auto f = text::split(t, ',');
    if (f.size() != 6) fail(ErrorCode::ParseError, "manifest rows are: index, obj, skill, x, y, z");
    const auto k = static_cast<std::size_t>(text::parse_int(f[0]));
    if (k != demo.states.size()) fail(ErrorCode::ParseError, "manifest indices must count up from 0");
    DemoState s;
    s.obj = f[1];
    s.skill = f[2];
    if (f[3] != "-") s.param = Vec3{text::parse_double(f[3]), text::parse_double(f[4]), text::parse_double(f[5])};
    s.gripper = read_ppm(state_file(dir, k, "grip"));
    s.top = read_ppm(state_file(dir, k, "top"));
    if (fs::exists(state_file(dir, k, "side"))) s.side = read_ppm(state_file(dir, k, "side"));
    demo.states.push_back(std::move(s));
  }
  demo.validate();
  return demo;
}

DemoIndex::DemoIndex(const DemoSequence& demo, const std::string& backend_id) : demo_(&demo), backend_id_(backend_id) {
  demo.validate();
  const auto backend = make_backend(backend_id);
  for (const auto& s : demo.states) {
    top_.push_back(backend->extract(s.top));
    side_.push_back(s.side ? std::optional<FeatureMap>(backend->extract(*s.side)) : std::nullopt);
    pooled_grip_.push_back(pooled(backend->extract(s.gripper)));
    pooled_top_.push_back(pooled(top_.back()));
  }
}

const FeatureMap& DemoIndex::side_map(int state) const {
  if (!side_[state]) fail(ErrorCode::InvalidArgument, "demo state has no side view");
  return *side_[state];
}

std::vector<double> DemoIndex::similarities(const Image& gripper, const Image& top) const {
  const DemoState& ref = demo_->states.front();
  if (gripper.width != ref.gripper.width || gripper.height != ref.gripper.height || top.width != ref.top.width ||
      top.height != ref.top.height) {
    fail(ErrorCode::UnsupportedDims, "query images differ in size from the demonstration");
  }
  const auto backend = make_backend(backend_id_);
  const auto qg = pooled(backend->extract(gripper));
  const auto qt = pooled(backend->extract(top));
  std::vector<double> sim;
  for (std::size_t i = 0; i < top_.size(); ++i) {
    sim.push_back(0.5 * (cosine(qg, pooled_grip_[i]) + cosine(qt, pooled_top_[i])));
  }
  return sim;
}

std::vector<RetrievalCandidate> DemoIndex::retrieve(const Image& gripper, const Image& top) const {
  const std::vector<double> sim = similarities(gripper, top);
  std::vector<int> order(sim.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sim[a] > sim[b]; });
  const int last = static_cast<int>(sim.size()) - 1;
  if (order.front() == last) fail(ErrorCode::TerminalState, "query matches the final demonstration state");
  std::vector<RetrievalCandidate> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (int i : order) {
    if (i == last) continue;
    const DemoState& next = demo_->states[i + 1];
    if (!seen.insert({next.obj, next.skill}).second) continue;
    out.push_back({next.obj, next.skill, sim[i], i});
  }
  return out;
}

std::vector<RetrievalCandidate> retrieve_next_state(const DemoSequence& demo, const Image& gripper, const Image& top,
                                                    const std::string& backend_id) {
  return DemoIndex(demo, backend_id).retrieve(gripper, top);
}

Vec3 pixel_to_world(const Pixel& p, const CameraCalibration& calib) {
  calib.validate();
  return calib.pixel_to_world(p);
}

Pixel world_to_pixel(const Vec3& w, const CameraCalibration& calib) {
  calib.validate();
  return calib.world_to_pixel(w);
}

double closest_z_on_line(const Pixel& a, const Vec3& xy, const CameraCalibration& calib) {
  const Pixel p0 = calib.side_project({xy.x, xy.y, 0.0});
  const Pixel p1 = calib.side_project({xy.x, xy.y, 1.0});
  const double dx = p1.u - p0.u, dy = p1.v - p0.v;
  // LineOutOfFrame when the z in [0, 1] segment never enters the image
  double t0 = 0.0, t1 = 1.0;
  auto clip = [&](double p, double q) {
    if (p == 0.0) return q >= 0.0;
    const double r = q / p;
    if (p < 0.0) {
      if (r > t1) return false;
      t0 = std::max(t0, r);
    } else {
      if (r < t0) return false;
      t1 = std::min(t1, r);
    }
    return true;
  };
  const bool visible = clip(-dx, p0.u) && clip(dx, calib.width - p0.u) && clip(-dy, p0.v) &&
                       clip(dy, calib.height - p0.v) && t0 <= t1;
  if (!visible) fail(ErrorCode::LineOutOfFrame, "vertical line through the predicted point is off-image");
  const double len2 = dx * dx + dy * dy;
  return ((a.u - p0.u) * dx + (a.v - p0.v) * dy) / len2;
}

double predict_z(const FeatureMap& side_train, const Pixel& z_train_pixel, const FeatureMap& side_test,
                 const Vec3& predicted_xy, const CameraCalibration& calib) {
  if (!(predicted_xy.x >= 0.0 && predicted_xy.x <= 1.0 && predicted_xy.y >= 0.0 && predicted_xy.y <= 1.0)) {
    fail(ErrorCode::OutOfBounds, "predicted point outside the table");
  }
  calib.validate();
  const MatchResult a = match_parameter(side_train, z_train_pixel, side_test);
  return closest_z_on_line(a.pixel, predicted_xy, calib);
}

ParameterPrediction transfer_parameter(const DemoIndex& index, int train_state, const Vec3& train_param,
                                       const FeatureMap& test_top, const FeatureMap* test_side, int dims,
                                       const CameraCalibration& calib) {
  ParameterPrediction out;
  const Pixel train_px = calib.world_to_pixel(train_param);
  const MatchResult m = match_parameter(index.top_map(train_state), train_px, test_top);
  out.score = m.score;
  out.top_pixel = m.pixel;
  const Vec3 xy = calib.pixel_to_world(m.pixel);
  out.param = {std::clamp(xy.x, 0.0, 1.0), std::clamp(xy.y, 0.0, 1.0), train_param.z};
  if (dims == 3) {
    if (!test_side) fail(ErrorCode::InvalidArgument, "3-D transfer needs a side view");
    const Pixel train_side = calib.side_project(train_param);
    out.param.z = std::clamp(predict_z(index.side_map(train_state), train_side, *test_side, out.param, calib), 0.0, 1.0);
  }
  return out;
}

}  // namespace noir
