#pragma once

#include <optional>
#include <string>
#include <vector>

#include "noir/camera.hpp"
#include "noir/features.hpp"
#include "noir/geometry.hpp"
#include "noir/image.hpp"

namespace noir {

/// State k of a demonstration: the scene after skill k, annotated with that
/// skill. State 0 is the initial scene ("scene", "Start").
struct DemoState {
  Image gripper;
  Image top;
  std::optional<Image> side;
  std::string obj;
  std::string skill;
  std::optional<Vec3> param;
};

struct DemoSequence {
  std::string task_id;
  std::vector<DemoState> states;

  void validate() const;
};

/// "noir-demo v1" bundle: s<k>_grip.ppm, s<k>_top.ppm, optional s<k>_side.ppm
/// and manifest.txt with `index, obj, skill, param_x, param_y, param_z`.
void write_demo(const std::string& dir, const DemoSequence& demo);
DemoSequence read_demo(const std::string& dir);

struct RetrievalCandidate {
  std::string obj;
  std::string skill;
  double score = 0.0;
  int matched_state = 0;  // the demo state the query resembled; the answer is its successor
};

/// Precomputed demo features for repeated queries.
class DemoIndex {
 public:
  DemoIndex(const DemoSequence& demo, const std::string& backend_id = "reference");

  const DemoSequence& demo() const { return *demo_; }
  const std::string& backend_id() const { return backend_id_; }
  const FeatureMap& top_map(int state) const { return top_[state]; }
  const FeatureMap& side_map(int state) const;

  /// Similarity of the query to every demo state: mean of the pooled-feature
  /// cosines of the gripper and top views.
  std::vector<double> similarities(const Image& gripper, const Image& top) const;
  /// Successor annotations ranked by state similarity, best first, without
  /// repeats. TerminalState when the best match is the final state.
  std::vector<RetrievalCandidate> retrieve(const Image& gripper, const Image& top) const;

 private:
  const DemoSequence* demo_;
  std::string backend_id_;
  std::vector<FeatureMap> top_;
  std::vector<std::optional<FeatureMap>> side_;
  std::vector<std::vector<double>> pooled_grip_;
  std::vector<std::vector<double>> pooled_top_;
};

std::vector<RetrievalCandidate> retrieve_next_state(const DemoSequence& demo, const Image& gripper, const Image& top,
                                                    const std::string& backend_id = "reference");

Vec3 pixel_to_world(const Pixel& p, const CameraCalibration& calib);
Pixel world_to_pixel(const Vec3& w, const CameraCalibration& calib);

/// Matches the side-view training point, then returns the z of the point on
/// the projected vertical line through `predicted_xy` closest to the match.
double predict_z(const FeatureMap& side_train, const Pixel& z_train_pixel, const FeatureMap& side_test,
                 const Vec3& predicted_xy, const CameraCalibration& calib);

/// z of the point on the projected vertical line through `xy` nearest to `a`.
double closest_z_on_line(const Pixel& a, const Vec3& xy, const CameraCalibration& calib);

struct ParameterPrediction {
  Vec3 param;
  double score = 0.0;  // top-view match similarity
  Pixel top_pixel;
};

/// One-shot transfer of a demo parameter: `train_state` is the scene the
/// demo skill was applied to, `train_param` its annotated parameter.
ParameterPrediction transfer_parameter(const DemoIndex& index, int train_state, const Vec3& train_param,
                                       const FeatureMap& test_top, const FeatureMap* test_side, int dims,
                                       const CameraCalibration& calib);

}  // namespace noir
