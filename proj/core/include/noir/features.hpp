#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "noir/camera.hpp"
#include "noir/image.hpp"

namespace noir {

/// rows x cols grid of dim-long descriptors over an image.
struct FeatureMap {
  int rows = 0;
  int cols = 0;
  int dim = 0;
  std::vector<double> data;   // row-major, dim values per cell
  std::vector<char> valid;    // non-zero norm
  std::vector<char> textured; // any gradient, variance or edge content
  int source_width = 0;
  int source_height = 0;
  std::string backend_id;

  const double* cell(int r, int c) const { return &data[(static_cast<std::size_t>(r) * cols + c) * dim]; }
  bool is_valid(int r, int c) const { return valid[static_cast<std::size_t>(r) * cols + c] != 0; }
  double cell_width() const { return static_cast<double>(source_width) / cols; }
  double cell_height() const { return static_cast<double>(source_height) / rows; }
  bool same_grid(const FeatureMap& o) const;
};

class FeatureBackend {
 public:
  virtual ~FeatureBackend() = default;
  virtual std::string id() const = 0;
  virtual FeatureMap extract(const Image& img) const = 0;
};

/// Hand-built 16-D descriptor on 8x8 cells: mean RGB, 8-bin gradient
/// orientation histogram, intensity variance, cell coordinates, mean
/// intensity, edge density; L2-normalised.
class ReferenceBackend final : public FeatureBackend {
 public:
  static constexpr int kCell = 8;
  static constexpr int kDim = 16;
  std::string id() const override { return "reference"; }
  FeatureMap extract(const Image& img) const override;
};

/// Reads precomputed descriptors from `<image stem>.feat` beside the image file.
class ExternalBackend final : public FeatureBackend {
 public:
  std::string id() const override { return "external"; }
  FeatureMap extract(const Image& img) const override;
};

/// "reference" or "external"; UnknownBackend otherwise.
std::unique_ptr<FeatureBackend> make_backend(std::string_view id);
FeatureMap extract_feature_map(const Image& img, std::string_view backend_id = "reference");

/// Header line "rows cols dim", then one line per cell of %.9e values.
void write_feat(const std::string& path, const FeatureMap& map);
FeatureMap read_feat(const std::string& path, int source_width, int source_height);

struct MatchResult {
  Pixel pixel;       // centre of the best test cell
  int row = 0, col = 0;
  double score = -1.0;
  bool textured = false;
};

/// Mean of the (edge-clipped) 3x3 cell neighbourhood around `train_xy`,
/// compared by cosine to the 3x3 mean around every test cell; ties go to the
/// lowest (row, col).
MatchResult match_parameter(const FeatureMap& train, const Pixel& train_xy, const FeatureMap& test);

/// All test-cell cosine scores of the query (row-major), for diagnostics.
std::vector<double> match_scores(const FeatureMap& train, const Pixel& train_xy, const FeatureMap& test);

/// Non-overlapping block average down to a coarse vector (for whole-image similarity).
std::vector<double> pooled(const FeatureMap& map, int block = 5);
double cosine(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace noir
