#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "noir/classifier.hpp"
#include "noir/filter.hpp"
#include "noir/signal.hpp"

namespace noir {

enum class MiClass { LeftHand = 0, RightHand = 1, Legs = 2, Rest = 3 };
inline constexpr int kMiClasses = 4;
inline constexpr std::array<MiClass, kMiClasses> kAllMiClasses{MiClass::LeftHand, MiClass::RightHand, MiClass::Legs,
                                                                MiClass::Rest};

std::string_view to_string(MiClass c);
MiClass mi_class_from_string(std::string_view s);
inline int ordinal(MiClass c) { return static_cast<int>(c); }

struct FilterBank {
  std::vector<std::pair<double, double>> bands{{8, 12}, {12, 16}, {16, 20}, {20, 24}, {24, 30}};
  int order = 4;

  void validate() const;
  std::vector<FilterCoefficients> design(double fs) const;
  static FilterBank single_band() { return FilterBank{{{8.0, 30.0}}, 4}; }
};

/// One band's one-vs-rest CSP projections: `per_class[c]` is [2m x n_channels].
struct CspFilters {
  std::vector<Eigen::MatrixXd> per_class;
  std::vector<Eigen::VectorXd> eigenvalues;  // matching row order, descending
};

/// bands x classes projections.
struct SpatialFilterSet {
  int m = 2;
  std::vector<CspFilters> bands;

  std::size_t feature_count() const;
};

/// Centred covariance X X^T / n divided by its trace, then ridged.
Eigen::MatrixXd normalized_covariance(const Eigen::MatrixXd& x);

/// One-vs-rest CSP on per-class trial matrices (already band-filtered). For
/// each class c the generalized problem (S_c, sum_j S_j) is solved and the m
/// largest and m smallest eigenvectors are kept, descending.
CspFilters csp_fit(const std::vector<std::vector<Eigen::MatrixXd>>& trials_per_class, int m);
CspFilters csp_fit(const std::vector<std::vector<EegSegment>>& trials_per_class, int m);

/// Same fit starting from per-trial normalized covariances.
CspFilters csp_fit_covariances(const std::vector<std::vector<Eigen::MatrixXd>>& covs_per_class, int m);

/// Log normalised variance features in (band, class, filter) order from
/// per-band centred covariances of one trial.
Eigen::VectorXd fbcsp_features_from_covariances(const std::vector<Eigen::MatrixXd>& band_covs,
                                                const SpatialFilterSet& filters);

Eigen::VectorXd fbcsp_features(const EegSegment& trial, const FilterBank& bank, const SpatialFilterSet& filters);

/// Top-k features by histogram mutual information with the label
/// (equal-frequency bins). Ties go to the lower index.
std::vector<int> select_features_mibif(const Eigen::MatrixXd& features, const std::vector<int>& labels, int k,
                                       int n_bins = 8);
double mutual_information(const Eigen::VectorXd& feature, const std::vector<int>& labels, int n_bins);

struct MiTrial {
  EegSegment segment;
  MiClass label;
};

struct MiConfig {
  FilterBank bank{};
  int m = 2;
  int k_features = 16;  // 0 keeps every feature
  int n_bins = 8;
  ClassifierKind classifier = ClassifierKind::SVM;
  int cv_folds = 5;
  std::uint64_t seed = 0;

  /// Single 8-30 Hz band, all CSP features, QDA.
  static MiConfig csp_qda_baseline();
};

struct MiDecision {
  MiClass cls = MiClass::Rest;
  std::array<double, kMiClasses> scores{};

  /// Argmax restricted to the first k classes (k-way selection).
  MiClass best_of(int k) const;
  /// Argmax between LeftHand and RightHand.
  MiClass best_binary() const;
};

/// Fitted pipeline. Channels are the Visual and Motor rows of the calibration
/// layout; decode segments must carry the same channels and trial length.
class MiDecoder {
 public:
  MiDecoder(FilterBank bank, SpatialFilterSet filters, std::vector<int> selected, Classifier classifier,
            double calib_accuracy, ChannelLayout layout, double fs, int trial_samples);

  const FilterBank& bank() const { return bank_; }
  const SpatialFilterSet& filters() const { return filters_; }
  const std::vector<int>& selected() const { return selected_; }
  const Classifier& classifier() const { return classifier_; }
  double calib_accuracy() const { return calib_accuracy_; }
  const ChannelLayout& layout() const { return layout_; }
  double fs() const { return fs_; }
  int trial_samples() const { return trial_samples_; }

  MiDecision decode(const EegSegment& segment) const;
  /// Selected feature vector for a (full-layout) segment.
  Eigen::VectorXd features(const EegSegment& segment) const;

 private:
  FilterBank bank_;
  SpatialFilterSet filters_;
  std::vector<int> selected_;
  Classifier classifier_;
  double calib_accuracy_;
  ChannelLayout layout_;
  double fs_;
  int trial_samples_;
  std::vector<FilterCoefficients> coeffs_;
};

/// Filter bank -> CSP -> features -> MIBIF -> classifier, with stratified
/// k-fold cross-validated accuracy stored in calib_accuracy.
MiDecoder calibrate_mi(const std::vector<MiTrial>& session, const MiConfig& cfg);

inline MiDecision decode_mi(const MiDecoder& decoder, const EegSegment& segment) { return decoder.decode(segment); }

/// Held-out accuracy of a decoder on labelled trials.
double evaluate_mi(const MiDecoder& decoder, const std::vector<MiTrial>& trials);

/// Round-trips a matrix through the "%.9e" text representation so an
/// in-memory decoder equals one read back from a model file.
Eigen::MatrixXd quantize_to_text(const Eigen::MatrixXd& m);

}  // namespace noir
