#include "noir/mi.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>

#include "noir/eeg_io.hpp"
#include "noir/rng.hpp"
#include "noir/text.hpp"

namespace noir {
namespace {

Eigen::MatrixXd centred_covariance(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd xc = x.colwise() - x.rowwise().mean();
  return xc * xc.transpose() / static_cast<double>(x.cols());
}

Eigen::MatrixXd ridged(Eigen::MatrixXd c) {
  c.diagonal().array() += 1e-6 * c.trace() / static_cast<double>(c.rows());
  return c;
}

const std::initializer_list<Region> kMiRegions{Region::Visual, Region::MotorLeft, Region::MotorRight};

EegSegment mi_channels(const EegSegment& s) { return s.select(kMiRegions, ErrorCode::NoMotorChannels); }

// Per-band centred covariances of one trial (MI channels only).
std::vector<Eigen::MatrixXd> band_covariances(const EegSegment& trial, const std::vector<FilterCoefficients>& coeffs) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(coeffs.size());
  for (const auto& c : coeffs) out.push_back(centred_covariance(apply_filter_zero_phase(trial, c).data()));
  return out;
}

struct FittedPipeline {
  SpatialFilterSet filters;
  std::vector<int> selected;
  Classifier classifier;
};

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& m, const std::vector<int>& cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(cols[j]);
  return out;
}

Eigen::VectorXd select_entries(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out[static_cast<Eigen::Index>(j)] = v[idx[j]];
  return out;
}

// covs[trial][band]
FittedPipeline fit_pipeline(const std::vector<std::vector<Eigen::MatrixXd>>& covs, const std::vector<int>& labels,
                            const std::vector<std::size_t>& rows, const MiConfig& cfg) {
  const std::size_t n_bands = cfg.bank.bands.size();
  FittedPipeline fp;
  fp.filters.m = cfg.m;
  for (std::size_t b = 0; b < n_bands; ++b) {
    std::vector<std::vector<Eigen::MatrixXd>> per_class(kMiClasses);
    for (std::size_t r : rows) {
      const Eigen::MatrixXd& c = covs[r][b];
      const double tr = c.trace();
      if (!(tr > 0.0)) fail(ErrorCode::SingularCovariance, "trial with zero variance");
      per_class[labels[r]].push_back(ridged(c / tr));
    }
    CspFilters f = csp_fit_covariances(per_class, cfg.m);
    for (auto& w : f.per_class) w = quantize_to_text(w);
    fp.filters.bands.push_back(std::move(f));
  }

  const Eigen::Index d = static_cast<Eigen::Index>(fp.filters.feature_count());
  Eigen::MatrixXd feats(static_cast<Eigen::Index>(rows.size()), d);
  std::vector<int> y;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    feats.row(static_cast<Eigen::Index>(i)) = fbcsp_features_from_covariances(covs[rows[i]], fp.filters).transpose();
    y.push_back(labels[rows[i]]);
  }
  const int k = cfg.k_features <= 0 ? static_cast<int>(d) : std::min<int>(cfg.k_features, static_cast<int>(d));
  fp.selected = select_features_mibif(feats, y, k, cfg.n_bins);
  SvmOptions opts;
  opts.seed = cfg.seed;
  fp.classifier = classifier_fit(select_columns(feats, fp.selected), y, cfg.classifier, kMiClasses, opts);
  return fp;
}

}  // namespace

std::string_view to_string(MiClass c) {
  switch (c) {
    case MiClass::LeftHand: return "LeftHand";
    case MiClass::RightHand: return "RightHand";
    case MiClass::Legs: return "Legs";
    case MiClass::Rest: return "Rest";
  }
  return "Rest";
}

MiClass mi_class_from_string(std::string_view s) {
  for (MiClass c : kAllMiClasses) {
    if (to_string(c) == s) return c;
  }
  fail(ErrorCode::ParseError, "unknown MI class '" + std::string(s) + "'");
}

void FilterBank::validate() const {
  if (bands.empty()) fail(ErrorCode::InvalidBand, "filter bank is empty");
  for (const auto& [lo, hi] : bands) {
    if (!(lo < hi) || lo < 8.0 || hi > 30.0) fail(ErrorCode::InvalidBand, "bank bands must lie within 8-30 Hz");
  }
}

std::vector<FilterCoefficients> FilterBank::design(double fs) const {
  validate();
  std::vector<FilterCoefficients> out;
  for (const auto& [lo, hi] : bands) out.push_back(design_filter(FilterSpec::band_pass(lo, hi, fs, order)));
  return out;
}

std::size_t SpatialFilterSet::feature_count() const {
  std::size_t n = 0;
  for (const auto& b : bands) {
    for (const auto& w : b.per_class) n += static_cast<std::size_t>(w.rows());
  }
  return n;
}

Eigen::MatrixXd normalized_covariance(const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd c = centred_covariance(x);
  const double tr = c.trace();
  if (!(tr > 0.0)) fail(ErrorCode::SingularCovariance, "trial with zero variance");
  return ridged(c / tr);
}

CspFilters csp_fit_covariances(const std::vector<std::vector<Eigen::MatrixXd>>& covs_per_class, int m) {
  if (m < 1) fail(ErrorCode::InvalidArgument, "need at least one CSP filter pair");
  if (covs_per_class.size() < 2) fail(ErrorCode::InsufficientTrials, "need at least two classes");
  const Eigen::Index n_ch = covs_per_class.front().empty() ? 0 : covs_per_class.front().front().rows();
  if (2 * m > n_ch) fail(ErrorCode::InvalidArgument, "more CSP filters than channels");

  std::vector<Eigen::MatrixXd> class_cov;
  Eigen::MatrixXd composite = Eigen::MatrixXd::Zero(n_ch, n_ch);
  for (const auto& trials : covs_per_class) {
    if (trials.size() < 2) fail(ErrorCode::InsufficientTrials, "need at least two trials per class");
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n_ch, n_ch);
    for (const auto& c : trials) {
      if (c.rows() != n_ch) fail(ErrorCode::ShapeMismatch, "trials differ in channel count");
      mean += c;
    }
    mean /= static_cast<double>(trials.size());
    class_cov.push_back(ridged(mean));
    composite += class_cov.back();
  }

  CspFilters out;
  for (const auto& sc : class_cov) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(sc, composite);
    if (ges.info() != Eigen::Success) fail(ErrorCode::SingularCovariance, "generalized eigensolve failed");
    const Eigen::VectorXd& evals = ges.eigenvalues();  // ascending
    const Eigen::MatrixXd& evecs = ges.eigenvectors();
    Eigen::MatrixXd w(2 * m, n_ch);
    Eigen::VectorXd lam(2 * m);
    for (int i = 0; i < m; ++i) {
      w.row(i) = evecs.col(n_ch - 1 - i).transpose();
      lam[i] = evals[n_ch - 1 - i];
    }
    for (int i = 0; i < m; ++i) {
      w.row(m + i) = evecs.col(m - 1 - i).transpose();
      lam[m + i] = evals[m - 1 - i];
    }
    out.per_class.push_back(std::move(w));
    out.eigenvalues.push_back(std::move(lam));
  }
  return out;
}

CspFilters csp_fit(const std::vector<std::vector<Eigen::MatrixXd>>& trials_per_class, int m) {
  std::vector<std::vector<Eigen::MatrixXd>> covs;
  std::optional<Eigen::Index> shape_rows, shape_cols;
  for (const auto& trials : trials_per_class) {
    auto& dst = covs.emplace_back();
    for (const auto& x : trials) {
      if (shape_rows && (x.rows() != *shape_rows || x.cols() != *shape_cols)) {
        fail(ErrorCode::ShapeMismatch, "trials differ in shape");
      }
      shape_rows = x.rows();
      shape_cols = x.cols();
      dst.push_back(normalized_covariance(x));
    }
  }
  return csp_fit_covariances(covs, m);
}

CspFilters csp_fit(const std::vector<std::vector<EegSegment>>& trials_per_class, int m) {
  std::vector<std::vector<Eigen::MatrixXd>> mats;
  std::optional<double> fs;
  for (const auto& trials : trials_per_class) {
    auto& dst = mats.emplace_back();
    for (const auto& t : trials) {
      if (fs && *fs != t.fs()) fail(ErrorCode::ShapeMismatch, "trials differ in sampling rate");
      fs = t.fs();
      dst.push_back(t.data());
    }
  }
  return csp_fit(mats, m);
}

Eigen::VectorXd fbcsp_features_from_covariances(const std::vector<Eigen::MatrixXd>& band_covs,
                                                const SpatialFilterSet& filters) {
  if (band_covs.size() != filters.bands.size()) fail(ErrorCode::ShapeMismatch, "band count mismatch");
  Eigen::VectorXd f(static_cast<Eigen::Index>(filters.feature_count()));
  Eigen::Index k = 0;
  for (std::size_t b = 0; b < band_covs.size(); ++b) {
    for (const auto& w : filters.bands[b].per_class) {
      if (w.cols() != band_covs[b].rows()) fail(ErrorCode::ShapeMismatch, "channel count mismatch");
      const Eigen::VectorXd var = (w * band_covs[b] * w.transpose()).diagonal();
      const double total = var.sum();
      if (!(total > 0.0)) fail(ErrorCode::SingularCovariance, "zero projected variance");
      for (Eigen::Index i = 0; i < var.size(); ++i) f[k++] = std::log(var[i] / total);
    }
  }
  return f;
}

Eigen::VectorXd fbcsp_features(const EegSegment& trial, const FilterBank& bank, const SpatialFilterSet& filters) {
  return fbcsp_features_from_covariances(band_covariances(trial, bank.design(trial.fs())), filters);
}

double mutual_information(const Eigen::VectorXd& feature, const std::vector<int>& labels, int n_bins) {
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return feature[a] < feature[b]; });
  std::vector<int> bin(n);
  for (std::size_t r = 0; r < n; ++r) bin[order[r]] = static_cast<int>(r * n_bins / n);

  std::map<int, double> p_class;
  std::map<std::pair<int, int>, double> joint;
  std::vector<double> p_bin(static_cast<std::size_t>(n_bins), 0.0);
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    p_class[labels[i]] += w;
    p_bin[bin[i]] += w;
    joint[{bin[i], labels[i]}] += w;
  }
  double mi = 0.0;
  for (const auto& [key, pj] : joint) mi += pj * std::log(pj / (p_bin[key.first] * p_class[key.second]));
  return mi;
}

std::vector<int> select_features_mibif(const Eigen::MatrixXd& features, const std::vector<int>& labels, int k,
                                       int n_bins) {
  if (features.rows() < 8) fail(ErrorCode::TooFewTrials, "feature selection needs at least 8 trials");
  if (static_cast<std::size_t>(features.rows()) != labels.size()) fail(ErrorCode::ShapeMismatch, "label count");
  if (k < 1 || k > features.cols()) fail(ErrorCode::InvalidArgument, "k must be in [1, d]");
  std::vector<double> mi(static_cast<std::size_t>(features.cols()));
  for (Eigen::Index j = 0; j < features.cols(); ++j) mi[j] = mutual_information(features.col(j), labels, n_bins);
  std::vector<int> idx(mi.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return mi[a] > mi[b]; });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

MiConfig MiConfig::csp_qda_baseline() {
  MiConfig c;
  c.bank = FilterBank::single_band();
  c.k_features = 0;
  c.classifier = ClassifierKind::QDA;
  return c;
}

MiClass MiDecision::best_of(int k) const {
  k = std::clamp(k, 1, kMiClasses);
  int best = 0;
  for (int c = 1; c < k; ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return static_cast<MiClass>(best);
}

MiClass MiDecision::best_binary() const { return best_of(2); }

MiDecoder::MiDecoder(FilterBank bank, SpatialFilterSet filters, std::vector<int> selected, Classifier classifier,
                     double calib_accuracy, ChannelLayout layout, double fs, int trial_samples)
    : bank_(std::move(bank)),
      filters_(std::move(filters)),
      selected_(std::move(selected)),
      classifier_(std::move(classifier)),
      calib_accuracy_(calib_accuracy),
      layout_(std::move(layout)),
      fs_(fs),
      trial_samples_(trial_samples),
      coeffs_(bank_.design(fs)) {
  const std::size_t d = filters_.feature_count();
  for (int i : selected_) {
    if (i < 0 || static_cast<std::size_t>(i) >= d) fail(ErrorCode::InvalidArgument, "selected index out of range");
  }
  if (filters_.bands.size() != bank_.bands.size()) fail(ErrorCode::ShapeMismatch, "filters do not match bank");
}

Eigen::VectorXd MiDecoder::features(const EegSegment& segment) const {
  if (segment.n_samples() != trial_samples_ || segment.fs() != fs_) {
    fail(ErrorCode::ShapeMismatch, "segment length " + std::to_string(segment.n_samples()) + " != calibration " +
                                       std::to_string(trial_samples_));
  }
  const EegSegment mi = mi_channels(segment);
  if (!(mi.layout() == layout_)) fail(ErrorCode::ShapeMismatch, "segment channels differ from calibration");
  return select_entries(fbcsp_features_from_covariances(band_covariances(mi, coeffs_), filters_), selected_);
}

MiDecision MiDecoder::decode(const EegSegment& segment) const {
  const Eigen::VectorXd s = classifier_.scores(features(segment));
  MiDecision d;
  for (int c = 0; c < kMiClasses; ++c) d.scores[c] = s[c];
  d.cls = d.best_of(kMiClasses);
  return d;
}

MiDecoder calibrate_mi(const std::vector<MiTrial>& session, const MiConfig& cfg) {
  if (session.empty()) fail(ErrorCode::InsufficientTrials, "empty calibration session");
  std::vector<int> per_class(kMiClasses, 0);
  for (const auto& t : session) ++per_class[ordinal(t.label)];
  for (int c = 0; c < kMiClasses; ++c) {
    if (per_class[c] < 10) fail(ErrorCode::InsufficientTrials, "need at least 10 trials per class");
  }
  const EegSegment& first = session.front().segment;
  const double fs = first.fs();
  const int n_samples = first.n_samples();
  const auto coeffs = cfg.bank.design(fs);
  const EegSegment first_mi = mi_channels(first);

  std::vector<std::vector<Eigen::MatrixXd>> covs;
  std::vector<int> labels;
  for (const auto& t : session) {
    if (t.segment.n_samples() != n_samples || t.segment.fs() != fs) fail(ErrorCode::ShapeMismatch, "trial shape");
    const EegSegment mi = mi_channels(t.segment);
    if (!(mi.layout() == first_mi.layout())) fail(ErrorCode::ShapeMismatch, "trial channels differ");
    covs.push_back(band_covariances(mi, coeffs));
    labels.push_back(ordinal(t.label));
  }

  // stratified folds: shuffle within class, deal round-robin
  std::vector<int> fold(session.size());
  Rng rng = make_rng(cfg.seed, "cv-folds");
  for (int c = 0; c < kMiClasses; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < session.size(); ++i) {
      if (labels[i] == c) members.push_back(i);
    }
    shuffle(members, rng);
    for (std::size_t j = 0; j < members.size(); ++j) fold[members[j]] = static_cast<int>(j % cfg.cv_folds);
  }

  std::size_t correct = 0;
  for (int f = 0; f < cfg.cv_folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < session.size(); ++i) (fold[i] == f ? test : train).push_back(i);
    const FittedPipeline fp = fit_pipeline(covs, labels, train, cfg);
    for (std::size_t i : test) {
      const Eigen::VectorXd x = select_entries(fbcsp_features_from_covariances(covs[i], fp.filters), fp.selected);
      if (fp.classifier.predict(x) == labels[i]) ++correct;
    }
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(session.size());

  std::vector<std::size_t> all(session.size());
  std::iota(all.begin(), all.end(), 0);
  FittedPipeline fp = fit_pipeline(covs, labels, all, cfg);
  return MiDecoder(cfg.bank, std::move(fp.filters), std::move(fp.selected), std::move(fp.classifier), accuracy,
                   first_mi.layout(), fs, n_samples);
}

double evaluate_mi(const MiDecoder& decoder, const std::vector<MiTrial>& trials) {
  if (trials.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& t : trials) ok += decoder.decode(t.segment).cls == t.label ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(trials.size());
}

Eigen::MatrixXd quantize_to_text(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.size(); ++i) out.data()[i] = text::parse_double(format_value(m.data()[i]));
  return out;
}

}  // namespace noir
