#include "noir/emg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "noir/filter.hpp"

namespace noir {
namespace {

LogVarianceStats stats_of(const std::vector<double>& v) {
  LogVarianceStats s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  for (double x : v) s.sd += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(s.sd / static_cast<double>(v.size() - 1));
  return s;
}

int expected_samples(double window_s, double fs) { return static_cast<int>(std::lround(window_s * fs)); }

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ac = a.array() - a.mean();
  const Eigen::VectorXd bc = b.array() - b.mean();
  const double den = std::sqrt(ac.squaredNorm() * bc.squaredNorm());
  return den > 0.0 ? ac.dot(bc) / den : 0.0;
}

bool is_left(const std::string& name) {
  return !name.empty() && std::isdigit(static_cast<unsigned char>(name.back())) && (name.back() - '0') % 2 == 1;
}

bool is_right(const std::string& name) {
  return !name.empty() && std::isdigit(static_cast<unsigned char>(name.back())) && (name.back() - '0') % 2 == 0;
}

// Fraction of energy captured by a polynomial trend whose resolution matches
// the drift cutoff over the window length.
double trend_energy_ratio(const Eigen::MatrixXd& x, double fs, double cutoff_hz) {
  const Eigen::Index n = x.cols();
  const double duration = static_cast<double>(n) / fs;
  const int degree = std::max(1, static_cast<int>(std::ceil(2.0 * duration * cutoff_hz)));
  Eigen::MatrixXd basis(n, degree + 1);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double t = n > 1 ? 2.0 * static_cast<double>(k) / static_cast<double>(n - 1) - 1.0 : 0.0;
    // Legendre recurrence keeps the basis well conditioned
    basis(k, 0) = 1.0;
    if (degree >= 1) basis(k, 1) = t;
    for (int d = 2; d <= degree; ++d) {
      basis(k, d) = ((2.0 * d - 1.0) * t * basis(k, d - 1) - (d - 1.0) * basis(k, d - 2)) / d;
    }
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, degree + 1);
  double captured = 0.0, total = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Eigen::VectorXd row = x.row(r).transpose();
    captured += (q.transpose() * row).squaredNorm();
    total += row.squaredNorm();
  }
  return total > 0.0 ? captured / total : 0.0;
}

// Low-passed rows; each row is extended by its own mean for a second on both
// sides so the edges do not ring.
Eigen::MatrixXd slow_component(const Eigen::MatrixXd& x, const FilterCoefficients& lp, double fs) {
  const Eigen::Index pad = static_cast<Eigen::Index>(std::lround(fs));
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(x.cols() + 2 * pad, x.row(r).mean());
    w.segment(pad, x.cols()) = x.row(r).transpose();
    out.row(r) = filter_zero_phase(lp, w).segment(pad, x.cols()).transpose();
  }
  return out;
}

}  // namespace

double tension_statistic(const EegSegment& window) {
  const EegSegment f = window.select({Region::Frontal}, ErrorCode::NoFrontalChannels);
  const Eigen::MatrixXd& x = f.data();
  double acc = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().sum() / static_cast<double>(x.cols());
    acc += std::log(std::max(var, 1e-300));
  }
  return acc / static_cast<double>(x.rows());
}

TensionThreshold calibrate_threshold(const std::vector<EegSegment>& rest_windows,
                                     const std::vector<EegSegment>& clench_windows, double window_s) {
  if (rest_windows.size() < 10 || clench_windows.size() < 10) {
    fail(ErrorCode::InsufficientTrials, "need at least 10 rest and 10 clench windows");
  }
  auto collect = [&](const std::vector<EegSegment>& ws) {
    std::vector<double> v;
    for (const auto& w : ws) {
      if (w.n_samples() != expected_samples(window_s, w.fs())) {
        fail(ErrorCode::WrongWindowLength, "calibration window has " + std::to_string(w.n_samples()) + " samples");
      }
      v.push_back(tension_statistic(w));
    }
    return stats_of(v);
  };
  TensionThreshold th;
  th.window_s = window_s;
  th.rest = collect(rest_windows);
  th.clench = collect(clench_windows);
  if (th.rest.mean + 2.0 * th.rest.sd >= th.clench.mean - 2.0 * th.clench.sd) {
    fail(ErrorCode::Inseparable, "rest and clench log-variance distributions overlap");
  }
  th.log_variance_threshold = 0.5 * (th.rest.mean + th.clench.mean);
  return th;
}

bool detect_tension(const EegSegment& window, const TensionThreshold& th) {
  if (window.n_samples() != expected_samples(th.window_s, window.fs())) {
    fail(ErrorCode::WrongWindowLength, "tension window must be " + std::to_string(th.window_s) + " s");
  }
  return tension_statistic(window) > th.log_variance_threshold;
}

std::string_view to_string(ArtifactKind k) {
  switch (k) {
    case ArtifactKind::Clean: return "Clean";
    case ArtifactKind::Blink: return "Blink";
    case ArtifactKind::LateralEyeMovement: return "LateralEyeMovement";
    case ArtifactKind::LowFrequencyDrift: return "LowFrequencyDrift";
  }
  return "Clean";
}

ArtifactConfig ArtifactConfig::from_threshold(const TensionThreshold& th) {
  ArtifactConfig c;
  c.rest_sd = std::exp(0.5 * th.rest.mean);
  return c;
}

ArtifactVerdict reject_artifacts(const EegSegment& segment, const ArtifactConfig& cfg) {
  const EegSegment frontal = segment.select({Region::Frontal}, ErrorCode::NoFrontalChannels);
  if (segment.duration() < 0.5 - 0.5 / segment.fs()) fail(ErrorCode::SegmentTooShort, "artifact check needs 500 ms");
  const FilterCoefficients lp = design_filter(FilterSpec::low_pass(cfg.blink_lowpass_hz, segment.fs(), 4));
  const Eigen::MatrixXd slow = slow_component(frontal.data(), lp, segment.fs());
  ArtifactVerdict v;

  // (a) blink: large slow deflection common to all frontal rows (vertical EOG),
  // duration taken as the width at half peak
  const Eigen::VectorXd veog = slow.colwise().mean().transpose();
  Eigen::Index peak = 0;
  v.peak_amplitude = veog.cwiseAbs().maxCoeff(&peak);
  {
    const double half = 0.5 * v.peak_amplitude;
    Eigen::Index lo = peak, hi = peak;
    while (lo > 0 && std::abs(veog[lo - 1]) > half) --lo;
    while (hi + 1 < veog.size() && std::abs(veog[hi + 1]) > half) ++hi;
    v.event_duration_ms = 1000.0 * static_cast<double>(hi - lo + 1) / segment.fs();
  }
  if (v.peak_amplitude > cfg.blink_factor * cfg.rest_sd && v.event_duration_ms >= cfg.blink_min_ms &&
      v.event_duration_ms <= cfg.blink_max_ms) {
    v.kind = ArtifactKind::Blink;
    return v;
  }

  // (b) lateral eye movement: opposite-polarity slow deflection, left vs right
  std::vector<int> left, right;
  for (std::size_t i = 0; i < frontal.layout().size(); ++i) {
    const std::string& name = frontal.layout()[i].name;
    if (is_left(name)) left.push_back(static_cast<int>(i));
    if (is_right(name)) right.push_back(static_cast<int>(i));
  }
  if (!left.empty() && !right.empty()) {
    Eigen::VectorXd l = Eigen::VectorXd::Zero(slow.cols()), r = Eigen::VectorXd::Zero(slow.cols());
    for (int i : left) l += slow.row(i).transpose();
    for (int i : right) r += slow.row(i).transpose();
    l /= static_cast<double>(left.size());
    r /= static_cast<double>(right.size());
    v.lateral_corr = pearson(l, r);
    const double amp = cfg.eog_factor * cfg.rest_sd;
    if (l.cwiseAbs().maxCoeff() > amp && r.cwiseAbs().maxCoeff() > amp && v.lateral_corr < cfg.eog_max_corr) {
      v.kind = ArtifactKind::LateralEyeMovement;
      return v;
    }
  }

  // (c) drift, respiration, pulse: energy concentrated below the cutoff
  v.drift_ratio = trend_energy_ratio(frontal.data(), segment.fs(), cfg.drift_cutoff_hz);
  if (v.drift_ratio > cfg.drift_ratio) v.kind = ArtifactKind::LowFrequencyDrift;
  return v;
}

}  // namespace noir

namespace noir {

GateDecision gate_confirm(const EegSegment& window, const TensionThreshold& th, const ArtifactConfig& cfg) {
  GateDecision g;
  g.tension = detect_tension(window, th);
  g.artifact = reject_artifacts(window, cfg);
  g.confirmed = g.tension && g.artifact.kind == ArtifactKind::Clean;
  return g;
}

}  // namespace noir
