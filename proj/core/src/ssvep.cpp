#include "noir/ssvep.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

namespace noir {
namespace {

Eigen::MatrixXd centred(const Eigen::MatrixXd& m) { return m.colwise() - m.rowwise().mean(); }

Eigen::MatrixXd ridge(Eigen::MatrixXd c) {
  const double lambda = 1e-6 * c.trace() / static_cast<double>(c.rows());
  c.diagonal().array() += lambda;
  return c;
}

}  // namespace

void FrequencyBank::validate(double fs) const {
  if (freqs.empty()) fail(ErrorCode::InvalidArgument, "frequency bank is empty");
  if (n_harmonics < 1) fail(ErrorCode::InvalidArgument, "need at least one harmonic");
  std::set<double> seen;
  for (double f : freqs) {
    if (!(f > 0.0)) fail(ErrorCode::InvalidArgument, "frequencies must be positive");
    if (!seen.insert(f).second) fail(ErrorCode::InvalidArgument, "duplicate frequency in bank");
    if (f * n_harmonics >= fs / 2.0) fail(ErrorCode::AliasedHarmonic, "harmonic of " + std::to_string(f) + " Hz aliases");
  }
}

FrequencyBank FrequencyBank::first(std::size_t n) const {
  FrequencyBank b = *this;
  if (n > 0 && n < freqs.size()) b.freqs.resize(n);
  return b;
}

Eigen::MatrixXd make_crs(double freq, int n_harmonics, double fs, int n_samples) {
  if (n_harmonics < 1) fail(ErrorCode::InvalidArgument, "need at least one harmonic");
  if (n_samples < 2) fail(ErrorCode::InvalidArgument, "reference needs at least two samples");
  if (freq * n_harmonics >= fs / 2.0) fail(ErrorCode::AliasedHarmonic, "highest harmonic at or above fs/2");
  Eigen::MatrixXd ref(2 * n_harmonics, n_samples);
  for (int h = 1; h <= n_harmonics; ++h) {
    const double w = 2.0 * std::numbers::pi * h * freq / fs;
    for (int k = 0; k < n_samples; ++k) {
      ref(2 * (h - 1), k) = std::sin(w * k);
      ref(2 * (h - 1) + 1, k) = std::cos(w * k);
    }
  }
  return ref;
}

double cca_max_corr(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.cols() != y.cols()) fail(ErrorCode::ShapeMismatch, "CCA inputs differ in sample count");
  const Eigen::Index n = x.cols();
  if (n <= x.rows() + y.rows()) fail(ErrorCode::DegenerateInput, "too few samples for CCA");
  if (!x.allFinite() || !y.allFinite()) fail(ErrorCode::DegenerateInput, "non-finite CCA input");

  const Eigen::MatrixXd xc = centred(x);
  const Eigen::MatrixXd yc = centred(y);
  const double denom = static_cast<double>(n - 1);
  const Eigen::MatrixXd cxx = ridge(xc * xc.transpose() / denom);
  const Eigen::MatrixXd cyy = ridge(yc * yc.transpose() / denom);
  const Eigen::MatrixXd cxy = xc * yc.transpose() / denom;

  Eigen::LLT<Eigen::MatrixXd> lx(cxx), ly(cyy);
  if (lx.info() != Eigen::Success || ly.info() != Eigen::Success || !(cxx.trace() > 0.0) || !(cyy.trace() > 0.0)) {
    fail(ErrorCode::DegenerateInput, "singular covariance in CCA");
  }
  // Lx^-1 Cxy Ly^-T
  Eigen::MatrixXd m = lx.matrixL().solve(cxy);
  m = ly.matrixL().solve(m.transpose()).transpose();
  const double rho = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
  return std::clamp(rho, 0.0, 1.0);
}

SsvepResult classify_ssvep(const EegSegment& segment, const FrequencyBank& bank) {
  bank.validate(segment.fs());
  const EegSegment visual = segment.select({Region::Visual}, ErrorCode::NoVisualChannels);
  SsvepResult out;
  out.scores.reserve(bank.freqs.size());
  double best = -1.0;
  for (std::size_t i = 0; i < bank.freqs.size(); ++i) {
    const auto ref = make_crs(bank.freqs[i], bank.n_harmonics, segment.fs(), segment.n_samples());
    const double rho = cca_max_corr(visual.data(), ref);
    out.scores.push_back(rho);
    if (rho > best) {
      best = rho;
      out.index = static_cast<int>(i);
    }
  }
  return out;
}

SsvepResult SsvepDecoder::decode(const EegSegment& segment, std::size_t n_choices) const {
  const FrequencyBank bank = cfg_.bank.first(n_choices);
  if (!cfg_.notch_hz) return classify_ssvep(segment, bank);
  const auto notch = design_filter(FilterSpec::notch(*cfg_.notch_hz, segment.fs(), cfg_.notch_q));
  return classify_ssvep(apply_filter_zero_phase(segment, notch), bank);
}

}  // namespace noir
