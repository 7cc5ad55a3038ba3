#include "noir/filter.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace noir {
namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

cplx bilinear(cplx s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

std::vector<cplx> butterworth_prototype(int n) {
  std::vector<cplx> poles;
  for (int k = 1; k <= n; ++k) {
    const double theta = kPi * (2.0 * k + n - 1) / (2.0 * n);
    poles.push_back(std::polar(1.0, theta));
  }
  return poles;
}

// Groups digital poles into sections. Complex poles are taken once per
// conjugate pair; real poles are paired in order of magnitude.
std::vector<Biquad> sections_from_poles(const std::vector<cplx>& poles, double zero_a, double zero_b) {
  std::vector<cplx> complex_upper;
  std::vector<double> reals;
  for (const auto& p : poles) {
    if (std::abs(p.imag()) < 1e-12 * std::max(1.0, std::abs(p))) {
      reals.push_back(p.real());
    } else if (p.imag() > 0) {
      complex_upper.push_back(p);
    }
  }
  std::sort(reals.begin(), reals.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });

  std::vector<std::pair<double, Biquad>> out;  // keyed by max pole radius
  for (const auto& p : complex_upper) {
    Biquad s;
    s.a1 = -2.0 * p.real();
    s.a2 = std::norm(p);
    out.emplace_back(std::abs(p), s);
  }
  for (std::size_t i = 0; i + 1 < reals.size(); i += 2) {
    Biquad s;
    s.a1 = -(reals[i] + reals[i + 1]);
    s.a2 = reals[i] * reals[i + 1];
    out.emplace_back(std::max(std::abs(reals[i]), std::abs(reals[i + 1])), s);
  }
  if (reals.size() % 2 == 1) {
    Biquad s;
    s.first_order = true;
    s.a1 = -reals.back();
    out.emplace_back(std::abs(reals.back()), s);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

  std::vector<Biquad> sections;
  for (auto& [radius, s] : out) {
    if (s.first_order) {
      // single zero at zero_a
      s.b0 = 1.0;
      s.b1 = -zero_a;
    } else {
      s.b0 = 1.0;
      s.b1 = -(zero_a + zero_b);
      s.b2 = zero_a * zero_b;
    }
    sections.push_back(s);
  }
  return sections;
}

void normalise_gain(FilterCoefficients& c, double f_ref) {
  const double mag = std::abs(c.response(f_ref));
  const double per_section = std::pow(1.0 / mag, 1.0 / static_cast<double>(c.sections.size()));
  for (auto& s : c.sections) {
    s.b0 *= per_section;
    s.b1 *= per_section;
    s.b2 *= per_section;
  }
}

double prewarp(double f, double fs) { return 2.0 * fs * std::tan(kPi * f / fs); }

// Transposed direct form II, state carried in (z1, z2).
void run_cascade(const FilterCoefficients& c, double* x, long n, const std::vector<double>* zi, double zi_scale) {
  for (std::size_t k = 0; k < c.sections.size(); ++k) {
    const Biquad& s = c.sections[k];
    double z1 = zi ? (*zi)[2 * k] * zi_scale : 0.0;
    double z2 = zi ? (*zi)[2 * k + 1] * zi_scale : 0.0;
    for (long i = 0; i < n; ++i) {
      const double in = x[i];
      const double y = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * y + z2;
      z2 = s.b2 * in - s.a2 * y;
      x[i] = y;
    }
  }
}

// Steady-state section states for a unit step, scaled through the cascade.
std::vector<double> steady_state(const FilterCoefficients& c) {
  std::vector<double> zi(2 * c.sections.size(), 0.0);
  double scale = 1.0;
  for (std::size_t k = 0; k < c.sections.size(); ++k) {
    const Biquad& s = c.sections[k];
    const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double z2 = s.b2 - s.a2 * dc;
    const double z1 = s.b1 - s.a1 * dc + z2;
    zi[2 * k] = z1 * scale;
    zi[2 * k + 1] = z2 * scale;
    scale *= dc;
  }
  return zi;
}

}  // namespace

int FilterCoefficients::order() const {
  int n = 0;
  for (const auto& s : sections) n += s.first_order ? 1 : 2;
  return n;
}

std::vector<std::complex<double>> FilterCoefficients::poles() const {
  std::vector<cplx> out;
  for (const auto& s : sections) {
    if (s.first_order) {
      out.emplace_back(-s.a1, 0.0);
      continue;
    }
    const cplx disc = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    out.push_back((-s.a1 + disc) / 2.0);
    out.push_back((-s.a1 - disc) / 2.0);
  }
  return out;
}

bool FilterCoefficients::stable() const {
  const auto ps = poles();
  return std::all_of(ps.begin(), ps.end(), [](const cplx& p) { return std::abs(p) < 1.0; });
}

std::complex<double> FilterCoefficients::response(double f_hz) const {
  const cplx zinv = std::polar(1.0, -2.0 * kPi * f_hz / fs);
  cplx h = 1.0;
  for (const auto& s : sections) {
    h *= (s.b0 + s.b1 * zinv + s.b2 * zinv * zinv) / (1.0 + s.a1 * zinv + s.a2 * zinv * zinv);
  }
  return h;
}

FilterCoefficients design_filter(const FilterSpec& spec) {
  const double nyq = spec.fs / 2.0;
  if (!(spec.fs > 0.0)) fail(ErrorCode::InvalidBand, "sampling rate must be positive");
  FilterCoefficients c;
  c.fs = spec.fs;

  switch (spec.kind) {
    case FilterKind::BandPass: {
      if (!(spec.f_lo > 0.0 && spec.f_lo < spec.f_hi && spec.f_hi < nyq)) {
        fail(ErrorCode::InvalidBand, "band-pass requires 0 < f_lo < f_hi < fs/2");
      }
      if (spec.order < 1) fail(ErrorCode::InvalidBand, "order must be positive");
      const double wl = prewarp(spec.f_lo, spec.fs);
      const double wh = prewarp(spec.f_hi, spec.fs);
      const double w0 = std::sqrt(wl * wh);
      const double bw = wh - wl;
      std::vector<cplx> digital;
      for (const auto& p : butterworth_prototype(spec.order)) {
        const cplx half = p * bw / 2.0;
        const cplx root = std::sqrt(half * half - w0 * w0);
        digital.push_back(bilinear(half + root, spec.fs));
        digital.push_back(bilinear(half - root, spec.fs));
      }
      c.sections = sections_from_poles(digital, 1.0, -1.0);
      // unity gain at the (warped) geometric centre
      const double f_center = spec.fs / kPi * std::atan(w0 / (2.0 * spec.fs));
      normalise_gain(c, f_center);
      break;
    }
    case FilterKind::LowPass: {
      if (!(spec.f_hi > 0.0 && spec.f_hi < nyq)) fail(ErrorCode::InvalidBand, "low-pass requires 0 < f_c < fs/2");
      if (spec.order < 1) fail(ErrorCode::InvalidBand, "order must be positive");
      const double wc = prewarp(spec.f_hi, spec.fs);
      std::vector<cplx> digital;
      for (const auto& p : butterworth_prototype(spec.order)) digital.push_back(bilinear(wc * p, spec.fs));
      c.sections = sections_from_poles(digital, -1.0, -1.0);
      normalise_gain(c, 0.0);
      break;
    }
    case FilterKind::Notch: {
      if (!(spec.f0 > 0.0 && spec.f0 < nyq)) fail(ErrorCode::InvalidBand, "notch requires 0 < f0 < fs/2");
      if (!(spec.q > 0.0)) fail(ErrorCode::InvalidBand, "notch quality factor must be positive");
      const double w0 = 2.0 * kPi * spec.f0 / spec.fs;
      const double alpha = std::sin(w0) / (2.0 * spec.q);
      const double a0 = 1.0 + alpha;
      Biquad s;
      s.b0 = 1.0 / a0;
      s.b1 = -2.0 * std::cos(w0) / a0;
      s.b2 = 1.0 / a0;
      s.a1 = -2.0 * std::cos(w0) / a0;
      s.a2 = (1.0 - alpha) / a0;
      c.sections.push_back(s);
      break;
    }
  }
  if (!c.stable()) fail(ErrorCode::InvalidBand, "designed filter is unstable");
  return c;
}

Eigen::VectorXd filter_causal(const FilterCoefficients& coeffs, const Eigen::VectorXd& x) {
  Eigen::VectorXd y = x;
  run_cascade(coeffs, y.data(), y.size(), nullptr, 0.0);
  return y;
}

Eigen::VectorXd filter_zero_phase(const FilterCoefficients& coeffs, const Eigen::VectorXd& x) {
  const long n = x.size();
  const long pad = 3L * coeffs.order();
  if (n <= pad) {
    fail(ErrorCode::SegmentTooShort,
         "need more than " + std::to_string(pad) + " samples, got " + std::to_string(n));
  }
  const long m = n + 2 * pad;
  std::vector<double> ext(static_cast<std::size_t>(m));
  for (long i = 0; i < pad; ++i) ext[i] = 2.0 * x[0] - x[pad - i];
  for (long i = 0; i < n; ++i) ext[pad + i] = x[i];
  for (long i = 0; i < pad; ++i) ext[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];

  const auto zi = steady_state(coeffs);
  run_cascade(coeffs, ext.data(), m, &zi, ext[0]);
  std::reverse(ext.begin(), ext.end());
  run_cascade(coeffs, ext.data(), m, &zi, ext[0]);
  std::reverse(ext.begin(), ext.end());

  Eigen::VectorXd y(n);
  for (long i = 0; i < n; ++i) y[i] = ext[pad + i];
  return y;
}

EegSegment apply_filter_zero_phase(const EegSegment& segment, const FilterCoefficients& coeffs) {
  Eigen::MatrixXd out(segment.n_channels(), segment.n_samples());
  for (int r = 0; r < segment.n_channels(); ++r) {
    out.row(r) = filter_zero_phase(coeffs, segment.data().row(r).transpose()).transpose();
  }
  return segment.with_data(std::move(out));
}

double zero_phase_noise_gain(const FilterCoefficients& coeffs) {
  constexpr int kPoints = 8192;
  double acc = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double f = (i + 0.5) / kPoints * coeffs.fs / 2.0;
    const double mag2 = std::norm(coeffs.response(f));
    acc += mag2 * mag2;
  }
  return acc / kPoints;
}

}  // namespace noir
