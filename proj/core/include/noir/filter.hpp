#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "noir/signal.hpp"

namespace noir {

enum class FilterKind { BandPass, Notch, LowPass };

/// BandPass uses [f_lo, f_hi]; LowPass uses f_hi as the cutoff; Notch uses
/// f0 and q. `order` is the Butterworth prototype order (a band-pass of order
/// N has 2N poles); it is ignored for Notch, which is always one biquad.
struct FilterSpec {
  FilterKind kind = FilterKind::BandPass;
  double f_lo = 8.0;
  double f_hi = 30.0;
  double f0 = 60.0;
  double q = 30.0;
  int order = 4;
  double fs = 250.0;

  static FilterSpec band_pass(double lo, double hi, double fs, int order = 4) {
    return {FilterKind::BandPass, lo, hi, 0.0, 0.0, order, fs};
  }
  static FilterSpec notch(double f0, double fs, double q = 30.0) {
    return {FilterKind::Notch, 0.0, 0.0, f0, q, 2, fs};
  }
  static FilterSpec low_pass(double cutoff, double fs, int order = 4) {
    return {FilterKind::LowPass, 0.0, cutoff, 0.0, 0.0, order, fs};
  }
};

/// Normalised section: y = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
/// First-order sections have b2 == a2 == 0.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
  bool first_order = false;
};

struct FilterCoefficients {
  std::vector<Biquad> sections;
  double fs = 0.0;

  /// Polynomial order of the cascade (2 per biquad, 1 per first-order section).
  int order() const;
  std::vector<std::complex<double>> poles() const;
  bool stable() const;
  std::complex<double> response(double f_hz) const;
};

FilterCoefficients design_filter(const FilterSpec& spec);

/// Causal cascade, zero initial state.
Eigen::VectorXd filter_causal(const FilterCoefficients& coeffs, const Eigen::VectorXd& x);

/// Forward-backward filtering of one row with odd-reflection padding of
/// 3 * order samples and steady-state initial conditions at both ends.
Eigen::VectorXd filter_zero_phase(const FilterCoefficients& coeffs, const Eigen::VectorXd& x);

EegSegment apply_filter_zero_phase(const EegSegment& segment, const FilterCoefficients& coeffs);

/// Output variance of unit white noise after forward-backward filtering,
/// i.e. the mean of |H|^4 over [0, pi].
double zero_phase_noise_gain(const FilterCoefficients& coeffs);

}  // namespace noir
