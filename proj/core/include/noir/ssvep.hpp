#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "noir/filter.hpp"
#include "noir/signal.hpp"

namespace noir {

/// Flicker frequencies bound to on-screen objects, plus the harmonic count
/// used for the reference signals.
struct FrequencyBank {
  std::vector<double> freqs{6.0, 7.5, 8.57, 10.0};
  int n_harmonics = 2;

  void validate(double fs) const;
  FrequencyBank first(std::size_t n) const;
};

/// Rows sin(2*pi*h*f*k/fs), cos(2*pi*h*f*k/fs) for h = 1..H, interleaved.
Eigen::MatrixXd make_crs(double freq, int n_harmonics, double fs, int n_samples);

/// Largest canonical correlation between the row spaces of x and y. Both
/// matrices are centred internally; each auto-covariance gets a ridge of
/// 1e-6 * trace / dim.
double cca_max_corr(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

struct SsvepResult {
  int index = 0;
  std::vector<double> scores;
};

/// Argmax of cca_max_corr over the bank; ties go to the lowest index. Only
/// Visual channels of `segment` are used.
SsvepResult classify_ssvep(const EegSegment& segment, const FrequencyBank& bank);

/// Notch + visual-channel selection + CCA classification.
class SsvepDecoder {
 public:
  struct Config {
    FrequencyBank bank{};
    std::optional<double> notch_hz = 60.0;
    double notch_q = 30.0;
    double window_s = 10.0;
  };

  SsvepDecoder() = default;
  explicit SsvepDecoder(Config cfg) : cfg_(std::move(cfg)) {}

  const Config& config() const { return cfg_; }
  /// `n_choices` restricts the bank to its first n frequencies (objects on screen).
  SsvepResult decode(const EegSegment& segment, std::size_t n_choices = 0) const;

 private:
  Config cfg_{};
};

}  // namespace noir
