#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "noir/mi.hpp"
#include "noir/signal.hpp"

namespace noir {

/// MI sources, in mixing-matrix column order.
enum class MiSource { MuLeft, BetaLeft, MuRight, BetaRight, AlphaVisual };
inline constexpr int kMiSources = 5;

struct SynthConfig {
  double fs = 250.0;
  ChannelLayout layout = ChannelLayout::standard16();
  double snr_db = 0.0;
  /// Per class, [n_channels x kMiSources].
  std::array<Eigen::MatrixXd, kMiClasses> mi_mixing;
  /// One amplitude per Visual channel (layout order), mean square 1.
  Eigen::VectorXd ssvep_gain;
  std::uint64_t seed = 0;
  std::optional<double> drift_db_per_min;
  double burst_gain = 10.0;
  double wrong_intent_prob = 0.0;

  /// Default mixing and gains for `layout`.
  static SynthConfig defaults(ChannelLayout layout = ChannelLayout::standard16(), double fs = 250.0);
  /// SNR after applying the optional drift at `elapsed_s` into a session.
  double snr_at(double elapsed_s) const;
  void validate() const;
};

Eigen::MatrixXd default_mi_mixing(const ChannelLayout& layout, MiClass cls);
/// Per-class (source) gains used by the default mixing.
std::array<double, kMiSources> default_class_gains(MiClass cls);

/// Unit-variance background: white and pink (summed AR(1) processes with
/// log-spaced corners) in equal parts, independent per channel.
Eigen::MatrixXd background_noise(int n_channels, int n_samples, double fs, std::uint64_t seed);

/// Gaussian noise band-limited to [lo, hi] Hz, unit expected variance.
Eigen::VectorXd band_noise(int n_samples, double fs, double lo, double hi, std::uint64_t seed);

struct SignalComponents {
  Eigen::MatrixXd signal;
  Eigen::MatrixXd noise;
};

/// `index` is the call index mixed into the seed (see derive_seed).
SignalComponents gen_ssvep_components(double freq, double duration_s, const SynthConfig& cfg, std::uint64_t index = 0,
                                      double elapsed_s = 0.0);
EegSegment gen_ssvep(double freq, double duration_s, const SynthConfig& cfg, std::uint64_t index = 0,
                     double elapsed_s = 0.0);

SignalComponents gen_mi_components(MiClass cls, double duration_s, const SynthConfig& cfg, std::uint64_t index = 0,
                                   double elapsed_s = 0.0);
EegSegment gen_mi(MiClass cls, double duration_s, const SynthConfig& cfg, std::uint64_t index = 0,
                  double elapsed_s = 0.0);

/// 500 ms window; a clench replaces the Frontal rows by a 20-100 Hz burst
/// with burst_gain^2 times the rest variance.
EegSegment gen_emg(bool clench, const SynthConfig& cfg, std::uint64_t index = 0, double window_s = 0.5);

/// Vertical-EOG blink bump on the Frontal rows (strongest on Fp1/Fp2).
EegSegment inject_blink(const EegSegment& segment, double amplitude, double centre_s, double width_ms = 200.0);
/// Horizontal-EOG step: left frontal rows deflect one way, right rows the other.
EegSegment inject_lateral_eye(const EegSegment& segment, double amplitude, double onset_s);
EegSegment inject_drift(const EegSegment& segment, double freq_hz, double amplitude);

/// Stateful convenience wrapper: each call consumes the next call index.
class Synth {
 public:
  explicit Synth(SynthConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

  const SynthConfig& config() const { return cfg_; }
  std::uint64_t calls() const { return calls_; }
  void set_elapsed(double seconds) { elapsed_s_ = seconds; }

  EegSegment ssvep(double freq, double duration_s) { return gen_ssvep(freq, duration_s, cfg_, calls_++, elapsed_s_); }
  EegSegment mi(MiClass cls, double duration_s) { return gen_mi(cls, duration_s, cfg_, calls_++, elapsed_s_); }
  EegSegment emg(bool clench) { return gen_emg(clench, cfg_, calls_++); }

  /// Labelled MI session with `per_class` trials per class, classes interleaved.
  std::vector<MiTrial> mi_session(int per_class, double duration_s);

 private:
  SynthConfig cfg_;
  std::uint64_t calls_ = 0;
  double elapsed_s_ = 0.0;
};

}  // namespace noir
