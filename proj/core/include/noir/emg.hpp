#pragma once

#include <string_view>
#include <vector>

#include "noir/signal.hpp"

namespace noir {

struct LogVarianceStats {
  double mean = 0.0;
  double sd = 0.0;
};

/// Jaw-clench detector calibrated on rest and clench windows. The statistic is
/// the mean per-channel log-variance of the Frontal rows of a window.
struct TensionThreshold {
  double log_variance_threshold = 0.0;
  LogVarianceStats rest;
  LogVarianceStats clench;
  double window_s = 0.5;
};

double tension_statistic(const EegSegment& window);

/// Needs >= 10 windows of each kind, all `window_s` long.
TensionThreshold calibrate_threshold(const std::vector<EegSegment>& rest_windows,
                                     const std::vector<EegSegment>& clench_windows, double window_s = 0.5);

bool detect_tension(const EegSegment& window, const TensionThreshold& th);

enum class ArtifactKind { Clean, Blink, LateralEyeMovement, LowFrequencyDrift };

std::string_view to_string(ArtifactKind k);

struct ArtifactConfig {
  double rest_sd = 1.0;          // frontal rest amplitude scale
  double blink_factor = 5.0;     // A_blink = blink_factor * rest_sd
  double blink_min_ms = 50.0;
  double blink_max_ms = 400.0;
  double blink_lowpass_hz = 5.0;
  double eog_factor = 3.0;       // lateral deflection amplitude, in rest_sd
  double eog_max_corr = -0.5;    // left/right correlation must fall below this
  double drift_ratio = 0.6;      // R_drift
  double drift_cutoff_hz = 1.0;

  /// rest_sd taken from the calibrated rest log-variance.
  static ArtifactConfig from_threshold(const TensionThreshold& th);
};

struct ArtifactVerdict {
  ArtifactKind kind = ArtifactKind::Clean;
  double peak_amplitude = 0.0;   // peak of the low-passed frontal mean
  double event_duration_ms = 0.0;
  double lateral_corr = 0.0;
  double drift_ratio = 0.0;      // share of frontal energy below the drift cutoff
};

/// Blink, then lateral eye movement, then drift; the first check that fires
/// decides the verdict.
ArtifactVerdict reject_artifacts(const EegSegment& segment, const ArtifactConfig& cfg = {});

}  // namespace noir

namespace noir {

struct GateDecision {
  bool tension = false;
  ArtifactVerdict artifact;
  bool confirmed = false;  // tension on an artifact-free window
};

/// A detection only counts as confirm/interrupt when the window is Clean.
GateDecision gate_confirm(const EegSegment& window, const TensionThreshold& th, const ArtifactConfig& cfg);

}  // namespace noir
