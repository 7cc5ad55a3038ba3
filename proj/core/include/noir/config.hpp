#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "noir/cursor.hpp"
#include "noir/mi.hpp"
#include "noir/synth.hpp"
#include "noir/world.hpp"

namespace noir {

enum class ProtocolMode { Noir1, Noir2, Noir2Learning };
std::string_view to_string(ProtocolMode m);
ProtocolMode protocol_mode_from_string(std::string_view s);

struct StageSettings {
  double ssvep_s = 10.0;
  double mi_window_s = 3.0;
  double emg_window_s = 0.5;
  double inter_stage_s = 2.0;
  double step_size = 0.05;
  double success_radius = 0.06;
  int max_steps = 200;
  int max_restarts = 3;
  std::optional<double> notch_hz = 60.0;
};

struct SynthSettings {
  double fs = 250.0;
  double ssvep_snr_db = -20.0;
  double mi_snr_db = -12.0;
  double burst_gain = 10.0;
  std::optional<double> drift_db_per_min;
  double wrong_intent_prob = 0.0;
  double blink_prob = 0.0;  // chance of a blink inside any EMG window
  double blink_amplitude = 8.0;  // in units of the calibrated rest sd
  int calib_trials_per_class = 40;
  int emg_calib_windows = 20;
  std::uint64_t calibration_seed = 1;
};

struct LearningSettings {
  double confidence = 0.6;
  double accept_radius = 0.035;
  std::string backend = "reference";
  std::optional<double> oracle_accuracy;  // replace predictions by a p-correct oracle
  std::string demo;                       // demo bundle directory, optional
};

struct ProtocolConfig {
  ProtocolMode mode = ProtocolMode::Noir2;
  std::string task = "wipe_spill";
  int attempt_budget = 3;
  int max_stage_retries = 10;
  std::uint64_t seed = 0;
  std::string calibration;  // calibration file, optional
  StageSettings stage;
  SynthSettings synth;
  LearningSettings learning;
  WorldConfig world;
  std::optional<double> jitter_xy;
  std::string base_dir;  // relative paths are resolved against this

  PolicyKind policy() const;
  bool learning_enabled() const { return mode == ProtocolMode::Noir2Learning; }
  /// Noir1 runs the single-band CSP+QDA baseline, the others FBCSP+SVM.
  MiConfig mi_config() const;
  ControlPolicy control_policy() const;
  SynthConfig synth_config(double snr_db, std::uint64_t seed) const;
  std::string resolve(const std::string& path) const;
  std::string task_path() const;
  /// ConfigInvalid on any out-of-range value.
  void validate() const;
};

/// Sections [protocol], [stage], [synth], [learning], [world]; unknown
/// sections or keys are ConfigInvalid.
ProtocolConfig read_config(std::istream& is, const std::string& base_dir = "");
ProtocolConfig read_config_file(const std::string& path);
void write_config(std::ostream& os, const ProtocolConfig& cfg);

/// NOIR_DATA_DIR when set, else the build-time data directory.
std::string data_dir();

}  // namespace noir
