#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "noir/config.hpp"
#include "noir/emg.hpp"
#include "noir/learning.hpp"
#include "noir/mi.hpp"
#include "noir/ssvep.hpp"
#include "noir/world.hpp"

namespace noir {

/// Fitted decoders for one trial or a batch of trials.
struct Decoders {
  MiDecoder mi;
  TensionThreshold emg;
  ArtifactConfig artifacts;
  SsvepDecoder ssvep;
};

/// Synthetic calibration session (MI trials plus rest/clench EMG windows)
/// driven by [synth] calibration_seed, or the calibration file when one is
/// configured.
Decoders calibrate_decoders(const ProtocolConfig& cfg);

struct StageLog {
  int attempt = 1;
  int step = 0;            // plan step
  std::string stage;       // select_object, select_skill, select_param, predict_object_skill, predict_param
  double duration_s = 0.0; // human time charged to the stage
  std::string intended;
  std::string decoded;
  bool confirmed = false;
  bool skipped_by_learning = false;
  bool fallback = false;   // human decoding after a rejected or missing prediction
  int cursor_steps = 0;
  double score = 0.0;      // decoder or matcher score of the decoded value
};

struct EmgLog {
  int attempt = 1;
  int step = 0;
  std::string stage;
  bool clench = false;
  bool blink = false;  // a blink was injected into the window
  bool tension = false;
  std::string artifact;
  bool confirmed = false;
};

struct SkillLog {
  int attempt = 1;
  int step = 0;
  SkillCall call;
  bool success = false;
  std::string reason;
  double duration_s = 0.0;
};

struct TrialReport {
  std::string task_id;
  ProtocolMode mode = ProtocolMode::Noir2;
  std::uint64_t seed = 0;
  bool success = false;
  int attempts = 0;
  double total_time_s = 0.0;
  double human_time_s = 0.0;
  double execution_time_s = 0.0;
  double overhead_time_s = 0.0;
  int skill_count = 0;  // skills executed, failed ones included
  std::string end_reason;
  std::vector<StageLog> stages;
  std::vector<EmgLog> emg;
  std::vector<SkillLog> skills;

  /// total = human + execution + overhead, exactly (times are whole milliseconds).
  bool time_identity_holds() const;
};

struct TrialContext {
  const TaskDefinition* task = nullptr;  // loaded from the config when null
  const Decoders* decoders = nullptr;    // calibrated inline when null
  const DemoSequence* demo = nullptr;    // learning needs one; read from [learning] demo when null
  DemoSequence* capture = nullptr;       // receives the demo of a fully decoded successful trial
};

TrialReport run_trial(const ProtocolConfig& cfg, const TrialContext& ctx = {});

/// Runs a fully decoded learning-mode trial on the nominal layout (seed 0)
/// and returns its demonstration. CalibrationMissing if that trial fails.
DemoSequence capture_demo(const ProtocolConfig& cfg, const TaskDefinition& task, const Decoders& decoders);

/// One JSON object per stage, EMG window and skill, then a summary object.
void write_report_jsonl(std::ostream& os, const TrialReport& report);

/// Scene images before the first skill and after each skill of the plan
/// replayed exactly on the nominal layout.
DemoSequence demo_from_plan(const TaskDefinition& task, std::uint64_t seed = 0);

}  // namespace noir
