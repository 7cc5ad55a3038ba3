#include "noir/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>

#include "noir/eeg_io.hpp"
#include "noir/error.hpp"
#include "noir/text.hpp"

#ifndef NOIR_DATA_DIR
#define NOIR_DATA_DIR "data"
#endif

namespace noir {
namespace {

namespace fs = std::filesystem;

double to_double(const std::string& key, const std::string& v) {
  try {
    return text::parse_double(v);
  } catch (const Error&) {
    fail(ErrorCode::ConfigInvalid, key + " expects a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    return text::parse_int(v);
  } catch (const Error&) {
    fail(ErrorCode::ConfigInvalid, key + " expects an integer, got '" + v + "'");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  const std::string t = text::trim(v);
  char* end = nullptr;
  errno = 0;
  const unsigned long long x = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() || errno == ERANGE) {
    fail(ErrorCode::ConfigInvalid, key + " expects an unsigned integer, got '" + v + "'");
  }
  return x;
}

std::optional<double> to_optional(const std::string& key, const std::string& v) {
  if (v == "none" || v.empty()) return std::nullopt;
  return to_double(key, v);
}

std::string optional_text(const std::optional<double>& v) { return v ? text::exact(*v) : "none"; }

using Setter = std::function<void(ProtocolConfig&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& setters() {
  static const std::map<std::string, std::map<std::string, Setter>> s{
      {"protocol",
       {{"mode", [](ProtocolConfig& c, const std::string& v) { c.mode = protocol_mode_from_string(v); }},
        {"task", [](ProtocolConfig& c, const std::string& v) { c.task = v; }},
        {"attempt_budget",
         [](ProtocolConfig& c, const std::string& v) { c.attempt_budget = static_cast<int>(to_int("attempt_budget", v)); }},
        {"max_stage_retries",
         [](ProtocolConfig& c, const std::string& v) {
           c.max_stage_retries = static_cast<int>(to_int("max_stage_retries", v));
         }},
        {"seed", [](ProtocolConfig& c, const std::string& v) { c.seed = to_u64("seed", v); }},
        {"calibration", [](ProtocolConfig& c, const std::string& v) { c.calibration = v; }}}},
      {"stage",
       {{"ssvep_s", [](ProtocolConfig& c, const std::string& v) { c.stage.ssvep_s = to_double("ssvep_s", v); }},
        {"mi_window_s", [](ProtocolConfig& c, const std::string& v) { c.stage.mi_window_s = to_double("mi_window_s", v); }},
        {"emg_window_s",
         [](ProtocolConfig& c, const std::string& v) { c.stage.emg_window_s = to_double("emg_window_s", v); }},
        {"inter_stage_s",
         [](ProtocolConfig& c, const std::string& v) { c.stage.inter_stage_s = to_double("inter_stage_s", v); }},
        {"step_size", [](ProtocolConfig& c, const std::string& v) { c.stage.step_size = to_double("step_size", v); }},
        {"success_radius",
         [](ProtocolConfig& c, const std::string& v) { c.stage.success_radius = to_double("success_radius", v); }},
        {"max_steps",
         [](ProtocolConfig& c, const std::string& v) { c.stage.max_steps = static_cast<int>(to_int("max_steps", v)); }},
        {"max_restarts",
         [](ProtocolConfig& c, const std::string& v) {
           c.stage.max_restarts = static_cast<int>(to_int("max_restarts", v));
         }},
        {"notch_hz", [](ProtocolConfig& c, const std::string& v) { c.stage.notch_hz = to_optional("notch_hz", v); }}}},
      {"synth",
       {{"fs", [](ProtocolConfig& c, const std::string& v) { c.synth.fs = to_double("fs", v); }},
        {"ssvep_snr_db",
         [](ProtocolConfig& c, const std::string& v) { c.synth.ssvep_snr_db = to_double("ssvep_snr_db", v); }},
        {"mi_snr_db", [](ProtocolConfig& c, const std::string& v) { c.synth.mi_snr_db = to_double("mi_snr_db", v); }},
        {"burst_gain", [](ProtocolConfig& c, const std::string& v) { c.synth.burst_gain = to_double("burst_gain", v); }},
        {"drift_db_per_min",
         [](ProtocolConfig& c, const std::string& v) {
           c.synth.drift_db_per_min = to_optional("drift_db_per_min", v);
         }},
        {"wrong_intent_prob",
         [](ProtocolConfig& c, const std::string& v) {
           c.synth.wrong_intent_prob = to_double("wrong_intent_prob", v);
         }},
        {"blink_prob", [](ProtocolConfig& c, const std::string& v) { c.synth.blink_prob = to_double("blink_prob", v); }},
        {"blink_amplitude",
         [](ProtocolConfig& c, const std::string& v) { c.synth.blink_amplitude = to_double("blink_amplitude", v); }},
        {"calib_trials_per_class",
         [](ProtocolConfig& c, const std::string& v) {
           c.synth.calib_trials_per_class = static_cast<int>(to_int("calib_trials_per_class", v));
         }},
        {"emg_calib_windows",
         [](ProtocolConfig& c, const std::string& v) {
           c.synth.emg_calib_windows = static_cast<int>(to_int("emg_calib_windows", v));
         }},
        {"calibration_seed",
         [](ProtocolConfig& c, const std::string& v) { c.synth.calibration_seed = to_u64("calibration_seed", v); }}}},
      {"learning",
       {{"confidence",
         [](ProtocolConfig& c, const std::string& v) { c.learning.confidence = to_double("confidence", v); }},
        {"accept_radius",
         [](ProtocolConfig& c, const std::string& v) { c.learning.accept_radius = to_double("accept_radius", v); }},
        {"backend", [](ProtocolConfig& c, const std::string& v) { c.learning.backend = v; }},
        {"oracle_accuracy",
         [](ProtocolConfig& c, const std::string& v) {
           c.learning.oracle_accuracy = to_optional("oracle_accuracy", v);
         }},
        {"demo", [](ProtocolConfig& c, const std::string& v) { c.learning.demo = v; }}}},
      {"world",
       {{"grasp_radius",
         [](ProtocolConfig& c, const std::string& v) { c.world.grasp_radius = to_double("grasp_radius", v); }},
        {"wipe_width", [](ProtocolConfig& c, const std::string& v) { c.world.wipe_width = to_double("wipe_width", v); }},
        {"pour_xy_tolerance",
         [](ProtocolConfig& c, const std::string& v) {
           c.world.pour_xy_tolerance = to_double("pour_xy_tolerance", v);
         }},
        {"pour_min_clearance",
         [](ProtocolConfig& c, const std::string& v) {
           c.world.pour_min_clearance = to_double("pour_min_clearance", v);
         }},
        {"pour_max_clearance",
         [](ProtocolConfig& c, const std::string& v) {
           c.world.pour_max_clearance = to_double("pour_max_clearance", v);
         }},
        {"jitter_xy", [](ProtocolConfig& c, const std::string& v) { c.jitter_xy = to_optional("jitter_xy", v); }}}},
  };
  return s;
}

// Per-skill durations live in [world] as <skill>_s, e.g. wipe_s = 12.
bool set_duration(ProtocolConfig& c, const std::string& key, const std::string& v) {
  if (key.size() < 3 || key.substr(key.size() - 2) != "_s") return false;
  const std::string name = key.substr(0, key.size() - 2);
  for (SkillKind k : kAllSkills) {
    std::string lower(to_string(k));
    for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (lower == name) {
      c.world.durations.seconds[k] = to_double(key, v);
      return true;
    }
  }
  return false;
}

}  // namespace

std::string_view to_string(ProtocolMode m) {
  switch (m) {
    case ProtocolMode::Noir1: return "noir1";
    case ProtocolMode::Noir2: return "noir2";
    case ProtocolMode::Noir2Learning: return "noir2_learning";
  }
  return "?";
}

ProtocolMode protocol_mode_from_string(std::string_view s) {
  if (s == "noir1" || s == "Noir1") return ProtocolMode::Noir1;
  if (s == "noir2" || s == "Noir2") return ProtocolMode::Noir2;
  if (s == "noir2_learning" || s == "Noir2Learning") return ProtocolMode::Noir2Learning;
  fail(ErrorCode::ConfigInvalid, "unknown mode '" + std::string(s) + "'");
}

PolicyKind ProtocolConfig::policy() const {
  return mode == ProtocolMode::Noir1 ? PolicyKind::BinarySequential : PolicyKind::Continuous4Way;
}

MiConfig ProtocolConfig::mi_config() const {
  MiConfig m = mode == ProtocolMode::Noir1 ? MiConfig::csp_qda_baseline() : MiConfig{};
  m.seed = synth.calibration_seed;
  return m;
}

ControlPolicy ProtocolConfig::control_policy() const {
  ControlPolicy p;
  p.kind = policy();
  p.step_size = stage.step_size;
  p.decode_period = stage.mi_window_s;
  p.confirm_window = stage.emg_window_s;
  p.success_radius = stage.success_radius;
  p.max_steps = stage.max_steps;
  p.max_restarts = stage.max_restarts;
  return p;
}

SynthConfig ProtocolConfig::synth_config(double snr_db, std::uint64_t s) const {
  SynthConfig c = SynthConfig::defaults(ChannelLayout::standard16(), synth.fs);
  c.snr_db = snr_db;
  c.seed = s;
  c.burst_gain = synth.burst_gain;
  c.drift_db_per_min = synth.drift_db_per_min;
  c.wrong_intent_prob = synth.wrong_intent_prob;
  return c;
}

std::string ProtocolConfig::resolve(const std::string& path) const {
  if (path.empty() || fs::path(path).is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / path).string();
}

std::string ProtocolConfig::task_path() const {
  if (task.find('/') != std::string::npos || task.find(".task") != std::string::npos) {
    const std::string p = resolve(task);
    if (fs::exists(p)) return p;
    if (fs::exists(task)) return task;
    fail(ErrorCode::ConfigInvalid, "task file '" + task + "' not found");
  }
  const std::string p = (fs::path(data_dir()) / "tasks" / (task + ".task")).string();
  if (!fs::exists(p)) fail(ErrorCode::ConfigInvalid, "no shipped task named '" + task + "'");
  return p;
}

void ProtocolConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::ConfigInvalid, what);
  };
  need(attempt_budget >= 1, "attempt_budget must be at least 1");
  need(max_stage_retries >= 0, "max_stage_retries must be non-negative");
  need(stage.ssvep_s > 0 && stage.mi_window_s >= 1.0 && stage.emg_window_s > 0 && stage.inter_stage_s >= 0,
       "stage durations must be positive (MI windows at least 1 s)");
  need(stage.step_size > 0 && stage.success_radius > 0, "cursor step and radius must be positive");
  need(stage.max_steps >= 1 && stage.max_restarts >= 0, "cursor limits out of range");
  need(synth.fs > 0, "fs must be positive");
  need(synth.burst_gain > 0, "burst_gain must be positive");
  need(synth.wrong_intent_prob >= 0 && synth.wrong_intent_prob <= 1, "wrong_intent_prob must lie in [0, 1]");
  need(synth.blink_prob >= 0 && synth.blink_prob <= 1, "blink_prob must lie in [0, 1]");
  need(synth.calib_trials_per_class >= 10, "calib_trials_per_class must be at least 10");
  need(synth.emg_calib_windows >= 10, "emg_calib_windows must be at least 10");
  need(learning.confidence >= -1 && learning.confidence <= 1, "confidence is a cosine in [-1, 1]");
  need(learning.accept_radius > 0, "accept_radius must be positive");
  need(!learning.oracle_accuracy || (*learning.oracle_accuracy >= 0 && *learning.oracle_accuracy <= 1),
       "oracle_accuracy must lie in [0, 1]");
  need(learning.backend == "reference" || learning.backend == "external", "unknown feature backend");
  need(!jitter_xy || (*jitter_xy >= 0 && *jitter_xy <= 0.1), "jitter_xy must lie in [0, 0.1]");
  for (const auto& [k, s] : world.durations.seconds) need(s >= 0, "skill durations must be non-negative");
}

ProtocolConfig read_config(std::istream& is, const std::string& base_dir) {
  std::vector<text::Section> secs;
  try {
    secs = text::parse_sections(is);
  } catch (const Error& e) {
    fail(ErrorCode::ConfigInvalid, e.what());
  }
  ProtocolConfig c;
  c.base_dir = base_dir;
  const auto& table = setters();
  for (const auto& s : secs) {
    const auto sec = table.find(s.name);
    if (sec == table.end()) fail(ErrorCode::ConfigInvalid, "unknown section [" + s.name + "]");
    for (const auto& [k, v] : s.entries) {
      const auto it = sec->second.find(k);
      if (it != sec->second.end()) {
        it->second(c, v);
      } else if (!(s.name == "world" && set_duration(c, k, v))) {
        fail(ErrorCode::ConfigInvalid, "unknown key '" + k + "' in [" + s.name + "]");
      }
    }
  }
  c.validate();
  return c;
}

ProtocolConfig read_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::ConfigInvalid, "cannot open config " + path);
  return read_config(is, fs::path(path).parent_path().string());
}

void write_config(std::ostream& os, const ProtocolConfig& c) {
  os << "[protocol]\nmode = " << to_string(c.mode) << "\ntask = " << c.task << "\nattempt_budget = " << c.attempt_budget
     << "\nmax_stage_retries = " << c.max_stage_retries << "\nseed = " << c.seed << "\n";
  if (!c.calibration.empty()) os << "calibration = " << c.calibration << "\n";
  os << "\n[stage]\nssvep_s = " << text::exact(c.stage.ssvep_s) << "\nmi_window_s = " << text::exact(c.stage.mi_window_s)
     << "\nemg_window_s = " << text::exact(c.stage.emg_window_s)
     << "\ninter_stage_s = " << text::exact(c.stage.inter_stage_s) << "\nstep_size = " << text::exact(c.stage.step_size)
     << "\nsuccess_radius = " << text::exact(c.stage.success_radius) << "\nmax_steps = " << c.stage.max_steps
     << "\nmax_restarts = " << c.stage.max_restarts << "\nnotch_hz = " << optional_text(c.stage.notch_hz) << "\n";
  os << "\n[synth]\nfs = " << text::exact(c.synth.fs) << "\nssvep_snr_db = " << text::exact(c.synth.ssvep_snr_db)
     << "\nmi_snr_db = " << text::exact(c.synth.mi_snr_db) << "\nburst_gain = " << text::exact(c.synth.burst_gain)
     << "\ndrift_db_per_min = " << optional_text(c.synth.drift_db_per_min)
     << "\nwrong_intent_prob = " << text::exact(c.synth.wrong_intent_prob)
     << "\nblink_prob = " << text::exact(c.synth.blink_prob)
     << "\nblink_amplitude = " << text::exact(c.synth.blink_amplitude)
     << "\ncalib_trials_per_class = " << c.synth.calib_trials_per_class
     << "\nemg_calib_windows = " << c.synth.emg_calib_windows << "\ncalibration_seed = " << c.synth.calibration_seed
     << "\n";
  os << "\n[learning]\nconfidence = " << text::exact(c.learning.confidence)
     << "\naccept_radius = " << text::exact(c.learning.accept_radius) << "\nbackend = " << c.learning.backend
     << "\noracle_accuracy = " << optional_text(c.learning.oracle_accuracy) << "\n";
  if (!c.learning.demo.empty()) os << "demo = " << c.learning.demo << "\n";
  os << "\n[world]\ngrasp_radius = " << text::exact(c.world.grasp_radius)
     << "\nwipe_width = " << text::exact(c.world.wipe_width)
     << "\npour_xy_tolerance = " << text::exact(c.world.pour_xy_tolerance)
     << "\npour_min_clearance = " << text::exact(c.world.pour_min_clearance)
     << "\npour_max_clearance = " << text::exact(c.world.pour_max_clearance)
     << "\njitter_xy = " << optional_text(c.jitter_xy) << "\n";
  for (const auto& [k, s] : c.world.durations.seconds) {
    std::string lower(to_string(k));
    for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    os << lower << "_s = " << text::exact(s) << "\n";
  }
}

std::string data_dir() {
  if (const char* env = std::getenv("NOIR_DATA_DIR"); env && *env) return env;
  return NOIR_DATA_DIR;
}

}  // namespace noir
