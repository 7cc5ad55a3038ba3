#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "noir/benchmark.hpp"
#include "noir/calibration_io.hpp"
#include "noir/config.hpp"
#include "noir/cursor.hpp"
#include "noir/eeg_io.hpp"
#include "noir/error.hpp"
#include "noir/learning.hpp"
#include "noir/protocol.hpp"
#include "noir/rng.hpp"
#include "noir/synth.hpp"
#include "noir/text.hpp"

namespace fs = std::filesystem;
using namespace noir;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

ProtocolConfig load_config(const Globals& g) {
  ProtocolConfig cfg = g.config.empty() ? ProtocolConfig{} : read_config_file(g.config);
  if (g.seed) cfg.seed = *g.seed;
  return cfg;
}

std::string out_path(const Globals& g, const std::string& name) {
  fs::create_directories(g.out);
  return (fs::path(g.out) / name).string();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::InvalidArgument, "cannot write " + path);
  return os;
}

std::string join_scores(const double* v, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ',';
    s += format_value(v[i]);
  }
  return s;
}

// -- synth -------------------------------------------------------------------

struct SynthArgs {
  std::string kind = "session";
  int count = 10;
  std::optional<double> snr;
};

int run_synth(const Globals& g, const SynthArgs& a) {
  const ProtocolConfig cfg = load_config(g);
  const double win = cfg.stage.mi_window_s;
  int written = 0;
  auto emit = [&](const std::string& name, const EegSegment& seg, std::map<std::string, std::string> extra) {
    write_eeg_file(out_path(g, name), seg, extra);
    ++written;
  };
  char name[64];
  if (a.kind == "mi" || a.kind == "session") {
    Synth s(cfg.synth_config(a.snr.value_or(cfg.synth.mi_snr_db), derive_seed(cfg.seed, hash_name("cli-mi"))));
    const auto trials = s.mi_session(a.count, win);
    for (std::size_t i = 0; i < trials.size(); ++i) {
      std::snprintf(name, sizeof name, "mi_%04zu.eeg", i);
      emit(name, trials[i].segment, {{"label", std::string(to_string(trials[i].label))}});
    }
  }
  if (a.kind == "emg" || a.kind == "session") {
    const SynthConfig sc =
        cfg.synth_config(a.snr.value_or(cfg.synth.mi_snr_db), derive_seed(cfg.seed, hash_name("cli-emg")));
    for (int i = 0; i < 2 * a.count; ++i) {
      const bool clench = i % 2 == 1;
      std::snprintf(name, sizeof name, "emg_%04d.eeg", i);
      emit(name, gen_emg(clench, sc, static_cast<std::uint64_t>(i), cfg.stage.emg_window_s),
           {{"label", clench ? "clench" : "rest"}});
    }
  }
  if (a.kind == "ssvep") {
    const SynthConfig sc =
        cfg.synth_config(a.snr.value_or(cfg.synth.ssvep_snr_db), derive_seed(cfg.seed, hash_name("cli-ssvep")));
    const FrequencyBank bank;
    for (int i = 0; i < a.count; ++i) {
      const std::size_t k = static_cast<std::size_t>(i) % bank.freqs.size();
      std::snprintf(name, sizeof name, "ssvep_%04d.eeg", i);
      emit(name, gen_ssvep(bank.freqs[k], cfg.stage.ssvep_s, sc, static_cast<std::uint64_t>(i)),
           {{"label", std::to_string(k)}, {"freq", text::exact(bank.freqs[k])}});
    }
  }
  if (written == 0) fail(ErrorCode::InvalidArgument, "unknown synth kind '" + a.kind + "'");
  std::cout << "wrote " << written << " recordings to " << g.out << "\n";
  return 0;
}

// -- calibrate ---------------------------------------------------------------

struct CalibrateArgs {
  std::string session;
  std::string model = "model.midec";
};

int run_calibrate(const Globals& g, const CalibrateArgs& a) {
  ProtocolConfig cfg = load_config(g);
  if (g.seed) cfg.synth.calibration_seed = *g.seed;
  std::optional<MiDecoder> mi;
  TensionThreshold th;
  if (a.session.empty()) {
    cfg.calibration.clear();
    Decoders d = calibrate_decoders(cfg);
    mi.emplace(std::move(d.mi));
    th = d.emg;
  } else {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.session)) {
      if (e.path().extension() == ".eeg") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<MiTrial> trials;
    std::vector<EegSegment> rest, clench;
    for (const auto& f : files) {
      EegRecording r = read_eeg_file(f.string());
      const auto label = r.get("label");
      if (!label) continue;
      if (*label == "rest") {
        rest.push_back(r.segment);
      } else if (*label == "clench") {
        clench.push_back(r.segment);
      } else {
        trials.push_back({r.segment, mi_class_from_string(*label)});
      }
    }
    if (trials.empty()) fail(ErrorCode::InsufficientTrials, "no labelled MI trials in " + a.session);
    mi.emplace(calibrate_mi(trials, cfg.mi_config()));
    th = calibrate_threshold(rest, clench, cfg.stage.emg_window_s);
  }
  const std::string path = out_path(g, a.model);
  write_calibration_file(path, *mi, th);
  std::printf("calib_accuracy %.4f\nemg_threshold %.6f\nmodel %s\n", mi->calib_accuracy(), th.log_variance_threshold,
              path.c_str());
  return 0;
}

// -- decode ------------------------------------------------------------------

struct DecodeArgs {
  std::string stage = "mi";
  std::string input;
  std::string model;
  int choices = 0;
};

int run_decode(const Globals& g, const DecodeArgs& a) {
  ProtocolConfig cfg = load_config(g);
  const EegRecording rec = read_eeg_file(a.input);
  if (a.stage == "ssvep") {
    SsvepDecoder::Config sc;
    sc.notch_hz = cfg.stage.notch_hz;
    sc.window_s = cfg.stage.ssvep_s;
    const SsvepResult r = SsvepDecoder(sc).decode(rec.segment, static_cast<std::size_t>(a.choices));
    std::printf("index %d\nscores %s\n", r.index, join_scores(r.scores.data(), r.scores.size()).c_str());
    return 0;
  }
  if (!a.model.empty()) cfg.calibration = a.model;
  if (cfg.calibration.empty()) fail(ErrorCode::CalibrationMissing, "decode " + a.stage + " needs --model");
  const CalibrationModel m = read_calibration_file(a.model.empty() ? cfg.resolve(cfg.calibration) : a.model);
  if (a.stage == "mi") {
    const MiDecision d = m.mi.decode(rec.segment);
    const MiClass c = a.choices > 0 ? d.best_of(a.choices) : d.cls;
    std::printf("class %s\nscores %s\n", std::string(to_string(c)).c_str(),
                join_scores(d.scores.data(), d.scores.size()).c_str());
    return 0;
  }
  if (a.stage == "emg") {
    if (!m.emg) fail(ErrorCode::CalibrationMissing, "model has no [emg] section");
    const GateDecision d = gate_confirm(rec.segment, *m.emg, ArtifactConfig::from_threshold(*m.emg));
    std::printf("tension %d\nartifact %s\nconfirmed %d\n", d.tension ? 1 : 0,
                std::string(to_string(d.artifact.kind)).c_str(), d.confirmed ? 1 : 0);
    return 0;
  }
  fail(ErrorCode::InvalidArgument, "unknown stage '" + a.stage + "'");
}

// -- simulate / benchmark ----------------------------------------------------

struct SimulateArgs {
  std::string report = "report.jsonl";
};

int run_simulate(const Globals& g, const SimulateArgs& a) {
  const ProtocolConfig cfg = load_config(g);
  TaskDefinition task = read_task_file(cfg.task_path());
  if (cfg.jitter_xy) task.jitter_xy = *cfg.jitter_xy;
  const Decoders dec = calibrate_decoders(cfg);
  std::optional<DemoSequence> demo;
  if (cfg.learning_enabled() && !cfg.learning.oracle_accuracy) {
    demo = cfg.learning.demo.empty() ? capture_demo(cfg, task, dec) : read_demo(cfg.resolve(cfg.learning.demo));
  }
  const TrialReport r = run_trial(cfg, {&task, &dec, demo ? &*demo : nullptr, nullptr});
  const std::string path = out_path(g, a.report);
  std::ofstream os = open_out(path);
  write_report_jsonl(os, r);
  std::printf("%s %s seed %llu success %d attempts %d total %.1f s human %.1f s\nreport %s\n", r.task_id.c_str(),
              std::string(to_string(r.mode)).c_str(), static_cast<unsigned long long>(r.seed), r.success ? 1 : 0,
              r.attempts, r.total_time_s, r.human_time_s, path.c_str());
  return 0;
}

struct BenchmarkArgs {
  int seeds = 5;
  std::vector<std::string> tasks{"wipe_spill", "open_basket", "pour_tea"};
  std::vector<std::string> modes{"noir1", "noir2", "noir2_learning"};
  std::string csv = "benchmark.csv";
};

int run_bench(const Globals& g, const BenchmarkArgs& a) {
  const ProtocolConfig cfg = load_config(g);
  std::vector<ProtocolMode> modes;
  for (const auto& m : a.modes) modes.push_back(protocol_mode_from_string(m));
  const BenchmarkSummary s = run_benchmark(cfg, a.tasks, modes, a.seeds);
  write_benchmark_table(std::cout, s);
  const std::string path = out_path(g, a.csv);
  std::ofstream os = open_out(path);
  write_benchmark_csv(os, s);
  std::cout << "csv " << path << "\n";
  return 0;
}

// -- learning ----------------------------------------------------------------

struct MatchArgs {
  std::string demo;
  int state = 0;
  std::string top;
  std::string side;
};

int run_match(const Globals& g, const MatchArgs& a) {
  const ProtocolConfig cfg = load_config(g);
  const DemoSequence demo = read_demo(a.demo);
  if (a.state < 0 || a.state + 1 >= static_cast<int>(demo.states.size())) {
    fail(ErrorCode::InvalidArgument, "state must have an annotated successor");
  }
  const DemoState& next = demo.states[static_cast<std::size_t>(a.state) + 1];
  if (!next.param) fail(ErrorCode::InvalidArgument, "successor state has no parameter");
  const int dims = parameter_dims(skill_from_string(next.skill));
  const DemoIndex index(demo, cfg.learning.backend);
  const auto backend = make_backend(cfg.learning.backend);
  const FeatureMap top = backend->extract(read_ppm(a.top));
  std::optional<FeatureMap> side;
  if (dims == 3) {
    if (a.side.empty()) fail(ErrorCode::InvalidArgument, next.skill + " needs --side");
    side = backend->extract(read_ppm(a.side));
  }
  const ParameterPrediction p =
      transfer_parameter(index, a.state, *next.param, top, side ? &*side : nullptr, dims, CameraCalibration::standard());
  std::printf("%s %s\nparam %.6f %.6f %.6f\nscore %.6f\npixel %.1f %.1f\n", next.obj.c_str(), next.skill.c_str(),
              p.param.x, p.param.y, p.param.z, p.score, p.top_pixel.u, p.top_pixel.v);
  return 0;
}

struct CaptureArgs {
  std::string dir = "demo";
};

int run_capture(const Globals& g, const CaptureArgs& a) {
  const ProtocolConfig cfg = load_config(g);
  TaskDefinition task = read_task_file(cfg.task_path());
  const Decoders dec = calibrate_decoders(cfg);
  const DemoSequence demo = capture_demo(cfg, task, dec);
  const std::string path = out_path(g, a.dir);
  write_demo(path, demo);
  std::printf("%zu states of %s in %s\n", demo.states.size(), demo.task_id.c_str(), path.c_str());
  return 0;
}

// -- cursor ------------------------------------------------------------------

struct CursorArgs {
  std::vector<double> target{0.7, 0.3, 0.5};
  double accuracy = 1.0;
  std::string policy = "continuous";
  std::string trace = "trace.csv";
};

int run_cursor(const Globals& g, const CursorArgs& a) {
  const ProtocolConfig cfg = load_config(g);
  if (a.target.size() != 3) fail(ErrorCode::InvalidArgument, "--target takes x y z");
  ControlPolicy p = cfg.control_policy();
  p.kind = policy_kind_from_string(a.policy);
  const SelectionResult r = run_parameter_selection({a.target[0], a.target[1], a.target[2]},
                                                    stochastic_channel(a.accuracy, cfg.seed), p, perfect_confirm());
  const std::string path = out_path(g, a.trace);
  std::ofstream os = open_out(path);
  write_trace_csv(os, r.trace);
  std::printf("outcome %s\nsteps %d\npos %.4f %.4f %.4f\ntrace %s\n", std::string(to_string(r.outcome)).c_str(),
              r.step_count, r.pos.x, r.pos.y, r.pos.z, path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noir: EEG intention decoding and shared-autonomy simulation"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "configuration file");
  app.add_option("--seed", g.seed, "trial seed");
  app.add_option("--out", g.out, "output directory");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "write labelled synthetic recordings");
  synth->add_option("--kind", sa.kind, "mi, ssvep, emg or session")->check(CLI::IsMember({"mi", "ssvep", "emg", "session"}));
  synth->add_option("--count", sa.count, "recordings per class")->check(CLI::PositiveNumber);
  synth->add_option("--snr", sa.snr, "SNR in dB");

  CalibrateArgs ca;
  auto* calibrate = app.add_subcommand("calibrate", "fit the MI decoder and EMG threshold");
  calibrate->add_option("--session", ca.session, "directory of labelled recordings; synthetic when absent");
  calibrate->add_option("--model", ca.model, "model file name under --out");

  DecodeArgs da;
  auto* decode = app.add_subcommand("decode", "run one decoder stage on a recording");
  decode->add_option("--stage", da.stage, "ssvep, mi or emg")->check(CLI::IsMember({"ssvep", "mi", "emg"}));
  decode->add_option("--input", da.input, "noir-eeg recording")->required();
  decode->add_option("--model", da.model, "noir-midec model");
  decode->add_option("--choices", da.choices, "restrict to the first k classes or frequencies");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "run one closed-loop trial");
  simulate->add_option("--report", sim.report, "report file name under --out");

  BenchmarkArgs ba;
  auto* bench = app.add_subcommand("benchmark", "compare protocol modes across tasks");
  bench->add_option("--seeds", ba.seeds, "trials per task and mode")->check(CLI::PositiveNumber);
  bench->add_option("--tasks", ba.tasks, "task names")->delimiter(',');
  bench->add_option("--modes", ba.modes, "protocol modes")->delimiter(',');
  bench->add_option("--csv", ba.csv, "CSV file name under --out");

  MatchArgs ma;
  auto* match = app.add_subcommand("match-param", "transfer a demo parameter to new images");
  match->add_option("--demo", ma.demo, "noir-demo bundle")->required();
  match->add_option("--state", ma.state, "demo state the skill was applied to")->required();
  match->add_option("--top", ma.top, "top-view query image")->required();
  match->add_option("--side", ma.side, "side-view query image");

  CaptureArgs cap;
  auto* capture = app.add_subcommand("demo-capture", "record a demonstration from a decoded trial");
  capture->add_option("--dir", cap.dir, "bundle directory name under --out");

  CursorArgs cur;
  auto* cursor = app.add_subcommand("cursor", "simulate one parameter selection and write its trace");
  cursor->add_option("--target", cur.target, "x y z")->expected(3);
  cursor->add_option("--accuracy", cur.accuracy, "decoder accuracy")->check(CLI::Range(0.0, 1.0));
  cursor->add_option("--policy", cur.policy, "continuous or binary");
  cursor->add_option("--trace", cur.trace, "trace CSV name under --out");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*synth) return run_synth(g, sa);
    if (*calibrate) return run_calibrate(g, ca);
    if (*decode) return run_decode(g, da);
    if (*simulate) return run_simulate(g, sim);
    if (*bench) return run_bench(g, ba);
    if (*match) return run_match(g, ma);
    if (*capture) return run_capture(g, cap);
    if (*cursor) return run_cursor(g, cur);
  } catch (const std::exception& e) {
    std::cerr << "noir: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
