#include <cmath>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "noir/benchmark.hpp"
#include "noir/protocol.hpp"

using namespace noir;
using namespace noir::testing;

namespace {

ProtocolConfig clean_config(ProtocolMode mode, const std::string& task = "wipe_spill") {
  ProtocolConfig c;
  c.mode = mode;
  c.task = task;
  c.synth.ssvep_snr_db = 40;
  c.synth.mi_snr_db = 40;
  return c;
}

const Decoders& decoders_for(const ProtocolConfig& cfg) {
  static std::map<std::string, Decoders> cache;
  const std::string key = std::string(to_string(cfg.mode)) + std::to_string(cfg.synth.mi_snr_db);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, calibrate_decoders(cfg)).first;
  return it->second;
}

std::string jsonl(const TrialReport& r) {
  std::stringstream ss;
  write_report_jsonl(ss, r);
  return ss.str();
}

}  // namespace

TEST(Config, ParsesShippedFiles) {
  const ProtocolConfig c = read_config_file(data_dir() + "/configs/tea_noisy.cfg");
  EXPECT_EQ(c.task, "pour_tea");
  EXPECT_EQ(c.synth.ssvep_snr_db, -25);
  EXPECT_EQ(c.synth.blink_prob, 0.1);
  const ProtocolConfig r = read_config_file(data_dir() + "/configs/reference.cfg");
  std::stringstream a, b;
  write_config(a, r);
  write_config(b, ProtocolConfig{});
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(read_config_file(data_dir() + "/configs/wipe_noir1.cfg").policy(), PolicyKind::BinarySequential);
  EXPECT_EQ(read_config_file(data_dir() + "/configs/wipe_noir2.cfg").policy(), PolicyKind::Continuous4Way);
}

TEST(Config, RoundTrip) {
  ProtocolConfig c;
  c.mode = ProtocolMode::Noir2Learning;
  c.seed = 1234567;
  c.synth.mi_snr_db = -13.37;
  c.synth.drift_db_per_min = -0.1;
  c.stage.notch_hz.reset();
  c.learning.oracle_accuracy = 0.83;
  c.jitter_xy = 0.015;
  std::stringstream a;
  write_config(a, c);
  const ProtocolConfig back = read_config(a);
  std::stringstream b;
  write_config(b, back);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(back.synth.mi_snr_db, -13.37);
  EXPECT_FALSE(back.stage.notch_hz.has_value());
  EXPECT_EQ(back.learning.oracle_accuracy, 0.83);
}

TEST(Config, Rejections) {
  std::stringstream unknown_key("[stage]\nssvep_secs = 4\n");
  EXPECT_NOIR_ERROR(read_config(unknown_key), ErrorCode::ConfigInvalid);
  std::stringstream unknown_section("[display]\nfps = 60\n");
  EXPECT_NOIR_ERROR(read_config(unknown_section), ErrorCode::ConfigInvalid);
  std::stringstream bad_value("[synth]\nfs = fast\n");
  EXPECT_NOIR_ERROR(read_config(bad_value), ErrorCode::ConfigInvalid);
  std::stringstream bad_mode("[protocol]\nmode = noir3\n");
  EXPECT_NOIR_ERROR(read_config(bad_mode), ErrorCode::ConfigInvalid);
  ProtocolConfig c;
  c.attempt_budget = 0;
  EXPECT_NOIR_ERROR(c.validate(), ErrorCode::ConfigInvalid);
  c = ProtocolConfig{};
  c.learning.confidence = 1.5;
  EXPECT_NOIR_ERROR(c.validate(), ErrorCode::ConfigInvalid);
  EXPECT_NOIR_ERROR(read_config_file("/nonexistent/noir.cfg"), ErrorCode::ConfigInvalid);
}

TEST(Trial, CleanSignalsMatchClosedForm) {
  for (const char* name : {"wipe_spill", "open_basket", "pour_tea"}) {
    const ProtocolConfig cfg = clean_config(ProtocolMode::Noir2, name);
    const TaskDefinition task = shipped_task(name);
    const TrialReport r = run_trial(cfg, {&task, &decoders_for(cfg)});
    EXPECT_TRUE(r.success) << name << ": " << r.end_reason;
    EXPECT_EQ(r.attempts, 1);
    // rare MI misdecodes add cursor moves; each costs exactly one decode window
    WorldState w = task.instantiate(0);
    int extra = 0;
    std::size_t step = 0;
    for (const StageLog& st : r.stages) {
      ASSERT_TRUE(st.confirmed) << name << " " << st.stage;
      if (st.stage != "select_param") continue;
      const PlanStep& ps = task.plan[step++];
      const Vec3 p = task.resolve(ps, w);
      int moves = 0;
      for (int a = 0; a < parameter_dims(ps.skill); ++a) moves += oracle::axis_moves(p[a] - 0.5, 0.05);
      EXPECT_GE(st.cursor_steps, moves);
      extra += st.cursor_steps - moves;
      w = execute_skill(w, {ps.skill, ps.object, p}).first;
    }
    EXPECT_EQ(step, task.plan.size());
    EXPECT_LE(extra, 4) << name;
    EXPECT_NEAR(r.human_time_s, oracle::closed_form_human_time(task) + 3.0 * extra, 1e-9) << name;
    EXPECT_NEAR(r.overhead_time_s, 2.0 * static_cast<double>(r.stages.size()), 1e-9);
    EXPECT_TRUE(r.time_identity_holds());
    EXPECT_EQ(r.skill_count, static_cast<int>(task.plan.size()));
  }
  // 32 moves over five steps, each step 14.5 s of selection and confirms
  EXPECT_NEAR(oracle::closed_form_human_time(shipped_task("wipe_spill")), 168.5, 1e-9);
}

TEST(Trial, LearningCutsHumanTime) {
  for (const char* name : {"wipe_spill", "open_basket"}) {
    const TaskDefinition task = shipped_task(name);
    const ProtocolConfig base = clean_config(ProtocolMode::Noir2, name);
    ProtocolConfig learn = clean_config(ProtocolMode::Noir2Learning, name);
    const Decoders& d = decoders_for(base);
    const DemoSequence demo = capture_demo(learn, task, d);
    for (std::uint64_t seed : {2u, 3u}) {
      ProtocolConfig a = base, b = learn;
      a.seed = b.seed = seed;
      const TrialReport ra = run_trial(a, {&task, &d});
      const TrialReport rb = run_trial(b, {&task, &d, &demo});
      ASSERT_TRUE(ra.success && rb.success) << ra.end_reason << " / " << rb.end_reason;
      EXPECT_LT(rb.human_time_s, ra.human_time_s);
      bool skipped = false;
      for (const StageLog& s : rb.stages) skipped = skipped || s.skipped_by_learning;
      EXPECT_TRUE(skipped);
    }
  }
}

TEST(Trial, ChanceDecodersFailGracefully) {
  ProtocolConfig cfg;
  cfg.mode = ProtocolMode::Noir2;
  cfg.attempt_budget = 2;
  cfg.max_stage_retries = 3;
  cfg.synth.ssvep_snr_db = -60;
  cfg.synth.mi_snr_db = -60;
  cfg.seed = 9;
  const TaskDefinition task = shipped_task("wipe_spill");
  ProtocolConfig calib = cfg;
  calib.synth.mi_snr_db = 40;  // calibrate on clean data, decode noise
  const Decoders& d = decoders_for(calib);
  TrialReport r;
  ASSERT_NO_THROW(r = run_trial(cfg, {&task, &d}));
  EXPECT_FALSE(r.success);
  EXPECT_LE(r.attempts, 2);
  EXPECT_FALSE(r.end_reason.empty());
  EXPECT_TRUE(r.time_identity_holds());
  EXPECT_GT(r.human_time_s, 0.0);
}

TEST(Trial, TimeIdentityUnderNoise) {
  const TaskDefinition task = shipped_task("pour_tea");
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ProtocolConfig cfg;
    cfg.task = "pour_tea";
    cfg.seed = seed;
    cfg.synth.ssvep_snr_db = -25;
    cfg.synth.mi_snr_db = -14;
    cfg.synth.wrong_intent_prob = 0.2;
    const TrialReport r = run_trial(cfg, {&task, &decoders_for(cfg)});
    EXPECT_TRUE(r.time_identity_holds()) << seed;
    double human = 0.0;
    for (const StageLog& s : r.stages) human += s.duration_s;
    EXPECT_NEAR(human, r.human_time_s, 1e-6);
    double exec = 0.0;
    for (const SkillLog& s : r.skills) exec += s.duration_s;
    EXPECT_NEAR(exec, r.execution_time_s, 1e-6);
  }
}

TEST(Trial, RejectedPredictionsFallBackToDecoding) {
  const TaskDefinition task = shipped_task("wipe_spill");
  ProtocolConfig cfg = clean_config(ProtocolMode::Noir2Learning);
  cfg.learning.oracle_accuracy = 0.0;
  cfg.seed = 4;
  const TrialReport r = run_trial(cfg, {&task, &decoders_for(clean_config(ProtocolMode::Noir2))});
  EXPECT_TRUE(r.success) << r.end_reason;
  int fallbacks = 0;
  for (std::size_t i = 0; i < r.stages.size(); ++i) {
    const StageLog& s = r.stages[i];
    if (s.stage.rfind("predict_", 0) == 0) {
      EXPECT_FALSE(s.confirmed);
      ASSERT_LT(i + 1, r.stages.size());
      EXPECT_TRUE(r.stages[i + 1].fallback);
    }
    fallbacks += s.fallback ? 1 : 0;
  }
  EXPECT_GT(fallbacks, 0);
}

TEST(Trial, HumanTimeFallsWithOracleAccuracy) {
  const TaskDefinition task = shipped_task("wipe_spill");
  const Decoders& d = decoders_for(clean_config(ProtocolMode::Noir2));
  double prev = 1e18;
  for (double p : {0.0, 0.5, 0.83, 1.0}) {
    double total = 0.0;
    const int n = 12;
    for (int s = 0; s < n; ++s) {
      ProtocolConfig cfg = clean_config(ProtocolMode::Noir2Learning);
      cfg.learning.oracle_accuracy = p;
      cfg.seed = static_cast<std::uint64_t>(100 + s);
      const TrialReport r = run_trial(cfg, {&task, &d});
      EXPECT_TRUE(r.success) << p << " " << s << ": " << r.end_reason;
      total += r.human_time_s;
    }
    EXPECT_LE(total / n, prev) << "p = " << p;
    prev = total / n;
  }
}

TEST(Trial, ReportsAreDeterministic) {
  const TaskDefinition task = shipped_task("open_basket");
  ProtocolConfig cfg;
  cfg.task = "open_basket";
  cfg.seed = 21;
  const Decoders& d = decoders_for(cfg);
  const std::string a = jsonl(run_trial(cfg, {&task, &d})), b = jsonl(run_trial(cfg, {&task, &d}));
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("\"stage\":\"select_object\""), std::string::npos);
  cfg.seed = 22;
  EXPECT_NE(a, jsonl(run_trial(cfg, {&task, &d})));
}

TEST(Trial, MissingCalibrationFile) {
  ProtocolConfig cfg;
  cfg.calibration = "/nonexistent/model.midec";
  EXPECT_NOIR_ERROR(calibrate_decoders(cfg), ErrorCode::CalibrationMissing);
  ProtocolConfig learn = clean_config(ProtocolMode::Noir2Learning);
  learn.learning.demo = "/nonexistent/demo";
  const TaskDefinition task = shipped_task("wipe_spill");
  EXPECT_ANY_THROW(run_trial(learn, {&task, &decoders_for(clean_config(ProtocolMode::Noir2))}));
}

TEST(Trial, BlinksNeverConfirm) {
  const TaskDefinition task = shipped_task("wipe_spill");
  ProtocolConfig cfg;
  cfg.synth.blink_prob = 0.4;
  int blinks = 0;
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    cfg.seed = seed;
    const TrialReport r = run_trial(cfg, {&task, &decoders_for(cfg)});
    EXPECT_TRUE(r.time_identity_holds());
    for (const EmgLog& e : r.emg) {
      if (e.blink) {
        ++blinks;
        EXPECT_FALSE(e.confirmed);
      }
      if (e.confirmed) {
        EXPECT_TRUE(e.tension);
        EXPECT_EQ(e.artifact, "Clean");
      }
    }
  }
  EXPECT_GT(blinks, 0);
}

TEST(Benchmark, ReductionFormula) {
  EXPECT_NEAR(reduction_percent(14.72, 8.27), 43.817934782608695, 1e-9);
  EXPECT_EQ(reduction_percent(10, 10), 0.0);
  EXPECT_LT(reduction_percent(10, 12), 0.0);
}

TEST(Benchmark, SingleSeedIsDeterministic) {
  ProtocolConfig base;
  base.seed = 5;
  auto csv = [&] {
    const BenchmarkSummary s = run_benchmark(base, {"wipe_spill"}, {ProtocolMode::Noir1, ProtocolMode::Noir2}, 1);
    std::stringstream ss;
    write_benchmark_csv(ss, s);
    return ss.str();
  };
  const std::string a = csv();
  EXPECT_EQ(a, csv());
  EXPECT_EQ(a.substr(0, a.find('\n')), "task,mode,success_rate,mean_time_s,mean_human_time_s,reduction_pct");
  EXPECT_NE(a.find("ALL,noir2,"), std::string::npos);
}
