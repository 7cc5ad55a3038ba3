#include "noir/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "noir/calibration_io.hpp"
#include "noir/cursor.hpp"
#include "noir/error.hpp"
#include "noir/intent.hpp"
#include "noir/render.hpp"
#include "noir/rng.hpp"
#include "noir/synth.hpp"

namespace noir {
namespace {

using Json = nlohmann::ordered_json;

long long to_ms(double s) { return std::llround(s * 1000.0); }
double to_s(long long ms) { return static_cast<double>(ms) / 1000.0; }

std::string pair_text(const std::string& obj, SkillKind k) { return obj + "/" + std::string(to_string(k)); }

std::string point_text(const Vec3& p) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.4f,%.4f,%.4f)", p.x, p.y, p.z);
  return buf;
}

struct Choice {
  std::optional<std::string> object;
  std::optional<SkillKind> skill;
  std::optional<Vec3> param;
};

class TrialRunner {
 public:
  TrialRunner(const ProtocolConfig& cfg, const TaskDefinition& task, const Decoders& dec, const DemoSequence* demo)
      : cfg_(cfg),
        task_(task),
        dec_(dec),
        demo_(demo),
        calib_(CameraCalibration::standard()),
        user_rng_(make_rng(cfg.seed, "user")),
        oracle_rng_(make_rng(cfg.seed, "oracle")) {
    const std::uint64_t s = derive_seed(cfg.seed, hash_name("trial-signals"));
    ssvep_cfg_ = cfg.synth_config(cfg.synth.ssvep_snr_db, s);
    mi_cfg_ = cfg.synth_config(cfg.synth.mi_snr_db, s);
    if (demo_ && !cfg.learning.oracle_accuracy) index_.emplace(*demo_, cfg.learning.backend);
    if (task_.initial.objects.size() > dec_.ssvep.config().bank.freqs.size()) {
      fail(ErrorCode::ConfigInvalid, "more objects than flicker frequencies");
    }
  }

  TrialReport run(DemoSequence* capture) {
    rep_.task_id = task_.id;
    rep_.mode = cfg_.mode;
    rep_.seed = cfg_.seed;
    bool used_learning = false;
    for (attempt_ = 1; attempt_ <= cfg_.attempt_budget; ++attempt_) {
      rep_.attempts = attempt_;
      world_ = task_.instantiate(cfg_.seed);
      SimulatedUser user(task_);
      DemoSequence seq;
      seq.task_id = task_.id;
      push_state(seq, "scene", "Start", std::nullopt);
      std::string why;
      for (step_ = 0;; ++step_) {
        SimulatedIntent intent;
        try {
          intent = user.next(world_);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::PlanExhausted) throw;
          why = "plan finished without reaching the goal";
          break;
        }
        if (intent.terminal) {
          rep_.success = true;
          break;
        }
        const auto call = select(intent, used_learning);
        if (!call) {
          why = "stage retries exhausted";
          break;
        }
        auto [next, outcome] = execute_skill(world_, *call, cfg_.world);
        const long long d = to_ms(cfg_.world.durations.of(call->skill));
        clock_exec_ += d;
        rep_.skills.push_back({attempt_, step_, *call, outcome.success, outcome.reason, to_s(d)});
        ++rep_.skill_count;
        world_ = std::move(next);
        if (!outcome.success) {
          why = "skill failed: " + outcome.reason;
          break;
        }
        push_state(seq, call->object, std::string(to_string(call->skill)), call->param);
        user.advance();
      }
      if (rep_.success) {
        rep_.end_reason = "goal reached";
        if (capture && !used_learning) *capture = std::move(seq);
        break;
      }
      rep_.end_reason = why;
    }
    rep_.human_time_s = to_s(clock_human_);
    rep_.execution_time_s = to_s(clock_exec_);
    rep_.overhead_time_s = to_s(clock_overhead_);
    rep_.total_time_s = to_s(clock_human_ + clock_exec_ + clock_overhead_);
    return std::move(rep_);
  }

 private:
  // -- signals ---------------------------------------------------------------

  double elapsed() const { return to_s(clock_human_ + clock_exec_ + clock_overhead_); }

  GateDecision emg_window(bool clench, const std::string& stage) {
    EegSegment w = gen_emg(clench, mi_cfg_, calls_++, cfg_.stage.emg_window_s);
    const bool blink = cfg_.synth.blink_prob > 0.0 && uniform01(user_rng_) < cfg_.synth.blink_prob;
    if (blink) {
      const double centre = (0.3 + 0.4 * uniform01(user_rng_)) * w.duration();
      w = inject_blink(w, cfg_.synth.blink_amplitude * dec_.artifacts.rest_sd, centre);
    }
    const GateDecision g = gate_confirm(w, dec_.emg, dec_.artifacts);
    rep_.emg.push_back({attempt_, step_, stage, clench, blink, g.tension, std::string(to_string(g.artifact.kind)),
                        g.confirmed});
    return g;
  }

  MiDecision mi_window(MiClass cls) {
    return dec_.mi.decode(gen_mi(cls, cfg_.stage.mi_window_s, mi_cfg_, calls_++, elapsed()));
  }

  void log(StageLog s) {
    s.attempt = attempt_;
    s.step = step_;
    clock_human_ += to_ms(s.duration_s);
    clock_overhead_ += to_ms(cfg_.stage.inter_stage_s);
    rep_.stages.push_back(std::move(s));
  }

  void push_state(DemoSequence& seq, const std::string& obj, const std::string& skill, std::optional<Vec3> param) {
    if (!cfg_.learning_enabled()) return;
    SceneViews v = render_views(world_, calib_);
    seq.states.push_back({std::move(v.gripper), std::move(v.top), std::move(v.side), obj, skill, param});
  }

  // -- stages ----------------------------------------------------------------

  bool confirm_stage(bool want, const std::string& stage) { return emg_window(want, stage).confirmed; }

  std::optional<std::string> select_object(const SimulatedIntent& intent, bool fallback) {
    const auto& objs = world_.objects;
    int target = 0;
    for (std::size_t i = 0; i < objs.size(); ++i) {
      if (objs[i].id == intent.object_id) target = static_cast<int>(i);
    }
    int attended = target;
    if (cfg_.synth.wrong_intent_prob > 0.0 && objs.size() > 1 && uniform01(user_rng_) < cfg_.synth.wrong_intent_prob) {
      attended = static_cast<int>((target + 1 + uniform_index(user_rng_, objs.size() - 1)) % objs.size());
    }
    const double f = dec_.ssvep.config().bank.freqs[static_cast<std::size_t>(attended)];
    const EegSegment seg = gen_ssvep(f, cfg_.stage.ssvep_s, ssvep_cfg_, calls_++, elapsed());
    const SsvepResult r = dec_.ssvep.decode(seg, objs.size());
    const bool ok = confirm_stage(r.index == target, "select_object");
    StageLog s;
    s.stage = "select_object";
    s.duration_s = cfg_.stage.ssvep_s + cfg_.stage.emg_window_s;
    s.intended = intent.object_id;
    s.decoded = objs[static_cast<std::size_t>(r.index)].id;
    s.confirmed = ok;
    s.fallback = fallback;
    s.score = r.scores[static_cast<std::size_t>(r.index)];
    log(s);
    if (!ok) return std::nullopt;
    return s.decoded;
  }

  std::optional<SkillKind> select_skill(const SimulatedIntent& intent, const std::string& object, bool fallback) {
    const auto& menu = world_.at(object).skills;
    const auto it = std::find(menu.begin(), menu.end(), intent.skill);
    const bool right_object = object == intent.object_id && it != menu.end();
    const int slot = right_object ? static_cast<int>(it - menu.begin()) : 0;
    const int k = static_cast<int>(menu.size());
    const MiDecision d = mi_window(static_cast<MiClass>(slot));
    const int got = k == 1 ? 0 : ordinal(d.best_of(k));
    const bool ok = confirm_stage(right_object && got == slot, "select_skill");
    StageLog s;
    s.stage = "select_skill";
    s.duration_s = cfg_.stage.mi_window_s + cfg_.stage.emg_window_s;
    s.intended = std::string(to_string(intent.skill));
    s.decoded = std::string(to_string(menu[static_cast<std::size_t>(got)]));
    s.confirmed = ok;
    s.fallback = fallback;
    s.score = d.scores[static_cast<std::size_t>(got)];
    log(s);
    if (!ok) return std::nullopt;
    return menu[static_cast<std::size_t>(got)];
  }

  std::optional<Vec3> select_param(const SimulatedIntent& intent, bool fallback) {
    const bool use_z = parameter_dims(intent.skill) == 3;
    const ClassChannel channel = [this](MiClass want, int k_way) {
      const MiDecision d = mi_window(want);
      return k_way == 2 ? d.best_binary() : d.cls;
    };
    const ConfirmSource confirm = [this](bool clench) { return emg_window(clench, "select_param").confirmed; };
    const SelectionResult r =
        run_parameter_selection(clamp_unit(intent.param), channel, cfg_.control_policy(), confirm, use_z, elapsed());
    StageLog s;
    s.stage = "select_param";
    s.duration_s = r.decode_windows * cfg_.stage.mi_window_s + r.confirm_windows * cfg_.stage.emg_window_s;
    s.intended = point_text(intent.param);
    Vec3 p = r.pos;
    if (!use_z) p.z = intent.param.z;
    s.decoded = point_text(p);
    s.confirmed = r.outcome == SelectionOutcome::Confirmed;
    s.fallback = fallback;
    s.cursor_steps = r.step_count;
    log(s);
    if (!s.confirmed) return std::nullopt;
    return p;
  }

  // -- learning --------------------------------------------------------------

  struct Prediction {
    std::string obj;
    SkillKind skill = SkillKind::MoveTo;
    double score = 0.0;
  };

  bool oracle_hit() { return uniform01(oracle_rng_) < *cfg_.learning.oracle_accuracy; }

  std::optional<Prediction> predict_object_skill(const SimulatedIntent& intent) {
    if (cfg_.learning.oracle_accuracy) {
      if (oracle_hit()) return Prediction{intent.object_id, intent.skill, 1.0};
      for (const auto& st : task_.plan) {
        if (st.object != intent.object_id || st.skill != intent.skill) return Prediction{st.object, st.skill, 1.0};
      }
      return Prediction{intent.object_id, intent.skill == SkillKind::MoveTo ? SkillKind::Pick : SkillKind::MoveTo, 1.0};
    }
    if (!index_) return std::nullopt;
    try {
      const auto cands = index_->retrieve(views_->gripper, views_->top);
      if (cands.empty()) return std::nullopt;
      const auto& c = cands.front();
      return Prediction{c.obj, skill_from_string(c.skill), c.score};
    } catch (const Error& e) {
      if (e.code() == ErrorCode::TerminalState || e.code() == ErrorCode::UnknownSkill) return std::nullopt;
      throw;
    }
  }

  std::optional<ParameterPrediction> predict_param(const SimulatedIntent& intent, const std::string& obj,
                                                   SkillKind skill) {
    const int dims = parameter_dims(skill);
    if (cfg_.learning.oracle_accuracy) {
      Vec3 p = intent.param;
      if (!oracle_hit()) p.x = p.x + 0.25 <= 1.0 ? p.x + 0.25 : p.x - 0.25;
      return ParameterPrediction{p, 1.0, {}};
    }
    if (!index_) return std::nullopt;
    const auto& states = demo_->states;
    int best = -1;
    for (std::size_t i = 0; i + 1 < states.size(); ++i) {
      const auto& nx = states[i + 1];
      if (nx.obj != obj || nx.skill != to_string(skill) || !nx.param) continue;
      if (dims == 3 && !states[i].side) continue;
      if (best < 0 || similarity_[i] > similarity_[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    if (best < 0) return std::nullopt;
    const auto backend = make_backend(cfg_.learning.backend);
    const FeatureMap top = backend->extract(views_->top);
    std::optional<FeatureMap> side;
    if (dims == 3) side = backend->extract(views_->side);
    try {
      return transfer_parameter(*index_, best, *states[static_cast<std::size_t>(best) + 1].param, top,
                                side ? &*side : nullptr, dims, calib_);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::LineOutOfFrame || e.code() == ErrorCode::OutOfBounds) return std::nullopt;
      throw;
    }
  }

  bool near(const Vec3& a, const Vec3& b, int dims) const {
    Vec3 e = a - b;
    if (dims < 3) e.z = 0.0;
    return e.norm() <= cfg_.learning.accept_radius;
  }

  // -- one plan step ---------------------------------------------------------

  std::optional<SkillCall> select(const SimulatedIntent& intent, bool& used_learning) {
    const bool learning = cfg_.learning_enabled() && (index_ || cfg_.learning.oracle_accuracy);
    Choice ch;
    bool obj_fallback = false, param_fallback = false;
    views_.reset();
    if (learning && index_) {
      views_ = render_views(world_, calib_);
      similarity_ = index_->similarities(views_->gripper, views_->top);
    }
    if (learning) {
      const auto pred = predict_object_skill(intent);
      if (pred && pred->score >= cfg_.learning.confidence) {
        const bool ok =
            confirm_stage(pred->obj == intent.object_id && pred->skill == intent.skill, "predict_object_skill");
        StageLog s;
        s.stage = "predict_object_skill";
        s.duration_s = cfg_.stage.emg_window_s;
        s.intended = pair_text(intent.object_id, intent.skill);
        s.decoded = pair_text(pred->obj, pred->skill);
        s.confirmed = ok;
        s.skipped_by_learning = ok;
        s.score = pred->score;
        log(s);
        if (ok) {
          ch.object = pred->obj;
          ch.skill = pred->skill;
          used_learning = true;
        }
      }
      obj_fallback = !ch.skill;
    }

    bool param_tried = false;
    for (int retries = 0; !ch.param; ) {
      if (retries > cfg_.max_stage_retries) return std::nullopt;
      if (!ch.object) {
        ch.object = select_object(intent, obj_fallback);
        if (!ch.object) ++retries;
        continue;
      }
      if (!ch.skill) {
        ch.skill = select_skill(intent, *ch.object, obj_fallback);
        if (!ch.skill) {
          ++retries;
          if (*ch.object != intent.object_id) ch.object.reset();
        }
        continue;
      }
      if (learning && !param_tried) {
        param_tried = true;
        const auto pred = predict_param(intent, *ch.object, *ch.skill);
        if (pred && pred->score >= cfg_.learning.confidence) {
          const int dims = parameter_dims(*ch.skill);
          Vec3 p = pred->param;
          if (dims < 3) p.z = intent.param.z;
          const bool ok = confirm_stage(near(p, intent.param, dims), "predict_param");
          StageLog s;
          s.stage = "predict_param";
          s.duration_s = cfg_.stage.emg_window_s;
          s.intended = point_text(intent.param);
          s.decoded = point_text(p);
          s.confirmed = ok;
          s.skipped_by_learning = ok;
          s.score = pred->score;
          log(s);
          if (ok) {
            ch.param = p;
            used_learning = true;
            continue;
          }
        }
        param_fallback = true;
      }
      ch.param = select_param(intent, param_fallback);
      if (!ch.param) ++retries;
    }
    return SkillCall{*ch.skill, *ch.object, *ch.param};
  }

  const ProtocolConfig& cfg_;
  const TaskDefinition& task_;
  const Decoders& dec_;
  const DemoSequence* demo_;
  CameraCalibration calib_;
  std::optional<DemoIndex> index_;
  std::optional<SceneViews> views_;
  std::vector<double> similarity_;
  SynthConfig ssvep_cfg_;
  SynthConfig mi_cfg_;
  Rng user_rng_;
  Rng oracle_rng_;
  std::uint64_t calls_ = 0;
  long long clock_human_ = 0, clock_exec_ = 0, clock_overhead_ = 0;
  int attempt_ = 1;
  int step_ = 0;
  WorldState world_;
  TrialReport rep_;
};

}  // namespace

Decoders calibrate_decoders(const ProtocolConfig& cfg) {
  cfg.validate();
  SsvepDecoder::Config sc;
  sc.notch_hz = cfg.stage.notch_hz;
  sc.window_s = cfg.stage.ssvep_s;
  const int mi_samples = static_cast<int>(std::lround(cfg.stage.mi_window_s * cfg.synth.fs));
  if (!cfg.calibration.empty()) {
    CalibrationModel m = read_calibration_file(cfg.resolve(cfg.calibration));
    if (!m.emg) fail(ErrorCode::CalibrationMissing, "calibration file has no [emg] section");
    if (m.mi.trial_samples() != mi_samples || m.mi.fs() != cfg.synth.fs) {
      fail(ErrorCode::ConfigInvalid, "calibration file was fitted for a different MI window or sampling rate");
    }
    const TensionThreshold th = *m.emg;
    return {std::move(m.mi), th, ArtifactConfig::from_threshold(th), SsvepDecoder(sc)};
  }
  const std::uint64_t base = cfg.synth.calibration_seed;
  Synth mi(cfg.synth_config(cfg.synth.mi_snr_db, derive_seed(base, hash_name("mi-calibration"))));
  const auto session = mi.mi_session(cfg.synth.calib_trials_per_class, cfg.stage.mi_window_s);
  MiDecoder dec = calibrate_mi(session, cfg.mi_config());
  const SynthConfig ec = cfg.synth_config(cfg.synth.mi_snr_db, derive_seed(base, hash_name("emg-calibration")));
  std::vector<EegSegment> rest, clench;
  const int n = cfg.synth.emg_calib_windows;
  for (int i = 0; i < n; ++i) {
    rest.push_back(gen_emg(false, ec, static_cast<std::uint64_t>(i), cfg.stage.emg_window_s));
    clench.push_back(gen_emg(true, ec, static_cast<std::uint64_t>(n + i), cfg.stage.emg_window_s));
  }
  const TensionThreshold th = calibrate_threshold(rest, clench, cfg.stage.emg_window_s);
  return {std::move(dec), th, ArtifactConfig::from_threshold(th), SsvepDecoder(sc)};
}

bool TrialReport::time_identity_holds() const {
  long long stage_ms = 0, skill_ms = 0;
  for (const auto& s : stages) stage_ms += to_ms(s.duration_s);
  for (const auto& s : skills) skill_ms += to_ms(s.duration_s);
  return to_ms(total_time_s) == to_ms(human_time_s) + to_ms(execution_time_s) + to_ms(overhead_time_s) &&
         stage_ms == to_ms(human_time_s) && skill_ms == to_ms(execution_time_s) && human_time_s <= total_time_s;
}

TrialReport run_trial(const ProtocolConfig& cfg, const TrialContext& ctx) {
  cfg.validate();
  std::optional<TaskDefinition> own_task;
  const TaskDefinition* task = ctx.task;
  if (!task) {
    own_task = read_task_file(cfg.task_path());
    if (cfg.jitter_xy) own_task->jitter_xy = *cfg.jitter_xy;
    task = &*own_task;
  }
  std::optional<Decoders> own_dec;
  const Decoders* dec = ctx.decoders;
  if (!dec) {
    own_dec = calibrate_decoders(cfg);
    dec = &*own_dec;
  }
  std::optional<DemoSequence> own_demo;
  const DemoSequence* demo = ctx.demo;
  if (!demo && cfg.learning_enabled() && !cfg.learning.demo.empty()) {
    own_demo = read_demo(cfg.resolve(cfg.learning.demo));
    demo = &*own_demo;
  }
  return TrialRunner(cfg, *task, *dec, cfg.learning_enabled() ? demo : nullptr).run(ctx.capture);
}

DemoSequence capture_demo(const ProtocolConfig& cfg, const TaskDefinition& task, const Decoders& decoders) {
  ProtocolConfig c = cfg;
  c.mode = ProtocolMode::Noir2Learning;
  c.seed = 0;
  c.learning.demo.clear();
  c.learning.oracle_accuracy.reset();
  DemoSequence captured;
  const TrialReport r = run_trial(c, {&task, &decoders, nullptr, &captured});
  if (!r.success || captured.states.size() < 2) {
    fail(ErrorCode::CalibrationMissing, "could not capture a demonstration for " + task.id);
  }
  return captured;
}

void write_report_jsonl(std::ostream& os, const TrialReport& r) {
  for (const auto& s : r.stages) {
    Json j;
    j["type"] = "stage";
    j["attempt"] = s.attempt;
    j["step"] = s.step;
    j["stage"] = s.stage;
    j["duration_s"] = s.duration_s;
    j["intended"] = s.intended;
    j["decoded"] = s.decoded;
    j["confirmed"] = s.confirmed;
    j["skipped_by_learning"] = s.skipped_by_learning;
    j["fallback"] = s.fallback;
    j["cursor_steps"] = s.cursor_steps;
    j["score"] = s.score;
    os << j.dump() << '\n';
  }
  for (const auto& e : r.emg) {
    Json j;
    j["type"] = "emg";
    j["attempt"] = e.attempt;
    j["step"] = e.step;
    j["stage"] = e.stage;
    j["clench"] = e.clench;
    j["blink"] = e.blink;
    j["tension"] = e.tension;
    j["artifact"] = e.artifact;
    j["confirmed"] = e.confirmed;
    os << j.dump() << '\n';
  }
  for (const auto& s : r.skills) {
    Json j;
    j["type"] = "skill";
    j["attempt"] = s.attempt;
    j["step"] = s.step;
    j["skill"] = std::string(to_string(s.call.skill));
    j["object"] = s.call.object;
    j["param"] = {s.call.param.x, s.call.param.y, s.call.param.z};
    j["success"] = s.success;
    j["reason"] = s.reason;
    j["duration_s"] = s.duration_s;
    os << j.dump() << '\n';
  }
  Json j;
  j["type"] = "summary";
  j["task_id"] = r.task_id;
  j["mode"] = std::string(to_string(r.mode));
  j["seed"] = r.seed;
  j["success"] = r.success;
  j["attempts"] = r.attempts;
  j["total_time_s"] = r.total_time_s;
  j["human_time_s"] = r.human_time_s;
  j["execution_time_s"] = r.execution_time_s;
  j["overhead_time_s"] = r.overhead_time_s;
  j["skill_count"] = r.skill_count;
  j["end_reason"] = r.end_reason;
  j["time_identity"] = r.time_identity_holds();
  os << j.dump() << '\n';
}

DemoSequence demo_from_plan(const TaskDefinition& task, std::uint64_t seed) {
  const CameraCalibration calib = CameraCalibration::standard();
  WorldState w = task.instantiate(seed);
  DemoSequence d;
  d.task_id = task.id;
  auto push = [&](const std::string& obj, const std::string& skill, std::optional<Vec3> p) {
    SceneViews v = render_views(w, calib);
    d.states.push_back({std::move(v.gripper), std::move(v.top), std::move(v.side), obj, skill, p});
  };
  push("scene", "Start", std::nullopt);
  for (const auto& step : task.plan) {
    const SkillCall call{step.skill, step.object, task.resolve(step, w)};
    auto [next, out] = execute_skill(w, call);
    if (!out.success) fail(ErrorCode::PlanExhausted, "scripted plan fails at " + pair_text(step.object, step.skill));
    w = std::move(next);
    push(step.object, std::string(to_string(step.skill)), call.param);
  }
  return d;
}

}  // namespace noir
