#include "noir/cursor.hpp"

#include <cmath>
#include <memory>
#include <ostream>
#include <string>

#include "noir/eeg_io.hpp"

namespace noir {

std::string_view to_string(CursorMode m) {
  switch (m) {
    case CursorMode::XY: return "XY";
    case CursorMode::Z: return "Z";
    case CursorMode::Confirmed: return "Confirmed";
    case CursorMode::Rejected: return "Rejected";
  }
  return "XY";
}

std::string_view to_string(PolicyKind k) {
  return k == PolicyKind::BinarySequential ? "BinarySequential" : "Continuous4Way";
}

PolicyKind policy_kind_from_string(std::string_view s) {
  if (s == "BinarySequential" || s == "binary") return PolicyKind::BinarySequential;
  if (s == "Continuous4Way" || s == "continuous") return PolicyKind::Continuous4Way;
  fail(ErrorCode::ParseError, "unknown cursor policy '" + std::string(s) + "'");
}

std::string_view to_string(SelectionOutcome o) {
  switch (o) {
    case SelectionOutcome::Confirmed: return "Confirmed";
    case SelectionOutcome::Rejected: return "Rejected";
    case SelectionOutcome::Timeout: return "Timeout";
  }
  return "Timeout";
}

CursorState CursorState::start(double t0, Vec3 pos) {
  CursorState s;
  s.pos = pos;
  s.clock = t0;
  s.trace.push_back({t0, pos, CursorMode::XY, std::nullopt});
  return s;
}

CursorState step_cursor(const CursorState& state, MiClass cls, const ControlPolicy& policy) {
  if (state.mode != CursorMode::XY && state.mode != CursorMode::Z) {
    fail(ErrorCode::InvalidMode, "cursor already " + std::string(to_string(state.mode)));
  }
  if (!(policy.step_size > 0.0) || !(policy.decode_period > 0.0)) {
    fail(ErrorCode::InvalidArgument, "step size and decode period must be positive");
  }
  CursorState next = state;
  const double s = policy.step_size;
  Vec3 d;
  if (policy.kind == PolicyKind::BinarySequential) {
    if (cls == MiClass::LeftHand) d[state.axis] = -s;
    if (cls == MiClass::RightHand) d[state.axis] = s;
  } else if (state.mode == CursorMode::XY) {
    switch (cls) {
      case MiClass::LeftHand: d.x = -s; break;
      case MiClass::RightHand: d.x = s; break;
      case MiClass::Legs: d.y = -s; break;
      case MiClass::Rest: d.y = s; break;
    }
  } else {
    if (cls == MiClass::Legs) d.z = -s;
    if (cls == MiClass::Rest) d.z = s;
  }
  next.pos = clamp_unit(state.pos + d);
  next.clock += policy.decode_period;
  next.trace.push_back({next.clock, next.pos, next.mode, cls});
  ++next.step_count;
  return next;
}

MiClass intended_class(const Vec3& pos, const Vec3& target, CursorMode mode) {
  const Vec3 e = target - pos;
  if (mode == CursorMode::Z) return e.z < 0.0 ? MiClass::Legs : MiClass::Rest;
  // near-ties go to x
  if (std::abs(e.x) + 1e-9 >= std::abs(e.y)) return e.x < 0.0 ? MiClass::LeftHand : MiClass::RightHand;
  return e.y < 0.0 ? MiClass::Legs : MiClass::Rest;
}

ClassChannel stochastic_channel(double accuracy, std::uint64_t seed) {
  auto rng = std::make_shared<Rng>(make_rng(seed, "class-channel"));
  return [rng, accuracy](MiClass intended, int k_way) {
    if (uniform01(*rng) < accuracy) return intended;
    const int k = std::clamp(k_way, 2, kMiClasses);
    int other = static_cast<int>(uniform_index(*rng, static_cast<std::uint64_t>(k - 1)));
    if (other >= ordinal(intended)) ++other;
    return static_cast<MiClass>(other);
  };
}

ConfirmSource perfect_confirm() {
  return [](bool clench) { return clench; };
}

namespace {

struct Runner {
  const Vec3& target;
  const ClassChannel& channel;
  const ControlPolicy& policy;
  const ConfirmSource& confirm;
  bool use_z;
  SelectionResult result;
  CursorState state;
  int missed = 0;  // confirm attempts the detector did not register

  bool out_of_steps() const { return result.step_count + missed >= policy.max_steps; }

  void step(MiClass cls) {
    state = step_cursor(state, cls, policy);
    ++result.step_count;
    ++result.decode_windows;
  }

  // Polls the EMG channel; returns whether a clench was detected.
  bool poll(bool clench) {
    const bool detected = confirm(clench);
    if (clench || detected) {
      ++result.confirm_windows;
      state.clock += policy.confirm_window;
    }
    return detected;
  }

  bool settled(int axis) const { return std::abs(target[axis] - state.pos[axis]) <= 0.5 * policy.step_size; }

  // Closed-loop phase over the axes of `mode`; false on timeout.
  bool continuous_phase(CursorMode mode) {
    state.mode = mode;
    for (;;) {
      const bool want = mode == CursorMode::Z ? settled(2) : settled(0) && settled(1);
      if (poll(want)) return true;
      if (out_of_steps()) return false;
      if (want) {
        ++missed;
        continue;
      }
      step(channel(intended_class(state.pos, target, mode), kMiClasses));
    }
  }

  // 0 = stopped on target, 1 = stopped off target, 2 = timeout.
  int binary_axis(int axis) {
    state.axis = axis;
    state.mode = axis == 2 ? CursorMode::Z : CursorMode::XY;
    if (settled(axis)) {
      while (!poll(true)) {
        if (out_of_steps()) return 2;
        ++missed;
      }
      return 0;
    }
    const MiClass want_dir = target[axis] > state.pos[axis] ? MiClass::RightHand : MiClass::LeftHand;
    MiClass dir = channel(want_dir, 2);
    if (dir != MiClass::RightHand) dir = MiClass::LeftHand;
    ++result.decode_windows;
    state.clock += policy.decode_period;
    double last_err = std::abs(target[axis] - state.pos[axis]);
    for (;;) {
      if (out_of_steps()) return 2;
      step(dir);
      const double err = std::abs(target[axis] - state.pos[axis]);
      const bool stop = settled(axis) || err >= last_err;
      last_err = err;
      if (poll(stop)) return settled(axis) ? 0 : 1;
    }
  }

  bool on_target() const {
    Vec3 e = target - state.pos;
    if (!use_z) e.z = 0.0;
    return e.norm() <= policy.success_radius;
  }

  void restart() {
    result.trace.insert(result.trace.end(), state.trace.begin(), state.trace.end());
    state = CursorState::start(state.clock);
  }
};

}  // namespace

SelectionResult run_parameter_selection(const Vec3& target, const ClassChannel& channel, const ControlPolicy& policy,
                                        const ConfirmSource& confirm, bool use_z, double t0) {
  if (!in_unit_cube(target)) fail(ErrorCode::OutOfBounds, "cursor target outside the workspace");
  Runner r{target, channel, policy, confirm, use_z, {}, CursorState::start(t0)};
  for (;;) {
    bool timed_out = false, off_target = false;
    if (policy.kind == PolicyKind::Continuous4Way) {
      timed_out = !r.continuous_phase(CursorMode::XY);
      if (!timed_out && use_z) timed_out = !r.continuous_phase(CursorMode::Z);
    } else {
      for (int axis = 0; axis < (use_z ? 3 : 2) && !timed_out && !off_target; ++axis) {
        const int k = r.binary_axis(axis);
        timed_out = k == 2;
        off_target = k == 1;
      }
    }
    if (timed_out) {
      r.result.outcome = SelectionOutcome::Timeout;
      break;
    }
    if (!off_target && r.on_target()) {
      r.state.mode = CursorMode::Confirmed;
      r.result.outcome = SelectionOutcome::Confirmed;
      break;
    }
    if (r.result.restarts >= policy.max_restarts) {
      r.state.mode = CursorMode::Rejected;
      r.result.outcome = SelectionOutcome::Rejected;
      break;
    }
    ++r.result.restarts;
    r.restart();
  }
  r.result.pos = r.state.pos;
  r.result.trace.insert(r.result.trace.end(), r.state.trace.begin(), r.state.trace.end());
  return r.result;
}

void write_trace_csv(std::ostream& os, const std::vector<TracePoint>& trace) {
  os << "time_s,x,y,z,mode,class\n";
  for (const auto& p : trace) {
    os << format_value(p.time_s) << ',' << format_value(p.pos.x) << ',' << format_value(p.pos.y) << ','
       << format_value(p.pos.z) << ',' << to_string(p.mode) << ',' << (p.cls ? to_string(*p.cls) : "") << '\n';
  }
}

}  // namespace noir
