#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "noir/geometry.hpp"
#include "noir/mi.hpp"
#include "noir/rng.hpp"

namespace noir {

enum class CursorMode { XY, Z, Confirmed, Rejected };
enum class PolicyKind { BinarySequential, Continuous4Way };

std::string_view to_string(CursorMode m);
std::string_view to_string(PolicyKind k);
PolicyKind policy_kind_from_string(std::string_view s);

struct ControlPolicy {
  PolicyKind kind = PolicyKind::Continuous4Way;
  double step_size = 0.05;
  double decode_period = 3.0;
  double confirm_window = 0.5;
  double success_radius = 0.06;
  int max_steps = 200;
  int max_restarts = 3;
};

struct TracePoint {
  double time_s = 0.0;
  Vec3 pos;
  CursorMode mode = CursorMode::XY;
  std::optional<MiClass> cls;  // empty for the starting point
};

struct CursorState {
  Vec3 pos{0.5, 0.5, 0.5};
  CursorMode mode = CursorMode::XY;
  int axis = 0;  // active axis under BinarySequential
  double clock = 0.0;
  std::vector<TracePoint> trace;
  int step_count = 0;

  /// Workspace centre with a single trace point at t0.
  static CursorState start(double t0 = 0.0, Vec3 pos = {0.5, 0.5, 0.5});
};

/// Continuous4Way: XY mode maps LeftHand/RightHand to -x/+x and Legs/Rest to
/// -y/+y; Z mode maps Legs/Rest to -z/+z and ignores the hands.
/// BinarySequential moves the active axis, LeftHand negative and RightHand
/// positive. One step costs one decode period.
CursorState step_cursor(const CursorState& state, MiClass cls, const ControlPolicy& policy);

/// Class the simulated user imagines: the one reducing the largest remaining
/// error among the axes active in `mode` (ties go to x, then y).
MiClass intended_class(const Vec3& pos, const Vec3& target, CursorMode mode);

/// Decoder channel: given the intended class and the number of classes in
/// play (4 or 2), returns the decoded class.
using ClassChannel = std::function<MiClass(MiClass intended, int k_way)>;
/// EMG channel: given whether the user is clenching, returns whether a clench
/// was detected.
using ConfirmSource = std::function<bool(bool clench)>;

/// Correct class with probability `accuracy`, otherwise uniform over the rest
/// of the k classes.
ClassChannel stochastic_channel(double accuracy, std::uint64_t seed);
ConfirmSource perfect_confirm();

enum class SelectionOutcome { Confirmed, Rejected, Timeout };
std::string_view to_string(SelectionOutcome o);

struct SelectionResult {
  Vec3 pos;
  int step_count = 0;      // cursor moves, over all restarts
  int decode_windows = 0;  // MI windows: one per move plus binary direction choices
  int confirm_windows = 0; // EMG confirm/stop windows
  int restarts = 0;
  SelectionOutcome outcome = SelectionOutcome::Timeout;
  std::vector<TracePoint> trace;
};

/// Runs the simulated user against the decoder channel until a confirmed
/// selection inside the success radius, a timeout, or too many restarts.
/// With `use_z` false the z coordinate is neither moved nor checked.
SelectionResult run_parameter_selection(const Vec3& target, const ClassChannel& channel, const ControlPolicy& policy,
                                        const ConfirmSource& confirm, bool use_z = true, double t0 = 0.0);

/// CSV `time_s,x,y,z,mode,class`.
void write_trace_csv(std::ostream& os, const std::vector<TracePoint>& trace);

}  // namespace noir
