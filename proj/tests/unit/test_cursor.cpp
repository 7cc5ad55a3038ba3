#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "noir/cursor.hpp"

using namespace noir;
using namespace noir::testing;

namespace {

ControlPolicy policy(PolicyKind k) {
  ControlPolicy p;
  p.kind = k;
  return p;
}

Vec3 random_target(Rng& rng) { return {0.1 + 0.8 * uniform01(rng), 0.1 + 0.8 * uniform01(rng), 0.1 + 0.8 * uniform01(rng)}; }

struct Summary {
  double mean_decodes = 0.0;
  double success = 0.0;
};

Summary summarize(PolicyKind k, double accuracy, int n, std::uint64_t seed) {
  Rng rng = make_rng(seed, "targets");
  Summary s;
  for (int i = 0; i < n; ++i) {
    const Vec3 t = random_target(rng);
    const SelectionResult r = run_parameter_selection(t, stochastic_channel(accuracy, derive_seed(seed, i)), policy(k),
                                                      perfect_confirm());
    s.mean_decodes += r.decode_windows;
    s.success += r.outcome == SelectionOutcome::Confirmed ? 1.0 : 0.0;
  }
  s.mean_decodes /= n;
  s.success /= n;
  return s;
}

}  // namespace

TEST(StepCursor, ContinuousXyMapping) {
  const ControlPolicy p = policy(PolicyKind::Continuous4Way);
  const CursorState s = CursorState::start();
  EXPECT_NEAR(step_cursor(s, MiClass::LeftHand, p).pos.x, 0.45, 1e-12);
  EXPECT_NEAR(step_cursor(s, MiClass::RightHand, p).pos.x, 0.55, 1e-12);
  EXPECT_NEAR(step_cursor(s, MiClass::Legs, p).pos.y, 0.45, 1e-12);
  EXPECT_NEAR(step_cursor(s, MiClass::Rest, p).pos.y, 0.55, 1e-12);
  for (MiClass c : kAllMiClasses) EXPECT_EQ(step_cursor(s, c, p).pos.z, 0.5);
  const CursorState n = step_cursor(s, MiClass::RightHand, p);
  EXPECT_EQ(n.step_count, 1);
  EXPECT_DOUBLE_EQ(n.clock, 3.0);
  ASSERT_EQ(n.trace.size(), 2u);
  EXPECT_EQ(n.trace.back().cls, MiClass::RightHand);
  EXPECT_FALSE(n.trace.front().cls.has_value());
}

TEST(StepCursor, ContinuousZMapping) {
  const ControlPolicy p = policy(PolicyKind::Continuous4Way);
  CursorState s = CursorState::start();
  s.mode = CursorMode::Z;
  EXPECT_NEAR(step_cursor(s, MiClass::Legs, p).pos.z, 0.45, 1e-12);
  EXPECT_NEAR(step_cursor(s, MiClass::Rest, p).pos.z, 0.55, 1e-12);
  EXPECT_EQ(step_cursor(s, MiClass::LeftHand, p).pos, s.pos);
  EXPECT_EQ(step_cursor(s, MiClass::RightHand, p).pos, s.pos);
}

TEST(StepCursor, BinaryMovesActiveAxis) {
  const ControlPolicy p = policy(PolicyKind::BinarySequential);
  CursorState s = CursorState::start();
  s.axis = 1;
  EXPECT_NEAR(step_cursor(s, MiClass::RightHand, p).pos.y, 0.55, 1e-12);
  EXPECT_NEAR(step_cursor(s, MiClass::LeftHand, p).pos.y, 0.45, 1e-12);
  EXPECT_EQ(step_cursor(s, MiClass::Legs, p).pos, s.pos);
  s.axis = 2;
  EXPECT_NEAR(step_cursor(s, MiClass::RightHand, p).pos.z, 0.55, 1e-12);
}

TEST(StepCursor, ClampsToWorkspace) {
  const ControlPolicy p = policy(PolicyKind::Continuous4Way);
  CursorState s = CursorState::start(0.0, {0.98, 0.01, 0.5});
  const CursorState a = step_cursor(s, MiClass::RightHand, p);
  EXPECT_EQ(a.pos.x, 1.0);
  const CursorState b = step_cursor(a, MiClass::Legs, p);
  EXPECT_EQ(b.pos.y, 0.0);
  Rng rng = make_rng(3);
  CursorState w = CursorState::start();
  for (int i = 0; i < 500; ++i) {
    w = step_cursor(w, static_cast<MiClass>(uniform_index(rng, 4)), p);
    EXPECT_TRUE(in_unit_cube(w.pos));
  }
}

TEST(StepCursor, RejectsFinishedSelections) {
  const ControlPolicy p = policy(PolicyKind::Continuous4Way);
  CursorState s = CursorState::start();
  s.mode = CursorMode::Confirmed;
  EXPECT_NOIR_ERROR(step_cursor(s, MiClass::Legs, p), ErrorCode::InvalidMode);
  s.mode = CursorMode::Rejected;
  EXPECT_NOIR_ERROR(step_cursor(s, MiClass::Legs, p), ErrorCode::InvalidMode);
}

TEST(IntendedClass, LargestErrorWins) {
  EXPECT_EQ(intended_class({0.5, 0.5, 0.5}, {0.7, 0.6, 0.5}, CursorMode::XY), MiClass::RightHand);
  EXPECT_EQ(intended_class({0.5, 0.5, 0.5}, {0.4, 0.1, 0.5}, CursorMode::XY), MiClass::Legs);
  EXPECT_EQ(intended_class({0.5, 0.5, 0.5}, {0.5, 0.9, 0.5}, CursorMode::XY), MiClass::Rest);
  EXPECT_EQ(intended_class({0.5, 0.5, 0.5}, {0.3, 0.7, 0.5}, CursorMode::XY), MiClass::LeftHand);
  EXPECT_EQ(intended_class({0.5, 0.5, 0.5}, {0.9, 0.9, 0.2}, CursorMode::Z), MiClass::Legs);
}

TEST(ParameterSelection, WorkedExample) {
  const SelectionResult r = run_parameter_selection({0.7, 0.3, 0.5}, stochastic_channel(1.0, 0),
                                                    policy(PolicyKind::Continuous4Way), perfect_confirm());
  EXPECT_EQ(r.outcome, SelectionOutcome::Confirmed);
  EXPECT_EQ(r.step_count, 8);
  EXPECT_EQ(r.confirm_windows, 2);
  EXPECT_NEAR(r.pos.x, 0.7, 1e-9);
  EXPECT_NEAR(r.pos.y, 0.3, 1e-9);
  EXPECT_EQ(r.trace[1].cls, MiClass::RightHand);
}

TEST(ParameterSelection, PerfectChannelMatchesMoveCount) {
  Rng rng = make_rng(17);
  for (int i = 0; i < 200; ++i) {
    const Vec3 t = random_target(rng);
    int moves = 0, unsettled = 0;
    for (int a = 0; a < 3; ++a) {
      const int n = oracle::axis_moves(t[a] - 0.5, 0.05);
      moves += n;
      unsettled += n > 0 ? 1 : 0;
    }
    const SelectionResult c = run_parameter_selection(t, stochastic_channel(1.0, i), policy(PolicyKind::Continuous4Way),
                                                      perfect_confirm());
    const SelectionResult b = run_parameter_selection(t, stochastic_channel(1.0, i), policy(PolicyKind::BinarySequential),
                                                      perfect_confirm());
    EXPECT_EQ(c.outcome, SelectionOutcome::Confirmed);
    EXPECT_EQ(b.outcome, SelectionOutcome::Confirmed);
    EXPECT_EQ(c.step_count, moves);
    EXPECT_EQ(c.decode_windows, moves);
    EXPECT_EQ(b.step_count, moves);
    EXPECT_EQ(b.decode_windows, moves + unsettled);
    EXPECT_LE((c.pos - t).norm(), 0.06);
  }
}

TEST(ParameterSelection, OutOfBoundsTarget) {
  EXPECT_NOIR_ERROR(run_parameter_selection({1.2, 0.5, 0.5}, stochastic_channel(1.0, 0),
                                            policy(PolicyKind::Continuous4Way), perfect_confirm()),
                    ErrorCode::OutOfBounds);
}

TEST(ParameterSelection, ContinuousNeedsFewerDecodes) {
  const Summary c = summarize(PolicyKind::Continuous4Way, 0.9, 100, 5);
  const Summary b = summarize(PolicyKind::BinarySequential, 0.9, 100, 5);
  EXPECT_LE(c.mean_decodes, b.mean_decodes);
}

TEST(ParameterSelection, ChanceDecodingTimesOut) {
  Rng rng = make_rng(6, "targets");
  int timeouts = 0;
  for (int i = 0; i < 100; ++i) {
    const SelectionResult r = run_parameter_selection(random_target(rng), stochastic_channel(0.25, i),
                                                      policy(PolicyKind::Continuous4Way), perfect_confirm());
    EXPECT_LE(r.step_count, 200);
    timeouts += r.outcome == SelectionOutcome::Timeout ? 1 : 0;
  }
  EXPECT_GT(timeouts, 50);
}

TEST(ParameterSelection, MonotoneInAccuracy) {
  for (PolicyKind k : {PolicyKind::Continuous4Way, PolicyKind::BinarySequential}) {
    Summary prev{1e9, 1.0};
    double prev_success = -1.0;
    for (double acc : {0.5, 0.7, 0.9, 1.0}) {
      // binary selections abort through restarts at low accuracy, so compare decodes per confirmed selection
      const Summary s = summarize(k, acc, 200, 11);
      EXPECT_LE(s.mean_decodes / s.success, prev.mean_decodes / prev.success) << to_string(k) << " " << acc;
      EXPECT_GE(s.success, prev_success - 0.02) << to_string(k) << " " << acc;
      prev = s;
      prev_success = s.success;
    }
    EXPECT_EQ(prev.success, 1.0);
  }
}

TEST(ParameterSelection, DepthWaitsForPlanarConfirm) {
  Rng rng = make_rng(19);
  for (int i = 0; i < 50; ++i) {
    const Vec3 t = random_target(rng);
    for (PolicyKind k : {PolicyKind::Continuous4Way, PolicyKind::BinarySequential}) {
      const SelectionResult r = run_parameter_selection(t, stochastic_channel(0.8, i), policy(k), perfect_confirm());
      double z = 0.5;
      for (const TracePoint& p : r.trace) {
        if (p.mode == CursorMode::XY) {
          EXPECT_EQ(p.pos.z, z);
        }
        if (!p.cls) z = p.pos.z;  // restart point
      }
    }
  }
}

TEST(ParameterSelection, PlanarOnlyKeepsDepth) {
  const SelectionResult r = run_parameter_selection({0.2, 0.8, 0.9}, stochastic_channel(0.9, 2),
                                                    policy(PolicyKind::Continuous4Way), perfect_confirm(), false);
  EXPECT_EQ(r.outcome, SelectionOutcome::Confirmed);
  EXPECT_EQ(r.pos.z, 0.5);
}

TEST(ParameterSelection, TraceCsv) {
  const SelectionResult r = run_parameter_selection({0.7, 0.3, 0.5}, stochastic_channel(1.0, 0),
                                                    policy(PolicyKind::Continuous4Way), perfect_confirm());
  std::stringstream ss;
  write_trace_csv(ss, r.trace);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "time_s,x,y,z,mode,class");
  std::size_t rows = 0;
  while (std::getline(ss, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
  }
  EXPECT_EQ(rows, r.trace.size());
  EXPECT_EQ(rows, 9u);
}

TEST(ParameterSelection, Deterministic) {
  for (PolicyKind k : {PolicyKind::Continuous4Way, PolicyKind::BinarySequential}) {
    const SelectionResult a = run_parameter_selection({0.3, 0.8, 0.2}, stochastic_channel(0.7, 42), policy(k), perfect_confirm());
    const SelectionResult b = run_parameter_selection({0.3, 0.8, 0.2}, stochastic_channel(0.7, 42), policy(k), perfect_confirm());
    std::stringstream sa, sb;
    write_trace_csv(sa, a.trace);
    write_trace_csv(sb, b.trace);
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_EQ(a.decode_windows, b.decode_windows);
  }
}

TEST(Policy, Names) {
  EXPECT_EQ(policy_kind_from_string("continuous"), PolicyKind::Continuous4Way);
  EXPECT_EQ(policy_kind_from_string("BinarySequential"), PolicyKind::BinarySequential);
  EXPECT_NOIR_ERROR(policy_kind_from_string("diagonal"), ErrorCode::ParseError);
}
