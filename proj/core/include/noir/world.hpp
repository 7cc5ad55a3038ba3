#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "noir/geometry.hpp"

namespace noir {

enum class SkillKind { MoveTo, Pick, Place, Push, Wipe, Pour, PullOpen };
inline constexpr std::array<SkillKind, 7> kAllSkills{SkillKind::MoveTo, SkillKind::Pick,  SkillKind::Place,
                                                     SkillKind::Push,   SkillKind::Wipe,  SkillKind::Pour,
                                                     SkillKind::PullOpen};

std::string_view to_string(SkillKind k);
SkillKind skill_from_string(std::string_view s);
/// Pour takes a full (x, y, z) point; every other skill is parameterised in
/// the table plane.
int parameter_dims(SkillKind k);

struct Pose {
  Vec3 p;
  double yaw = 0.0;  // radians
};

/// Gripper frame: position plus roll/pitch/yaw in radians.
struct Pose6 {
  Vec3 p;
  double roll = 0.0, pitch = 0.0, yaw = 0.0;
  bool operator==(const Pose6&) const = default;
};

struct SurfaceCell {
  double dx = 0.0, dy = 0.0;  // offset from the owning object's pose
  bool wet = true;
};

struct WorldObject {
  std::string id;
  Pose pose;                        // base centre
  Vec3 half_size{0.03, 0.03, 0.0};  // x/y half extents; z holds the full height
  std::set<std::string> flags;
  std::vector<SurfaceCell> cells;
  std::array<std::uint8_t, 3> color{128, 128, 128};
  std::vector<SkillKind> skills;  // offered when the object is selected

  double top() const { return pose.p.z + half_size.z; }
  bool has(const std::string& flag) const { return flags.count(flag) > 0; }
  bool covers(double x, double y) const;
};

struct Gripper {
  Pose6 pose;
  std::optional<std::string> held;
};

struct WorldState {
  std::vector<WorldObject> objects;  // declaration order
  Gripper gripper;
  double clock = 0.0;

  const WorldObject* find(std::string_view id) const;
  WorldObject* find(std::string_view id);
  const WorldObject& at(std::string_view id) const;  // UnknownObject
  std::vector<std::string> ids() const;
  /// Height an object dropped at (x, y) comes to rest at, ignoring `except`.
  double rest_height(double x, double y, const std::set<std::string>& except) const;
};

struct SkillDurations {
  std::map<SkillKind, double> seconds{{SkillKind::MoveTo, 5.0}, {SkillKind::Pick, 8.0},  {SkillKind::Place, 8.0},
                                      {SkillKind::Push, 8.0},   {SkillKind::Wipe, 12.0}, {SkillKind::Pour, 10.0},
                                      {SkillKind::PullOpen, 10.0}};
  double of(SkillKind k) const { return seconds.at(k); }
};

struct SkillCall {
  SkillKind skill = SkillKind::MoveTo;
  std::string object;  // the selected object
  Vec3 param;
};

struct SkillOutcome {
  bool success = false;
  std::string reason;  // empty on success
};

struct WorldConfig {
  double grasp_radius = 0.05;
  double wipe_width = 0.08;
  double pour_xy_tolerance = 0.05;
  double pour_min_clearance = 0.02;
  double pour_max_clearance = 0.30;
  SkillDurations durations{};
};

/// n waypoints, linear in position and shortest-path in each angle.
std::vector<Pose6> reaching_trajectory(const Pose6& current, const Pose6& target, int n);

/// Deterministic transition. Failures leave everything but the clock untouched.
std::pair<WorldState, SkillOutcome> execute_skill(const WorldState& world, const SkillCall& call,
                                                  const WorldConfig& cfg = {});

/// Atom: optionally negated predicate over declared objects. Predicates:
/// on(a,b), inside(a,b), held(a), and any status flag (wet, open, filled, ...).
struct GoalAtom {
  bool negated = false;
  std::string predicate;
  std::vector<std::string> args;
  bool operator==(const GoalAtom&) const = default;
};

struct GoalCondition {
  std::vector<GoalAtom> atoms;  // conjunction
};

GoalAtom parse_atom(std::string_view text);
std::string to_string(const GoalAtom& atom);
bool eval_atom(const WorldState& world, const GoalAtom& atom);
bool check_goal(const WorldState& world, const GoalCondition& goal);

/// Plan step: the parameter is resolved at run time as the anchor object's
/// pose plus a fixed offset, so jittered layouts keep a valid plan.
struct PlanStep {
  std::string object;
  SkillKind skill = SkillKind::MoveTo;
  std::string anchor;
  Vec3 offset;
};

struct TaskDefinition {
  std::string id;
  std::string description;
  WorldState initial;
  std::vector<SkillKind> skills;  // available in this task
  std::vector<PlanStep> plan;
  GoalCondition goal;
  double jitter_xy = 0.0;

  /// Initial state with every movable object shifted by a seeded offset in
  /// [-jitter_xy, jitter_xy]^2 (seed 0 keeps the nominal layout).
  WorldState instantiate(std::uint64_t seed) const;
  Vec3 resolve(const PlanStep& step, const WorldState& world) const;
  /// Index of the plan step selecting `skill` on `object`, if the object
  /// offers the skill.
  int skill_slot(std::string_view object, SkillKind skill) const;
  void validate() const;
};

/// "noir-task v1" sectioned text.
TaskDefinition read_task(std::istream& is);
TaskDefinition read_task_file(const std::string& path);
void write_task(std::ostream& os, const TaskDefinition& task);

}  // namespace noir
