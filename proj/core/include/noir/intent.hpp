#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "noir/geometry.hpp"
#include "noir/world.hpp"

namespace noir {

enum class IntentStage { SelectObject, SelectSkill, SelectParam, Confirm };
std::string_view to_string(IntentStage s);

/// What the simulated user wants next. `terminal` marks a satisfied goal.
struct SimulatedIntent {
  std::string object_id;
  SkillKind skill = SkillKind::MoveTo;
  Vec3 param;
  IntentStage stage = IntentStage::SelectObject;
  bool terminal = false;
  bool operator==(const SimulatedIntent&) const = default;
};

/// Step `step` of the scripted plan resolved against `world`; terminal once
/// the goal holds. PlanExhausted past the plan's end with the goal unmet.
SimulatedIntent next_intent(const WorldState& world, const TaskDefinition& task, std::size_t step);

/// Plan cursor over next_intent. Asking again after a terminal answer is a
/// PlanExhausted error.
class SimulatedUser {
 public:
  explicit SimulatedUser(const TaskDefinition& task) : task_(&task) {}

  SimulatedIntent next(const WorldState& world);
  void advance() { ++step_; }
  void reset() { step_ = 0, done_ = false; }
  std::size_t step() const { return step_; }

 private:
  const TaskDefinition* task_;
  std::size_t step_ = 0;
  bool done_ = false;
};

}  // namespace noir
