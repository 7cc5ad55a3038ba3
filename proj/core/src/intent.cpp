#include "noir/intent.hpp"

#include "noir/error.hpp"

namespace noir {

std::string_view to_string(IntentStage s) {
  switch (s) {
    case IntentStage::SelectObject: return "SelectObject";
    case IntentStage::SelectSkill: return "SelectSkill";
    case IntentStage::SelectParam: return "SelectParam";
    case IntentStage::Confirm: return "Confirm";
  }
  return "?";
}

SimulatedIntent next_intent(const WorldState& world, const TaskDefinition& task, std::size_t step) {
  SimulatedIntent out;
  if (check_goal(world, task.goal)) {
    out.terminal = true;
    return out;
  }
  if (step >= task.plan.size()) fail(ErrorCode::PlanExhausted, "plan finished without reaching the goal");
  const PlanStep& s = task.plan[step];
  out.object_id = s.object;
  out.skill = s.skill;
  out.param = task.resolve(s, world);
  return out;
}

SimulatedIntent SimulatedUser::next(const WorldState& world) {
  if (done_) fail(ErrorCode::PlanExhausted, "intent requested after the task ended");
  SimulatedIntent i = next_intent(world, *task_, step_);
  done_ = i.terminal;
  return i;
}

}  // namespace noir
