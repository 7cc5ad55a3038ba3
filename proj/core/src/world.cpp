#include "noir/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "noir/error.hpp"
#include "noir/rng.hpp"
#include "noir/text.hpp"

namespace noir {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kRestTolerance = 0.005;
constexpr double kInsideFloor = 0.01;

double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  return a <= -kPi ? a + 2.0 * kPi : a;
}

double lerp_angle(double a, double b, double t) { return wrap_angle(a + t * std::remainder(b - a, 2.0 * kPi)); }

double dist_xy(const Vec3& a, const Vec3& b) { return (a - b).norm_xy(); }

double point_segment_distance(double px, double py, const Vec3& a, const Vec3& b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((px - a.x) * vx + (py - a.y) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (a.x + t * vx), py - (a.y + t * vy));
}

bool pose_in_bounds(const Pose6& p) {
  return in_unit_cube(p.p) && std::isfinite(p.roll) && std::isfinite(p.pitch) && std::isfinite(p.yaw);
}

void sync_held(WorldState& w) {
  if (!w.gripper.held) return;
  WorldObject& o = *w.find(*w.gripper.held);
  o.pose.p = w.gripper.pose.p;
  o.pose.yaw = w.gripper.pose.yaw;
}

SkillOutcome failure(std::string reason) { return {false, std::move(reason)}; }

bool any_wet_cell(const WorldObject& o) {
  for (const auto& c : o.cells) {
    if (c.wet) return true;
  }
  return false;
}

// Objects resting on or inside `base` (not held).
std::vector<std::string> carried_by(const WorldState& w, const WorldObject& base) {
  std::vector<std::string> out;
  for (const auto& o : w.objects) {
    if (o.id == base.id || (w.gripper.held && *w.gripper.held == o.id)) continue;
    if (base.covers(o.pose.p.x, o.pose.p.y) && o.pose.p.z >= base.pose.p.z + 1e-9 &&
        o.pose.p.z <= base.top() + kRestTolerance) {
      out.push_back(o.id);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(SkillKind k) {
  switch (k) {
    case SkillKind::MoveTo: return "MoveTo";
    case SkillKind::Pick: return "Pick";
    case SkillKind::Place: return "Place";
    case SkillKind::Push: return "Push";
    case SkillKind::Wipe: return "Wipe";
    case SkillKind::Pour: return "Pour";
    case SkillKind::PullOpen: return "PullOpen";
  }
  return "MoveTo";
}

SkillKind skill_from_string(std::string_view s) {
  for (SkillKind k : kAllSkills) {
    if (to_string(k) == s) return k;
  }
  fail(ErrorCode::UnknownSkill, "unknown skill '" + std::string(s) + "'");
}

int parameter_dims(SkillKind k) { return k == SkillKind::Pour ? 3 : 2; }

bool WorldObject::covers(double x, double y) const {
  return std::abs(x - pose.p.x) <= half_size.x && std::abs(y - pose.p.y) <= half_size.y;
}

const WorldObject* WorldState::find(std::string_view id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

WorldObject* WorldState::find(std::string_view id) {
  for (auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

const WorldObject& WorldState::at(std::string_view id) const {
  const WorldObject* o = find(id);
  if (!o) fail(ErrorCode::UnknownObject, "no object '" + std::string(id) + "'");
  return *o;
}

std::vector<std::string> WorldState::ids() const {
  std::vector<std::string> out;
  for (const auto& o : objects) out.push_back(o.id);
  return out;
}

double WorldState::rest_height(double x, double y, const std::set<std::string>& except) const {
  double h = 0.0;
  for (const auto& o : objects) {
    if (except.count(o.id) || (gripper.held && *gripper.held == o.id) || o.has("surface")) continue;
    if (!o.covers(x, y)) continue;
    const double z = o.has("container") && o.has("open") ? o.pose.p.z + kInsideFloor : o.top();
    h = std::max(h, z);
  }
  return h;
}

std::vector<Pose6> reaching_trajectory(const Pose6& current, const Pose6& target, int n) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "trajectory needs at least two waypoints");
  if (!pose_in_bounds(current) || !pose_in_bounds(target)) fail(ErrorCode::OutOfBounds, "pose outside workspace");
  std::vector<Pose6> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      out.push_back(current);
      continue;
    }
    if (i == n - 1) {
      out.push_back(target);
      continue;
    }
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    Pose6 p;
    p.p = current.p + (target.p - current.p) * t;
    p.roll = lerp_angle(current.roll, target.roll, t);
    p.pitch = lerp_angle(current.pitch, target.pitch, t);
    p.yaw = lerp_angle(current.yaw, target.yaw, t);
    out.push_back(p);
  }
  return out;
}

std::pair<WorldState, SkillOutcome> execute_skill(const WorldState& world, const SkillCall& call,
                                                  const WorldConfig& cfg) {
  const WorldObject& target = world.at(call.object);
  if (std::find(target.skills.begin(), target.skills.end(), call.skill) == target.skills.end()) {
    fail(ErrorCode::UnknownSkill,
         std::string(to_string(call.skill)) + " is not offered by '" + call.object + "'");
  }
  if (!in_unit_cube(call.param)) fail(ErrorCode::OutOfBounds, "skill parameter outside workspace");

  WorldState failed = world;
  failed.clock += cfg.durations.of(call.skill);
  WorldState w = failed;
  const std::optional<std::string> held = world.gripper.held;
  const WorldObject* held_obj = held ? world.find(*held) : nullptr;

  switch (call.skill) {
    case SkillKind::MoveTo:
      w.gripper.pose.p = call.param;
      break;

    case SkillKind::Pick:
      if (held) return {failed, failure("gripper occupied")};
      if (!target.has("graspable")) return {failed, failure("not graspable")};
      if (dist_xy(call.param, target.pose.p) > cfg.grasp_radius) return {failed, failure("out of reach")};
      w.gripper.pose.p = target.pose.p;
      w.gripper.held = target.id;
      break;

    case SkillKind::Place: {
      if (!held) return {failed, failure("nothing held")};
      if (*held == target.id) return {failed, failure("cannot place an object on itself")};
      w.gripper.held.reset();
      const Vec3 spot{call.param.x, call.param.y, w.rest_height(call.param.x, call.param.y, {*held})};
      w.find(*held)->pose.p = spot;
      w.gripper.pose.p = spot;
      break;
    }

    case SkillKind::Push: {
      if (held) return {failed, failure("gripper occupied")};
      if (!target.has("pushable")) return {failed, failure("not pushable")};
      const auto carried = carried_by(world, target);
      std::set<std::string> skip(carried.begin(), carried.end());
      skip.insert(target.id);
      const double z = world.rest_height(call.param.x, call.param.y, skip);
      const Vec3 delta = Vec3{call.param.x, call.param.y, z} - target.pose.p;
      w.find(target.id)->pose.p = target.pose.p + delta;
      for (const auto& id : carried) w.find(id)->pose.p = w.find(id)->pose.p + delta;
      w.gripper.pose.p = w.find(target.id)->pose.p;
      break;
    }

    case SkillKind::Wipe: {
      if (!held) return {failed, failure("nothing held")};
      if (!held_obj->has("absorbent")) return {failed, failure("held object cannot wipe")};
      if (target.cells.empty()) return {failed, failure("nothing to wipe")};
      const Vec3 from = world.gripper.pose.p;
      WorldObject& s = *w.find(target.id);
      for (auto& c : s.cells) {
        const double d = point_segment_distance(s.pose.p.x + c.dx, s.pose.p.y + c.dy, from, call.param);
        if (d <= 0.5 * cfg.wipe_width) c.wet = false;
      }
      if (!any_wet_cell(s)) s.flags.erase("wet");
      w.gripper.pose.p = call.param;
      break;
    }

    case SkillKind::Pour: {
      if (!held) return {failed, failure("nothing held")};
      if (!held_obj->has("filled")) return {failed, failure("source empty")};
      if (!target.has("container")) return {failed, failure("destination has no aperture")};
      const double clearance = call.param.z - target.top();
      if (dist_xy(call.param, target.pose.p) > cfg.pour_xy_tolerance || clearance < cfg.pour_min_clearance ||
          clearance > cfg.pour_max_clearance) {
        return {failed, failure("no aperture under source")};
      }
      w.find(target.id)->flags.insert("filled");
      w.gripper.pose.p = call.param;
      break;
    }

    case SkillKind::PullOpen:
      if (held) return {failed, failure("gripper occupied")};
      if (!target.has("openable")) return {failed, failure("not openable")};
      if (target.has("open")) return {failed, failure("already open")};
      {
        // the lid handle sits on the front (low-y) edge
        const Vec3 handle{target.pose.p.x, target.pose.p.y - target.half_size.y, target.pose.p.z};
        if (dist_xy(call.param, handle) > cfg.grasp_radius) return {failed, failure("out of reach")};
      }
      w.find(target.id)->flags.insert("open");
      w.gripper.pose.p = call.param;
      break;
  }
  sync_held(w);
  return {w, {true, {}}};
}

GoalAtom parse_atom(std::string_view text) {
  GoalAtom a;
  std::string s = text::trim(text);
  if (s.rfind("not ", 0) == 0) {
    a.negated = true;
    s = text::trim(s.substr(4));
  }
  const auto open = s.find('('), close = s.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open || close + 1 != s.size()) {
    fail(ErrorCode::ParseError, "malformed goal atom '" + std::string(text) + "'");
  }
  a.predicate = text::trim(s.substr(0, open));
  for (const auto& arg : text::split(s.substr(open + 1, close - open - 1), ',')) {
    const std::string t = text::trim(arg);
    if (t.empty()) fail(ErrorCode::ParseError, "empty argument in '" + std::string(text) + "'");
    a.args.push_back(t);
  }
  if (a.predicate.empty() || a.args.empty()) fail(ErrorCode::ParseError, "malformed goal atom");
  return a;
}

std::string to_string(const GoalAtom& atom) {
  std::string s = atom.negated ? "not " : "";
  s += atom.predicate + "(";
  for (std::size_t i = 0; i < atom.args.size(); ++i) s += (i ? ", " : "") + atom.args[i];
  return s + ")";
}

bool eval_atom(const WorldState& world, const GoalAtom& atom) {
  std::vector<const WorldObject*> args;
  for (const auto& id : atom.args) {
    const WorldObject* o = world.find(id);
    if (!o) fail(ErrorCode::UndeclaredObject, "goal references undeclared object '" + id + "'");
    args.push_back(o);
  }
  auto is_held = [&](const WorldObject* o) { return world.gripper.held && *world.gripper.held == o->id; };
  bool v = false;
  if (atom.predicate == "on" || atom.predicate == "inside") {
    if (args.size() != 2) fail(ErrorCode::ParseError, atom.predicate + " takes two arguments");
    const WorldObject& a = *args[0];
    const WorldObject& b = *args[1];
    const bool over = !is_held(&a) && b.covers(a.pose.p.x, a.pose.p.y);
    if (atom.predicate == "on") {
      v = over && std::abs(a.pose.p.z - b.top()) <= kRestTolerance;
    } else {
      v = over && b.has("container") && a.pose.p.z >= b.pose.p.z && a.pose.p.z < b.top() - kRestTolerance;
    }
  } else if (atom.predicate == "held") {
    if (args.size() != 1) fail(ErrorCode::ParseError, "held takes one argument");
    v = is_held(args[0]);
  } else {
    if (args.size() != 1) fail(ErrorCode::ParseError, atom.predicate + " takes one argument");
    if (atom.predicate == "wet" && !args[0]->cells.empty()) {
      v = any_wet_cell(*args[0]);
    } else {
      v = args[0]->has(atom.predicate);
    }
  }
  return atom.negated ? !v : v;
}

bool check_goal(const WorldState& world, const GoalCondition& goal) {
  bool all = true;
  for (const auto& a : goal.atoms) all = eval_atom(world, a) && all;  // evaluate every atom so errors surface
  return all;
}

WorldState TaskDefinition::instantiate(std::uint64_t seed) const {
  WorldState w = initial;
  if (seed == 0 || jitter_xy <= 0.0) return w;
  Rng rng = make_rng(seed, "world-jitter:" + id);
  for (auto& o : w.objects) {
    const double dx = (2.0 * uniform01(rng) - 1.0) * jitter_xy;
    const double dy = (2.0 * uniform01(rng) - 1.0) * jitter_xy;
    if (o.has("fixed")) continue;
    o.pose.p.x = std::clamp(o.pose.p.x + dx, o.half_size.x, 1.0 - o.half_size.x);
    o.pose.p.y = std::clamp(o.pose.p.y + dy, o.half_size.y, 1.0 - o.half_size.y);
  }
  return w;
}

Vec3 TaskDefinition::resolve(const PlanStep& step, const WorldState& world) const {
  const Vec3 base = step.anchor == "gripper" ? world.gripper.pose.p : world.at(step.anchor).pose.p;
  return clamp_unit(base + step.offset);
}

int TaskDefinition::skill_slot(std::string_view object, SkillKind skill) const {
  const auto& s = initial.at(object).skills;
  const auto it = std::find(s.begin(), s.end(), skill);
  return it == s.end() ? -1 : static_cast<int>(it - s.begin());
}

void TaskDefinition::validate() const {
  if (id.empty()) fail(ErrorCode::ParseError, "task id missing");
  if (initial.objects.empty()) fail(ErrorCode::ParseError, "task declares no objects");
  std::set<std::string> seen;
  for (const auto& o : initial.objects) {
    if (!seen.insert(o.id).second) fail(ErrorCode::ParseError, "duplicate object '" + o.id + "'");
    if (o.skills.empty() || o.skills.size() > 4) fail(ErrorCode::ParseError, "objects offer 1 to 4 skills");
    for (SkillKind k : o.skills) {
      if (std::find(skills.begin(), skills.end(), k) == skills.end()) {
        fail(ErrorCode::UnknownSkill, "object '" + o.id + "' offers a skill the task does not list");
      }
    }
  }
  for (const auto& s : plan) {
    if (!initial.find(s.object)) fail(ErrorCode::UndeclaredObject, "plan references '" + s.object + "'");
    if (s.anchor != "gripper" && !initial.find(s.anchor)) {
      fail(ErrorCode::UndeclaredObject, "plan anchor '" + s.anchor + "'");
    }
    if (skill_slot(s.object, s.skill) < 0) fail(ErrorCode::UnknownSkill, "plan skill not offered by object");
  }
  for (const auto& a : goal.atoms) {
    for (const auto& arg : a.args) {
      if (!initial.find(arg)) fail(ErrorCode::UndeclaredObject, "goal references undeclared object '" + arg + "'");
    }
  }
}

}  // namespace noir
