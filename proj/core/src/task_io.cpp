#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "noir/error.hpp"
#include "noir/text.hpp"
#include "noir/world.hpp"

namespace noir {
namespace {

constexpr std::string_view kMagic = "noir-task v1";

std::vector<double> numbers(const std::string& s, std::size_t n, const std::string& what) {
  auto v = text::parse_doubles(s, ',');
  if (v.size() != n) fail(ErrorCode::ParseError, what + " expects " + std::to_string(n) + " values");
  return v;
}

std::vector<SkillKind> skill_list(const std::string& s) {
  std::vector<SkillKind> out;
  for (const auto& t : text::split(s, ',')) {
    if (!t.empty()) out.push_back(skill_from_string(t));
  }
  return out;
}

std::string join_skills(const std::vector<SkillKind>& ks) {
  std::string s;
  for (std::size_t i = 0; i < ks.size(); ++i) s += (i ? ", " : "") + std::string(to_string(ks[i]));
  return s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

TaskDefinition read_task(std::istream& is) {
  std::vector<std::string> comments;
  const auto sections = text::parse_sections(is, &comments);
  if (comments.empty() || comments.front() != kMagic) fail(ErrorCode::ParseError, "not a noir-task v1 file");
  TaskDefinition t;
  for (const auto& sec : sections) {
    if (sec.name == "task") {
      t.id = sec.get("id");
      t.description = sec.find("description").value_or("");
      t.skills = skill_list(sec.get("skills"));
      if (auto j = sec.find("jitter_xy")) t.jitter_xy = text::parse_double(*j);
    } else if (sec.name == "gripper") {
      const auto v = numbers(sec.get("pose"), 6, "gripper pose");
      t.initial.gripper.pose = {{v[0], v[1], v[2]}, v[3], v[4], v[5]};
    } else if (sec.name == "object") {
      if (sec.arg.empty()) fail(ErrorCode::ParseError, "object section needs an id");
      WorldObject o;
      o.id = sec.arg;
      const auto p = numbers(sec.get("pose"), 4, "object pose");
      o.pose = {{p[0], p[1], p[2]}, p[3]};
      const auto sz = numbers(sec.get("size"), 3, "object size");
      o.half_size = {sz[0], sz[1], sz[2]};
      for (const auto& f : text::split(sec.find("flags").value_or(""), ',')) {
        if (!f.empty()) o.flags.insert(f);
      }
      if (auto c = sec.find("color")) {
        const auto rgb = numbers(*c, 3, "color");
        for (int i = 0; i < 3; ++i) o.color[i] = static_cast<std::uint8_t>(std::clamp(rgb[i], 0.0, 255.0));
      }
      o.skills = skill_list(sec.get("skills"));
      for (const auto& cell : sec.all("cell")) {
        const auto d = numbers(cell, 2, "cell");
        o.cells.push_back({d[0], d[1], true});
      }
      t.initial.objects.push_back(std::move(o));
    } else if (sec.name == "plan") {
      for (const auto& step : sec.all("step")) {
        const auto w = text::tokens(step);
        if (w.size() != 6) fail(ErrorCode::ParseError, "plan step is: object skill anchor dx dy dz");
        t.plan.push_back({w[0], skill_from_string(w[1]), w[2],
                          {text::parse_double(w[3]), text::parse_double(w[4]), text::parse_double(w[5])}});
      }
    } else if (sec.name == "goal") {
      for (const auto& a : sec.all("atom")) t.goal.atoms.push_back(parse_atom(a));
    } else {
      fail(ErrorCode::ParseError, "unknown section [" + sec.name + "]");
    }
  }
  t.validate();
  return t;
}

TaskDefinition read_task_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ParseError, "cannot open task file " + path);
  return read_task(in);
}

void write_task(std::ostream& os, const TaskDefinition& t) {
  os << "# " << kMagic << "\n";
  os << "# Goal atoms are this project's own formalization of the task.\n\n";
  os << "[task]\nid = " << t.id << "\n";
  if (!t.description.empty()) os << "description = " << t.description << "\n";
  os << "skills = " << join_skills(t.skills) << "\njitter_xy = " << fmt(t.jitter_xy) << "\n\n";
  const Pose6& g = t.initial.gripper.pose;
  os << "[gripper]\npose = " << fmt(g.p.x) << ", " << fmt(g.p.y) << ", " << fmt(g.p.z) << ", " << fmt(g.roll)
     << ", " << fmt(g.pitch) << ", " << fmt(g.yaw) << "\n";
  for (const auto& o : t.initial.objects) {
    os << "\n[object " << o.id << "]\n";
    os << "pose = " << fmt(o.pose.p.x) << ", " << fmt(o.pose.p.y) << ", " << fmt(o.pose.p.z) << ", "
       << fmt(o.pose.yaw) << "\n";
    os << "size = " << fmt(o.half_size.x) << ", " << fmt(o.half_size.y) << ", " << fmt(o.half_size.z) << "\n";
    std::string flags;
    for (const auto& f : o.flags) flags += (flags.empty() ? "" : ", ") + f;
    os << "flags = " << flags << "\n";
    os << "color = " << int(o.color[0]) << ", " << int(o.color[1]) << ", " << int(o.color[2]) << "\n";
    os << "skills = " << join_skills(o.skills) << "\n";
    for (const auto& c : o.cells) os << "cell = " << fmt(c.dx) << ", " << fmt(c.dy) << "\n";
  }
  os << "\n[plan]\n";
  for (const auto& s : t.plan) {
    os << "step = " << s.object << ' ' << to_string(s.skill) << ' ' << s.anchor << ' ' << fmt(s.offset.x) << ' '
       << fmt(s.offset.y) << ' ' << fmt(s.offset.z) << "\n";
  }
  os << "\n[goal]\n";
  for (const auto& a : t.goal.atoms) os << "atom = " << to_string(a) << "\n";
}

}  // namespace noir
