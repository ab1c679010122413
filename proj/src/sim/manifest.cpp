#include "partbench/sim/manifest.hpp"

#include <fstream>

namespace partbench::sim {

using nlohmann::json;
using nlohmann::ordered_json;

static ordered_json vec3_to_json(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }
static Vec3 vec3_from_json(const json& j) { return Vec3(j.at(0), j.at(1), j.at(2)); }

static ordered_json mat3_to_json(const Mat3& m) {
  ordered_json out = ordered_json::array();
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 3; ++r) out.push_back(m(r, c));  // column-major
  return out;
}
static Mat3 mat3_from_json(const json& j) {
  Mat3 m;
  int k = 0;
  for (int c = 0; c < 3; ++c)
    for (int r = 0; r < 3; ++r) m(r, c) = j.at(k++);
  return m;
}

static ordered_json pose_to_json(const Pose& p) {
  return ordered_json{{"t", vec3_to_json(p.translation())}, {"R", mat3_to_json(p.linear())}};
}
static Pose pose_from_json(const json& j) {
  Pose p = Pose::Identity();
  p.translation() = vec3_from_json(j.at("t"));
  p.linear() = mat3_from_json(j.at("R"));
  return p;
}

nlohmann::ordered_json object_to_json(const ArticulatedObject& obj) {
  ordered_json j;
  j["format"] = "partbench-asset";
  j["version"] = 1;
  j["category"] = obj.category;
  j["task_class"] = task_class_name(obj.task_class);
  j["seed"] = obj.seed;
  j["target_part"] = obj.target_part_id;
  if (obj.paired_handle_id)
    j["paired_handle"] = *obj.paired_handle_id;
  else
    j["paired_handle"] = nullptr;
  j["links"] = ordered_json::array();
  for (const Link& l : obj.links)
    j["links"].push_back(ordered_json{{"name", l.name},
                                      {"half_extents", vec3_to_json(l.half_extents)},
                                      {"pose_in_parent", pose_to_json(l.pose_in_parent)},
                                      {"color", vec3_to_json(l.color)},
                                      {"parent", l.parent}});
  j["joints"] = ordered_json::array();
  for (const JointSpec& s : obj.joints)
    j["joints"].push_back(ordered_json{{"kind", s.kind == JointKind::Hinge ? "hinge" : "slider"},
                                       {"axis", vec3_to_json(s.axis)},
                                       {"anchor", vec3_to_json(s.anchor)},
                                       {"limits", ordered_json::array({s.lo, s.hi})},
                                       {"stiffness", s.stiffness},
                                       {"damping", s.damping},
                                       {"friction", s.friction},
                                       {"recovery_force", s.recovery_force},
                                       {"parent", s.parent},
                                       {"child", s.child}});
  j["parts"] = ordered_json::array();
  for (const Part& p : obj.parts)
    j["parts"].push_back(ordered_json{{"id", p.id},
                                      {"class", part_class_name(p.part_class)},
                                      {"link", p.link},
                                      {"center", vec3_to_json(p.local.center)},
                                      {"axes", mat3_to_json(p.local.axes)},
                                      {"half_extents", vec3_to_json(p.local.half)},
                                      {"color", vec3_to_json(p.color)}});
  return j;
}

ArticulatedObject object_from_json(const json& j) {
  if (j.at("format") != "partbench-asset") throw IoError("not an asset manifest");
  if (j.at("version") != 1) throw IoError("unsupported asset manifest version");
  ArticulatedObject obj;
  obj.category = j.at("category");
  obj.task_class = task_class_from_name(j.at("task_class"));
  obj.seed = j.at("seed");
  obj.target_part_id = j.at("target_part");
  if (!j.at("paired_handle").is_null()) obj.paired_handle_id = j.at("paired_handle").get<int>();
  for (const auto& lj : j.at("links")) {
    Link l;
    l.name = lj.at("name");
    l.half_extents = vec3_from_json(lj.at("half_extents"));
    l.pose_in_parent = pose_from_json(lj.at("pose_in_parent"));
    l.color = vec3_from_json(lj.at("color"));
    l.parent = lj.at("parent");
    obj.links.push_back(l);
  }
  for (const auto& jj : j.at("joints")) {
    JointSpec s;
    s.kind = jj.at("kind") == "hinge" ? JointKind::Hinge : JointKind::Slider;
    s.axis = vec3_from_json(jj.at("axis"));
    s.anchor = vec3_from_json(jj.at("anchor"));
    s.lo = jj.at("limits").at(0);
    s.hi = jj.at("limits").at(1);
    s.stiffness = jj.at("stiffness");
    s.damping = jj.at("damping");
    s.friction = jj.at("friction");
    s.recovery_force = jj.at("recovery_force");
    s.parent = jj.at("parent");
    s.child = jj.at("child");
    obj.joints.push_back(s);
  }
  for (const auto& pj : j.at("parts")) {
    Part p;
    p.id = pj.at("id");
    p.part_class = part_class_from_name(pj.at("class"));
    p.link = pj.at("link");
    p.local.center = vec3_from_json(pj.at("center"));
    p.local.axes = mat3_from_json(pj.at("axes"));
    p.local.half = vec3_from_json(pj.at("half_extents"));
    p.color = vec3_from_json(pj.at("color"));
    obj.parts.push_back(p);
  }
  obj.validate();
  return obj;
}

void save_object(const std::string& path, const ArticulatedObject& obj) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << object_to_json(obj).dump(2) << "\n";
}

ArticulatedObject load_object(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  return object_from_json(json::parse(f));
}

}  // namespace partbench::sim
