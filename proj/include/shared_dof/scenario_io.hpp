#pragma once

// Scenario documents (JSON) and the scenarios that ship with the library.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "shared_dof/error.hpp"
#include "shared_dof/scene.hpp"

namespace shared_dof {

using nlohmann::json;

namespace detail {

inline Vector3d vec3_from(const json& j, std::string_view what) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::Parse, std::string(what) + ": expected [x,y,z]");
  Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::Parse, std::string(what) + ": non-numeric component");
    v[i] = j[i].get<double>();
  }
  return v;
}

inline Quaterniond quat_from(const json& j, std::string_view what) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::Parse, std::string(what) + ": expected [w,x,y,z]");
  double c[4];
  for (int i = 0; i < 4; ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::Parse, std::string(what) + ": non-numeric component");
    c[i] = j[i].get<double>();
  }
  Quaterniond q(c[0], c[1], c[2], c[3]);
  if (!(q.norm() > 1e-9) || !q.coeffs().allFinite())
    throw Error(ErrorCode::Validation, std::string(what) + ": orientation is not a rotation");
  // Already-canonical values are kept bit-exact so logs re-serialise identically.
  if (q.w() >= 0.0 && std::abs(q.norm() - 1.0) < 1e-12) return q;
  return canonical(q);
}

inline const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
  return *it;
}

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("field '") + key + "': " + e.what());
  }
}

inline json to_json(const Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }
inline json to_json(const Quaterniond& q) { return json::array({q.w(), q.x(), q.y(), q.z()}); }

}  // namespace detail

inline json pose_to_json(const Pose& p) {
  return {{"position", detail::to_json(p.position)},
          {"orientation", detail::to_json(p.orientation)},
          {"aperture", p.aperture}};
}

inline json twist_to_json(const Twist& t) {
  return {{"linear", detail::to_json(t.linear)},
          {"angular", detail::to_json(t.angular)},
          {"aperture_rate", t.aperture_rate}};
}

inline Pose pose_from_json(const json& j) {
  Pose p;
  p.position = detail::vec3_from(detail::field(j, "position"), "position");
  p.orientation = detail::quat_from(detail::field(j, "orientation"), "orientation");
  p.aperture = detail::get_as<double>(j, "aperture");
  return p;
}

inline void validate(const Scenario& sc) {
  if (!sc.limits.valid()) throw Error(ErrorCode::Validation, "limits: min must be < max and speed caps > 0");
  if (!(sc.tick_dt > 0.0 && sc.tick_dt <= 0.1)) throw Error(ErrorCode::Validation, "tick_dt must lie in (0, 0.1]");
  if (!sc.limits.contains(sc.start_pose.position)) throw Error(ErrorCode::Validation, "start_pose outside limits");
  if (sc.start_pose.aperture < 0.0 || sc.start_pose.aperture > 1.0)
    throw Error(ErrorCode::Validation, "start_pose aperture outside [0,1]");
  std::set<std::string> ids;
  for (const auto& o : sc.objects) {
    if (o.id.empty()) throw Error(ErrorCode::Validation, "object with empty id");
    if (!ids.insert(o.id).second) throw Error(ErrorCode::Validation, "duplicate id '" + o.id + "'");
    if ((o.half_extents.array() <= 0.0).any())
      throw Error(ErrorCode::Validation, "object '" + o.id + "': half_extents must be > 0");
  }
  for (const auto& z : sc.zones) {
    if (z.id.empty()) throw Error(ErrorCode::Validation, "zone with empty id");
    if (!ids.insert(z.id).second) throw Error(ErrorCode::Validation, "duplicate id '" + z.id + "'");
    if (!(z.radius > 0.0)) throw Error(ErrorCode::Validation, "zone '" + z.id + "': radius must be > 0");
  }
  if (sc.objects.empty()) throw Error(ErrorCode::Validation, "scenario has no objects");
  if (sc.zones.empty()) throw Error(ErrorCode::Validation, "scenario has no zones");
}

inline Scenario scenario_from_json(const json& doc) {
  using detail::field;
  using detail::get_as;
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "scenario document must be a JSON object");
  Scenario sc;
  sc.name = get_as<std::string>(doc, "name");
  sc.tick_dt = get_as<double>(doc, "tick_dt");
  sc.seed = get_as<unsigned long long>(doc, "seed");
  sc.start_pose = pose_from_json(field(doc, "start_pose"));

  const json& lim = field(doc, "limits");
  sc.limits.min_corner = detail::vec3_from(field(lim, "min"), "limits.min");
  sc.limits.max_corner = detail::vec3_from(field(lim, "max"), "limits.max");
  sc.limits.max_linear_speed = get_as<double>(lim, "max_linear_speed");
  sc.limits.max_angular_speed = get_as<double>(lim, "max_angular_speed");
  sc.limits.max_aperture_rate = get_as<double>(lim, "max_aperture_rate");

  for (const json& o : field(doc, "objects")) {
    SceneObject obj;
    obj.id = get_as<std::string>(o, "id");
    obj.half_extents = detail::vec3_from(field(o, "half_extents"), "half_extents");
    obj.position = detail::vec3_from(field(o, "position"), "position");
    obj.orientation = detail::quat_from(field(o, "orientation"), "orientation");
    obj.graspable = get_as<bool>(o, "graspable");
    obj.color_tag = get_as<std::string>(o, "color_tag");
    sc.objects.push_back(std::move(obj));
  }
  for (const json& z : field(doc, "zones")) {
    TargetZone zone;
    zone.id = get_as<std::string>(z, "id");
    zone.center = detail::vec3_from(field(z, "center"), "center");
    zone.radius = get_as<double>(z, "radius");
    zone.color_tag = get_as<std::string>(z, "color_tag");
    sc.zones.push_back(std::move(zone));
  }
  validate(sc);
  return sc;
}

inline Scenario load_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, "at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return scenario_from_json(doc);
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Parse, "cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_scenario(ss.str());
}

inline json scenario_to_json(const Scenario& sc) {
  json objects = json::array();
  for (const auto& o : sc.objects)
    objects.push_back({{"id", o.id},
                       {"half_extents", detail::to_json(o.half_extents)},
                       {"position", detail::to_json(o.position)},
                       {"orientation", detail::to_json(o.orientation)},
                       {"graspable", o.graspable},
                       {"color_tag", o.color_tag}});
  json zones = json::array();
  for (const auto& z : sc.zones)
    zones.push_back({{"id", z.id}, {"center", detail::to_json(z.center)}, {"radius", z.radius}, {"color_tag", z.color_tag}});
  return {{"name", sc.name},
          {"tick_dt", sc.tick_dt},
          {"seed", sc.seed},
          {"start_pose", pose_to_json(sc.start_pose)},
          {"limits",
           {{"min", detail::to_json(sc.limits.min_corner)},
            {"max", detail::to_json(sc.limits.max_corner)},
            {"max_linear_speed", sc.limits.max_linear_speed},
            {"max_angular_speed", sc.limits.max_angular_speed},
            {"max_aperture_rate", sc.limits.max_aperture_rate}}},
          {"objects", objects},
          {"zones", zones}};
}

// Copies of scenarios/canonical.json and scenarios/deadlock.json; a test keeps them in sync.
inline constexpr std::string_view kCanonicalScenario = R"({
  "name": "canonical", "tick_dt": 0.05, "seed": 7,
  "start_pose": {"position": [0.0, 0.0, 0.30],
                 "orientation": [0.9238795325112867, 0.0, 0.3826834323650898, 0.0], "aperture": 1.0},
  "limits": {"min": [-0.3, -0.6, 0.0], "max": [0.8, 0.6, 0.6],
             "max_linear_speed": 0.25, "max_angular_speed": 1.0, "max_aperture_rate": 2.0},
  "objects": [{"id": "blue_block", "half_extents": [0.025, 0.025, 0.025], "position": [0.40, 0.20, 0.05],
               "orientation": [0.6532814824381883, 0.27059805007309845, 0.2705980500730985, -0.6532814824381882],
               "graspable": true, "color_tag": "blue"}],
  "zones": [{"id": "red_zone", "center": [0.10, -0.30, 0.00], "radius": 0.10, "color_tag": "red"}]
})";

inline constexpr std::string_view kDeadlockScenario = R"({
  "name": "deadlock", "tick_dt": 0.05, "seed": 11,
  "start_pose": {"position": [0.0, 0.0, 0.30],
                 "orientation": [0.9238795325112867, 0.0, 0.3826834323650898, 0.0], "aperture": 1.0},
  "limits": {"min": [-0.3, -0.6, 0.0], "max": [0.8, 0.6, 0.6],
             "max_linear_speed": 0.25, "max_angular_speed": 1.0, "max_aperture_rate": 2.0},
  "objects": [{"id": "block_a", "half_extents": [0.025, 0.025, 0.025], "position": [0.30, 0.25, 0.05],
               "orientation": [0.9238795325112867, 0.0, 0.3826834323650898, 0.0], "graspable": true, "color_tag": "blue"},
              {"id": "block_b", "half_extents": [0.025, 0.025, 0.025], "position": [0.30, -0.25, 0.05],
               "orientation": [0.9238795325112867, 0.0, 0.3826834323650898, 0.0], "graspable": true, "color_tag": "blue"}],
  "zones": [{"id": "red_zone", "center": [0.60, 0.00, 0.00], "radius": 0.10, "color_tag": "red"}]
})";

inline Scenario canonical_scenario() { return load_scenario(kCanonicalScenario); }
inline Scenario deadlock_scenario() { return load_scenario(kDeadlockScenario); }

/// Built-in name ("canonical", "deadlock") or a path to a scenario file.
inline Scenario resolve_scenario(const std::string& name_or_path) {
  if (name_or_path == "canonical") return canonical_scenario();
  if (name_or_path == "deadlock") return deadlock_scenario();
  // A missing "canonical.json" / "deadlock.json" falls back to the built-in copy.
  const std::filesystem::path p(name_or_path);
  if (!std::filesystem::exists(p) && p.extension() == ".json") {
    if (p.stem() == "canonical") return canonical_scenario();
    if (p.stem() == "deadlock") return deadlock_scenario();
  }
  return load_scenario_file(name_or_path);
}

}  // namespace shared_dof
