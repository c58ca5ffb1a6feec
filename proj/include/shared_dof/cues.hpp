#pragma once

// Legibility cues derived from the session: arrows for the current and the
// suggested mapping, a ghost preview of the suggestion, per-DoF indicator
// lamps, and vibrotactile direction patterns on a 3x3 actuator grid.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "shared_dof/control.hpp"
#include "shared_dof/error.hpp"
#include "shared_dof/geometry.hpp"
#include "shared_dof/scenario_io.hpp"

namespace shared_dof {

enum class ArrowKind { Current, Suggested };

struct ArrowCue {
  Pose anchor;
  Twist direction;
  ArrowKind kind = ArrowKind::Current;

  Vector3d straight() const { return direction.linear; }
  Vector3d curved() const { return direction.angular; }
};

struct GhostCue {
  std::vector<Pose> samples;
};

/// x, y, z, roll, pitch, yaw, gripper; each in [0,1].
struct DofIndicatorState {
  std::array<double, 7> magnitude{};

  bool lit(std::size_t i, double threshold = 1e-9) const { return magnitude[i] > threshold; }
};

struct Cues {
  ArrowCue current;
  std::optional<ArrowCue> suggested;
  std::optional<GhostCue> ghost;
  DofIndicatorState indicator;
};

struct GhostSettings {
  std::size_t samples = 10;
  double horizon_s = 1.5;
};

/// Forward-integrate `direction` at speed_scale; samples[0] is `start`.
inline GhostCue make_ghost(const Pose& start, const Twist& direction, double speed_scale,
                           const WorkspaceLimits& limits, const GhostSettings& g = {}) {
  GhostCue ghost;
  ghost.samples.push_back(start);
  const double dt = g.horizon_s / static_cast<double>(g.samples - 1);
  const Twist v = direction * speed_scale;
  for (std::size_t i = 1; i < g.samples; ++i) ghost.samples.push_back(integrate(ghost.samples.back(), v, dt, limits));
  return ghost;
}

inline DofIndicatorState make_indicator(const ActiveMapping& mapping, const Lambdas& l) {
  DofIndicatorState s;
  for (const Twist& c : mapping.columns) {
    const Vector7d w = weighted_components(c, l);
    for (int i = 0; i < 7; ++i) s.magnitude[i] = std::max(s.magnitude[i], std::min(1.0, std::abs(w(i))));
  }
  return s;
}

/// Cues for the session as the controller currently presents it. A suggested
/// arrow and ghost appear only for a suggestion the controller exposes.
inline Cues make_cues(const SessionState& s, const SessionConfig& cfg, const WorkspaceLimits& limits,
                      const GhostSettings& g = {}) {
  Cues cues;
  cues.current.anchor = s.gripper;
  cues.current.kind = ArrowKind::Current;
  if (!s.mapping.columns.empty()) cues.current.direction = s.mapping.columns.front();
  cues.indicator = make_indicator(s.mapping, cfg.lambdas);
  if (auto shown = exposed_suggestion(s, cfg); shown && !shown->ranked.empty()) {
    cues.suggested = ArrowCue{s.gripper, shown->ranked.front(), ArrowKind::Suggested};
    cues.ghost = make_ghost(s.gripper, shown->ranked.front(), cfg.controller.speed_scale, limits, g);
  }
  return cues;
}

// ---------------------------------------------------------------------------
// Vibrotactile patterns
//
// Grid index = row * 3 + col, row 0 on the +y side, col 0 on the -x side; the
// centre actuator is 4. A direction is rendered as a sweep of three actuators
// through the centre toward the compass octant of its horizontal part.

enum class VibroMode { Rabbit, Atm, Dual };

inline std::string_view to_string(VibroMode m) {
  switch (m) {
    case VibroMode::Rabbit: return "rabbit";
    case VibroMode::Atm: return "atm";
    case VibroMode::Dual: return "dual";
  }
  return "?";
}

inline std::optional<VibroMode> parse_vibro_mode(std::string_view s) {
  for (VibroMode m : {VibroMode::Rabbit, VibroMode::Atm, VibroMode::Dual})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

enum class Octant { East = 0, NorthEast, North, NorthWest, West, SouthWest, South, SouthEast };

inline std::string_view to_string(Octant o) {
  static constexpr std::array<std::string_view, 8> names = {"E", "NE", "N", "NW", "W", "SW", "S", "SE"};
  return names[static_cast<std::size_t>(o)];
}

inline double octant_azimuth_deg(Octant o) { return 45.0 * static_cast<double>(o); }

struct VibroFrame {
  int actuator = 4;
  int start_ms = 0;
  int duration_ms = 0;
  double amplitude = 1.0;

  bool operator==(const VibroFrame&) const = default;
};

struct VibroPattern {
  std::vector<VibroFrame> frames;
  VibroMode mode = VibroMode::Rabbit;

  int total_ms() const {
    int end = 0;
    for (const auto& f : frames) end = std::max(end, f.start_ms + f.duration_ms);
    return end;
  }
};

struct VibroTiming {
  int pulse_ms = 60;          // rabbit pulse
  int gap_ms = 40;            // rabbit inter-pulse gap
  int atm_duration_ms = 120;  // apparent-motion activation
  int atm_onset_ms = 60;      // apparent-motion onset offset
  int repeat_period_ms = 400; // start-to-start spacing of repeated sweeps
};

inline constexpr std::array<double, 3> kLevelAmplitude = {0.33, 0.66, 1.0};

namespace detail {

inline std::array<int, 2> octant_step(Octant o) {
  static constexpr std::array<std::array<int, 2>, 8> steps = {
      {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
  return steps[static_cast<std::size_t>(o)];
}

inline int grid_index(int dx, int dy) { return (1 - dy) * 3 + (1 + dx); }
inline std::array<int, 2> grid_offset(int index) { return {index % 3 - 1, 1 - index / 3}; }

}  // namespace detail

inline Octant direction_octant(const Vector3d& d) {
  if (d.head<2>().norm() < 1e-6) return Octant::North;
  const double az = std::atan2(d.y(), d.x());
  const long k = std::lround(az / (kPi / 4.0));
  return static_cast<Octant>(((k % 8) + 8) % 8);
}

/// 1 = downward, 2 = level, 3 = upward.
inline int gradient_level(double z) {
  if (z < -1.0 / 3.0) return 1;
  if (z > 1.0 / 3.0) return 3;
  return 2;
}

inline VibroPattern encode_direction(const Vector3d& direction, VibroMode mode, const VibroTiming& t = {}) {
  if (!direction.allFinite() || std::abs(direction.norm() - 1.0) > 1e-6)
    throw Error(ErrorCode::InvalidDirection, "direction must be a unit vector");
  const Octant oct = direction_octant(direction);
  const int level = gradient_level(direction.z());
  const auto [dx, dy] = detail::octant_step(oct);
  const std::array<int, 3> line = {detail::grid_index(-dx, -dy), 4, detail::grid_index(dx, dy)};

  VibroPattern p;
  p.mode = mode;
  const int repeats = mode == VibroMode::Atm ? 1 : level;
  const double amplitude = mode == VibroMode::Rabbit ? 1.0 : kLevelAmplitude[static_cast<std::size_t>(level - 1)];
  for (int r = 0; r < repeats; ++r) {
    const int base = r * t.repeat_period_ms;
    for (int k = 0; k < 3; ++k) {
      if (mode == VibroMode::Atm)
        p.frames.push_back({line[k], base + k * t.atm_onset_ms, t.atm_duration_ms, amplitude});
      else
        p.frames.push_back({line[k], base + k * (t.pulse_ms + t.gap_ms), t.pulse_ms, amplitude});
    }
  }
  std::stable_sort(p.frames.begin(), p.frames.end(),
                   [](const VibroFrame& a, const VibroFrame& b) { return a.start_ms < b.start_ms; });
  return p;
}

struct DecodedDirection {
  Octant octant = Octant::North;
  int level = 2;
  bool operator==(const DecodedDirection&) const = default;
};

inline DecodedDirection decode_pattern(const VibroPattern& p) {
  const auto& f = p.frames;
  if (f.empty() || f.size() % 3 != 0) throw Error(ErrorCode::Decode, "pattern must hold whole 3-actuator sweeps");
  for (std::size_t i = 1; i < f.size(); ++i)
    if (f[i].start_ms < f[i - 1].start_ms) throw Error(ErrorCode::Decode, "frames are not time-sorted");
  if (p.total_ms() > 2000) throw Error(ErrorCode::Decode, "pattern longer than 2000 ms");

  const int first = f[0].actuator;
  const int last = f[2].actuator;
  const double amplitude = f[0].amplitude;
  for (std::size_t i = 0; i < f.size(); i += 3) {
    if (f[i].actuator != first || f[i + 1].actuator != 4 || f[i + 2].actuator != last)
      throw Error(ErrorCode::Decode, "sweeps do not repeat one line through the centre");
  }
  for (const auto& fr : f) {
    if (fr.actuator < 0 || fr.actuator > 8) throw Error(ErrorCode::Decode, "actuator index outside 0..8");
    if (std::abs(fr.amplitude - amplitude) > 1e-9) throw Error(ErrorCode::Decode, "amplitude varies within pattern");
  }
  const auto a = detail::grid_offset(first);
  const auto b = detail::grid_offset(last);
  if (a[0] != -b[0] || a[1] != -b[1] || (b[0] == 0 && b[1] == 0))
    throw Error(ErrorCode::Decode, "sweep endpoints are not opposite grid cells");

  DecodedDirection out;
  for (int k = 0; k < 8; ++k) {
    const auto s = detail::octant_step(static_cast<Octant>(k));
    if (s[0] == b[0] && s[1] == b[1]) out.octant = static_cast<Octant>(k);
  }

  const int repeats = static_cast<int>(f.size() / 3);
  std::optional<int> amp_level;
  for (int lv = 1; lv <= 3; ++lv)
    if (std::abs(amplitude - kLevelAmplitude[static_cast<std::size_t>(lv - 1)]) < 0.01) amp_level = lv;

  switch (p.mode) {
    case VibroMode::Rabbit:
      if (repeats > 3 || std::abs(amplitude - 1.0) > 1e-9) throw Error(ErrorCode::Decode, "malformed rabbit pattern");
      out.level = repeats;
      break;
    case VibroMode::Atm:
      if (repeats != 1 || !amp_level) throw Error(ErrorCode::Decode, "malformed apparent-motion pattern");
      out.level = *amp_level;
      break;
    case VibroMode::Dual:
      if (repeats > 3 || !amp_level || *amp_level != repeats)
        throw Error(ErrorCode::Decode, "pulse count and intensity disagree");
      out.level = repeats;
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline json vibro_to_json(const VibroPattern& p) {
  json frames = json::array();
  for (const auto& f : p.frames)
    frames.push_back(
        {{"actuator", f.actuator}, {"start_ms", f.start_ms}, {"duration_ms", f.duration_ms}, {"amplitude", f.amplitude}});
  return {{"mode", std::string(to_string(p.mode))}, {"frames", frames}};
}

inline VibroPattern vibro_from_json(const json& j) {
  VibroPattern p;
  try {
    auto mode = parse_vibro_mode(j.at("mode").get<std::string>());
    if (!mode) throw Error(ErrorCode::Decode, "unknown vibro mode");
    p.mode = *mode;
    for (const auto& f : j.at("frames"))
      p.frames.push_back({f.at("actuator").get<int>(), f.at("start_ms").get<int>(), f.at("duration_ms").get<int>(),
                          f.at("amplitude").get<double>()});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Decode, e.what());
  }
  return p;
}

inline json arrow_to_json(const ArrowCue& a) {
  return {{"kind", a.kind == ArrowKind::Current ? "current" : "suggested"},
          {"anchor", pose_to_json(a.anchor)},
          {"direction", twist_to_json(a.direction)}};
}

inline json cues_to_json(const Cues& c) {
  json j{{"current", arrow_to_json(c.current)},
         {"suggested", c.suggested ? arrow_to_json(*c.suggested) : json(nullptr)},
         {"indicator", c.indicator.magnitude}};
  if (c.ghost) {
    json samples = json::array();
    for (const auto& p : c.ghost->samples) samples.push_back(pose_to_json(p));
    j["ghost"] = samples;
  } else {
    j["ghost"] = nullptr;
  }
  const ArrowCue& felt = c.suggested ? *c.suggested : c.current;
  if (felt.direction.linear.norm() > 1e-9)
    j["vibro"] = vibro_to_json(encode_direction(felt.direction.linear.normalized(), VibroMode::Dual));
  else
    j["vibro"] = nullptr;
  return j;
}

}  // namespace shared_dof
