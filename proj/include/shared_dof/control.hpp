#pragma once

// Shared-control session: Classic mode switching and the ADMC suggestion
// adoption variants, advanced one fixed tick at a time.
//
// The active mapping only ever changes through a user button (mode cycle,
// request, accept) or, in admc_idle, through the idle timer.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "shared_dof/error.hpp"
#include "shared_dof/geometry.hpp"
#include "shared_dof/intent.hpp"
#include "shared_dof/scene.hpp"

namespace shared_dof {

enum class Variant { Classic, AdmcRequest, AdmcIdle, AdmcContinuous, AdmcThreshold };

inline constexpr std::array<Variant, 5> kAllVariants = {Variant::Classic, Variant::AdmcRequest, Variant::AdmcIdle,
                                                        Variant::AdmcContinuous, Variant::AdmcThreshold};

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::Classic: return "classic";
    case Variant::AdmcRequest: return "admc_request";
    case Variant::AdmcIdle: return "admc_idle";
    case Variant::AdmcContinuous: return "admc_continuous";
    case Variant::AdmcThreshold: return "admc_threshold";
  }
  return "?";
}

inline std::optional<Variant> parse_variant(std::string_view s) {
  for (Variant v : kAllVariants)
    if (to_string(v) == s) return v;
  return std::nullopt;
}

inline bool is_admc(Variant v) { return v != Variant::Classic; }

enum class InputSource { Human, Simulated };

struct Buttons {
  bool mode_switch = false;
  bool accept = false;
  bool request = false;
  bool estop = false;
  bool perspective = false;

  bool any() const { return mode_switch || accept || request || estop || perspective; }
};

struct InputFrame {
  std::array<double, 2> axes{0.0, 0.0};
  Buttons buttons;
  InputSource source = InputSource::Simulated;

  bool axes_zero() const { return axes[0] == 0.0 && axes[1] == 0.0; }
  bool idle() const { return axes_zero() && !buttons.any(); }
  InputFrame clamped() const {
    InputFrame f = *this;
    for (double& a : f.axes) a = std::isfinite(a) ? std::clamp(a, -1.0, 1.0) : 0.0;
    return f;
  }
};

/// Where the active mapping came from: a Classic mode index (1..4) or a
/// suggestion epoch.
struct MappingSource {
  enum class Kind { ClassicMode, Suggestion } kind = Kind::ClassicMode;
  unsigned long long value = 1;

  std::string label() const {
    return (kind == Kind::ClassicMode ? "classic:" : "suggestion:") + std::to_string(value);
  }
  bool operator==(const MappingSource&) const = default;
};

struct ActiveMapping {
  std::vector<Twist> columns;
  MappingSource source;
  unsigned long long since_tick = 0;
};

struct ControllerConfig {
  Variant variant = Variant::Classic;
  double idle_timeout = 5.0;      // s
  double threshold_angle = 30.0;  // deg
  double speed_scale = 0.15;      // m/s at full deflection

  void validate() const {
    if (!(idle_timeout > 0.0)) throw Error(ErrorCode::InvalidInput, "idle_timeout must be > 0");
    if (!(threshold_angle > 0.0 && threshold_angle < 180.0))
      throw Error(ErrorCode::InvalidInput, "threshold_angle must lie in (0, 180)");
    if (!(speed_scale > 0.0)) throw Error(ErrorCode::InvalidInput, "speed_scale must be > 0");
  }
};

/// Everything that parameterises a session besides the scenario.
struct SessionConfig {
  ControllerConfig controller;
  IntentConfig intent;
  Lambdas lambdas;
  TaskTolerances tol;
  double perspective_confidence = 0.55;  // below this the estimate counts as stuck
  double perspective_after = 2.0;        // s stuck (and idle) before rotating in place
  double suggestion_update_deg = 5.0;    // exposed rank-1 change that re-announces a suggestion
};

// ---------------------------------------------------------------------------
// Events

struct SuggestionUpdated {
  unsigned long long epoch;
  std::string top_candidate_id;
  double confidence;
};
struct MappingAdopted {
  bool by_user;
  std::string source;
};
struct PhaseChanged {
  Phase from;
  Phase to;
};
struct TaskDone {};
struct PerspectiveChanged {
  unsigned attempt;
  double yaw_deg;
};

using Event = std::variant<SuggestionUpdated, MappingAdopted, PhaseChanged, TaskDone, PerspectiveChanged>;

inline std::string_view event_kind(const Event& e) {
  struct {
    std::string_view operator()(const SuggestionUpdated&) const { return "SuggestionUpdated"; }
    std::string_view operator()(const MappingAdopted&) const { return "MappingAdopted"; }
    std::string_view operator()(const PhaseChanged&) const { return "PhaseChanged"; }
    std::string_view operator()(const TaskDone&) const { return "TaskDone"; }
    std::string_view operator()(const PerspectiveChanged&) const { return "PerspectiveChanged"; }
  } visitor;
  return std::visit(visitor, e);
}

// ---------------------------------------------------------------------------
// Session state

struct SessionState {
  unsigned long long tick = 0;
  Pose gripper;
  TaskState task;
  SceneState scene;
  ActiveMapping mapping;
  unsigned classic_mode = 1;
  std::optional<MappingSuggestion> pending_suggestion;
  std::optional<IntentDistribution> dist;
  unsigned long long epoch = 0;
  unsigned long long idle_ticks = 0;
  unsigned long long stuck_ticks = 0;
  unsigned long long switch_count_user = 0;
  unsigned long long switch_count_auto = 0;
  unsigned perspective_attempts = 0;
  unsigned long long rng_seed = 0;
  std::map<std::string, double> nudge_bias;  // accumulated log-weight per candidate
  std::optional<MappingSuggestion> last_exposed;
};

// ---------------------------------------------------------------------------
// Mappings

inline ActiveMapping classic_mapping(int k, const Lambdas& l = {}) {
  ActiveMapping m;
  m.source = {MappingSource::Kind::ClassicMode, static_cast<unsigned long long>(k)};
  auto unit_rot = [&](const Vector3d& axis) { return weighted_normalize(Twist::rotation(axis), l); };
  switch (k) {
    case 1:
      m.columns = {Twist::translation(Vector3d::UnitX()), Twist::translation(Vector3d::UnitY())};
      break;
    case 2:
      m.columns = {Twist::translation(Vector3d::UnitZ()), unit_rot(Vector3d::UnitX())};
      break;
    case 3:
      m.columns = {unit_rot(Vector3d::UnitY()), unit_rot(Vector3d::UnitZ())};
      break;
    case 4:
      m.columns = {weighted_normalize(Twist::gripper(1.0), l)};
      break;
    default:
      throw Error(ErrorCode::InvalidMode, "classic mode must be 1..4, got " + std::to_string(k));
  }
  return m;
}

inline Twist apply_input(const ActiveMapping& mapping, const InputFrame& input, const ControllerConfig& cfg) {
  if (input.buttons.estop) return {};
  Twist t;
  for (std::size_t i = 0; i < mapping.columns.size() && i < 2; ++i) t = t + mapping.columns[i] * input.axes[i];
  return t * cfg.speed_scale;
}

inline SuggestContext suggest_context(const SessionConfig& cfg, const Scenario& sc) {
  return {cfg.lambdas, cfg.tol, sc.limits};
}

/// Whether the controller shows `pending` to the user this tick.
inline bool is_exposed(const SessionState& s, const MappingSuggestion& pending, const SessionConfig& cfg) {
  switch (cfg.controller.variant) {
    case Variant::AdmcContinuous:
      return true;
    case Variant::AdmcThreshold:
      if (s.mapping.columns.empty() || pending.ranked.empty()) return false;
      return weighted_angle_deg(s.mapping.columns[0], pending.ranked[0], cfg.lambdas) > cfg.controller.threshold_angle;
    default:
      return false;
  }
}

inline std::optional<MappingSuggestion> exposed_suggestion(const SessionState& s, const SessionConfig& cfg) {
  if (s.pending_suggestion && is_exposed(s, *s.pending_suggestion, cfg)) return s.pending_suggestion;
  return std::nullopt;
}

inline SessionState start_session(const Scenario& sc, const SessionConfig& cfg, unsigned long long seed = 0) {
  cfg.controller.validate();
  if (!cfg.intent.view.valid()) throw Error(ErrorCode::InvalidInput, "invalid view model");
  SessionState s;
  s.gripper = sc.start_pose;
  s.gripper.orientation = canonical(s.gripper.orientation);
  s.task = initial_task(sc, cfg.tol);
  s.scene = make_scene_state(sc);
  s.mapping = classic_mapping(1, cfg.lambdas);
  s.rng_seed = seed;
  return s;
}

namespace detail {

inline bool same_columns(const std::vector<Twist>& a, const std::vector<Twist>& b, const Lambdas& l) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (weighted_norm(a[i] - b[i], l) > 1e-12) return false;
  return true;
}

/// Score the current view and fold in the accumulated nudges.
inline std::optional<IntentDistribution> estimate(const SessionState& s, const SessionConfig& cfg) {
  auto cands = sense(s.gripper, s.scene, cfg.intent.view, s.task);
  if (cands.empty()) return std::nullopt;
  IntentDistribution d =
      score(cands, cfg.intent.w_dist, cfg.intent.w_bearing, cfg.intent.temperature, cfg.intent.view.range);
  if (!s.nudge_bias.empty()) {
    double total = 0.0;
    for (auto& [id, p] : d.entries) {
      auto it = s.nudge_bias.find(id);
      if (it != s.nudge_bias.end()) p *= std::exp(it->second);
      total += p;
    }
    for (auto& e : d.entries) e.second /= total;
  }
  return d;
}

inline void refresh_suggestion(SessionState& s, const Scenario& sc, const SessionConfig& cfg) {
  s.dist = estimate(s, cfg);
  if (!s.dist) {
    s.pending_suggestion.reset();
    return;
  }
  s.pending_suggestion = suggest(s.gripper, s.scene, s.task, *s.dist, s.epoch, suggest_context(cfg, sc));
  s.epoch = s.pending_suggestion->epoch;
}

/// Adopt the pending suggestion unless it would leave the mapping unchanged.
inline bool adopt_pending(SessionState& s, bool by_user, const SessionConfig& cfg, std::vector<Event>& events) {
  if (!s.pending_suggestion) return false;
  const MappingSuggestion& p = *s.pending_suggestion;
  if (detail::same_columns(p.ranked, s.mapping.columns, cfg.lambdas)) return false;
  s.mapping.columns = p.ranked;
  s.mapping.source = {MappingSource::Kind::Suggestion, p.epoch};
  s.mapping.since_tick = s.tick;
  (by_user ? s.switch_count_user : s.switch_count_auto) += 1;
  events.push_back(MappingAdopted{by_user, s.mapping.source.label()});
  s.pending_suggestion.reset();
  s.last_exposed.reset();
  return true;
}

}  // namespace detail

/// Rotate the gripper in place and re-estimate intent.
inline SessionState trigger_perspective_change(SessionState s, const Scenario& sc, const SessionConfig& cfg,
                                               std::vector<Event>* events = nullptr) {
  const unsigned attempt = s.perspective_attempts;
  s.gripper = change_perspective(s.gripper, attempt);
  sync_attached(s.scene, s.gripper);
  s.perspective_attempts += 1;
  s.stuck_ticks = 0;
  if (is_admc(cfg.controller.variant)) detail::refresh_suggestion(s, sc, cfg);
  if (events) events->push_back(PerspectiveChanged{attempt, perspective_yaw_deg(attempt)});
  return s;
}

/// True when the intent estimate is absent or too unsure to act on.
inline bool intent_stuck(const SessionState& s, const SessionConfig& cfg) {
  return !s.dist || s.dist->top_probability() < cfg.perspective_confidence;
}

inline unsigned long long ticks_for(double seconds, double dt) {
  return static_cast<unsigned long long>(std::ceil(seconds / dt - 1e-9));
}

/// Advance the session by one tick of length dt.
inline std::pair<SessionState, std::vector<Event>> advance(SessionState s, const InputFrame& raw_input,
                                                           const Scenario& sc, const SessionConfig& cfg, double dt) {
  if (s.task.phase == Phase::Done) throw Error(ErrorCode::SessionFinished, "task already done");
  const InputFrame input = raw_input.clamped();
  const Variant variant = cfg.controller.variant;
  std::vector<Event> events;

  // 1. Intent estimate and pending suggestion.
  bool idle_due = false;
  if (is_admc(variant)) {
    s.dist = detail::estimate(s, cfg);
    idle_due = variant == Variant::AdmcIdle && s.idle_ticks >= ticks_for(cfg.controller.idle_timeout, dt);
    const bool refresh = variant == Variant::AdmcContinuous || variant == Variant::AdmcThreshold ||
                         (variant == Variant::AdmcRequest && input.buttons.request) || idle_due;
    if (refresh) detail::refresh_suggestion(s, sc, cfg);
  }

  // 2. Adoption.
  if (input.buttons.mode_switch) {
    const unsigned next = s.mapping.source.kind == MappingSource::Kind::ClassicMode ? s.classic_mode % 4 + 1 : 1;
    s.classic_mode = next;
    s.mapping = classic_mapping(static_cast<int>(next), cfg.lambdas);
    s.mapping.since_tick = s.tick;
    s.switch_count_user += 1;
    events.push_back(MappingAdopted{true, s.mapping.source.label()});
  } else {
    switch (variant) {
      case Variant::AdmcRequest:
        if (input.buttons.request) detail::adopt_pending(s, true, cfg, events);
        break;
      case Variant::AdmcIdle:
        if (idle_due) {
          detail::adopt_pending(s, false, cfg, events);
          s.pending_suggestion.reset();
          s.idle_ticks = 0;
        }
        break;
      case Variant::AdmcContinuous:
        if (input.buttons.accept) detail::adopt_pending(s, true, cfg, events);
        break;
      case Variant::AdmcThreshold:
        if (input.buttons.accept && s.pending_suggestion && is_exposed(s, *s.pending_suggestion, cfg))
          detail::adopt_pending(s, true, cfg, events);
        break;
      case Variant::Classic:
        break;
    }
  }

  // 3-4. Command twist, confidence nudging, motion.
  const Twist twist = apply_input(s.mapping, input, cfg.controller);
  if (is_admc(variant) && s.dist && !input.axes_zero() && !twist.linear.isZero(0.0)) {
    const IntentDistribution nudged = nudge_confidence(*s.dist, twist, s.gripper, s.scene, cfg.intent.eta);
    for (std::size_t i = 0; i < nudged.entries.size(); ++i) {
      const auto& id = nudged.entries[i].first;
      s.nudge_bias[id] += std::log(nudged.entries[i].second / s.dist->entries[i].second);
    }
    s.dist = nudged;
  }
  s.gripper = integrate(s.gripper, twist, dt, sc.limits);

  // 5. World.
  const Phase before = s.task.phase;
  std::tie(s.task, s.scene) = step_world(std::move(s.task), std::move(s.scene), s.gripper, sc.limits, cfg.tol);
  if (s.task.phase != before) {
    events.push_back(PhaseChanged{before, s.task.phase});
    s.pending_suggestion.reset();
    s.last_exposed.reset();
    s.nudge_bias.clear();
    if (s.task.phase == Phase::Done) events.push_back(TaskDone{});
  }

  // 6. Idle bookkeeping.
  if (input.idle()) {
    s.idle_ticks += 1;
  } else {
    s.idle_ticks = 0;
  }

  // Perspective change: on request, or when the estimate has been stuck while
  // the user waited.
  const bool wants_perspective = input.buttons.perspective && !input.buttons.estop;
  if (is_admc(variant) && s.task.phase != Phase::Done) {
    if (input.idle() && intent_stuck(s, cfg)) {
      s.stuck_ticks += 1;
    } else {
      s.stuck_ticks = 0;
    }
    if (wants_perspective || s.stuck_ticks >= ticks_for(cfg.perspective_after, dt))
      s = trigger_perspective_change(std::move(s), sc, cfg, &events);
  } else if (wants_perspective && s.task.phase != Phase::Done) {
    s = trigger_perspective_change(std::move(s), sc, cfg, &events);
  }

  // 7. Announce newly exposed suggestions.
  if (auto shown = exposed_suggestion(s, cfg)) {
    const bool changed = !s.last_exposed || s.last_exposed->top_candidate_id != shown->top_candidate_id ||
                         weighted_angle_deg(s.last_exposed->ranked[0], shown->ranked[0], cfg.lambdas) >
                             cfg.suggestion_update_deg;
    if (changed) {
      events.push_back(SuggestionUpdated{shown->epoch, shown->top_candidate_id, shown->confidence});
      s.last_exposed = shown;
    }
  }

  s.tick += 1;
  return {std::move(s), std::move(events)};
}

}  // namespace shared_dof
