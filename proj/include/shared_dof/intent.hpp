#pragma once

// Geometric stand-in for the gripper-camera intent network.
//
// A view cone rooted at the gripper picks out candidate targets; candidates are
// scored on proximity and bearing and turned into a softmax distribution. The
// most probable candidate yields a combined-DoF mapping suggestion. User input
// can shift the distribution, and rotating the gripper in place re-samples the
// view when the estimate is stuck.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shared_dof/error.hpp"
#include "shared_dof/geometry.hpp"
#include "shared_dof/scene.hpp"

namespace shared_dof {

struct ViewModel {
  double half_angle_deg = 60.0;
  double range = 1.5;
  Vector3d axis_local = Vector3d::UnitX();  // approach direction in the gripper frame

  bool valid() const { return half_angle_deg > 0.0 && half_angle_deg < 90.0 && range > 0.0; }
  Vector3d axis_world(const Pose& gripper) const { return (gripper.orientation * axis_local).normalized(); }
};

enum class CandidateKind { Object, Zone };

struct Candidate {
  CandidateKind kind = CandidateKind::Object;
  std::string id;
  Vector3d position = Vector3d::Zero();
  double distance = 0.0;
  double bearing_cos = 1.0;
  double score = 0.0;
};

struct IntentDistribution {
  std::vector<std::pair<std::string, double>> entries;
  double temperature = 0.2;

  double probability(const std::string& id) const {
    for (const auto& [cid, p] : entries)
      if (cid == id) return p;
    return 0.0;
  }

  /// Index of the most probable entry; near-equal probabilities resolve to the
  /// lexicographically smallest id.
  std::size_t top_index() const {
    if (entries.empty()) throw Error(ErrorCode::NoIntent, "empty distribution");
    std::size_t best = 0;
    for (std::size_t i = 1; i < entries.size(); ++i) {
      const double d = entries[i].second - entries[best].second;
      if (d > 1e-12 || (std::abs(d) <= 1e-12 && entries[i].first < entries[best].first)) best = i;
    }
    return best;
  }
  const std::string& top_id() const { return entries[top_index()].first; }
  double top_probability() const { return entries[top_index()].second; }
};

struct MappingSuggestion {
  std::vector<Twist> ranked;
  std::string top_candidate_id;
  double confidence = 0.0;
  unsigned long long epoch = 0;
};

struct IntentConfig {
  ViewModel view;
  double w_dist = 0.5;
  double w_bearing = 0.5;
  double temperature = 0.2;
  double eta = 0.1;
};

/// Geometry the suggestion step needs beyond the distribution itself.
struct SuggestContext {
  Lambdas lambdas;
  TaskTolerances tol;
  WorkspaceLimits limits;
};

// ---------------------------------------------------------------------------

inline std::vector<Candidate> sense(const Pose& gripper, const SceneState& scene, const ViewModel& view,
                                    const TaskState& task) {
  std::vector<Candidate> out;
  const Vector3d axis = view.axis_world(gripper);
  const double min_cos = std::cos(deg_to_rad(view.half_angle_deg));

  auto consider = [&](CandidateKind kind, const std::string& id, const Vector3d& p) {
    const Vector3d d = p - gripper.position;
    const double dist = d.norm();
    if (dist > view.range) return;
    const double bearing = dist < 1e-12 ? 1.0 : std::clamp(d.dot(axis) / dist, -1.0, 1.0);
    if (bearing < min_cos) return;
    out.push_back({kind, id, p, dist, bearing, 0.0});
  };

  if (task.phase == Phase::Approach || task.phase == Phase::Grasp) {
    for (const auto& o : scene.objects)
      if (o.graspable && !o.attached) consider(CandidateKind::Object, o.id, o.position);
  } else if (task.phase == Phase::Transport || task.phase == Phase::Release) {
    for (const auto& z : scene.zones) consider(CandidateKind::Zone, z.id, z.center);
  }
  return out;
}

inline double candidate_score(const Candidate& c, double w_dist, double w_bearing, double range) {
  return w_dist * (1.0 - c.distance / range) + w_bearing * c.bearing_cos;
}

/// Softmax over per-candidate scores.
inline IntentDistribution softmax(const std::vector<std::pair<std::string, double>>& scores, double temperature) {
  if (scores.empty()) throw Error(ErrorCode::NoIntent, "no candidates in view");
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidInput, "temperature must be positive");
  double max_logit = -INFINITY;
  for (const auto& s : scores) max_logit = std::max(max_logit, s.second / temperature);
  IntentDistribution dist;
  dist.temperature = temperature;
  double total = 0.0;
  for (const auto& [id, s] : scores) {
    const double e = std::exp(s / temperature - max_logit);
    dist.entries.emplace_back(id, e);
    total += e;
  }
  for (auto& e : dist.entries) e.second /= total;
  return dist;
}

inline IntentDistribution score(std::vector<Candidate>& candidates, double w_dist, double w_bearing,
                                double temperature, double range) {
  if (candidates.empty()) throw Error(ErrorCode::NoIntent, "no candidates in view");
  std::vector<std::pair<std::string, double>> scores;
  for (auto& c : candidates) {
    c.score = candidate_score(c, w_dist, w_bearing, range);
    scores.emplace_back(c.id, c.score);
  }
  return softmax(scores, temperature);
}

namespace detail {

inline std::optional<Vector3d> candidate_position(const SceneState& scene, const std::string& id) {
  if (const SceneObject* o = scene.find_object(id)) return o->position;
  if (const TargetZone* z = scene.find_zone(id)) return z->center;
  return std::nullopt;
}

inline bool is_active_candidate(const TaskState& task, const std::string& id) {
  if (task.phase == Phase::Approach || task.phase == Phase::Grasp) return id == task.active_object_id;
  return id == task.active_zone_id;
}

}  // namespace detail

/// Subgoal of the current phase if candidate `id` were the user's target.
inline std::optional<Pose> candidate_subgoal(const std::string& id, const Pose& gripper, const SceneState& scene,
                                             const TaskState& task, const SuggestContext& ctx) {
  if (detail::is_active_candidate(task, id)) return task.subgoal;
  switch (task.phase) {
    case Phase::Approach:
      if (const SceneObject* o = scene.find_object(id)) return pregrasp_pose(*o, ctx.tol, ctx.limits);
      break;
    case Phase::Grasp:
      if (const SceneObject* o = scene.find_object(id)) return grasp_pose(*o, ctx.limits);
      break;
    case Phase::Transport:
      if (const TargetZone* z = scene.find_zone(id)) return transport_pose(*z, gripper, ctx.tol, ctx.limits);
      break;
    case Phase::Release:
      return task.subgoal;
    case Phase::Done:
      break;
  }
  return std::nullopt;
}

/// Subgoal of the phase after the current one, assuming candidate `id` is the target.
inline std::optional<Pose> followup_subgoal(const std::string& id, const Pose& gripper, const SceneState& scene,
                                            const TaskState& task, const SuggestContext& ctx) {
  switch (task.phase) {
    case Phase::Approach:
      if (const SceneObject* o = scene.find_object(id)) return grasp_pose(*o, ctx.limits);
      break;
    case Phase::Grasp:
      if (const TargetZone* z = scene.find_zone(task.active_zone_id)) {
        Pose closed = gripper;
        closed.aperture = 0.0;
        return transport_pose(*z, closed, ctx.tol, ctx.limits);
      }
      break;
    case Phase::Transport:
      if (auto carry = candidate_subgoal(id, gripper, scene, task, ctx)) {
        carry->aperture = 1.0;
        return carry;
      }
      break;
    case Phase::Release:
    case Phase::Done:
      break;
  }
  return std::nullopt;
}

/// Rank the distribution into a one- or two-column mapping suggestion.
///
/// Column one moves toward the top candidate's phase subgoal, or operates the
/// gripper once the gripper is within grasp/release tolerance. Column two is
/// the first usable of: toward the runner-up candidate, toward the follow-up
/// phase subgoal, then fixed axes (-z, gripper, +x), each made orthogonal to
/// column one.
inline MappingSuggestion suggest(const Pose& gripper, const SceneState& scene, const TaskState& task,
                                 const IntentDistribution& dist, unsigned long long prev_epoch,
                                 const SuggestContext& ctx) {
  const Lambdas& l = ctx.lambdas;
  MappingSuggestion out;
  const std::size_t top = dist.top_index();
  out.top_candidate_id = dist.entries[top].first;
  out.confidence = dist.entries[top].second;
  out.epoch = prev_epoch + 1;

  const bool closing_phase = task.phase == Phase::Approach || task.phase == Phase::Grasp;
  const Twist aperture_only = weighted_normalize(Twist::gripper(closing_phase ? -1.0 : 1.0), l);

  Twist rank1 = aperture_only;
  const auto goal = candidate_subgoal(out.top_candidate_id, gripper, scene, task, ctx);
  bool terminal = false;
  if (goal) {
    if (task.phase == Phase::Grasp) terminal = within_pose_tolerance(gripper, *goal, ctx.tol);
    if (task.phase == Phase::Release) terminal = (gripper.position - goal->position).norm() <= ctx.tol.pos;
  }
  if (goal && !terminal) {
    try {
      rank1 = goal_twist(gripper, *goal, l);
    } catch (const Error&) {
      rank1 = aperture_only;
    }
  }

  std::vector<Twist> secondaries;
  if (dist.entries.size() > 1) {
    IntentDistribution rest = dist;
    rest.entries.erase(rest.entries.begin() + static_cast<std::ptrdiff_t>(top));
    if (auto g2 = candidate_subgoal(rest.top_id(), gripper, scene, task, ctx))
      secondaries.push_back(pose_difference(gripper, *g2));
  }
  if (auto next = followup_subgoal(out.top_candidate_id, gripper, scene, task, ctx))
    secondaries.push_back(pose_difference(gripper, *next));
  secondaries.push_back(Twist::translation(-Vector3d::UnitZ()));
  secondaries.push_back(Twist::gripper(1.0));
  secondaries.push_back(Twist::translation(Vector3d::UnitX()));

  out.ranked.push_back(rank1);
  for (const Twist& s : secondaries) {
    try {
      auto [a, b] = orthonormalize_pair(rank1, s, l);
      out.ranked[0] = a;
      out.ranked.push_back(b);
      break;
    } catch (const Error&) {
    }
  }
  return out;
}

/// Reweight the distribution toward candidates that the user's translation
/// points at: p_i <- p_i * exp(eta * cos(angle to candidate i)), renormalised.
inline IntentDistribution nudge_confidence(const IntentDistribution& dist, const Twist& user_twist,
                                           const Pose& gripper, const SceneState& scene, double eta) {
  const double n = user_twist.linear.norm();
  if (!(n > 0.0) || dist.entries.empty()) return dist;
  const Vector3d u = user_twist.linear / n;
  IntentDistribution out = dist;
  double total = 0.0;
  for (auto& [id, p] : out.entries) {
    double c = 0.0;
    if (auto pos = detail::candidate_position(scene, id)) {
      const Vector3d d = *pos - gripper.position;
      if (d.norm() > 1e-12) c = u.dot(d.normalized());
    }
    p *= std::exp(eta * c);
    total += p;
  }
  for (auto& e : out.entries) e.second /= total;
  return out;
}

/// Yaw offset (degrees) of the k-th perspective change: +15, -30, +45, -60, ...
inline double perspective_yaw_deg(unsigned attempt_index) {
  const double magnitude = 15.0 * static_cast<double>(attempt_index + 1);
  return attempt_index % 2 == 0 ? magnitude : -magnitude;
}

/// Rotate the gripper in place about the world vertical.
inline Pose change_perspective(const Pose& gripper, unsigned attempt_index) {
  Pose out = gripper;
  out.orientation = canonical(yaw_rotation(deg_to_rad(perspective_yaw_deg(attempt_index))) * gripper.orientation);
  return out;
}

}  // namespace shared_dof
