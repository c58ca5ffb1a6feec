#pragma once

// Pick-and-place world: objects, target zones and the task phase machine.

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shared_dof/error.hpp"
#include "shared_dof/geometry.hpp"

namespace shared_dof {

struct SceneObject {
  std::string id;
  Vector3d half_extents{0.025, 0.025, 0.025};
  Vector3d position = Vector3d::Zero();
  Quaterniond orientation = Quaterniond::Identity();
  bool graspable = true;
  bool attached = false;
  std::string color_tag;
};

struct TargetZone {
  std::string id;
  Vector3d center = Vector3d::Zero();
  double radius = 0.1;
  std::string color_tag;
};

struct Scenario {
  std::string name;
  std::vector<SceneObject> objects;
  std::vector<TargetZone> zones;
  Pose start_pose;
  WorkspaceLimits limits;
  double tick_dt = 0.05;
  unsigned long long seed = 0;
};

enum class Phase { Approach = 0, Grasp = 1, Transport = 2, Release = 3, Done = 4 };

inline std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Approach: return "Approach";
    case Phase::Grasp: return "Grasp";
    case Phase::Transport: return "Transport";
    case Phase::Release: return "Release";
    case Phase::Done: return "Done";
  }
  return "?";
}

struct TaskState {
  Phase phase = Phase::Approach;
  std::string active_object_id;
  std::string active_zone_id;
  Pose subgoal;
};

/// Mutable part of the world. The attached object's pose in the gripper frame
/// is fixed at attach time.
struct SceneState {
  std::vector<SceneObject> objects;
  std::vector<TargetZone> zones;
  Vector3d attach_offset = Vector3d::Zero();
  Quaterniond attach_rotation = Quaterniond::Identity();

  const SceneObject* find_object(std::string_view id) const {
    for (const auto& o : objects)
      if (o.id == id) return &o;
    return nullptr;
  }
  SceneObject* find_object(std::string_view id) {
    for (auto& o : objects)
      if (o.id == id) return &o;
    return nullptr;
  }
  const TargetZone* find_zone(std::string_view id) const {
    for (const auto& z : zones)
      if (z.id == id) return &z;
    return nullptr;
  }
  SceneObject* attached_object() {
    for (auto& o : objects)
      if (o.attached) return &o;
    return nullptr;
  }
};

struct TaskTolerances {
  double pos = 0.02;                   // m
  double ang = deg_to_rad(15.0);       // rad
  double closed_below = 0.3;           // aperture counted as closed on an object
  double release_above = 0.7;          // aperture that lets go
  double approach_height = 0.08;       // pre-grasp and transport clearance, m
};

// ---------------------------------------------------------------------------
// Subgoals

inline Pose pregrasp_pose(const SceneObject& obj, const TaskTolerances& tol, const WorkspaceLimits& lim) {
  return {lim.clamp(obj.position + Vector3d(0.0, 0.0, tol.approach_height)), canonical(obj.orientation), 1.0};
}

inline Pose grasp_pose(const SceneObject& obj, const WorkspaceLimits& lim) {
  return {lim.clamp(obj.position), canonical(obj.orientation), 0.0};
}

/// Carry pose over a zone; orientation and aperture are held at their current values.
inline Pose transport_pose(const TargetZone& zone, const Pose& gripper, const TaskTolerances& tol,
                           const WorkspaceLimits& lim) {
  return {lim.clamp(zone.center + Vector3d(0.0, 0.0, tol.approach_height)), gripper.orientation,
          gripper.aperture};
}

inline Pose release_pose(const Pose& gripper) { return {gripper.position, gripper.orientation, 1.0}; }

inline bool within_pose_tolerance(const Pose& gripper, const Pose& target, const TaskTolerances& tol) {
  return (gripper.position - target.position).norm() <= tol.pos &&
         angle_between(gripper.orientation, target.orientation) <= tol.ang;
}

// ---------------------------------------------------------------------------
// Operations

inline bool grasp_check(const Pose& gripper, const SceneObject& object, double tol_pos, double tol_ang,
                        double closed_below = 0.3) {
  return (gripper.position - object.position).norm() <= tol_pos &&
         angle_between(gripper.orientation, object.orientation) <= tol_ang && gripper.aperture < closed_below;
}

inline bool in_zone(const Vector3d& p, const TargetZone& zone) {
  return (p.head<2>() - zone.center.head<2>()).norm() <= zone.radius;
}

inline SceneState make_scene_state(const Scenario& sc) { return {sc.objects, sc.zones, {}, {}}; }

/// Initial task: first graspable object to first zone.
inline TaskState initial_task(const Scenario& sc, const TaskTolerances& tol = {}) {
  TaskState task;
  for (const auto& o : sc.objects) {
    if (o.graspable) {
      task.active_object_id = o.id;
      task.subgoal = pregrasp_pose(o, tol, sc.limits);
      break;
    }
  }
  if (task.active_object_id.empty()) throw Error(ErrorCode::Validation, "scenario has no graspable object");
  if (sc.zones.empty()) throw Error(ErrorCode::Validation, "scenario has no target zone");
  task.active_zone_id = sc.zones.front().id;
  return task;
}

/// Re-place the attached object rigidly relative to the gripper.
inline void sync_attached(SceneState& scene, const Pose& gripper) {
  if (SceneObject* obj = scene.attached_object()) {
    obj->position = gripper.position + gripper.orientation * scene.attach_offset;
    obj->orientation = canonical(gripper.orientation * scene.attach_rotation);
  }
}

/// One step of the phase machine. At most one phase transition per call.
inline std::pair<TaskState, SceneState> step_world(TaskState task, SceneState scene, const Pose& gripper,
                                                   const WorkspaceLimits& limits, const TaskTolerances& tol = {}) {
  if (task.phase == Phase::Done) return {std::move(task), std::move(scene)};

  SceneObject* obj = scene.find_object(task.active_object_id);
  const TargetZone* zone = scene.find_zone(task.active_zone_id);
  if (obj == nullptr || zone == nullptr) throw Error(ErrorCode::Validation, "task refers to unknown ids");

  sync_attached(scene, gripper);

  switch (task.phase) {
    case Phase::Approach:
      if (within_pose_tolerance(gripper, task.subgoal, tol) && gripper.aperture >= tol.release_above) {
        task.phase = Phase::Grasp;
        task.subgoal = grasp_pose(*obj, limits);
      }
      break;
    case Phase::Grasp:
      if (obj->graspable && !obj->attached && grasp_check(gripper, *obj, tol.pos, tol.ang, tol.closed_below)) {
        const Quaterniond inv = gripper.orientation.conjugate();
        scene.attach_offset = inv * (obj->position - gripper.position);
        scene.attach_rotation = inv * obj->orientation;
        obj->attached = true;
        task.phase = Phase::Transport;
        task.subgoal = transport_pose(*zone, gripper, tol, limits);
      }
      break;
    case Phase::Transport:
      if ((gripper.position - task.subgoal.position).norm() <= tol.pos) {
        task.phase = Phase::Release;
        task.subgoal = release_pose(gripper);
      }
      break;
    case Phase::Release:
      // An object let go outside the zone stays where it fell; the task cannot finish.
      if (obj->attached && gripper.aperture > tol.release_above) {
        obj->attached = false;
        if (in_zone(obj->position, *zone)) task.phase = Phase::Done;
      }
      break;
    case Phase::Done:
      break;
  }
  return {std::move(task), std::move(scene)};
}

}  // namespace shared_dof
