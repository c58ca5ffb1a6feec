#include <gtest/gtest.h>

#include "generators.hpp"
#include "shared_dof/runner.hpp"
#include "shared_dof/scenario_io.hpp"
#include "shared_dof/scene.hpp"

using namespace shared_dof;
using shared_dof::testing::Gen;

namespace {

SceneObject block_at(const Vector3d& p) {
  SceneObject o;
  o.id = "b";
  o.position = p;
  return o;
}

json canonical_doc() { return json::parse(kCanonicalScenario); }

void expect_validation_error(const json& doc) {
  try {
    load_scenario(doc.dump());
    FAIL() << "expected a validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Validation) << e.what();
  }
}

}  // namespace

// --- load_scenario ---------------------------------------------------------

TEST(LoadScenario, CanonicalHasOneObjectOneZone) {
  const Scenario sc = canonical_scenario();
  EXPECT_EQ(sc.objects.size(), 1u);
  EXPECT_EQ(sc.zones.size(), 1u);
  EXPECT_EQ(sc.objects[0].id, "blue_block");
  EXPECT_EQ(sc.zones[0].id, "red_zone");
  EXPECT_DOUBLE_EQ(sc.tick_dt, 0.05);
}

TEST(LoadScenario, DuplicateIdsRejected) {
  json doc = canonical_doc();
  json dup = doc["objects"][0];
  doc["objects"].push_back(dup);
  expect_validation_error(doc);
}

TEST(LoadScenario, ZeroTickDtRejected) {
  json doc = canonical_doc();
  doc["tick_dt"] = 0.0;
  expect_validation_error(doc);
}

TEST(LoadScenario, StartOutsideLimitsRejected) {
  json doc = canonical_doc();
  doc["start_pose"]["position"] = {5.0, 0.0, 0.3};
  expect_validation_error(doc);
}

TEST(LoadScenario, MalformedJsonIsParseError) {
  try {
    load_scenario("{\"name\": ");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Parse);
  }
}

TEST(LoadScenario, RoundTripThroughJson) {
  const Scenario a = canonical_scenario();
  const Scenario b = scenario_from_json(scenario_to_json(a));
  EXPECT_EQ(scenario_to_json(a), scenario_to_json(b));
}

TEST(LoadScenario, ShippedFilesMatchBuiltins) {
  const std::string dir = SHARED_DOF_SCENARIO_DIR;
  EXPECT_EQ(scenario_to_json(load_scenario_file(dir + "/canonical.json")), scenario_to_json(canonical_scenario()));
  EXPECT_EQ(scenario_to_json(load_scenario_file(dir + "/deadlock.json")), scenario_to_json(deadlock_scenario()));
}

TEST(LoadScenario, ResolveFallsBackToBuiltinForMissingFile) {
  EXPECT_EQ(resolve_scenario("definitely/not/here/canonical.json").name, canonical_scenario().name);
  EXPECT_THROW(resolve_scenario("definitely/not/here/other.json"), Error);
}

// --- grasp_check -----------------------------------------------------------

TEST(GraspCheck, AtObjectClosed) {
  const SceneObject o = block_at({0.4, 0.2, 0.05});
  EXPECT_TRUE(grasp_check({o.position, o.orientation, 0.2}, o, 0.02, deg_to_rad(15)));
}

TEST(GraspCheck, TooFar) {
  const SceneObject o = block_at({0.4, 0.2, 0.05});
  EXPECT_FALSE(grasp_check({o.position + Vector3d(0.1, 0, 0), o.orientation, 0.2}, o, 0.02, deg_to_rad(15)));
}

TEST(GraspCheck, GripperOpen) {
  const SceneObject o = block_at({0.4, 0.2, 0.05});
  EXPECT_FALSE(grasp_check({o.position, o.orientation, 0.9}, o, 0.02, deg_to_rad(15)));
}

// --- step_world ------------------------------------------------------------

TEST(StepWorld, GraspAttachesAndAdvances) {
  const Scenario sc = canonical_scenario();
  TaskState task = initial_task(sc);
  task.phase = Phase::Grasp;
  SceneState scene = make_scene_state(sc);
  const SceneObject& o = sc.objects[0];
  auto [t2, s2] = step_world(task, scene, {o.position, o.orientation, 0.1}, sc.limits);
  EXPECT_EQ(t2.phase, Phase::Transport);
  EXPECT_TRUE(s2.find_object(o.id)->attached);
}

TEST(StepWorld, AttachedObjectFollowsGripperRigidly) {
  const Scenario sc = canonical_scenario();
  TaskState task = initial_task(sc);
  task.phase = Phase::Grasp;
  SceneState scene = make_scene_state(sc);
  const SceneObject& o = sc.objects[0];
  Pose g{o.position + Vector3d(0.005, 0, 0), o.orientation, 0.1};
  std::tie(task, scene) = step_world(task, scene, g, sc.limits);
  ASSERT_TRUE(scene.find_object(o.id)->attached);

  // Translate by 5 cm: the object moves 5 cm.
  const Vector3d before = scene.find_object(o.id)->position;
  g.position += Vector3d(0.05, 0, 0);
  std::tie(task, scene) = step_world(task, scene, g, sc.limits);
  EXPECT_LT((scene.find_object(o.id)->position - before - Vector3d(0.05, 0, 0)).norm(), 1e-12);

  // Random rigid motions keep the relative transform constant.
  Gen gen(11);
  const Vector3d rel0 = g.orientation.conjugate() * (scene.find_object(o.id)->position - g.position);
  for (int i = 0; i < 200; ++i) {
    g.position = Vector3d(gen.uniform(-0.2, 0.7), gen.uniform(-0.5, 0.5), gen.uniform(0.1, 0.5));
    g.orientation = gen.orientation();
    std::tie(task, scene) = step_world(task, scene, g, sc.limits);
    const SceneObject& a = *scene.find_object(o.id);
    const Vector3d rel = g.orientation.conjugate() * (a.position - g.position);
    EXPECT_LT((rel - rel0).norm(), 1e-12);
  }
}

TEST(StepWorld, ReleaseOverZoneFinishes) {
  const Scenario sc = canonical_scenario();
  TaskState task = initial_task(sc);
  SceneState scene = make_scene_state(sc);
  const SceneObject& o = sc.objects[0];
  task.phase = Phase::Grasp;
  std::tie(task, scene) = step_world(task, scene, {o.position, o.orientation, 0.1}, sc.limits);
  ASSERT_EQ(task.phase, Phase::Transport);

  Pose g = task.subgoal;  // above the zone centre
  std::tie(task, scene) = step_world(task, scene, g, sc.limits);
  ASSERT_EQ(task.phase, Phase::Release);
  g.aperture = 0.75;
  std::tie(task, scene) = step_world(task, scene, g, sc.limits);
  EXPECT_EQ(task.phase, Phase::Done);
  EXPECT_FALSE(scene.find_object(o.id)->attached);
}

TEST(StepWorld, PhaseOrderAndReplayDeterminism) {
  const Scenario sc = canonical_scenario();
  SessionConfig cfg;
  cfg.controller.variant = Variant::AdmcContinuous;
  const RunResult r = run_with_user(sc, cfg, UserPolicy{}, 1);
  ASSERT_TRUE(r.success);

  // Replay the recorded gripper trajectory through the phase machine alone.
  TaskState task = initial_task(sc);
  SceneState scene = make_scene_state(sc);
  Phase last = task.phase;
  for (const auto& rec : r.log) {
    std::tie(task, scene) = step_world(task, scene, rec.gripper, sc.limits);
    EXPECT_EQ(task.phase, rec.phase) << "tick " << rec.tick;
    EXPECT_GE(static_cast<int>(task.phase), static_cast<int>(last));
    EXPECT_LE(static_cast<int>(task.phase) - static_cast<int>(last), 1);
    last = task.phase;
  }
  EXPECT_EQ(task.phase, Phase::Done);
}
