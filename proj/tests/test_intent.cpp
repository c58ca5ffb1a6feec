#include <gtest/gtest.h>

#include "generators.hpp"
#include "shared_dof/control.hpp"
#include "shared_dof/intent.hpp"
#include "shared_dof/scenario_io.hpp"

using namespace shared_dof;
using shared_dof::testing::Gen;

namespace {

SceneState scene_with(std::vector<Vector3d> positions) {
  SceneState s;
  char id = 'a';
  for (const auto& p : positions) {
    SceneObject o;
    o.id = std::string(1, id++);
    o.position = p;
    s.objects.push_back(o);
  }
  TargetZone z;
  z.id = "zone";
  z.center = {0, -0.5, 0};
  s.zones.push_back(z);
  return s;
}

TaskState approach_task(const std::string& object_id = "a") {
  TaskState t;
  t.phase = Phase::Approach;
  t.active_object_id = object_id;
  t.active_zone_id = "zone";
  return t;
}

IntentDistribution two_way(double pa, double pb) { return {{{"a", pa}, {"b", pb}}, 0.2}; }

double sum(const IntentDistribution& d) {
  double s = 0.0;
  for (const auto& e : d.entries) s += e.second;
  return s;
}

}  // namespace

// --- sense -----------------------------------------------------------------

TEST(Sense, ObjectOnAxis) {
  const auto c = sense(Pose{}, scene_with({{0.3, 0, 0}}), ViewModel{}, approach_task());
  ASSERT_EQ(c.size(), 1u);
  EXPECT_NEAR(c[0].bearing_cos, 1.0, 1e-15);
  EXPECT_NEAR(c[0].distance, 0.3, 1e-15);
}

TEST(Sense, ObjectBehindIsInvisible) {
  EXPECT_TRUE(sense(Pose{}, scene_with({{-0.3, 0, 0}}), ViewModel{}, approach_task()).empty());
}

TEST(Sense, ObjectBeyondRangeIsInvisible) {
  EXPECT_TRUE(sense(Pose{}, scene_with({{2.0, 0, 0}}), ViewModel{}, approach_task()).empty());
}

TEST(Sense, SymmetricPairScoresEqual) {
  const double a = deg_to_rad(20);
  auto c = sense(Pose{}, scene_with({{0.4 * std::cos(a), 0.4 * std::sin(a), 0}, {0.4 * std::cos(a), -0.4 * std::sin(a), 0}}),
                 ViewModel{}, approach_task());
  ASSERT_EQ(c.size(), 2u);
  const auto d = score(c, 0.5, 0.5, 0.2, 1.5);
  EXPECT_DOUBLE_EQ(c[0].score, c[1].score);
  EXPECT_DOUBLE_EQ(d.entries[0].second, 0.5);
}

// --- score / softmax -------------------------------------------------------

TEST(Score, SingleCandidateIsCertain) {
  auto c = sense(Pose{}, scene_with({{0.3, 0.05, 0}}), ViewModel{}, approach_task());
  const auto d = score(c, 0.5, 0.5, 0.2, 1.5);
  EXPECT_DOUBLE_EQ(d.entries[0].second, 1.0);
}

TEST(Score, EmptyIsNoIntent) {
  std::vector<Candidate> none;
  try {
    score(none, 0.5, 0.5, 0.2, 1.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoIntent);
  }
}

TEST(Score, SoftmaxHandComputed) {
  const auto d = softmax({{"a", 0.9}, {"b", 0.5}}, 0.2);
  const double expected = std::exp(2.0) / (std::exp(2.0) + 1.0);
  EXPECT_NEAR(d.probability("a"), expected, 1e-12);
  EXPECT_NEAR(d.probability("b"), 1.0 - expected, 1e-12);
  EXPECT_NEAR(d.probability("a"), 0.881, 5e-4);
}

TEST(Score, TieBreaksToSmallestId) {
  EXPECT_EQ(softmax({{"b", 0.3}, {"a", 0.3}}, 0.2).top_id(), "a");
}

TEST(ScoreProperty, SumsToOneAndScaleInvariantArgmax) {
  Gen g(21);
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::pair<std::string, double>> s;
    const int n = 1 + static_cast<int>(g.uniform(0, 5));
    for (int k = 0; k < n; ++k) s.emplace_back("c" + std::to_string(k), g.uniform(-1, 1));
    const double t = g.uniform(0.05, 1.0);
    const double c = g.uniform(0.1, 10.0);
    auto scaled = s;
    for (auto& e : scaled) e.second *= c;
    const auto d1 = softmax(s, t);
    const auto d2 = softmax(scaled, t * c);
    EXPECT_NEAR(sum(d1), 1.0, 1e-9);
    EXPECT_EQ(d1.top_id(), d2.top_id());
  }
}

// --- suggest ---------------------------------------------------------------

TEST(Suggest, SingleBlockAheadTranslatesTowardIt) {
  const SceneState scene = scene_with({{0.3, 0, 0}});
  TaskState task = approach_task();
  task.phase = Phase::Grasp;
  task.subgoal = grasp_pose(scene.objects[0], WorkspaceLimits{});
  const Pose gripper{{0, 0, 0}, Quaterniond::Identity(), 0.0};
  const auto m = suggest(gripper, scene, task, softmax({{"a", 1.0}}, 0.2), 0, SuggestContext{});
  EXPECT_DOUBLE_EQ(m.confidence, 1.0);
  EXPECT_EQ(m.top_candidate_id, "a");
  EXPECT_NEAR(m.ranked[0].linear.x(), 1.0, 1e-12);
  EXPECT_NEAR(m.ranked[0].angular.norm(), 0.0, 1e-12);
}

TEST(Suggest, YawMisalignmentDominatesRankOne) {
  const SceneState scene = scene_with({{0.3, 0, 0}});
  TaskState task = approach_task();
  const SuggestContext ctx;
  task.subgoal = pregrasp_pose(scene.objects[0], ctx.tol, ctx.limits);
  Pose gripper = task.subgoal;
  gripper.orientation = Quaterniond(Eigen::AngleAxisd(kPi / 2, Vector3d::UnitZ())) * task.subgoal.orientation;
  const auto m = suggest(gripper, scene, task, softmax({{"a", 1.0}}, 0.2), 0, ctx);
  const Vector7d w = weighted_components(m.ranked[0], ctx.lambdas);
  Eigen::Index arg = 0;
  w.cwiseAbs().maxCoeff(&arg);
  EXPECT_EQ(arg, 5);  // yaw
}

TEST(Suggest, InsideGraspToleranceClosesGripper) {
  const SceneState scene = scene_with({{0.3, 0, 0.05}});
  TaskState task = approach_task();
  task.phase = Phase::Grasp;
  task.subgoal = grasp_pose(scene.objects[0], WorkspaceLimits{});
  Pose gripper = task.subgoal;
  gripper.position += Vector3d(0.005, 0, 0);
  gripper.aperture = 0.8;
  const SuggestContext ctx;
  const auto m = suggest(gripper, scene, task, softmax({{"a", 1.0}}, 0.2), 0, ctx);
  const Twist& r = m.ranked[0];
  EXPECT_TRUE(r.linear.isZero(0.0));
  EXPECT_TRUE(r.angular.isZero(0.0));
  EXPECT_LT(r.aperture_rate, 0.0);
  // Direction (0,0,0,0,0,0,-1) in the weighted metric.
  EXPECT_NEAR(weighted_components(r, ctx.lambdas)(6), -1.0, 1e-12);
}

TEST(SuggestProperty, OrthonormalColumnsAndMonotoneEpoch) {
  Gen g(22);
  const SuggestContext ctx;
  unsigned long long epoch = 0;
  for (int i = 0; i < 1000; ++i) {
    const SceneState scene = scene_with({g.vec(0.5) + Vector3d(0.4, 0, 0.3), g.vec(0.5) + Vector3d(0.4, 0, 0.3)});
    TaskState task = approach_task(i % 2 ? "a" : "b");
    task.phase = static_cast<Phase>(i % 4);
    task.subgoal = g.pose();
    const Pose gripper = g.pose();
    const double p = g.uniform(0.0, 1.0);
    const auto m = suggest(gripper, scene, task, two_way(p, 1.0 - p), epoch, ctx);
    EXPECT_EQ(m.epoch, epoch + 1);
    epoch = m.epoch;
    ASSERT_EQ(m.ranked.size(), 2u);
    EXPECT_LT(std::abs(weighted_norm(m.ranked[0], ctx.lambdas) - 1.0), 1e-9);
    EXPECT_LT(std::abs(weighted_norm(m.ranked[1], ctx.lambdas) - 1.0), 1e-9);
    EXPECT_LT(std::abs(weighted_dot(m.ranked[0], m.ranked[1], ctx.lambdas)), 1e-9);
  }
}

// --- nudge_confidence ------------------------------------------------------

TEST(Nudge, ClosedFormTowardCandidate) {
  const SceneState scene = scene_with({{0.3, 0, 0}, {-0.3, 0, 0}});
  const auto d = nudge_confidence(two_way(0.5, 0.5), Twist::translation({1, 0, 0}), Pose{}, scene, 1.0);
  const double e = std::exp(1.0);
  EXPECT_NEAR(d.probability("a"), e / (e + 1.0 / e), 1e-12);
  EXPECT_NEAR(d.probability("a"), 0.881, 5e-4);
}

TEST(Nudge, ZeroEtaAndZeroTwistAreIdentity) {
  const SceneState scene = scene_with({{0.3, 0, 0}, {-0.3, 0, 0}});
  const auto d = two_way(0.3, 0.7);
  EXPECT_EQ(nudge_confidence(d, Twist::translation({1, 0, 0}), Pose{}, scene, 0.0).entries, d.entries);
  EXPECT_EQ(nudge_confidence(d, Twist{}, Pose{}, scene, 1.0).entries, d.entries);
}

TEST(Nudge, SingleCandidateStaysCertain) {
  const SceneState scene = scene_with({{0.3, 0, 0}});
  const IntentDistribution d{{{"a", 1.0}}, 0.2};
  EXPECT_DOUBLE_EQ(nudge_confidence(d, Twist::translation({0, 1, 0}), Pose{}, scene, 1.0).entries[0].second, 1.0);
}

TEST(NudgeProperty, AlignedInputConvergesMonotonically) {
  const SceneState scene = scene_with({{0.3, 0.2, 0}, {0.3, -0.2, 0}});
  IntentDistribution d = two_way(0.5, 0.5);
  const Twist toward_a = Twist::translation(Vector3d(0.3, 0.2, 0).normalized());
  double prev = d.probability("a");
  for (int i = 0; i < 100; ++i) {
    d = nudge_confidence(d, toward_a, Pose{}, scene, 0.1);
    EXPECT_NEAR(sum(d), 1.0, 1e-9);
    EXPECT_GE(d.probability("a"), prev);
    prev = d.probability("a");
  }
  EXPECT_GT(prev, 0.99);
}

TEST(NudgeProperty, InputAwayLowersProbability) {
  const SceneState scene = scene_with({{0.3, 0.2, 0}, {0.3, -0.2, 0}});
  const auto d = nudge_confidence(two_way(0.5, 0.5), Twist::translation({0, -1, 0}), Pose{}, scene, 0.5);
  EXPECT_LT(d.probability("a"), 0.5);
}

// --- change_perspective ----------------------------------------------------

TEST(ChangePerspective, FirstAttemptIsFifteenDegreeYaw) {
  const Pose p = change_perspective(Pose{}, 0);
  EXPECT_NEAR(angle_between(p.orientation, Quaterniond(Eigen::AngleAxisd(deg_to_rad(15), Vector3d::UnitZ()))), 0.0,
              1e-12);
  EXPECT_EQ(p.position, Pose{}.position);
}

TEST(ChangePerspective, Schedule) {
  EXPECT_DOUBLE_EQ(perspective_yaw_deg(0), 15.0);
  EXPECT_DOUBLE_EQ(perspective_yaw_deg(1), -30.0);
  EXPECT_DOUBLE_EQ(perspective_yaw_deg(2), 45.0);
}

TEST(ChangePerspectiveProperty, PositionBitIdentical) {
  Gen g(23);
  for (unsigned i = 0; i < 1000; ++i) {
    const Pose p = g.pose();
    const Pose q = change_perspective(p, i % 7);
    EXPECT_EQ(q.position, p.position);
    EXPECT_EQ(q.aperture, p.aperture);
  }
}

// --- deadlock --------------------------------------------------------------

TEST(Deadlock, SymmetricScoresThenUniqueTopAfterPerspectiveChange) {
  const Scenario sc = deadlock_scenario();
  SessionConfig cfg;
  cfg.controller.variant = Variant::AdmcIdle;
  SessionState s = start_session(sc, cfg);
  auto c = sense(s.gripper, s.scene, cfg.intent.view, s.task);
  ASSERT_EQ(c.size(), 2u);
  const auto d = score(c, cfg.intent.w_dist, cfg.intent.w_bearing, cfg.intent.temperature, cfg.intent.view.range);
  EXPECT_NEAR(d.entries[0].second, 0.5, 1e-9);
  EXPECT_NEAR(d.entries[1].second, 0.5, 1e-9);

  const Vector3d before = s.gripper.position;
  s = trigger_perspective_change(s, sc, cfg);
  EXPECT_EQ(s.gripper.position, before);
  ASSERT_TRUE(s.dist.has_value());
  EXPECT_GT(std::abs(s.dist->entries[0].second - s.dist->entries[1].second), 1e-6);
}
