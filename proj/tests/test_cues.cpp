#include <gtest/gtest.h>

#include "generators.hpp"
#include "shared_dof/cues.hpp"
#include "shared_dof/runner.hpp"

using namespace shared_dof;
using shared_dof::testing::Gen;

namespace {

constexpr std::array<VibroMode, 3> kModes = {VibroMode::Rabbit, VibroMode::Atm, VibroMode::Dual};

Vector3d direction_for(Octant o, int level) {
  const double z = level == 1 ? -0.6 : (level == 2 ? 0.0 : 0.6);
  const double az = deg_to_rad(octant_azimuth_deg(o));
  const double h = std::sqrt(1.0 - z * z);
  return {h * std::cos(az), h * std::sin(az), z};
}

double azimuth_gap_deg(double a, double b) {
  double d = std::fmod(std::abs(a - b), 360.0);
  return d > 180.0 ? 360.0 - d : d;
}

SessionConfig config(Variant v) {
  SessionConfig cfg;
  cfg.controller.variant = v;
  return cfg;
}

}  // namespace

// --- encode / decode -------------------------------------------------------

TEST(Vibro, EastLevelRabbit) {
  const VibroPattern p = encode_direction({1, 0, 0}, VibroMode::Rabbit);
  EXPECT_EQ(p.frames.size(), 6u);  // two sweeps of three pulses
  for (const auto& f : p.frames) {
    EXPECT_EQ(f.duration_ms, 60);
    EXPECT_DOUBLE_EQ(f.amplitude, 1.0);
  }
  EXPECT_EQ(p.frames[1].start_ms - p.frames[0].start_ms, 100);  // 60 ms pulse + 40 ms gap
  EXPECT_EQ(decode_pattern(p), (DecodedDirection{Octant::East, 2}));
}

TEST(Vibro, VerticalDualDefaultsNorth) {
  const VibroPattern p = encode_direction({0, 0, 1}, VibroMode::Dual);
  EXPECT_EQ(p.frames.size(), 9u);
  for (const auto& f : p.frames) EXPECT_DOUBLE_EQ(f.amplitude, 1.0);
  EXPECT_EQ(decode_pattern(p), (DecodedDirection{Octant::North, 3}));
}

TEST(Vibro, DiagonalUpIsEastLevelThree) {
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_EQ(decode_pattern(encode_direction({s, 0, s}, VibroMode::Rabbit)), (DecodedDirection{Octant::East, 3}));
}

TEST(Vibro, NorthViaApparentMotion) {
  const VibroPattern p = encode_direction({0, 1, 0}, VibroMode::Atm);
  ASSERT_EQ(p.frames.size(), 3u);
  EXPECT_EQ(p.frames[0].duration_ms, 120);
  EXPECT_EQ(p.frames[1].start_ms - p.frames[0].start_ms, 60);
  EXPECT_DOUBLE_EQ(p.frames[0].amplitude, 0.66);
  EXPECT_EQ(decode_pattern(p), (DecodedDirection{Octant::North, 2}));
}

TEST(Vibro, NonUnitIsInvalidDirection) {
  try {
    encode_direction({2, 0, 0}, VibroMode::Rabbit);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidDirection);
  }
}

TEST(Vibro, MalformedPatternsAreDecodeErrors) {
  VibroPattern p = encode_direction({1, 0, 0}, VibroMode::Rabbit);
  VibroPattern missing = p;
  missing.frames.pop_back();
  VibroPattern off_centre = p;
  off_centre.frames[1].actuator = 0;
  VibroPattern empty;
  for (const auto& bad : {missing, off_centre, empty}) {
    try {
      decode_pattern(bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::Decode);
    }
  }
}

TEST(VibroProperty, ExhaustiveRoundTrip) {
  int ok = 0;
  for (int o = 0; o < 8; ++o)
    for (int level = 1; level <= 3; ++level)
      for (VibroMode m : kModes) {
        const auto oct = static_cast<Octant>(o);
        const VibroPattern p = encode_direction(direction_for(oct, level), m);
        EXPECT_LE(p.total_ms(), 2000);
        for (std::size_t i = 1; i < p.frames.size(); ++i) EXPECT_LE(p.frames[i - 1].start_ms, p.frames[i].start_ms);
        const DecodedDirection d = decode_pattern(vibro_from_json(json::parse(vibro_to_json(p).dump())));
        if (d == DecodedDirection{oct, level}) ++ok;
      }
  EXPECT_EQ(ok, 72);
}

TEST(VibroProperty, RandomDirectionsDecodeWithinHalfOctant) {
  Gen g(31);
  for (int i = 0; i < 500; ++i) {
    Vector3d d = g.unit_vector();
    if (d.head<2>().norm() < 1e-6) continue;
    const DecodedDirection dec = decode_pattern(encode_direction(d, VibroMode::Dual));
    const double az = rad_to_deg(std::atan2(d.y(), d.x()));
    EXPECT_LE(azimuth_gap_deg(az, octant_azimuth_deg(dec.octant)), 22.5 + 1e-9);
    EXPECT_EQ(dec.level, gradient_level(d.z()));
  }
}

// --- visual cues -----------------------------------------------------------

TEST(Cues, ClassicModeOneLightsXAndY) {
  const Scenario sc = canonical_scenario();
  const SessionConfig cfg = config(Variant::Classic);
  const Cues c = make_cues(start_session(sc, cfg), cfg, sc.limits);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(c.indicator.lit(i), i < 2) << "dof " << i;
  EXPECT_FALSE(c.suggested.has_value());
  EXPECT_FALSE(c.ghost.has_value());
}

TEST(Cues, ThresholdBelowAngleShowsNoSuggestion) {
  const Scenario sc = canonical_scenario();
  const SessionConfig cfg = config(Variant::AdmcThreshold);
  SessionState s = advance(start_session(sc, cfg), InputFrame{}, sc, cfg, sc.tick_dt).first;
  ASSERT_TRUE(s.pending_suggestion.has_value());
  const Twist r1 = s.pending_suggestion->ranked[0];
  const Twist r2 = s.pending_suggestion->ranked[1];
  const double a = deg_to_rad(10.0);
  s.mapping.columns = {r1 * std::cos(a) + r2 * std::sin(a), r2 * std::cos(a) - r1 * std::sin(a)};
  const Cues c = make_cues(s, cfg, sc.limits);
  EXPECT_FALSE(c.suggested.has_value());
  EXPECT_FALSE(c.ghost.has_value());
}

TEST(Cues, GhostApproachesBlockAndMatchesIntegrate) {
  const Scenario sc = canonical_scenario();
  const SessionConfig cfg = config(Variant::AdmcContinuous);
  const SessionState s = advance(start_session(sc, cfg), InputFrame{}, sc, cfg, sc.tick_dt).first;
  const Cues c = make_cues(s, cfg, sc.limits);
  ASSERT_TRUE(c.ghost.has_value());
  const auto& samples = c.ghost->samples;
  const Vector3d block = sc.objects[0].position;
  for (std::size_t i = 1; i < samples.size(); ++i)
    EXPECT_LT((samples[i].position - block).norm(), (samples[i - 1].position - block).norm());

  // Cross-check against repeated integrate calls.
  const GhostSettings g;
  const double dt = g.horizon_s / static_cast<double>(g.samples - 1);
  Pose p = s.gripper;
  for (std::size_t i = 1; i < samples.size(); ++i) {
    p = integrate(p, c.suggested->direction * cfg.controller.speed_scale, dt, sc.limits);
    EXPECT_LT((samples[i].position - p.position).norm(), 1e-12);
    EXPECT_LT(angle_between(samples[i].orientation, p.orientation), 1e-12);
    EXPECT_LT(std::abs(samples[i].aperture - p.aperture), 1e-12);
  }
}

TEST(CuesProperty, NeverRevealUnexposedSuggestions) {
  const Scenario sc = canonical_scenario();
  for (Variant v : kAllVariants) {
    const SessionConfig cfg = config(v);
    Session session(sc, cfg);
    SimUser user(UserPolicy{}, 4);
    while (!session.done() && session.state().tick < 3000) {
      const Cues c = make_cues(session.state(), cfg, sc.limits);
      const bool exposed = exposed_suggestion(session.state(), cfg).has_value();
      EXPECT_EQ(c.suggested.has_value(), exposed) << to_string(v);
      EXPECT_EQ(c.ghost.has_value(), exposed) << to_string(v);
      if (!exposed) {
        const json j = cues_to_json(c);
        EXPECT_TRUE(j["suggested"].is_null());
        EXPECT_TRUE(j["ghost"].is_null());
      }
      session.step(user.decide(view_of(session.state(), cfg)));
    }
  }
}
