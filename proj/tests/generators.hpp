#pragma once

// Seeded random generators for property tests.

#include <cmath>
#include <random>

#include "shared_dof/geometry.hpp"

namespace shared_dof::testing {

class Gen {
 public:
  explicit Gen(unsigned long long seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }

  Vector3d vec(double scale = 1.0) { return {uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale)}; }

  Vector3d unit_vector() {
    for (;;) {
      Vector3d v(normal(), normal(), normal());
      if (v.norm() > 1e-6) return v.normalized();
    }
  }

  Quaterniond orientation() {
    Eigen::Vector4d c(normal(), normal(), normal(), normal());
    c.normalize();
    return canonical(Quaterniond(c(0), c(1), c(2), c(3)));
  }

  Twist twist(double scale = 1.0) { return {vec(scale), vec(scale), uniform(-scale, scale)}; }

  Pose pose(const WorkspaceLimits& lim = {}) {
    Pose p;
    p.position = {uniform(lim.min_corner.x(), lim.max_corner.x()), uniform(lim.min_corner.y(), lim.max_corner.y()),
                  uniform(lim.min_corner.z(), lim.max_corner.z())};
    p.orientation = orientation();
    p.aperture = uniform(0.0, 1.0);
    return p;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace shared_dof::testing
