#pragma once

// Simulated operators for headless benchmarking.
//
// The greedy user steers along whatever the active mapping offers toward the
// current task subgoal and reaches for a button (mode switch, request, accept,
// or deliberately waiting in admc_idle) when the mapping stops serving it.
// Button decisions lag by reaction_delay ticks.

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string_view>

#include "shared_dof/control.hpp"

namespace shared_dof {

enum class UserKind { Greedy, NoisyGreedy };

inline std::optional<UserKind> parse_user_kind(std::string_view s) {
  if (s == "greedy") return UserKind::Greedy;
  if (s == "noisy" || s == "noisy_greedy") return UserKind::NoisyGreedy;
  return std::nullopt;
}

struct UserPolicy {
  UserKind kind = UserKind::Greedy;
  double accept_margin = 0.05;
  unsigned reaction_delay = 4;  // ticks
  double noise_sigma = 0.1;
  double switch_gain_threshold = 0.2;
  double dead_zone = 0.02;
};

/// What the user can perceive of the session.
struct UserView {
  Pose gripper;
  Pose subgoal;
  Phase phase = Phase::Approach;
  const ActiveMapping* mapping = nullptr;
  std::optional<MappingSuggestion> exposed;
  Variant variant = Variant::Classic;
  Lambdas lambdas;
};

inline UserView view_of(const SessionState& s, const SessionConfig& cfg) {
  return {s.gripper, s.task.subgoal, s.task.phase, &s.mapping, exposed_suggestion(s, cfg), cfg.controller.variant,
          cfg.lambdas};
}

/// Weighted projections of `desired` onto the (orthonormal) mapping columns.
inline std::array<double, 2> project_onto(const ActiveMapping& m, const Twist& desired, const Lambdas& l) {
  std::array<double, 2> p{0.0, 0.0};
  for (std::size_t i = 0; i < m.columns.size() && i < 2; ++i) p[i] = weighted_dot(desired, m.columns[i], l);
  return p;
}

class SimUser {
 public:
  SimUser(UserPolicy policy, unsigned long long seed) : policy_(policy), rng_(seed) {}

  InputFrame decide(const UserView& view) {
    InputFrame frame;
    frame.source = InputSource::Simulated;
    if (view.phase == Phase::Done || view.mapping == nullptr) return frame;

    Twist desired;
    try {
      desired = goal_twist(view.gripper, view.subgoal, view.lambdas);
    } catch (const Error&) {
      pending_ticks_ = 0;
      return frame;
    }

    const auto proj = project_onto(*view.mapping, desired, view.lambdas);
    const double achievable = std::sqrt(proj[0] * proj[0] + proj[1] * proj[1]);

    Want want = Want::None;
    switch (view.variant) {
      case Variant::Classic:
        if (achievable < policy_.switch_gain_threshold) want = Want::ModeSwitch;
        break;
      case Variant::AdmcRequest:
        if (achievable + policy_.accept_margin < 1.0) want = Want::Request;
        break;
      case Variant::AdmcIdle:
        if (achievable + policy_.accept_margin < 1.0) want = Want::Wait;
        break;
      case Variant::AdmcContinuous:
      case Variant::AdmcThreshold:
        if (view.exposed && !view.exposed->ranked.empty() &&
            weighted_cos(view.exposed->ranked[0], desired, view.lambdas) > achievable + policy_.accept_margin)
          want = Want::Accept;
        break;
    }

    if (want == Want::Wait) {
      // Hands off the device so the idle timer can run.
      pending_ticks_ = 0;
      return frame;
    }

    for (std::size_t i = 0; i < 2; ++i) {
      double a = std::clamp(proj[i], -1.0, 1.0);
      if (std::abs(a) < policy_.dead_zone) a = 0.0;
      if (policy_.kind == UserKind::NoisyGreedy) a = std::clamp(a + noise_(rng_) * policy_.noise_sigma, -1.0, 1.0);
      frame.axes[i] = a;
    }

    if (want == Want::None) {
      pending_ticks_ = 0;
      return frame;
    }
    if (want != last_want_) pending_ticks_ = 0;
    last_want_ = want;
    pending_ticks_ += 1;
    if (pending_ticks_ > policy_.reaction_delay) {
      pending_ticks_ = 0;
      frame.buttons.mode_switch = want == Want::ModeSwitch;
      frame.buttons.request = want == Want::Request;
      frame.buttons.accept = want == Want::Accept;
    }
    return frame;
  }

  const UserPolicy& policy() const { return policy_; }

 private:
  enum class Want { None, ModeSwitch, Request, Accept, Wait };

  UserPolicy policy_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_{0.0, 1.0};
  unsigned pending_ticks_ = 0;
  Want last_want_ = Want::None;
};

}  // namespace shared_dof
