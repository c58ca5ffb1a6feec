#pragma once

// A session bundled with its log, and headless drivers on top of it.

#include <cstdint>
#include <vector>

#include "shared_dof/control.hpp"
#include "shared_dof/sim_user.hpp"
#include "shared_dof/telemetry.hpp"

namespace shared_dof {

class Session {
 public:
  Session(Scenario scenario, SessionConfig config, unsigned long long seed = 0)
      : scenario_(std::move(scenario)), config_(config), state_(start_session(scenario_, config_, seed)) {}

  /// Advance one tick and log it.
  const TickRecord& step(const InputFrame& input) {
    const InputFrame clamped = input.clamped();
    auto [next, events] = advance(std::move(state_), clamped, scenario_, config_, scenario_.tick_dt);
    state_ = std::move(next);
    // Adoption happens before motion within a tick, so the mapping after the
    // tick is the one that produced this tick's motion.
    const Twist twist = apply_input(state_.mapping, clamped, config_.controller);
    record(log_, make_record(state_, twist, std::move(events), scenario_.tick_dt));
    metrics_.add(log_.back(), scenario_.tick_dt);
    return log_.back();
  }

  bool done() const { return state_.task.phase == Phase::Done; }
  const SessionState& state() const { return state_; }
  const SessionLog& log() const { return log_; }
  const Metrics& metrics() const { return metrics_.metrics(); }
  const Scenario& scenario() const { return scenario_; }
  const SessionConfig& config() const { return config_; }

 private:
  Scenario scenario_;
  SessionConfig config_;
  SessionState state_;
  SessionLog log_;
  MetricsAccumulator metrics_;
};

struct RunResult {
  SessionLog log;
  Metrics metrics;
  unsigned long long ticks = 0;
  bool success = false;
};

inline unsigned long long user_seed(const Scenario& sc, unsigned long long seed) {
  // splitmix64 of the combined seeds
  std::uint64_t z = sc.seed * 0x9E3779B97F4A7C15ULL + seed + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Run one headless session driven by a simulated user.
inline RunResult run_with_user(const Scenario& sc, const SessionConfig& cfg, const UserPolicy& policy,
                               unsigned long long seed, unsigned long long ticks_max = 10000) {
  Session session(sc, cfg, seed);
  SimUser user(policy, user_seed(sc, seed));
  while (!session.done() && session.state().tick < ticks_max)
    session.step(user.decide(view_of(session.state(), cfg)));
  return {session.log(), session.metrics(), session.state().tick, session.done()};
}

/// Replay a recorded input schedule; stops early when the task completes.
inline RunResult run_with_inputs(const Scenario& sc, const SessionConfig& cfg, const std::vector<InputFrame>& inputs,
                                 unsigned long long seed = 0) {
  Session session(sc, cfg, seed);
  for (const auto& in : inputs) {
    if (session.done()) break;
    session.step(in);
  }
  return {session.log(), session.metrics(), session.state().tick, session.done()};
}

}  // namespace shared_dof
