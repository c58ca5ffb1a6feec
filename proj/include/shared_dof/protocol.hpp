#pragma once

// Session service protocol (shared-dof.v1), independent of the transport.
//
// One SessionHost serves one client connection: it parses client messages,
// coalesces input between ticks (latest axes win, button edges accumulate),
// advances the session once per tick and produces the outgoing messages.

#include <atomic>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "shared_dof/cues.hpp"
#include "shared_dof/runner.hpp"
#include "shared_dof/scenario_io.hpp"
#include "shared_dof/telemetry.hpp"

namespace shared_dof {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::string_view kSubprotocol = "shared-dof.v1";

struct HostOptions {
  double tick_rate_hz = 20.0;
  double idle_teardown_s = 600.0;  // wall time without client messages
};

inline std::string next_session_id() {
  static std::atomic<unsigned long long> counter{0};
  return "s-" + std::to_string(++counter);
}

inline json error_message(std::string_view code, std::string_view message,
                          const std::optional<std::string>& session_id = std::nullopt) {
  json j{{"type", "error"}, {"code", code}, {"message", message}};
  if (session_id) j["session_id"] = *session_id;
  return j;
}

inline SessionConfig session_config_from_json(const json& j) {
  SessionConfig cfg;
  if (j.is_null()) return cfg;
  if (!j.is_object()) throw Error(ErrorCode::InvalidInput, "config must be an object");
  if (auto it = j.find("variant"); it != j.end()) {
    auto v = parse_variant(it->get<std::string>());
    if (!v) throw Error(ErrorCode::InvalidMode, "unknown variant '" + it->get<std::string>() + "'");
    cfg.controller.variant = *v;
  }
  if (auto it = j.find("idle_timeout"); it != j.end()) cfg.controller.idle_timeout = it->get<double>();
  if (auto it = j.find("threshold_angle"); it != j.end()) cfg.controller.threshold_angle = it->get<double>();
  if (auto it = j.find("speed_scale"); it != j.end()) cfg.controller.speed_scale = it->get<double>();
  cfg.controller.validate();
  return cfg;
}

inline json session_config_to_json(const SessionConfig& cfg) {
  return {{"variant", std::string(to_string(cfg.controller.variant))},
          {"idle_timeout", cfg.controller.idle_timeout},
          {"threshold_angle", cfg.controller.threshold_angle},
          {"speed_scale", cfg.controller.speed_scale}};
}

inline json state_message(const std::string& session_id, const Session& session) {
  const SessionState& s = session.state();
  json objects = json::array();
  for (const auto& o : s.scene.objects)
    objects.push_back({{"id", o.id},
                       {"position", detail::to_json(o.position)},
                       {"orientation", detail::to_json(o.orientation)},
                       {"half_extents", detail::to_json(o.half_extents)},
                       {"attached", o.attached},
                       {"color_tag", o.color_tag}});
  json zones = json::array();
  for (const auto& z : s.scene.zones)
    zones.push_back({{"id", z.id}, {"center", detail::to_json(z.center)}, {"radius", z.radius}, {"color_tag", z.color_tag}});
  json columns = json::array();
  for (const auto& c : s.mapping.columns) columns.push_back(twist_to_json(c));

  json exposed = nullptr;
  if (auto shown = exposed_suggestion(s, session.config())) {
    json ranked = json::array();
    for (const auto& t : shown->ranked) ranked.push_back(twist_to_json(t));
    exposed = {{"epoch", shown->epoch},
               {"top_candidate_id", shown->top_candidate_id},
               {"confidence", shown->confidence},
               {"ranked", ranked}};
  }
  const json tick = session.log().empty() ? json(nullptr) : json(session.log().back().tick);
  return {{"type", "state"},
          {"session_id", session_id},
          {"tick", tick},
          {"sim_time_s", session.log().empty() ? 0.0 : session.log().back().sim_time_s},
          {"pose", pose_to_json(s.gripper)},
          {"objects", objects},
          {"zones", zones},
          {"phase", std::string(to_string(s.task.phase))},
          {"mapping", {{"source", s.mapping.source.label()}, {"columns", columns}}},
          {"exposed_suggestion", exposed},
          {"cues", cues_to_json(make_cues(s, session.config(), session.scenario().limits))},
          {"switches", {{"user", s.switch_count_user}, {"auto", s.switch_count_auto}}},
          {"metrics_so_far", metrics_to_json(session.metrics())}};
}

class SessionHost {
 public:
  explicit SessionHost(HostOptions options = {}) : options_(options) {}

  /// Handle one client text message; returns the replies.
  std::vector<std::string> handle(std::string_view text) {
    std::vector<std::string> out;
    if (closed_) return out;
    ticks_since_message_ = 0;

    json msg;
    try {
      msg = json::parse(text);
    } catch (const json::parse_error& e) {
      return fail("protocol", std::string("malformed JSON: ") + e.what());
    }
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
      return fail("protocol", "message must be an object with a string 'type'");
    const std::string type = msg["type"].get<std::string>();

    if (!greeted_) {
      if (type != "hello") return fail("protocol", "first message must be hello");
      const json v = msg.value("protocol_version", json(nullptr));
      if (!v.is_number_integer() || v.get<int>() != kProtocolVersion)
        return fail("version", "unsupported protocol_version; server speaks " + std::to_string(kProtocolVersion));
      greeted_ = true;
      out.push_back(json{{"type", "event"}, {"kind", "HelloAck"}, {"protocol_version", kProtocolVersion}}.dump());
      return out;
    }

    if (type == "hello") {
      out.push_back(error_message("protocol_state", "hello already received", session_id_).dump());
      return out;
    }
    if (type == "create_session") return create(msg);
    if (type == "bye") {
      closed_ = true;
      out.push_back(bye("client closed"));
      return out;
    }

    const bool session_message =
        type == "input" || type == "perspective_request" || type == "pause" || type == "resume";
    if (!session_message) {
      out.push_back(error_message("unknown_type", "unknown message type '" + type + "'", session_id_).dump());
      return out;
    }
    if (!session_) {
      out.push_back(error_message("no_session", "create_session first").dump());
      return out;
    }
    if (msg.value("session_id", std::string()) != *session_id_) {
      out.push_back(error_message("session", "missing or foreign session_id", session_id_).dump());
      return out;
    }

    if (type == "input") {
      try {
        coalesce(msg);
      } catch (const std::exception& e) {
        out.push_back(error_message("bad_request", e.what(), session_id_).dump());
      }
    } else if (type == "perspective_request") {
      pending_.buttons.perspective = true;
    } else if (type == "pause") {
      paused_ = true;
    } else if (type == "resume") {
      paused_ = false;
    }
    return out;
  }

  /// One tick of the fixed-rate loop.
  std::vector<std::string> tick() {
    std::vector<std::string> out;
    if (closed_) return out;
    ticks_since_message_ += 1;
    if (static_cast<double>(ticks_since_message_) >= options_.idle_teardown_s * options_.tick_rate_hz) {
      closed_ = true;
      out.push_back(bye("idle timeout"));
      return out;
    }
    if (!session_ || paused_ || session_->done()) return out;

    const InputFrame input = pending_;
    pending_ = InputFrame{};
    pending_.source = InputSource::Human;
    const TickRecord& rec = session_->step(input);
    for (const auto& e : rec.events) {
      json ev = event_to_json(e);
      ev["type"] = "event";
      ev["session_id"] = *session_id_;
      ev["tick"] = rec.tick;
      out.push_back(ev.dump());
    }
    out.push_back(state_message(*session_id_, *session_).dump());
    return out;
  }

  bool closed() const { return closed_; }
  const Session* session() const { return session_.get(); }
  const std::optional<std::string>& session_id() const { return session_id_; }
  const HostOptions& options() const { return options_; }

 private:
  std::vector<std::string> fail(std::string_view code, const std::string& message) {
    closed_ = true;
    return {error_message(code, message, session_id_).dump(), bye(message)};
  }

  std::string bye(std::string_view reason) const {
    json j{{"type", "bye"}, {"reason", reason}};
    if (session_id_) j["session_id"] = *session_id_;
    return j.dump();
  }

  std::vector<std::string> create(const json& msg) {
    if (session_) return {error_message("session", "session already created", session_id_).dump()};
    try {
      const json& sc = msg.value("scenario", json("canonical"));
      Scenario scenario;
      if (sc.is_string()) {
        const auto name = sc.get<std::string>();
        if (name != "canonical" && name != "deadlock") throw Error(ErrorCode::Validation, "unknown scenario '" + name + "'");
        scenario = resolve_scenario(name);
      } else {
        scenario = scenario_from_json(sc);
      }
      const SessionConfig cfg = session_config_from_json(msg.value("config", json(nullptr)));
      const auto seed = msg.value("seed", 0ULL);
      session_ = std::make_unique<Session>(std::move(scenario), cfg, seed);
    } catch (const std::exception& e) {
      return {error_message("bad_request", e.what()).dump()};
    }
    session_id_ = next_session_id();
    pending_.source = InputSource::Human;
    json ack{{"type", "event"},
             {"kind", "SessionCreated"},
             {"session_id", *session_id_},
             {"scenario", session_->scenario().name},
             {"config", session_config_to_json(session_->config())},
             {"tick_dt", session_->scenario().tick_dt},
             {"tick_rate_hz", options_.tick_rate_hz}};
    return {ack.dump(), state_message(*session_id_, *session_).dump()};
  }

  void coalesce(const json& msg) {
    if (auto it = msg.find("axes"); it != msg.end()) {
      if (!it->is_array() || it->size() != 2) throw Error(ErrorCode::InvalidInput, "axes must be [a, b]");
      pending_.axes = {(*it)[0].get<double>(), (*it)[1].get<double>()};
    }
    if (auto it = msg.find("buttons"); it != msg.end()) {
      Buttons& b = pending_.buttons;
      b.mode_switch |= it->value("mode_switch", false);
      b.accept |= it->value("accept", false);
      b.request |= it->value("request", false);
      b.estop |= it->value("estop", false);
      b.perspective |= it->value("perspective", false);
    }
  }

  HostOptions options_;
  bool greeted_ = false;
  bool closed_ = false;
  bool paused_ = false;
  unsigned long long ticks_since_message_ = 0;
  std::unique_ptr<Session> session_;
  std::optional<std::string> session_id_;
  InputFrame pending_;
};

}  // namespace shared_dof
