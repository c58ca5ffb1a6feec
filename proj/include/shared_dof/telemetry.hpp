#pragma once

// Per-tick session logs, metrics and Classic-vs-ADMC comparison reports.
// Logs carry simulated time only, so the same session always serialises to
// the same bytes.

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shared_dof/control.hpp"
#include "shared_dof/error.hpp"
#include "shared_dof/scenario_io.hpp"

namespace shared_dof {

struct TickRecord {
  unsigned long long tick = 0;
  double sim_time_s = 0.0;
  Pose gripper;
  Twist twist;
  std::string mapping_source;
  std::optional<unsigned long long> suggestion_epoch;
  std::optional<double> suggestion_confidence;
  std::vector<Event> events;
  Phase phase = Phase::Approach;
};

struct Metrics {
  std::optional<double> completion_time_s;
  unsigned long long user_switches = 0;
  unsigned long long auto_switches = 0;
  double path_length_m = 0.0;
  double angular_path_rad = 0.0;
  double idle_time_s = 0.0;
  unsigned long long perspective_changes = 0;
  bool success = false;
};

using SessionLog = std::vector<TickRecord>;

// ---------------------------------------------------------------------------
// Serialisation

inline json event_to_json(const Event& e) {
  json j{{"kind", std::string(event_kind(e))}};
  if (auto* s = std::get_if<SuggestionUpdated>(&e)) {
    j["epoch"] = s->epoch;
    j["top_candidate_id"] = s->top_candidate_id;
    j["confidence"] = s->confidence;
  } else if (auto* m = std::get_if<MappingAdopted>(&e)) {
    j["by"] = m->by_user ? "user" : "auto";
    j["source"] = m->source;
  } else if (auto* p = std::get_if<PhaseChanged>(&e)) {
    j["from"] = std::string(to_string(p->from));
    j["to"] = std::string(to_string(p->to));
  } else if (auto* v = std::get_if<PerspectiveChanged>(&e)) {
    j["attempt"] = v->attempt;
    j["yaw_deg"] = v->yaw_deg;
  }
  return j;
}

inline std::optional<Phase> parse_phase(std::string_view s) {
  for (Phase p : {Phase::Approach, Phase::Grasp, Phase::Transport, Phase::Release, Phase::Done})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

inline Event event_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "SuggestionUpdated")
    return SuggestionUpdated{j.at("epoch").get<unsigned long long>(), j.at("top_candidate_id").get<std::string>(),
                             j.at("confidence").get<double>()};
  if (kind == "MappingAdopted") return MappingAdopted{j.at("by").get<std::string>() == "user", j.at("source").get<std::string>()};
  if (kind == "PhaseChanged") {
    auto from = parse_phase(j.at("from").get<std::string>());
    auto to = parse_phase(j.at("to").get<std::string>());
    if (!from || !to) throw Error(ErrorCode::Parse, "unknown phase in PhaseChanged");
    return PhaseChanged{*from, *to};
  }
  if (kind == "TaskDone") return TaskDone{};
  if (kind == "PerspectiveChanged") return PerspectiveChanged{j.at("attempt").get<unsigned>(), j.at("yaw_deg").get<double>()};
  throw Error(ErrorCode::Parse, "unknown event kind '" + kind + "'");
}

inline json record_to_json(const TickRecord& r) {
  json events = json::array();
  for (const auto& e : r.events) events.push_back(event_to_json(e));
  return {{"tick", r.tick},
          {"sim_time_s", r.sim_time_s},
          {"gripper", pose_to_json(r.gripper)},
          {"twist", twist_to_json(r.twist)},
          {"mapping_source", r.mapping_source},
          {"suggestion_epoch", r.suggestion_epoch ? json(*r.suggestion_epoch) : json(nullptr)},
          {"suggestion_confidence", r.suggestion_confidence ? json(*r.suggestion_confidence) : json(nullptr)},
          {"events", events},
          {"phase", std::string(to_string(r.phase))}};
}

inline TickRecord record_from_json(const json& j) {
  TickRecord r;
  try {
    r.tick = j.at("tick").get<unsigned long long>();
    r.sim_time_s = j.at("sim_time_s").get<double>();
    r.gripper = pose_from_json(j.at("gripper"));
    const json& t = j.at("twist");
    r.twist.linear = detail::vec3_from(t.at("linear"), "twist.linear");
    r.twist.angular = detail::vec3_from(t.at("angular"), "twist.angular");
    r.twist.aperture_rate = t.at("aperture_rate").get<double>();
    r.mapping_source = j.at("mapping_source").get<std::string>();
    if (!j.at("suggestion_epoch").is_null()) r.suggestion_epoch = j.at("suggestion_epoch").get<unsigned long long>();
    if (!j.at("suggestion_confidence").is_null())
      r.suggestion_confidence = j.at("suggestion_confidence").get<double>();
    for (const auto& e : j.at("events")) r.events.push_back(event_from_json(e));
    auto phase = parse_phase(j.at("phase").get<std::string>());
    if (!phase) throw Error(ErrorCode::Parse, "unknown phase");
    r.phase = *phase;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("tick record: ") + e.what());
  }
  return r;
}

inline std::string to_jsonl(const SessionLog& log) {
  std::string out;
  for (const auto& r : log) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

inline SessionLog from_jsonl(std::string_view text) {
  SessionLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      log.push_back(record_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Parse, e.what());
    }
  }
  return log;
}

// ---------------------------------------------------------------------------
// Recording

inline TickRecord make_record(const SessionState& after, const Twist& twist, std::vector<Event> events, double dt) {
  TickRecord r;
  r.tick = after.tick - 1;
  r.sim_time_s = static_cast<double>(r.tick) * dt;
  r.gripper = after.gripper;
  r.twist = twist;
  r.mapping_source = after.mapping.source.label();
  if (after.pending_suggestion) {
    r.suggestion_epoch = after.pending_suggestion->epoch;
    r.suggestion_confidence = after.pending_suggestion->confidence;
  }
  r.events = std::move(events);
  r.phase = after.task.phase;
  return r;
}

/// Append-only.
inline void record(SessionLog& log, TickRecord r) {
  if (!log.empty() && r.tick != log.back().tick + 1)
    throw Error(ErrorCode::InvalidInput, "tick records must be consecutive");
  log.push_back(std::move(r));
}

// ---------------------------------------------------------------------------
// Metrics

/// Folds tick records into Metrics one at a time.
class MetricsAccumulator {
 public:
  void add(const TickRecord& r, double dt) {
    if (prev_) {
      m_.path_length_m += (r.gripper.position - prev_->position).norm();
      m_.angular_path_rad += angle_between(r.gripper.orientation, prev_->orientation);
    }
    prev_ = r.gripper;
    if (r.twist.is_zero()) m_.idle_time_s += dt;
    for (const auto& e : r.events) {
      if (auto* a = std::get_if<MappingAdopted>(&e)) (a->by_user ? m_.user_switches : m_.auto_switches) += 1;
      if (std::holds_alternative<PerspectiveChanged>(e)) m_.perspective_changes += 1;
      if (std::holds_alternative<TaskDone>(e) && !m_.success) {
        m_.success = true;
        m_.completion_time_s = r.sim_time_s;
      }
    }
  }
  const Metrics& metrics() const { return m_; }

 private:
  Metrics m_;
  std::optional<Pose> prev_;
};

/// Tick length recovered from the records (sim_time = tick * dt).
inline double infer_dt(const SessionLog& log) {
  for (const auto& r : log)
    if (r.tick > 0) return r.sim_time_s / static_cast<double>(r.tick);
  return 0.0;
}

inline Metrics summarize(const SessionLog& log, std::optional<double> dt = std::nullopt) {
  if (log.empty()) throw Error(ErrorCode::InvalidInput, "empty log");
  const double step = dt ? *dt : infer_dt(log);
  MetricsAccumulator acc;
  for (const auto& r : log) acc.add(r, step);
  return acc.metrics();
}

inline json metrics_to_json(const Metrics& m) {
  return {{"completion_time_s", m.completion_time_s ? json(*m.completion_time_s) : json(nullptr)},
          {"user_switches", m.user_switches},
          {"auto_switches", m.auto_switches},
          {"path_length_m", m.path_length_m},
          {"angular_path_rad", m.angular_path_rad},
          {"idle_time_s", m.idle_time_s},
          {"perspective_changes", m.perspective_changes},
          {"success", m.success}};
}

// ---------------------------------------------------------------------------
// Comparison

/// Mean metrics of one variant over its runs.
struct VariantSummary {
  std::string variant;
  std::size_t runs = 0;
  std::optional<double> completion_time_s;  // mean over successful runs
  double user_switches = 0.0;
  double auto_switches = 0.0;
  double path_length_m = 0.0;
  double success_rate = 0.0;
};

inline VariantSummary aggregate(const std::string& variant, const std::vector<Metrics>& runs) {
  VariantSummary s;
  s.variant = variant;
  s.runs = runs.size();
  if (runs.empty()) return s;
  double time_sum = 0.0;
  std::size_t successes = 0;
  for (const auto& m : runs) {
    s.user_switches += static_cast<double>(m.user_switches);
    s.auto_switches += static_cast<double>(m.auto_switches);
    s.path_length_m += m.path_length_m;
    if (m.success) {
      ++successes;
      time_sum += *m.completion_time_s;
    }
  }
  const double n = static_cast<double>(runs.size());
  s.user_switches /= n;
  s.auto_switches /= n;
  s.path_length_m /= n;
  s.success_rate = static_cast<double>(successes) / n;
  if (successes > 0) s.completion_time_s = time_sum / static_cast<double>(successes);
  return s;
}

struct MetricComparison {
  std::string metric;
  double classic = 0.0;
  double admc = 0.0;
  std::optional<double> ratio;  // admc / classic; absent when classic is zero or missing
  double delta = 0.0;           // admc - classic
};

struct Report {
  std::vector<VariantSummary> rows;  // classic first, then the others in name order
  std::map<std::string, std::vector<MetricComparison>> versus_classic;

  std::string to_csv() const;
  std::string to_text() const;
};

namespace detail {

inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& v) { return v ? fmt_num(*v) : "n/a"; }

}  // namespace detail

inline Report compare(const std::map<std::string, std::vector<Metrics>>& metrics_by_variant) {
  auto classic_it = metrics_by_variant.find("classic");
  if (classic_it == metrics_by_variant.end() || classic_it->second.empty())
    throw Error(ErrorCode::Report, "comparison needs a classic baseline");
  if (metrics_by_variant.size() < 2) throw Error(ErrorCode::Report, "comparison needs at least one admc variant");

  Report rep;
  const VariantSummary classic = aggregate("classic", classic_it->second);
  rep.rows.push_back(classic);
  for (const auto& [name, runs] : metrics_by_variant) {
    if (name == "classic") continue;
    const VariantSummary s = aggregate(name, runs);
    rep.rows.push_back(s);

    auto cmp = [](std::string metric, std::optional<double> c, std::optional<double> a) {
      MetricComparison m;
      m.metric = std::move(metric);
      m.classic = c.value_or(std::numeric_limits<double>::quiet_NaN());
      m.admc = a.value_or(std::numeric_limits<double>::quiet_NaN());
      m.delta = m.admc - m.classic;
      if (c && a && *c != 0.0) m.ratio = *a / *c;
      return m;
    };
    rep.versus_classic[name] = {
        cmp("completion_time_s", classic.completion_time_s, s.completion_time_s),
        cmp("user_switches", classic.user_switches, s.user_switches),
        cmp("auto_switches", classic.auto_switches, s.auto_switches),
        cmp("path_length_m", classic.path_length_m, s.path_length_m),
        cmp("success_rate", classic.success_rate, s.success_rate),
    };
  }
  return rep;
}

inline std::string Report::to_csv() const {
  std::string out = "variant,completion_time_s,user_switches,auto_switches,path_length_m,success_rate\n";
  for (const auto& r : rows) {
    out += r.variant + "," + detail::fmt_opt(r.completion_time_s) + "," + detail::fmt_num(r.user_switches) + "," +
           detail::fmt_num(r.auto_switches) + "," + detail::fmt_num(r.path_length_m) + "," +
           detail::fmt_num(r.success_rate) + "\n";
  }
  return out;
}

inline std::string Report::to_text() const {
  std::ostringstream os;
  os << "Comparison against classic mode switching\n";
  for (const auto& r : rows)
    os << "  " << r.variant << ": runs=" << r.runs << " time=" << detail::fmt_opt(r.completion_time_s)
       << "s user_switches=" << detail::fmt_num(r.user_switches) << " auto_switches="
       << detail::fmt_num(r.auto_switches) << " path=" << detail::fmt_num(r.path_length_m)
       << "m success=" << detail::fmt_num(r.success_rate) << "\n";
  for (const auto& [name, rows_] : versus_classic) {
    os << "\n" << name << " vs classic\n";
    for (const auto& m : rows_)
      os << "  " << m.metric << ": ratio=" << detail::fmt_opt(m.ratio) << " delta=" << detail::fmt_num(m.delta)
         << "\n";
    os << "  workload: n/a (not simulated)\n";
  }
  return os.str();
}

/// Single-run metrics as a one-row report CSV.
inline std::string metrics_csv(const std::string& variant, const Metrics& m) {
  return Report{{aggregate(variant, {m})}, {}}.to_csv();
}

}  // namespace shared_dof
