// shared_dof — headless runs, benchmark matrices and the WebSocket session server.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shared_dof.hpp"
#include "shared_dof/ws_server.hpp"

namespace fs = std::filesystem;
using namespace shared_dof;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitTimeout = 2;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string::npos) comma = s.size();
    if (comma > pos) out.push_back(s.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

/// SHARED_DOF_LOG_DIR, when set, replaces the directory part of `path`.
fs::path output_path(const fs::path& path) {
  if (const char* dir = std::getenv("SHARED_DOF_LOG_DIR"); dir != nullptr && *dir != '\0')
    return fs::path(dir) / path.filename();
  return path;
}

fs::path output_dir(const fs::path& dir) {
  if (const char* env = std::getenv("SHARED_DOF_LOG_DIR"); env != nullptr && *env != '\0') return fs::path(env);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write '" + path.string() + "'");
  out << content;
}

std::string stem_of(const std::string& scenario_arg, const Scenario& sc) {
  if (scenario_arg == "canonical" || scenario_arg == "deadlock") return scenario_arg;
  const std::string stem = fs::path(scenario_arg).stem().string();
  return stem.empty() ? sc.name : stem;
}

UserPolicy policy_for(const std::string& user) {
  UserPolicy p;
  p.kind = *parse_user_kind(user);
  return p;
}

SessionConfig config_for(Variant v) {
  SessionConfig cfg;
  cfg.controller.variant = v;
  return cfg;
}

struct RunOptions {
  std::string scenario = "canonical";
  std::string mode = "admc_continuous";
  std::string user = "greedy";
  unsigned long long seed = 42;
  unsigned long long ticks_max = 10000;
  std::string out;
};

int cmd_run(const RunOptions& o) {
  Scenario sc;
  try {
    sc = resolve_scenario(o.scenario);
  } catch (const std::exception& e) {
    std::cerr << "error: bad scenario '" << o.scenario << "': " << e.what() << "\n";
    return kExitError;
  }
  const Variant variant = *parse_variant(o.mode);
  const RunResult r = run_with_user(sc, config_for(variant), policy_for(o.user), o.seed, o.ticks_max);

  const fs::path log_path =
      output_path(o.out.empty() ? stem_of(o.scenario, sc) + "_" + o.mode + "_seed" + std::to_string(o.seed) + ".jsonl"
                                : o.out);
  fs::path csv_path = log_path;
  csv_path.replace_extension(".metrics.csv");
  write_file(log_path, to_jsonl(r.log));
  write_file(csv_path, metrics_csv(o.mode, r.metrics));

  std::cout << "scenario=" << sc.name << " mode=" << o.mode << " user=" << o.user << " seed=" << o.seed
            << " ticks=" << r.ticks << " success=" << (r.success ? "true" : "false");
  if (r.metrics.completion_time_s) std::cout << " completion_time_s=" << *r.metrics.completion_time_s;
  std::cout << " user_switches=" << r.metrics.user_switches << " auto_switches=" << r.metrics.auto_switches
            << "\nlog=" << log_path.string() << "\nmetrics=" << csv_path.string() << "\n";
  return r.success ? kExitOk : kExitTimeout;
}

struct BenchOptions {
  std::string scenarios = "canonical";
  std::string modes = "classic,admc_request,admc_idle,admc_continuous,admc_threshold";
  std::string user = "greedy";
  std::string seeds = "1,2,3,4,5,6,7,8,9,10";
  unsigned long long ticks_max = 10000;
  std::string out = "bench_out";
};

void write_report(const fs::path& dir, const std::string& prefix,
                  const std::map<std::string, std::vector<Metrics>>& by_variant) {
  std::string csv;
  std::string text;
  try {
    const Report rep = compare(by_variant);
    csv = rep.to_csv();
    text = rep.to_text();
  } catch (const Error& e) {
    // Without a classic baseline there is nothing to compare against; still emit the aggregates.
    Report rep;
    for (const auto& [name, runs] : by_variant) rep.rows.push_back(aggregate(name, runs));
    csv = rep.to_csv();
    text = rep.to_text() + "\nno comparison: " + e.what() + "\n";
  }
  write_file(dir / (prefix + ".csv"), csv);
  write_file(dir / (prefix + ".txt"), text);
}

int cmd_bench(const BenchOptions& o) {
  const auto scenario_args = split_list(o.scenarios);
  const auto modes = split_list(o.modes);
  std::vector<unsigned long long> seeds;
  for (const auto& s : split_list(o.seeds)) seeds.push_back(std::stoull(s));
  for (const auto& m : modes)
    if (!parse_variant(m)) {
      std::cerr << "error: unknown mode '" << m << "'\n";
      return kExitError;
    }
  if (scenario_args.empty() || modes.empty() || seeds.empty()) {
    std::cerr << "error: empty bench matrix\n";
    return kExitError;
  }

  const fs::path dir = output_dir(o.out);
  fs::create_directories(dir);
  std::map<std::string, std::vector<Metrics>> pooled;
  int errored = 0;
  int timeouts = 0;

  for (const auto& scenario_arg : scenario_args) {
    Scenario sc;
    try {
      sc = resolve_scenario(scenario_arg);
    } catch (const std::exception& e) {
      std::cerr << "cell error: scenario '" << scenario_arg << "': " << e.what() << "\n";
      errored += static_cast<int>(modes.size() * seeds.size());
      continue;
    }
    const std::string stem = stem_of(scenario_arg, sc);
    std::map<std::string, std::vector<Metrics>> per_scenario;
    for (const auto& mode : modes) {
      for (const auto seed : seeds) {
        try {
          const RunResult r =
              run_with_user(sc, config_for(*parse_variant(mode)), policy_for(o.user), seed, o.ticks_max);
          write_file(dir / (stem + "_" + mode + "_seed" + std::to_string(seed) + ".jsonl"), to_jsonl(r.log));
          per_scenario[mode].push_back(r.metrics);
          pooled[mode].push_back(r.metrics);
          if (!r.success) ++timeouts;
          std::cout << stem << " " << mode << " seed=" << seed << " success=" << (r.success ? "true" : "false")
                    << " user_switches=" << r.metrics.user_switches << "\n";
        } catch (const std::exception& e) {
          ++errored;
          std::cerr << "cell error: " << stem << " " << mode << " seed=" << seed << ": " << e.what() << "\n";
        }
      }
    }
    if (scenario_args.size() > 1 && !per_scenario.empty()) write_report(dir, "report_" + stem, per_scenario);
  }
  if (!pooled.empty()) write_report(dir, "report", pooled);
  std::cout << "report=" << (dir / "report.csv").string() << " cells_errored=" << errored << " timeouts=" << timeouts
            << "\n";
  return errored > 0 ? kExitError : kExitOk;
}

int cmd_serve(unsigned short port, double tick_rate) {
  boost::asio::io_context ioc;
  HostOptions options;
  options.tick_rate_hz = tick_rate;
  WsServer server(ioc, {boost::asio::ip::make_address("0.0.0.0"), port}, options);
  server.start();
  boost::asio::signal_set signals(ioc, SIGINT, SIGTERM);
  signals.async_wait([&](const boost::system::error_code&, int) {
    server.stop();
    ioc.stop();
  });
  std::cout << "listening on ws://0.0.0.0:" << server.port() << "/session (subprotocol " << kSubprotocol << ", "
            << tick_rate << " Hz)" << std::endl;
  ioc.run();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shared-control pick-and-place: headless runs, benchmarks and the session server"};
  app.require_subcommand(1);

  std::vector<std::string> mode_names;
  for (const auto v : kAllVariants) mode_names.emplace_back(to_string(v));
  const std::vector<std::string> user_names{"greedy", "noisy"};

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run one headless session with a simulated user");
  run_cmd->add_option("--scenario", run.scenario, "Scenario file, or a built-in name (canonical, deadlock)");
  run_cmd->add_option("--mode", run.mode, "Control variant")->check(CLI::IsMember(mode_names));
  run_cmd->add_option("--user", run.user, "Simulated user")->check(CLI::IsMember(user_names));
  run_cmd->add_option("--seed", run.seed, "Session seed");
  run_cmd->add_option("--ticks-max", run.ticks_max, "Tick budget before the run counts as a timeout");
  run_cmd->add_option("--out", run.out, "JSONL log path; metrics go next to it as .metrics.csv");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run a variants x scenarios x seeds matrix and compare");
  bench_cmd->add_option("--scenario", bench.scenarios, "Comma-separated scenario files or built-in names");
  bench_cmd->add_option("--mode", bench.modes, "Comma-separated control variants");
  bench_cmd->add_option("--user", bench.user, "Simulated user")->check(CLI::IsMember(user_names));
  bench_cmd->add_option("--seeds", bench.seeds, "Comma-separated seeds");
  bench_cmd->add_option("--ticks-max", bench.ticks_max, "Tick budget per cell");
  bench_cmd->add_option("--out", bench.out, "Output directory for logs and report.csv/report.txt");

  unsigned short port = 8765;
  double tick_rate = 20.0;
  auto* serve_cmd = app.add_subcommand("serve", "Serve sessions over WebSocket at /session");
  serve_cmd->add_option("--port", port, "TCP port (0 picks a free one)");
  serve_cmd->add_option("--tick-rate", tick_rate, "Session tick rate in Hz")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    std::cerr << app.help();
    return kExitError;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*bench_cmd) return cmd_bench(bench);
    if (*serve_cmd) return cmd_serve(port, tick_rate);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
