#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "epidroid/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct Options {
  std::string app;
  std::string mode = "epidroid";
  std::string explorer = "frontier";
  std::uint64_t seed = 0;
  std::uint64_t warmup_events = 500;
  std::uint64_t enhance_events = 500;
  std::string reasoner = "oracle";
  std::string remote_endpoint;
  double threshold = 0.80;
  int bfs_depth = 2;
  int bfs_budget = 25;
  int iteration_cap = 10;
  int verify_replays = 1;
  std::string trace;
  std::string out = "out";
  bool no_dependency_reasoning = false;
  bool no_stabilization = false;
};

void add_common(CLI::App* cmd, Options& o, bool needs_mode) {
  cmd->add_option("--app", o.app, "App model JSON file")->required();
  cmd->add_option("--seed", o.seed, "Run seed");
  cmd->add_option("--explorer", o.explorer, "Warm-up explorer: random | frontier");
  cmd->add_option("--warmup-events", o.warmup_events, "Warm-up event budget");
  cmd->add_option("--threshold", o.threshold, "Page clustering threshold in (0, 1]");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--verify-replays", o.verify_replays, "Replays per fragment during verification; all must be stable");
  if (!needs_mode) return;
  cmd->add_option("--mode", o.mode, "baseline_ext | epidroid");
  cmd->add_option("--enhance-events", o.enhance_events, "Enhancement event budget");
  cmd->add_option("--reasoner", o.reasoner, "oracle | remote");
  cmd->add_option("--remote-endpoint", o.remote_endpoint, "Remote reasoner base URL");
  cmd->add_option("--bfs-depth", o.bfs_depth, "Harvest BFS depth");
  cmd->add_option("--bfs-budget", o.bfs_budget, "Harvest BFS action budget");
  cmd->add_option("--iterations", o.iteration_cap, "Recomposition iteration cap");
  cmd->add_flag("--no-dependency-reasoning", o.no_dependency_reasoning, "Ablation: random MSE and fragment choice");
  cmd->add_flag("--no-stabilization", o.no_stabilization, "Ablation: replay raw episodes");
}

epidroid::ExperimentConfig to_config(const Options& o, epidroid::Stage stage) {
  using namespace epidroid;
  ExperimentConfig c;
  c.app_path = o.app;
  auto explorer = parse_explorer_kind(o.explorer);
  if (!explorer) throw ConfigError("unknown explorer '" + o.explorer + "' (expected random or frontier)");
  c.explorer.kind = *explorer;
  auto mode = parse_mode(o.mode);
  if (!mode) throw ConfigError("unknown mode '" + o.mode + "' (expected baseline_ext or epidroid)");
  c.mode = *mode;
  if (o.reasoner == "oracle") {
    c.reasoner = ReasonerKind::Oracle;
  } else if (o.reasoner == "remote") {
    c.reasoner = ReasonerKind::Remote;
    c.remote.endpoint = o.remote_endpoint;
    if (const char* token = std::getenv("EPIDROID_REMOTE_TOKEN")) c.remote.token = token;
  } else {
    throw ConfigError("unknown reasoner '" + o.reasoner + "' (expected oracle or remote)");
  }
  c.seed = o.seed;
  c.warmup_events = o.warmup_events;
  c.enhance_events = o.enhance_events;
  c.threshold = o.threshold;
  c.bfs_depth = o.bfs_depth;
  c.bfs_budget = o.bfs_budget;
  c.iteration_cap = o.iteration_cap;
  c.verify_replays = o.verify_replays;
  c.dependency_reasoning = !o.no_dependency_reasoning;
  c.stabilization = !o.no_stabilization;
  c.out_dir = o.out;
  c.stop_after = stage;
  if (!o.trace.empty()) c.warmup_trace = o.trace;
  return c;
}

int print_report(const std::string& out_dir) {
  const std::string path = out_dir + "/report.json";
  std::ifstream in(path);
  if (!in) throw epidroid::IoError("cannot open '" + path + "'");
  nlohmann::json report;
  try {
    in >> report;
  } catch (const nlohmann::json::exception& e) {
    throw epidroid::IoError("malformed report '" + path + "': " + e.what());
  }
  const auto& m = report.at("metrics");
  std::cout << "app " << report.at("app_id").get<std::string>() << ", mode " << report.at("mode").get<std::string>()
            << ", seed " << report.at("seed") << '\n';
  std::cout << "ACC " << m.at("acc") << " (" << m.at("covered_labels") << '/' << m.at("total_labels") << ")\n";
  std::cout << "AAC " << m.at("aac") << " (" << m.at("visited_activities") << '/' << m.at("declared_activities")
            << ")\n";
  std::cout << "RSR " << (m.at("rsr").is_null() ? std::string("n/a") : m.at("rsr").dump()) << " ("
            << m.at("stable_replays") << '/' << m.at("replay_attempts") << ")\n";
  for (const auto& p : report.at("phases")) {
    std::cout << "phase " << p.at("name").get<std::string>() << ": ACC " << p.at("acc_start") << " -> "
              << p.at("acc_end") << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dependency-aware GUI test enhancement over declarative app models"};
  app.require_subcommand(1);
  Options o;

  auto* explore = app.add_subcommand("explore", "Run the warm-up explorer and record its trace");
  add_common(explore, o, false);

  auto* stabilize = app.add_subcommand("stabilize", "Explore (or load --trace), then slice and verify fragments");
  add_common(stabilize, o, false);
  stabilize->add_option("--trace", o.trace, "Recorded warm-up trace (JSON Lines)");

  auto* enhance = app.add_subcommand("enhance", "Enhance a recorded warm-up trace with the recomposition loop");
  add_common(enhance, o, true);
  enhance->add_option("--trace", o.trace, "Recorded warm-up trace (JSON Lines)")->required();

  auto* run = app.add_subcommand("run", "Full warm-up plus enhancement experiment");
  add_common(run, o, true);

  std::string report_dir = "out";
  auto* report = app.add_subcommand("report", "Print the metrics of a finished run");
  report->add_option("--out", report_dir, "Output directory of the run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (report->parsed()) return print_report(report_dir);
    epidroid::Stage stage = epidroid::Stage::Enhance;
    if (explore->parsed()) stage = epidroid::Stage::Explore;
    if (stabilize->parsed()) stage = epidroid::Stage::Stabilize;
    auto config = to_config(o, stage);
    if (stage == epidroid::Stage::Stabilize) config.mode = epidroid::Mode::Epidroid;
    auto result = epidroid::run_experiment(config);
    std::cout << epidroid::summary_text(result);
    std::cout << "wrote " << config.out_dir.string() << '\n';
    return kExitOk;
  } catch (const epidroid::ConfigError& e) {
    std::cerr << "epidroid: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const epidroid::IoError& e) {
    std::cerr << "epidroid: I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "epidroid: " << e.what() << '\n';
    return 1;
  }
}
