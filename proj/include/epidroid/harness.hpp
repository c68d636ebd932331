#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epidroid/device.hpp"
#include "epidroid/explorers.hpp"
#include "epidroid/oracle_reasoner.hpp"
#include "epidroid/recomposer.hpp"
#include "epidroid/trace_store.hpp"
#include "epidroid/wire_reasoner.hpp"

namespace epidroid {

/// Invalid experiment configuration (CLI exit status 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable inputs or unwritable outputs (CLI exit status 3).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { BaselineExt, Epidroid };
enum class Stage { Explore, Stabilize, Enhance };  // last stage executed
enum class ReasonerKind { Oracle, Remote };

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view name);

struct ExperimentConfig {
  std::filesystem::path app_path;
  std::shared_ptr<const AppModel> model;  // preloaded model; wins over app_path
  ExplorerConfig explorer;
  std::uint64_t warmup_events = 500;
  std::uint64_t enhance_events = 500;
  Mode mode = Mode::Epidroid;
  ReasonerKind reasoner = ReasonerKind::Oracle;
  OracleNoise noise;
  RemoteConfig remote;
  double threshold = 0.80;
  int bfs_depth = 2;
  int bfs_budget = 25;
  int iteration_cap = 10;
  bool dependency_reasoning = true;
  bool stabilization = true;
  int verify_replays = 1;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;  // empty: no files written
  Stage stop_after = Stage::Enhance;
  std::filesystem::path warmup_trace;  // non-empty: replay this trace instead of exploring
};

/// Throws ConfigError on out-of-range values.
void validate_config(const ExperimentConfig& config);

struct Metrics {
  double acc = 0.0;
  double aac = 0.0;
  std::optional<double> rsr;  // absent when nothing was replayed
  std::size_t covered = 0;
  std::size_t total_labels = 0;
  std::size_t visited_activities = 0;
  std::size_t declared_activities = 0;
  std::size_t replay_attempts = 0;
  std::size_t stable_replays = 0;
};

struct PhaseMetrics {
  std::string name;
  std::size_t start_event = 0;
  std::size_t end_event = 0;
  double acc_start = 0.0;
  double acc_end = 0.0;

  double delta_acc() const { return acc_end - acc_start; }
};

Metrics compute_metrics(const CoverageMonitor& monitor, const std::vector<ReplayAttempt>& attempts);

/// Replays `replays` fragments round-robin, each from a fresh reset, and
/// counts the stable ones. No recovery is attempted.
struct RsrMeasurement {
  std::size_t attempts = 0;
  std::size_t stable = 0;
  double rate() const { return attempts ? static_cast<double>(stable) / static_cast<double>(attempts) : 0.0; }
};
RsrMeasurement measure_rsr(const std::vector<TestFragment>& fragments, Device& device, std::size_t replays);

/// Re-executes a recorded trace (resetting where it reset) so the run's
/// clusters, graph, MSEs and coverage reflect it. Stale events are skipped;
/// returns the number of events executed.
std::size_t replay_trace(Device& device, const Trace& trace);

/// Whole reset-to-reset episodes of the traces, unsliced and unminimized.
std::vector<TestFragment> raw_episodes(const std::vector<Trace>& traces);

struct ExperimentResult {
  ExperimentConfig config;
  std::shared_ptr<const AppModel> model;
  std::unique_ptr<RunContext> context;
  Metrics metrics;
  std::vector<PhaseMetrics> phases;
  Trace warmup_trace;
  Trace enhancement_trace;  // baseline_ext only
  std::vector<TestFragment> fragments;
  StabilizeReport stabilization;
  std::vector<ReplayAttempt> replay_attempts;
  LoopReport loop;
  std::vector<std::string> degradations;
  std::uint64_t enhancement_events_used = 0;

  double warmup_acc() const;
  double enhancement_delta_acc() const;
  std::size_t iterations() const { return loop.iterations.size(); }
};

/// Warm-up with the chosen explorer, then either continues the explorer
/// (baseline_ext) or runs stabilization and the recomposition loop (epidroid)
/// under the enhancement budget. Writes the report files when out_dir is set.
/// `reasoner` overrides the configured reasoner when non-null.
ExperimentResult run_experiment(const ExperimentConfig& config, Reasoner* reasoner = nullptr);

std::shared_ptr<const AppModel> load_model_or_throw(const std::filesystem::path& path);

nlohmann::json report_json(const ExperimentResult& result, bool with_timestamp = true);
nlohmann::json mses_json(const RunContext& context);
nlohmann::json semantic_utg_json(const RunContext& context);
nlohmann::json fragments_json(const std::vector<TestFragment>& fragments, const AppModel& model);
std::string curve_csv(const CoverageMonitor& monitor);
std::string summary_text(const ExperimentResult& result);

/// Writes report.json, curve.csv, fragments.json, mses.json, semantic_utg.json,
/// summary.txt and the trace JSON-Lines files. Throws IoError.
void emit_report(const ExperimentResult& result, const std::filesystem::path& out_dir);

}  // namespace epidroid
