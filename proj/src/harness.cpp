#include "epidroid/harness.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace epidroid {

using nlohmann::json;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

double fraction(std::size_t covered, std::size_t total) {
  return total ? static_cast<double>(covered) / static_cast<double>(total) : 0.0;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

json metrics_json(const Metrics& m) {
  return json{{"acc", m.acc},
              {"aac", m.aac},
              {"rsr", m.rsr ? json(*m.rsr) : json(nullptr)},
              {"covered_labels", m.covered},
              {"total_labels", m.total_labels},
              {"visited_activities", m.visited_activities},
              {"declared_activities", m.declared_activities},
              {"replay_attempts", m.replay_attempts},
              {"stable_replays", m.stable_replays}};
}

}  // namespace

std::string_view to_string(Mode mode) { return mode == Mode::BaselineExt ? "baseline_ext" : "epidroid"; }

std::optional<Mode> parse_mode(std::string_view name) {
  if (name == "baseline_ext") return Mode::BaselineExt;
  if (name == "epidroid") return Mode::Epidroid;
  return std::nullopt;
}

void validate_config(const ExperimentConfig& config) {
  if (!config.model && config.app_path.empty()) throw ConfigError("no app model given (--app)");
  if (!(config.threshold > 0.0 && config.threshold <= 1.0)) {
    throw ConfigError("clustering threshold must lie in (0, 1]");
  }
  if (config.bfs_depth < 0) throw ConfigError("BFS depth must be non-negative");
  if (config.bfs_budget < 0) throw ConfigError("BFS budget must be non-negative");
  if (config.iteration_cap < 1) throw ConfigError("iteration cap must be at least 1");
  if (config.verify_replays < 1) throw ConfigError("replay verification count must be at least 1");
  if (!(config.explorer.restart_probability >= 0.0 && config.explorer.restart_probability <= 1.0)) {
    throw ConfigError("restart probability must lie in [0, 1]");
  }
  const auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate_ok(config.noise.validation_flip_rate) || !rate_ok(config.noise.impact_recall) ||
      !rate_ok(config.noise.impact_precision)) {
    throw ConfigError("oracle noise parameters must lie in [0, 1]");
  }
  if (config.mode == Mode::Epidroid && config.reasoner == ReasonerKind::Remote && config.remote.endpoint.empty()) {
    throw ConfigError("remote reasoner selected without --remote-endpoint");
  }
}

std::shared_ptr<const AppModel> load_model_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open app model '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return std::make_shared<const AppModel>(parse_app_model(buffer.str(), path.string()));
  } catch (const ModelParseError& e) {
    throw ConfigError(e.what());
  } catch (const ModelValidationError& e) {
    throw ConfigError(e.what());
  } catch (const GuardSyntaxError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const GuardBindError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Metrics compute_metrics(const CoverageMonitor& monitor, const std::vector<ReplayAttempt>& attempts) {
  Metrics m;
  m.covered = monitor.covered_count();
  m.total_labels = monitor.total_labels();
  m.visited_activities = monitor.visited_activities().size();
  m.declared_activities = monitor.declared_activities();
  m.acc = monitor.acc();
  m.aac = monitor.aac();
  m.replay_attempts = attempts.size();
  for (const auto& a : attempts) m.stable_replays += a.success ? 1 : 0;
  if (!attempts.empty()) m.rsr = fraction(m.stable_replays, m.replay_attempts);
  return m;
}

RsrMeasurement measure_rsr(const std::vector<TestFragment>& fragments, Device& device, std::size_t replays) {
  RsrMeasurement out;
  if (fragments.empty()) return out;
  for (std::size_t i = 0; i < replays; ++i) {
    ++out.attempts;
    if (verify_replay(fragments[i % fragments.size()], device).stable()) ++out.stable;
  }
  return out;
}

std::vector<TestFragment> raw_episodes(const std::vector<Trace>& traces) {
  SliceConfig raw;
  raw.cap = std::numeric_limits<std::size_t>::max();
  raw.cut_on_reentry = false;
  std::vector<TestFragment> out;
  for (std::size_t t = 0; t < traces.size(); ++t) {
    for (auto& episode : slice_trace(traces[t], -1, raw)) {
      episode.source_trace = static_cast<int>(t);
      episode.id = static_cast<int>(out.size());
      out.push_back(std::move(episode));
    }
  }
  return out;
}

std::size_t replay_trace(Device& device, const Trace& trace) {
  std::size_t executed = 0;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    if (i == 0 || trace.steps[i].reset_before) device.reset();
    if (device.step(trace.steps[i].event)) ++executed;
  }
  return executed;
}

double ExperimentResult::warmup_acc() const {
  for (const auto& p : phases) {
    if (p.name == "warmup") return p.acc_end;
  }
  return 0.0;
}

double ExperimentResult::enhancement_delta_acc() const { return metrics.acc - warmup_acc(); }

ExperimentResult run_experiment(const ExperimentConfig& config, Reasoner* reasoner) {
  validate_config(config);
  ExperimentResult result;
  result.config = config;
  result.model = config.model ? config.model : load_model_or_throw(config.app_path);
  result.context = std::make_unique<RunContext>(result.model, config.threshold, config.seed);
  RunContext& ctx = *result.context;
  Device device(ctx);

  ExplorerConfig explorer_config = config.explorer;
  explorer_config.seed = splitmix64(config.seed ^ 0x5eedULL);
  auto explorer = make_explorer(explorer_config);

  result.warmup_trace.origin = std::string(to_string(explorer_config.kind));
  result.warmup_trace.seed = config.seed;
  ctx.monitor.begin_phase("warmup");
  if (!config.warmup_trace.empty()) {
    Trace recorded;
    try {
      recorded = load_trace(config.warmup_trace, *result.model);
    } catch (const std::exception& e) {
      throw IoError(e.what());
    }
    // Cluster ids are run-local: keep the re-executed trace, not the file's.
    result.warmup_trace.origin = recorded.origin;
    result.warmup_trace.seed = recorded.seed;
    device.attach_trace(&result.warmup_trace);
    replay_trace(device, recorded);
    device.attach_trace(nullptr);
  } else {
    device.set_budget(config.warmup_events);
    explorer->run(device, config.warmup_events, &result.warmup_trace);
  }

  if (config.stop_after == Stage::Explore) {
    // Warm-up only.
  } else if (config.mode == Mode::BaselineExt) {
    ctx.monitor.begin_phase("enhancement");
    result.enhancement_trace.origin = result.warmup_trace.origin;
    result.enhancement_trace.seed = config.seed;
    device.set_budget(config.enhance_events);
    explorer->run(device, config.enhance_events, &result.enhancement_trace);
    result.enhancement_events_used = device.budget_used();
  } else {
    // Replays spent on stabilization are not charged to the enhancement budget.
    ctx.monitor.begin_phase("stabilization");
    device.set_budget(std::nullopt);
    if (config.stabilization) {
      StabilizeConfig sc;
      sc.verify_replays = config.verify_replays;
      result.stabilization = stabilize({result.warmup_trace}, device, sc);
      result.fragments = result.stabilization.fragments;
      result.replay_attempts = result.stabilization.attempts;
    } else {
      result.fragments = raw_episodes({result.warmup_trace});
      for (auto& fragment : result.fragments) {
        const bool stable = verify_replay(fragment, device).stable();
        if (stable) fragment.status = ReplayStatus::Stable;
        result.replay_attempts.push_back(ReplayAttempt{fragment.id, stable});
      }
    }

  }
  if (config.mode == Mode::Epidroid && config.stop_after == Stage::Enhance) {
    std::unique_ptr<Reasoner> owned;
    if (!reasoner) {
      if (config.reasoner == ReasonerKind::Oracle) {
        owned = std::make_unique<OracleReasoner>(result.model, config.noise);
      } else {
        owned = std::make_unique<RemoteReasoner>(
            config.remote, result.model->app_id + "-" + std::to_string(config.seed));
      }
      reasoner = owned.get();
    }

    ctx.monitor.begin_phase("enhancement");
    RecomposerConfig rc;
    rc.bfs_depth = config.bfs_depth;
    rc.bfs_budget = config.bfs_budget;
    rc.iteration_cap = config.iteration_cap;
    rc.dependency_reasoning = config.dependency_reasoning;
    rc.seed = splitmix64(config.seed ^ 0xcafeULL);
    device.set_budget(config.enhance_events);
    Recomposer recomposer(device, *reasoner, result.fragments, rc);
    result.loop = recomposer.run_loop();
    result.enhancement_events_used = device.budget_used();
    if (const auto* wire = dynamic_cast<const WireReasoner*>(reasoner)) result.degradations = wire->degradations();
    const auto& rejected = recomposer.rejected_plans();
    result.degradations.insert(result.degradations.end(), rejected.begin(), rejected.end());
  }

  // Phase boundaries from the monitor's marks.
  const auto& marks = ctx.monitor.phases();
  const auto& curve = ctx.monitor.curve();
  const std::size_t total = ctx.monitor.total_labels();
  for (std::size_t i = 0; i < marks.size(); ++i) {
    PhaseMetrics p;
    p.name = marks[i].name;
    p.start_event = marks[i].start_event;
    p.end_event = i + 1 < marks.size() ? marks[i + 1].start_event : curve.size();
    p.acc_start = fraction(marks[i].start_covered, total);
    const std::size_t end_covered = p.end_event > 0 ? curve[p.end_event - 1] : 0;
    p.acc_end = p.end_event > p.start_event ? fraction(end_covered, total) : p.acc_start;
    result.phases.push_back(std::move(p));
  }
  result.metrics = compute_metrics(ctx.monitor, result.replay_attempts);

  if (!config.out_dir.empty()) emit_report(result, config.out_dir);
  return result;
}

json mses_json(const RunContext& context) {
  json out = json::array();
  for (const auto& record : context.mses.records()) out.push_back(to_json(record));
  return out;
}

json semantic_utg_json(const RunContext& context) {
  json clusters = json::array();
  const auto& annotations = context.utg.mse_annotations();
  for (const auto& c : context.clusters.clusters()) {
    json entry{{"id", c.id}, {"activity", c.activity}, {"page_hint", c.page_hint}, {"members", c.members.size()}};
    auto summary = context.utg.summary(c.id);
    entry["summary"] = summary ? json(*summary) : json(nullptr);
    auto it = annotations.find(c.id);
    entry["mses"] = it == annotations.end() ? json::array() : json(it->second);
    clusters.push_back(std::move(entry));
  }
  json edges = json::array();
  for (const auto& e : context.utg.edges()) {
    edges.push_back(json{{"source", e.source}, {"event", event_to_json(e.event)}, {"target", e.target}});
  }
  json deps = json::array();
  for (const auto& d : context.utg.confirmed_dependencies()) {
    deps.push_back(json{{"mse", d.mse},
                        {"widget_id", d.widget_id},
                        {"target_value", d.target_value},
                        {"affected", d.affected},
                        {"coverage_gain", d.coverage_gain},
                        {"new_states", d.new_states}});
  }
  json pruned = json::array();
  for (const auto& prefix : context.utg.pruned_prefixes()) {
    json seq = json::array();
    for (const auto& e : prefix) seq.push_back(event_to_json(e));
    pruned.push_back(std::move(seq));
  }
  return json{{"clusters", std::move(clusters)},
              {"edges", std::move(edges)},
              {"confirmed_dependencies", std::move(deps)},
              {"pruned_prefixes", std::move(pruned)}};
}

json fragments_json(const std::vector<TestFragment>& fragments, const AppModel& model) {
  json out = json::array();
  for (const auto& f : fragments) out.push_back(fragment_to_json(f, model));
  return out;
}

std::string curve_csv(const CoverageMonitor& monitor) {
  std::ostringstream out;
  out << "event_index,covered_labels\n";
  const auto& curve = monitor.curve();
  for (std::size_t i = 0; i < curve.size(); ++i) out << i << ',' << curve[i] << '\n';
  return out.str();
}

json report_json(const ExperimentResult& result, bool with_timestamp) {
  const auto& cfg = result.config;
  const RunContext& ctx = *result.context;
  json config{{"app", cfg.app_path.string()},
              {"mode", std::string(to_string(cfg.mode))},
              {"explorer", std::string(to_string(cfg.explorer.kind))},
              {"seed", cfg.seed},
              {"warmup_events", cfg.warmup_events},
              {"enhance_events", cfg.enhance_events},
              {"reasoner", cfg.reasoner == ReasonerKind::Oracle ? "oracle" : "remote"},
              {"threshold", cfg.threshold},
              {"bfs_depth", cfg.bfs_depth},
              {"bfs_budget", cfg.bfs_budget},
              {"iteration_cap", cfg.iteration_cap},
              {"dependency_reasoning", cfg.dependency_reasoning},
              {"stabilization", cfg.stabilization},
              {"verify_replays", cfg.verify_replays}};

  json phases = json::array();
  for (const auto& p : result.phases) {
    phases.push_back(json{{"name", p.name},
                          {"start_event", p.start_event},
                          {"end_event", p.end_event},
                          {"acc_start", p.acc_start},
                          {"acc_end", p.acc_end},
                          {"delta_acc", p.delta_acc()}});
  }

  json report{{"app_id", result.model->app_id},
              {"mode", std::string(to_string(cfg.mode))},
              {"seed", cfg.seed},
              {"config", std::move(config)},
              {"metrics", metrics_json(result.metrics)},
              {"phases", std::move(phases)},
              {"warmup_acc", result.warmup_acc()},
              {"enhancement_delta_acc", result.enhancement_delta_acc()},
              {"events", json{{"total", ctx.monitor.events()},
                              {"enhancement_used", result.enhancement_events_used},
                              {"resets", ctx.resets}}},
              {"clusters", ctx.clusters.size()},
              {"mses", ctx.mses.size()},
              {"degradations", result.degradations}};

  if (cfg.mode == Mode::Epidroid) {
    const auto& s = result.stabilization;
    report["stabilization"] = json{{"enabled", cfg.stabilization},
                                   {"fragments", result.fragments.size()},
                                   {"slices", s.slices},
                                   {"dropped", s.dropped},
                                   {"duplicates", s.duplicates},
                                   {"truncated", s.truncated},
                                   {"navigated", s.navigated},
                                   {"skipped", s.skipped},
                                   {"steps_before", s.steps_before},
                                   {"steps_after", s.steps_after},
                                   {"redundancy_ratio", s.redundancy_ratio()}};
    json iterations = json::array();
    for (const auto& it : result.loop.iterations) {
      iterations.push_back(json{{"index", it.index},
                                {"plans", it.plans},
                                {"positive", it.positive},
                                {"mismatch", it.mismatch},
                                {"failure", it.failure},
                                {"skipped", it.skipped},
                                {"new_mses", it.new_mses},
                                {"covered_after", it.coverage_after},
                                {"truncated", it.truncated}});
    }
    report["recomposition"] = json{{"iterations", std::move(iterations)},
                                   {"plans", result.loop.plans.size()},
                                   {"budget_exhausted", result.loop.budget_exhausted},
                                   {"confirmed_dependencies", ctx.utg.confirmed_dependencies().size()}};
  }
  report["timestamp"] = with_timestamp ? json(utc_timestamp()) : json(nullptr);
  return report;
}

std::string summary_text(const ExperimentResult& result) {
  std::ostringstream out;
  const auto& m = result.metrics;
  out << std::fixed << std::setprecision(4);
  out << "app " << result.model->app_id << " mode " << to_string(result.config.mode) << " seed "
      << result.config.seed << '\n';
  out << "ACC " << m.acc << " (" << m.covered << '/' << m.total_labels << " labels)\n";
  out << "AAC " << m.aac << " (" << m.visited_activities << '/' << m.declared_activities << " activities)\n";
  if (m.rsr) {
    out << "RSR " << *m.rsr << " (" << m.stable_replays << '/' << m.replay_attempts << " replays)\n";
  } else {
    out << "RSR n/a (no replays)\n";
  }
  for (const auto& p : result.phases) {
    out << "phase " << p.name << ": events " << p.start_event << ".." << p.end_event << ", ACC "
        << p.acc_start << " -> " << p.acc_end << '\n';
  }
  if (result.config.mode == Mode::Epidroid) {
    out << "iterations " << result.iterations() << ", plans " << result.loop.plans.size() << ", MSEs "
        << result.context->mses.size() << ", fragments " << result.fragments.size() << '\n';
  }
  for (const auto& d : result.degradations) out << "degraded: " << d << '\n';
  return out.str();
}

void emit_report(const ExperimentResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());
  const RunContext& ctx = *result.context;
  write_file(out_dir / "report.json", report_json(result).dump(2) + "\n");
  write_file(out_dir / "curve.csv", curve_csv(ctx.monitor));
  write_file(out_dir / "fragments.json", fragments_json(result.fragments, *result.model).dump(2) + "\n");
  write_file(out_dir / "mses.json", mses_json(ctx).dump(2) + "\n");
  write_file(out_dir / "semantic_utg.json", semantic_utg_json(ctx).dump(2) + "\n");
  write_file(out_dir / "summary.txt", summary_text(result));
  try {
    save_trace(result.warmup_trace, *result.model, out_dir / "warmup_trace.jsonl");
    if (!result.enhancement_trace.steps.empty()) {
      save_trace(result.enhancement_trace, *result.model, out_dir / "enhancement_trace.jsonl");
    }
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
}

}  // namespace epidroid
