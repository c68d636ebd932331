#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "epidroid/fixtures.hpp"
#include "epidroid/harness.hpp"
#include "epidroid/oracle_reasoner.hpp"
#include "epidroid/recomposer.hpp"
#include "test_support.hpp"

namespace epidroid {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

ExperimentConfig config_for(std::shared_ptr<const AppModel> model, std::uint64_t seed = 1) {
  ExperimentConfig config;
  config.model = std::move(model);
  config.seed = seed;
  config.explorer.seed = seed;
  return config;
}

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("epidroid_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

TEST(Harness, ConfigValidation) {
  ExperimentConfig config;
  EXPECT_THROW(validate_config(config), ConfigError);
  config = config_for(testing::mini_app());
  EXPECT_NO_THROW(validate_config(config));
  config.threshold = 0.0;
  EXPECT_THROW(validate_config(config), ConfigError);
  config = config_for(testing::mini_app());
  config.reasoner = ReasonerKind::Remote;
  EXPECT_THROW(validate_config(config), ConfigError);
  config.mode = Mode::BaselineExt;
  EXPECT_NO_THROW(validate_config(config));
}

TEST(Harness, ModelLoadingErrorsAreClassified) {
  EXPECT_THROW(load_model_or_throw("/nonexistent/app.json"), IoError);
  fs::path dir = scratch("badmodel");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{\"app_id\": 3}";
  EXPECT_THROW(load_model_or_throw(dir / "bad.json"), ConfigError);
  fs::remove_all(dir);
}

TEST(Harness, CurveFinalRowMatchesAccAndPhasesAreContiguous) {
  for (auto mode : {Mode::BaselineExt, Mode::Epidroid}) {
    ExperimentConfig config = config_for(testing::fixture(testing::kShop), 3);
    config.mode = mode;
    ExperimentResult r = run_experiment(config);
    const auto& curve = r.context->monitor.curve();
    ASSERT_FALSE(curve.empty());
    EXPECT_EQ(curve.back(), r.metrics.covered);
    EXPECT_DOUBLE_EQ(r.metrics.acc, static_cast<double>(curve.back()) / r.model->total_branches());
    EXPECT_TRUE(std::is_sorted(curve.begin(), curve.end()));
    ASSERT_FALSE(r.phases.empty());
    EXPECT_EQ(r.phases.front().start_event, 0u);
    for (std::size_t i = 1; i < r.phases.size(); ++i) {
      EXPECT_EQ(r.phases[i].start_event, r.phases[i - 1].end_event);
    }
    EXPECT_EQ(r.phases.back().end_event, curve.size());
    EXPECT_LE(r.enhancement_events_used, config.enhance_events);
  }
}

TEST(Harness, ZeroEnhanceBudgetLeavesWarmupCoverage) {
  ExperimentConfig config = config_for(testing::fixture(testing::kCase1), 2);
  config.enhance_events = 0;
  ExperimentResult r = run_experiment(config);
  EXPECT_EQ(r.enhancement_events_used, 0u);
  EXPECT_NEAR(r.enhancement_delta_acc(), 0.0, 1e-12);
}

TEST(Harness, ReportsAreDeterministicApartFromTimestamp) {
  ExperimentConfig config = config_for(testing::fixture(testing::kNoise), 5);
  fs::path a = scratch("det_a"), b = scratch("det_b");
  config.out_dir = a;
  ExperimentResult ra = run_experiment(config);
  config.out_dir = b;
  ExperimentResult rb = run_experiment(config);
  for (const char* f : {"curve.csv", "fragments.json", "mses.json", "semantic_utg.json", "warmup_trace.jsonl"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  json ja = json::parse(slurp(a / "report.json")), jb = json::parse(slurp(b / "report.json"));
  EXPECT_TRUE(ja.at("timestamp").is_string());
  ja.erase("timestamp");
  jb.erase("timestamp");
  EXPECT_EQ(ja, jb);

  // curve.csv: header plus one row per executed event.
  std::istringstream csv(slurp(a / "curve.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "event_index,covered_labels");
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, ra.context->monitor.events());
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Harness, WarmupTraceReloadReproducesWarmupCoverage) {
  auto model = testing::fixture(testing::kCase1);
  ExperimentConfig config = config_for(model, 7);
  config.stop_after = Stage::Explore;
  fs::path dir = scratch("warm");
  config.out_dir = dir;
  ExperimentResult explored = run_experiment(config);

  ExperimentConfig again = config_for(model, 7);
  again.stop_after = Stage::Explore;
  again.warmup_trace = dir / "warmup_trace.jsonl";
  ExperimentResult replayed = run_experiment(again);
  EXPECT_EQ(replayed.metrics.covered, explored.metrics.covered);
  fs::remove_all(dir);
}

TEST(Recomposer, CascadeNeedsTwoIterationsStaticNeedsOne) {
  ExperimentResult cascade = run_experiment(config_for(testing::fixture(testing::kCascade), 1));
  EXPECT_EQ(cascade.iterations(), 2u);
  EXPECT_DOUBLE_EQ(cascade.metrics.acc, 1.0);
  ExperimentResult stat = run_experiment(config_for(testing::fixture(testing::kStatic), 1));
  EXPECT_EQ(stat.iterations(), 1u);
  EXPECT_TRUE(stat.loop.plans.empty());
}

TEST(Recomposer, EnhancementBudgetIsAHardCap) {
  ExperimentConfig config = config_for(testing::fixture(testing::kCase2), 1);
  config.enhance_events = 40;
  ExperimentResult r = run_experiment(config);
  EXPECT_LE(r.enhancement_events_used, 40u);
  EXPECT_TRUE(r.loop.budget_exhausted);
}

// Answers like the oracle but replays a fragment that does not exist.
class BogusPlanner : public OracleReasoner {
 public:
  using OracleReasoner::OracleReasoner;
  CompositePlan plan_composite(const MseRecord& record, const std::string& target,
                               const std::vector<ClusterId>& affected, const std::vector<FragmentDigest>& fragments,
                               const ReasonerContext& context) override {
    CompositePlan plan = OracleReasoner::plan_composite(record, target, affected, fragments, context);
    plan.replays.insert(plan.replays.begin(), PlannedReplay{9999, record.cluster, 1000});
    return plan;
  }
};

TEST(Recomposer, InvalidPlansFallBackToTheDefaultPlan) {
  auto model = testing::fixture(testing::kCascade);
  BogusPlanner planner(model);
  ExperimentResult r = run_experiment(config_for(model, 1), &planner);
  ASSERT_FALSE(r.loop.plans.empty());
  ASSERT_EQ(r.degradations.size(), r.loop.plans.size());
  for (const auto& d : r.degradations) EXPECT_EQ(d, "plan_composite: unknown fragment 9999");
  EXPECT_DOUBLE_EQ(r.metrics.acc, 1.0);
  EXPECT_TRUE(run_experiment(config_for(model, 1)).degradations.empty());
}

TEST(Recomposer, BoundedBfsRespectsBudget) {
  auto model = testing::fixture(testing::kCase1);
  RunContext ctx(model, kDefaultClusterThreshold, 1);
  Device device(ctx);
  device.reset();
  BfsResult r = bounded_bfs(device, 2, 5);
  EXPECT_LE(r.actions, 5u);
  EXPECT_GT(r.new_states.size(), 0u);
  EXPECT_EQ(bounded_bfs(device, 0, 5).actions, 0u);
}

TEST(Fixtures, GatedLabelsNeedMutationsAndAreReachableWithThem) {
  for (const char* name : {testing::kCase1, testing::kCase2, testing::kCascade, testing::kNoise, testing::kShop}) {
    SCOPED_TRACE(name);
    auto model = testing::fixture(name);
    auto gated = labels_with_prefix(*model, "gated_");
    ASSERT_FALSE(gated.empty());
    auto frozen = brute_force_reachable_labels(*model, false);
    auto open = brute_force_reachable_labels(*model, true);
    EXPECT_EQ(open.size(), model->total_branches());
    for (LabelId l : gated) EXPECT_EQ(frozen.count(l), 0u) << model->label_name(l);
    // Everything else the frozen search misses is emitted by a mutating transition.
    std::set<LabelId> mutators;
    for (const auto& t : model->transitions) {
      if (!t.effects.empty()) mutators.insert(t.labels.begin(), t.labels.end());
    }
    for (LabelId l = 0; l < model->total_branches(); ++l) {
      if (!frozen.count(l) && !gated.count(l)) EXPECT_EQ(mutators.count(l), 1u) << model->label_name(l);
    }
  }
  EXPECT_EQ(labels_with_prefix(*testing::fixture(testing::kCase1), "gated_").size(), 44u);
  EXPECT_EQ(labels_with_prefix(*testing::fixture(testing::kCase2), "gated_").size(), 772u);
  EXPECT_TRUE(labels_with_prefix(*testing::fixture(testing::kStatic), "gated_").empty());
}

TEST(Fixtures, GeneratorIsDeterministicAndValid) {
  GeneratorParams params;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    AppModel m = generate_random_model(params, seed);
    ASSERT_LE(m.product_state_count(), kMaxProductStates) << seed;
  }
  EXPECT_EQ(app_model_to_json(generate_random_model(params, 42)), app_model_to_json(generate_random_model(params, 42)));
  EXPECT_NE(app_model_to_json(generate_random_model(params, 42)), app_model_to_json(generate_random_model(params, 43)));
  params.pages = 1;
  EXPECT_THROW(generate_random_model(params, 0), GeneratorParamsError);
  params.pages = 6;
  params.variables = 7;
  EXPECT_THROW(generate_random_model(params, 0), GeneratorParamsError);
}

TEST(Fixtures, VariableFreeModelsYieldNoMses) {
  GeneratorParams params;
  params.variables = 0;
  auto model = std::make_shared<const AppModel>(generate_random_model(params, 9));
  ExperimentResult r = run_experiment(config_for(model, 9));
  EXPECT_EQ(r.context->mses.size(), 0u);
  EXPECT_EQ(r.iterations(), 1u);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EPIDROID_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  const std::string app = (fixtures_dir() / testing::kShop).string();
  fs::path out = scratch("cli");
  EXPECT_EQ(run_cli("run --app " + app + " --seed 1 --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "report.json"));
  EXPECT_EQ(run_cli("report --out " + out.string()), 0);
  EXPECT_EQ(run_cli("run --app " + app + " --threshold 1.5"), 2);
  EXPECT_EQ(run_cli("run --app " + app + " --mode sideways"), 2);
  EXPECT_EQ(run_cli("run --app " + app + " --reasoner remote"), 2);
  EXPECT_EQ(run_cli("run --bogus-flag"), 2);
  EXPECT_EQ(run_cli("run --app /nonexistent/app.json"), 3);
  EXPECT_EQ(run_cli("report --out /nonexistent/dir"), 3);
  EXPECT_EQ(run_cli("run --app " + app + " --out /proc/forbidden"), 3);
  fs::remove_all(out);
}

}  // namespace
}  // namespace epidroid
