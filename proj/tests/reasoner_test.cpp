#include <gtest/gtest.h>

#include <httplib.h>

#include <chrono>
#include <filesystem>
#include <thread>

#include "epidroid/harness.hpp"
#include "epidroid/oracle_reasoner.hpp"
#include "epidroid/recomposer.hpp"
#include "epidroid/wire_reasoner.hpp"
#include "test_support.hpp"

namespace epidroid {
namespace {

using nlohmann::json;

Event tap(std::string widget) { return Event{std::move(widget), EventKind::Tap, std::nullopt}; }

ExperimentConfig config_for(std::shared_ptr<const AppModel> model, std::uint64_t seed = 1) {
  ExperimentConfig config;
  config.model = std::move(model);
  config.seed = seed;
  config.explorer.seed = seed;
  return config;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("epidroid_" + name + "_" + std::to_string(::getpid()));
}

/// Serves /v1/reason on an ephemeral port with a backend reasoner.
class ReasonServer {
 public:
  explicit ReasonServer(Reasoner& backend, std::string token = "",
                        std::chrono::milliseconds delay = std::chrono::milliseconds(0)) {
    server_.Post("/v1/reason", [&backend, token, delay](const httplib::Request& req, httplib::Response& res) {
      if (!token.empty() && req.get_header_value("Authorization") != "Bearer " + token) {
        res.status = 401;
        return;
      }
      std::this_thread::sleep_for(delay);
      res.set_content(serve_request(backend, json::parse(req.body)).dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~ReasonServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(ReasonerCodec, RoundTripsRecordsPlansAndDigests) {
  MseRecord rec;
  rec.id = 3;
  rec.widget_id = "fmt";
  rec.cluster = 2;
  rec.kind = MseKind::RadioGroup;
  rec.domain = {"A", "B"};
  rec.observed_values = {"A"};
  rec.sigma_sea = {tap("open"), Event{"fmt", EventKind::Select, "B"}};
  rec.scope = ImpactScope::Global;
  rec.validated = Validation::Valid;
  rec.tried_targets = {"B"};
  MseRecord back = mse_record_from_json(to_json(rec));
  EXPECT_EQ(back.id, rec.id);
  EXPECT_EQ(back.kind, rec.kind);
  EXPECT_EQ(back.domain, rec.domain);
  EXPECT_EQ(back.sigma_sea, rec.sigma_sea);
  EXPECT_EQ(back.scope, rec.scope);
  EXPECT_EQ(back.validated, rec.validated);
  EXPECT_EQ(back.tried_targets, rec.tried_targets);

  CompositePlan plan;
  plan.mse = 3;
  plan.widget_id = "fmt";
  plan.target_value = "B";
  plan.affected = {4, 5};
  plan.replays = {{7, 4, 12}, {-1, 5, 0}};
  plan.rationale = "why";
  CompositePlan pb = plan_from_json(to_json(plan));
  ASSERT_EQ(pb.replays.size(), 2u);
  EXPECT_EQ(pb.replays[0].fragment_id, 7);
  EXPECT_EQ(pb.replays[1].cluster, 5);
  EXPECT_EQ(pb.affected, plan.affected);
  EXPECT_EQ(pb.rationale, "why");

  FragmentDigest d{1, 0, 3, {0, 2, 3}, 5, ReplayStatus::Truncated, {tap("a"), tap("b")}};
  FragmentDigest db = fragment_digest_from_json(to_json(d));
  EXPECT_EQ(db.cluster_path, d.cluster_path);
  EXPECT_EQ(db.events, d.events);
  EXPECT_EQ(db.status, d.status);
}

TEST(ReasonerCodec, ServeRequestRejectsUnknownTasks) {
  OracleReasoner oracle(testing::mini_app());
  json reply = serve_request(oracle, json{{"task", "dance"}, {"session", "s"}, {"context", json::object()}});
  EXPECT_FALSE(reply.at("ok").get<bool>());
}

TEST(CheckPlan, FlagsOutOfRegionUnknownFragmentsAndSkippedUnvisited) {
  SemanticUtg utg;
  utg.register_cluster(3);
  utg.upsert_transition(1, tap("x"), 2);
  MseRecord rec;
  rec.domain = {"Off", "On"};
  rec.observed_values = {"Off"};
  std::vector<FragmentDigest> frags{{0, 0, 2, {0, 1, 2}, 3, ReplayStatus::Stable, {tap("a"), tap("x")}}};
  CompositePlan plan;
  plan.target_value = "On";
  plan.affected = {1};
  plan.replays = {{0, 2, 3}};
  EXPECT_FALSE(check_plan(plan, rec, frags, utg).has_value());
  plan.replays = {{0, 3, 3}};
  EXPECT_TRUE(check_plan(plan, rec, frags, utg).has_value());
  plan.replays = {{9, 2, 3}};
  EXPECT_TRUE(check_plan(plan, rec, frags, utg).has_value());
  plan.replays = {{-1, 1, 0}};
  plan.target_value = "Off";
  EXPECT_TRUE(check_plan(plan, rec, frags, utg).has_value());
}

TEST(DefaultPlan, PrefersRelevanceThenStableThenFootprint) {
  MseRecord rec;
  rec.id = 0;
  std::vector<FragmentDigest> frags{{0, 0, 1, {0, 1}, 9, ReplayStatus::Truncated, {tap("a")}},
                                    {1, 0, 1, {0, 1}, 2, ReplayStatus::Stable, {tap("b")}},
                                    {2, 0, 1, {0, 1}, 5, ReplayStatus::Stable, {tap("c")}}};
  auto plan = default_plan(rec, "On", {1, 4}, frags);
  ASSERT_EQ(plan.replays.size(), 2u);
  EXPECT_EQ(plan.replays[0].fragment_id, 2);
  EXPECT_EQ(plan.replays[1].fragment_id, -1);  // nothing enters cluster 4
  auto relevant = default_plan(rec, "On", {1}, frags,
                               [](const FragmentDigest& f, ClusterId) { return f.id == 1 ? 1 : 0; });
  EXPECT_EQ(relevant.replays[0].fragment_id, 1);
}

struct MiniRun {
  MiniRun() {
    ExperimentConfig config = config_for(testing::mini_app());
    config.stop_after = Stage::Stabilize;
    config.warmup_events = 80;
    result = run_experiment(config);
  }
  ExperimentResult result;
};

TEST(OracleReasoner, ValidatesScopesAndLocatesImpactOnMiniApp) {
  MiniRun run;
  RunContext& ctx = *run.result.context;
  ASSERT_GE(ctx.mses.size(), 1u);
  const MseRecord& rec = ctx.mses.at(0);
  EXPECT_EQ(rec.widget_id, "dark_switch");
  OracleReasoner oracle(run.result.model);
  ReasonerContext context = make_context(ctx, rec.cluster);
  EXPECT_EQ(oracle.validate_mse(rec, context), Validation::Valid);
  EXPECT_EQ(oracle.classify_scope(rec, context), ImpactScope::InterPage);
  auto affected = oracle.infer_impact(rec, "On", context);
  ASSERT_EQ(affected.size(), 1u);
  EXPECT_EQ(ctx.clusters.at(affected[0]).page_hint, "list");
  EXPECT_FALSE(oracle.summarize_cluster(context).empty());
}

TEST(OracleReasoner, NoiseKnobsAreSeededAndDeterministic) {
  MiniRun run;
  RunContext& ctx = *run.result.context;
  const MseRecord& rec = ctx.mses.at(0);
  ReasonerContext context = make_context(ctx, rec.cluster);
  auto verdicts = [&](std::uint64_t seed) {
    OracleReasoner noisy(run.result.model, OracleNoise{0.5, 1.0, 1.0, seed});
    std::vector<Validation> out;
    for (int i = 0; i < 40; ++i) out.push_back(noisy.validate_mse(rec, context));
    return out;
  };
  auto a = verdicts(4);
  EXPECT_EQ(a, verdicts(4));
  EXPECT_NE(std::count(a.begin(), a.end(), Validation::Noise), 0);
  EXPECT_NE(std::count(a.begin(), a.end(), Validation::Valid), 0);
}

TEST(WireReasoner, RemoteOverHttpMatchesInProcessOracle) {
  auto model = testing::fixture(testing::kCase1);
  ExperimentConfig config = config_for(model, 2);
  ExperimentResult local = run_experiment(config);

  OracleReasoner backend(model);
  ReasonServer server(backend, "sekrit");
  config.reasoner = ReasonerKind::Remote;
  config.remote.endpoint = server.endpoint();
  config.remote.token = "sekrit";
  ExperimentResult remote = run_experiment(config);
  EXPECT_TRUE(remote.degradations.empty()) << remote.degradations.front();
  EXPECT_EQ(remote.metrics.covered, local.metrics.covered);
  EXPECT_EQ(remote.context->monitor.curve(), local.context->monitor.curve());
  EXPECT_EQ(report_json(remote, false)["recomposition"], report_json(local, false)["recomposition"]);
}

TEST(WireReasoner, WrongTokenDegradesToConservativeAnswers) {
  auto model = testing::mini_app();
  OracleReasoner backend(model);
  ReasonServer server(backend, "right");
  RemoteReasoner client(RemoteConfig{server.endpoint(), "wrong", std::chrono::milliseconds(2000), 0}, "s");
  MseRecord rec;
  rec.cluster = 0;
  ReasonerContext context;
  EXPECT_EQ(client.validate_mse(rec, context), Validation::Noise);
  EXPECT_EQ(client.classify_scope(rec, context), ImpactScope::IntraPage);
  EXPECT_EQ(client.infer_impact(rec, "On", context), (std::vector<ClusterId>{0}));
  EXPECT_EQ(client.guide_mutation(MutationGoal{}, context).kind, GuideResult::Kind::Unreachable);
  EXPECT_EQ(client.degradations().size(), 4u);
}

TEST(WireReasoner, TimeoutsAreBoundedAndRetried) {
  auto model = testing::mini_app();
  OracleReasoner backend(model);
  ReasonServer server(backend, "", std::chrono::milliseconds(600));
  RemoteReasoner client(RemoteConfig{server.endpoint(), "", std::chrono::milliseconds(100), 1}, "s");
  ReasonerContext context;
  context.focal_cluster = 0;
  const auto start = std::chrono::steady_clock::now();
  std::string summary = client.summarize_cluster(context);
  const auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_EQ(summary, "unsummarized cluster 0");
  EXPECT_EQ(client.requests_sent(), 2);
  EXPECT_LT(elapsed, std::chrono::milliseconds(1500));
  ASSERT_EQ(client.degradations().size(), 1u);
}

TEST(WireReasoner, UnreachableEndpointFallsBack) {
  RemoteReasoner client(RemoteConfig{"http://127.0.0.1:1", "", std::chrono::milliseconds(200), 0}, "s");
  MseRecord rec;
  rec.cluster = 5;
  CompositePlan plan = client.plan_composite(rec, "On", {5, 6}, {}, ReasonerContext{});
  ASSERT_EQ(plan.replays.size(), 2u);
  EXPECT_EQ(plan.replays[0].fragment_id, -1);
}

TEST(WireReasoner, TranscriptReplayReproducesTheRun) {
  auto model = testing::fixture(testing::kCascade);
  ExperimentConfig config = config_for(model, 4);
  const auto transcript = temp_path("transcript.jsonl");
  OracleReasoner oracle(model);
  ExperimentResult recorded;
  {
    RecordingReasoner recorder(oracle, transcript, "cascade_lab-4");
    recorded = run_experiment(config, &recorder);
  }
  TranscriptReasoner replayer(transcript, "cascade_lab-4");
  ExperimentResult replayed = run_experiment(config, &replayer);
  EXPECT_EQ(replayer.remaining(), 0u);
  EXPECT_EQ(report_json(replayed, false), report_json(recorded, false));

  // A different run asks different questions and is caught.
  TranscriptReasoner strict(transcript, "cascade_lab-4");
  ExperimentConfig other = config_for(model, 5);
  EXPECT_THROW(run_experiment(other, &strict), TranscriptMismatch);
  std::filesystem::remove(transcript);
}

}  // namespace
}  // namespace epidroid
