#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "epidroid/coverage.hpp"
#include "epidroid/device.hpp"
#include "epidroid/explorers.hpp"
#include "epidroid/trace_store.hpp"
#include "test_support.hpp"

namespace epidroid {
namespace {

Event tap(std::string widget) { return Event{std::move(widget), EventKind::Tap, std::nullopt}; }

struct Rig {
  explicit Rig(std::shared_ptr<const AppModel> m, std::uint64_t seed = 1)
      : model(std::move(m)), ctx(model, kDefaultClusterThreshold, seed), device(ctx) {}

  Trace record(const EventSequence& events) {
    Trace trace;
    device.attach_trace(&trace);
    device.reset();
    for (const auto& e : events) {
      if (e.widget == "<reset>") {
        device.reset();
      } else {
        device.step(e);
      }
    }
    device.attach_trace(nullptr);
    return trace;
  }

  std::shared_ptr<const AppModel> model;
  RunContext ctx;
  Device device;
};

const Event kReset{"<reset>", EventKind::Tap, std::nullopt};

TEST(Coverage, MonitorCountsLabelsActivitiesAndCurve) {
  CoverageMonitor monitor(4, {"A", "B"});
  std::vector<LabelId> first{0, 1};
  EXPECT_EQ(monitor.record_event(first, "A"), 2u);
  EXPECT_EQ(monitor.record_event(first, "A"), 0u);
  monitor.begin_phase("second");
  std::vector<LabelId> second{1, 3};
  EXPECT_EQ(monitor.record_event(second, "B"), 1u);
  EXPECT_EQ(monitor.curve(), (std::vector<std::uint32_t>{2, 2, 3}));
  EXPECT_DOUBLE_EQ(monitor.acc(), 0.75);
  EXPECT_DOUBLE_EQ(monitor.aac(), 1.0);
  ASSERT_EQ(monitor.phases().size(), 1u);
  EXPECT_EQ(monitor.phases()[0].start_event, 2u);
  EXPECT_EQ(monitor.phases()[0].start_covered, 2u);
  EXPECT_EQ(monitor.covered_labels(), (std::vector<LabelId>{0, 1, 3}));
}

TEST(Trace, DeviceTraceIsChainedAndRoundTripsThroughJsonl) {
  Rig rig(testing::mini_app());
  Trace trace = rig.record({tap("open_list"), tap("export"), tap("list_back"), tap("open_settings"),
                            tap("dark_switch"), kReset, tap("open_list"), tap("export")});
  ASSERT_EQ(trace.steps.size(), 7u);
  EXPECT_TRUE(trace_chained(trace));
  EXPECT_TRUE(trace.steps[0].reset_before);
  EXPECT_TRUE(trace.steps[5].reset_before);
  EXPECT_FALSE(trace.steps[3].reset_before);

  std::stringstream buffer;
  write_trace_jsonl(trace, *rig.model, buffer);
  Trace back = read_trace_jsonl(buffer, *rig.model);
  ASSERT_EQ(back.steps.size(), trace.steps.size());
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    EXPECT_EQ(back.steps[i].event, trace.steps[i].event);
    EXPECT_EQ(back.steps[i].pre_signature, trace.steps[i].pre_signature);
    EXPECT_EQ(back.steps[i].post_signature, trace.steps[i].post_signature);
    EXPECT_EQ(back.steps[i].coverage_delta, trace.steps[i].coverage_delta);
    EXPECT_EQ(back.steps[i].reset_before, trace.steps[i].reset_before);
  }
}

TEST(Trace, MalformedJsonlIsRejected) {
  auto model = testing::mini_app();
  std::stringstream bad("{not json}\n");
  EXPECT_ANY_THROW(read_trace_jsonl(bad, *model));
}

TEST(TraceStore, SlicesAtResetsReentryAndCap) {
  Rig rig(testing::mini_app());
  Trace trace = rig.record({tap("open_list"), tap("export"), tap("list_back"), tap("open_settings"),
                            tap("dark_switch"), kReset, tap("open_list"), tap("export")});
  const ClusterId entry = trace.steps[0].pre_cluster;

  auto slices = slice_trace(trace, entry);
  // Re-entry into home after list_back closes the first slice.
  ASSERT_EQ(slices.size(), 3u);
  EXPECT_EQ(slices[0].events, (EventSequence{tap("open_list"), tap("export"), tap("list_back")}));
  EXPECT_EQ(slices[1].events, (EventSequence{tap("open_settings"), tap("dark_switch")}));
  EXPECT_EQ(slices[2].events, (EventSequence{tap("open_list"), tap("export")}));
  for (const auto& s : slices) {
    EXPECT_EQ(s.cluster_path.size(), s.events.size() + 1);
    EXPECT_EQ(s.footprint, union_of_deltas(s));
  }

  auto whole = slice_trace(trace, entry, SliceConfig{100, false});
  ASSERT_EQ(whole.size(), 2u);
  EXPECT_EQ(whole[0].events.size(), 5u);

  auto capped = slice_trace(trace, entry, SliceConfig{1, true});
  for (const auto& s : capped) EXPECT_EQ(s.events.size(), 1u);
}

TEST(TraceStore, ZeroCoverageSlicesAreDropped) {
  Rig rig(testing::mini_app());
  // Coverage deltas are per episode, so each episode's first open_list counts.
  Trace twice = rig.record({tap("open_list"), kReset, tap("open_list")});
  EXPECT_EQ(slice_trace(twice, twice.steps[0].pre_cluster).size(), 2u);
  Trace inert = rig.record({tap("open_list"), tap("list_a")});
  auto inert_slices = slice_trace(inert, inert.steps[0].pre_cluster, SliceConfig{1, true});
  EXPECT_EQ(inert_slices.size(), 1u);  // list_a emits no label
}

TEST(TraceStore, VerifyReplayDetectsDivergence) {
  Rig rig(testing::mini_app());
  Trace trace = rig.record({tap("open_settings"), tap("dark_switch"), tap("settings_back"), tap("open_list"),
                            tap("night_item")});
  auto whole = slice_trace(trace, trace.steps[0].pre_cluster, SliceConfig{100, false});
  ASSERT_EQ(whole.size(), 1u);
  EXPECT_TRUE(verify_replay(whole[0], rig.device).stable());

  TestFragment broken = whole[0];
  broken.events.erase(broken.events.begin() + 1);  // never enables dark
  broken.cluster_path.erase(broken.cluster_path.begin() + 1);
  broken.signature_path.erase(broken.signature_path.begin() + 1);
  broken.step_deltas.erase(broken.step_deltas.begin() + 1);
  auto result = verify_replay(broken, rig.device);
  EXPECT_FALSE(result.stable());
  ASSERT_TRUE(result.divergence_index.has_value());
  EXPECT_EQ(*result.divergence_index, 3u);  // night_item is hidden
}

TEST(TraceStore, MinimizeRemovesZeroCoverageLoops) {
  TestFragment f;
  f.events = {tap("a"), tap("loop_out"), tap("loop_back"), tap("b"), tap("idle")};
  f.signature_path = {1, 2, 3, 2, 4, 2};
  f.cluster_path = {0, 1, 2, 1, 3, 1};
  f.step_deltas = {{0}, {}, {}, {1}, {}};
  f.footprint = {0, 1};
  TestFragment m = minimize_steps(f);
  EXPECT_EQ(m.events, (EventSequence{tap("a"), tap("b")}));
  EXPECT_EQ(m.signature_path, (std::vector<Signature>{1, 2, 4}));
  EXPECT_EQ(m.footprint, f.footprint);

  // A loop that covers something is kept.
  f.step_deltas[1] = {7};
  EXPECT_EQ(minimize_steps(f).events.size(), 4u);
}

TEST(TraceStore, EliminateRedundancyKeepsOriginalWhenOracleRejects) {
  TestFragment f;
  f.events = {tap("a"), tap("x"), tap("y")};
  f.signature_path = {1, 2, 3, 2};
  f.cluster_path = {0, 1, 2, 1};
  f.step_deltas = {{0}, {}, {}};
  f.footprint = {0};
  auto unstable = [](const TestFragment&) { return ReplayCheck{false, {}}; };
  EXPECT_EQ(eliminate_redundancy(f, unstable).events.size(), 3u);
  auto fine = [](const TestFragment&) { return ReplayCheck{true, {0}}; };
  EXPECT_EQ(eliminate_redundancy(f, fine).events.size(), 1u);
  auto loses = [](const TestFragment& c) {
    return ReplayCheck{true, c.events.size() == 3 ? std::vector<LabelId>{0} : std::vector<LabelId>{}};
  };
  EXPECT_EQ(eliminate_redundancy(f, loses).events.size(), 3u);
}

TEST(TraceStore, StabilizedFragmentsReplayTheirFootprint) {
  for (const char* name : {testing::kCase1, testing::kShop, testing::kCascade}) {
    SCOPED_TRACE(name);
    Rig rig(testing::fixture(name), 3);
    Trace trace = explore(rig.device, ExplorerConfig{ExplorerKind::Random, 300, 3});
    StabilizeReport report = stabilize({trace}, rig.device);
    ASSERT_FALSE(report.fragments.empty());
    EXPECT_LE(report.steps_after, report.steps_before);
    for (const auto& f : report.fragments) {
      if (f.status != ReplayStatus::Stable) continue;
      ASSERT_TRUE(verify_replay(f, rig.device).stable());
      auto covered = rig.device.session().covered_labels();
      EXPECT_TRUE(std::includes(covered.begin(), covered.end(), f.footprint.begin(), f.footprint.end()));
    }
  }
}

TEST(TraceStore, FragmentsThroughOrdersStableThenFootprint) {
  std::vector<TestFragment> store(3);
  for (int i = 0; i < 3; ++i) {
    store[i].id = i;
    store[i].cluster_path = {0, 5};
    store[i].status = ReplayStatus::Stable;
  }
  store[0].footprint = {1};
  store[1].footprint = {1, 2};
  store[2].footprint = {1, 2, 3};
  store[2].status = ReplayStatus::Truncated;
  auto through = fragments_through(store, 5);
  ASSERT_EQ(through.size(), 3u);
  EXPECT_EQ(through[0]->id, 1);
  EXPECT_EQ(through[1]->id, 0);
  EXPECT_EQ(through[2]->id, 2);
  EXPECT_TRUE(fragments_through(store, 9).empty());
}

TEST(Explorers, SameSeedSameTrace) {
  auto model = testing::fixture(testing::kNoise);
  for (auto kind : {ExplorerKind::Random, ExplorerKind::Frontier}) {
    Rig a(model, 9), b(model, 9);
    Trace ta = explore(a.device, ExplorerConfig{kind, 200, 9});
    Trace tb = explore(b.device, ExplorerConfig{kind, 200, 9});
    ASSERT_EQ(ta.steps.size(), tb.steps.size());
    for (std::size_t i = 0; i < ta.steps.size(); ++i) EXPECT_EQ(ta.steps[i].event, tb.steps[i].event);
    EXPECT_EQ(a.ctx.monitor.curve(), b.ctx.monitor.curve());
  }
}

TEST(Explorers, BudgetIsRespected) {
  Rig rig(testing::fixture(testing::kCase1));
  Trace trace = explore(rig.device, ExplorerConfig{ExplorerKind::Frontier, 37, 1});
  EXPECT_EQ(trace.steps.size(), 37u);
  EXPECT_EQ(rig.ctx.monitor.events(), 37u);
}

TEST(Explorers, FrontierFiresDistinctActionsFirst) {
  Rig rig(testing::mini_app());
  Trace trace = explore(rig.device, ExplorerConfig{ExplorerKind::Frontier, 60, 2});
  // Every ungated label of the mini app is reachable without repeated actions.
  EXPECT_GE(rig.ctx.monitor.covered_count(), 6u);
  std::set<std::pair<ClusterId, Event>> first;
  std::size_t k = 0;
  for (const auto& s : trace.steps) {
    if (!first.insert({s.pre_cluster, s.event}).second) break;
    ++k;
  }
  EXPECT_GE(k, 4u);
}

}  // namespace
}  // namespace epidroid
