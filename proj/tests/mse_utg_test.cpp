#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "epidroid/mse_tracker.hpp"
#include "epidroid/semantic_utg.hpp"

namespace epidroid {
namespace {

ViewNode page_with(std::vector<ViewNode> children) {
  ViewNode root;
  root.widget_id = "page";
  for (auto& c : children) c.depth = 1;
  root.children = std::move(children);
  return root;
}

ViewNode switch_node(std::string id, bool on) {
  ViewNode n;
  n.widget_id = std::move(id);
  n.kind = WidgetKind::Switch;
  n.attributes.checked = on;
  return n;
}

ViewNode radio_node(std::string id, std::string selected, std::vector<std::string> options) {
  ViewNode n;
  n.widget_id = std::move(id);
  n.kind = WidgetKind::RadioGroup;
  n.attributes.selected = std::move(selected);
  n.attributes.options = std::move(options);
  return n;
}

Event tap(std::string widget) { return Event{std::move(widget), EventKind::Tap, std::nullopt}; }

TEST(MseTracker, AbstractValuesPerKind) {
  EXPECT_EQ(abstract_value(switch_node("s", true)), "On");
  ViewNode input;
  input.kind = WidgetKind::Input;
  input.attributes.text = "";
  EXPECT_EQ(abstract_value(input), "Empty");
  input.attributes.text = "abc";
  EXPECT_EQ(abstract_value(input), "Filled");
  ViewNode container;
  container.kind = WidgetKind::Container;
  container.attributes.item_count = 3;
  EXPECT_EQ(abstract_value(container), "Populated");
  EXPECT_EQ(abstract_value(radio_node("r", "B", {"A", "B"})), "B");
  ViewNode button;
  button.kind = WidgetKind::Button;
  EXPECT_FALSE(abstract_value(button).has_value());
  EXPECT_EQ(value_domain(switch_node("s", false)), (std::vector<std::string>{"Off", "On"}));
}

TEST(MseTracker, DetectsOnlyChangedWidgetsPresentInBoth) {
  ViewNode pre = page_with({switch_node("a", false), switch_node("b", true), switch_node("gone", false)});
  ViewNode post = page_with({switch_node("a", true), switch_node("b", true), switch_node("new", true)});
  auto obs = detect_candidates(pre, tap("a"), post, 4);
  ASSERT_EQ(obs.size(), 1u);
  EXPECT_EQ(obs[0].widget_id, "a");
  EXPECT_EQ(obs[0].before, "Off");
  EXPECT_EQ(obs[0].after, "On");
  EXPECT_EQ(obs[0].cluster, 4);
  EXPECT_EQ(obs[0].trigger, tap("a"));
  EXPECT_TRUE(detect_candidates(pre, tap("x"), pre, 4).empty());
}

TEST(MseTracker, RegistryMergesByClusterAndWidget) {
  MseRegistry reg;
  ViewNode off = page_with({switch_node("dark", false)});
  ViewNode on = page_with({switch_node("dark", true)});
  auto first = detect_candidates(off, tap("dark"), on, 1).at(0);
  auto out = reg.record_observation(first, {tap("open"), tap("dark")});
  EXPECT_TRUE(out.accepted && out.created);
  auto second = detect_candidates(on, tap("dark"), off, 1).at(0);
  out = reg.record_observation(second, {tap("dark")});
  EXPECT_TRUE(out.accepted);
  EXPECT_FALSE(out.created);
  ASSERT_EQ(reg.size(), 1u);
  const auto& rec = reg.at(0);
  EXPECT_EQ(rec.observed_values, (std::vector<std::string>{"Off", "On"}));
  EXPECT_EQ(rec.sigma_sea.size(), 1u);  // shorter sequence wins
  EXPECT_EQ(rec.history.size(), 2u);
  EXPECT_TRUE(unvisited_values(rec).empty());

  // Same widget id in another cluster is a distinct element.
  out = reg.record_observation(detect_candidates(off, tap("dark"), on, 2).at(0), {});
  EXPECT_TRUE(out.created);
  EXPECT_EQ(reg.find(2, "dark"), 1);
}

TEST(MseTracker, RejectsValuesOutsideDomain) {
  MseRegistry reg;
  MseObservation obs;
  obs.cluster = 0;
  obs.widget_id = "r";
  obs.kind = MseKind::RadioGroup;
  obs.domain = {"A", "B"};
  obs.before = "A";
  obs.after = "Z";
  auto out = reg.record_observation(obs, {});
  EXPECT_FALSE(out.accepted);
  EXPECT_EQ(reg.size(), 0u);
  EXPECT_EQ(reg.rejections().size(), 1u);
  obs.domain = {"A", "B", "C", "D", "E"};
  obs.after = "B";
  EXPECT_FALSE(reg.record_observation(obs, {}).accepted);
}

TEST(MseTracker, NextTargetPrefersUnvisitedThenUntriedNonDefault) {
  MseRecord rec;
  rec.kind = MseKind::RadioGroup;
  rec.domain = {"A", "B", "C"};
  rec.observed_values = {"B", "A"};
  EXPECT_EQ(next_target_value(rec), "C");
  rec.observed_values = {"B", "A", "C"};
  EXPECT_EQ(next_target_value(rec), "A");
  rec.tried_targets = {"A"};
  EXPECT_EQ(next_target_value(rec), "C");
  rec.tried_targets = {"A", "C"};
  EXPECT_FALSE(next_target_value(rec).has_value());
}

TEST(SemanticUtg, UpsertIsIdempotentAndChecksClusters) {
  SemanticUtg utg;
  utg.register_cluster(2);
  EXPECT_EQ(utg.cluster_count(), 3u);
  EXPECT_TRUE(utg.upsert_transition(0, tap("go"), 1));
  EXPECT_FALSE(utg.upsert_transition(0, tap("go"), 1));
  EXPECT_TRUE(utg.upsert_transition(0, tap("go"), 2));
  EXPECT_EQ(utg.edges().size(), 2u);
  EXPECT_THROW(utg.upsert_transition(0, tap("go"), 7), UnknownClusterError);
  EXPECT_THROW(utg.out_edges(-1), UnknownClusterError);
}

TEST(SemanticUtg, ShortestRouteBreaksTiesByLowestTarget) {
  SemanticUtg utg;
  utg.register_cluster(4);
  utg.upsert_transition(0, tap("to3"), 3);
  utg.upsert_transition(0, tap("to2"), 2);
  utg.upsert_transition(3, tap("3to4"), 4);
  utg.upsert_transition(2, tap("2to4"), 4);
  auto route = utg.shortest_path(0, 4);
  ASSERT_TRUE(route);
  EXPECT_EQ(*route, (EventSequence{tap("to2"), tap("2to4")}));
  EXPECT_TRUE(utg.shortest_path(4, 4)->empty());
  EXPECT_FALSE(utg.shortest_path(4, 0).has_value());
  EXPECT_FALSE(utg.shortest_path(1, 4).has_value());
  EXPECT_EQ(utg.reachable_from(2), (std::set<ClusterId>{2, 4}));
}

TEST(SemanticUtg, PrunedPrefixesMatchExtensions) {
  SemanticUtg utg;
  utg.add_pruned_prefix({tap("a"), tap("b")});
  EXPECT_TRUE(utg.extends_pruned_prefix({tap("a"), tap("b")}));
  EXPECT_TRUE(utg.extends_pruned_prefix({tap("a"), tap("b"), tap("c")}));
  EXPECT_FALSE(utg.extends_pruned_prefix({tap("a")}));
  EXPECT_FALSE(utg.extends_pruned_prefix({tap("b"), tap("a")}));
}

TEST(PriorityQueue, OrdersByScopeThenUnvisitedThenFifo) {
  std::mt19937_64 rng(5);
  const ImpactScope scopes[] = {ImpactScope::Unknown, ImpactScope::IntraPage, ImpactScope::InterPage,
                                ImpactScope::Global};
  for (int round = 0; round < 300; ++round) {
    MsePriorityQueue queue;
    struct Item {
      MseId id;
      int rank;
      bool unvisited;
      int order;
    };
    std::vector<Item> items;
    const int n = static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      ImpactScope s = scopes[rng() % 4];
      bool u = rng() % 2;
      MseId id = static_cast<MseId>(rng() % 5);  // duplicates allowed
      queue.enqueue(id, s, u);
      items.push_back({id, scope_rank(s), u, i});
    }
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
      return std::make_tuple(a.rank, !a.unvisited) < std::make_tuple(b.rank, !b.unvisited);
    });
    for (const auto& item : items) EXPECT_EQ(queue.pop_highest(), item.id);
    EXPECT_FALSE(queue.pop_highest().has_value());
  }
}

TEST(PriorityQueue, RetiredEntriesNeverReturn) {
  MsePriorityQueue queue;
  queue.enqueue(1, ImpactScope::InterPage, true);
  queue.enqueue(2, ImpactScope::Unknown, true);
  queue.retire(1);
  queue.enqueue(1, ImpactScope::InterPage, true);
  EXPECT_EQ(queue.pop_highest(), 2);
  EXPECT_TRUE(queue.empty());
}

MseRecord binary_record() {
  MseRecord rec;
  rec.id = 0;
  rec.widget_id = "sw";
  rec.domain = {"Off", "On"};
  rec.observed_values = {"Off"};
  rec.scope = ImpactScope::InterPage;
  return rec;
}

TEST(Feedback, ClassificationDecisionStructure) {
  EXPECT_EQ(classify_signal(false, 5, 5), SignalKind::OperationalFailure);
  EXPECT_EQ(classify_signal(true, 1, 0), SignalKind::PositiveDiscovery);
  EXPECT_EQ(classify_signal(true, 0, 1), SignalKind::PositiveDiscovery);
  EXPECT_EQ(classify_signal(true, 0, 0), SignalKind::SemanticMismatch);
}

TEST(Feedback, DiscoveryConfirmsDependencies) {
  SemanticUtg utg;
  utg.register_cluster(4);
  MsePriorityQueue queue;
  MseRecord rec = binary_record();
  PositiveDiscovery pos;
  pos.coverage_gain = 3;
  pos.per_cluster = {{4, 3, 1}};
  apply_feedback(utg, queue, rec, pos, "On");
  ASSERT_EQ(utg.confirmed_dependencies().size(), 1u);
  EXPECT_EQ(utg.confirmed_dependencies()[0].affected, 4);
  EXPECT_EQ(utg.confirmed_dependencies()[0].target_value, "On");
  EXPECT_EQ(rec.mismatch_count, 0);
}

TEST(Feedback, TwoMismatchesRetire) {
  SemanticUtg utg;
  MsePriorityQueue queue;
  MseRecord rec = binary_record();
  apply_feedback(utg, queue, rec, SemanticMismatch{}, "On");
  EXPECT_FALSE(queue.retired(0));
  EXPECT_TRUE(queue.contains(0));
  apply_feedback(utg, queue, rec, SemanticMismatch{}, "On");
  EXPECT_TRUE(queue.retired(0));
  EXPECT_FALSE(queue.contains(0));
}

TEST(Feedback, OperationalFailurePrunesAndRetriesOnce) {
  SemanticUtg utg;
  MsePriorityQueue queue;
  MseRecord rec = binary_record();
  rec.tried_targets = {"On"};
  OperationalFailure failure{{tap("a")}, tap("b"), "stale"};
  apply_feedback(utg, queue, rec, failure, "On");
  EXPECT_TRUE(utg.extends_pruned_prefix({tap("a"), tap("b")}));
  EXPECT_TRUE(queue.contains(0));
  EXPECT_TRUE(rec.tried_targets.empty());
  EXPECT_EQ(queue.pop_highest(), 0);
  apply_feedback(utg, queue, rec, failure, "On");
  EXPECT_FALSE(queue.contains(0));
}

}  // namespace
}  // namespace epidroid
