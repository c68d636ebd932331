#include "epidroid/recomposer.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace epidroid {

constexpr int kNavigationAttempts = 3;  // routes tried before a navigation counts as failed

BfsResult bounded_bfs(Device& device, int depth, int budget) {
  BfsResult out;
  if (depth <= 0 || budget <= 0) return out;
  RunContext& ctx = device.context();
  const Signature start_sig = device.signature();
  const ClusterId start_cluster = device.cluster();
  const std::size_t covered_before = ctx.monitor.covered_count();

  struct Node {
    Signature signature;
    EventSequence path;
    int level;
  };
  std::deque<Node> frontier{Node{start_sig, {}, 0}};
  std::set<Signature> enqueued{start_sig};
  std::set<Signature> recorded;

  auto reach = [&](const Node& node) {
    if (device.signature() == node.signature) return true;
    if (device.signature() != start_sig) {
      if (device.cluster() != start_cluster) {
        auto path = ctx.utg.shortest_path(device.cluster(), start_cluster);
        if (!path) return false;
        for (const auto& e : *path) {
          if (!device.step(e)) return false;
        }
      }
      if (device.signature() != start_sig) return false;
    }
    for (const auto& e : node.path) {
      if (!device.step(e)) return false;
    }
    return device.signature() == node.signature;
  };

  const auto limit = static_cast<std::size_t>(budget);
  while (!frontier.empty() && out.actions < limit) {
    Node node = std::move(frontier.front());
    frontier.pop_front();
    if (!reach(node)) continue;
    const auto events = actionable_events(device.tree());
    for (std::size_t k = 0; k < events.size() && out.actions < limit; ++k) {
      if (!reach(node)) break;
      auto step = device.step(events[k]);
      if (!step) continue;
      ++out.actions;
      const Signature post = step->step.post_signature;
      if (step->new_state && recorded.insert(post).second) out.new_states.push_back(post);
      if (node.level + 1 < depth && enqueued.insert(post).second) {
        EventSequence path = node.path;
        path.push_back(events[k]);
        frontier.push_back(Node{post, std::move(path), node.level + 1});
      }
    }
  }
  out.coverage_gain = ctx.monitor.covered_count() - covered_before;
  return out;
}

StateSnapshot snapshot_of(const Session& session) {
  StateSnapshot snapshot;
  snapshot.page = session.page_id();
  const auto& vars = session.model().variables;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    snapshot.values.emplace_back(vars[i].name, format_value(vars[i], session.valuation()[i]));
  }
  return snapshot;
}

ReasonerContext make_context(const RunContext& ctx, ClusterId focal, const std::string& session) {
  ReasonerContext context;
  context.session = session;
  context.focal_cluster = focal;
  for (const auto& cluster : ctx.clusters.clusters()) {
    ClusterDigest digest;
    digest.id = cluster.id;
    digest.activity = cluster.activity;
    digest.page_hint = cluster.page_hint;
    digest.summary = ctx.utg.summary(cluster.id);
    if (ctx.utg.has_cluster(cluster.id)) {
      std::set<ClusterId> successors;
      for (const auto& edge : ctx.utg.out_edges(cluster.id)) successors.insert(edge.target);
      digest.successors.assign(successors.begin(), successors.end());
    }
    if (auto it = ctx.utg.mse_annotations().find(cluster.id); it != ctx.utg.mse_annotations().end()) {
      digest.mses.assign(it->second.begin(), it->second.end());
    }
    context.clusters.push_back(std::move(digest));
  }
  if (focal >= 0 && static_cast<std::size_t>(focal) < ctx.clusters.size()) {
    context.focal_tree = *ctx.clusters.at(focal).concrete_representative;
  }
  return context;
}

Recomposer::Recomposer(Device& device, Reasoner& reasoner, std::vector<TestFragment> fragments,
                       RecomposerConfig config)
    : device_(device),
      reasoner_(reasoner),
      fragments_(std::move(fragments)),
      config_(config),
      rng_(config.seed ^ 0x5eedfeedULL) {
  for (const auto& f : fragments_) digests_.push_back(digest_of(f));
}

void Recomposer::profile() {
  RunContext& ctx = device_.context();
  for (const auto& cluster : ctx.clusters.clusters()) {
    if (ctx.utg.summary(cluster.id)) continue;
    ctx.utg.register_cluster(cluster.id);
    ctx.utg.set_summary(cluster.id, reasoner_.summarize_cluster(make_context(ctx, cluster.id)));
  }
  for (const auto& r : ctx.mses.records()) {
    if (r.validated != Validation::Pending) continue;
    MseRecord& record = ctx.mses.at(r.id);
    if (!config_.dependency_reasoning) {
      record.validated = Validation::Valid;
      record.scope = ImpactScope::IntraPage;
      queue_.enqueue(record);
      continue;
    }
    auto context = make_context(ctx, record.cluster);
    record.validated = reasoner_.validate_mse(record, context);
    if (record.validated != Validation::Valid) continue;
    record.scope = reasoner_.classify_scope(record, context);
    record.priority_rank = scope_rank(record.scope);
    queue_.enqueue(record);
  }
}

bool Recomposer::navigate_to(ClusterId target, EventSequence& executed, std::optional<Event>& failing,
                             bool& new_state) {
  RunContext& ctx = device_.context();
  // A diverted step re-plans from wherever the device landed.
  for (int attempt = 0; attempt < kNavigationAttempts; ++attempt) {
    if (device_.cluster() == target) return true;
    auto route = ctx.utg.shortest_route(device_.cluster(), target);
    if (!route) return false;
    bool diverged = false;
    for (const auto& edge : *route) {
      auto step = device_.step(edge.event);
      if (!step) {
        failing = edge.event;
        return false;
      }
      new_state = step->new_state;
      executed.push_back(edge.event);
      if (step->step.post_cluster != edge.target) {
        failing = edge.event;
        diverged = true;
        break;
      }
    }
    if (!diverged) return device_.cluster() == target;
  }
  return false;
}

bool Recomposer::goal_satisfied(const MutationGoal& goal) const {
  const ViewNode& tree = device_.tree();
  if (tree.widget_id != goal.page_hint) return false;
  const ViewNode* node = find_widget(tree, goal.widget_id);
  if (!node) return false;
  auto value = abstract_value(*node);
  return value && *value == goal.target_value;
}

CompositeResult Recomposer::execute_composite(const CompositePlan& plan) {
  RunContext& ctx = device_.context();
  CompositeResult result;
  const std::uint64_t events_before = device_.events();
  EventSequence executed;
  std::optional<Event> failing;
  bool arrival_new = false;
  auto fail = [&](std::string reason) {
    result.signal = OperationalFailure{executed, failing, std::move(reason)};
    result.events = device_.events() - events_before;
    return result;
  };

  // Navigation to the mutation cluster; a clean restart is allowed when the
  // current position has no route there.
  if (!ctx.utg.has_cluster(plan.mutation_cluster)) return fail("unknown mutation cluster");
  if (!ctx.utg.shortest_route(device_.cluster(), plan.mutation_cluster)) device_.reset();
  if (!navigate_to(plan.mutation_cluster, executed, failing, arrival_new)) {
    return fail(failing ? "navigation diverged" : "no path to mutation cluster");
  }

  // State mutation.
  MutationGoal goal{plan.mse, plan.widget_id, plan.mutation_cluster, ctx.clusters.at(plan.mutation_cluster).page_hint,
                    plan.target_value};
  if (!goal_satisfied(goal)) {
    for (Event event : plan.sigma_sea) {
      if (event.widget == plan.widget_id && event.kind == EventKind::Select) event.text = plan.target_value;
      if (!device_.step(event)) {
        failing = event;
        return fail("stale widget during mutation");
      }
      executed.push_back(event);
    }
    for (int i = 0; i < config_.max_guide_steps && !goal_satisfied(goal); ++i) {
      ReasonerContext context = make_context(ctx, device_.cluster());
      context.current_tree = device_.tree();
      context.state = snapshot_of(device_.session());
      GuideResult guide = reasoner_.guide_mutation(goal, context);
      if (guide.kind != GuideResult::Kind::Step || !guide.event) break;
      if (!device_.step(*guide.event)) {
        failing = guide.event;
        return fail("stale widget during guided mutation");
      }
      executed.push_back(*guide.event);
    }
  }
  result.delta_sigma_observed = goal_satisfied(goal);
  if (!result.delta_sigma_observed) return fail("mutation evidence not observed");

  // Dependent replay under the mutated state.
  const std::size_t covered_before = ctx.monitor.covered_count();
  std::vector<Signature> new_states;
  std::vector<ClusterGain> gains;
  for (const auto& replay : plan.replays) {
    const std::size_t cluster_cov = ctx.monitor.covered_count();
    const std::size_t cluster_states = new_states.size();
    EventSequence nav;
    std::optional<Event> nav_fail;
    bool arrived_new = false;
    if (!ctx.utg.has_cluster(replay.cluster) || !navigate_to(replay.cluster, nav, nav_fail, arrived_new)) continue;
    ++result.clusters_processed;
    auto harvest = [&](Signature sig) {
      if (arrived_new) new_states.push_back(sig);
      harvested_.insert(sig);
      BfsResult bfs = bounded_bfs(device_, config_.bfs_depth, config_.bfs_budget);
      new_states.insert(new_states.end(), bfs.new_states.begin(), bfs.new_states.end());
    };
    bool positioned = true;
    // States first reached by earlier stages were never expanded under the
    // mutated state, so they are harvested once even when not new.
    if (arrived_new || !harvested_.count(device_.signature())) {
      harvest(device_.signature());
      EventSequence back;
      std::optional<Event> back_fail;
      bool ignored = false;
      positioned = navigate_to(replay.cluster, back, back_fail, ignored);
    }
    if (positioned && replay.fragment_id >= 0 &&
        static_cast<std::size_t>(replay.fragment_id) < fragments_.size()) {
      const TestFragment& fragment = fragments_[static_cast<std::size_t>(replay.fragment_id)];
      auto start = std::find(fragment.cluster_path.begin(), fragment.cluster_path.end(), replay.cluster);
      for (auto k = static_cast<std::size_t>(start - fragment.cluster_path.begin()); k < fragment.events.size(); ++k) {
        auto step = device_.step(fragment.events[k]);
        if (!step) break;
        if (step->new_state) {
          arrived_new = true;
          harvest(step->step.post_signature);
          break;
        }
      }
    }
    ClusterGain gain{replay.cluster, ctx.monitor.covered_count() - cluster_cov, new_states.size() - cluster_states};
    if (gain.coverage_gain > 0 || gain.new_states > 0) gains.push_back(gain);
  }

  result.events = device_.events() - events_before;
  if (result.clusters_processed == 0) return fail("no affected cluster reachable");
  const std::size_t delta_c = ctx.monitor.covered_count() - covered_before;
  switch (classify_signal(true, new_states.size(), delta_c)) {
    case SignalKind::PositiveDiscovery:
      result.signal = PositiveDiscovery{new_states, delta_c, gains};
      break;
    default:
      result.signal = SemanticMismatch{};
      break;
  }
  return result;
}

CompositePlan Recomposer::random_plan(const MseRecord& record, const std::string& target) {
  RunContext& ctx = device_.context();
  std::uniform_int_distribution<std::size_t> pick_cluster(0, ctx.clusters.size() - 1);
  ClusterId cluster = static_cast<ClusterId>(pick_cluster(rng_));
  CompositePlan plan = navigate_only_plan(record, target, {cluster});
  std::vector<const FragmentDigest*> candidates;
  for (const auto& d : digests_) {
    if (std::find(d.cluster_path.begin(), d.cluster_path.end(), cluster) != d.cluster_path.end()) {
      candidates.push_back(&d);
    }
  }
  if (!candidates.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const FragmentDigest* chosen = candidates[pick(rng_)];
    plan.replays.front() = PlannedReplay{chosen->id, cluster, chosen->footprint};
  }
  plan.rationale = "random selection";
  return plan;
}

IterationStats Recomposer::run_iteration(int index) {
  RunContext& ctx = device_.context();
  current_iteration_ = index;
  IterationStats stats;
  stats.index = index;
  const std::size_t mses_before = ctx.mses.size();

  std::vector<MseId> batch;
  while (auto id = queue_.pop_highest()) batch.push_back(*id);
  if (!config_.dependency_reasoning) std::shuffle(batch.begin(), batch.end(), rng_);

  try {
    for (MseId id : batch) {
      if (!device_.budget_left()) {
        stats.truncated = true;
        break;
      }
      // Copy: executing the plan may register MSEs and reallocate the registry.
      MseRecord record = ctx.mses.at(id);
      auto target = next_target_value(record);
      if (!target) continue;
      record.tried_targets.push_back(*target);
      ctx.mses.at(id).tried_targets.push_back(*target);

      CompositePlan plan;
      if (config_.dependency_reasoning) {
        ReasonerContext context = make_context(ctx, record.cluster);
        auto affected = reasoner_.infer_impact(record, *target, context);
        plan = reasoner_.plan_composite(record, *target, affected, digests_, context);
        if (auto violation = check_plan(plan, record, digests_, ctx.utg)) {
          rejected_plans_.push_back("plan_composite: " + *violation);
          plan = default_plan(record, *target, affected, digests_);
        }
      } else {
        plan = random_plan(record, *target);
      }

      EventSequence prefix;
      if (ctx.utg.has_cluster(record.cluster)) {
        if (auto path = ctx.utg.shortest_path(device_.cluster(), record.cluster)) prefix = *path;
      }
      prefix.insert(prefix.end(), plan.sigma_sea.begin(), plan.sigma_sea.end());
      if (ctx.utg.extends_pruned_prefix(prefix)) {
        ++stats.skipped;
        continue;
      }

      CompositeResult outcome = execute_composite(plan);
      ++stats.plans;
      CompositeLog entry;
      entry.iteration = index;
      entry.mse = record.id;
      entry.widget_id = record.widget_id;
      entry.target_value = *target;
      entry.affected = plan.affected;
      entry.signal = signal_kind(outcome.signal);
      entry.events = outcome.events;
      switch (entry.signal) {
        case SignalKind::PositiveDiscovery: {
          const auto& p = std::get<PositiveDiscovery>(outcome.signal);
          entry.coverage_gain = p.coverage_gain;
          entry.new_states = p.new_states.size();
          ++stats.positive;
          break;
        }
        case SignalKind::SemanticMismatch:
          ++stats.mismatch;
          break;
        case SignalKind::OperationalFailure:
          ++stats.failure;
          break;
      }
      log_.push_back(std::move(entry));
      apply_feedback(ctx.utg, queue_, ctx.mses.at(id), outcome.signal, *target);
    }
  } catch (const BudgetExhausted&) {
    stats.truncated = true;
  }
  stats.new_mses = ctx.mses.size() - mses_before;
  stats.coverage_after = ctx.monitor.covered_count();
  return stats;
}

LoopReport Recomposer::run_loop() {
  LoopReport report;
  profile();
  for (int i = 0; i < config_.iteration_cap; ++i) {
    IterationStats stats = run_iteration(i + 1);
    report.iterations.push_back(stats);
    if (stats.truncated) {
      report.budget_exhausted = true;
      break;
    }
    profile();
    if (stats.new_mses == 0 && queue_.empty()) break;
  }
  report.plans = log_;
  return report;
}

}  // namespace epidroid
