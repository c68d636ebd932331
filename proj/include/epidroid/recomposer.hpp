#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "epidroid/device.hpp"
#include "epidroid/feedback.hpp"
#include "epidroid/reasoner.hpp"
#include "epidroid/trace_store.hpp"

namespace epidroid {

struct RecomposerConfig {
  int bfs_depth = 2;
  int bfs_budget = 25;
  int iteration_cap = 10;
  int max_guide_steps = 10;
  bool dependency_reasoning = true;  // false: random MSE, cluster and fragment choices
  std::uint64_t seed = 0;
};

struct BfsResult {
  std::vector<Signature> new_states;
  std::size_t coverage_gain = 0;
  std::size_t actions = 0;  // expansion actions executed
};

/// Breadth-first expansion from the device's current state over actionable
/// events, up to `depth` levels and `budget` expansion actions. Returning to
/// a frontier state uses the graph and is not charged to the budget. The
/// device is left wherever the expansion ends.
BfsResult bounded_bfs(Device& device, int depth, int budget);

/// Digest of the run's knowledge handed to the reasoner.
ReasonerContext make_context(const RunContext& ctx, ClusterId focal, const std::string& session = "");
StateSnapshot snapshot_of(const Session& session);

struct CompositeResult {
  FeedbackSignal signal;
  bool delta_sigma_observed = false;
  std::size_t clusters_processed = 0;
  std::size_t events = 0;
};

struct CompositeLog {
  int iteration = 0;
  MseId mse = -1;
  std::string widget_id;
  std::string target_value;
  std::vector<ClusterId> affected;
  SignalKind signal = SignalKind::SemanticMismatch;
  std::size_t coverage_gain = 0;
  std::size_t new_states = 0;
  std::size_t events = 0;
};

struct IterationStats {
  int index = 0;
  int plans = 0;
  int positive = 0;
  int mismatch = 0;
  int failure = 0;
  int skipped = 0;
  std::size_t new_mses = 0;
  std::size_t coverage_after = 0;
  bool truncated = false;
};

struct LoopReport {
  std::vector<IterationStats> iterations;
  std::vector<CompositeLog> plans;
  bool budget_exhausted = false;
};

/// Stage 2 profiling plus the Stage 3 plan-execute-feedback loop.
class Recomposer {
 public:
  Recomposer(Device& device, Reasoner& reasoner, std::vector<TestFragment> fragments, RecomposerConfig config);

  /// Summarizes unsummarized clusters, validates and scopes pending MSEs and
  /// enqueues the valid ones.
  void profile();

  CompositeResult execute_composite(const CompositePlan& plan);
  IterationStats run_iteration(int index);
  LoopReport run_loop();

  MsePriorityQueue& queue() { return queue_; }
  const std::vector<TestFragment>& fragments() const { return fragments_; }
  const std::vector<CompositeLog>& plan_log() const { return log_; }
  /// Reasoner plans replaced by the default plan, with the violated invariant.
  const std::vector<std::string>& rejected_plans() const { return rejected_plans_; }

 private:
  bool navigate_to(ClusterId target, EventSequence& executed, std::optional<Event>& failing, bool& new_state);
  bool goal_satisfied(const MutationGoal& goal) const;
  CompositePlan random_plan(const MseRecord& record, const std::string& target);

  Device& device_;
  Reasoner& reasoner_;
  std::vector<TestFragment> fragments_;
  std::vector<FragmentDigest> digests_;
  RecomposerConfig config_;
  MsePriorityQueue queue_;
  std::set<Signature> harvested_;  // states already expanded by bounded BFS
  std::vector<CompositeLog> log_;
  std::vector<std::string> rejected_plans_;
  std::mt19937_64 rng_;
  int current_iteration_ = 0;
};

}  // namespace epidroid
