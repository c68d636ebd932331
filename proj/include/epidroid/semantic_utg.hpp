#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "epidroid/abstraction.hpp"
#include "epidroid/feedback.hpp"
#include "epidroid/mse_tracker.hpp"
#include "epidroid/view_tree.hpp"

namespace epidroid {

class UnknownClusterError : public std::runtime_error {
 public:
  explicit UnknownClusterError(ClusterId id)
      : std::runtime_error("unknown cluster " + std::to_string(id)), id_(id) {}
  ClusterId id() const { return id_; }

 private:
  ClusterId id_;
};

struct UtgEdge {
  ClusterId source = -1;
  Event event;
  ClusterId target = -1;

  auto operator<=>(const UtgEdge&) const = default;
};

struct ConfirmedDependency {
  MseId mse = -1;
  std::string widget_id;
  std::string target_value;
  ClusterId affected = -1;
  std::size_t coverage_gain = 0;
  std::size_t new_states = 0;
};

/// Cluster-level transition graph with summaries, MSE annotations, confirmed
/// dependencies and pruned (non-replayable) prefixes. Single writer.
class SemanticUtg {
 public:
  /// Registers clusters 0..id (ids are dense).
  void register_cluster(ClusterId id);
  bool has_cluster(ClusterId id) const { return id >= 0 && static_cast<std::size_t>(id) < out_.size(); }
  std::size_t cluster_count() const { return out_.size(); }

  /// Adds the edge unless an identical (source, event, target) edge exists.
  /// Returns true when inserted. Throws UnknownClusterError.
  bool upsert_transition(ClusterId source, const Event& event, ClusterId target);

  const std::vector<UtgEdge>& edges() const { return edges_; }
  std::vector<UtgEdge> out_edges(ClusterId id) const;

  /// Minimal-hop route over unit-weight edges; ties broken by the lowest
  /// target cluster id (then event order) at each expansion. std::nullopt
  /// when unreachable; an empty route when from == to.
  std::optional<std::vector<UtgEdge>> shortest_route(ClusterId from, ClusterId to) const;
  std::optional<EventSequence> shortest_path(ClusterId from, ClusterId to) const;

  /// Clusters reachable from `from` (including itself).
  std::set<ClusterId> reachable_from(ClusterId from) const;

  void set_summary(ClusterId id, std::string summary);
  std::optional<std::string> summary(ClusterId id) const;
  const std::map<ClusterId, std::string>& summaries() const { return summaries_; }

  void annotate_mse(ClusterId id, MseId mse);
  const std::map<ClusterId, std::set<MseId>>& mse_annotations() const { return annotations_; }

  void add_confirmed_dependency(ConfirmedDependency dep);
  const std::vector<ConfirmedDependency>& confirmed_dependencies() const { return confirmed_; }

  void add_pruned_prefix(EventSequence prefix);
  const std::set<EventSequence>& pruned_prefixes() const { return pruned_; }
  /// True when `sequence` starts with (or equals) a pruned prefix.
  bool extends_pruned_prefix(const EventSequence& sequence) const;

 private:
  void check(ClusterId id) const;

  std::vector<std::vector<std::size_t>> out_;  // sorted by (target, event)
  std::vector<UtgEdge> edges_;
  std::set<std::tuple<ClusterId, Event, ClusterId>> edge_keys_;
  std::map<ClusterId, std::string> summaries_;
  std::map<ClusterId, std::set<MseId>> annotations_;
  std::vector<ConfirmedDependency> confirmed_;
  std::set<EventSequence> pruned_;
};

/// Scope rank used by the priority queue: InterPage 0, Global 1, IntraPage 2,
/// Unknown 3.
int scope_rank(ImpactScope scope);

struct QueueEntry {
  MseId id = -1;
  int scope_rank = 0;
  bool has_unvisited = false;
  std::uint64_t seq = 0;
};

/// MSE priority queue ordered by (scope rank, unvisited-first, FIFO).
class MsePriorityQueue {
 public:
  void enqueue(const MseRecord& record);
  void enqueue(MseId id, ImpactScope scope, bool has_unvisited);

  /// Highest-priority entry; std::nullopt when empty.
  std::optional<MseId> pop_highest();

  void retire(MseId id);
  bool retired(MseId id) const { return retired_.count(id) != 0; }
  const std::set<MseId>& retired_set() const { return retired_; }

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  bool contains(MseId id) const;

 private:
  std::vector<QueueEntry> entries_;
  std::set<MseId> retired_;
  std::uint64_t next_seq_ = 0;
};

/// Folds a composite execution's outcome into the graph and the queue:
/// discoveries become confirmed dependencies, mismatches demote then retire,
/// operational failures prune their prefix and are retried once.
void apply_feedback(SemanticUtg& utg, MsePriorityQueue& queue, MseRecord& record,
                    const FeedbackSignal& signal, const std::string& target_value);

}  // namespace epidroid
