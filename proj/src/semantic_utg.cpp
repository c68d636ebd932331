#include "epidroid/semantic_utg.hpp"

#include <algorithm>
#include <deque>

namespace epidroid {

SignalKind signal_kind(const FeedbackSignal& signal) {
  return static_cast<SignalKind>(signal.index());
}

std::string_view to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::PositiveDiscovery:
      return "positive_discovery";
    case SignalKind::SemanticMismatch:
      return "semantic_mismatch";
    case SignalKind::OperationalFailure:
      return "operational_failure";
  }
  return "unknown";
}

SignalKind classify_signal(bool delta_sigma_observed, std::size_t new_states, std::size_t coverage_gain) {
  if (!delta_sigma_observed) return SignalKind::OperationalFailure;
  if (new_states > 0 || coverage_gain > 0) return SignalKind::PositiveDiscovery;
  return SignalKind::SemanticMismatch;
}

void SemanticUtg::register_cluster(ClusterId id) {
  if (id < 0) throw UnknownClusterError(id);
  if (static_cast<std::size_t>(id) >= out_.size()) out_.resize(static_cast<std::size_t>(id) + 1);
}

void SemanticUtg::check(ClusterId id) const {
  if (!has_cluster(id)) throw UnknownClusterError(id);
}

bool SemanticUtg::upsert_transition(ClusterId source, const Event& event, ClusterId target) {
  check(source);
  check(target);
  if (!edge_keys_.emplace(source, event, target).second) return false;
  edges_.push_back(UtgEdge{source, event, target});
  auto& out = out_[static_cast<std::size_t>(source)];
  const std::size_t index = edges_.size() - 1;
  auto pos = std::upper_bound(out.begin(), out.end(), index, [&](std::size_t a, std::size_t b) {
    const auto& ea = edges_[a];
    const auto& eb = edges_[b];
    return std::tie(ea.target, ea.event) < std::tie(eb.target, eb.event);
  });
  out.insert(pos, index);
  return true;
}

std::vector<UtgEdge> SemanticUtg::out_edges(ClusterId id) const {
  check(id);
  std::vector<UtgEdge> out;
  for (std::size_t index : out_[static_cast<std::size_t>(id)]) out.push_back(edges_[index]);
  return out;
}

std::optional<std::vector<UtgEdge>> SemanticUtg::shortest_route(ClusterId from, ClusterId to) const {
  check(from);
  check(to);
  if (from == to) return std::vector<UtgEdge>{};
  std::vector<std::optional<std::size_t>> via(out_.size());
  std::vector<char> seen(out_.size(), 0);
  std::deque<ClusterId> frontier{from};
  seen[static_cast<std::size_t>(from)] = 1;
  while (!frontier.empty()) {
    ClusterId cur = frontier.front();
    frontier.pop_front();
    for (std::size_t index : out_[static_cast<std::size_t>(cur)]) {
      ClusterId next = edges_[index].target;
      if (seen[static_cast<std::size_t>(next)]) continue;
      seen[static_cast<std::size_t>(next)] = 1;
      via[static_cast<std::size_t>(next)] = index;
      if (next == to) {
        std::vector<UtgEdge> route;
        for (ClusterId c = to; c != from;) {
          const auto& edge = edges_[*via[static_cast<std::size_t>(c)]];
          route.push_back(edge);
          c = edge.source;
        }
        std::reverse(route.begin(), route.end());
        return route;
      }
      frontier.push_back(next);
    }
  }
  return std::nullopt;
}

std::optional<EventSequence> SemanticUtg::shortest_path(ClusterId from, ClusterId to) const {
  auto route = shortest_route(from, to);
  if (!route) return std::nullopt;
  EventSequence path;
  for (const auto& edge : *route) path.push_back(edge.event);
  return path;
}

std::set<ClusterId> SemanticUtg::reachable_from(ClusterId from) const {
  check(from);
  std::set<ClusterId> seen{from};
  std::deque<ClusterId> frontier{from};
  while (!frontier.empty()) {
    ClusterId cur = frontier.front();
    frontier.pop_front();
    for (std::size_t index : out_[static_cast<std::size_t>(cur)]) {
      if (seen.insert(edges_[index].target).second) frontier.push_back(edges_[index].target);
    }
  }
  return seen;
}

void SemanticUtg::set_summary(ClusterId id, std::string summary) {
  check(id);
  summaries_[id] = std::move(summary);
}

std::optional<std::string> SemanticUtg::summary(ClusterId id) const {
  auto it = summaries_.find(id);
  if (it == summaries_.end()) return std::nullopt;
  return it->second;
}

void SemanticUtg::annotate_mse(ClusterId id, MseId mse) {
  check(id);
  annotations_[id].insert(mse);
}

void SemanticUtg::add_confirmed_dependency(ConfirmedDependency dep) {
  check(dep.affected);
  confirmed_.push_back(std::move(dep));
}

void SemanticUtg::add_pruned_prefix(EventSequence prefix) {
  if (!prefix.empty()) pruned_.insert(std::move(prefix));
}

bool SemanticUtg::extends_pruned_prefix(const EventSequence& sequence) const {
  for (const auto& prefix : pruned_) {
    if (prefix.size() <= sequence.size() &&
        std::equal(prefix.begin(), prefix.end(), sequence.begin())) {
      return true;
    }
  }
  return false;
}

int scope_rank(ImpactScope scope) {
  switch (scope) {
    case ImpactScope::InterPage:
      return 0;
    case ImpactScope::Global:
      return 1;
    case ImpactScope::IntraPage:
      return 2;
    case ImpactScope::Unknown:
      return 3;
  }
  return 3;
}

void MsePriorityQueue::enqueue(const MseRecord& record) {
  enqueue(record.id, record.scope, !unvisited_values(record).empty());
}

void MsePriorityQueue::enqueue(MseId id, ImpactScope scope, bool has_unvisited) {
  if (retired(id)) return;
  entries_.push_back(QueueEntry{id, scope_rank(scope), has_unvisited, next_seq_++});
}

std::optional<MseId> MsePriorityQueue::pop_highest() {
  std::erase_if(entries_, [&](const QueueEntry& e) { return retired(e.id); });
  if (entries_.empty()) return std::nullopt;
  auto best = std::min_element(entries_.begin(), entries_.end(), [](const QueueEntry& a, const QueueEntry& b) {
    return std::make_tuple(a.scope_rank, !a.has_unvisited, a.seq) <
           std::make_tuple(b.scope_rank, !b.has_unvisited, b.seq);
  });
  MseId id = best->id;
  entries_.erase(best);
  return id;
}

void MsePriorityQueue::retire(MseId id) {
  retired_.insert(id);
  std::erase_if(entries_, [&](const QueueEntry& e) { return e.id == id; });
}

bool MsePriorityQueue::contains(MseId id) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const QueueEntry& e) { return e.id == id; });
}

void apply_feedback(SemanticUtg& utg, MsePriorityQueue& queue, MseRecord& record,
                    const FeedbackSignal& signal, const std::string& target_value) {
  switch (signal_kind(signal)) {
    case SignalKind::PositiveDiscovery: {
      const auto& positive = std::get<PositiveDiscovery>(signal);
      for (const auto& gain : positive.per_cluster) {
        utg.add_confirmed_dependency(ConfirmedDependency{record.id, record.widget_id, target_value,
                                                         gain.cluster, gain.coverage_gain, gain.new_states});
      }
      record.mismatch_count = 0;
      if (next_target_value(record)) queue.enqueue(record);
      break;
    }
    case SignalKind::SemanticMismatch:
      ++record.mismatch_count;
      if (record.mismatch_count >= 2) {
        queue.retire(record.id);
      } else if (next_target_value(record)) {
        queue.enqueue(record);
      }
      break;
    case SignalKind::OperationalFailure: {
      const auto& failure = std::get<OperationalFailure>(signal);
      EventSequence prefix = failure.verified_prefix;
      if (failure.failing_event) prefix.push_back(*failure.failing_event);
      utg.add_pruned_prefix(std::move(prefix));
      if (record.operational_failures++ == 0) {
        // The retry aims at the same value, so it no longer counts as tried.
        std::erase(record.tried_targets, target_value);
        queue.enqueue(record);
      }
      break;
    }
  }
}

}  // namespace epidroid
