#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "epidroid/abstraction.hpp"
#include "epidroid/app_model.hpp"
#include "epidroid/coverage.hpp"
#include "epidroid/mse_tracker.hpp"
#include "epidroid/semantic_utg.hpp"
#include "epidroid/session.hpp"
#include "epidroid/trace.hpp"

namespace epidroid {

/// Raised by Device::step once the attached event budget is spent.
class BudgetExhausted : public std::runtime_error {
 public:
  BudgetExhausted() : std::runtime_error("event budget exhausted") {}
};

std::uint64_t splitmix64(std::uint64_t x);

/// Knowledge shared by every stage of one run: clusters, the semantic graph,
/// MSE records and the cross-stage coverage monitor.
struct RunContext {
  RunContext(std::shared_ptr<const AppModel> model, double threshold, std::uint64_t seed);

  std::shared_ptr<const AppModel> model;
  ClusterRegistry clusters;
  SemanticUtg utg;
  MseRegistry mses;
  CoverageMonitor monitor;
  std::unordered_set<Signature> seen_signatures;
  std::uint64_t base_seed;
  std::uint64_t resets = 0;
  bool track_mses = true;
  ClusterId entry_cluster = -1;

  std::uint64_t next_session_seed() { return splitmix64(base_seed ^ splitmix64(++resets)); }
};

struct DeviceStep {
  TraceStep step;
  std::size_t global_gain = 0;  // labels new to the whole run
  bool new_state = false;       // signature never seen before in the run
  bool transitioned = false;
  bool diverted = false;
};

/// The engine's view of a device: executes events on a Session and keeps the
/// shared run knowledge (clusters, graph, MSEs, coverage) up to date.
class Device {
 public:
  explicit Device(RunContext& ctx);

  /// Clean restart of the app with a fresh per-reset seed. Not an event.
  void reset();

  /// std::nullopt when the target widget is stale. Throws BudgetExhausted.
  std::optional<DeviceStep> step(const Event& event);

  /// Limits subsequent steps to `limit` events (std::nullopt: unlimited).
  void set_budget(std::optional<std::uint64_t> limit);
  bool budget_left() const { return !limit_ || used_ < *limit_; }
  std::uint64_t budget_used() const { return used_; }

  void attach_trace(Trace* trace) { trace_ = trace; }

  const ViewNode& tree() const { return tree_; }
  Signature signature() const { return signature_; }
  ClusterId cluster() const { return cluster_; }
  Session& session() { return *session_; }
  const Session& session() const { return *session_; }
  RunContext& context() { return ctx_; }
  /// Events executed since the last reset.
  const EventSequence& history() const { return history_; }
  std::uint64_t events() const { return events_; }
  std::uint64_t reset_count() const { return reset_count_; }

 private:
  void observe();
  void track_mses(const ViewNode& pre_tree, const Event& event, ClusterId pre_cluster);

  RunContext& ctx_;
  std::unique_ptr<Session> session_;
  ViewNode tree_;
  Signature signature_ = 0;
  ClusterId cluster_ = -1;
  EventSequence history_;
  std::map<ClusterId, ViewNode> last_tree_in_;
  std::map<ClusterId, std::size_t> last_index_in_;
  Trace* trace_ = nullptr;
  bool pending_reset_mark_ = false;
  std::optional<std::uint64_t> limit_;
  std::uint64_t used_ = 0;
  std::uint64_t events_ = 0;
  std::uint64_t reset_count_ = 0;
};

}  // namespace epidroid
