#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "epidroid/device.hpp"
#include "epidroid/semantic_utg.hpp"
#include "epidroid/trace.hpp"

namespace epidroid {

enum class ReplayStatus { Unverified, Stable, Truncated };
enum class Recovery { None, Navigated, Skipped, Truncated };

std::string_view to_string(ReplayStatus status);
std::string_view to_string(Recovery recovery);

/// A replay-verified, minimized event sequence. Paths carry one entry per
/// state (events.size() + 1); a signature of 0 marks a state that was only
/// reached through graph navigation and never recorded.
struct TestFragment {
  int id = -1;
  EventSequence events;
  std::vector<ClusterId> cluster_path;
  std::vector<Signature> signature_path;
  std::vector<std::vector<LabelId>> step_deltas;
  std::vector<LabelId> footprint;  // sorted union of step deltas
  ReplayStatus status = ReplayStatus::Unverified;
  Recovery recovery = Recovery::None;
  int source_trace = -1;
  std::size_t source_offset = 0;
  std::size_t nav_prefix = 0;  // leading navigation events prepended for replay

  ClusterId entry_cluster() const { return cluster_path.front(); }
  ClusterId exit_cluster() const { return cluster_path.back(); }
  std::size_t size() const { return events.size(); }
};

std::vector<LabelId> union_of_deltas(const TestFragment& fragment);

struct ReplayResult {
  enum class Outcome { Stable, Diverged };
  Outcome outcome = Outcome::Stable;
  std::optional<std::size_t> divergence_index;
  Recovery recovery = Recovery::None;

  bool stable() const { return outcome == Outcome::Stable; }
};

struct SliceConfig {
  std::size_t cap = 40;
  bool cut_on_reentry = true;  // false keeps whole reset-to-reset episodes
};

/// Cuts at app resets, at re-entries into `entry_cluster` and at the length
/// cap; slices with no coverage are dropped.
std::vector<TestFragment> slice_trace(const Trace& trace, ClusterId entry_cluster, const SliceConfig& config = {});

/// Replays once from reset. Stable iff every event resolves and the final
/// cluster is the expected exit cluster; otherwise the first failing index.
/// When `deltas` is given it receives the per-step coverage of the replay.
ReplayResult verify_replay(const TestFragment& fragment, Device& device,
                           std::vector<std::vector<LabelId>>* deltas = nullptr);

/// Replays from reset with fallbacks: navigate back to the expected cluster
/// over the graph, then skip unresolvable events, then truncate the fragment
/// to its first `divergence_index` events. Rewrites `fragment` when events are
/// skipped or truncated.
ReplayResult recover(Device& device, TestFragment& fragment, std::size_t divergence_index,
                     const SemanticUtg& utg);

/// Pure loop/tail reduction: removes maximal zero-coverage loops that return
/// to the same abstract state, then trailing zero-coverage steps whose post
/// state was already visited in the fragment.
TestFragment minimize_steps(const TestFragment& fragment);

struct ReplayCheck {
  bool stable = false;
  std::vector<LabelId> covered;  // sorted labels covered during the replay
};
using ReplayOracle = std::function<ReplayCheck(const TestFragment&)>;

ReplayOracle device_replay_oracle(Device& device);

/// minimize_steps followed by re-verification; returns the original when the
/// minimized fragment is not stable or loses replay coverage.
TestFragment eliminate_redundancy(const TestFragment& fragment, const ReplayOracle& oracle);

struct StabilizeConfig {
  SliceConfig slice;
  int verify_replays = 1;  // stable only when all k replays are stable
  bool minimize = true;
};

struct ReplayAttempt {
  int fragment = -1;
  bool success = false;
};

struct StabilizeReport {
  std::vector<TestFragment> fragments;
  std::size_t slices = 0;
  std::size_t dropped = 0;
  std::size_t duplicates = 0;
  std::size_t truncated = 0;
  std::size_t navigated = 0;
  std::size_t skipped = 0;
  std::size_t steps_before = 0;  // recorded steps in verified slices
  std::size_t steps_after = 0;   // recorded steps after minimization
  std::size_t events = 0;        // device events spent on replays
  std::vector<ReplayAttempt> attempts;
  std::vector<std::string> failures;

  double redundancy_ratio() const;
};

/// slice -> verify (with recovery) -> minimize -> deduplicate.
StabilizeReport stabilize(const std::vector<Trace>& traces, Device& device, const StabilizeConfig& config = {});

/// Fragments from `store` that pass through `cluster`, stable before truncated,
/// then by descending footprint and ascending id.
std::vector<const TestFragment*> fragments_through(const std::vector<TestFragment>& store, ClusterId cluster);

nlohmann::json fragment_to_json(const TestFragment& fragment, const AppModel& model);

}  // namespace epidroid
