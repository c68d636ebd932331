#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "epidroid/abstraction.hpp"
#include "epidroid/view_tree.hpp"

namespace epidroid {

struct ClusterGain {
  ClusterId cluster = -1;
  std::size_t coverage_gain = 0;
  std::size_t new_states = 0;
};

struct PositiveDiscovery {
  std::vector<Signature> new_states;
  std::size_t coverage_gain = 0;
  std::vector<ClusterGain> per_cluster;  // affected clusters that contributed
};

struct SemanticMismatch {};

struct OperationalFailure {
  EventSequence verified_prefix;
  std::optional<Event> failing_event;
  std::string reason;
};

using FeedbackSignal = std::variant<PositiveDiscovery, SemanticMismatch, OperationalFailure>;

enum class SignalKind { PositiveDiscovery, SemanticMismatch, OperationalFailure };

SignalKind signal_kind(const FeedbackSignal& signal);
std::string_view to_string(SignalKind kind);

/// Decision structure of a composite execution: missing mutation evidence is
/// an operational failure; any new state or coverage is a discovery;
/// otherwise the predicted dependency did not hold.
SignalKind classify_signal(bool delta_sigma_observed, std::size_t new_states, std::size_t coverage_gain);

}  // namespace epidroid
