#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "epidroid/abstraction.hpp"
#include "epidroid/view_tree.hpp"

namespace epidroid {

using MseId = int;

/// The five state-bearing component kinds tracked as mutable state elements.
enum class MseKind { Switch, Input, Expandable, Container, RadioGroup };

enum class ImpactScope { Unknown, IntraPage, InterPage, Global };

enum class Validation { Pending, Valid, Noise };

std::string_view to_string(MseKind kind);
std::string_view to_string(ImpactScope scope);
std::string_view to_string(Validation validation);
std::optional<MseKind> parse_mse_kind(std::string_view name);
std::optional<ImpactScope> parse_scope(std::string_view name);
std::optional<Validation> parse_validation(std::string_view name);

std::optional<MseKind> classify_component_kind(const ViewNode& node);

/// Binary abstraction (On/Off, Empty/Filled, Expanded/Collapsed,
/// Empty/Populated) or the selected radio option.
std::optional<std::string> abstract_value(const ViewNode& node);

/// Value domain of a state-bearing widget: the two binary symbols, or the
/// rendered radio options.
std::vector<std::string> value_domain(const ViewNode& node);

struct MseObservation {
  MseId mse_id = -1;
  ClusterId cluster = -1;
  std::string widget_id;
  MseKind kind = MseKind::Switch;
  std::vector<std::string> domain;
  std::string before;
  std::string after;
  Event trigger;
  std::size_t position = 0;  // global event index
};

/// One observation per widget present in both trees (same id and kind) whose
/// abstract value differs.
std::vector<MseObservation> detect_candidates(const ViewNode& pre_tree, const Event& event,
                                              const ViewNode& post_tree, ClusterId cluster);

struct MseRecord {
  MseId id = -1;
  std::string widget_id;
  ClusterId cluster = -1;
  MseKind kind = MseKind::Switch;
  std::vector<std::string> domain;
  std::vector<std::string> observed_values;  // insertion order, no repeats
  EventSequence sigma_sea;
  ImpactScope scope = ImpactScope::Unknown;
  Validation validated = Validation::Pending;
  int mismatch_count = 0;
  int operational_failures = 0;
  int priority_rank = 0;
  std::vector<std::string> tried_targets;
  std::vector<MseObservation> history;
};

/// Domain minus observed values.
std::vector<std::string> unvisited_values(const MseRecord& record);

/// Value to mutate toward next: the smallest unvisited value, else the
/// smallest value never tried as a target that differs from the first value
/// ever observed (the default). Empty when the record is exhausted.
std::optional<std::string> next_target_value(const MseRecord& record);

struct RecordOutcome {
  bool accepted = false;
  bool created = false;
  MseId id = -1;
  std::string diagnostic;
};

/// MSE records keyed by (cluster, widget). Single writer per session.
class MseRegistry {
 public:
  RecordOutcome record_observation(const MseObservation& observation, const EventSequence& sigma_sea);

  const MseRecord& at(MseId id) const { return records_.at(static_cast<std::size_t>(id)); }
  MseRecord& at(MseId id) { return records_.at(static_cast<std::size_t>(id)); }
  std::optional<MseId> find(ClusterId cluster, const std::string& widget_id) const;
  const std::vector<MseRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  std::vector<std::string> rejections() const { return rejections_; }

  static MseRegistry restore(std::vector<MseRecord> records);

 private:
  std::vector<MseRecord> records_;
  std::map<std::pair<ClusterId, std::string>, MseId> index_;
  std::vector<std::string> rejections_;
};

}  // namespace epidroid
