#include "epidroid/mse_tracker.hpp"

#include <algorithm>
#include <array>

namespace epidroid {

namespace {

constexpr std::array<std::pair<MseKind, std::string_view>, 5> kMseKinds{{
    {MseKind::Switch, "switch"},
    {MseKind::Input, "input"},
    {MseKind::Expandable, "expandable"},
    {MseKind::Container, "container"},
    {MseKind::RadioGroup, "radio_group"},
}};

constexpr std::array<std::pair<ImpactScope, std::string_view>, 4> kScopes{{
    {ImpactScope::Unknown, "unknown"},
    {ImpactScope::IntraPage, "intra_page"},
    {ImpactScope::InterPage, "inter_page"},
    {ImpactScope::Global, "global"},
}};

constexpr std::array<std::pair<Validation, std::string_view>, 3> kValidations{{
    {Validation::Pending, "pending"},
    {Validation::Valid, "valid"},
    {Validation::Noise, "noise"},
}};

template <typename Table, typename T>
std::string_view name_of(const Table& table, T value) {
  for (const auto& [k, name] : table) {
    if (k == value) return name;
  }
  return "unknown";
}

template <typename T, typename Table>
std::optional<T> value_of(const Table& table, std::string_view name) {
  for (const auto& [k, n] : table) {
    if (n == name) return k;
  }
  return std::nullopt;
}

void collect_values(const ViewNode& node,
                    std::vector<std::pair<const ViewNode*, std::string>>& out) {
  if (auto value = abstract_value(node)) out.emplace_back(&node, std::move(*value));
  for (const auto& child : node.children) collect_values(child, out);
}

bool contains(const std::vector<std::string>& values, const std::string& v) {
  return std::find(values.begin(), values.end(), v) != values.end();
}

}  // namespace

std::string_view to_string(MseKind kind) { return name_of(kMseKinds, kind); }
std::string_view to_string(ImpactScope scope) { return name_of(kScopes, scope); }
std::string_view to_string(Validation validation) { return name_of(kValidations, validation); }
std::optional<MseKind> parse_mse_kind(std::string_view name) { return value_of<MseKind>(kMseKinds, name); }
std::optional<ImpactScope> parse_scope(std::string_view name) { return value_of<ImpactScope>(kScopes, name); }
std::optional<Validation> parse_validation(std::string_view name) {
  return value_of<Validation>(kValidations, name);
}

std::optional<MseKind> classify_component_kind(const ViewNode& node) {
  switch (node.kind) {
    case WidgetKind::Switch:
      return MseKind::Switch;
    case WidgetKind::Input:
      return MseKind::Input;
    case WidgetKind::Expandable:
      return MseKind::Expandable;
    case WidgetKind::Container:
      return MseKind::Container;
    case WidgetKind::RadioGroup:
      return MseKind::RadioGroup;
    default:
      return std::nullopt;
  }
}

std::optional<std::string> abstract_value(const ViewNode& node) {
  const auto& a = node.attributes;
  switch (node.kind) {
    case WidgetKind::Switch:
      return a.checked.value_or(false) ? "On" : "Off";
    case WidgetKind::Input:
      return a.text.value_or("").empty() ? "Empty" : "Filled";
    case WidgetKind::Expandable:
      return a.expanded.value_or(false) ? "Expanded" : "Collapsed";
    case WidgetKind::Container:
      return a.item_count.value_or(0) > 0 ? "Populated" : "Empty";
    case WidgetKind::RadioGroup:
      return a.selected;
    default:
      return std::nullopt;
  }
}

std::vector<std::string> value_domain(const ViewNode& node) {
  switch (node.kind) {
    case WidgetKind::Switch:
      return {"Off", "On"};
    case WidgetKind::Input:
      return {"Empty", "Filled"};
    case WidgetKind::Expandable:
      return {"Collapsed", "Expanded"};
    case WidgetKind::Container:
      return {"Empty", "Populated"};
    case WidgetKind::RadioGroup:
      return node.attributes.options;
    default:
      return {};
  }
}

std::vector<MseObservation> detect_candidates(const ViewNode& pre_tree, const Event& event,
                                              const ViewNode& post_tree, ClusterId cluster) {
  std::vector<std::pair<const ViewNode*, std::string>> before;
  std::vector<std::pair<const ViewNode*, std::string>> after;
  collect_values(pre_tree, before);
  collect_values(post_tree, after);

  std::vector<MseObservation> out;
  for (const auto& [post_node, post_value] : after) {
    auto it = std::find_if(before.begin(), before.end(), [&](const auto& entry) {
      return entry.first->widget_id == post_node->widget_id && entry.first->kind == post_node->kind;
    });
    if (it == before.end() || it->second == post_value) continue;
    MseObservation obs;
    obs.cluster = cluster;
    obs.widget_id = post_node->widget_id;
    obs.kind = *classify_component_kind(*post_node);
    obs.domain = value_domain(*post_node);
    obs.before = it->second;
    obs.after = post_value;
    obs.trigger = event;
    out.push_back(std::move(obs));
  }
  return out;
}

std::vector<std::string> unvisited_values(const MseRecord& record) {
  std::vector<std::string> out;
  for (const auto& v : record.domain) {
    if (!contains(record.observed_values, v)) out.push_back(v);
  }
  return out;
}

std::optional<std::string> next_target_value(const MseRecord& record) {
  auto unvisited = unvisited_values(record);
  std::sort(unvisited.begin(), unvisited.end());
  for (const auto& v : unvisited) {
    if (!contains(record.tried_targets, v)) return v;
  }
  std::vector<std::string> candidates;
  for (const auto& v : record.domain) {
    if (contains(record.tried_targets, v)) continue;
    if (!record.observed_values.empty() && v == record.observed_values.front()) continue;
    candidates.push_back(v);
  }
  if (candidates.empty()) return std::nullopt;
  return *std::min_element(candidates.begin(), candidates.end());
}

RecordOutcome MseRegistry::record_observation(const MseObservation& observation,
                                              const EventSequence& sigma_sea) {
  RecordOutcome outcome;
  const bool binary = observation.kind != MseKind::RadioGroup;
  const std::size_t n = observation.domain.size();
  const bool domain_ok = binary ? n == 2 : (n >= 2 && n <= 4);
  if (!domain_ok || !contains(observation.domain, observation.before) ||
      !contains(observation.domain, observation.after)) {
    outcome.diagnostic = "rejected observation on '" + observation.widget_id + "': value '" +
                         observation.after + "' outside a " + std::to_string(n) +
                         "-option domain";
    rejections_.push_back(outcome.diagnostic);
    return outcome;
  }

  auto key = std::make_pair(observation.cluster, observation.widget_id);
  auto it = index_.find(key);
  MseRecord* record = nullptr;
  if (it == index_.end()) {
    MseRecord fresh;
    fresh.id = static_cast<MseId>(records_.size());
    fresh.widget_id = observation.widget_id;
    fresh.cluster = observation.cluster;
    fresh.kind = observation.kind;
    fresh.domain = observation.domain;
    index_.emplace(key, fresh.id);
    records_.push_back(std::move(fresh));
    record = &records_.back();
    outcome.created = true;
  } else {
    record = &records_[static_cast<std::size_t>(it->second)];
    if (record->domain != observation.domain) {
      outcome.diagnostic = "rejected observation on '" + observation.widget_id +
                           "': domain changed from the bound one";
      rejections_.push_back(outcome.diagnostic);
      return outcome;
    }
  }

  for (const auto* v : {&observation.before, &observation.after}) {
    if (!contains(record->observed_values, *v)) record->observed_values.push_back(*v);
  }
  if (!sigma_sea.empty() &&
      (record->sigma_sea.empty() || sigma_sea.size() <= record->sigma_sea.size())) {
    record->sigma_sea = sigma_sea;
  }
  MseObservation stored = observation;
  stored.mse_id = record->id;
  record->history.push_back(std::move(stored));

  outcome.accepted = true;
  outcome.id = record->id;
  return outcome;
}

std::optional<MseId> MseRegistry::find(ClusterId cluster, const std::string& widget_id) const {
  auto it = index_.find(std::make_pair(cluster, widget_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

MseRegistry MseRegistry::restore(std::vector<MseRecord> records) {
  MseRegistry registry;
  for (auto& record : records) {
    registry.index_.emplace(std::make_pair(record.cluster, record.widget_id), record.id);
    registry.records_.push_back(std::move(record));
  }
  return registry;
}

}  // namespace epidroid
