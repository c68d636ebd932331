#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "epidroid/guard.hpp"
#include "epidroid/variables.hpp"
#include "epidroid/view_tree.hpp"

namespace epidroid {

using LabelId = std::uint32_t;

class ModelParseError : public std::runtime_error {
 public:
  ModelParseError(const std::string& message, std::size_t line, std::size_t column)
      : std::runtime_error(message), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class ModelValidationError : public std::runtime_error {
 public:
  ModelValidationError(const std::string& message, std::string offending_id)
      : std::runtime_error(message), offending_id_(std::move(offending_id)) {}
  const std::string& offending_id() const { return offending_id_; }

 private:
  std::string offending_id_;
};

struct WidgetDef {
  std::string id;
  WidgetKind kind = WidgetKind::Label;
  std::optional<std::size_t> bind;  // variable index
  bool animated = false;            // attribute flickers with the event clock
  Guard visible;                    // empty guard: always visible
  Attributes initial;
  std::vector<WidgetDef> children;
};

struct PageDef {
  std::string id;
  std::string activity;
  std::string description;
  std::vector<WidgetDef> widgets;
};

struct Effect {
  enum class Op { Set, Toggle, Add };
  std::size_t var = 0;
  Op op = Op::Set;
  int value = 0;
};

struct TransitionDef {
  std::string id;
  std::size_t source = 0;
  std::string widget;
  EventKind event = EventKind::Tap;
  std::optional<std::string> arg;  // required event text, if any
  Guard guard;
  std::vector<Effect> effects;
  std::size_t target = 0;
  std::vector<LabelId> labels;
};

struct FlakyEdge {
  std::size_t transition = 0;
  double probability = 0.0;
  std::size_t alternate = 0;
};

/// Immutable declarative application: pages of widgets, global variables and
/// guarded transitions that emit coverage labels when fired.
class AppModel {
 public:
  std::string app_id;
  std::size_t entry_page = 0;
  std::vector<VarDef> variables;
  std::vector<PageDef> pages;
  std::vector<TransitionDef> transitions;
  std::vector<FlakyEdge> flaky_edges;

  std::size_t total_branches() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label_name(LabelId id) const { return labels_.at(id); }
  std::optional<LabelId> find_label(std::string_view name) const;

  std::optional<std::size_t> find_page(std::string_view id) const;
  std::optional<std::size_t> find_transition(std::string_view id) const;
  const WidgetDef* find_widget(std::size_t page, std::string_view widget_id) const;

  /// Transitions declared for (page, widget), in declaration order.
  const std::vector<std::size_t>& transitions_for(std::size_t page,
                                                  std::string_view widget_id) const;
  const FlakyEdge* flaky_edge(std::size_t transition) const;

  /// Distinct activity names across pages.
  std::vector<std::string> activities() const;

  Valuation initial_valuation() const;

  /// Number of (page, valuation) product states.
  double product_state_count() const;

  /// Interns labels, binds guards, builds indices and checks every invariant.
  /// Throws ModelValidationError naming the offending id.
  void finalize();

  /// Label interning used while building models programmatically.
  LabelId intern_label(const std::string& name);

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, LabelId> label_index_;
  std::unordered_map<std::string, std::size_t> page_index_;
  std::unordered_map<std::string, std::size_t> transition_index_;
  std::map<std::pair<std::size_t, std::string>, std::vector<std::size_t>, std::less<>> by_widget_;
  std::unordered_map<std::size_t, std::size_t> flaky_by_transition_;
};

/// Reads and validates an app-model JSON document.
AppModel load_app_model(const std::filesystem::path& path);
AppModel parse_app_model(std::string_view text, std::string_view source_name = "<memory>");
AppModel app_model_from_json(const nlohmann::json& doc);
nlohmann::json app_model_to_json(const AppModel& model);

}  // namespace epidroid
