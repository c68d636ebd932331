#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace epidroid {

enum class WidgetKind {
  Page,
  Switch,
  Input,
  Expandable,
  Container,
  RadioGroup,
  Button,
  Label,
  ListItem,
};

std::string_view to_string(WidgetKind kind);
std::optional<WidgetKind> parse_widget_kind(std::string_view name);

enum class EventKind { Tap, Input, Select };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

// State-bearing and content attributes of a rendered widget. Absent optionals
// mean the attribute does not apply to the widget kind.
struct Attributes {
  std::optional<bool> checked;
  std::optional<std::string> selected;
  std::optional<std::string> text;
  std::optional<bool> expanded;
  std::optional<int> item_count;
  std::vector<std::string> options;

  bool operator==(const Attributes&) const = default;
};

struct ViewNode {
  std::string widget_id;
  WidgetKind kind = WidgetKind::Page;
  int depth = 0;
  Attributes attributes;
  std::vector<ViewNode> children;

  bool operator==(const ViewNode&) const = default;
};

/// A widget-targeted GUI event. `text` carries the typed string for input
/// events and the chosen option for select events.
struct Event {
  std::string widget;
  EventKind kind = EventKind::Tap;
  std::optional<std::string> text;

  auto operator<=>(const Event&) const = default;
};

using EventSequence = std::vector<Event>;

std::string describe(const Event& event);

const ViewNode* find_widget(const ViewNode& root, std::string_view widget_id);

std::size_t node_count(const ViewNode& root);

/// Events an explorer can fire on the rendered tree, in pre-order: one tap per
/// tappable widget, one input per input field, one select per radio option.
std::vector<Event> actionable_events(const ViewNode& root);

/// True when every parent/child pair satisfies depth(child) == depth(parent)+1.
bool depths_consistent(const ViewNode& root);

}  // namespace epidroid
