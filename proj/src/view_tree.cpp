#include "epidroid/view_tree.hpp"

#include <array>
#include <utility>

namespace epidroid {

namespace {

constexpr std::array<std::pair<WidgetKind, std::string_view>, 9> kWidgetKinds{{
    {WidgetKind::Page, "page"},
    {WidgetKind::Switch, "switch"},
    {WidgetKind::Input, "input"},
    {WidgetKind::Expandable, "expandable"},
    {WidgetKind::Container, "container"},
    {WidgetKind::RadioGroup, "radio_group"},
    {WidgetKind::Button, "button"},
    {WidgetKind::Label, "label"},
    {WidgetKind::ListItem, "list_item"},
}};

constexpr std::array<std::pair<EventKind, std::string_view>, 3> kEventKinds{{
    {EventKind::Tap, "tap"},
    {EventKind::Input, "input"},
    {EventKind::Select, "select"},
}};

constexpr std::string_view kDefaultInputText = "abc";

void collect_actions(const ViewNode& node, std::vector<Event>& out) {
  switch (node.kind) {
    case WidgetKind::Page:
      break;
    case WidgetKind::Input:
      out.push_back({node.widget_id, EventKind::Input, std::string(kDefaultInputText)});
      break;
    case WidgetKind::RadioGroup:
      for (const auto& option : node.attributes.options) {
        out.push_back({node.widget_id, EventKind::Select, option});
      }
      break;
    default:
      out.push_back({node.widget_id, EventKind::Tap, std::nullopt});
      break;
  }
  for (const auto& child : node.children) collect_actions(child, out);
}

}  // namespace

std::string_view to_string(WidgetKind kind) {
  for (const auto& [k, name] : kWidgetKinds) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<WidgetKind> parse_widget_kind(std::string_view name) {
  for (const auto& [k, n] : kWidgetKinds) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(EventKind kind) {
  for (const auto& [k, name] : kEventKinds) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (const auto& [k, n] : kEventKinds) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::string describe(const Event& event) {
  std::string out(to_string(event.kind));
  out += ' ';
  out += event.widget;
  if (event.text) {
    out += "=\"";
    out += *event.text;
    out += '"';
  }
  return out;
}

const ViewNode* find_widget(const ViewNode& root, std::string_view widget_id) {
  if (root.widget_id == widget_id) return &root;
  for (const auto& child : root.children) {
    if (const auto* hit = find_widget(child, widget_id)) return hit;
  }
  return nullptr;
}

std::size_t node_count(const ViewNode& root) {
  std::size_t n = 1;
  for (const auto& child : root.children) n += node_count(child);
  return n;
}

std::vector<Event> actionable_events(const ViewNode& root) {
  std::vector<Event> out;
  collect_actions(root, out);
  return out;
}

bool depths_consistent(const ViewNode& root) {
  for (const auto& child : root.children) {
    if (child.depth != root.depth + 1 || !depths_consistent(child)) return false;
  }
  return true;
}

}  // namespace epidroid
