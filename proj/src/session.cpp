#include "epidroid/session.hpp"

#include <algorithm>
#include <sstream>

namespace epidroid {

namespace {

constexpr std::string_view kFilledText = "filled";

ViewNode render_widget(const AppModel& model, const WidgetDef& widget, const Valuation& valuation,
                       std::uint64_t clock, int depth) {
  ViewNode node;
  node.widget_id = widget.id;
  node.kind = widget.kind;
  node.depth = depth;
  const auto& init = widget.initial;
  const std::optional<int> bound =
      widget.bind ? std::optional<int>(valuation[*widget.bind]) : std::nullopt;
  const int flicker = static_cast<int>(clock % 2);

  switch (widget.kind) {
    case WidgetKind::Switch:
      node.attributes.checked = bound ? *bound != 0
                                      : widget.animated ? flicker != 0 : init.checked.value_or(false);
      break;
    case WidgetKind::Expandable:
      node.attributes.expanded = bound ? *bound != 0
                                       : widget.animated ? flicker != 0 : init.expanded.value_or(false);
      break;
    case WidgetKind::Container:
      node.attributes.item_count = bound ? *bound : widget.animated ? flicker : init.item_count.value_or(0);
      break;
    case WidgetKind::Input:
      if (bound) {
        node.attributes.text = *bound ? init.text.value_or(std::string(kFilledText)) : std::string();
      } else {
        node.attributes.text = init.text.value_or(std::string());
      }
      break;
    case WidgetKind::RadioGroup: {
      const VarDef& var = model.variables[*widget.bind];
      node.attributes.options = var.symbols;
      node.attributes.selected = var.symbols[static_cast<std::size_t>(*bound)];
      break;
    }
    default:
      if (init.text) node.attributes.text = init.text;
      break;
  }
  for (const auto& child : widget.children) {
    if (!child.visible.evaluate(valuation)) continue;
    node.children.push_back(render_widget(model, child, valuation, clock, depth + 1));
  }
  return node;
}

bool visible_in(const std::vector<WidgetDef>& widgets, std::string_view id,
                const Valuation& valuation) {
  for (const auto& w : widgets) {
    if (!w.visible.evaluate(valuation)) continue;
    if (w.id == id) return true;
    if (visible_in(w.children, id, valuation)) return true;
  }
  return false;
}

}  // namespace

ViewNode render_page(const AppModel& model, std::size_t page, const Valuation& valuation,
                     std::uint64_t clock) {
  const PageDef& def = model.pages.at(page);
  ViewNode root;
  root.widget_id = def.id;
  root.kind = WidgetKind::Page;
  root.depth = 0;
  for (const auto& widget : def.widgets) {
    if (!widget.visible.evaluate(valuation)) continue;
    root.children.push_back(render_widget(model, widget, valuation, clock, 1));
  }
  return root;
}

std::optional<std::size_t> matching_transition(const AppModel& model, std::size_t page,
                                               const Valuation& valuation, const Event& event) {
  for (std::size_t index : model.transitions_for(page, event.widget)) {
    const TransitionDef& t = model.transitions[index];
    if (t.event != event.kind) continue;
    if (t.arg && event.text != t.arg) continue;
    if (!t.guard.evaluate(valuation)) continue;
    return index;
  }
  return std::nullopt;
}

void apply_effects(const AppModel& model, const TransitionDef& transition, Valuation& valuation) {
  for (const auto& effect : transition.effects) {
    int& slot = valuation[effect.var];
    const VarDef& var = model.variables[effect.var];
    switch (effect.op) {
      case Effect::Op::Set:
        slot = effect.value;
        break;
      case Effect::Op::Toggle:
        slot = slot ? 0 : 1;
        break;
      case Effect::Op::Add:
        slot = std::clamp(slot + effect.value, 0, var.max);
        break;
    }
  }
}

Session::Session(std::shared_ptr<const AppModel> model, std::uint64_t seed)
    : model_(std::move(model)),
      seed_(seed),
      rng_(seed),
      page_(model_->entry_page),
      valuation_(model_->initial_valuation()),
      covered_(model_->total_branches(), 0) {}

bool Session::widget_visible(std::string_view widget_id) const {
  return visible_in(model_->pages[page_].widgets, widget_id, valuation_);
}

double Session::next_uniform() {
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

StepResult Session::execute_event(const Event& event) {
  if (!widget_visible(event.widget)) {
    throw StaleWidgetError("widget '" + event.widget + "' is not on page '" + page_id() + "'");
  }
  ++event_counter_;
  StepResult result;
  if (auto index = matching_transition(*model_, page_, valuation_, event)) {
    const TransitionDef& t = model_->transitions[*index];
    apply_effects(*model_, t, valuation_);
    page_ = t.target;
    if (const FlakyEdge* flaky = model_->flaky_edge(*index)) {
      if (next_uniform() < flaky->probability) {
        page_ = flaky->alternate;
        result.diverted = true;
      }
    }
    for (LabelId label : t.labels) {
      if (!covered_[label]) {
        covered_[label] = 1;
        ++covered_count_;
        result.coverage_delta.push_back(label);
      }
    }
    result.transitioned = true;
    result.transition = *index;
  }
  result.tree = observe_view_tree();
  return result;
}

std::optional<StepResult> Session::try_execute(const Event& event) {
  if (!widget_visible(event.widget)) return std::nullopt;
  return execute_event(event);
}

ViewNode Session::observe_view_tree() const {
  return render_page(*model_, page_, valuation_, event_counter_);
}

std::vector<LabelId> Session::covered_labels() const {
  std::vector<LabelId> out;
  out.reserve(covered_count_);
  for (std::size_t i = 0; i < covered_.size(); ++i) {
    if (covered_[i]) out.push_back(static_cast<LabelId>(i));
  }
  return out;
}

std::string Session::serialize_state() const {
  std::ostringstream out;
  out << "page=" << page_id() << ";vals=";
  for (int v : valuation_) out << v << ',';
  out << ";clock=" << event_counter_ << ";cov=";
  for (char c : covered_) out << (c ? '1' : '0');
  out << ";seed=" << seed_ << ";rng=" << rng_;
  return out.str();
}

void Session::place(std::size_t page, Valuation valuation) {
  page_ = page;
  valuation_ = std::move(valuation);
}

}  // namespace epidroid
