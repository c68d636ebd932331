#include "epidroid/app_model.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace epidroid {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& message, const std::string& id) {
  throw ModelValidationError(message, id);
}

const json& require(const json& obj, std::string_view key, const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    invalid(context + ": missing required key '" + std::string(key) + "'", context);
  }
  return *it;
}

std::string require_string(const json& obj, std::string_view key, const std::string& context) {
  const json& value = require(obj, key, context);
  if (!value.is_string()) {
    invalid(context + ": key '" + std::string(key) + "' must be a string", context);
  }
  return value.get<std::string>();
}

int literal_from_json(const VarDef& var, const json& value, const std::string& context) {
  std::optional<int> parsed;
  if (value.is_boolean() && var.type == VarType::Bool) {
    parsed = value.get<bool>() ? 1 : 0;
  } else if (value.is_number_integer() && var.type == VarType::Counter) {
    int v = value.get<int>();
    if (var.in_domain(v)) parsed = v;
  } else if (value.is_string()) {
    parsed = parse_literal(var, value.get<std::string>());
  }
  if (!parsed) {
    invalid(context + ": value " + value.dump() + " is outside the domain of '" + var.name + "'",
            var.name);
  }
  return *parsed;
}

json literal_to_json(const VarDef& var, int value) {
  switch (var.type) {
    case VarType::Bool:
      return value != 0;
    case VarType::Counter:
      return value;
    case VarType::Enum:
      return var.symbols.at(static_cast<std::size_t>(value));
  }
  return nullptr;
}

VarDef parse_variable(const json& doc) {
  VarDef var;
  var.name = require_string(doc, "name", "variable");
  const std::string context = "variable '" + var.name + "'";
  const std::string type = require_string(doc, "type", context);
  if (type == "bool") {
    var.type = VarType::Bool;
  } else if (type == "enum") {
    var.type = VarType::Enum;
    const json& values = require(doc, "values", context);
    if (!values.is_array()) invalid(context + ": 'values' must be an array", var.name);
    for (const auto& v : values) var.symbols.push_back(v.get<std::string>());
  } else if (type == "counter") {
    var.type = VarType::Counter;
    var.max = require(doc, "max", context).get<int>();
  } else {
    invalid(context + ": unknown type '" + type + "'", var.name);
  }
  if (auto it = doc.find("initial"); it != doc.end()) {
    var.initial = literal_from_json(var, *it, context);
  }
  if (auto it = doc.find("scope"); it != doc.end() && it->get<std::string>() == "global") {
    var.global_hint = true;
  }
  return var;
}

WidgetDef parse_widget(const json& doc, const std::string& page_id,
                       const std::vector<VarDef>& vars) {
  WidgetDef widget;
  widget.id = require_string(doc, "id", "widget on page '" + page_id + "'");
  const std::string context = "widget '" + widget.id + "' on page '" + page_id + "'";
  const std::string kind = require_string(doc, "kind", context);
  auto parsed_kind = parse_widget_kind(kind);
  if (!parsed_kind || *parsed_kind == WidgetKind::Page) {
    invalid(context + ": unknown widget kind '" + kind + "'", widget.id);
  }
  widget.kind = *parsed_kind;
  if (auto it = doc.find("bind"); it != doc.end() && !it->is_null()) {
    const std::string name = it->get<std::string>();
    auto index = find_variable(vars, name);
    if (!index) invalid(context + ": binds undeclared variable '" + name + "'", name);
    widget.bind = *index;
  }
  widget.animated = doc.value("animated", false);
  if (auto it = doc.find("visible"); it != doc.end() && !it->is_null()) {
    widget.visible = Guard::parse(it->get<std::string>());
  }
  if (auto it = doc.find("checked"); it != doc.end()) widget.initial.checked = it->get<bool>();
  if (auto it = doc.find("expanded"); it != doc.end()) widget.initial.expanded = it->get<bool>();
  if (auto it = doc.find("item_count"); it != doc.end()) {
    widget.initial.item_count = it->get<int>();
  }
  if (auto it = doc.find("text"); it != doc.end()) widget.initial.text = it->get<std::string>();
  if (auto it = doc.find("selected"); it != doc.end()) {
    widget.initial.selected = it->get<std::string>();
  }
  if (auto it = doc.find("children"); it != doc.end()) {
    for (const auto& child : *it) widget.children.push_back(parse_widget(child, page_id, vars));
  }
  return widget;
}

json widget_to_json(const WidgetDef& widget, const std::vector<VarDef>& vars) {
  json out{{"id", widget.id}, {"kind", std::string(to_string(widget.kind))}};
  if (widget.bind) out["bind"] = vars.at(*widget.bind).name;
  if (widget.animated) out["animated"] = true;
  if (!widget.visible.is_trivial()) out["visible"] = widget.visible.source();
  const auto& a = widget.initial;
  if (a.checked) out["checked"] = *a.checked;
  if (a.expanded) out["expanded"] = *a.expanded;
  if (a.item_count) out["item_count"] = *a.item_count;
  if (a.text) out["text"] = *a.text;
  if (a.selected) out["selected"] = *a.selected;
  if (!widget.children.empty()) {
    json children = json::array();
    for (const auto& child : widget.children) children.push_back(widget_to_json(child, vars));
    out["children"] = std::move(children);
  }
  return out;
}

void check_widget(const WidgetDef& widget, const std::string& page_id,
                  const std::vector<VarDef>& vars, std::set<std::string>& seen) {
  const std::string context = "widget '" + widget.id + "' on page '" + page_id + "'";
  if (widget.id.empty()) invalid("page '" + page_id + "' has a widget with an empty id", page_id);
  if (!seen.insert(widget.id).second) {
    invalid(context + ": duplicate widget id within page", widget.id);
  }
  if (widget.bind) {
    const VarDef& var = vars[*widget.bind];
    bool ok = false;
    switch (widget.kind) {
      case WidgetKind::Switch:
      case WidgetKind::Expandable:
      case WidgetKind::Input:
        ok = var.type == VarType::Bool;
        break;
      case WidgetKind::Container:
        ok = var.type == VarType::Bool || var.type == VarType::Counter;
        break;
      case WidgetKind::RadioGroup:
        ok = var.type == VarType::Enum;
        break;
      default:
        ok = false;
        break;
    }
    if (!ok) {
      invalid(context + ": cannot bind " + std::string(to_string(var.type)) + " variable '" +
                  var.name + "' to a " + std::string(to_string(widget.kind)),
              widget.id);
    }
  } else if (widget.kind == WidgetKind::RadioGroup) {
    invalid(context + ": radio_group must bind an enum variable", widget.id);
  }
  if (widget.animated) {
    bool kind_ok = widget.kind == WidgetKind::Switch || widget.kind == WidgetKind::Expandable ||
                   widget.kind == WidgetKind::Container;
    if (!kind_ok || widget.bind) {
      invalid(context + ": only unbound switch/expandable/container widgets may be animated",
              widget.id);
    }
  }
  for (const auto& child : widget.children) check_widget(child, page_id, vars, seen);
}

void bind_widget_guards(WidgetDef& widget, const std::vector<VarDef>& vars) {
  widget.visible.bind(vars);
  for (auto& child : widget.children) bind_widget_guards(child, vars);
}

const WidgetDef* find_in(const std::vector<WidgetDef>& widgets, std::string_view id) {
  for (const auto& w : widgets) {
    if (w.id == id) return &w;
    if (const auto* hit = find_in(w.children, id)) return hit;
  }
  return nullptr;
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

std::optional<LabelId> AppModel::find_label(std::string_view name) const {
  auto it = label_index_.find(std::string(name));
  if (it == label_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> AppModel::find_page(std::string_view id) const {
  auto it = page_index_.find(std::string(id));
  if (it == page_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> AppModel::find_transition(std::string_view id) const {
  auto it = transition_index_.find(std::string(id));
  if (it == transition_index_.end()) return std::nullopt;
  return it->second;
}

const WidgetDef* AppModel::find_widget(std::size_t page, std::string_view widget_id) const {
  if (page >= pages.size()) return nullptr;
  return find_in(pages[page].widgets, widget_id);
}

const std::vector<std::size_t>& AppModel::transitions_for(std::size_t page,
                                                          std::string_view widget_id) const {
  static const std::vector<std::size_t> kEmpty;
  auto it = by_widget_.find(std::make_pair(page, std::string(widget_id)));
  return it == by_widget_.end() ? kEmpty : it->second;
}

const FlakyEdge* AppModel::flaky_edge(std::size_t transition) const {
  auto it = flaky_by_transition_.find(transition);
  return it == flaky_by_transition_.end() ? nullptr : &flaky_edges[it->second];
}

std::vector<std::string> AppModel::activities() const {
  std::set<std::string> names;
  for (const auto& page : pages) names.insert(page.activity);
  return {names.begin(), names.end()};
}

Valuation AppModel::initial_valuation() const {
  Valuation v;
  v.reserve(variables.size());
  for (const auto& var : variables) v.push_back(var.initial);
  return v;
}

double AppModel::product_state_count() const {
  double n = static_cast<double>(pages.size());
  for (const auto& var : variables) n *= var.domain_size();
  return n;
}

LabelId AppModel::intern_label(const std::string& name) {
  auto [it, inserted] = label_index_.try_emplace(name, static_cast<LabelId>(labels_.size()));
  if (inserted) labels_.push_back(name);
  return it->second;
}

void AppModel::finalize() {
  if (app_id.empty()) invalid("app_id must be non-empty", "app_id");

  std::set<std::string> var_names;
  for (const auto& var : variables) {
    if (var.name.empty()) invalid("variable with empty name", "variables");
    if (!var_names.insert(var.name).second) invalid("duplicate variable '" + var.name + "'", var.name);
    if (var.type == VarType::Enum) {
      if (var.symbols.size() < 2 || var.symbols.size() > 4) {
        invalid("enum variable '" + var.name + "' must have 2-4 symbols", var.name);
      }
      std::set<std::string> unique(var.symbols.begin(), var.symbols.end());
      if (unique.size() != var.symbols.size()) {
        invalid("enum variable '" + var.name + "' has duplicate symbols", var.name);
      }
    }
    if (var.type == VarType::Counter && var.max < 1) {
      invalid("counter variable '" + var.name + "' needs max >= 1", var.name);
    }
    if (!var.in_domain(var.initial)) {
      invalid("initial value of '" + var.name + "' is outside its domain", var.name);
    }
  }

  page_index_.clear();
  for (std::size_t i = 0; i < pages.size(); ++i) {
    auto& page = pages[i];
    if (page.id.empty()) invalid("page with empty id", "pages");
    if (!page_index_.emplace(page.id, i).second) invalid("duplicate page id '" + page.id + "'", page.id);
    if (page.activity.empty()) page.activity = page.id;
    std::set<std::string> seen;
    for (auto& widget : page.widgets) {
      check_widget(widget, page.id, variables, seen);
      try {
        bind_widget_guards(widget, variables);
      } catch (const GuardBindError& e) {
        throw ModelValidationError(e.what(), e.variable());
      }
    }
  }
  if (pages.empty()) invalid("model declares no pages", "pages");
  if (entry_page >= pages.size()) invalid("entry page index out of range", "entry_page");

  transition_index_.clear();
  by_widget_.clear();
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    auto& t = transitions[i];
    if (t.id.empty()) invalid("transition with empty id", "transitions");
    if (!transition_index_.emplace(t.id, i).second) {
      invalid("duplicate transition id '" + t.id + "'", t.id);
    }
    if (t.source >= pages.size() || t.target >= pages.size()) {
      invalid("transition '" + t.id + "' references an unknown page", t.id);
    }
    const WidgetDef* widget = find_widget(t.source, t.widget);
    if (!widget) {
      invalid("transition '" + t.id + "' references unknown widget '" + t.widget + "' on page '" +
                  pages[t.source].id + "'",
              t.id);
    }
    switch (widget->kind) {
      case WidgetKind::RadioGroup: {
        const VarDef& var = variables[*widget->bind];
        if (t.event != EventKind::Select || !t.arg || !parse_literal(var, *t.arg)) {
          invalid("transition '" + t.id + "' on radio_group must be a select with a valid option",
                  t.id);
        }
        break;
      }
      case WidgetKind::Input:
        if (t.event != EventKind::Input) {
          invalid("transition '" + t.id + "' on an input must use the input event", t.id);
        }
        break;
      default:
        if (t.event != EventKind::Tap) {
          invalid("transition '" + t.id + "' on a " + std::string(to_string(widget->kind)) +
                      " must use the tap event",
                  t.id);
        }
        break;
    }
    try {
      t.guard.bind(variables);
    } catch (const GuardBindError& e) {
      throw ModelValidationError("transition '" + t.id + "': " + e.what(), e.variable());
    }
    for (const auto& effect : t.effects) {
      if (effect.var >= variables.size()) invalid("transition '" + t.id + "' has a bad effect", t.id);
      const VarDef& var = variables[effect.var];
      if (effect.op == Effect::Op::Toggle && var.type != VarType::Bool) {
        invalid("transition '" + t.id + "' toggles non-boolean '" + var.name + "'", t.id);
      }
      if (effect.op == Effect::Op::Add && var.type != VarType::Counter) {
        invalid("transition '" + t.id + "' adds to non-counter '" + var.name + "'", t.id);
      }
      if (effect.op == Effect::Op::Set && !var.in_domain(effect.value)) {
        invalid("transition '" + t.id + "' sets '" + var.name + "' outside its domain", t.id);
      }
    }
    std::set<LabelId> unique(t.labels.begin(), t.labels.end());
    if (unique.size() != t.labels.size()) {
      invalid("transition '" + t.id + "' repeats a branch label", t.id);
    }
    by_widget_[{t.source, t.widget}].push_back(i);
  }

  flaky_by_transition_.clear();
  for (std::size_t i = 0; i < flaky_edges.size(); ++i) {
    const auto& edge = flaky_edges[i];
    if (edge.transition >= transitions.size()) invalid("flaky edge references unknown transition", "flaky_edges");
    const std::string& tid = transitions[edge.transition].id;
    if (edge.probability < 0.0 || edge.probability > 1.0) {
      invalid("flaky edge on '" + tid + "' has probability outside [0,1]", tid);
    }
    if (edge.alternate >= pages.size()) invalid("flaky edge on '" + tid + "' has unknown alternate page", tid);
    if (!flaky_by_transition_.emplace(edge.transition, i).second) {
      invalid("transition '" + tid + "' has more than one flaky edge", tid);
    }
  }
}

AppModel app_model_from_json(const json& doc) {
  if (!doc.is_object()) invalid("app model must be a JSON object", "<root>");
  AppModel model;
  model.app_id = require_string(doc, "app_id", "app model");

  if (auto it = doc.find("variables"); it != doc.end()) {
    for (const auto& v : *it) model.variables.push_back(parse_variable(v));
  }
  std::set<std::string> var_names;
  for (const auto& var : model.variables) {
    if (!var_names.insert(var.name).second) invalid("duplicate variable '" + var.name + "'", var.name);
  }

  const json& pages = require(doc, "pages", "app model");
  for (const auto& p : pages) {
    PageDef page;
    page.id = require_string(p, "id", "page");
    page.activity = p.value("activity", page.id);
    page.description = p.value("description", std::string{});
    if (auto it = p.find("widgets"); it != p.end()) {
      try {
        for (const auto& w : *it) page.widgets.push_back(parse_widget(w, page.id, model.variables));
      } catch (const GuardSyntaxError&) {
        throw;
      }
    }
    model.pages.push_back(std::move(page));
  }
  auto page_of = [&](const std::string& id, const std::string& context) {
    for (std::size_t i = 0; i < model.pages.size(); ++i) {
      if (model.pages[i].id == id) return i;
    }
    invalid(context + ": unknown page '" + id + "'", id);
  };
  model.entry_page = page_of(require_string(doc, "entry_page", "app model"), "entry_page");

  if (auto it = doc.find("transitions"); it != doc.end()) {
    for (const auto& t : *it) {
      TransitionDef tr;
      tr.id = require_string(t, "id", "transition");
      const std::string context = "transition '" + tr.id + "'";
      tr.source = page_of(require_string(t, "source", context), context);
      tr.widget = require_string(t, "widget", context);
      const std::string event = t.value("event", std::string("tap"));
      auto kind = parse_event_kind(event);
      if (!kind) invalid(context + ": unknown event kind '" + event + "'", tr.id);
      tr.event = *kind;
      if (auto a = t.find("arg"); a != t.end() && !a->is_null()) tr.arg = a->get<std::string>();
      if (auto g = t.find("guard"); g != t.end() && !g->is_null()) {
        tr.guard = Guard::parse(g->get<std::string>());
      }
      if (auto e = t.find("effects"); e != t.end()) {
        for (const auto& eff : *e) {
          const std::string name = require_string(eff, "var", context);
          auto index = find_variable(model.variables, name);
          if (!index) invalid(context + ": effect on undeclared variable '" + name + "'", name);
          Effect effect;
          effect.var = *index;
          const VarDef& var = model.variables[*index];
          if (eff.contains("set")) {
            effect.op = Effect::Op::Set;
            effect.value = literal_from_json(var, eff["set"], context);
          } else if (eff.contains("toggle")) {
            effect.op = Effect::Op::Toggle;
          } else if (eff.contains("add")) {
            effect.op = Effect::Op::Add;
            effect.value = eff["add"].get<int>();
          } else {
            invalid(context + ": effect needs one of set/toggle/add", tr.id);
          }
          tr.effects.push_back(effect);
        }
      }
      tr.target = tr.source;
      if (auto tg = t.find("target"); tg != t.end() && !tg->is_null()) {
        tr.target = page_of(tg->get<std::string>(), context);
      }
      if (auto l = t.find("labels"); l != t.end()) {
        for (const auto& label : *l) {
          const std::string name = label.get<std::string>();
          if (name.empty()) invalid(context + ": empty branch label", tr.id);
          tr.labels.push_back(model.intern_label(name));
        }
      }
      model.transitions.push_back(std::move(tr));
    }
  }

  if (auto it = doc.find("flaky_edges"); it != doc.end()) {
    for (const auto& f : *it) {
      FlakyEdge edge;
      const std::string tid = require_string(f, "transition", "flaky edge");
      bool found = false;
      for (std::size_t i = 0; i < model.transitions.size(); ++i) {
        if (model.transitions[i].id == tid) {
          edge.transition = i;
          found = true;
        }
      }
      if (!found) invalid("flaky edge references unknown transition '" + tid + "'", tid);
      edge.probability = require(f, "probability", "flaky edge on '" + tid + "'").get<double>();
      edge.alternate = page_of(require_string(f, "alternate", "flaky edge on '" + tid + "'"),
                               "flaky edge on '" + tid + "'");
      model.flaky_edges.push_back(edge);
    }
  }

  model.finalize();
  return model;
}

AppModel parse_app_model(std::string_view text, std::string_view source_name) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, column] = line_and_column(text, byte);
    throw ModelParseError(std::string(source_name) + ":" + std::to_string(line) + ":" +
                              std::to_string(column) + ": " + e.what(),
                          line, column);
  }
  try {
    return app_model_from_json(doc);
  } catch (const json::exception& e) {
    throw ModelValidationError(std::string(source_name) + ": malformed model: " + e.what(),
                               "<schema>");
  }
}

AppModel load_app_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open app model '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_app_model(buffer.str(), path.string());
}

json app_model_to_json(const AppModel& model) {
  json doc;
  doc["app_id"] = model.app_id;
  doc["entry_page"] = model.pages.at(model.entry_page).id;
  json vars = json::array();
  for (const auto& var : model.variables) {
    json v{{"name", var.name}, {"type", std::string(to_string(var.type))}};
    if (var.type == VarType::Enum) v["values"] = var.symbols;
    if (var.type == VarType::Counter) v["max"] = var.max;
    v["initial"] = literal_to_json(var, var.initial);
    if (var.global_hint) v["scope"] = "global";
    vars.push_back(std::move(v));
  }
  doc["variables"] = std::move(vars);
  json pages = json::array();
  for (const auto& page : model.pages) {
    json p{{"id", page.id}, {"activity", page.activity}};
    if (!page.description.empty()) p["description"] = page.description;
    json widgets = json::array();
    for (const auto& w : page.widgets) widgets.push_back(widget_to_json(w, model.variables));
    p["widgets"] = std::move(widgets);
    pages.push_back(std::move(p));
  }
  doc["pages"] = std::move(pages);
  json transitions = json::array();
  for (const auto& t : model.transitions) {
    json j{{"id", t.id},
           {"source", model.pages[t.source].id},
           {"widget", t.widget},
           {"event", std::string(to_string(t.event))},
           {"target", model.pages[t.target].id}};
    if (t.arg) j["arg"] = *t.arg;
    if (!t.guard.is_trivial()) j["guard"] = t.guard.source();
    json effects = json::array();
    for (const auto& e : t.effects) {
      const VarDef& var = model.variables[e.var];
      json eff{{"var", var.name}};
      switch (e.op) {
        case Effect::Op::Set:
          eff["set"] = literal_to_json(var, e.value);
          break;
        case Effect::Op::Toggle:
          eff["toggle"] = true;
          break;
        case Effect::Op::Add:
          eff["add"] = e.value;
          break;
      }
      effects.push_back(std::move(eff));
    }
    if (!effects.empty()) j["effects"] = std::move(effects);
    json labels = json::array();
    for (auto id : t.labels) labels.push_back(model.label_name(id));
    j["labels"] = std::move(labels);
    transitions.push_back(std::move(j));
  }
  doc["transitions"] = std::move(transitions);
  json flaky = json::array();
  for (const auto& f : model.flaky_edges) {
    flaky.push_back({{"transition", model.transitions[f.transition].id},
                     {"probability", f.probability},
                     {"alternate", model.pages[f.alternate].id}});
  }
  doc["flaky_edges"] = std::move(flaky);
  return doc;
}

}  // namespace epidroid
