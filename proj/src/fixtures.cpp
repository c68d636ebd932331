#include "epidroid/fixtures.hpp"

#include <cstdlib>
#include <deque>
#include <functional>
#include <map>
#include <random>

#include "epidroid/device.hpp"
#include "epidroid/session.hpp"

#ifndef EPIDROID_SOURCE_DIR
#define EPIDROID_SOURCE_DIR "."
#endif

namespace epidroid {

namespace {

WidgetDef make_widget(std::string id, WidgetKind kind) {
  WidgetDef w;
  w.id = std::move(id);
  w.kind = kind;
  return w;
}

class ModelBuilder {
 public:
  explicit ModelBuilder(AppModel& model) : model_(model) {}

  void transition(std::size_t source, const std::string& widget, std::size_t target, std::vector<std::string> labels,
                  std::string guard = "", std::vector<Effect> effects = {}, EventKind kind = EventKind::Tap,
                  std::optional<std::string> arg = std::nullopt) {
    TransitionDef t;
    t.id = "t" + std::to_string(model_.transitions.size());
    t.source = source;
    t.widget = widget;
    t.event = kind;
    t.arg = std::move(arg);
    t.guard = Guard::parse(guard);
    t.effects = std::move(effects);
    t.target = target;
    for (const auto& l : labels) t.labels.push_back(model_.intern_label(l));
    model_.transitions.push_back(std::move(t));
  }

 private:
  AppModel& model_;
};

}  // namespace

AppModel generate_random_model(const GeneratorParams& params, std::uint64_t seed) {
  if (params.pages < 2 || params.pages > 12) throw GeneratorParamsError("pages must lie in [2, 12]");
  if (params.variables < 0 || params.variables > 6) throw GeneratorParamsError("variables must lie in [0, 6]");
  if (params.distractors_per_page < 0 || params.distractors_per_page > 6) {
    throw GeneratorParamsError("distractors per page must lie in [0, 6]");
  }
  if (params.labels_per_gate < 1 || params.labels_per_gate > 8) {
    throw GeneratorParamsError("labels per gate must lie in [1, 8]");
  }
  std::mt19937_64 rng(splitmix64(seed));
  auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto coin = [&](double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p; };

  AppModel model;
  model.app_id = "generated_" + std::to_string(seed);
  const int n = params.pages;
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    PageDef page;
    page.id = "p" + std::to_string(i);
    page.activity = "Activity" + std::to_string(i / 2);
    model.pages.push_back(std::move(page));
    if (i > 0) parent[static_cast<std::size_t>(i)] = uniform_int(0, i - 1);
  }
  model.entry_page = 0;
  ModelBuilder build(model);
  auto pid = [&](int i) { return model.pages[static_cast<std::size_t>(i)].id; };
  auto page = [&](int i) -> PageDef& { return model.pages[static_cast<std::size_t>(i)]; };

  for (int i = 1; i < n; ++i) {
    const int p = parent[static_cast<std::size_t>(i)];
    const std::string open = pid(p) + "_open_" + pid(i);
    page(p).widgets.push_back(make_widget(open, WidgetKind::Button));
    build.transition(static_cast<std::size_t>(p), open, static_cast<std::size_t>(i), {"nav_" + pid(p) + "_" + pid(i)});
  }

  // Variables: controller on one page, gated reader on a different page.
  for (int v = 0; v < params.variables; ++v) {
    VarDef var;
    var.name = "v" + std::to_string(v);
    const bool is_enum = coin(params.enum_fraction);
    if (is_enum) {
      var.type = VarType::Enum;
      const int k = uniform_int(2, 3);
      for (int s = 0; s < k; ++s) var.symbols.push_back(std::string(1, static_cast<char>('A' + s)));
    }
    model.variables.push_back(var);
    const auto var_index = static_cast<std::size_t>(v);

    const int home = uniform_int(0, n - 1);
    int reader = uniform_int(0, n - 2);
    if (reader >= home) ++reader;
    if (is_enum) {
      const std::string radio = pid(home) + "_" + var.name + "_choice";
      WidgetDef w = make_widget(radio, WidgetKind::RadioGroup);
      w.bind = var_index;
      page(home).widgets.push_back(std::move(w));
      for (std::size_t s = 0; s < var.symbols.size(); ++s) {
        build.transition(static_cast<std::size_t>(home), radio, static_cast<std::size_t>(home),
                         {var.name + "_select_" + var.symbols[s]}, "",
                         {Effect{var_index, Effect::Op::Set, static_cast<int>(s)}}, EventKind::Select,
                         var.symbols[s]);
      }
    } else {
      const std::string toggle = pid(home) + "_" + var.name + "_switch";
      WidgetDef w = make_widget(toggle, WidgetKind::Switch);
      w.bind = var_index;
      page(home).widgets.push_back(std::move(w));
      build.transition(static_cast<std::size_t>(home), toggle, static_cast<std::size_t>(home),
                       {var.name + "_toggle"}, "", {Effect{var_index, Effect::Op::Toggle, 0}});
    }

    const std::string act = pid(reader) + "_" + var.name + "_action";
    page(reader).widgets.push_back(make_widget(act, WidgetKind::Button));
    const int values = is_enum ? static_cast<int>(var.symbols.size()) : 2;
    for (int value = 1; value < values; ++value) {
      const std::string literal = is_enum ? var.symbols[static_cast<std::size_t>(value)] : "true";
      std::vector<std::string> labels;
      for (int l = 0; l < params.labels_per_gate; ++l) {
        labels.push_back("gated_" + var.name + "_" + literal + "_" + std::to_string(l));
      }
      build.transition(static_cast<std::size_t>(reader), act, static_cast<std::size_t>(reader), labels,
                       var.name + " == " + literal);
    }
    build.transition(static_cast<std::size_t>(reader), act, static_cast<std::size_t>(reader),
                     {var.name + "_action_default"});

    if (coin(params.visibility_fraction)) {
      const int shown_on = uniform_int(0, n - 1);
      const std::string literal = is_enum ? var.symbols.back() : "true";
      const std::string extra = pid(shown_on) + "_" + var.name + "_extra";
      WidgetDef w = make_widget(extra, WidgetKind::Button);
      w.visible = Guard::parse(var.name + " == " + literal);
      page(shown_on).widgets.push_back(std::move(w));
      build.transition(static_cast<std::size_t>(shown_on), extra, static_cast<std::size_t>(shown_on),
                       {"gated_" + var.name + "_extra"});
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < params.distractors_per_page; ++d) {
      const std::string id = pid(i) + "_item" + std::to_string(d);
      const bool live = coin(0.5);
      page(i).widgets.push_back(make_widget(id, live ? WidgetKind::Button : WidgetKind::Label));
      if (live) build.transition(static_cast<std::size_t>(i), id, static_cast<std::size_t>(i), {id + "_hit"});
    }
    if (i > 0) {
      const std::string back = pid(i) + "_back";
      page(i).widgets.push_back(make_widget(back, WidgetKind::Button));
      build.transition(static_cast<std::size_t>(i), back, static_cast<std::size_t>(parent[static_cast<std::size_t>(i)]),
                       {"nav_" + pid(i) + "_back"});
    }
  }

  model.finalize();
  if (model.product_state_count() > kMaxProductStates) {
    throw GeneratorParamsError("generated product space exceeds " + std::to_string(kMaxProductStates));
  }
  return model;
}

std::set<LabelId> brute_force_reachable_labels(const AppModel& model, bool allow_mutations) {
  if (model.product_state_count() > kMaxProductStates) {
    throw std::invalid_argument("product state space of '" + model.app_id + "' exceeds the oracle bound");
  }
  std::set<std::string> guard_read;
  for (const auto& t : model.transitions) {
    for (const auto& name : t.guard.variables()) guard_read.insert(name);
  }
  std::function<void(const std::vector<WidgetDef>&)> visit = [&](const std::vector<WidgetDef>& widgets) {
    for (const auto& w : widgets) {
      for (const auto& name : w.visible.variables()) guard_read.insert(name);
      visit(w.children);
    }
  };
  for (const auto& p : model.pages) visit(p.widgets);
  auto mutates = [&](const TransitionDef& t) {
    for (const auto& e : t.effects) {
      if (guard_read.count(model.variables[e.var].name)) return true;
    }
    return false;
  };

  std::set<LabelId> labels;
  if (model.pages.empty()) return labels;
  using State = std::pair<std::size_t, Valuation>;
  std::set<State> seen;
  std::deque<State> frontier;
  State start{model.entry_page, model.initial_valuation()};
  seen.insert(start);
  frontier.push_back(start);
  while (!frontier.empty()) {
    auto [page, valuation] = frontier.front();
    frontier.pop_front();
    const ViewNode tree = render_page(model, page, valuation, 0);
    for (const auto& event : actionable_events(tree)) {
      auto index = matching_transition(model, page, valuation, event);
      if (!index) continue;
      const TransitionDef& t = model.transitions[*index];
      if (!allow_mutations && mutates(t)) continue;
      labels.insert(t.labels.begin(), t.labels.end());
      Valuation next = valuation;
      apply_effects(model, t, next);
      std::vector<std::size_t> targets{t.target};
      if (const FlakyEdge* flaky = model.flaky_edge(*index)) targets.push_back(flaky->alternate);
      for (std::size_t target : targets) {
        State s{target, next};
        if (seen.insert(s).second) frontier.push_back(std::move(s));
      }
    }
  }
  return labels;
}

std::set<LabelId> labels_with_prefix(const AppModel& model, std::string_view prefix) {
  std::set<LabelId> out;
  for (std::size_t i = 0; i < model.labels().size(); ++i) {
    if (model.labels()[i].starts_with(prefix)) out.insert(static_cast<LabelId>(i));
  }
  return out;
}

std::filesystem::path fixtures_dir() {
  if (const char* env = std::getenv("EPIDROID_FIXTURES"); env && *env) return env;
  return std::filesystem::path(EPIDROID_SOURCE_DIR) / "fixtures";
}

}  // namespace epidroid
