#include "epidroid/oracle_reasoner.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "epidroid/session.hpp"

namespace epidroid {

namespace {

constexpr std::size_t kGuideStateLimit = 200000;

void collect_visibility_readers(const std::vector<WidgetDef>& widgets, const std::string& name, bool& reads) {
  for (const auto& w : widgets) {
    if (w.visible.variables().count(name)) reads = true;
    collect_visibility_readers(w.children, name, reads);
  }
}

const WidgetDef* find_widget_rec(const std::vector<WidgetDef>& widgets, std::string_view id) {
  for (const auto& w : widgets) {
    if (w.id == id) return &w;
    if (const auto* found = find_widget_rec(w.children, id)) return found;
  }
  return nullptr;
}

bool goal_holds(const AppModel& model, std::size_t page, const Valuation& valuation, const MutationGoal& goal) {
  if (model.pages[page].id != goal.page_hint) return false;
  ViewNode tree = render_page(model, page, valuation, 0);
  const ViewNode* node = find_widget(tree, goal.widget_id);
  if (!node) return false;
  auto value = abstract_value(*node);
  return value && *value == goal.target_value;
}

}  // namespace

std::set<std::size_t> reader_pages(const AppModel& model, std::size_t var) {
  const std::string& name = model.variables[var].name;
  std::set<std::size_t> pages;
  for (const auto& t : model.transitions) {
    if (t.guard.variables().count(name)) pages.insert(t.source);
  }
  for (std::size_t p = 0; p < model.pages.size(); ++p) {
    bool reads = false;
    collect_visibility_readers(model.pages[p].widgets, name, reads);
    if (reads) pages.insert(p);
  }
  return pages;
}

bool variable_is_functional(const AppModel& model, std::size_t var) {
  if (!reader_pages(model, var).empty()) return true;
  for (const auto& t : model.transitions) {
    for (const auto& e : t.effects) {
      if (e.var == var) return true;
    }
  }
  return false;
}

OracleReasoner::OracleReasoner(std::shared_ptr<const AppModel> model, OracleNoise noise)
    : model_(std::move(model)), noise_(noise), rng_(noise.seed) {}

double OracleReasoner::uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

std::optional<std::size_t> OracleReasoner::page_of(ClusterId cluster, const ReasonerContext& context) const {
  for (const auto& c : context.clusters) {
    if (c.id == cluster) return model_->find_page(c.page_hint);
  }
  return std::nullopt;
}

std::optional<std::size_t> OracleReasoner::bound_variable(const MseRecord& record,
                                                          const ReasonerContext& context) const {
  auto page = page_of(record.cluster, context);
  if (!page) return std::nullopt;
  const WidgetDef* widget = find_widget_rec(model_->pages[*page].widgets, record.widget_id);
  if (!widget) return std::nullopt;
  return widget->bind;
}

std::string OracleReasoner::summarize_cluster(const ReasonerContext& context) {
  auto page = page_of(context.focal_cluster, context);
  if (page && !model_->pages[*page].description.empty()) return model_->pages[*page].description;
  std::size_t widgets = context.focal_tree ? node_count(*context.focal_tree) - 1 : 0;
  std::string name = page ? model_->pages[*page].id : "cluster " + std::to_string(context.focal_cluster);
  return "screen '" + name + "' showing " + std::to_string(widgets) + " interface element(s)";
}

Validation OracleReasoner::validate_mse(const MseRecord& record, const ReasonerContext& context) {
  auto var = bound_variable(record, context);
  Validation verdict = var && variable_is_functional(*model_, *var) ? Validation::Valid : Validation::Noise;
  if (noise_.validation_flip_rate > 0.0 && uniform() < noise_.validation_flip_rate) {
    verdict = verdict == Validation::Valid ? Validation::Noise : Validation::Valid;
  }
  return verdict;
}

ImpactScope OracleReasoner::classify_scope(const MseRecord& record, const ReasonerContext& context) {
  auto var = bound_variable(record, context);
  if (!var) return ImpactScope::IntraPage;
  if (model_->variables[*var].global_hint) return ImpactScope::Global;
  auto readers = reader_pages(*model_, *var);
  if (readers.size() >= 3) return ImpactScope::Global;
  auto own = page_of(record.cluster, context);
  for (std::size_t p : readers) {
    if (!own || p != *own) return ImpactScope::InterPage;
  }
  return ImpactScope::IntraPage;
}

std::vector<ClusterId> OracleReasoner::infer_impact(const MseRecord& record, const std::string& /*target*/,
                                                    const ReasonerContext& context) {
  auto var = bound_variable(record, context);
  std::vector<ClusterId> truth;
  if (var) {
    auto readers = reader_pages(*model_, *var);
    for (const auto& c : context.clusters) {
      auto page = model_->find_page(c.page_hint);
      if (page && readers.count(*page)) truth.push_back(c.id);
    }
  }
  if (truth.empty()) return {record.cluster};

  std::vector<ClusterId> out = truth;
  if (noise_.impact_recall < 1.0) {
    std::shuffle(out.begin(), out.end(), rng_);
    auto keep = static_cast<std::size_t>(noise_.impact_recall * static_cast<double>(out.size()) + 0.5);
    out.resize(std::max<std::size_t>(1, keep));
  }
  if (noise_.impact_precision < 1.0) {
    std::vector<ClusterId> others;
    for (const auto& c : context.clusters) {
      if (std::find(truth.begin(), truth.end(), c.id) == truth.end()) others.push_back(c.id);
    }
    std::shuffle(others.begin(), others.end(), rng_);
    const double p = std::max(noise_.impact_precision, 0.01);
    auto extra = static_cast<std::size_t>(static_cast<double>(out.size()) * (1.0 - p) / p + 0.5);
    for (std::size_t i = 0; i < extra && i < others.size(); ++i) out.push_back(others[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CompositePlan OracleReasoner::plan_composite(const MseRecord& record, const std::string& target,
                                             const std::vector<ClusterId>& affected,
                                             const std::vector<FragmentDigest>& fragments,
                                             const ReasonerContext& context) {
  auto var = bound_variable(record, context);
  if (!var) return default_plan(record, target, affected, fragments);
  // Prefer fragments that, from the affected cluster on, fire widgets whose
  // behavior or visibility depends on the mutated variable.
  const std::string& name = model_->variables[*var].name;
  auto relevance = [&](const FragmentDigest& f, ClusterId cluster) {
    auto page = page_of(cluster, context);
    if (!page) return 0;
    auto first = std::find(f.cluster_path.begin(), f.cluster_path.end(), cluster);
    int score = 0;
    for (auto i = static_cast<std::size_t>(first - f.cluster_path.begin()); i < f.events.size(); ++i) {
      if (f.cluster_path[i] != cluster) continue;
      const std::string& widget = f.events[i].widget;
      bool reads = false;
      for (std::size_t t : model_->transitions_for(*page, widget)) {
        if (model_->transitions[t].guard.variables().count(name)) reads = true;
      }
      if (const WidgetDef* w = find_widget_rec(model_->pages[*page].widgets, widget)) {
        if (w->visible.variables().count(name)) reads = true;
      }
      score += reads ? 1 : 0;
    }
    return score;
  };
  return default_plan(record, target, affected, fragments, relevance);
}

GuideResult OracleReasoner::guide_mutation(const MutationGoal& goal, const ReasonerContext& context) {
  if (!context.state) return GuideResult{GuideResult::Kind::Unreachable, std::nullopt};
  auto start_page = model_->find_page(context.state->page);
  if (!start_page) return GuideResult{GuideResult::Kind::Unreachable, std::nullopt};
  Valuation start = model_->initial_valuation();
  for (const auto& [name, value] : context.state->values) {
    auto var = find_variable(model_->variables, name);
    if (!var) continue;
    if (auto v = parse_literal(model_->variables[*var], value)) start[*var] = *v;
  }
  if (goal_holds(*model_, *start_page, start, goal)) return GuideResult{GuideResult::Kind::Satisfied, std::nullopt};

  using State = std::pair<std::size_t, Valuation>;
  std::map<State, std::optional<Event>> first_event;  // first event on the path from start
  std::deque<State> frontier;
  State origin{*start_page, start};
  first_event.emplace(origin, std::nullopt);
  frontier.push_back(origin);
  while (!frontier.empty() && first_event.size() < kGuideStateLimit) {
    State cur = frontier.front();
    frontier.pop_front();
    const auto via = first_event.at(cur);
    ViewNode tree = render_page(*model_, cur.first, cur.second, 0);
    for (const Event& event : actionable_events(tree)) {
      auto index = matching_transition(*model_, cur.first, cur.second, event);
      if (!index) continue;
      const TransitionDef& t = model_->transitions[*index];
      Valuation next_val = cur.second;
      apply_effects(*model_, t, next_val);
      State next{t.target, std::move(next_val)};
      if (first_event.count(next)) continue;
      Event lead = via ? *via : event;
      if (goal_holds(*model_, next.first, next.second, goal)) return GuideResult{GuideResult::Kind::Step, lead};
      first_event.emplace(next, lead);
      frontier.push_back(std::move(next));
    }
  }
  return GuideResult{GuideResult::Kind::Unreachable, std::nullopt};
}

}  // namespace epidroid
