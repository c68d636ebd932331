#include "epidroid/explorers.hpp"

#include <algorithm>
#include <deque>
#include <memory>

namespace epidroid {

namespace {

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename T>
const T& pick(const std::vector<T>& items, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> dist(0, items.size() - 1);
  return items[dist(rng)];
}

}  // namespace

std::string_view to_string(ExplorerKind kind) { return kind == ExplorerKind::Random ? "random" : "frontier"; }

std::optional<ExplorerKind> parse_explorer_kind(std::string_view name) {
  if (name == "random") return ExplorerKind::Random;
  if (name == "frontier") return ExplorerKind::Frontier;
  return std::nullopt;
}

RandomExplorer::RandomExplorer(const ExplorerConfig& config) : config_(config), rng_(splitmix64(config.seed)) {}

void RandomExplorer::run(Device& device, std::uint64_t budget, Trace* trace) {
  device.attach_trace(trace);
  int empty_pages = 0;
  for (std::uint64_t done = 0; done < budget;) {
    if (uniform(rng_) < config_.restart_probability) device.reset();
    auto events = actionable_events(device.tree());
    if (events.empty()) {
      device.reset();
      if (++empty_pages > 3) break;
      continue;
    }
    empty_pages = 0;
    if (device.step(pick(events, rng_))) ++done;
  }
  device.attach_trace(nullptr);
}

FrontierExplorer::FrontierExplorer(const ExplorerConfig& config)
    : config_(config), rng_(splitmix64(config.seed ^ 0xf00dULL)) {}

std::optional<Event> FrontierExplorer::next_action(Device& device) {
  const ClusterId here = device.cluster();
  auto events = actionable_events(device.tree());
  known_actions_[here] = events;
  for (const auto& e : events) {
    if (!explored_.count({here, e})) return e;
  }

  // Walk toward the nearest cluster with a known unexplored action.
  const SemanticUtg& utg = device.context().utg;
  std::map<ClusterId, std::optional<Event>> first_hop{{here, std::nullopt}};
  std::deque<ClusterId> frontier{here};
  bool any_unexplored = false;
  while (!frontier.empty()) {
    ClusterId cur = frontier.front();
    frontier.pop_front();
    if (cur != here) {
      const auto& known = known_actions_[cur];
      if (std::any_of(known.begin(), known.end(), [&](const Event& e) { return !explored_.count({cur, e}); })) {
        return first_hop.at(cur);
      }
    }
    for (const auto& edge : utg.out_edges(cur)) {
      if (first_hop.count(edge.target)) continue;
      first_hop.emplace(edge.target, cur == here ? std::optional<Event>(edge.event) : first_hop.at(cur));
      frontier.push_back(edge.target);
    }
  }
  for (const auto& [cluster, known] : known_actions_) {
    for (const auto& e : known) {
      if (!explored_.count({cluster, e})) any_unexplored = true;
    }
  }
  if (any_unexplored) return std::nullopt;  // unexplored actions exist but are unreachable from here
  exhausted_ = true;
  if (events.empty()) return std::nullopt;
  return pick(events, rng_);
}

void FrontierExplorer::run(Device& device, std::uint64_t budget, Trace* trace) {
  device.attach_trace(trace);
  int inert = 0;
  int stuck = 0;
  for (std::uint64_t done = 0; done < budget;) {
    if (exhausted_ && uniform(rng_) < config_.restart_probability) device.reset();
    auto action = next_action(device);
    if (!action) {
      device.reset();
      inert = 0;
      if (++stuck > 3) {
        // Nothing reachable from a fresh start either: fall back to random.
        exhausted_ = true;
        stuck = 0;
      }
      continue;
    }
    stuck = 0;
    const ClusterId here = device.cluster();
    auto step = device.step(*action);
    if (!step) continue;
    ++done;
    explored_.insert({here, *action});
    const bool is_inert = step->step.pre_signature == step->step.post_signature && step->step.coverage_delta.empty();
    inert = is_inert ? inert + 1 : 0;
    if (inert >= config_.inert_restart) {
      device.reset();
      inert = 0;
    }
  }
  device.attach_trace(nullptr);
}

std::unique_ptr<Explorer> make_explorer(const ExplorerConfig& config) {
  if (config.kind == ExplorerKind::Random) return std::make_unique<RandomExplorer>(config);
  return std::make_unique<FrontierExplorer>(config);
}

Trace explore(Device& device, const ExplorerConfig& config) {
  Trace trace;
  trace.origin = std::string(to_string(config.kind));
  trace.seed = config.seed;
  device.reset();
  make_explorer(config)->run(device, config.budget, &trace);
  return trace;
}

}  // namespace epidroid
