#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "epidroid/device.hpp"
#include "epidroid/trace.hpp"

namespace epidroid {

enum class ExplorerKind { Random, Frontier };

std::string_view to_string(ExplorerKind kind);
std::optional<ExplorerKind> parse_explorer_kind(std::string_view name);

struct ExplorerConfig {
  ExplorerKind kind = ExplorerKind::Frontier;
  std::uint64_t budget = 500;
  std::uint64_t seed = 0;
  double restart_probability = 0.02;  // random kind, and frontier once exhausted
  int inert_restart = 10;             // frontier: consecutive inert events before a restart
};

/// Warm-up explorer. Explorers are stateful so an enhancement phase can
/// continue where the warm-up stopped.
class Explorer {
 public:
  virtual ~Explorer() = default;
  /// Executes up to `budget` events, appending every step to `trace` when given.
  virtual void run(Device& device, std::uint64_t budget, Trace* trace) = 0;
};

/// Uniform choice over the current page's actionable events with seeded
/// restarts.
class RandomExplorer : public Explorer {
 public:
  explicit RandomExplorer(const ExplorerConfig& config);
  void run(Device& device, std::uint64_t budget, Trace* trace) override;

 private:
  ExplorerConfig config_;
  std::mt19937_64 rng_;
};

/// Prefers never-fired (cluster, event) actions on the current page, walks
/// the graph toward the nearest cluster with unexplored actions, and falls
/// back to seeded random actions once everything known is explored.
class FrontierExplorer : public Explorer {
 public:
  explicit FrontierExplorer(const ExplorerConfig& config);
  void run(Device& device, std::uint64_t budget, Trace* trace) override;

  bool exhausted() const { return exhausted_; }

 private:
  std::optional<Event> next_action(Device& device);

  ExplorerConfig config_;
  std::mt19937_64 rng_;
  std::set<std::pair<ClusterId, Event>> explored_;
  std::map<ClusterId, std::vector<Event>> known_actions_;
  bool exhausted_ = false;
};

std::unique_ptr<Explorer> make_explorer(const ExplorerConfig& config);

/// Runs a fresh explorer from a reset and returns its trace.
Trace explore(Device& device, const ExplorerConfig& config);

}  // namespace epidroid
