#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "epidroid/app_model.hpp"
#include "epidroid/view_tree.hpp"

namespace epidroid {

/// The targeted widget is not rendered on the current page.
class StaleWidgetError : public std::runtime_error {
 public:
  explicit StaleWidgetError(const std::string& message) : std::runtime_error(message) {}
};

struct StepResult {
  ViewNode tree;  // concrete post-state
  std::vector<LabelId> coverage_delta;
  bool transitioned = false;
  std::optional<std::size_t> transition;
  bool diverted = false;  // a flaky edge sent the app to its alternate page
};

/// One live execution of an AppModel. Single-threaded; copying a session
/// snapshots the app, which test oracles use for exhaustive enumeration.
class Session {
 public:
  Session(std::shared_ptr<const AppModel> model, std::uint64_t seed);

  static Session reset(std::shared_ptr<const AppModel> model, std::uint64_t seed) {
    return Session(std::move(model), seed);
  }

  /// Throws StaleWidgetError when the widget is not visible on this page.
  StepResult execute_event(const Event& event);
  std::optional<StepResult> try_execute(const Event& event);

  ViewNode observe_view_tree() const;

  const AppModel& model() const { return *model_; }
  const std::shared_ptr<const AppModel>& model_ptr() const { return model_; }
  std::size_t page() const { return page_; }
  const std::string& page_id() const { return model_->pages[page_].id; }
  const std::string& activity() const { return model_->pages[page_].activity; }
  const Valuation& valuation() const { return valuation_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t event_counter() const { return event_counter_; }

  bool is_covered(LabelId label) const { return covered_[label] != 0; }
  std::size_t covered_count() const { return covered_count_; }
  std::vector<LabelId> covered_labels() const;

  /// Deterministic dump of page, valuation, clock, coverage and RNG state.
  std::string serialize_state() const;

  /// Direct state placement for oracles that enumerate the product space.
  void place(std::size_t page, Valuation valuation);

 private:
  bool widget_visible(std::string_view widget_id) const;
  double next_uniform();

  std::shared_ptr<const AppModel> model_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  std::size_t page_;
  Valuation valuation_;
  std::uint64_t event_counter_ = 0;
  std::vector<char> covered_;
  std::size_t covered_count_ = 0;
};

/// The transition (if any) that `event` fires from (page, valuation).
std::optional<std::size_t> matching_transition(const AppModel& model, std::size_t page,
                                               const Valuation& valuation, const Event& event);

void apply_effects(const AppModel& model, const TransitionDef& transition, Valuation& valuation);

/// Renders the widget tree of `page` under `valuation` at the given clock.
ViewNode render_page(const AppModel& model, std::size_t page, const Valuation& valuation,
                     std::uint64_t clock);

}  // namespace epidroid
