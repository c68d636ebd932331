#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "epidroid/app_model.hpp"

namespace epidroid {

struct PhaseMark {
  std::string name;
  std::size_t start_event = 0;
  std::size_t start_covered = 0;
};

/// Cross-stage coverage monitor: one instance per run, fed by every executed
/// event regardless of which stage issued it.
class CoverageMonitor {
 public:
  CoverageMonitor(std::size_t total_labels, std::vector<std::string> declared_activities);

  /// Records one executed event; returns how many labels were new to the run.
  std::size_t record_event(std::span<const LabelId> labels, const std::string& activity);
  void visit_activity(const std::string& activity);

  void begin_phase(std::string name);
  const std::vector<PhaseMark>& phases() const { return phases_; }

  bool is_covered(LabelId label) const { return covered_[label] != 0; }
  std::size_t covered_count() const { return covered_count_; }
  std::size_t total_labels() const { return covered_.size(); }
  std::vector<LabelId> covered_labels() const;
  std::size_t events() const { return curve_.size(); }
  /// Cumulative covered-label count after each event.
  const std::vector<std::uint32_t>& curve() const { return curve_; }
  const std::set<std::string>& visited_activities() const { return visited_; }
  std::size_t declared_activities() const { return declared_.size(); }

  double acc() const;
  double aac() const;

 private:
  std::vector<char> covered_;
  std::size_t covered_count_ = 0;
  std::vector<std::uint32_t> curve_;
  std::set<std::string> declared_;
  std::set<std::string> visited_;
  std::vector<PhaseMark> phases_;
};

}  // namespace epidroid
