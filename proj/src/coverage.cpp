#include "epidroid/coverage.hpp"

namespace epidroid {

CoverageMonitor::CoverageMonitor(std::size_t total_labels, std::vector<std::string> declared_activities)
    : covered_(total_labels, 0), declared_(declared_activities.begin(), declared_activities.end()) {}

std::size_t CoverageMonitor::record_event(std::span<const LabelId> labels, const std::string& activity) {
  std::size_t gained = 0;
  for (LabelId label : labels) {
    if (!covered_[label]) {
      covered_[label] = 1;
      ++gained;
    }
  }
  covered_count_ += gained;
  curve_.push_back(static_cast<std::uint32_t>(covered_count_));
  visit_activity(activity);
  return gained;
}

void CoverageMonitor::visit_activity(const std::string& activity) {
  if (declared_.count(activity)) visited_.insert(activity);
}

void CoverageMonitor::begin_phase(std::string name) {
  phases_.push_back(PhaseMark{std::move(name), curve_.size(), covered_count_});
}

std::vector<LabelId> CoverageMonitor::covered_labels() const {
  std::vector<LabelId> out;
  for (std::size_t i = 0; i < covered_.size(); ++i) {
    if (covered_[i]) out.push_back(static_cast<LabelId>(i));
  }
  return out;
}

double CoverageMonitor::acc() const {
  if (covered_.empty()) return 0.0;
  return static_cast<double>(covered_count_) / static_cast<double>(covered_.size());
}

double CoverageMonitor::aac() const {
  if (declared_.empty()) return 0.0;
  return static_cast<double>(visited_.size()) / static_cast<double>(declared_.size());
}

}  // namespace epidroid
