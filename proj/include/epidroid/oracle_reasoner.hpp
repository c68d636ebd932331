#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <set>

#include "epidroid/app_model.hpp"
#include "epidroid/reasoner.hpp"

namespace epidroid {

struct OracleNoise {
  double validation_flip_rate = 0.0;
  double impact_recall = 1.0;     // fraction of true affected clusters kept
  double impact_precision = 1.0;  // fraction of returned clusters that are true
  std::uint64_t seed = 0;
};

/// Pages whose transition guards or widget visibility guards read `var`.
std::set<std::size_t> reader_pages(const AppModel& model, std::size_t var);

/// True when `var` is read by any guard or written by any effect.
bool variable_is_functional(const AppModel& model, std::size_t var);

/// Ground-truth reasoner over the simulator's own model: bindings, guard
/// reads, authored page descriptions and exhaustive mutation search. Seeded
/// noise knobs degrade its answers for robustness studies.
class OracleReasoner : public Reasoner {
 public:
  explicit OracleReasoner(std::shared_ptr<const AppModel> model, OracleNoise noise = {});

  std::string summarize_cluster(const ReasonerContext& context) override;
  Validation validate_mse(const MseRecord& record, const ReasonerContext& context) override;
  ImpactScope classify_scope(const MseRecord& record, const ReasonerContext& context) override;
  std::vector<ClusterId> infer_impact(const MseRecord& record, const std::string& target,
                                      const ReasonerContext& context) override;
  CompositePlan plan_composite(const MseRecord& record, const std::string& target,
                               const std::vector<ClusterId>& affected, const std::vector<FragmentDigest>& fragments,
                               const ReasonerContext& context) override;
  GuideResult guide_mutation(const MutationGoal& goal, const ReasonerContext& context) override;

  /// Variable bound to the record's widget on its cluster's page.
  std::optional<std::size_t> bound_variable(const MseRecord& record, const ReasonerContext& context) const;

 private:
  std::optional<std::size_t> page_of(ClusterId cluster, const ReasonerContext& context) const;
  double uniform();

  std::shared_ptr<const AppModel> model_;
  OracleNoise noise_;
  std::mt19937_64 rng_;
};

}  // namespace epidroid
