#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "epidroid/abstraction.hpp"
#include "epidroid/mse_tracker.hpp"
#include "epidroid/semantic_utg.hpp"
#include "epidroid/trace_store.hpp"
#include "epidroid/view_tree.hpp"

namespace epidroid {

struct ClusterDigest {
  ClusterId id = -1;
  std::string activity;
  std::string page_hint;
  std::optional<std::string> summary;
  std::vector<ClusterId> successors;
  std::vector<MseId> mses;
};

/// Simulator state snapshot: page id plus variable values by name. Only the
/// guided-mutation task carries it.
struct StateSnapshot {
  std::string page;
  std::vector<std::pair<std::string, std::string>> values;
};

struct ReasonerContext {
  std::string session;
  ClusterId focal_cluster = -1;
  std::optional<ViewNode> focal_tree;  // denoised representative
  std::vector<ClusterDigest> clusters;
  std::optional<ViewNode> current_tree;
  std::optional<StateSnapshot> state;
};

struct FragmentDigest {
  int id = -1;
  ClusterId entry = -1;
  ClusterId exit = -1;
  std::vector<ClusterId> cluster_path;
  std::size_t footprint = 0;
  ReplayStatus status = ReplayStatus::Stable;
  EventSequence events;  // events[i] fires in cluster_path[i]
};

FragmentDigest digest_of(const TestFragment& fragment);

struct PlannedReplay {
  int fragment_id = -1;  // -1: navigate-only entry
  ClusterId cluster = -1;
  std::size_t footprint = 0;
};

struct CompositePlan {
  MseId mse = -1;
  std::string widget_id;
  std::string target_value;
  ClusterId mutation_cluster = -1;
  EventSequence sigma_sea;
  std::vector<ClusterId> affected;
  std::vector<PlannedReplay> replays;  // descending footprint
  std::string rationale;
};

struct MutationGoal {
  MseId mse = -1;
  std::string widget_id;
  ClusterId cluster = -1;
  std::string page_hint;
  std::string target_value;
};

struct GuideResult {
  enum class Kind { Step, Satisfied, Unreachable };
  Kind kind = Kind::Unreachable;
  std::optional<Event> event;
};

/// The semantic brain behind Stage 2/3 decisions.
class Reasoner {
 public:
  virtual ~Reasoner() = default;

  virtual std::string summarize_cluster(const ReasonerContext& context) = 0;
  virtual Validation validate_mse(const MseRecord& record, const ReasonerContext& context) = 0;
  virtual ImpactScope classify_scope(const MseRecord& record, const ReasonerContext& context) = 0;
  virtual std::vector<ClusterId> infer_impact(const MseRecord& record, const std::string& target,
                                              const ReasonerContext& context) = 0;
  virtual CompositePlan plan_composite(const MseRecord& record, const std::string& target,
                                       const std::vector<ClusterId>& affected,
                                       const std::vector<FragmentDigest>& fragments,
                                       const ReasonerContext& context) = 0;
  virtual GuideResult guide_mutation(const MutationGoal& goal, const ReasonerContext& context) = 0;
};

/// Scores how relevant a fragment's replay from `cluster` is to a mutation.
using FragmentRelevance = std::function<int(const FragmentDigest& fragment, ClusterId cluster)>;

/// Per affected cluster, the best fragment through it (highest relevance when
/// a scorer is given, then stable first, highest footprint, lowest id);
/// navigate-only when none exists.
CompositePlan default_plan(const MseRecord& record, const std::string& target,
                           const std::vector<ClusterId>& affected, const std::vector<FragmentDigest>& fragments,
                           const FragmentRelevance& relevance = {});

/// Plan with navigate-only entries for every affected cluster.
CompositePlan navigate_only_plan(const MseRecord& record, const std::string& target,
                                 const std::vector<ClusterId>& affected);

/// Empty when the plan satisfies its invariants; otherwise the violation.
std::optional<std::string> check_plan(const CompositePlan& plan, const MseRecord& record,
                                      const std::vector<FragmentDigest>& fragments, const SemanticUtg& utg);

// Wire codec shared by the remote client, transcripts and test servers.
std::string_view to_string(GuideResult::Kind kind);
nlohmann::json to_json(const MseRecord& record);
MseRecord mse_record_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ReasonerContext& context);
ReasonerContext context_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const FragmentDigest& digest);
FragmentDigest fragment_digest_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const CompositePlan& plan);
CompositePlan plan_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const MutationGoal& goal);
MutationGoal goal_from_json(const nlohmann::json& doc);

/// Serves one wire request with a typed backend: decodes the task's
/// arguments, calls the backend and encodes `{"ok":true,"result":...}`.
nlohmann::json serve_request(Reasoner& backend, const nlohmann::json& request);

}  // namespace epidroid
