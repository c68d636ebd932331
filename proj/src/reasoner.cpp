#include "epidroid/reasoner.hpp"

#include "epidroid/trace.hpp"

#include <algorithm>
#include <stdexcept>

namespace epidroid {

using nlohmann::json;

FragmentDigest digest_of(const TestFragment& fragment) {
  return FragmentDigest{fragment.id, fragment.entry_cluster(), fragment.exit_cluster(), fragment.cluster_path,
                        fragment.footprint.size(), fragment.status, fragment.events};
}

namespace {

bool passes_through(const FragmentDigest& f, ClusterId cluster) {
  return std::find(f.cluster_path.begin(), f.cluster_path.end(), cluster) != f.cluster_path.end();
}

CompositePlan plan_skeleton(const MseRecord& record, const std::string& target,
                            const std::vector<ClusterId>& affected) {
  CompositePlan plan;
  plan.mse = record.id;
  plan.widget_id = record.widget_id;
  plan.target_value = target;
  plan.mutation_cluster = record.cluster;
  plan.sigma_sea = record.sigma_sea;
  plan.affected = affected;
  return plan;
}

void sort_replays(CompositePlan& plan) {
  std::stable_sort(plan.replays.begin(), plan.replays.end(), [](const PlannedReplay& a, const PlannedReplay& b) {
    return a.footprint > b.footprint;
  });
}


}  // namespace

CompositePlan default_plan(const MseRecord& record, const std::string& target,
                           const std::vector<ClusterId>& affected, const std::vector<FragmentDigest>& fragments,
                           const FragmentRelevance& relevance) {
  CompositePlan plan = plan_skeleton(record, target, affected);
  for (ClusterId cluster : affected) {
    const FragmentDigest* best = nullptr;
    int best_score = 0;
    for (const auto& f : fragments) {
      if (!passes_through(f, cluster)) continue;
      const int score = relevance ? relevance(f, cluster) : 0;
      if (!best || score > best_score) {
        best = &f;
        best_score = score;
        continue;
      }
      if (score < best_score) continue;
      const bool fs = f.status == ReplayStatus::Stable;
      const bool bs = best->status == ReplayStatus::Stable;
      if (fs != bs) {
        if (fs) best = &f;
      } else if (f.footprint != best->footprint) {
        if (f.footprint > best->footprint) best = &f;
      } else if (f.id < best->id) {
        best = &f;
      }
    }
    if (best) {
      plan.replays.push_back(PlannedReplay{best->id, cluster, best->footprint});
    } else {
      plan.replays.push_back(PlannedReplay{-1, cluster, 0});
    }
  }
  sort_replays(plan);
  plan.rationale = "mutate '" + record.widget_id + "' to " + target + ", then revisit " +
                   std::to_string(affected.size()) + " affected cluster(s)";
  return plan;
}

CompositePlan navigate_only_plan(const MseRecord& record, const std::string& target,
                                 const std::vector<ClusterId>& affected) {
  CompositePlan plan = plan_skeleton(record, target, affected);
  for (ClusterId cluster : affected) plan.replays.push_back(PlannedReplay{-1, cluster, 0});
  plan.rationale = "navigate-only plan";
  return plan;
}

std::optional<std::string> check_plan(const CompositePlan& plan, const MseRecord& record,
                                      const std::vector<FragmentDigest>& fragments, const SemanticUtg& utg) {
  std::set<ClusterId> allowed;
  for (ClusterId c : plan.affected) {
    if (!utg.has_cluster(c)) return "affected cluster " + std::to_string(c) + " is unknown";
    auto reach = utg.reachable_from(c);
    allowed.insert(reach.begin(), reach.end());
  }
  for (const auto& replay : plan.replays) {
    if (!allowed.count(replay.cluster)) {
      return "replay cluster " + std::to_string(replay.cluster) + " outside the affected region";
    }
    if (replay.fragment_id < 0) continue;
    auto it = std::find_if(fragments.begin(), fragments.end(),
                           [&](const FragmentDigest& f) { return f.id == replay.fragment_id; });
    if (it == fragments.end()) return "unknown fragment " + std::to_string(replay.fragment_id);
    if (!passes_through(*it, replay.cluster)) {
      return "fragment " + std::to_string(replay.fragment_id) + " never enters cluster " +
             std::to_string(replay.cluster);
    }
  }
  auto unvisited = unvisited_values(record);
  const bool untried_unvisited = std::any_of(unvisited.begin(), unvisited.end(), [&](const std::string& v) {
    return v == plan.target_value ||
           std::find(record.tried_targets.begin(), record.tried_targets.end(), v) == record.tried_targets.end();
  });
  if (untried_unvisited &&
      std::find(unvisited.begin(), unvisited.end(), plan.target_value) == unvisited.end()) {
    return "target '" + plan.target_value + "' chosen while unvisited values remain";
  }
  return std::nullopt;
}

std::string_view to_string(GuideResult::Kind kind) {
  switch (kind) {
    case GuideResult::Kind::Step:
      return "step";
    case GuideResult::Kind::Satisfied:
      return "satisfied";
    case GuideResult::Kind::Unreachable:
      return "unreachable";
  }
  return "unreachable";
}

json to_json(const MseRecord& record) {
  json sigma = json::array();
  for (const auto& e : record.sigma_sea) sigma.push_back(event_to_json(e));
  json history = json::array();
  for (const auto& obs : record.history) {
    history.push_back(json{{"before", obs.before},
                           {"after", obs.after},
                           {"event", event_to_json(obs.trigger)},
                           {"position", obs.position}});
  }
  return json{{"mse_id", record.id},
              {"widget_id", record.widget_id},
              {"cluster_id", record.cluster},
              {"kind", std::string(to_string(record.kind))},
              {"domain", record.domain},
              {"observed_values", record.observed_values},
              {"unvisited_values", unvisited_values(record)},
              {"sigma_sea", std::move(sigma)},
              {"scope", std::string(to_string(record.scope))},
              {"validated", std::string(to_string(record.validated))},
              {"mismatch_count", record.mismatch_count},
              {"priority_rank", record.priority_rank},
              {"tried_targets", record.tried_targets},
              {"history", std::move(history)}};
}

MseRecord mse_record_from_json(const json& doc) {
  MseRecord record;
  record.id = doc.at("mse_id").get<MseId>();
  record.widget_id = doc.at("widget_id").get<std::string>();
  record.cluster = doc.at("cluster_id").get<ClusterId>();
  auto kind = parse_mse_kind(doc.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("unknown mse kind");
  record.kind = *kind;
  record.domain = doc.at("domain").get<std::vector<std::string>>();
  record.observed_values = doc.at("observed_values").get<std::vector<std::string>>();
  for (const auto& e : doc.at("sigma_sea")) record.sigma_sea.push_back(event_from_json(e));
  record.scope = parse_scope(doc.value("scope", "unknown")).value_or(ImpactScope::Unknown);
  record.validated = parse_validation(doc.value("validated", "pending")).value_or(Validation::Pending);
  record.mismatch_count = doc.value("mismatch_count", 0);
  record.priority_rank = doc.value("priority_rank", 0);
  if (doc.contains("tried_targets")) record.tried_targets = doc.at("tried_targets").get<std::vector<std::string>>();
  if (doc.contains("history")) {
    for (const auto& h : doc.at("history")) {
      MseObservation obs;
      obs.mse_id = record.id;
      obs.cluster = record.cluster;
      obs.widget_id = record.widget_id;
      obs.kind = record.kind;
      obs.domain = record.domain;
      obs.before = h.at("before").get<std::string>();
      obs.after = h.at("after").get<std::string>();
      obs.trigger = event_from_json(h.at("event"));
      obs.position = h.value("position", std::size_t{0});
      record.history.push_back(std::move(obs));
    }
  }
  return record;
}

json to_json(const ReasonerContext& context) {
  json clusters = json::array();
  for (const auto& c : context.clusters) {
    json digest{{"id", c.id}, {"activity", c.activity}, {"page_hint", c.page_hint},
                {"successors", c.successors}, {"mses", c.mses}};
    digest["summary"] = c.summary ? json(*c.summary) : json(nullptr);
    clusters.push_back(std::move(digest));
  }
  json doc{{"focal_cluster", context.focal_cluster}, {"clusters", std::move(clusters)}};
  doc["focal_tree"] = context.focal_tree ? view_node_to_json(*context.focal_tree) : json(nullptr);
  doc["current_tree"] = context.current_tree ? view_node_to_json(*context.current_tree) : json(nullptr);
  if (context.state) {
    json values = json::object();
    for (const auto& [name, value] : context.state->values) values[name] = value;
    doc["state"] = json{{"page", context.state->page}, {"values", std::move(values)}};
  } else {
    doc["state"] = nullptr;
  }
  return doc;
}

ReasonerContext context_from_json(const json& doc) {
  ReasonerContext context;
  context.focal_cluster = doc.value("focal_cluster", -1);
  if (doc.contains("clusters")) {
    for (const auto& c : doc.at("clusters")) {
      ClusterDigest digest;
      digest.id = c.at("id").get<ClusterId>();
      digest.activity = c.value("activity", "");
      digest.page_hint = c.value("page_hint", "");
      if (c.contains("summary") && !c.at("summary").is_null()) digest.summary = c.at("summary").get<std::string>();
      if (c.contains("successors")) digest.successors = c.at("successors").get<std::vector<ClusterId>>();
      if (c.contains("mses")) digest.mses = c.at("mses").get<std::vector<MseId>>();
      context.clusters.push_back(std::move(digest));
    }
  }
  if (doc.contains("focal_tree") && !doc.at("focal_tree").is_null()) {
    context.focal_tree = view_node_from_json(doc.at("focal_tree"));
  }
  if (doc.contains("current_tree") && !doc.at("current_tree").is_null()) {
    context.current_tree = view_node_from_json(doc.at("current_tree"));
  }
  if (doc.contains("state") && !doc.at("state").is_null()) {
    StateSnapshot state;
    state.page = doc.at("state").at("page").get<std::string>();
    for (const auto& [name, value] : doc.at("state").at("values").items()) {
      state.values.emplace_back(name, value.get<std::string>());
    }
    context.state = std::move(state);
  }
  return context;
}

json to_json(const FragmentDigest& digest) {
  json events_json = json::array();
  for (const auto& e : digest.events) events_json.push_back(event_to_json(e));
  return json{{"fragment_id", digest.id},
              {"entry_cluster", digest.entry},
              {"exit_cluster", digest.exit},
              {"cluster_path", digest.cluster_path},
              {"footprint", digest.footprint},
              {"replay_status", std::string(to_string(digest.status))},
              {"events", events_json}};
}

FragmentDigest fragment_digest_from_json(const json& doc) {
  FragmentDigest digest;
  digest.id = doc.at("fragment_id").get<int>();
  digest.entry = doc.at("entry_cluster").get<ClusterId>();
  digest.exit = doc.at("exit_cluster").get<ClusterId>();
  digest.cluster_path = doc.at("cluster_path").get<std::vector<ClusterId>>();
  digest.footprint = doc.at("footprint").get<std::size_t>();
  digest.status = doc.value("replay_status", "stable") == "truncated" ? ReplayStatus::Truncated : ReplayStatus::Stable;
  if (auto it = doc.find("events"); it != doc.end()) {
    for (const auto& e : *it) digest.events.push_back(event_from_json(e));
  }
  return digest;
}

json to_json(const CompositePlan& plan) {
  json replays = json::array();
  for (const auto& r : plan.replays) {
    replays.push_back(json{{"fragment_id", r.fragment_id}, {"cluster", r.cluster}, {"footprint", r.footprint}});
  }
  json sigma = json::array();
  for (const auto& e : plan.sigma_sea) sigma.push_back(event_to_json(e));
  return json{{"mse_id", plan.mse},
              {"widget_id", plan.widget_id},
              {"target_value", plan.target_value},
              {"mutation_cluster", plan.mutation_cluster},
              {"sigma_sea", std::move(sigma)},
              {"affected", plan.affected},
              {"replays", std::move(replays)},
              {"rationale", plan.rationale}};
}

CompositePlan plan_from_json(const json& doc) {
  CompositePlan plan;
  plan.mse = doc.value("mse_id", -1);
  plan.widget_id = doc.value("widget_id", "");
  plan.target_value = doc.value("target_value", "");
  plan.mutation_cluster = doc.value("mutation_cluster", -1);
  if (doc.contains("sigma_sea")) {
    for (const auto& e : doc.at("sigma_sea")) plan.sigma_sea.push_back(event_from_json(e));
  }
  if (doc.contains("affected")) plan.affected = doc.at("affected").get<std::vector<ClusterId>>();
  for (const auto& r : doc.at("replays")) {
    plan.replays.push_back(PlannedReplay{r.at("fragment_id").get<int>(), r.at("cluster").get<ClusterId>(),
                                         r.value("footprint", std::size_t{0})});
  }
  plan.rationale = doc.value("rationale", "");
  return plan;
}

json to_json(const MutationGoal& goal) {
  return json{{"mse_id", goal.mse},
              {"widget_id", goal.widget_id},
              {"cluster", goal.cluster},
              {"page_hint", goal.page_hint},
              {"target_value", goal.target_value}};
}

MutationGoal goal_from_json(const json& doc) {
  return MutationGoal{doc.at("mse_id").get<MseId>(), doc.at("widget_id").get<std::string>(),
                      doc.at("cluster").get<ClusterId>(), doc.at("page_hint").get<std::string>(),
                      doc.at("target_value").get<std::string>()};
}

json serve_request(Reasoner& backend, const json& request) {
  const std::string task = request.at("task").get<std::string>();
  const json& ctx_doc = request.at("context");
  ReasonerContext context = context_from_json(ctx_doc);
  context.session = request.value("session", "");
  json result;
  if (task == "summarize") {
    result["summary"] = backend.summarize_cluster(context);
  } else if (task == "validate_mse") {
    result["verdict"] = std::string(to_string(backend.validate_mse(mse_record_from_json(ctx_doc.at("mse")), context)));
  } else if (task == "classify_scope") {
    result["scope"] = std::string(to_string(backend.classify_scope(mse_record_from_json(ctx_doc.at("mse")), context)));
  } else if (task == "infer_impact") {
    result["affected"] = backend.infer_impact(mse_record_from_json(ctx_doc.at("mse")),
                                              ctx_doc.at("target").get<std::string>(), context);
  } else if (task == "plan_composite") {
    std::vector<FragmentDigest> fragments;
    for (const auto& f : ctx_doc.at("fragments")) fragments.push_back(fragment_digest_from_json(f));
    result = to_json(backend.plan_composite(mse_record_from_json(ctx_doc.at("mse")),
                                            ctx_doc.at("target").get<std::string>(),
                                            ctx_doc.at("affected").get<std::vector<ClusterId>>(), fragments, context));
  } else if (task == "guide_mutation") {
    auto guide = backend.guide_mutation(goal_from_json(ctx_doc.at("goal")), context);
    result["status"] = std::string(to_string(guide.kind));
    result["event"] = guide.event ? event_to_json(*guide.event) : json(nullptr);
  } else {
    return json{{"ok", false}, {"error", "unknown task '" + task + "'"}};
  }
  return json{{"ok", true}, {"result", std::move(result)}};
}

}  // namespace epidroid
