#include "epidroid/wire_reasoner.hpp"

#include <httplib.h>

namespace epidroid {

using nlohmann::json;

json WireReasoner::make_request(const std::string& task, json context) const {
  return json{{"task", task}, {"session", session_}, {"context", std::move(context)}};
}

void WireReasoner::degrade(const std::string& task, const std::string& why) {
  degradations_.push_back(task + ": " + why);
}

std::optional<json> WireReasoner::call(const std::string& task, json context) {
  auto reply = exchange(make_request(task, std::move(context)));
  if (!reply) {
    degrade(task, "no reply");
    return std::nullopt;
  }
  if (!reply->is_object() || !reply->value("ok", false) || !reply->contains("result")) {
    degrade(task, "error reply");
    return std::nullopt;
  }
  return reply->at("result");
}

std::string WireReasoner::summarize_cluster(const ReasonerContext& context) {
  const std::string fallback = "unsummarized cluster " + std::to_string(context.focal_cluster);
  auto result = call("summarize", to_json(context));
  if (!result) return fallback;
  auto it = result->find("summary");
  if (it == result->end() || !it->is_string() || it->get<std::string>().empty()) {
    degrade("summarize", "empty summary");
    return fallback;
  }
  return it->get<std::string>();
}

Validation WireReasoner::validate_mse(const MseRecord& record, const ReasonerContext& context) {
  json ctx = to_json(context);
  ctx["mse"] = to_json(record);
  auto result = call("validate_mse", std::move(ctx));
  if (result && result->contains("verdict") && result->at("verdict").is_string()) {
    auto verdict = parse_validation(result->at("verdict").get<std::string>());
    if (verdict && *verdict != Validation::Pending) return *verdict;
  }
  if (result) degrade("validate_mse", "malformed verdict");
  return Validation::Noise;
}

ImpactScope WireReasoner::classify_scope(const MseRecord& record, const ReasonerContext& context) {
  json ctx = to_json(context);
  ctx["mse"] = to_json(record);
  auto result = call("classify_scope", std::move(ctx));
  if (result && result->contains("scope") && result->at("scope").is_string()) {
    auto scope = parse_scope(result->at("scope").get<std::string>());
    if (scope && *scope != ImpactScope::Unknown) return *scope;
  }
  if (result) degrade("classify_scope", "malformed scope");
  return ImpactScope::IntraPage;
}

std::vector<ClusterId> WireReasoner::infer_impact(const MseRecord& record, const std::string& target,
                                                  const ReasonerContext& context) {
  json ctx = to_json(context);
  ctx["mse"] = to_json(record);
  ctx["target"] = target;
  auto result = call("infer_impact", std::move(ctx));
  if (result) {
    try {
      auto affected = result->at("affected").get<std::vector<ClusterId>>();
      if (!affected.empty()) return affected;
      degrade("infer_impact", "empty impact set");
    } catch (const std::exception& e) {
      degrade("infer_impact", e.what());
    }
  }
  return {record.cluster};
}

CompositePlan WireReasoner::plan_composite(const MseRecord& record, const std::string& target,
                                           const std::vector<ClusterId>& affected,
                                           const std::vector<FragmentDigest>& fragments,
                                           const ReasonerContext& context) {
  json ctx = to_json(context);
  ctx["mse"] = to_json(record);
  ctx["target"] = target;
  ctx["affected"] = affected;
  json digests = json::array();
  for (const auto& f : fragments) digests.push_back(to_json(f));
  ctx["fragments"] = std::move(digests);
  auto result = call("plan_composite", std::move(ctx));
  if (result) {
    try {
      CompositePlan plan = plan_from_json(*result);
      // Identity fields always come from the engine's own record.
      CompositePlan base = navigate_only_plan(record, target, affected);
      plan.mse = base.mse;
      plan.widget_id = base.widget_id;
      plan.target_value = base.target_value;
      plan.mutation_cluster = base.mutation_cluster;
      plan.sigma_sea = base.sigma_sea;
      plan.affected = base.affected;
      return plan;
    } catch (const std::exception& e) {
      degrade("plan_composite", e.what());
    }
  }
  return navigate_only_plan(record, target, affected);
}

GuideResult WireReasoner::guide_mutation(const MutationGoal& goal, const ReasonerContext& context) {
  json ctx = to_json(context);
  ctx["goal"] = to_json(goal);
  auto result = call("guide_mutation", std::move(ctx));
  if (result) {
    try {
      const std::string status = result->at("status").get<std::string>();
      if (status == "satisfied") return GuideResult{GuideResult::Kind::Satisfied, std::nullopt};
      if (status == "step") return GuideResult{GuideResult::Kind::Step, event_from_json(result->at("event"))};
      if (status == "unreachable") return GuideResult{GuideResult::Kind::Unreachable, std::nullopt};
      degrade("guide_mutation", "unknown status '" + status + "'");
    } catch (const std::exception& e) {
      degrade("guide_mutation", e.what());
    }
  }
  return GuideResult{GuideResult::Kind::Unreachable, std::nullopt};
}

RemoteReasoner::RemoteReasoner(RemoteConfig config, std::string session_id)
    : WireReasoner(std::move(session_id)), config_(std::move(config)) {
  scheme_host_port_ = config_.endpoint;
  while (!scheme_host_port_.empty() && scheme_host_port_.back() == '/') scheme_host_port_.pop_back();
}

std::optional<json> RemoteReasoner::exchange(const json& request) {
  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);
  const std::string body = request.dump();
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    ++requests_sent_;
    auto res = client.Post("/v1/reason", headers, body, "application/json");
    if (!res || res->status != 200) continue;
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) continue;
    return std::optional<json>(std::in_place, std::move(reply));
  }
  return std::nullopt;
}

RecordingReasoner::RecordingReasoner(Reasoner& inner, const std::filesystem::path& transcript,
                                     std::string session_id)
    : WireReasoner(std::move(session_id)), inner_(inner), out_(transcript) {
  if (!out_) throw std::runtime_error("cannot write transcript " + transcript.string());
}

std::optional<json> RecordingReasoner::exchange(const json& request) {
  json reply = serve_request(inner_, request);
  out_ << json{{"request", request}, {"reply", reply}}.dump() << '\n';
  out_.flush();
  return std::optional<json>(std::in_place, std::move(reply));
}

TranscriptReasoner::TranscriptReasoner(const std::filesystem::path& transcript, std::string session_id)
    : WireReasoner(std::move(session_id)) {
  std::ifstream in(transcript);
  if (!in) throw std::runtime_error("cannot read transcript " + transcript.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json pair = json::parse(line);
    pairs_.emplace_back(pair.at("request"), pair.at("reply"));
  }
}

std::optional<json> TranscriptReasoner::exchange(const json& request) {
  if (next_ >= pairs_.size()) throw TranscriptMismatch("transcript exhausted at request " + std::to_string(next_));
  const auto& [recorded, reply] = pairs_[next_];
  if (recorded != request) {
    throw TranscriptMismatch("request " + std::to_string(next_) + " differs from the transcript (task '" +
                             request.value("task", "") + "')");
  }
  ++next_;
  return std::optional<json>(std::in_place, reply);
}

}  // namespace epidroid
