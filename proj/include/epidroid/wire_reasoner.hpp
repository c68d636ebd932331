#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "epidroid/reasoner.hpp"

namespace epidroid {

/// Typed reasoner over the JSON wire protocol. Subclasses provide the
/// transport; malformed or failed replies fall back to conservative answers.
class WireReasoner : public Reasoner {
 public:
  explicit WireReasoner(std::string session_id) : session_(std::move(session_id)) {}

  std::string summarize_cluster(const ReasonerContext& context) override;
  Validation validate_mse(const MseRecord& record, const ReasonerContext& context) override;
  ImpactScope classify_scope(const MseRecord& record, const ReasonerContext& context) override;
  std::vector<ClusterId> infer_impact(const MseRecord& record, const std::string& target,
                                      const ReasonerContext& context) override;
  CompositePlan plan_composite(const MseRecord& record, const std::string& target,
                               const std::vector<ClusterId>& affected, const std::vector<FragmentDigest>& fragments,
                               const ReasonerContext& context) override;
  GuideResult guide_mutation(const MutationGoal& goal, const ReasonerContext& context) override;

  /// Diagnostics for every degraded answer.
  const std::vector<std::string>& degradations() const { return degradations_; }

  nlohmann::json make_request(const std::string& task, nlohmann::json context) const;

 protected:
  /// Sends one request; std::nullopt on transport failure.
  virtual std::optional<nlohmann::json> exchange(const nlohmann::json& request) = 0;

 private:
  std::optional<nlohmann::json> call(const std::string& task, nlohmann::json context);
  void degrade(const std::string& task, const std::string& why);

  std::string session_;
  std::vector<std::string> degradations_;
};

struct RemoteConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080
  std::string token;     // bearer token, empty for none
  std::chrono::milliseconds timeout{20000};
  int max_retries = 2;
};

/// POST /v1/reason client with bounded timeout and retries.
class RemoteReasoner : public WireReasoner {
 public:
  RemoteReasoner(RemoteConfig config, std::string session_id);

  int requests_sent() const { return requests_sent_; }

 protected:
  std::optional<nlohmann::json> exchange(const nlohmann::json& request) override;

 private:
  RemoteConfig config_;
  std::string scheme_host_port_;
  int requests_sent_ = 0;
};

/// Answers with an inner backend and appends every request/reply pair to a
/// JSON Lines transcript.
class RecordingReasoner : public WireReasoner {
 public:
  RecordingReasoner(Reasoner& inner, const std::filesystem::path& transcript, std::string session_id);

 protected:
  std::optional<nlohmann::json> exchange(const nlohmann::json& request) override;

 private:
  Reasoner& inner_;
  std::ofstream out_;
};

class TranscriptMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Replays a recorded transcript; each request must equal the recorded one.
class TranscriptReasoner : public WireReasoner {
 public:
  TranscriptReasoner(const std::filesystem::path& transcript, std::string session_id);

  std::size_t remaining() const { return pairs_.size() - next_; }

 protected:
  std::optional<nlohmann::json> exchange(const nlohmann::json& request) override;

 private:
  std::vector<std::pair<nlohmann::json, nlohmann::json>> pairs_;
  std::size_t next_ = 0;
};

}  // namespace epidroid
