#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "epidroid/abstraction.hpp"
#include "epidroid/app_model.hpp"
#include "epidroid/view_tree.hpp"

namespace epidroid {

struct TraceStep {
  std::size_t index = 0;
  Signature pre_signature = 0;
  Event event;
  Signature post_signature = 0;
  std::vector<LabelId> coverage_delta;  // labels new to the episode
  ClusterId pre_cluster = -1;
  ClusterId post_cluster = -1;
  bool reset_before = false;  // the app was reset just before this step
};

struct Trace {
  std::string origin;
  std::uint64_t seed = 0;
  std::vector<TraceStep> steps;
};

/// Step i's post state equals step i+1's pre state, except across resets.
bool trace_chained(const Trace& trace);

nlohmann::json event_to_json(const Event& event);
Event event_from_json(const nlohmann::json& doc);
nlohmann::json view_node_to_json(const ViewNode& node);
ViewNode view_node_from_json(const nlohmann::json& doc);

/// JSON Lines: one record per step, labels by name.
void write_trace_jsonl(const Trace& trace, const AppModel& model, std::ostream& out);
Trace read_trace_jsonl(std::istream& in, const AppModel& model, std::string origin = "", std::uint64_t seed = 0);
void save_trace(const Trace& trace, const AppModel& model, const std::filesystem::path& path);
Trace load_trace(const std::filesystem::path& path, const AppModel& model);

}  // namespace epidroid
