#include "epidroid/trace.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace epidroid {

using nlohmann::json;

bool trace_chained(const Trace& trace) {
  for (std::size_t i = 1; i < trace.steps.size(); ++i) {
    const auto& prev = trace.steps[i - 1];
    const auto& cur = trace.steps[i];
    if (cur.reset_before) continue;
    if (prev.post_signature != cur.pre_signature || prev.post_cluster != cur.pre_cluster) return false;
  }
  return true;
}

json event_to_json(const Event& event) {
  json doc{{"widget", event.widget}, {"kind", std::string(to_string(event.kind))}};
  doc["text"] = event.text ? json(*event.text) : json(nullptr);
  return doc;
}

Event event_from_json(const json& doc) {
  Event event;
  event.widget = doc.at("widget").get<std::string>();
  auto kind = parse_event_kind(doc.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("unknown event kind '" + doc.at("kind").get<std::string>() + "'");
  event.kind = *kind;
  if (doc.contains("text") && !doc.at("text").is_null()) event.text = doc.at("text").get<std::string>();
  return event;
}

json view_node_to_json(const ViewNode& node) {
  json doc{{"id", node.widget_id}, {"kind", std::string(to_string(node.kind))}, {"depth", node.depth}};
  const auto& a = node.attributes;
  if (a.checked) doc["checked"] = *a.checked;
  if (a.selected) doc["selected"] = *a.selected;
  if (a.text) doc["text"] = *a.text;
  if (a.expanded) doc["expanded"] = *a.expanded;
  if (a.item_count) doc["item_count"] = *a.item_count;
  if (!a.options.empty()) doc["options"] = a.options;
  if (!node.children.empty()) {
    json children = json::array();
    for (const auto& child : node.children) children.push_back(view_node_to_json(child));
    doc["children"] = std::move(children);
  }
  return doc;
}

ViewNode view_node_from_json(const json& doc) {
  ViewNode node;
  node.widget_id = doc.at("id").get<std::string>();
  auto kind = parse_widget_kind(doc.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("unknown widget kind '" + doc.at("kind").get<std::string>() + "'");
  node.kind = *kind;
  node.depth = doc.value("depth", 0);
  auto& a = node.attributes;
  if (doc.contains("checked")) a.checked = doc.at("checked").get<bool>();
  if (doc.contains("selected")) a.selected = doc.at("selected").get<std::string>();
  if (doc.contains("text")) a.text = doc.at("text").get<std::string>();
  if (doc.contains("expanded")) a.expanded = doc.at("expanded").get<bool>();
  if (doc.contains("item_count")) a.item_count = doc.at("item_count").get<int>();
  if (doc.contains("options")) a.options = doc.at("options").get<std::vector<std::string>>();
  if (doc.contains("children")) {
    for (const auto& child : doc.at("children")) node.children.push_back(view_node_from_json(child));
  }
  return node;
}

void write_trace_jsonl(const Trace& trace, const AppModel& model, std::ostream& out) {
  for (const auto& step : trace.steps) {
    json cov = json::array();
    for (LabelId label : step.coverage_delta) cov.push_back(model.label_name(label));
    json record{{"i", step.index},
                {"pre", format_signature(step.pre_signature)},
                {"event", event_to_json(step.event)},
                {"post", format_signature(step.post_signature)},
                {"cov", std::move(cov)},
                {"pre_c", step.pre_cluster},
                {"post_c", step.post_cluster}};
    if (step.reset_before) record["reset"] = true;
    out << record.dump() << '\n';
  }
}

Trace read_trace_jsonl(std::istream& in, const AppModel& model, std::string origin, std::uint64_t seed) {
  Trace trace;
  trace.origin = std::move(origin);
  trace.seed = seed;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json record = json::parse(line);
      TraceStep step;
      step.index = record.at("i").get<std::size_t>();
      auto pre = parse_signature(record.at("pre").get<std::string>());
      auto post = parse_signature(record.at("post").get<std::string>());
      if (!pre || !post) throw std::runtime_error("malformed signature");
      step.pre_signature = *pre;
      step.post_signature = *post;
      step.event = event_from_json(record.at("event"));
      for (const auto& name : record.at("cov")) {
        auto label = model.find_label(name.get<std::string>());
        if (!label) throw std::runtime_error("unknown label '" + name.get<std::string>() + "'");
        step.coverage_delta.push_back(*label);
      }
      step.pre_cluster = record.at("pre_c").get<ClusterId>();
      step.post_cluster = record.at("post_c").get<ClusterId>();
      step.reset_before = record.value("reset", false);
      trace.steps.push_back(std::move(step));
    } catch (const std::exception& e) {
      throw std::runtime_error("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return trace;
}

void save_trace(const Trace& trace, const AppModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_trace_jsonl(trace, model, out);
}

Trace load_trace(const std::filesystem::path& path, const AppModel& model) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_trace_jsonl(in, model, path.stem().string());
}

}  // namespace epidroid
