#include "epidroid/abstraction.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace epidroid {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t& h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
}

void fnv_mix(std::uint64_t& h, std::int64_t value) {
  for (int i = 0; i < 8; ++i) {
    h ^= static_cast<unsigned char>((value >> (8 * i)) & 0xff);
    h *= kFnvPrime;
  }
}

void hash_tree(const ViewNode& node, std::uint64_t& h) {
  fnv_mix(h, to_string(node.kind));
  fnv_mix(h, "\x1f");
  fnv_mix(h, node.widget_id);
  fnv_mix(h, static_cast<std::int64_t>(node.depth));
  fnv_mix(h, "(");
  for (const auto& child : node.children) hash_tree(child, h);
  fnv_mix(h, ")");
}

std::uint64_t node_hash(const ViewNode& node) {
  std::uint64_t h = kFnvOffset;
  fnv_mix(h, to_string(node.kind));
  fnv_mix(h, "\x1f");
  fnv_mix(h, node.widget_id);
  fnv_mix(h, static_cast<std::int64_t>(node.depth));
  return h;
}

void collect_bag(const ViewNode& node, NodeBag& out) {
  out.push_back(node_hash(node));
  for (const auto& child : node.children) collect_bag(child, out);
}

}  // namespace

ViewNode abstract_view_tree(const ViewNode& tree) {
  ViewNode out;
  out.widget_id = tree.widget_id;
  out.kind = tree.kind;
  out.depth = tree.depth;
  out.children.reserve(tree.children.size());
  for (const auto& child : tree.children) out.children.push_back(abstract_view_tree(child));
  return out;
}

Signature signature_of(const ViewNode& abstract_tree) {
  std::uint64_t h = kFnvOffset;
  hash_tree(abstract_tree, h);
  return h;
}

std::string format_signature(Signature sig) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(sig));
  return buf;
}

std::optional<Signature> parse_signature(std::string_view text) {
  Signature value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value, 16);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

NodeBag node_bag(const ViewNode& tree) {
  NodeBag bag;
  collect_bag(tree, bag);
  std::sort(bag.begin(), bag.end());
  return bag;
}

double dice_similarity(const NodeBag& a, const NodeBag& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return 2.0 * static_cast<double>(common) / static_cast<double>(a.size() + b.size());
}

double dice_similarity(const ViewNode& a, const ViewNode& b) {
  return dice_similarity(node_bag(a), node_bag(b));
}

AbstractState make_abstract_state(const ViewNode& concrete, std::string activity_name) {
  AbstractState state;
  state.activity_name = std::move(activity_name);
  state.signature = signature_of(abstract_view_tree(concrete));
  state.tree = std::make_shared<const ViewNode>(concrete);
  return state;
}

ClusterId ClusterRegistry::assign(const AbstractState& state) {
  if (auto it = by_signature_.find(state.signature); it != by_signature_.end()) return it->second;

  ViewNode abstract = abstract_view_tree(*state.tree);
  NodeBag bag = node_bag(abstract);
  ClusterId best = -1;
  double best_score = -1.0;
  for (const auto& cluster : clusters_) {
    double score = dice_similarity(bag, cluster.bag);
    if (score > best_score) {
      best_score = score;
      best = cluster.id;
    }
  }
  if (best >= 0 && best_score >= threshold_) {
    clusters_[static_cast<std::size_t>(best)].members.push_back(state.signature);
    by_signature_.emplace(state.signature, best);
    return best;
  }

  PageCluster cluster;
  cluster.id = static_cast<ClusterId>(clusters_.size());
  cluster.activity = state.activity_name;
  cluster.page_hint = state.tree->widget_id;
  cluster.representative = std::move(abstract);
  cluster.concrete_representative = state.tree;
  cluster.bag = std::move(bag);
  cluster.members.push_back(state.signature);
  by_signature_.emplace(state.signature, cluster.id);
  clusters_.push_back(std::move(cluster));
  return clusters_.back().id;
}

std::optional<ClusterId> ClusterRegistry::cluster_of(Signature sig) const {
  auto it = by_signature_.find(sig);
  if (it == by_signature_.end()) return std::nullopt;
  return it->second;
}

ClusterRegistry ClusterRegistry::restore(double threshold, std::vector<PageCluster> clusters) {
  ClusterRegistry registry(threshold);
  for (auto& cluster : clusters) {
    cluster.bag = node_bag(cluster.representative);
    for (Signature sig : cluster.members) registry.by_signature_.emplace(sig, cluster.id);
    registry.clusters_.push_back(std::move(cluster));
  }
  return registry;
}

ClusterId assign_cluster(const AbstractState& state, ClusterRegistry& clusters) {
  return clusters.assign(state);
}

}  // namespace epidroid
