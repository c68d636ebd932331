#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "epidroid/view_tree.hpp"

namespace epidroid {

using Signature = std::uint64_t;
using ClusterId = int;

inline constexpr double kDefaultClusterThreshold = 0.80;

/// Copy of `tree` with text, item counts, options and state-bearing booleans
/// erased. Kind, widget id and structure are preserved.
ViewNode abstract_view_tree(const ViewNode& tree);

/// Stable 64-bit FNV-1a hash of a content-free tree.
Signature signature_of(const ViewNode& abstract_tree);

std::string format_signature(Signature sig);
std::optional<Signature> parse_signature(std::string_view text);

/// Sorted multiset of per-node (kind, widget_id, depth) hashes.
using NodeBag = std::vector<std::uint64_t>;

NodeBag node_bag(const ViewNode& tree);

/// 2|A ∩ B| / (|A| + |B|) over multisets; two empty bags score 1.
double dice_similarity(const NodeBag& a, const NodeBag& b);
double dice_similarity(const ViewNode& a, const ViewNode& b);

/// Abstract GUI state: the content-free tree's signature plus the concrete
/// tree it was derived from.
struct AbstractState {
  std::string activity_name;
  Signature signature = 0;
  std::shared_ptr<const ViewNode> tree;  // concrete

  const std::string& page_id() const { return tree->widget_id; }
};

AbstractState make_abstract_state(const ViewNode& concrete, std::string activity_name);

struct PageCluster {
  ClusterId id = -1;
  std::string activity;
  std::string page_hint;  // root widget id of the representative
  ViewNode representative;  // content-free
  std::shared_ptr<const ViewNode> concrete_representative;
  NodeBag bag;
  std::vector<Signature> members;
  std::optional<std::string> summary;
};

/// Page clusters keyed by first-seen representative. Single writer.
class ClusterRegistry {
 public:
  explicit ClusterRegistry(double threshold = kDefaultClusterThreshold) : threshold_(threshold) {}

  /// Returns the best-matching cluster at or above the threshold (lowest id on
  /// ties), creating a new cluster when none qualifies.
  ClusterId assign(const AbstractState& state);

  std::optional<ClusterId> cluster_of(Signature sig) const;
  const PageCluster& at(ClusterId id) const { return clusters_.at(static_cast<std::size_t>(id)); }
  PageCluster& at(ClusterId id) { return clusters_.at(static_cast<std::size_t>(id)); }
  const std::vector<PageCluster>& clusters() const { return clusters_; }
  std::size_t size() const { return clusters_.size(); }
  double threshold() const { return threshold_; }

  /// Rebuilds a registry from persisted clusters (ids must be 0..n-1 in order).
  static ClusterRegistry restore(double threshold, std::vector<PageCluster> clusters);

 private:
  double threshold_;
  std::vector<PageCluster> clusters_;
  std::unordered_map<Signature, ClusterId> by_signature_;
};

/// Free-function form of ClusterRegistry::assign.
ClusterId assign_cluster(const AbstractState& state, ClusterRegistry& clusters);

}  // namespace epidroid
