#include "epidroid/device.hpp"

namespace epidroid {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RunContext::RunContext(std::shared_ptr<const AppModel> model_in, double threshold, std::uint64_t seed)
    : model(std::move(model_in)),
      clusters(threshold),
      monitor(model->total_branches(), model->activities()),
      base_seed(seed) {}

Device::Device(RunContext& ctx) : ctx_(ctx) { reset(); }

void Device::reset() {
  session_ = std::make_unique<Session>(ctx_.model, ctx_.next_session_seed());
  history_.clear();
  last_tree_in_.clear();
  last_index_in_.clear();
  ++reset_count_;
  pending_reset_mark_ = true;
  observe();
  if (ctx_.entry_cluster < 0) ctx_.entry_cluster = cluster_;
  ctx_.monitor.visit_activity(session_->activity());
  last_tree_in_[cluster_] = tree_;
  last_index_in_[cluster_] = 0;
}

void Device::observe() {
  tree_ = session_->observe_view_tree();
  AbstractState state = make_abstract_state(tree_, session_->activity());
  signature_ = state.signature;
  cluster_ = ctx_.clusters.assign(state);
  ctx_.utg.register_cluster(cluster_);
  ctx_.seen_signatures.insert(signature_);
}

void Device::set_budget(std::optional<std::uint64_t> limit) {
  limit_ = limit;
  used_ = 0;
}

std::optional<DeviceStep> Device::step(const Event& event) {
  if (!budget_left()) throw BudgetExhausted();
  const Signature pre_signature = signature_;
  const ClusterId pre_cluster = cluster_;
  ViewNode pre_tree = tree_;

  auto result = session_->try_execute(event);
  if (!result) return std::nullopt;
  ++used_;
  ++events_;

  tree_ = std::move(result->tree);
  AbstractState state = make_abstract_state(tree_, session_->activity());
  signature_ = state.signature;
  cluster_ = ctx_.clusters.assign(state);
  ctx_.utg.register_cluster(cluster_);
  ctx_.utg.upsert_transition(pre_cluster, event, cluster_);

  DeviceStep out;
  out.new_state = ctx_.seen_signatures.insert(signature_).second;
  out.transitioned = result->transitioned;
  out.diverted = result->diverted;
  out.global_gain = ctx_.monitor.record_event(result->coverage_delta, session_->activity());
  out.step.index = trace_ ? trace_->steps.size() : 0;
  out.step.pre_signature = pre_signature;
  out.step.event = event;
  out.step.post_signature = signature_;
  out.step.coverage_delta = std::move(result->coverage_delta);
  out.step.pre_cluster = pre_cluster;
  out.step.post_cluster = cluster_;
  out.step.reset_before = pending_reset_mark_;
  pending_reset_mark_ = false;

  history_.push_back(event);
  if (ctx_.track_mses) track_mses(pre_tree, event, pre_cluster);
  last_tree_in_[cluster_] = tree_;
  last_index_in_[cluster_] = history_.size();

  if (trace_) trace_->steps.push_back(out.step);
  return out;
}

void Device::track_mses(const ViewNode& pre_tree, const Event& event, ClusterId pre_cluster) {
  std::vector<MseObservation> observations;
  EventSequence sigma;
  if (pre_cluster == cluster_) {
    observations = detect_candidates(pre_tree, event, tree_, cluster_);
    sigma = {event};
  } else if (auto it = last_tree_in_.find(cluster_); it != last_tree_in_.end()) {
    // Returning to a cluster: values changed while away were set by the
    // events executed since leaving it.
    observations = detect_candidates(it->second, event, tree_, cluster_);
    std::size_t from = last_index_in_[cluster_];
    sigma.assign(history_.begin() + static_cast<std::ptrdiff_t>(from), history_.end());
  }
  for (auto& obs : observations) {
    obs.position = ctx_.monitor.events();
    auto outcome = ctx_.mses.record_observation(obs, sigma);
    if (outcome.accepted) ctx_.utg.annotate_mse(cluster_, outcome.id);
  }
}

}  // namespace epidroid
