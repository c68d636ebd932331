#include "epidroid/trace_store.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

namespace epidroid {

using nlohmann::json;

std::string_view to_string(ReplayStatus status) {
  switch (status) {
    case ReplayStatus::Unverified:
      return "unverified";
    case ReplayStatus::Stable:
      return "stable";
    case ReplayStatus::Truncated:
      return "truncated";
  }
  return "unknown";
}

std::string_view to_string(Recovery recovery) {
  switch (recovery) {
    case Recovery::None:
      return "none";
    case Recovery::Navigated:
      return "navigated";
    case Recovery::Skipped:
      return "skipped";
    case Recovery::Truncated:
      return "truncated";
  }
  return "unknown";
}

std::vector<LabelId> union_of_deltas(const TestFragment& fragment) {
  std::set<LabelId> labels;
  for (const auto& delta : fragment.step_deltas) labels.insert(delta.begin(), delta.end());
  return {labels.begin(), labels.end()};
}

namespace {

TestFragment open_slice(const TraceStep& first, int source_trace, std::size_t offset) {
  TestFragment slice;
  slice.source_trace = source_trace;
  slice.source_offset = offset;
  slice.cluster_path.push_back(first.pre_cluster);
  slice.signature_path.push_back(first.pre_signature);
  return slice;
}

void erase_steps(TestFragment& f, std::size_t first, std::size_t last) {
  // Removes events [first, last] and the states they led into.
  const auto b = static_cast<std::ptrdiff_t>(first);
  const auto e = static_cast<std::ptrdiff_t>(last + 1);
  f.events.erase(f.events.begin() + b, f.events.begin() + e);
  f.step_deltas.erase(f.step_deltas.begin() + b, f.step_deltas.begin() + e);
  f.cluster_path.erase(f.cluster_path.begin() + b + 1, f.cluster_path.begin() + e + 1);
  f.signature_path.erase(f.signature_path.begin() + b + 1, f.signature_path.begin() + e + 1);
}

void truncate_to(TestFragment& f, std::size_t length) {
  f.events.resize(length);
  f.step_deltas.resize(length);
  f.cluster_path.resize(length + 1);
  f.signature_path.resize(length + 1);
  f.nav_prefix = std::min(f.nav_prefix, length);
  f.footprint = union_of_deltas(f);
}

bool includes_all(const std::vector<LabelId>& haystack, const std::vector<LabelId>& needles) {
  return std::includes(haystack.begin(), haystack.end(), needles.begin(), needles.end());
}

}  // namespace

std::vector<TestFragment> slice_trace(const Trace& trace, ClusterId entry_cluster, const SliceConfig& config) {
  std::vector<TestFragment> slices;
  std::optional<TestFragment> current;
  auto close = [&] {
    if (current && !current->events.empty()) {
      current->footprint = union_of_deltas(*current);
      if (!current->footprint.empty()) slices.push_back(std::move(*current));
    }
    current.reset();
  };
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& step = trace.steps[i];
    if (step.reset_before) close();
    if (!current) current = open_slice(step, -1, i);
    current->events.push_back(step.event);
    current->step_deltas.push_back(step.coverage_delta);
    current->cluster_path.push_back(step.post_cluster);
    current->signature_path.push_back(step.post_signature);
    const bool reentered = config.cut_on_reentry && step.post_cluster == entry_cluster && step.pre_cluster != entry_cluster;
    if (reentered || current->events.size() >= config.cap) close();
  }
  close();
  return slices;
}

ReplayResult verify_replay(const TestFragment& fragment, Device& device,
                           std::vector<std::vector<LabelId>>* deltas) {
  device.reset();
  if (deltas) deltas->clear();
  ReplayResult result;
  auto diverged = [&](std::size_t index) {
    result.outcome = ReplayResult::Outcome::Diverged;
    result.divergence_index = index;
    return result;
  };
  if (device.cluster() != fragment.entry_cluster()) return diverged(0);
  std::optional<std::size_t> first_mismatch;
  for (std::size_t i = 0; i < fragment.events.size(); ++i) {
    auto step = device.step(fragment.events[i]);
    if (!step) return diverged(first_mismatch.value_or(i));
    if (deltas) deltas->push_back(step->step.coverage_delta);
    if (!first_mismatch && step->step.post_cluster != fragment.cluster_path[i + 1]) first_mismatch = i;
  }
  if (device.cluster() == fragment.exit_cluster()) return result;
  return diverged(first_mismatch.value_or(fragment.events.empty() ? 0 : fragment.events.size() - 1));
}

ReplayResult recover(Device& device, TestFragment& fragment, std::size_t divergence_index,
                     const SemanticUtg& utg) {
  constexpr std::size_t kMaxSkips = 2;
  device.reset();
  Recovery used = Recovery::None;
  std::vector<std::size_t> skipped;

  auto navigate_to = [&](ClusterId target) {
    if (device.cluster() == target) return true;
    if (!utg.has_cluster(device.cluster()) || !utg.has_cluster(target)) return false;
    auto path = utg.shortest_path(device.cluster(), target);
    if (!path) return false;
    for (const auto& event : *path) {
      if (!device.step(event)) return false;
    }
    return device.cluster() == target;
  };

  bool failed = false;
  for (std::size_t i = 0; i < fragment.events.size() && !failed; ++i) {
    const ClusterId expected = fragment.cluster_path[i];
    if (device.cluster() != expected && navigate_to(expected)) used = std::max(used, Recovery::Navigated);
    if (device.step(fragment.events[i])) continue;
    if (device.cluster() != expected && navigate_to(expected) && device.step(fragment.events[i])) {
      used = std::max(used, Recovery::Navigated);
      continue;
    }
    skipped.push_back(i);
    used = std::max(used, Recovery::Skipped);
    failed = skipped.size() > kMaxSkips;
  }

  ReplayResult result;
  if (!failed && device.cluster() == fragment.exit_cluster()) {
    result.recovery = used;
    for (auto it = skipped.rbegin(); it != skipped.rend(); ++it) erase_steps(fragment, *it, *it);
    if (!skipped.empty()) fragment.footprint = union_of_deltas(fragment);
    fragment.recovery = used;
    fragment.status = ReplayStatus::Stable;
    return result;
  }
  truncate_to(fragment, std::min(divergence_index, fragment.events.size()));
  fragment.status = ReplayStatus::Truncated;
  fragment.recovery = Recovery::Truncated;
  result.outcome = ReplayResult::Outcome::Diverged;
  result.divergence_index = divergence_index;
  result.recovery = Recovery::Truncated;
  return result;
}

TestFragment minimize_steps(const TestFragment& fragment) {
  TestFragment f = fragment;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < f.events.size() && !changed; ++i) {
      const Signature s = f.signature_path[i];
      if (s == 0) continue;
      std::optional<std::size_t> end;
      for (std::size_t j = i; j < f.events.size() && f.step_deltas[j].empty(); ++j) {
        if (f.signature_path[j + 1] == s) end = j;
      }
      if (end) {
        erase_steps(f, i, *end);
        changed = true;
      }
    }
  }
  while (f.events.size() > f.nav_prefix && f.step_deltas.back().empty()) {
    const std::size_t n = f.events.size();
    const Signature post = f.signature_path[n];
    auto begin = f.signature_path.begin();
    if (post == 0 || std::find(begin, begin + static_cast<std::ptrdiff_t>(n), post) == begin + static_cast<std::ptrdiff_t>(n)) {
      break;
    }
    erase_steps(f, n - 1, n - 1);
  }
  return f;
}

ReplayOracle device_replay_oracle(Device& device) {
  return [&device](const TestFragment& fragment) {
    ReplayCheck check;
    check.stable = verify_replay(fragment, device).stable();
    check.covered = device.session().covered_labels();
    return check;
  };
}

TestFragment eliminate_redundancy(const TestFragment& fragment, const ReplayOracle& oracle) {
  TestFragment candidate = minimize_steps(fragment);
  if (candidate.events == fragment.events) return fragment;
  ReplayCheck after = oracle(candidate);
  if (!after.stable) return fragment;
  ReplayCheck before = oracle(fragment);
  std::vector<LabelId> needed;
  std::set_intersection(before.covered.begin(), before.covered.end(), fragment.footprint.begin(),
                        fragment.footprint.end(), std::back_inserter(needed));
  if (!includes_all(after.covered, needed)) return fragment;
  candidate.status = ReplayStatus::Stable;
  return candidate;
}

double StabilizeReport::redundancy_ratio() const {
  if (steps_before == 0) return 0.0;
  return static_cast<double>(steps_before - steps_after) / static_cast<double>(steps_before);
}

namespace {

/// Replays `k` times; the first divergence index, or std::nullopt when every
/// replay was stable. Stable fragments get their step deltas from the replay,
/// so footprints describe what the fragment covers on its own rather than
/// what was new to the recorded episode.
std::optional<std::size_t> verify_all(TestFragment& fragment, Device& device, int k) {
  std::vector<std::vector<LabelId>> deltas;
  for (int i = 0; i < std::max(1, k); ++i) {
    auto r = verify_replay(fragment, device, i == 0 ? &deltas : nullptr);
    if (!r.stable()) return r.divergence_index.value_or(0);
  }
  fragment.step_deltas = std::move(deltas);
  fragment.footprint = union_of_deltas(fragment);
  return std::nullopt;
}

void recover_by_truncation(TestFragment& fragment, std::size_t divergence_index) {
  truncate_to(fragment, std::min(divergence_index, fragment.events.size()));
  fragment.status = ReplayStatus::Truncated;
  fragment.recovery = Recovery::Truncated;
}

}  // namespace

StabilizeReport stabilize(const std::vector<Trace>& traces, Device& device, const StabilizeConfig& config) {
  StabilizeReport report;
  RunContext& ctx = device.context();
  const std::uint64_t events_at_start = device.events();
  std::set<EventSequence> seen;

  for (std::size_t t = 0; t < traces.size(); ++t) {
    auto slices = slice_trace(traces[t], ctx.entry_cluster, config.slice);
    report.slices += slices.size();
    for (auto& slice : slices) {
      slice.source_trace = static_cast<int>(t);
      try {
        if (slice.entry_cluster() != ctx.entry_cluster) {
          auto route = ctx.utg.has_cluster(slice.entry_cluster())
                           ? ctx.utg.shortest_route(ctx.entry_cluster, slice.entry_cluster())
                           : std::nullopt;
          if (!route) {
            report.failures.push_back("trace " + std::to_string(t) + " offset " +
                                      std::to_string(slice.source_offset) + ": entry cluster unreachable");
            ++report.dropped;
            continue;
          }
          TestFragment prefixed;
          prefixed.source_trace = slice.source_trace;
          prefixed.source_offset = slice.source_offset;
          prefixed.nav_prefix = route->size();
          prefixed.cluster_path.push_back(ctx.entry_cluster);
          prefixed.signature_path.push_back(0);
          for (const auto& edge : *route) {
            prefixed.events.push_back(edge.event);
            prefixed.step_deltas.emplace_back();
            prefixed.cluster_path.push_back(edge.target);
            prefixed.signature_path.push_back(0);
          }
          prefixed.signature_path.back() = slice.signature_path.front();
          prefixed.events.insert(prefixed.events.end(), slice.events.begin(), slice.events.end());
          prefixed.step_deltas.insert(prefixed.step_deltas.end(), slice.step_deltas.begin(), slice.step_deltas.end());
          prefixed.cluster_path.insert(prefixed.cluster_path.end(), slice.cluster_path.begin() + 1,
                                       slice.cluster_path.end());
          prefixed.signature_path.insert(prefixed.signature_path.end(), slice.signature_path.begin() + 1,
                                         slice.signature_path.end());
          prefixed.footprint = slice.footprint;
          slice = std::move(prefixed);
        }

        std::optional<std::size_t> divergence = verify_all(slice, device, config.verify_replays);
        if (!divergence) {
          slice.status = ReplayStatus::Stable;
        } else {
          auto r = recover(device, slice, *divergence, ctx.utg);
          if (r.recovery == Recovery::Navigated) ++report.navigated;
          if (r.recovery == Recovery::Skipped) ++report.skipped;
          // A rescued fragment must replay on its own; otherwise keep only
          // the prefix before the original divergence.
          if (r.stable() && verify_all(slice, device, config.verify_replays)) {
            recover_by_truncation(slice, *divergence);
            r.recovery = Recovery::Truncated;
          }
          if (r.recovery == Recovery::Truncated) ++report.truncated;
        }
        report.attempts.push_back(ReplayAttempt{static_cast<int>(report.fragments.size()),
                                                slice.status == ReplayStatus::Stable});
        if (slice.footprint.empty()) {
          ++report.dropped;
          continue;
        }
        if (slice.status == ReplayStatus::Stable) {
          report.steps_before += slice.size() - slice.nav_prefix;
          if (config.minimize) slice = eliminate_redundancy(slice, device_replay_oracle(device));
          report.steps_after += slice.size() - slice.nav_prefix;
        }
        if (!seen.insert(slice.events).second) {
          ++report.duplicates;
          continue;
        }
        slice.id = static_cast<int>(report.fragments.size());
        report.fragments.push_back(std::move(slice));
      } catch (const BudgetExhausted&) {
        throw;
      } catch (const std::exception& e) {
        report.failures.push_back("trace " + std::to_string(t) + ": " + e.what());
      }
    }
  }
  report.events = device.events() - events_at_start;
  return report;
}

std::vector<const TestFragment*> fragments_through(const std::vector<TestFragment>& store, ClusterId cluster) {
  std::vector<const TestFragment*> out;
  for (const auto& f : store) {
    if (std::find(f.cluster_path.begin(), f.cluster_path.end(), cluster) != f.cluster_path.end()) {
      out.push_back(&f);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const TestFragment* a, const TestFragment* b) {
    const bool sa = a->status == ReplayStatus::Stable;
    const bool sb = b->status == ReplayStatus::Stable;
    if (sa != sb) return sa;
    if (a->footprint.size() != b->footprint.size()) return a->footprint.size() > b->footprint.size();
    return a->id < b->id;
  });
  return out;
}

json fragment_to_json(const TestFragment& fragment, const AppModel& model) {
  json events = json::array();
  for (const auto& e : fragment.events) events.push_back(event_to_json(e));
  json footprint = json::array();
  for (LabelId label : fragment.footprint) footprint.push_back(model.label_name(label));
  return json{{"fragment_id", fragment.id},
              {"events", std::move(events)},
              {"entry_cluster", fragment.entry_cluster()},
              {"exit_cluster", fragment.exit_cluster()},
              {"cluster_path", fragment.cluster_path},
              {"footprint", std::move(footprint)},
              {"replay_status", std::string(to_string(fragment.status))},
              {"recovery", std::string(to_string(fragment.recovery))},
              {"source_trace", fragment.source_trace},
              {"source_offset", fragment.source_offset},
              {"nav_prefix", fragment.nav_prefix}};
}

}  // namespace epidroid
