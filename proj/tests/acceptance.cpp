// Acceptance sweep: one PASS/FAIL line per criterion, followed by the measured
// numbers. Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "epidroid/abstraction.hpp"
#include "epidroid/device.hpp"
#include "epidroid/explorers.hpp"
#include "epidroid/feedback.hpp"
#include "epidroid/fixtures.hpp"
#include "epidroid/harness.hpp"
#include "epidroid/semantic_utg.hpp"
#include "epidroid/session.hpp"
#include "epidroid/trace_store.hpp"

namespace {

using namespace epidroid;
using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kSeeds = 100;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

std::shared_ptr<const AppModel> fixture(const std::string& name) {
  return std::make_shared<const AppModel>(load_app_model(fixtures_dir() / (name + ".app.json")));
}

const std::vector<std::string> kSuite = {"case1_settings_player", "case2_subscribe_feed", "cascade_lab", "noise_news",
                                         "shop_cart"};
const std::vector<std::string> kDeterministic = {"case1_settings_player", "case2_subscribe_feed", "cascade_lab",
                                                 "shop_cart", "static_info"};

ExperimentConfig config_for(std::shared_ptr<const AppModel> model, std::uint64_t seed, Mode mode,
                            ExplorerKind explorer = ExplorerKind::Frontier) {
  ExperimentConfig config;
  config.model = std::move(model);
  config.mode = mode;
  config.seed = seed;
  config.explorer.kind = explorer;
  config.explorer.seed = seed;
  return config;
}

bool covers_all(const ExperimentResult& r, const std::set<LabelId>& labels) {
  return std::all_of(labels.begin(), labels.end(), [&](LabelId l) { return r.context->monitor.is_covered(l); });
}

double rate(std::size_t hits, std::size_t runs) { return runs ? static_cast<double>(hits) / runs : 0.0; }

// Criteria 1 and 2: gated-label unlock rates over 100 seeds.
Verdict unlock_sweep(const std::string& name, std::size_t expected_gated) {
  auto model = fixture(name);
  const auto gated = labels_with_prefix(*model, "gated_");
  const auto start = Clock::now();
  std::size_t full = 0, random_hits = 0, frontier_hits = 0;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    full += covers_all(run_experiment(config_for(model, seed, Mode::Epidroid)), gated);
    random_hits += covers_all(run_experiment(config_for(model, seed, Mode::BaselineExt, ExplorerKind::Random)), gated);
    frontier_hits += covers_all(run_experiment(config_for(model, seed, Mode::BaselineExt)), gated);
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  Verdict v;
  v.pass = gated.size() == expected_gated && full == kSeeds && rate(random_hits, kSeeds) <= 0.05 &&
           rate(frontier_hits, kSeeds) <= 0.05 && secs < 60.0;
  v.detail = fmt("%zu gated labels; all covered: epidroid %zu/%llu, baseline_ext random %zu/%llu, frontier %zu/%llu; "
                 "sweep %.1f s",
                 gated.size(), full, static_cast<unsigned long long>(kSeeds), random_hits,
                 static_cast<unsigned long long>(kSeeds), frontier_hits, static_cast<unsigned long long>(kSeeds), secs);
  return v;
}

// Criterion 3: mean enhancement-phase delta-ACC, epidroid vs baseline_ext.
Verdict relative_gain() {
  constexpr std::uint64_t kGainSeeds = 20;
  double epi = 0.0, random_base = 0.0, frontier_base = 0.0;
  std::size_t runs = 0;
  for (const auto& name : kSuite) {
    auto model = fixture(name);
    for (std::uint64_t seed = 1; seed <= kGainSeeds; ++seed) {
      epi += run_experiment(config_for(model, seed, Mode::Epidroid)).enhancement_delta_acc();
      frontier_base += run_experiment(config_for(model, seed, Mode::BaselineExt)).enhancement_delta_acc();
      random_base +=
          run_experiment(config_for(model, seed, Mode::BaselineExt, ExplorerKind::Random)).enhancement_delta_acc();
      ++runs;
    }
  }
  epi /= runs;
  frontier_base /= runs;
  random_base /= runs;
  // Epidroid's warm-up uses the frontier explorer, so the matched baseline is
  // frontier continuation; the random continuation is reported alongside.
  Verdict v;
  v.pass = epi >= 3.0 * frontier_base && epi > 0.0;
  v.detail = fmt("mean enhancement dACC over %zu runs: epidroid %.4f, baseline_ext frontier %.4f (%.1fx), "
                 "random %.4f",
                 runs, epi, frontier_base, frontier_base > 0 ? epi / frontier_base : 0.0, random_base);
  return v;
}

// Criterion 4: oracle completeness on generated models.
Verdict oracle_completeness() {
  constexpr int kModels = 50;
  int exact = 0;
  std::string first_miss;
  GeneratorParams params;
  for (int i = 0; i < kModels; ++i) {
    const std::uint64_t seed = 1000 + static_cast<std::uint64_t>(i);
    auto model = std::make_shared<const AppModel>(generate_random_model(params, seed));
    const auto expected = brute_force_reachable_labels(*model, true);
    ExperimentConfig config = config_for(model, seed, Mode::Epidroid);
    config.warmup_events = 2000;
    config.enhance_events = 8000;
    ExperimentResult r = run_experiment(config);
    auto covered = r.context->monitor.covered_labels();
    std::set<LabelId> got(covered.begin(), covered.end());
    if (got == expected) {
      ++exact;
    } else if (first_miss.empty()) {
      first_miss = fmt("; first mismatch seed %llu: %zu of %zu", static_cast<unsigned long long>(seed), got.size(),
                       expected.size());
    }
  }
  return {exact == kModels, fmt("%d/%d generated models reach exactly the brute-force label set (2000+8000 events)%s",
                                exact, kModels, first_miss.c_str())};
}

struct StabilizedRun {
  std::unique_ptr<RunContext> ctx;
  std::unique_ptr<Device> device;
  Trace trace;
  StabilizeReport report;
};

StabilizedRun stabilized(std::shared_ptr<const AppModel> model, std::uint64_t seed, ExplorerKind kind,
                         std::uint64_t budget, int verify_replays = 1) {
  StabilizedRun run;
  run.ctx = std::make_unique<RunContext>(model, kDefaultClusterThreshold, seed);
  run.device = std::make_unique<Device>(*run.ctx);
  run.trace = explore(*run.device, ExplorerConfig{kind, budget, seed});
  StabilizeConfig config;
  config.verify_replays = verify_replays;
  run.report = stabilize({run.trace}, *run.device, config);
  return run;
}

// Criterion 5: replay success of stabilized fragments vs raw sequences. The
// noise study verifies each slice with several unanimous replays.
constexpr int kNoisyVerifyReplays = 5;

Verdict stabilization_rsr() {
  bool deterministic_ok = true;
  std::string det;
  for (const auto& name : kDeterministic) {
    auto run = stabilized(fixture(name), 1, ExplorerKind::Frontier, 500);
    auto rsr = measure_rsr(run.report.fragments, *run.device, 100);
    deterministic_ok = deterministic_ok && rsr.attempts > 0 && rsr.stable == rsr.attempts;
    det += fmt(" %s %.2f", name.c_str(), rsr.rate());
  }
  auto noise = fixture("noise_news");
  std::size_t attempts = 0, stable = 0, raw_attempts = 0, raw_stable = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto run = stabilized(noise, seed, ExplorerKind::Frontier, 500, kNoisyVerifyReplays);
    auto s = measure_rsr(run.report.fragments, *run.device, 100);
    auto raw = measure_rsr(raw_episodes({run.trace}), *run.device, 100);
    attempts += s.attempts;
    stable += s.stable;
    raw_attempts += raw.attempts;
    raw_stable += raw.stable;
  }
  const double stab = rate(stable, attempts), raw = rate(raw_stable, raw_attempts);
  Verdict v;
  v.pass = deterministic_ok && stab >= 0.95 && stab - raw >= 0.20;
  v.detail = fmt("deterministic RSR:%s; noise stabilized %.3f vs raw %.3f (gap %.1f points, 20 seeds x 100 "
                 "replays, %d verification replays)",
                 det.c_str(), stab, raw, 100.0 * (stab - raw), kNoisyVerifyReplays);
  return v;
}

// Criterion 6: minimization preserves footprints and removes redundant steps.
Verdict redundancy_elimination() {
  std::size_t checked = 0, preserved = 0;
  GeneratorParams params;
  for (std::uint64_t seed = 1; checked < 1000 && seed < 1000; ++seed) {
    auto model = std::make_shared<const AppModel>(generate_random_model(params, seed));
    RunContext ctx(model, kDefaultClusterThreshold, seed);
    Device device(ctx);
    Trace trace = explore(device, ExplorerConfig{ExplorerKind::Random, 400, seed});
    auto oracle = device_replay_oracle(device);
    for (auto& fragment : slice_trace(trace, ctx.entry_cluster)) {
      if (checked == 1000) break;
      std::vector<std::vector<LabelId>> deltas;
      if (!verify_replay(fragment, device, &deltas).stable()) continue;
      fragment.step_deltas = std::move(deltas);
      fragment.footprint = union_of_deltas(fragment);
      ReplayCheck before = oracle(fragment);
      TestFragment reduced = eliminate_redundancy(fragment, oracle);
      ReplayCheck after = oracle(reduced);
      ++checked;
      preserved += union_of_deltas(reduced) == fragment.footprint && after.stable && after.covered == before.covered;
    }
  }
  std::size_t before = 0, after = 0;
  for (const auto& name : kSuite) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto run = stabilized(fixture(name), seed, ExplorerKind::Random, 500);
      before += run.report.steps_before;
      after += run.report.steps_after;
    }
  }
  const double removed = before ? 1.0 - static_cast<double>(after) / before : 0.0;
  Verdict v;
  v.pass = checked == 1000 && preserved == checked && removed >= 0.40;
  v.detail = fmt("footprint preserved on %zu/%zu fragments; random-explorer traces: %zu -> %zu steps (%.1f%% removed)",
                 preserved, checked, before, after, 100.0 * removed);
  return v;
}

// Criterion 7: ablations.
Verdict ablations() {
  double full = 0.0, blind = 0.0;
  std::size_t runs = 0;
  for (const std::string name : {"case1_settings_player", "case2_subscribe_feed"}) {
    auto model = fixture(name);
    for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
      ExperimentConfig config = config_for(model, seed, Mode::Epidroid);
      full += run_experiment(config).metrics.acc;
      config.dependency_reasoning = false;
      blind += run_experiment(config).metrics.acc;
      ++runs;
    }
  }
  full /= runs;
  blind /= runs;
  auto noise = fixture("noise_news");
  std::size_t a = 0, s = 0, ra = 0, rs = 0;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    ExperimentConfig config = config_for(noise, seed, Mode::Epidroid);
    auto with = run_experiment(config).metrics;
    config.stabilization = false;
    auto without = run_experiment(config).metrics;
    a += with.replay_attempts;
    s += with.stable_replays;
    ra += without.replay_attempts;
    rs += without.stable_replays;
  }
  const double rsr = rate(s, a), raw_rsr = rate(rs, ra);
  Verdict v;
  v.pass = full - blind >= 0.10 && rsr - raw_rsr >= 0.20;
  v.detail = fmt("case1+case2 final ACC: full %.3f vs no dependency reasoning %.3f (gap %.1f points); noise RSR: "
                 "full %.3f vs no stabilization %.3f (gap %.1f points)",
                 full, blind, 100.0 * (full - blind), rsr, raw_rsr, 100.0 * (rsr - raw_rsr));
  return v;
}

// Criterion 8: exhaustive signal matrix.
Verdict signal_matrix() {
  int deviations = 0;
  for (bool observed : {false, true}) {
    for (std::size_t states : {0u, 1u}) {
      for (std::size_t gain : {0u, 1u}) {
        SignalKind expected = !observed                 ? SignalKind::OperationalFailure
                              : (states > 0 || gain > 0) ? SignalKind::PositiveDiscovery
                                                         : SignalKind::SemanticMismatch;
        deviations += classify_signal(observed, states, gain) != expected;
      }
    }
  }
  return {deviations == 0, fmt("8 cases, %d deviations", deviations)};
}

// Criterion 9: queue pop order equals the lexicographic sort.
Verdict queue_law() {
  std::mt19937_64 rng(9);
  const ImpactScope scopes[] = {ImpactScope::Unknown, ImpactScope::IntraPage, ImpactScope::InterPage,
                                ImpactScope::Global};
  int deviations = 0;
  for (int round = 0; round < 10000; ++round) {
    MsePriorityQueue queue;
    std::vector<std::tuple<int, bool, int, MseId>> expected;  // (rank, visited-all, order, id)
    const int n = static_cast<int>(rng() % 16);
    for (int i = 0; i < n; ++i) {
      MseRecord rec;
      rec.id = static_cast<MseId>(rng() % 8);
      rec.scope = scopes[rng() % 4];
      rec.domain = {"Off", "On"};
      rec.observed_values = rng() % 2 ? std::vector<std::string>{"Off"} : std::vector<std::string>{"Off", "On"};
      queue.enqueue(rec);
      expected.emplace_back(scope_rank(rec.scope), rec.observed_values.size() == 2, i, rec.id);
    }
    std::sort(expected.begin(), expected.end());
    for (const auto& e : expected) deviations += queue.pop_highest() != std::get<3>(e);
    deviations += queue.pop_highest().has_value();
  }
  return {deviations == 0, fmt("10000 random multisets, %d deviations", deviations)};
}

ViewNode random_tree(std::mt19937_64& rng) {
  static const WidgetKind kinds[] = {WidgetKind::Button, WidgetKind::Label, WidgetKind::Switch,
                                     WidgetKind::Input,  WidgetKind::Container, WidgetKind::ListItem};
  ViewNode root;
  root.widget_id = "page" + std::to_string(rng() % 3);
  std::vector<ViewNode*> open{&root};
  const int n = static_cast<int>(rng() % 20);
  for (int i = 0; i < n; ++i) {
    ViewNode* parent = open[rng() % open.size()];
    ViewNode child;
    child.widget_id = "w" + std::to_string(rng() % 8);
    child.kind = kinds[rng() % 6];
    child.depth = parent->depth + 1;
    parent->children.push_back(std::move(child));
    if (parent->children.size() == 1 && parent->depth < 4) open.push_back(&parent->children.back());
  }
  return root;
}

std::set<std::pair<std::size_t, Valuation>> reachable_states(const AppModel& model) {
  std::set<std::pair<std::size_t, Valuation>> seen{{model.entry_page, model.initial_valuation()}};
  std::vector<std::pair<std::size_t, Valuation>> work(seen.begin(), seen.end());
  while (!work.empty()) {
    auto [page, val] = work.back();
    work.pop_back();
    for (const auto& e : actionable_events(render_page(model, page, val, 0))) {
      auto t = matching_transition(model, page, val, e);
      if (!t) continue;
      Valuation next = val;
      apply_effects(model, model.transitions[*t], next);
      std::vector<std::size_t> targets{model.transitions[*t].target};
      if (const auto* f = model.flaky_edge(*t)) targets.push_back(f->alternate);
      for (auto target : targets) {
        if (seen.insert({target, next}).second) work.emplace_back(target, next);
      }
    }
  }
  return seen;
}

// Criterion 10: Dice properties and same-page co-clustering.
Verdict dice_properties() {
  std::mt19937_64 rng(10);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    ViewNode a = random_tree(rng), b = random_tree(rng);
    const double ab = dice_similarity(a, b), ba = dice_similarity(b, a);
    violations += dice_similarity(a, a) != 1.0;
    violations += ab != ba;
    violations += !(ab >= 0.0 && ab <= 1.0);
  }
  std::size_t pages = 0, split = 0;
  for (const auto& name : kSuite) {
    auto model = fixture(name);
    ClusterRegistry reg(0.80);
    std::map<std::size_t, std::set<ClusterId>> clusters;
    for (const auto& [page, val] : reachable_states(*model)) {
      for (std::uint64_t clock : {0, 1, 2}) {
        clusters[page].insert(
            reg.assign(make_abstract_state(render_page(*model, page, val, clock), model->pages[page].activity)));
      }
    }
    for (const auto& [page, ids] : clusters) {
      ++pages;
      split += ids.size() != 1;
    }
  }
  return {violations == 0 && split == 0,
          fmt("10000 random pairs, %d identity/symmetry/bound violations; %zu/%zu fixture pages co-cluster all "
              "reachable variants at 0.80",
              violations, pages - split, pages)};
}

// Criterion 11: cascade iterations.
Verdict cascade_iterations() {
  auto run = [](const std::string& name) {
    ExperimentResult r = run_experiment(config_for(fixture(name), 1, Mode::Epidroid));
    return std::make_pair(r.iterations(), report_json(r, false));
  };
  auto [c1, cj1] = run("cascade_lab");
  auto [c2, cj2] = run("cascade_lab");
  auto [s1, sj1] = run("static_info");
  auto [s2, sj2] = run("static_info");
  const bool deterministic = cj1 == cj2 && sj1 == sj2;
  return {c1 == 2 && c2 == 2 && s1 == 1 && s2 == 1 && deterministic,
          fmt("cascade %zu iterations, static %zu; repeated runs identical: %s", c1, s1,
              deterministic ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number; default runs all.
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"case-1 unlock", [] { return unlock_sweep("case1_settings_player", 44); }},
      {"case-2 unlock", [] { return unlock_sweep("case2_subscribe_feed", 772); }},
      {"relative enhancement gain", relative_gain},
      {"oracle completeness", oracle_completeness},
      {"stabilization replay success", stabilization_rsr},
      {"redundancy elimination", redundancy_elimination},
      {"ablations", ablations},
      {"feedback signal matrix", signal_matrix},
      {"priority queue law", queue_law},
      {"dice and clustering", dice_properties},
      {"cascade iterations", cascade_iterations},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    const auto start = Clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    failures += !v.pass;
    std::printf("%s %zu %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
