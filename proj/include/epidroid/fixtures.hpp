#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "epidroid/app_model.hpp"

namespace epidroid {

inline constexpr double kMaxProductStates = 1e5;

struct GeneratorParams {
  int pages = 6;                    // 2..12
  int variables = 3;                // 0..6
  int distractors_per_page = 2;     // 0..6
  int labels_per_gate = 2;          // labels emitted by each gated transition, 1..8
  double enum_fraction = 0.3;       // share of variables that are 2-3 option radios
  double visibility_fraction = 0.5; // share of variables that also gate a widget's visibility
};

class GeneratorParamsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Seeded random app: a tree of pages with back navigation, inert and
/// label-emitting distractors, and per variable a controlling switch or radio
/// on one page whose value gates a button on a different page (and, for some
/// variables, the visibility of a widget). Deterministic per seed; throws
/// GeneratorParamsError when the bounds are violated.
AppModel generate_random_model(const GeneratorParams& params, std::uint64_t seed);

/// Exhaustive breadth-first search over (page, valuation) states from the
/// entry state, firing every rendered action and both outcomes of flaky
/// edges. With allow_mutations = false, transitions whose effects write a
/// variable read by any guard are never fired. Throws std::invalid_argument
/// when the product space exceeds kMaxProductStates.
std::set<LabelId> brute_force_reachable_labels(const AppModel& model, bool allow_mutations);

/// Labels of the fixture whose names start with `prefix` (fixtures name their
/// dependency-gated labels with a common prefix).
std::set<LabelId> labels_with_prefix(const AppModel& model, std::string_view prefix);

/// Directory holding the bundled fixtures: $EPIDROID_FIXTURES when set, else
/// the source tree's fixtures/ directory.
std::filesystem::path fixtures_dir();

}  // namespace epidroid
