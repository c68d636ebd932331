#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace epidroid {

enum class VarType { Bool, Enum, Counter };

std::string_view to_string(VarType type);

/// A global application variable. Values are stored as integers: 0/1 for
/// booleans, the symbol index for enums, the count for counters.
struct VarDef {
  std::string name;
  VarType type = VarType::Bool;
  std::vector<std::string> symbols;  // enum only, 2..4 entries
  int max = 1;                       // counter only, inclusive upper bound
  int initial = 0;
  bool global_hint = false;

  int domain_size() const;
  bool in_domain(int value) const;
};

using Valuation = std::vector<int>;

/// Parses a literal (`true`, `3`, `WebM`) into the variable's integer encoding.
std::optional<int> parse_literal(const VarDef& var, std::string_view literal);

std::string format_value(const VarDef& var, int value);

std::optional<std::size_t> find_variable(std::span<const VarDef> vars, std::string_view name);

}  // namespace epidroid
