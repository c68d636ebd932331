#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "epidroid/variables.hpp"

namespace epidroid {

class GuardSyntaxError : public std::runtime_error {
 public:
  GuardSyntaxError(const std::string& message, std::size_t position)
      : std::runtime_error(message), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Raised when a guard names an undeclared variable or compares against a
/// literal outside the variable's domain.
class GuardBindError : public std::runtime_error {
 public:
  GuardBindError(const std::string& message, std::string variable)
      : std::runtime_error(message), variable_(std::move(variable)) {}
  const std::string& variable() const { return variable_; }

 private:
  std::string variable_;
};

/// Boolean precondition over application variables.
///
/// Grammar (precedence `!` > `&&` > `||`, left associative):
///
///   expr    := and ( "||" and )*
///   and     := unary ( "&&" unary )*
///   unary   := "!" unary | primary
///   primary := "(" expr ")" | IDENT [ "==" literal | ">=" INT ]
///   literal := IDENT | INT | '"' chars '"'
///
/// A bare identifier is truthy for booleans and for counters above zero.
/// The empty string parses to the constant `true`.
class Guard {
 public:
  Guard() = default;

  static Guard parse(std::string_view text);

  /// Resolves names and literals against the declared variables.
  void bind(std::span<const VarDef> vars);

  bool evaluate(std::span<const int> valuation) const;

  /// Names of every variable the expression reads.
  std::set<std::string> variables() const;

  const std::string& source() const { return source_; }
  bool is_trivial() const { return nodes_.empty(); }
  bool bound() const { return bound_; }

 private:
  enum class Op { Var, Not, And, Or, Eq, Ge };

  struct Node {
    Op op = Op::Var;
    std::string name;     // Var/Eq/Ge
    std::string literal;  // Eq/Ge
    int var_index = -1;
    int value = 0;
    int lhs = -1;
    int rhs = -1;
  };

  friend class GuardParser;

  bool eval_node(int index, std::span<const int> valuation) const;

  std::string source_;
  std::vector<Node> nodes_;
  int root_ = -1;
  bool bound_ = false;
};

}  // namespace epidroid
