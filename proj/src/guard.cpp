#include "epidroid/guard.hpp"

#include <cctype>
#include <charconv>

namespace epidroid {

std::string_view to_string(VarType type) {
  switch (type) {
    case VarType::Bool:
      return "bool";
    case VarType::Enum:
      return "enum";
    case VarType::Counter:
      return "counter";
  }
  return "unknown";
}

int VarDef::domain_size() const {
  switch (type) {
    case VarType::Bool:
      return 2;
    case VarType::Enum:
      return static_cast<int>(symbols.size());
    case VarType::Counter:
      return max + 1;
  }
  return 0;
}

bool VarDef::in_domain(int value) const { return value >= 0 && value < domain_size(); }

std::optional<int> parse_literal(const VarDef& var, std::string_view literal) {
  switch (var.type) {
    case VarType::Bool:
      if (literal == "true") return 1;
      if (literal == "false") return 0;
      return std::nullopt;
    case VarType::Enum:
      for (std::size_t i = 0; i < var.symbols.size(); ++i) {
        if (var.symbols[i] == literal) return static_cast<int>(i);
      }
      return std::nullopt;
    case VarType::Counter: {
      int value = 0;
      const auto* end = literal.data() + literal.size();
      auto [ptr, ec] = std::from_chars(literal.data(), end, value);
      if (ec != std::errc{} || ptr != end || !var.in_domain(value)) return std::nullopt;
      return value;
    }
  }
  return std::nullopt;
}

std::string format_value(const VarDef& var, int value) {
  switch (var.type) {
    case VarType::Bool:
      return value ? "true" : "false";
    case VarType::Enum:
      if (value >= 0 && value < static_cast<int>(var.symbols.size())) return var.symbols[value];
      return "?";
    case VarType::Counter:
      return std::to_string(value);
  }
  return "?";
}

std::optional<std::size_t> find_variable(std::span<const VarDef> vars, std::string_view name) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (vars[i].name == name) return i;
  }
  return std::nullopt;
}

class GuardParser {
 public:
  GuardParser(std::string_view text, Guard& guard) : text_(text), guard_(guard) {}

  void run() {
    skip_space();
    if (pos_ == text_.size()) return;
    guard_.root_ = parse_or();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
  }

 private:
  using Node = Guard::Node;
  using Op = Guard::Op;

  [[noreturn]] void fail(const std::string& what) const {
    throw GuardSyntaxError("guard syntax error at position " + std::to_string(pos_) + ": " + what +
                               " in \"" + std::string(text_) + "\"",
                           pos_);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(std::string_view token) {
    skip_space();
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  int push(Node node) {
    guard_.nodes_.push_back(std::move(node));
    return static_cast<int>(guard_.nodes_.size()) - 1;
  }

  int parse_or() {
    int lhs = parse_and();
    while (accept("||")) {
      int rhs = parse_and();
      lhs = push({.op = Op::Or, .lhs = lhs, .rhs = rhs});
    }
    return lhs;
  }

  int parse_and() {
    int lhs = parse_unary();
    while (accept("&&")) {
      int rhs = parse_unary();
      lhs = push({.op = Op::And, .lhs = lhs, .rhs = rhs});
    }
    return lhs;
  }

  int parse_unary() {
    skip_space();
    // `!=` is not part of the language; only a lone `!` negates.
    if (pos_ < text_.size() && text_[pos_] == '!' &&
        (pos_ + 1 >= text_.size() || text_[pos_ + 1] != '=')) {
      ++pos_;
      int operand = parse_unary();
      return push({.op = Op::Not, .lhs = operand});
    }
    return parse_primary();
  }

  int parse_primary() {
    skip_space();
    if (accept("(")) {
      int inner = parse_or();
      if (!accept(")")) fail("expected ')'");
      return inner;
    }
    std::string name = identifier();
    if (name.empty()) fail("expected variable name");
    if (accept("==")) {
      std::string literal = parse_literal_token();
      return push({.op = Op::Eq, .name = std::move(name), .literal = std::move(literal)});
    }
    if (accept(">=")) {
      skip_space();
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (start == pos_) fail("expected integer after '>='");
      return push({.op = Op::Ge,
                   .name = std::move(name),
                   .literal = std::string(text_.substr(start, pos_ - start))});
    }
    return push({.op = Op::Var, .name = std::move(name)});
  }

  std::string identifier() {
    skip_space();
    std::size_t start = pos_;
    auto is_ident = [](char c) {
      return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
    };
    if (pos_ < text_.size() &&
        (std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      while (pos_ < text_.size() && is_ident(text_[pos_])) ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string parse_literal_token() {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '"') {
      std::size_t close = text_.find('"', pos_ + 1);
      if (close == std::string_view::npos) fail("unterminated string literal");
      std::string out(text_.substr(pos_ + 1, close - pos_ - 1));
      pos_ = close + 1;
      return out;
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
            text_[pos_] == '.' || text_[pos_] == '-')) {
      ++pos_;
    }
    if (start == pos_) fail("expected literal after '=='");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string_view text_;
  Guard& guard_;
  std::size_t pos_ = 0;
};

Guard Guard::parse(std::string_view text) {
  Guard guard;
  guard.source_ = std::string(text);
  GuardParser(text, guard).run();
  return guard;
}

void Guard::bind(std::span<const VarDef> vars) {
  for (auto& node : nodes_) {
    if (node.op != Op::Var && node.op != Op::Eq && node.op != Op::Ge) continue;
    auto index = find_variable(vars, node.name);
    if (!index) {
      throw GuardBindError("guard \"" + source_ + "\" references undeclared variable '" +
                               node.name + "'",
                           node.name);
    }
    const VarDef& var = vars[*index];
    node.var_index = static_cast<int>(*index);
    switch (node.op) {
      case Op::Var:
        if (var.type == VarType::Enum) {
          throw GuardBindError("guard \"" + source_ + "\" uses enum variable '" + node.name +
                                   "' as a boolean",
                               node.name);
        }
        break;
      case Op::Eq: {
        auto value = parse_literal(var, node.literal);
        if (!value) {
          throw GuardBindError("guard \"" + source_ + "\" compares '" + node.name +
                                   "' against out-of-domain literal '" + node.literal + "'",
                               node.name);
        }
        node.value = *value;
        break;
      }
      case Op::Ge: {
        if (var.type != VarType::Counter) {
          throw GuardBindError("guard \"" + source_ + "\" applies '>=' to non-counter '" +
                                   node.name + "'",
                               node.name);
        }
        node.value = std::stoi(node.literal);
        break;
      }
      default:
        break;
    }
  }
  bound_ = true;
}

bool Guard::evaluate(std::span<const int> valuation) const {
  if (root_ < 0) return true;
  return eval_node(root_, valuation);
}

bool Guard::eval_node(int index, std::span<const int> valuation) const {
  const Node& node = nodes_[static_cast<std::size_t>(index)];
  switch (node.op) {
    case Op::Var:
      return valuation[static_cast<std::size_t>(node.var_index)] > 0;
    case Op::Not:
      return !eval_node(node.lhs, valuation);
    case Op::And:
      return eval_node(node.lhs, valuation) && eval_node(node.rhs, valuation);
    case Op::Or:
      return eval_node(node.lhs, valuation) || eval_node(node.rhs, valuation);
    case Op::Eq:
      return valuation[static_cast<std::size_t>(node.var_index)] == node.value;
    case Op::Ge:
      return valuation[static_cast<std::size_t>(node.var_index)] >= node.value;
  }
  return false;
}

std::set<std::string> Guard::variables() const {
  std::set<std::string> out;
  for (const auto& node : nodes_) {
    if (!node.name.empty()) out.insert(node.name);
  }
  return out;
}

}  // namespace epidroid
