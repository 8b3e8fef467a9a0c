#pragma once

// Arithmetic/boolean expression language shared by rate laws, LHA guards,
// LHA updates and HASL path expressions.
//
//   expr    := or
//   or      := and ('||' and)*
//   and     := cmp ('&&' cmp)*
//   cmp     := sum (('<' | '<=' | '>' | '>=' | '=' | '==') sum)?
//   sum     := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?
//   primary := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//
// Identifiers are resolved at compile time to a slot (LHA variable, species
// population or parameter) or folded to a constant.

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace osctune::expr {

enum class NodeKind { Number, Ident, Neg, Add, Sub, Mul, Div, Pow, Call, Compare, And, Or };

enum class CmpOp { Less, LessEq, Greater, GreaterEq, Equal };

struct Node {
  NodeKind kind = NodeKind::Number;
  double number = 0.0;
  std::string name;  // identifier or function name
  CmpOp cmp = CmpOp::Equal;
  std::vector<Node> args;
  std::size_t line = 1;
  std::size_t column = 1;
};

/// Parses a full expression. Throws ParseError with 1-based line/column.
Node parse(std::string_view text);

/// Renders a node back to parseable text (fully parenthesised binary ops).
std::string to_string(const Node& node);

/// All identifiers referenced in the tree, excluding function names.
std::set<std::string> identifiers(const Node& node);

bool is_boolean(const Node& node);

enum class SlotKind : std::uint8_t { Var, Species, Param };

struct Slot {
  SlotKind kind;
  std::uint32_t index;
};

using Binding = std::variant<Slot, double>;
using Resolver = std::function<std::optional<Binding>(std::string_view)>;

/// Values visible to a compiled program.
struct Env {
  std::span<const double> vars;
  std::span<const std::int64_t> species;
  std::span<const double> params;
};

/// Compiled numeric expression (postfix bytecode).
class Program {
 public:
  Program() = default;

  /// Throws ModelError on unknown identifiers/functions or boolean nodes.
  static Program compile(const Node& node, const Resolver& resolve);
  static Program constant(double value);

  /// Throws EvalError on division by zero.
  double eval(const Env& env) const;

  bool is_constant() const noexcept;
  bool empty() const noexcept { return code_.empty(); }

  /// Distinct Var indices read by the program.
  std::vector<std::uint32_t> variables() const;
  /// Distinct Species indices read by the program.
  std::vector<std::uint32_t> species() const;

 private:
  enum class Op : std::uint8_t {
    Const, Var, Species, Param, Neg, Add, Sub, Mul, Div, Pow, Min, Max, Abs, Sqrt
  };
  struct Instr {
    Op op;
    std::uint32_t index;
    double value;
  };
  static constexpr std::size_t kMaxStack = 64;

  void emit(const Node& node, const Resolver& resolve, std::size_t depth);

  std::vector<Instr> code_;
};

/// Returns true when `node` is affine in the Var-kind identifiers, i.e. of the
/// form sum(a_i * v_i) + c where a_i and c only involve species, parameters
/// and constants.
bool is_affine_in_vars(const Node& node, const Resolver& resolve);

/// One atomic linear constraint `lhs - rhs (op) 0`.
struct Constraint {
  Program diff;
  CmpOp op;
  bool affine = false;
  std::vector<std::uint32_t> vars;  // Var indices in diff
};

/// Boolean guard stored in disjunctive normal form. An empty guard is `true`.
class Guard {
 public:
  static constexpr double kTolerance = 1e-9;

  Guard() = default;
  static Guard compile(const Node& node, const Resolver& resolve);

  bool holds(const Env& env) const;
  bool always_true() const noexcept { return clauses_.empty(); }
  const std::vector<std::vector<Constraint>>& clauses() const noexcept { return clauses_; }

  static bool test(double diff, CmpOp op);

 private:
  std::vector<std::vector<Constraint>> clauses_;
};

}  // namespace osctune::expr
