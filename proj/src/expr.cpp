#include "osctune/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "osctune/error.hpp"

namespace osctune::expr {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Node parse_all() {
    skip_ws();
    if (at_end()) fail("empty expression");
    Node node = parse_or();
    skip_ws();
    if (!at_end()) fail(std::string("unexpected character '") + peek() + "'");
    return node;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;

  bool at_end() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_, col_); }

  bool accept(std::string_view token) {
    skip_ws();
    if (text_.substr(pos_, token.size()) != token) return false;
    for (std::size_t i = 0; i < token.size(); ++i) advance();
    return true;
  }

  Node make(NodeKind kind, std::size_t line, std::size_t col) {
    Node node;
    node.kind = kind;
    node.line = line;
    node.column = col;
    return node;
  }

  Node binary(NodeKind kind, Node lhs, Node rhs) {
    Node node = make(kind, lhs.line, lhs.column);
    node.args.push_back(std::move(lhs));
    node.args.push_back(std::move(rhs));
    return node;
  }

  Node parse_or() {
    Node lhs = parse_and();
    while (accept("||")) lhs = binary(NodeKind::Or, std::move(lhs), parse_and());
    return lhs;
  }

  Node parse_and() {
    Node lhs = parse_cmp();
    while (accept("&&")) lhs = binary(NodeKind::And, std::move(lhs), parse_cmp());
    return lhs;
  }

  Node parse_cmp() {
    Node lhs = parse_sum();
    std::optional<CmpOp> op;
    if (accept("<=")) op = CmpOp::LessEq;
    else if (accept(">=")) op = CmpOp::GreaterEq;
    else if (accept("==")) op = CmpOp::Equal;
    else if (accept("<")) op = CmpOp::Less;
    else if (accept(">")) op = CmpOp::Greater;
    else if (accept("=")) op = CmpOp::Equal;
    if (!op) return lhs;
    Node node = binary(NodeKind::Compare, std::move(lhs), parse_sum());
    node.cmp = *op;
    return node;
  }

  Node parse_sum() {
    Node lhs = parse_term();
    for (;;) {
      if (accept("+")) lhs = binary(NodeKind::Add, std::move(lhs), parse_term());
      else if (accept("-")) lhs = binary(NodeKind::Sub, std::move(lhs), parse_term());
      else return lhs;
    }
  }

  Node parse_term() {
    Node lhs = parse_unary();
    for (;;) {
      if (accept("*")) lhs = binary(NodeKind::Mul, std::move(lhs), parse_unary());
      else if (accept("/")) lhs = binary(NodeKind::Div, std::move(lhs), parse_unary());
      else return lhs;
    }
  }

  Node parse_unary() {
    skip_ws();
    const auto line = line_;
    const auto col = col_;
    if (accept("-")) {
      Node node = make(NodeKind::Neg, line, col);
      node.args.push_back(parse_unary());
      return node;
    }
    return parse_power();
  }

  Node parse_power() {
    Node base = parse_primary();
    if (accept("^")) return binary(NodeKind::Pow, std::move(base), parse_unary());
    return base;
  }

  Node parse_primary() {
    skip_ws();
    if (at_end()) fail("unexpected end of expression");
    const auto line = line_;
    const auto col = col_;
    const char c = peek();
    if (c == '(') {
      advance();
      Node inner = parse_or();
      if (!accept(")")) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = pos_;
      while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) advance();
      if (peek() == 'e' || peek() == 'E') {
        const char next = peek(1);
        const bool signed_exp = (next == '+' || next == '-') && std::isdigit(static_cast<unsigned char>(peek(2)));
        if (std::isdigit(static_cast<unsigned char>(next)) || signed_exp) {
          advance();
          if (signed_exp) advance();
          while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
        }
      }
      const std::string_view token = text_.substr(start, pos_ - start);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
      if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw ParseError("malformed number '" + std::string(token) + "'", line, col);
      }
      Node node = make(NodeKind::Number, line, col);
      node.number = value;
      return node;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) advance();
      std::string name(text_.substr(start, pos_ - start));
      if (accept("(")) {
        Node node = make(NodeKind::Call, line, col);
        node.name = std::move(name);
        if (!accept(")")) {
          node.args.push_back(parse_or());
          while (accept(",")) node.args.push_back(parse_or());
          if (!accept(")")) fail("expected ')' after arguments");
        }
        return node;
      }
      Node node = make(NodeKind::Ident, line, col);
      node.name = std::move(name);
      return node;
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

const char* op_text(NodeKind kind) {
  switch (kind) {
    case NodeKind::Add: return "+";
    case NodeKind::Sub: return "-";
    case NodeKind::Mul: return "*";
    case NodeKind::Div: return "/";
    case NodeKind::Pow: return "^";
    case NodeKind::And: return "&&";
    case NodeKind::Or: return "||";
    default: return "?";
  }
}

const char* cmp_text(CmpOp op) {
  switch (op) {
    case CmpOp::Less: return "<";
    case CmpOp::LessEq: return "<=";
    case CmpOp::Greater: return ">";
    case CmpOp::GreaterEq: return ">=";
    case CmpOp::Equal: return "=";
  }
  return "?";
}

void collect_identifiers(const Node& node, std::set<std::string>& out) {
  if (node.kind == NodeKind::Ident) out.insert(node.name);
  for (const auto& arg : node.args) collect_identifiers(arg, out);
}

[[noreturn]] void model_error(const Node& node, const std::string& msg) {
  throw ModelError(msg + " (line " + std::to_string(node.line) + ", column " +
                   std::to_string(node.column) + ")");
}

// Degree of a subtree with respect to Var-kind identifiers: 0 constant,
// 1 affine, 2 anything else.
int var_degree(const Node& node, const Resolver& resolve) {
  switch (node.kind) {
    case NodeKind::Number:
      return 0;
    case NodeKind::Ident: {
      const auto binding = resolve(node.name);
      if (!binding) model_error(node, "unknown identifier '" + node.name + "'");
      if (const auto* slot = std::get_if<Slot>(&*binding)) return slot->kind == SlotKind::Var ? 1 : 0;
      return 0;
    }
    case NodeKind::Neg:
      return var_degree(node.args[0], resolve);
    case NodeKind::Add:
    case NodeKind::Sub:
      return std::max(var_degree(node.args[0], resolve), var_degree(node.args[1], resolve));
    case NodeKind::Mul: {
      const int a = var_degree(node.args[0], resolve);
      const int b = var_degree(node.args[1], resolve);
      if (a == 0 || b == 0) return std::max(a, b);
      return 2;
    }
    case NodeKind::Div: {
      const int a = var_degree(node.args[0], resolve);
      return var_degree(node.args[1], resolve) == 0 ? a : 2;
    }
    case NodeKind::Pow:
    case NodeKind::Call: {
      int deg = 0;
      for (const auto& arg : node.args) deg = std::max(deg, var_degree(arg, resolve));
      return deg == 0 ? 0 : 2;
    }
    default:
      return 2;
  }
}

void to_dnf(const Node& node, const Resolver& resolve, std::vector<std::vector<Constraint>>& out) {
  if (node.kind == NodeKind::Or) {
    to_dnf(node.args[0], resolve, out);
    to_dnf(node.args[1], resolve, out);
    return;
  }
  if (node.kind == NodeKind::And) {
    std::vector<std::vector<Constraint>> lhs;
    std::vector<std::vector<Constraint>> rhs;
    to_dnf(node.args[0], resolve, lhs);
    to_dnf(node.args[1], resolve, rhs);
    for (const auto& a : lhs) {
      for (const auto& b : rhs) {
        auto clause = a;
        clause.insert(clause.end(), b.begin(), b.end());
        out.push_back(std::move(clause));
      }
    }
    return;
  }
  if (node.kind != NodeKind::Compare) model_error(node, "guard must be a comparison or a boolean combination");
  Node diff;
  diff.kind = NodeKind::Sub;
  diff.line = node.line;
  diff.column = node.column;
  diff.args = node.args;
  Constraint c;
  c.diff = Program::compile(diff, resolve);
  c.op = node.cmp;
  c.affine = is_affine_in_vars(diff, resolve);
  c.vars = c.diff.variables();
  out.push_back({std::move(c)});
}

}  // namespace

Node parse(std::string_view text) { return Parser(text).parse_all(); }

std::string to_string(const Node& node) {
  std::ostringstream out;
  switch (node.kind) {
    case NodeKind::Number: {
      out.precision(17);
      out << node.number;
      break;
    }
    case NodeKind::Ident:
      out << node.name;
      break;
    case NodeKind::Neg:
      out << "(-" << to_string(node.args[0]) << ")";
      break;
    case NodeKind::Call: {
      out << node.name << "(";
      for (std::size_t i = 0; i < node.args.size(); ++i) {
        if (i) out << ", ";
        out << to_string(node.args[i]);
      }
      out << ")";
      break;
    }
    case NodeKind::Compare:
      out << "(" << to_string(node.args[0]) << " " << cmp_text(node.cmp) << " " << to_string(node.args[1]) << ")";
      break;
    default:
      out << "(" << to_string(node.args[0]) << " " << op_text(node.kind) << " " << to_string(node.args[1]) << ")";
      break;
  }
  return out.str();
}

std::set<std::string> identifiers(const Node& node) {
  std::set<std::string> out;
  collect_identifiers(node, out);
  return out;
}

bool is_boolean(const Node& node) {
  return node.kind == NodeKind::Compare || node.kind == NodeKind::And || node.kind == NodeKind::Or;
}

Program Program::compile(const Node& node, const Resolver& resolve) {
  Program program;
  program.emit(node, resolve, 1);
  return program;
}

Program Program::constant(double value) {
  Program program;
  program.code_.push_back({Op::Const, 0, value});
  return program;
}

bool Program::is_constant() const noexcept {
  for (const auto& instr : code_) {
    if (instr.op == Op::Var || instr.op == Op::Species || instr.op == Op::Param) return false;
  }
  return true;
}

namespace {

template <typename Code, typename OpT>
std::vector<std::uint32_t> distinct_indices(const Code& code, OpT op) {
  std::vector<std::uint32_t> out;
  for (const auto& instr : code) {
    if (instr.op == op && std::find(out.begin(), out.end(), instr.index) == out.end()) out.push_back(instr.index);
  }
  return out;
}

}  // namespace

std::vector<std::uint32_t> Program::variables() const { return distinct_indices(code_, Op::Var); }
std::vector<std::uint32_t> Program::species() const { return distinct_indices(code_, Op::Species); }

void Program::emit(const Node& node, const Resolver& resolve, std::size_t depth) {
  if (depth + 2 > kMaxStack) model_error(node, "expression nested too deeply");
  switch (node.kind) {
    case NodeKind::Number:
      code_.push_back({Op::Const, 0, node.number});
      return;
    case NodeKind::Ident: {
      const auto binding = resolve(node.name);
      if (!binding) model_error(node, "unknown identifier '" + node.name + "'");
      if (const auto* value = std::get_if<double>(&*binding)) {
        code_.push_back({Op::Const, 0, *value});
        return;
      }
      const auto slot = std::get<Slot>(*binding);
      const Op op = slot.kind == SlotKind::Var ? Op::Var : slot.kind == SlotKind::Species ? Op::Species : Op::Param;
      code_.push_back({op, slot.index, 0.0});
      return;
    }
    case NodeKind::Neg:
      emit(node.args[0], resolve, depth);
      code_.push_back({Op::Neg, 0, 0.0});
      return;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div:
    case NodeKind::Pow: {
      emit(node.args[0], resolve, depth);
      emit(node.args[1], resolve, depth + 1);
      const Op op = node.kind == NodeKind::Add   ? Op::Add
                    : node.kind == NodeKind::Sub ? Op::Sub
                    : node.kind == NodeKind::Mul ? Op::Mul
                    : node.kind == NodeKind::Div ? Op::Div
                                                 : Op::Pow;
      code_.push_back({op, 0, 0.0});
      return;
    }
    case NodeKind::Call: {
      const auto& fn = node.name;
      if (fn == "min" || fn == "max") {
        if (node.args.size() < 2) model_error(node, fn + "() needs at least two arguments");
        emit(node.args[0], resolve, depth);
        for (std::size_t i = 1; i < node.args.size(); ++i) {
          emit(node.args[i], resolve, depth + 1);
          code_.push_back({fn == "min" ? Op::Min : Op::Max, 0, 0.0});
        }
        return;
      }
      if (fn == "abs" || fn == "sqrt") {
        if (node.args.size() != 1) model_error(node, fn + "() takes one argument");
        emit(node.args[0], resolve, depth);
        code_.push_back({fn == "abs" ? Op::Abs : Op::Sqrt, 0, 0.0});
        return;
      }
      model_error(node, "unknown function '" + fn + "'");
    }
    default:
      model_error(node, "boolean expression where a number is expected");
  }
}

double Program::eval(const Env& env) const {
  std::array<double, kMaxStack> stack;
  std::size_t top = 0;
  for (const auto& instr : code_) {
    switch (instr.op) {
      case Op::Const: stack[top++] = instr.value; break;
      case Op::Var: stack[top++] = env.vars[instr.index]; break;
      case Op::Species: stack[top++] = static_cast<double>(env.species[instr.index]); break;
      case Op::Param: stack[top++] = env.params[instr.index]; break;
      case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
      case Op::Abs: stack[top - 1] = std::fabs(stack[top - 1]); break;
      case Op::Sqrt: stack[top - 1] = std::sqrt(stack[top - 1]); break;
      case Op::Add: --top; stack[top - 1] += stack[top]; break;
      case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
      case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
      case Op::Div:
        --top;
        if (stack[top] == 0.0) throw EvalError("division by zero");
        stack[top - 1] /= stack[top];
        break;
      case Op::Pow: --top; stack[top - 1] = std::pow(stack[top - 1], stack[top]); break;
      case Op::Min: --top; stack[top - 1] = std::min(stack[top - 1], stack[top]); break;
      case Op::Max: --top; stack[top - 1] = std::max(stack[top - 1], stack[top]); break;
    }
  }
  return top ? stack[0] : 0.0;
}

bool is_affine_in_vars(const Node& node, const Resolver& resolve) { return var_degree(node, resolve) <= 1; }

Guard Guard::compile(const Node& node, const Resolver& resolve) {
  Guard guard;
  if (node.kind == NodeKind::Ident && node.name == "true") return guard;
  to_dnf(node, resolve, guard.clauses_);
  return guard;
}

bool Guard::test(double diff, CmpOp op) {
  switch (op) {
    case CmpOp::Less: return diff < -kTolerance;
    case CmpOp::LessEq: return diff <= kTolerance;
    case CmpOp::Greater: return diff > kTolerance;
    case CmpOp::GreaterEq: return diff >= -kTolerance;
    case CmpOp::Equal: return std::fabs(diff) <= kTolerance;
  }
  return false;
}

bool Guard::holds(const Env& env) const {
  if (clauses_.empty()) return true;
  for (const auto& clause : clauses_) {
    bool ok = true;
    for (const auto& c : clause) {
      if (!test(c.diff.eval(env), c.op)) {
        ok = false;
        break;
      }
    }
    if (ok) return true;
  }
  return false;
}

}  // namespace osctune::expr
