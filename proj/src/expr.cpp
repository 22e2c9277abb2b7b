#include "stablesde/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <functional>

#include "stablesde/errors.hpp"

namespace stablesde {

namespace {

struct FunctionName {
  const char* name;
  Op op;
};

constexpr std::array<FunctionName, 7> kFunctions{{
    {"exp", Op::exp},
    {"log", Op::log},
    {"cos", Op::cos},
    {"sin", Op::sin},
    {"tanh", Op::tanh},
    {"sqrt", Op::sqrt},
    {"abs", Op::abs},
}};

bool is_const(const ExprPtr& e, double v) { return e->op == Op::constant && e->value == v; }

class Parser {
 public:
  Parser(std::string_view text, const std::set<std::string>& allowed) : s_(text), allowed_(allowed) {}

  ExprPtr parse() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("empty expression", pos_);
    ExprPtr e = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError(std::string("unexpected '") + s_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r'))
      ++pos_;
  }
  bool peek(char c) {
    skip();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  ExprPtr expr() {
    ExprPtr lhs = term();
    while (true) {
      skip();
      if (pos_ >= s_.size() || (s_[pos_] != '+' && s_[pos_] != '-')) return lhs;
      const std::size_t at = pos_;
      const Op op = s_[pos_++] == '+' ? Op::add : Op::sub;
      lhs = make_binary(op, lhs, term(), at);
    }
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    while (true) {
      skip();
      if (pos_ >= s_.size() || (s_[pos_] != '*' && s_[pos_] != '/')) return lhs;
      const std::size_t at = pos_;
      const Op op = s_[pos_++] == '*' ? Op::mul : Op::div;
      lhs = make_binary(op, lhs, unary(), at);
    }
  }

  ExprPtr unary() {
    skip();
    if (pos_ < s_.size() && s_[pos_] == '-') {
      const std::size_t at = pos_++;
      skip();
      const bool literal = pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.');
      ExprPtr operand = literal ? power() : unary();
      // A minus directly on a bare literal is part of the literal.
      if (literal && operand->op == Op::constant) return make_constant(-operand->value, at);
      return make_unary(Op::neg, operand, at);
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr base = primary();
    skip();
    if (pos_ < s_.size() && s_[pos_] == '^') {
      const std::size_t at = pos_++;
      return make_binary(Op::pow, base, unary(), at);
    }
    return base;
  }

  ExprPtr primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = s_[pos_];
    const std::size_t at = pos_;
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) ++end;
      std::string name(s_.substr(pos_, end - pos_));
      pos_ = end;
      for (const auto& f : kFunctions) {
        if (name == f.name && peek('(')) {
          ++pos_;
          ExprPtr arg = expr();
          if (!peek(')')) throw ParseError("expected ')'", pos_);
          ++pos_;
          return make_unary(f.op, arg, at);
        }
      }
      if (!allowed_.count(name)) throw UndeclaredIdentifier(name, at);
      return make_variable(std::move(name), at);
    }
    if (c == '(') {
      ++pos_;
      ExprPtr inner = expr();
      if (!peek(')')) throw ParseError("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  ExprPtr number() {
    const std::size_t at = pos_;
    std::size_t end = pos_;
    auto digits = [&] {
      while (end < s_.size() && std::isdigit(static_cast<unsigned char>(s_[end]))) ++end;
    };
    digits();
    if (end < s_.size() && s_[end] == '.') {
      ++end;
      digits();
    }
    if (end < s_.size() && (s_[end] == 'e' || s_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < s_.size() && (s_[e] == '+' || s_[e] == '-')) ++e;
      if (e < s_.size() && std::isdigit(static_cast<unsigned char>(s_[e]))) {
        end = e;
        digits();
      }
    }
    double v = 0.0;
    const auto res = std::from_chars(s_.data() + at, s_.data() + end, v);
    if (res.ec != std::errc() || res.ptr != s_.data() + end || !std::isfinite(v))
      throw ParseError("malformed number", at);
    pos_ = end;
    return make_constant(v, at);
  }

  std::string_view s_;
  const std::set<std::string>& allowed_;
  std::size_t pos_ = 0;
};

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

const char* infix(Op op) {
  switch (op) {
    case Op::add: return "+";
    case Op::sub: return "-";
    case Op::mul: return "*";
    case Op::div: return "/";
    case Op::pow: return "^";
    default: return "?";
  }
}

double apply_unary(Op op, double a, std::size_t offset) {
  switch (op) {
    case Op::neg: return -a;
    case Op::exp: return std::exp(a);
    case Op::log:
      if (!(a > 0.0)) throw EvalError("log of nonpositive value", offset);
      return std::log(a);
    case Op::cos: return std::cos(a);
    case Op::sin: return std::sin(a);
    case Op::tanh: return std::tanh(a);
    case Op::sqrt:
      if (a < 0.0) throw EvalError("sqrt of negative value", offset);
      return std::sqrt(a);
    case Op::abs: return std::abs(a);
    default: return std::nan("");
  }
}

double apply_binary(Op op, double a, double b, std::size_t offset) {
  switch (op) {
    case Op::add: return a + b;
    case Op::sub: return a - b;
    case Op::mul: return a * b;
    case Op::div:
      if (b == 0.0) throw EvalError("division by zero", offset);
      return a / b;
    case Op::pow: {
      if (a == 0.0 && b < 0.0) throw EvalError("division by zero in power", offset);
      const double r = std::pow(a, b);
      if (std::isnan(r) && !std::isnan(a) && !std::isnan(b)) throw EvalError("power of negative base", offset);
      return r;
    }
    default: return std::nan("");
  }
}

// Simplifying constructors used by differentiation.
ExprPtr s_neg(const ExprPtr& a);
ExprPtr s_add(const ExprPtr& a, const ExprPtr& b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a->op == Op::constant && b->op == Op::constant) return make_constant(a->value + b->value);
  return make_binary(Op::add, a, b);
}
ExprPtr s_sub(const ExprPtr& a, const ExprPtr& b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return s_neg(b);
  if (a->op == Op::constant && b->op == Op::constant) return make_constant(a->value - b->value);
  return make_binary(Op::sub, a, b);
}
ExprPtr s_mul(const ExprPtr& a, const ExprPtr& b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_constant(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (is_const(b, -1.0)) return s_neg(a);
  if (is_const(a, -1.0)) return s_neg(b);
  if (a->op == Op::constant && b->op == Op::constant) return make_constant(a->value * b->value);
  return make_binary(Op::mul, a, b);
}
ExprPtr s_div(const ExprPtr& a, const ExprPtr& b) {
  if (is_const(a, 0.0)) return make_constant(0.0);
  if (is_const(b, 1.0)) return a;
  return make_binary(Op::div, a, b);
}
ExprPtr s_neg(const ExprPtr& a) {
  if (a->op == Op::constant) return make_constant(-a->value);
  if (a->op == Op::neg) return a->lhs;
  return make_unary(Op::neg, a);
}

}  // namespace

bool is_unary(Op op) noexcept { return op >= Op::neg && op <= Op::abs; }
bool is_binary(Op op) noexcept { return op >= Op::add; }

const char* op_name(Op op) noexcept {
  switch (op) {
    case Op::constant: return "constant";
    case Op::variable: return "variable";
    case Op::neg: return "neg";
    case Op::exp: return "exp";
    case Op::log: return "log";
    case Op::cos: return "cos";
    case Op::sin: return "sin";
    case Op::tanh: return "tanh";
    case Op::sqrt: return "sqrt";
    case Op::abs: return "abs";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::div: return "div";
    case Op::pow: return "pow";
  }
  return "?";
}

ExprPtr make_constant(double v, std::size_t offset) {
  return std::make_shared<const ExprNode>(ExprNode{Op::constant, v, {}, nullptr, nullptr, offset});
}
ExprPtr make_variable(std::string name, std::size_t offset) {
  return std::make_shared<const ExprNode>(ExprNode{Op::variable, 0.0, std::move(name), nullptr, nullptr, offset});
}
ExprPtr make_unary(Op op, ExprPtr a, std::size_t offset) {
  return std::make_shared<const ExprNode>(ExprNode{op, 0.0, {}, std::move(a), nullptr, offset});
}
ExprPtr make_binary(Op op, ExprPtr a, ExprPtr b, std::size_t offset) {
  return std::make_shared<const ExprNode>(ExprNode{op, 0.0, {}, std::move(a), std::move(b), offset});
}

ExprPtr parse_expr(std::string_view text, const std::set<std::string>& allowed_vars) {
  return Parser(text, allowed_vars).parse();
}

std::string print_expr(const ExprPtr& e) {
  switch (e->op) {
    case Op::constant:
      if (std::signbit(e->value)) return "(-" + format_number(-e->value) + ")";
      return format_number(e->value);
    case Op::variable: return e->name;
    case Op::neg: return "(-(" + print_expr(e->lhs) + "))";
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
    case Op::pow:
      return "(" + print_expr(e->lhs) + infix(e->op) + print_expr(e->rhs) + ")";
    default: return std::string(op_name(e->op)) + "(" + print_expr(e->lhs) + ")";
  }
}

bool structurally_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a->op != b->op) return false;
  switch (a->op) {
    case Op::constant:
      return a->value == b->value && std::signbit(a->value) == std::signbit(b->value);
    case Op::variable: return a->name == b->name;
    default:
      if (!structurally_equal(a->lhs, b->lhs)) return false;
      return !is_binary(a->op) || structurally_equal(a->rhs, b->rhs);
  }
}

double eval_expr(const ExprPtr& e, const Bindings& bindings) {
  switch (e->op) {
    case Op::constant: return e->value;
    case Op::variable: {
      const auto it = bindings.find(e->name);
      if (it == bindings.end()) throw DomainError("unbound variable '" + e->name + "'");
      return it->second;
    }
    default:
      if (is_unary(e->op)) return apply_unary(e->op, eval_expr(e->lhs, bindings), e->offset);
      return apply_binary(e->op, eval_expr(e->lhs, bindings), eval_expr(e->rhs, bindings), e->offset);
  }
}

ExprPtr diff_expr(const ExprPtr& e, const std::string& var) {
  const auto& u = e->lhs;
  const auto& v = e->rhs;
  switch (e->op) {
    case Op::constant: return make_constant(0.0);
    case Op::variable: return make_constant(e->name == var ? 1.0 : 0.0);
    case Op::neg: return s_neg(diff_expr(u, var));
    case Op::exp: return s_mul(diff_expr(u, var), e);
    case Op::log: return s_div(diff_expr(u, var), u);
    case Op::cos: return s_neg(s_mul(make_unary(Op::sin, u), diff_expr(u, var)));
    case Op::sin: return s_mul(make_unary(Op::cos, u), diff_expr(u, var));
    case Op::tanh: return s_mul(s_sub(make_constant(1.0), s_mul(e, e)), diff_expr(u, var));
    case Op::sqrt: return s_div(diff_expr(u, var), s_mul(make_constant(2.0), e));
    case Op::abs: return s_div(s_mul(diff_expr(u, var), u), e);
    case Op::add: return s_add(diff_expr(u, var), diff_expr(v, var));
    case Op::sub: return s_sub(diff_expr(u, var), diff_expr(v, var));
    case Op::mul: return s_add(s_mul(diff_expr(u, var), v), s_mul(u, diff_expr(v, var)));
    case Op::div:
      return s_div(s_sub(s_mul(diff_expr(u, var), v), s_mul(u, diff_expr(v, var))), s_mul(v, v));
    case Op::pow: {
      const ExprPtr dv = diff_expr(v, var);
      const ExprPtr du = diff_expr(u, var);
      if (is_const(dv, 0.0)) {
        // d(u^c) = c u^(c-1) u'
        const ExprPtr exponent = v->op == Op::constant ? make_constant(v->value - 1.0)
                                                        : s_sub(v, make_constant(1.0));
        return s_mul(s_mul(v, make_binary(Op::pow, u, exponent)), du);
      }
      // d(u^v) = u^v (v' log u + v u'/u)
      return s_mul(e, s_add(s_mul(dv, make_unary(Op::log, u)), s_div(s_mul(v, du), u)));
    }
  }
  return make_constant(0.0);
}

std::set<std::string> free_variables(const ExprPtr& e) {
  std::set<std::string> out;
  std::function<void(const ExprPtr&)> walk = [&](const ExprPtr& n) {
    if (!n) return;
    if (n->op == Op::variable) out.insert(n->name);
    walk(n->lhs);
    walk(n->rhs);
  };
  walk(e);
  return out;
}

CompiledExpr::CompiledExpr(const ExprPtr& e, const std::vector<std::string>& slots) {
  int depth = 0;
  std::function<void(const ExprPtr&)> emit = [&](const ExprPtr& n) {
    if (n->op == Op::constant) {
      code_.push_back({Op::constant, -1, n->value, n->offset});
      max_depth_ = std::max(max_depth_, ++depth);
      return;
    }
    if (n->op == Op::variable) {
      int slot = -1;
      for (std::size_t i = 0; i < slots.size(); ++i)
        if (slots[i] == n->name) slot = static_cast<int>(i);
      if (slot < 0) throw UndeclaredIdentifier(n->name, n->offset == kNoOffset ? 0 : n->offset);
      code_.push_back({Op::variable, slot, 0.0, n->offset});
      max_depth_ = std::max(max_depth_, ++depth);
      return;
    }
    emit(n->lhs);
    if (is_binary(n->op)) {
      emit(n->rhs);
      --depth;
    }
    code_.push_back({n->op, -1, 0.0, n->offset});
  };
  emit(e);
}

double CompiledExpr::eval(const double* slot_values) const {
  double small[32] = {};
  std::vector<double> big;
  double* st = small;
  if (max_depth_ > 32) {
    big.resize(max_depth_);
    st = big.data();
  }
  int top = -1;
  for (const auto& in : code_) {
    switch (in.op) {
      case Op::constant: st[++top] = in.value; break;
      case Op::variable: st[++top] = slot_values[in.slot]; break;
      case Op::add: --top; st[top] += st[top + 1]; break;
      case Op::sub: --top; st[top] -= st[top + 1]; break;
      case Op::mul: --top; st[top] *= st[top + 1]; break;
      case Op::div:
      case Op::pow:
        --top;
        st[top] = apply_binary(in.op, st[top], st[top + 1], in.offset);
        break;
      default: st[top] = apply_unary(in.op, st[top], in.offset); break;
    }
  }
  return st[0];
}

}  // namespace stablesde
