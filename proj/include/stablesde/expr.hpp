#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace stablesde {

enum class Op : unsigned char {
  constant,
  variable,
  neg,
  exp,
  log,
  cos,
  sin,
  tanh,
  sqrt,
  abs,
  add,
  sub,
  mul,
  div,
  pow,
};

inline constexpr std::size_t kNoOffset = static_cast<std::size_t>(-1);

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

/// Immutable expression tree node. `offset` is the byte offset in the source
/// text (kNoOffset for nodes synthesized by differentiation).
struct ExprNode {
  Op op;
  double value = 0.0;  // constant
  std::string name;    // variable
  ExprPtr lhs;         // unary operand or left operand
  ExprPtr rhs;         // right operand
  std::size_t offset = kNoOffset;
};

bool is_unary(Op op) noexcept;
bool is_binary(Op op) noexcept;
const char* op_name(Op op) noexcept;

ExprPtr make_constant(double v, std::size_t offset = kNoOffset);
ExprPtr make_variable(std::string name, std::size_t offset = kNoOffset);
ExprPtr make_unary(Op op, ExprPtr a, std::size_t offset = kNoOffset);
ExprPtr make_binary(Op op, ExprPtr a, ExprPtr b, std::size_t offset = kNoOffset);

/// Parse `text` against the grammar documented in README.md. Identifiers
/// other than the function names must appear in `allowed_vars`.
ExprPtr parse_expr(std::string_view text, const std::set<std::string>& allowed_vars);

/// Canonical, fully parenthesized form; parse(print(e)) reproduces e.
std::string print_expr(const ExprPtr& e);

bool structurally_equal(const ExprPtr& a, const ExprPtr& b);

using Bindings = std::map<std::string, double, std::less<>>;

/// Tree-walking evaluation. Throws EvalError on domain violations and
/// DomainError for unbound variables.
double eval_expr(const ExprPtr& e, const Bindings& bindings);

/// Symbolic derivative with light algebraic simplification.
ExprPtr diff_expr(const ExprPtr& e, const std::string& var);

/// Variables referenced by `e`.
std::set<std::string> free_variables(const ExprPtr& e);

/// Postfix program over a fixed variable layout, for evaluation in hot loops.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  /// `slots` names the variables in the order their values are passed to eval.
  CompiledExpr(const ExprPtr& e, const std::vector<std::string>& slots);

  double eval(const double* slot_values) const;

 private:
  struct Instr {
    Op op;
    int slot;
    double value;
    std::size_t offset;
  };
  std::vector<Instr> code_;
  int max_depth_ = 0;
};

}  // namespace stablesde
