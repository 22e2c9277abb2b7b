#include <gtest/gtest.h>

#include <cmath>

#include "stablesde/errors.hpp"
#include "stablesde/expr.hpp"
#include "stablesde/random.hpp"

using namespace stablesde;

namespace {

std::set<std::string> vars(std::initializer_list<const char*> names) { return {names.begin(), names.end()}; }

// Random tree over {x, a, b}; `allow_abs` keeps the differentiable subset.
ExprPtr random_expr(Stream& rng, int depth, bool allow_abs) {
  const double r = rng.uniform();
  if (depth == 0 || r < 0.25) {
    if (rng.uniform() < 0.5) return make_constant(std::round((rng.uniform() * 6.0 - 3.0) * 100.0) / 100.0);
    static const char* names[] = {"x", "a", "b"};
    return make_variable(names[static_cast<int>(rng.uniform() * 3.0)]);
  }
  if (r < 0.5) {
    std::vector<Op> ops{Op::neg, Op::exp, Op::log, Op::cos, Op::sin, Op::tanh, Op::sqrt};
    if (allow_abs) ops.push_back(Op::abs);
    return make_unary(ops[static_cast<std::size_t>(rng.uniform() * ops.size())], random_expr(rng, depth - 1, allow_abs));
  }
  const Op ops[] = {Op::add, Op::sub, Op::mul, Op::div, Op::pow};
  const Op op = ops[static_cast<int>(rng.uniform() * 5.0)];
  if (op == Op::pow) return make_binary(op, random_expr(rng, depth - 1, allow_abs), make_constant(2.0));
  return make_binary(op, random_expr(rng, depth - 1, allow_abs), random_expr(rng, depth - 1, allow_abs));
}

}  // namespace

TEST(Parse, DriftExampleTree) {
  const auto e = parse_expr("alpha1*(x-alpha2)", vars({"x", "alpha1", "alpha2"}));
  ASSERT_EQ(e->op, Op::mul);
  EXPECT_EQ(e->lhs->op, Op::variable);
  EXPECT_EQ(e->lhs->name, "alpha1");
  ASSERT_EQ(e->rhs->op, Op::sub);
  EXPECT_EQ(e->rhs->lhs->name, "x");
  EXPECT_EQ(e->rhs->rhs->name, "alpha2");
}

TEST(Parse, Precedence) {
  EXPECT_EQ(eval_expr(parse_expr("1+2*3", {}), {}), 7.0);
  EXPECT_EQ(eval_expr(parse_expr("2^3^2", {}), {}), 512.0);  // right associative
  EXPECT_EQ(eval_expr(parse_expr("-2^2", {}), {}), -4.0);    // ^ binds tighter than unary minus
  EXPECT_EQ(eval_expr(parse_expr("8/2/2", {}), {}), 2.0);    // left associative
  EXPECT_EQ(eval_expr(parse_expr("1-2-3", {}), {}), -4.0);
  EXPECT_EQ(eval_expr(parse_expr("2*-3", {}), {}), -6.0);
  EXPECT_EQ(eval_expr(parse_expr("1.5e2 + .5", {}), {}), 150.5);
}

TEST(Parse, UndeclaredIdentifier) {
  try {
    parse_expr("exp(gamma*cos(x))", vars({"x"}));
    FAIL();
  } catch (const UndeclaredIdentifier& e) {
    EXPECT_EQ(e.name(), "gamma");
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(Parse, SyntaxErrorsCarryOffsets) {
  const char* bad[] = {"", "1+", "(1", "1)", "2**3", "1 2", "x.y", "cos()", "exp(1"};
  for (const char* b : bad) {
    EXPECT_THROW(parse_expr(b, vars({"x"})), ParseError) << b;
  }
  try {
    parse_expr("1+*2", {});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 2u);
  }
}

TEST(Eval, Examples) {
  const auto scale = parse_expr("exp(g*cos(x))", vars({"g", "x"}));
  EXPECT_EQ(eval_expr(scale, {{"g", 0.0}, {"x", 1.3}}), 1.0);
  const auto drift = parse_expr("a1*(x-a2)", vars({"a1", "a2", "x"}));
  EXPECT_EQ(eval_expr(drift, {{"a1", 2.0}, {"a2", 1.0}, {"x", 3.0}}), 4.0);
  EXPECT_THROW(eval_expr(parse_expr("log(x)", vars({"x"})), {{"x", -1.0}}), EvalError);
}

TEST(Eval, DomainErrorsNameTheNode) {
  try {
    eval_expr(parse_expr("1 + log(x)", vars({"x"})), {{"x", 0.0}});
    FAIL();
  } catch (const EvalError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
  EXPECT_THROW(eval_expr(parse_expr("1/x", vars({"x"})), {{"x", 0.0}}), EvalError);
  EXPECT_THROW(eval_expr(parse_expr("sqrt(x)", vars({"x"})), {{"x", -1.0}}), EvalError);
  EXPECT_THROW(eval_expr(parse_expr("x", vars({"x"})), {}), DomainError);
}

TEST(Diff, Examples) {
  const auto c = parse_expr("exp(gamma*cos(x))", vars({"gamma", "x"}));
  const auto dc = diff_expr(c, "gamma");
  const auto expected = parse_expr("cos(x)*exp(gamma*cos(x))", vars({"gamma", "x"}));
  EXPECT_TRUE(structurally_equal(dc, expected)) << print_expr(dc);

  const auto a = parse_expr("alpha1*(x-alpha2)", vars({"alpha1", "alpha2", "x"}));
  const auto da = diff_expr(a, "alpha2");
  EXPECT_TRUE(structurally_equal(da, parse_expr("-alpha1", vars({"alpha1"})))) << print_expr(da);

  const auto d5 = diff_expr(parse_expr("5", {}), "x");
  ASSERT_EQ(d5->op, Op::constant);
  EXPECT_EQ(d5->value, 0.0);
}

TEST(Diff, AbsKinkIsAnEvaluationError) {
  const auto d = diff_expr(parse_expr("abs(x)", vars({"x"})), "x");
  EXPECT_EQ(eval_expr(d, {{"x", 2.0}}), 1.0);
  EXPECT_EQ(eval_expr(d, {{"x", -2.0}}), -1.0);
  EXPECT_THROW(eval_expr(d, {{"x", 0.0}}), EvalError);
}

TEST(Diff, MatchesFiniteDifferencesOnRandomTrees) {
  Stream rng(2024);
  int checked = 0;
  for (int t = 0; t < 300; ++t) {
    const auto e = random_expr(rng, 4, false);
    const auto de = diff_expr(e, "x");
    for (int k = 0; k < 100; ++k) {
      const double x = rng.uniform() * 2.0 + 0.5;
      Bindings b{{"x", x}, {"a", rng.uniform() + 0.5}, {"b", rng.uniform() + 0.5}};
      try {
        const double h = 1e-6 * std::max(1.0, std::abs(x));
        Bindings lo = b, hi = b;
        lo["x"] = x - h;
        hi["x"] = x + h;
        const double f0 = eval_expr(e, b), fl = eval_expr(e, lo), fh = eval_expr(e, hi);
        const double fd = (fh - fl) / (2 * h);
        const double an = eval_expr(de, b);
        if (!std::isfinite(f0) || !std::isfinite(fd) || !std::isfinite(an) || std::abs(f0) > 1e6) continue;
        // Skip points where the second derivative makes the difference quotient unreliable.
        const double curv = std::abs(fh - 2 * f0 + fl) / (h * h);
        if (curv * h > 1e-4 * std::max(1.0, std::abs(fd))) continue;
        EXPECT_NEAR(an, fd, 1e-6 * std::max(1.0, std::abs(fd))) << print_expr(e) << " at x=" << x;
        ++checked;
      } catch (const EvalError&) {
      }
    }
  }
  EXPECT_GT(checked, 5000);
}

TEST(Print, RoundTripsRandomTrees) {
  Stream rng(77);
  for (int t = 0; t < 2000; ++t) {
    const auto e = random_expr(rng, 8, true);
    const std::string s = print_expr(e);
    const auto back = parse_expr(s, vars({"x", "a", "b"}));
    EXPECT_TRUE(structurally_equal(e, back)) << s;
    EXPECT_EQ(print_expr(back), s);
  }
}

TEST(Print, CanonicalForms) {
  EXPECT_EQ(print_expr(parse_expr("alpha1*(x-alpha2)", vars({"x", "alpha1", "alpha2"}))), "(alpha1*(x-alpha2))");
  EXPECT_EQ(print_expr(parse_expr("-2", {})), "(-2)");
  EXPECT_EQ(print_expr(parse_expr("0.1", {})), "0.1");
}

TEST(Compiled, AgreesWithTreeWalk) {
  Stream rng(5);
  const std::vector<std::string> slots{"x", "a", "b"};
  for (int t = 0; t < 500; ++t) {
    const auto e = random_expr(rng, 6, true);
    const CompiledExpr c(e, slots);
    const double v[3] = {rng.uniform() + 0.5, rng.uniform(), rng.uniform() + 1.0};
    double tree = 0.0, comp = 0.0;
    bool tree_err = false, comp_err = false;
    try {
      tree = eval_expr(e, {{"x", v[0]}, {"a", v[1]}, {"b", v[2]}});
    } catch (const EvalError&) {
      tree_err = true;
    }
    try {
      comp = c.eval(v);
    } catch (const EvalError&) {
      comp_err = true;
    }
    EXPECT_EQ(tree_err, comp_err) << print_expr(e);
    if (!tree_err && !comp_err && !std::isnan(tree)) EXPECT_EQ(tree, comp) << print_expr(e);
  }
}

TEST(FreeVariables, Collects) {
  const auto e = parse_expr("a*x + exp(b)", vars({"a", "b", "x"}));
  EXPECT_EQ(free_variables(e), vars({"a", "b", "x"}));
}
