#include <gtest/gtest.h>

#include "stablesde/errors.hpp"
#include "stablesde/model.hpp"

using namespace stablesde;

namespace {

ModelSpec ou_cos_model() {
  return ModelSpec("a1*(x-a2)", "exp(g*cos(x))", {"a1", "a2"}, {"g"}, {{-10, 10}, {-10, 10}, {-5, 5}});
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

}  // namespace

TEST(ModelSpec, EvaluatesDriftScaleAndGradients) {
  const auto m = ou_cos_model();
  EXPECT_EQ(m.p_alpha(), 2u);
  EXPECT_EQ(m.p_gamma(), 1u);
  const auto th = vec({2.0, 1.0, 0.3});
  EXPECT_DOUBLE_EQ(m.drift_at(3.0, th), 4.0);
  EXPECT_DOUBLE_EQ(m.scale_at(0.7, th), std::exp(0.3 * std::cos(0.7)));
  double ga[2], gg[1];
  m.drift_grad_at(3.0, th, ga);
  EXPECT_DOUBLE_EQ(ga[0], 2.0);
  EXPECT_DOUBLE_EQ(ga[1], -2.0);
  m.scale_grad_at(0.7, th, gg);
  EXPECT_DOUBLE_EQ(gg[0], std::cos(0.7) * std::exp(0.3 * std::cos(0.7)));
  EXPECT_EQ(m.param_names(), (std::vector<std::string>{"a1", "a2", "g"}));
}

TEST(ModelSpec, DriftMayHaveNoParameters) {
  const ModelSpec m("0", "g", {}, {"g"}, {{0.1, 5}});
  EXPECT_EQ(m.dim(), 1u);
  EXPECT_EQ(m.drift_at(1.0, vec({2.0})), 0.0);
}

TEST(ModelSpec, RejectsMalformedDeclarations) {
  EXPECT_THROW(ModelSpec("a", "1", {"a"}, {}, {{0, 1}}), ConfigError);
  EXPECT_THROW(ModelSpec("a", "g", {"a"}, {"a"}, {{0, 1}, {0, 1}}), ConfigError);
  EXPECT_THROW(ModelSpec("x", "g", {"x"}, {"g"}, {{0, 1}, {0, 1}}), ConfigError);
  EXPECT_THROW(ModelSpec("a", "g", {"a"}, {"g"}, {{0, 1}}), ConfigError);
  EXPECT_THROW(ModelSpec("a", "g", {"a"}, {"g"}, {{0, 1}, {1, 1}}), ConfigError);
  EXPECT_THROW(ModelSpec("a", "g", {"a"}, {"g"}, {{0, 1}, {0, INFINITY}}), ConfigError);
  // Drift may not see scale parameters and vice versa.
  EXPECT_THROW(ModelSpec("g*x", "g", {"a"}, {"g"}, {{0, 1}, {0, 1}}), UndeclaredIdentifier);
  EXPECT_THROW(ModelSpec("a", "a*g", {"a"}, {"g"}, {{0, 1}, {0, 1}}), UndeclaredIdentifier);
}

TEST(ModelSpec, BoundsAreClosed) {
  const auto m = ou_cos_model();
  EXPECT_TRUE(m.in_bounds(vec({10, -10, 5})));
  EXPECT_TRUE(m.in_bounds(vec({0, 0, 0})));
  EXPECT_FALSE(m.in_bounds(vec({10.0000001, 0, 0})));
  EXPECT_FALSE(m.in_bounds(vec({0, 0, NAN})));
  EXPECT_FALSE(m.in_bounds(vec({0, 0})));
  EXPECT_NO_THROW(m.check_bounds(vec({0, 0, 0})));
  try {
    m.check_bounds(vec({0, 0, -6}));
    FAIL();
  } catch (const ModelViolation& e) {
    EXPECT_EQ(e.index(), 2u);
  }
}

TEST(ValidateModel, ExponentialScalePasses) {
  const auto m = ou_cos_model();
  std::vector<double> grid;
  for (int i = -50; i <= 50; ++i) grid.push_back(i * 0.2);
  const auto r = validate_model(m, {vec({1, 1, -5}), vec({1, 1, 5}), vec({0, 0, 0})}, grid);
  EXPECT_TRUE(r.passed);
  EXPECT_TRUE(r.violations.empty());
}

TEST(ValidateModel, NonpositiveScaleIsReported) {
  const ModelSpec m("0", "x+g", {}, {"g"}, {{-1, 1}});
  const auto r = validate_model(m, {vec({0.0})}, {-1.0, 0.5, 2.0});
  EXPECT_FALSE(r.passed);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].x, -1.0);
  EXPECT_EQ(r.violations[0].probe, 0u);
}

TEST(ValidateModel, DriftEvaluationFailureIsReported) {
  const ModelSpec m("log(x-a2)", "exp(g)", {"a2"}, {"g"}, {{-5, 5}, {-1, 1}});
  const auto r = validate_model(m, {vec({1.0, 0.0})}, {0.0, 1.0, 2.0});
  EXPECT_FALSE(r.passed);
  ASSERT_EQ(r.violations.size(), 2u);
  EXPECT_EQ(r.violations[0].x, 0.0);
  EXPECT_EQ(r.violations[1].x, 1.0);
  EXPECT_NE(r.violations[0].what.find("drift"), std::string::npos);
}

TEST(ValidateModel, EmptyGridsAreRejected) {
  const auto m = ou_cos_model();
  EXPECT_THROW(validate_model(m, {}, {0.0}), DomainError);
  EXPECT_THROW(validate_model(m, {vec({0, 0, 0})}, {}), DomainError);
}
