#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "oracles.hpp"
#include "stablesde/errors.hpp"
#include "stablesde/quasi.hpp"
#include "stablesde/samplers.hpp"
#include "stablesde/stats.hpp"

using namespace stablesde;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

const ModelSpec& ou_cos() {
  static const ModelSpec m("a1*(x-a2)", "exp(g*cos(x))", {"a1", "a2"}, {"g"}, {{-10, 10}, {-10, 10}, {-5, 5}});
  return m;
}

const ModelSpec& const_model() {
  static const ModelSpec m("a", "g", {"a"}, {"g"}, {{-5, 5}, {0.1, 5}});
  return m;
}

const StableLaw& law15() {
  static const StableLaw law(StableIndex(1.5));
  return law;
}

}  // namespace

TEST(Residuals, Examples) {
  // Increments equal to a h exactly give zero residuals.
  const double h = 0.1;
  std::vector<double> x{0.0};
  for (int i = 0; i < 10; ++i) x.push_back(x.back() + 0.7 * h);
  const auto obs = ObservationSet::from_values(x, 1.0);
  for (double e : residuals(const_model(), vec({0.7, 2.0}), obs, StableIndex(1.5)).eps) EXPECT_NEAR(e, 0.0, 1e-15);

  const auto unit = ObservationSet::from_values({0.0, 0.3, -1.2, 4.0}, 3.0);
  const auto r = residuals(const_model(), vec({0.0, 1.0}), unit, StableIndex(1.5));
  EXPECT_EQ(r.eps, (std::vector<double>{0.3, -1.5, 5.2}));
  for (double l : r.log_c) EXPECT_EQ(l, 0.0);
}

TEST(Residuals, AreStableAtTheTruth) {
  const auto th = vec({-3, 1, 0.5});
  const auto obs = simulate_path(ou_cos(), th, StableIndex(1.5), 10000, 1.0, PathConfig{17, 1, 0.0});
  const auto r = residuals(ou_cos(), th, obs, StableIndex(1.5));
  ASSERT_EQ(r.eps.size(), 10000u);
  EXPECT_LT(ks_statistic(r.eps, [](double v) { return law15().cdf(v); }), ks_critical(10000, 0.01));
}

TEST(Residuals, NonpositiveScaleNamesTheIndex) {
  const ModelSpec m("0", "x+g", {}, {"g"}, {{-5, 5}});
  const auto obs = ObservationSet::from_values({1, 2, 0, 3}, 1.0);
  try {
    residuals(m, vec({0.0}), obs, StableIndex(1.5));
    FAIL();
  } catch (const ModelViolation& e) {
    EXPECT_EQ(e.index(), 2u);
  }
}

TEST(QuasiLoglik, CauchyAtZero) {
  const StableLaw cauchy(StableIndex(1.0));
  const auto obs = ObservationSet::from_values({0.0, 0.0}, 1.0);
  EXPECT_NEAR(quasi_loglik(const_model(), vec({0.0, 1.0}), obs, cauchy), -std::log(oracle::kPi), 1e-10);
}

TEST(QuasiLoglik, ConstantCoefficientsGiveTheIidLikelihood) {
  const double a = 0.4, c = 1.7, beta = 1.5;
  const auto obs = simulate_path(const_model(), vec({a, c}), StableIndex(beta), 300, 2.0, PathConfig{5, 1, 0.0});
  const double h = obs.h, s = c * std::pow(h, 1.0 / beta);
  double exact = 0.0;  // density of increments: phi((d - a h) / s) / s
  for (double d : increments(obs)) exact += std::log(stable_pdf((d - a * h) / s, StableIndex(beta)) / s);
  const double with_const =
      quasi_loglik(const_model(), vec({a, c}), obs, law15(), QuasiOptions{true, Backend::serial});
  EXPECT_NEAR(with_const, exact, 1e-7 * std::abs(exact));
  const double without = quasi_loglik(const_model(), vec({a, c}), obs, law15());
  EXPECT_NEAR(with_const - without, -300.0 / beta * std::log(h), 1e-9);
}

TEST(QuasiLoglik, BackendsAgree) {
  const auto th = vec({-3, 1, 0.5});
  const auto obs = simulate_path(ou_cos(), th, StableIndex(1.5), 3000, 1.0, PathConfig{3, 1, 0.0});
  const double s = quasi_loglik(ou_cos(), th, obs, law15(), {false, Backend::serial});
  const double p = quasi_loglik(ou_cos(), th, obs, law15(), {false, Backend::openmp});
  EXPECT_EQ(s, p);
}

TEST(CompleteRatio, Examples) {
  const auto obs = ObservationSet::from_values({0.0, 1.0}, 1.0);
  const ModelSpec loc("a", "1+0*g", {"a"}, {"g"}, {{-5, 5}, {0, 1}});
  EXPECT_DOUBLE_EQ(complete_loglik_ratio(loc, vec({0.0, 0.5}), vec({-0.5, 0.5}), obs, {1.0}, StableIndex(1.5)),
                   -0.625);
  EXPECT_EQ(complete_loglik_ratio(loc, vec({0.0, 0.5}), vec({0.0, 0.5}), obs, {1.0}, StableIndex(1.5)), 0.0);

  // Doubling the scale with zero residuals: -N log 2.
  std::vector<double> x{0.0};
  for (int i = 0; i < 8; ++i) x.push_back(x.back() + 0.3 / 8);
  const auto drift_only = ObservationSet::from_values(x, 1.0);
  EXPECT_NEAR(complete_loglik_ratio(const_model(), vec({0.3, 1.0}), vec({0.3, 2.0}), drift_only,
                                    std::vector<double>(8, 2.5), StableIndex(1.5)),
              -8 * std::log(2.0), 1e-12);
  EXPECT_THROW(complete_loglik_ratio(loc, vec({0.0, 0.5}), vec({0.0, 0.5}), obs, {0.0}, StableIndex(1.5)),
               DomainError);
  EXPECT_THROW(complete_loglik_ratio(loc, vec({0.0, 0.5}), vec({0.0, 0.5}), obs, {1.0, 1.0}, StableIndex(1.5)),
               DomainError);
}

TEST(CompleteVsMarginal, MixtureReproducesTheDensity) {
  // phi(e) = E_V[(2 pi V)^{-1/2} exp(-e^2 / (2V))] with V ~ F_beta.
  for (double e : {0.0, 0.8, 3.0}) {
    Stream rng(101);
    const auto V = sample_positive_stable(StableIndex(1.5), 100000, rng);
    std::vector<double> w;
    w.reserve(V.size());
    for (double v : V) w.push_back(std::exp(-0.5 * e * e / v) / std::sqrt(2 * oracle::kPi * v));
    const MeanSe ms = mean_and_se(w);
    EXPECT_NEAR(ms.mean, law15().pdf(e), 3 * ms.se) << e;
  }
}

TEST(CompleteVsMarginal, ConditionalDrawsGiveTheHarmonicIdentity) {
  // E[1 / p(e | V) | e] = 1 / phi(e) for V drawn from its conditional law.
  const ConditionalVarianceSampler sampler(StableIndex(1.5));
  for (double e : {0.5, 2.0}) {
    Stream rng(202);
    std::vector<double> w(100000);
    for (auto& v : w) {
      const double V = sampler.sample(e, rng);
      v = std::sqrt(2 * oracle::kPi * V) * std::exp(0.5 * e * e / V);
    }
    const MeanSe ms = mean_and_se(w);
    EXPECT_NEAR(ms.mean, 1.0 / law15().pdf(e), 3 * ms.se) << e;
  }
}

TEST(RateMatrix, Examples) {
  const auto D = rate_matrix(100, 0.01, 1.5, 1, 1);
  EXPECT_NEAR(D[0], 2.15443, 1e-5);
  EXPECT_EQ(D[1], 10.0);
  const auto D1 = rate_matrix(400, 0.3, 1.0, 2, 1);
  EXPECT_EQ(D1, Eigen::Vector3d(20, 20, 20));
  EXPECT_EQ(rate_matrix(1, 1.0, 1.7, 2, 2), Eigen::VectorXd::Ones(4));
  EXPECT_THROW(rate_matrix(0, 1.0, 1.5, 1, 1), DomainError);
  EXPECT_THROW(rate_matrix(10, 0.0, 1.5, 1, 1), DomainError);
}

TEST(QuasiScore, ZeroResidualExamples) {
  std::vector<double> x{0.0};
  for (int i = 0; i < 20; ++i) x.push_back(x.back() + 0.25 / 20);
  const auto obs = ObservationSet::from_values(x, 1.0);
  const auto s = quasi_score(const_model(), vec({0.25, 1.6}), obs, law15());
  EXPECT_NEAR(s.score[0], 0.0, 1e-12);
  EXPECT_NEAR(s.score[1], -20 / 1.6, 1e-12);
  const auto D = rate_matrix(20, obs.h, 1.5, 1, 1);
  EXPECT_NEAR(s.delta[1], s.score[1] / D[1], 1e-15);
}

TEST(QuasiScore, MatchesFiniteDifferences) {
  Stream rng(31);
  const ModelSpec m2("a1*sin(x)+a2", "exp(g1+g2*tanh(x))", {"a1", "a2"}, {"g1", "g2"},
                     {{-5, 5}, {-5, 5}, {-2, 2}, {-2, 2}});
  for (int rep = 0; rep < 6; ++rep) {
    const bool first = rep % 2 == 0;
    const ModelSpec& m = first ? ou_cos() : m2;
    Eigen::VectorXd th(m.dim());
    for (Eigen::Index i = 0; i < th.size(); ++i) th[i] = rng.uniform() - 0.5;
    if (first) th[0] = -1.0 - rng.uniform();
    const double beta = 1.1 + 0.8 * rng.uniform();
    const StableLaw law{StableIndex(beta)};
    const auto obs = simulate_path(m, th, StableIndex(beta), 200, 1.0, PathConfig{static_cast<std::uint64_t>(rep), 1, 0.0});
    // Evaluate away from the truth so the score is not near zero.
    Eigen::VectorXd at = th;
    for (Eigen::Index i = 0; i < at.size(); ++i) at[i] += 0.2 * (rng.uniform() - 0.5);
    const auto s = quasi_score(m, at, obs, law);
    for (Eigen::Index i = 0; i < at.size(); ++i) {
      const double step = 1e-5;
      Eigen::VectorXd lo = at, hi = at;
      lo[i] -= step;
      hi[i] += step;
      const double fd = (quasi_loglik(m, hi, obs, law) - quasi_loglik(m, lo, obs, law)) / (2 * step);
      EXPECT_NEAR(s.score[i], fd, 1e-5 * std::max(1.0, std::abs(fd))) << "rep " << rep << " coord " << i;
    }
  }
}

TEST(FisherInfo, ConstantCoefficientExamples) {
  const auto obs = simulate_path(const_model(), vec({0.3, 1.0}), StableIndex(1.0), 50, 1.0, PathConfig{1, 1, 0.0});
  const StableLaw cauchy(StableIndex(1.0));
  const auto info = fisher_info(const_model(), vec({0.3, 1.0}), obs, cauchy);
  EXPECT_NEAR(info.I(0, 0), 0.5, 1e-6);
  EXPECT_NEAR(info.I(1, 1), 0.5, 1e-6);
  EXPECT_EQ(info.I(0, 1), 0.0);
  EXPECT_NEAR(info.I_dag(1, 1), 2.0, 1e-12);
  for (double beta : {1.3, 1.7}) {
    const StableLaw law{StableIndex(beta)};
    const auto o = simulate_path(const_model(), vec({0.3, 1.0}), StableIndex(beta), 50, 1.0, PathConfig{1, 1, 0.0});
    const auto f = fisher_info(const_model(), vec({0.3, 1.0}), o, law);
    EXPECT_NEAR(f.I_dag(1, 1), 2.0, 1e-12);
  }
}

TEST(FisherInfo, DecompositionAndBlockStructure) {
  const auto th = vec({-3, 1, 0.5});
  const auto obs = simulate_path(ou_cos(), th, StableIndex(1.5), 2000, 1.0, PathConfig{8, 1, 0.0});
  const auto info = fisher_info(ou_cos(), th, obs, law15());
  EXPECT_LE((info.I + info.I_star - info.I_dag).cwiseAbs().maxCoeff(), 1e-12);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(info.I(i, 2), 0.0);
    EXPECT_EQ(info.I(2, i), 0.0);
    EXPECT_EQ(info.I_dag(i, 2), 0.0);
  }
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(info.I_star).eigenvalues().minCoeff(), -1e-12);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(info.I).eigenvalues().minCoeff(), 0.0);
  EXPECT_EQ(info.D, rate_matrix(2000, obs.h, 1.5, 2, 1));
  const auto s = quasi_score(ou_cos(), th, obs, law15());
  EXPECT_LE((info.Delta - s.delta).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(QuasiMle, LocationModelRecoversTheCentre) {
  // Increments symmetric about m h.
  const double m = 0.8, h = 0.5;
  const double offs[] = {-1.3, -0.4, 0.0, 0.4, 1.3, -2.0, 2.0};
  std::vector<double> x{0.0};
  for (double o : offs) x.push_back(x.back() + m * h + o);
  const auto obs = ObservationSet::from_values(x, 7 * h);
  const ModelSpec loc("a", "g", {"a"}, {"g"}, {{-5, 5}, {0.1, 5}});
  const auto r = quasi_mle(loc, obs, law15(), vec({0.0, 1.0}));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.theta[0], m, 1e-6);
}

TEST(QuasiMle, NearTheTruthOnSimulatedData) {
  const auto th = vec({-3, 1, 0.5});
  const auto obs = simulate_path(ou_cos(), th, StableIndex(1.5), 2000, 1.0, PathConfig{21, 1, 0.0});
  const auto r = quasi_mle(ou_cos(), obs, law15(), th);
  EXPECT_TRUE(r.converged);
  EXPECT_GE(r.loglik, quasi_loglik(ou_cos(), th, obs, law15()));
  EXPECT_NEAR(r.theta[2], 0.5, 0.15);
  EXPECT_TRUE(ou_cos().in_bounds(r.theta));
}

TEST(NelderMead, RecoversQuadraticArgmax) {
  const Eigen::Vector3d target(0.3, -1.7, 2.2);
  Eigen::Matrix3d A;
  A << 2, 0.5, 0, 0.5, 1, 0.2, 0, 0.2, 3;
  auto f = [&](const Eigen::VectorXd& x) { return -(x - target).dot(A * (x - target)); };
  const auto r = nelder_mead_maximize(f, Eigen::Vector3d(0, 0, 0), {{-5, 5}, {-5, 5}, {-5, 5}});
  EXPECT_TRUE(r.converged);
  EXPECT_LE((r.x - target).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(NelderMead, BoundaryArgmaxStaysInTheBox) {
  auto f = [](const Eigen::VectorXd& x) { return x[0] - x[1] * x[1]; };
  const auto r = nelder_mead_maximize(f, Eigen::Vector2d(0, 0.5), {{-1, 1}, {-1, 1}});
  EXPECT_NEAR(r.x[0], 1.0, 1e-6);
  EXPECT_LE(r.x[0], 1.0);
  EXPECT_NEAR(r.x[1], 0.0, 1e-4);
}

TEST(NelderMead, ExhaustionReturnsBestSoFar) {
  OptimizerConfig cfg;
  cfg.max_iterations = 5;
  cfg.max_restarts = 0;
  auto f = [](const Eigen::VectorXd& x) { return -x.squaredNorm(); };
  const auto r = nelder_mead_maximize(f, Eigen::Vector2d(3, 3), {{-5, 5}, {-5, 5}}, cfg);
  EXPECT_FALSE(r.converged);
  EXPECT_GE(r.value, -18.0);
}

TEST(ReflectIntoBox, Reflects) {
  const std::vector<Interval> box{{0, 1}};
  EXPECT_DOUBLE_EQ(reflect_into_box(Eigen::VectorXd::Constant(1, 1.25), box)[0], 0.75);
  EXPECT_DOUBLE_EQ(reflect_into_box(Eigen::VectorXd::Constant(1, -0.25), box)[0], 0.25);
  EXPECT_DOUBLE_EQ(reflect_into_box(Eigen::VectorXd::Constant(1, 0.5), box)[0], 0.5);
  const double far = reflect_into_box(Eigen::VectorXd::Constant(1, 7.3), box)[0];
  EXPECT_GE(far, 0.0);
  EXPECT_LE(far, 1.0);
}
