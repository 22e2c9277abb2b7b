#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "stablesde/errors.hpp"
#include "stablesde/simulate.hpp"
#include "stablesde/stats.hpp"

using namespace stablesde;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out[i++] = d;
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  return v[static_cast<std::size_t>(p * (v.size() - 1))];
}

}  // namespace

TEST(SimulatePath, SingleStepIsOneStableDraw) {
  const ModelSpec m("0*x", "g", {}, {"g"}, {{0.5, 2}});
  for (double beta : {1.0, 1.5, 1.9}) {
    const StableLaw law{StableIndex(beta)};
    std::vector<double> d;
    for (std::uint64_t s = 0; s < 10000; ++s) {
      const auto obs = simulate_path(m, vec({1.0}), StableIndex(beta), 1, 1.0, PathConfig{s, 1, 0.0});
      d.push_back(obs.values[1] - obs.values[0]);
    }
    EXPECT_LT(ks_statistic(d, [&](double v) { return law.cdf(v); }), ks_critical(d.size(), 0.01)) << beta;
  }
}

TEST(SimulatePath, IncrementsHaveTheScaledStableLaw) {
  // Constant coefficients: (dX - a h) / (c h^{1/beta}) is standard stable.
  const double beta = 1.5, a = 0.7, c = 1.3, T = 2.0;
  const std::size_t N = 10000;
  const ModelSpec m("a", "g", {"a"}, {"g"}, {{-1, 1}, {0.1, 2}});
  const auto obs = simulate_path(m, vec({a, c}), StableIndex(beta), N, T, PathConfig{11, 1, 0.5});
  const double h = T / N;
  std::vector<double> z;
  for (double d : increments(obs)) z.push_back((d - a * h) / (c * std::pow(h, 1.0 / beta)));
  const StableLaw law{StableIndex(beta)};
  EXPECT_LT(ks_statistic(z, [&](double v) { return law.cdf(v); }), ks_critical(z.size(), 0.01));
}

TEST(SimulatePath, DeterministicGivenSeed) {
  const ModelSpec m("a1*(x-a2)", "exp(g*cos(x))", {"a1", "a2"}, {"g"}, {{-10, 10}, {-10, 10}, {-5, 5}});
  const auto th = vec({-3, 1, 0.5});
  const auto p1 = simulate_path(m, th, StableIndex(1.5), 500, 1.0, PathConfig{42, 1, 0.0});
  const auto p2 = simulate_path(m, th, StableIndex(1.5), 500, 1.0, PathConfig{42, 1, 0.0});
  const auto p3 = simulate_path(m, th, StableIndex(1.5), 500, 1.0, PathConfig{43, 1, 0.0});
  EXPECT_EQ(p1.values, p2.values);
  EXPECT_NE(p1.values, p3.values);
  EXPECT_EQ(p1.values.size(), 501u);
  EXPECT_EQ(p1.N, 500u);
  EXPECT_EQ(p1.h, 1.0 / 500);
}

TEST(SimulatePath, MedianDriftOverReplicates) {
  const ModelSpec m("a", "g", {"a"}, {"g"}, {{-5, 5}, {0.1, 5}});
  std::vector<double> d;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto obs = simulate_path(m, vec({1.0, 1.0}), StableIndex(1.5), 100, 1.0, PathConfig{s, 1, 0.0});
    d.push_back(obs.values.back() - obs.values.front() - 1.0);
  }
  const double med = median(d);
  EXPECT_GT(med, -0.05);
  EXPECT_LT(med, 0.05);
}

TEST(SimulatePath, StepHIsExactlyTOverN) {
  const ModelSpec m("0", "g", {}, {"g"}, {{0.5, 2}});
  for (std::size_t N : {10u, 100u, 1000u, 10000u}) {
    const auto obs = simulate_path(m, vec({1.0}), StableIndex(1.5), N, 1.0, PathConfig{1, 1, 0.0});
    EXPECT_EQ(obs.h, 1.0 / static_cast<double>(N));
    EXPECT_NEAR(obs.h * static_cast<double>(N), 1.0, 1e-15);
  }
}

TEST(SimulatePath, RefinementKeepsQuartilesClose) {
  const ModelSpec m("a1*(x-a2)", "exp(g*cos(x))", {"a1", "a2"}, {"g"}, {{-10, 10}, {-10, 10}, {-5, 5}});
  const auto th = vec({-3, 1, 0.5});
  std::vector<double> coarse, fine;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    coarse.push_back(simulate_path(m, th, StableIndex(1.5), 20, 1.0, PathConfig{s, 1, 0.0}).values.back());
    const auto f = simulate_path(m, th, StableIndex(1.5), 20, 1.0, PathConfig{s, 16, 0.0});
    EXPECT_EQ(f.values.size(), 21u);
    fine.push_back(f.values.back());
  }
  for (double p : {0.25, 0.5, 0.75}) EXPECT_NEAR(quantile(coarse, p), quantile(fine, p), 0.15) << p;
}

TEST(SimulatePath, RejectsBadArguments) {
  const ModelSpec m("0", "g", {}, {"g"}, {{0.5, 2}});
  EXPECT_THROW(simulate_path(m, vec({3.0}), StableIndex(1.5), 10, 1.0, PathConfig{}), ModelViolation);
  EXPECT_THROW(simulate_path(m, vec({1.0}), StableIndex(1.5), 0, 1.0, PathConfig{}), DomainError);
  EXPECT_THROW(simulate_path(m, vec({1.0}), StableIndex(1.5), 10, 0.0, PathConfig{}), DomainError);
  EXPECT_THROW(simulate_path(m, vec({1.0}), StableIndex(1.5), 10, 1.0, PathConfig{0, 0, 0.0}), DomainError);
}

TEST(SimulatePath, ExplosionReportsTheStep) {
  const ModelSpec m("a*x", "g", {"a"}, {"g"}, {{0, 1e6}, {0.1, 2}});
  try {
    simulate_path(m, vec({1e5, 1.0}), StableIndex(1.5), 100, 1.0, PathConfig{3, 1, 1.0});
    FAIL();
  } catch (const SimulationFailure& e) {
    EXPECT_GT(e.step(), 0u);
    EXPECT_LE(e.step(), 100u);
  }
}

TEST(Increments, Examples) {
  const auto obs = ObservationSet::from_values({0, 1, 3}, 1.0);
  EXPECT_EQ(increments(obs), (std::vector<double>{1, 2}));
  const auto flat = ObservationSet::from_values({2, 2, 2, 2}, 3.0);
  EXPECT_EQ(increments(flat), (std::vector<double>{0, 0, 0}));
  EXPECT_EQ(flat.h, 1.0);
  EXPECT_THROW(ObservationSet::from_values({1.0}, 1.0), DomainError);
  EXPECT_THROW(ObservationSet::from_values({1.0, NAN}, 1.0), DomainError);
}
