#include "stablesde/samplers.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <string>

#include "stablesde/errors.hpp"

namespace stablesde {

namespace {

constexpr double kPi = std::numbers::pi;

// log A(u) in Zolotarev's representation of the one-sided stable law.
double log_zolotarev(double u, double alpha) {
  const double sa = std::sin(alpha * u);
  return (std::log(sa) - std::log(std::sin(u))) / (1.0 - alpha) +
         std::log(std::sin((1.0 - alpha) * u)) - std::log(sa);
}

template <class F>
double integrate_0_pi(F f, double tol = 1e-11) {
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  return gauss_kronrod<double, 31>::integrate(f, 0.0, kPi, 15, tol, &err);
}

}  // namespace

double draw_symmetric_stable(double beta, Stream& rng) {
  const double u = kPi * (rng.uniform() - 0.5);
  const double e = rng.exponential();
  if (beta == 1.0) return std::tan(u);
  return std::sin(beta * u) / std::pow(std::cos(u), 1.0 / beta) *
         std::pow(std::cos((1.0 - beta) * u) / e, (1.0 - beta) / beta);
}

double draw_positive_stable(double beta, Stream& rng, double* log_v) {
  const double a = 0.5 * beta;
  const double u = kPi * rng.uniform();
  const double e = rng.exponential();
  const double ls = std::log(std::sin(a * u)) - std::log(std::sin(u)) / a +
                    (1.0 - a) / a * (std::log(std::sin((1.0 - a) * u)) - std::log(e));
  const double lv = ls + std::numbers::ln2;
  if (log_v) *log_v = lv;
  return std::exp(lv);
}

std::vector<double> sample_symmetric_stable(StableIndex beta, std::size_t n, Stream& rng) {
  if (n < 1) throw DomainError("sample size must be at least 1");
  std::vector<double> out(n);
  for (auto& x : out) x = draw_symmetric_stable(beta, rng);
  return out;
}

std::vector<double> sample_positive_stable(StableIndex beta, std::size_t n, Stream& rng) {
  if (n < 1) throw DomainError("sample size must be at least 1");
  std::vector<double> out(n);
  for (auto& v : out) v = draw_positive_stable(beta, rng);
  return out;
}

double one_sided_stable_cdf(double s, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("one-sided stable index must lie in (0, 1)");
  if (!(s > 0.0)) return 0.0;
  if (std::isinf(s)) return 1.0;
  const double kappa = alpha / (1.0 - alpha);
  const double ls = std::log(s);
  return integrate_0_pi([&](double u) { return std::exp(-std::exp(log_zolotarev(u, alpha) - kappa * ls)); }) / kPi;
}

double one_sided_stable_pdf(double s, double alpha) { return one_sided_stable_pdf(s, alpha, 1e-11); }

double one_sided_stable_pdf(double s, double alpha, double tol) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("one-sided stable index must lie in (0, 1)");
  if (!(s > 0.0) || std::isinf(s)) return 0.0;
  const double kappa = alpha / (1.0 - alpha);
  const double ls = std::log(s);
  return integrate_0_pi([&](double u) {
           const double z = log_zolotarev(u, alpha) - kappa * ls;
           return std::exp(z - std::exp(z));
         }, tol) * kappa / (s * kPi);
}

void ConditionalSamplerConfig::validate() const {
  if (!(small_x_threshold > 0.0)) throw ConfigError("small_x_threshold must be positive");
  if (grid_size < 256) throw ConfigError("grid_size must be at least 256");
  if (max_rejections < 1) throw ConfigError("max_rejections must be at least 1");
}

ConditionalVarianceSampler::ConditionalVarianceSampler(StableIndex beta, ConditionalSamplerConfig cfg)
    : beta_(beta), cfg_(cfg) {
  cfg_.validate();
  const double alpha = 0.5 * beta_;

  // Quantiles of S by bisection in log s.
  auto log_quantile = [&](double p) {
    double lo = -60.0, hi = 80.0;
    for (int i = 0; i < 200 && hi - lo > 1e-7; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (one_sided_stable_cdf(std::exp(mid), alpha) < p) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double ls_lo = log_quantile(1e-8);
  const double ls_hi = log_quantile(1.0 - 1e-8);

  // Grid over log v = log s + log 2; mass per unit log v is
  // v^{-1/2} f_V(v) v = v^{1/2} f_S(v/2) / 2.
  const int n = cfg_.grid_size;
  log_v_.resize(n);
  std::vector<double> dens(n);
  for (int i = 0; i < n; ++i) {
    const double ls = ls_lo + (ls_hi - ls_lo) * i / (n - 1);
    log_v_[i] = ls + std::numbers::ln2;
    const double v = std::exp(log_v_[i]);
    dens[i] = std::sqrt(v) * 0.5 * one_sided_stable_pdf(std::exp(ls), alpha, 1e-8);
  }
  cum_.assign(n, 0.0);
  for (int i = 1; i < n; ++i)
    cum_[i] = cum_[i - 1] + 0.5 * (dens[i] + dens[i - 1]) * (log_v_[i] - log_v_[i - 1]);
  const double total = cum_.back();
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericalFailure("conditional sampler grid has no mass", 0.0);
  for (auto& c : cum_) c /= total;
}

double ConditionalVarianceSampler::log_acceptance(double x, double v) const {
  const double ax = std::abs(x);
  const double lv = std::log(v);
  if (cfg_.mode == EnvelopeMode::exact_bound)
    return std::log(ax) - 0.5 * lv - ax * ax / (2.0 * v) + 0.5;
  return 0.5 * std::log(ax) + 0.5 * ax - 0.5 * lv - ax * ax / (2.0 * v);
}

double ConditionalVarianceSampler::sample_grid(double x, Stream& rng) const {
  const double half_x2 = 0.5 * x * x;
  for (long attempt = 0; attempt < cfg_.max_rejections; ++attempt) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    const std::size_t i = std::clamp<std::size_t>(it - cum_.begin(), 1, cum_.size() - 1) - 1;
    const double span = cum_[i + 1] - cum_[i];
    const double frac = span > 0.0 ? (u - cum_[i]) / span : 0.5;
    const double v = std::exp(log_v_[i] + frac * (log_v_[i + 1] - log_v_[i]));
    if (half_x2 == 0.0 || rng.uniform() < std::exp(-half_x2 / v)) return v;
  }
  throw SamplerStall(x, cfg_.max_rejections);
}

double ConditionalVarianceSampler::sample(double x, Stream& rng) const {
  if (!std::isfinite(x)) throw DomainError("conditional sampler needs a finite residual");
  const double ax = std::abs(x);
  if (ax < cfg_.small_x_threshold) return sample_grid(x, rng);
  const double half_x2 = 0.5 * ax * ax;
  const bool exact = cfg_.mode == EnvelopeMode::exact_bound;
  const double offset = exact ? std::log(ax) + 0.5 : 0.5 * std::log(ax) + 0.5 * ax;
  for (long attempt = 0; attempt < cfg_.max_rejections; ++attempt) {
    double lv;
    const double v = draw_positive_stable(beta_, rng, &lv);
    const double la = offset - 0.5 * lv - half_x2 / v;
    const double u = rng.uniform();
    if (la >= 0.0 || std::log(u) < la) return v;
  }
  throw SamplerStall(x, cfg_.max_rejections);
}

double sample_conditional_variance(double x, const ConditionalVarianceSampler& sampler, Stream& rng) {
  return sampler.sample(x, rng);
}

}  // namespace stablesde
