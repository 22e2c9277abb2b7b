#include "stablesde/stable.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "stablesde/errors.hpp"

namespace stablesde {

namespace {

constexpr double kPi = std::numbers::pi;

struct BudgetExceeded {};

enum class Trig { cos, sin };

struct Integral {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

// 15-point Kronrod rule on [a, b]; accumulates the L1 norm of f.
template <class F>
double kronrod15(F& f, double a, double b, double* l1) {
  using boost::math::quadrature::gauss_kronrod;
  static const auto& x = gauss_kronrod<double, 15>::abscissa();
  static const auto& w = gauss_kronrod<double, 15>::weights();
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  double fc = f(c);
  double sum = w[0] * fc, abs_sum = w[0] * std::abs(fc);
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double f1 = f(c - r * x[i]);
    const double f2 = f(c + r * x[i]);
    sum += w[i] * (f1 + f2);
    abs_sum += w[i] * (std::abs(f1) + std::abs(f2));
  }
  *l1 = r * abs_sum;
  return r * sum;
}

// Adaptive bisection. The error estimate is the difference between the rule
// on the whole interval and on its two halves; the stopping rule is relative
// to the L1 norm so panels whose signed integral cancels still terminate.
template <class F>
double adaptive_kronrod(F& f, double a, double b, double whole, int depth, double* err, double* l1) {
  const double mid = 0.5 * (a + b);
  double la, lb;
  const double left = kronrod15(f, a, mid, &la);
  const double right = kronrod15(f, mid, b, &lb);
  const double diff = std::abs(left + right - whole);
  if (depth == 0 || diff <= 1e-12 * (la + lb) || diff <= 1e-300) {
    *err = diff;
    *l1 = la + lb;
    return left + right;
  }
  double e1, l1a, e2, l2;
  const double v1 = adaptive_kronrod(f, a, mid, left, depth - 1, &e1, &l1a);
  const double v2 = adaptive_kronrod(f, mid, b, right, depth - 1, &e2, &l2);
  *err = e1 + e2;
  *l1 = l1a + l2;
  return v1 + v2;
}

// int_0^inf t^k exp(-t^beta) trig(t x) dt. k == -1 with sin is the kernel
// of the distribution function.
Integral fourier_moment(int k, Trig trig, double x, double beta, const QuadratureConfig& q) {
  const double level = -std::log(q.abs_tol) + 8.0;
  double t_max = std::pow(level, 1.0 / beta);
  for (int i = 0; i < 8; ++i)
    t_max = std::pow(level + std::max(k, 0) * std::log(t_max), 1.0 / beta);

  const double ax = std::abs(x);
  const double width = ax > 0.0 ? std::min(1.0, kPi / ax) : 1.0;
  long evals = 0;
  auto f = [&](double t) {
    if (++evals > q.max_nodes) throw BudgetExceeded{};
    const double damp = std::exp(-std::pow(t, beta));
    double w;
    if (k == -1) {
      w = t > 0.0 ? std::sin(t * x) / t : x;
    } else {
      w = trig == Trig::cos ? std::cos(t * x) : std::sin(t * x);
      for (int i = 0; i < k; ++i) w *= t;
    }
    return damp * w;
  };

  Integral out;
  try {
    for (double a = 0.0; a < t_max; a += width) {
      const double b = std::min(a + width, t_max);
      double err = 0.0;
      double l1 = 0.0;
      double whole_l1 = 0.0;
      const double whole = kronrod15(f, a, b, &whole_l1);
      out.value += adaptive_kronrod(f, a, b, whole, a == 0.0 ? 50 : 12, &err, &l1);
      out.error += err;
      out.l1 += l1;
    }
  } catch (const BudgetExceeded&) {
    throw NumericalFailure("quadrature exceeded max_nodes=" + std::to_string(q.max_nodes) +
                               " at x=" + std::to_string(x),
                           out.error > 0.0 ? out.error : std::numeric_limits<double>::infinity());
  }
  const double allowed = std::max({q.abs_tol, q.rel_tol * std::abs(out.value), 1e-12 * out.l1});
  if (!(out.error <= allowed))
    throw NumericalFailure("quadrature did not reach tolerance at x=" + std::to_string(x), out.error);
  return out;
}

double series_tol(const QuadratureConfig& q) { return std::min(q.rel_tol * 1e-2, 1e-12); }

void check_finite(double x) {
  if (!std::isfinite(x)) throw DomainError("argument must be finite");
}

// Quintic Hermite basis on [0, 1]: value weights for f0, h f0', h^2 f0'',
// h^2 f1'', h f1', f1.
struct Quintic {
  double w[6];
  explicit Quintic(double t) {
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    w[0] = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    w[1] = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    w[2] = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    w[3] = 0.5 * (t3 - 2.0 * t4 + t5);
    w[4] = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    w[5] = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
  }
  double operator()(const std::vector<double>& f, const std::vector<double>& f1,
                    const std::vector<double>& f2, std::size_t i, double h) const {
    return w[0] * f[i] + h * w[1] * f1[i] + h * h * w[2] * f2[i] + h * h * w[3] * f2[i + 1] +
           h * w[4] * f1[i + 1] + w[5] * f[i + 1];
  }
};

}  // namespace

StableIndex::StableIndex(double beta) : beta_(beta) {
  if (!(beta >= 1.0 && beta < 2.0))
    throw DomainError("stable index must satisfy 1 <= beta < 2, got " + std::to_string(beta));
}

void QuadratureConfig::validate() const {
  if (!(abs_tol > 0.0)) throw ConfigError("abs_tol must be positive");
  if (!(rel_tol > 0.0)) throw ConfigError("rel_tol must be positive");
  if (!(tail_switch > 0.0)) throw ConfigError("tail_switch must be positive");
  if (max_nodes < 16) throw ConfigError("max_nodes must be at least 16");
}

std::optional<DensityDerivatives> stable_tail_series(double x, double beta, double rel_tol) {
  if (!(x > 0.0) || !std::isfinite(x)) return std::nullopt;
  DensityDerivatives sum{};
  const double lx = std::log(x);
  double prev_log_env = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 400; ++k) {
    const double log_env =
        std::lgamma(beta * k + 1.0) - std::lgamma(k + 1.0) - (beta * k + 1.0) * lx - std::log(kPi);
    if (log_env > prev_log_env) return std::nullopt;
    prev_log_env = log_env;
    const double env = std::exp(log_env);
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    const double s = std::sin(k * kPi * beta / 2.0);
    double poch = 1.0;
    double xpow = 1.0;
    bool converged = true;
    for (int j = 0; j < 5; ++j) {
      const double term_env = env * poch / xpow;
      sum[j] += ((j % 2 == 0) ? 1.0 : -1.0) * sign * s * term_env;
      if (!(term_env <= rel_tol * std::abs(sum[j]))) converged = false;
      poch *= beta * k + 1.0 + j;
      xpow *= x;
    }
    if (converged && k > 1) return sum;
  }
  return std::nullopt;
}

std::optional<double> stable_tail_survival(double x, double beta, double rel_tol) {
  if (!(x > 0.0) || !std::isfinite(x)) return std::nullopt;
  double sum = 0.0;
  const double lx = std::log(x);
  double prev_log_env = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 400; ++k) {
    const double log_env =
        std::lgamma(beta * k) - std::lgamma(k + 1.0) - beta * k * lx - std::log(kPi);
    if (log_env > prev_log_env) return std::nullopt;
    prev_log_env = log_env;
    const double env = std::exp(log_env);
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    sum += sign * std::sin(k * kPi * beta / 2.0) * env;
    if (k > 1 && env <= rel_tol * std::abs(sum)) return sum;
  }
  return std::nullopt;
}

DensityDerivatives stable_pdf_derivatives(double x, StableIndex beta, const QuadratureConfig& quad) {
  check_finite(x);
  quad.validate();
  const double ax = std::abs(x);
  DensityDerivatives d{};
  std::optional<DensityDerivatives> tail;
  if (ax > quad.tail_switch) tail = stable_tail_series(ax, beta, series_tol(quad));
  if (tail) {
    d = *tail;
  } else {
    d[0] = fourier_moment(0, Trig::cos, ax, beta, quad).value / kPi;
    d[1] = -fourier_moment(1, Trig::sin, ax, beta, quad).value / kPi;
    d[2] = -fourier_moment(2, Trig::cos, ax, beta, quad).value / kPi;
    d[3] = fourier_moment(3, Trig::sin, ax, beta, quad).value / kPi;
    d[4] = fourier_moment(4, Trig::cos, ax, beta, quad).value / kPi;
  }
  if (x < 0.0) {
    d[1] = -d[1];
    d[3] = -d[3];
  }
  return d;
}

double stable_pdf(double x, StableIndex beta, const QuadratureConfig& quad) {
  check_finite(x);
  quad.validate();
  const double ax = std::abs(x);
  if (ax > quad.tail_switch) {
    if (auto tail = stable_tail_series(ax, beta, series_tol(quad))) return (*tail)[0];
  }
  return fourier_moment(0, Trig::cos, ax, beta, quad).value / kPi;
}

double stable_cdf(double x, StableIndex beta, const QuadratureConfig& quad) {
  check_finite(x);
  quad.validate();
  const double ax = std::abs(x);
  double upper;  // P(X > |x|)
  std::optional<double> tail;
  if (ax > quad.tail_switch) tail = stable_tail_survival(ax, beta, series_tol(quad));
  if (tail) {
    upper = *tail;
  } else {
    upper = 0.5 - fourier_moment(-1, Trig::sin, ax, beta, quad).value / kPi;
  }
  upper = std::clamp(upper, 0.0, 0.5);
  return x < 0.0 ? upper : 1.0 - upper;
}

namespace detail {

double stable_pdf_unchecked(double x, double beta, const QuadratureConfig& quad) {
  check_finite(x);
  quad.validate();
  if (!(beta > 0.0 && beta <= 2.0)) throw DomainError("stable index must lie in (0, 2]");
  return fourier_moment(0, Trig::cos, std::abs(x), beta, quad).value / kPi;
}

double stable_cdf_unchecked(double x, double beta, const QuadratureConfig& quad) {
  check_finite(x);
  quad.validate();
  if (!(beta > 0.0 && beta <= 2.0)) throw DomainError("stable index must lie in (0, 2]");
  const double upper = std::clamp(0.5 - fourier_moment(-1, Trig::sin, std::abs(x), beta, quad).value / kPi, 0.0, 0.5);
  return x < 0.0 ? upper : 1.0 - upper;
}

}  // namespace detail

double stable_score_g(double x, StableIndex beta, const QuadratureConfig& quad) {
  check_finite(x);
  if (x == 0.0) return 0.0;
  const double ax = std::abs(x);
  double g;
  std::optional<DensityDerivatives> tail;
  if (ax > quad.tail_switch) tail = stable_tail_series(ax, beta, series_tol(quad));
  if (tail) {
    g = (*tail)[1] / (*tail)[0];
  } else {
    quad.validate();
    g = -fourier_moment(1, Trig::sin, ax, beta, quad).value /
        fourier_moment(0, Trig::cos, ax, beta, quad).value;
  }
  return x < 0.0 ? -g : g;
}

StableScores stable_scores(double x, StableIndex beta, const QuadratureConfig& quad) {
  check_finite(x);
  if (x == 0.0) throw DomainError("h score is undefined at x = 0");
  const DensityDerivatives d = stable_pdf_derivatives(x, beta, quad);
  const double g = d[1] / d[0];
  const double h = d[2] / d[0] - g * g - g / x;
  return {g, h};
}

// ---------------------------------------------------------------------------
// Tabulated law

StableLaw::StableLaw(StableIndex beta, QuadratureConfig quad) : beta_(beta), quad_(quad) {
  quad_.validate();
  const double b = beta_;

  // Table end: first candidate at or past tail_switch where the tail series
  // converges to near machine precision and agrees with quadrature.
  const double series_rel = 1e-15;
  double x_end = std::ceil(std::max(quad_.tail_switch, 1.0) / dx_) * dx_;
  for (;; x_end += 5.0) {
    if (x_end > 200.0)
      throw NumericalFailure("tail series did not converge below |x| = 200", 0.0);
    auto series = stable_tail_series(x_end, b, series_rel);
    if (!series) continue;
    QuadratureConfig check = quad_;
    check.tail_switch = std::numeric_limits<double>::infinity();
    check.max_nodes = std::max(check.max_nodes, 1000000L);
    const double q0 = fourier_moment(0, Trig::cos, x_end, b, check).value / kPi;
    const double q1 = -fourier_moment(1, Trig::sin, x_end, b, check).value / kPi;
    if (std::abs(q0 - (*series)[0]) <= 1e-9 * (*series)[0] &&
        std::abs(q1 - (*series)[1]) <= 1e-9 * std::abs((*series)[1]))
      break;
  }
  const std::size_t n = static_cast<std::size_t>(std::llround(x_end / dx_));
  x_end_ = n * dx_;

  // Tail coefficients, enough to converge at the table end and beyond.
  // Terms are kept up to the smallest one at the table end; for larger |x|
  // the truncated sum only gets more accurate.
  const double log_first = std::lgamma(b + 1.0) - std::log(kPi);
  double prev_rel = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 150; ++k) {
    const double log_env = std::lgamma(b * k + 1.0) - std::lgamma(k + 1.0) - std::log(kPi);
    const double rel = log_env - log_first - b * (k - 1) * std::log(x_end_);
    if (rel > prev_rel || log_env > 600.0) break;
    prev_rel = rel;
    const double env = std::exp(log_env);
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;
    tail_a_.push_back(sign * std::sin(k * kPi * b / 2.0) * env);
    tail_env_.push_back(env);
    if (rel < std::log(1e-18)) break;
  }

  QuadratureConfig node_quad = quad_;
  node_quad.tail_switch = std::numeric_limits<double>::infinity();
  d0_.resize(n + 1);
  d1_.resize(n + 1);
  d2_.resize(n + 1);
  d3_.resize(n + 1);
  d4_.resize(n + 1);
  cdf_.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = i * dx_;
    d0_[i] = fourier_moment(0, Trig::cos, x, b, node_quad).value / kPi;
    d1_[i] = -fourier_moment(1, Trig::sin, x, b, node_quad).value / kPi;
    d2_[i] = -fourier_moment(2, Trig::cos, x, b, node_quad).value / kPi;
    d3_[i] = fourier_moment(3, Trig::sin, x, b, node_quad).value / kPi;
    d4_[i] = fourier_moment(4, Trig::cos, x, b, node_quad).value / kPi;
    cdf_[i] = 0.5 + fourier_moment(-1, Trig::sin, x, b, node_quad).value / kPi;
  }
}

std::array<double, 3> StableLaw::tail_sums(double ax) const {
  const double rho = std::exp(-beta_ * std::log(ax));
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  double pw = 1.0;
  for (std::size_t j = 0; j < tail_a_.size(); ++j) {
    const double bk = beta_ * static_cast<double>(j + 1);
    const double t = tail_a_[j] * pw;
    s0 += t;
    s1 -= t * (bk + 1.0);
    s2 += t * (bk + 1.0) * (bk + 2.0);
    if (j > 0 && tail_env_[j] * pw * (bk + 1.0) * (bk + 2.0) < 1e-17 * std::abs(s0)) break;
    pw *= rho;
    if (pw == 0.0) break;
  }
  return {s0, s1, s2};
}

double StableLaw::tail_survival(double ax) const {
  const double rho = std::exp(-beta_ * std::log(ax));
  double s = 0.0;
  double pw = rho;
  for (std::size_t j = 0; j < tail_a_.size(); ++j) {
    const double bk = beta_ * static_cast<double>(j + 1);
    s += tail_a_[j] * pw / bk;
    if (j > 0 && tail_env_[j] * pw / bk < 1e-17 * std::abs(s)) break;
    pw *= rho;
    if (pw == 0.0) break;
  }
  return s;
}

std::array<double, 3> StableLaw::derivs_abs(double ax) const {
  if (ax >= x_end_) {
    const auto s = tail_sums(ax);
    const double lead = std::exp(-(beta_ + 1.0) * std::log(ax));
    return {lead * s[0], lead * s[1] / ax, lead * s[2] / (ax * ax)};
  }
  const double u = ax / dx_;
  const std::size_t i = static_cast<std::size_t>(u);
  const Quintic q(u - static_cast<double>(i));
  return {q(d0_, d1_, d2_, i, dx_), q(d1_, d2_, d3_, i, dx_), q(d2_, d3_, d4_, i, dx_)};
}

double StableLaw::pdf(double x) const {
  const double ax = std::abs(x);
  if (ax >= x_end_) {
    if (std::isinf(ax)) return 0.0;
    return std::exp(-(beta_ + 1.0) * std::log(ax)) * tail_sums(ax)[0];
  }
  const double u = ax / dx_;
  const std::size_t i = static_cast<std::size_t>(u);
  return Quintic(u - static_cast<double>(i))(d0_, d1_, d2_, i, dx_);
}

double StableLaw::log_pdf(double x) const {
  const double ax = std::abs(x);
  if (ax >= x_end_) return -(beta_ + 1.0) * std::log(ax) + std::log(tail_sums(ax)[0]);
  return std::log(pdf(ax));
}

double StableLaw::survival_abs(double ax) const {
  if (ax >= x_end_) return tail_survival(ax);
  const double u = ax / dx_;
  const std::size_t i = static_cast<std::size_t>(u);
  return 1.0 - Quintic(u - static_cast<double>(i))(cdf_, d0_, d1_, i, dx_);
}

double StableLaw::cdf(double x) const {
  if (std::isnan(x)) return x;
  const double upper = std::clamp(survival_abs(std::abs(x)), 0.0, 0.5);
  return x < 0.0 ? upper : 1.0 - upper;
}

double StableLaw::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p < 0.5) return -quantile(1.0 - p);
  const double target = 1.0 - p;  // survival level
  // Bracket [lo, hi] with survival(lo) >= target >= survival(hi).
  double lo = 0.0, hi = 1.0;
  while (survival_abs(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return hi;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double s = survival_abs(x);
    if (s > target) lo = x; else hi = x;
    const double step = (s - target) / pdf(x);
    double next = x + step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-14 * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

double StableLaw::score(double x) const {
  if (x == 0.0) return 0.0;
  const double ax = std::abs(x);
  double g;
  if (ax >= x_end_) {
    const auto s = tail_sums(ax);
    g = s[1] / (s[0] * ax);
  } else {
    const auto d = derivs_abs(ax);
    g = d[1] / d[0];
  }
  return x < 0.0 ? -g : g;
}

double StableLaw::h_unchecked(double x) const {
  if (x == 0.0) return 0.0;
  const double ax = std::abs(x);
  double g, ratio2;
  if (ax >= x_end_) {
    const auto s = tail_sums(ax);
    g = s[1] / (s[0] * ax);
    ratio2 = s[2] / (s[0] * ax * ax);
  } else {
    const auto d = derivs_abs(ax);
    g = d[1] / d[0];
    ratio2 = d[2] / d[0];
  }
  return ratio2 - g * g - g / ax;
}

StableScores StableLaw::scores(double x) const {
  if (x == 0.0) throw DomainError("h score is undefined at x = 0");
  return {score(x), h_unchecked(x)};
}

// ---------------------------------------------------------------------------

FisherConstants fisher_constants(const StableLaw& law) {
  FisherConstants c{};
  c.c_alpha = integrate_against_density(law, [&](double x) {
    const double g = law.score(x);
    return g * g;
  });
  c.c_gamma = integrate_against_density(law, [&](double x) {
    const double t = 1.0 + x * law.score(x);
    return t * t;
  });
  // E[1/V] = int_0^inf E[exp(-tV)] dt for V ~ F_beta.
  const double half = law.beta() / 2.0;
  boost::math::quadrature::exp_sinh<double> rule;
  double err = 0.0;
  c.c_alpha_dag = rule.integrate([&](double t) { return std::exp(-std::pow(2.0 * t, half)); },
                                 1e-13, &err);
  if (!(err <= 1e-10)) throw NumericalFailure("negative-moment integral did not converge", err);
  c.c_gamma_dag = 2.0;
  c.c_alpha_star = c.c_alpha_dag - c.c_alpha;
  c.c_gamma_star = c.c_gamma_dag - c.c_gamma;
  return c;
}

FisherConstants fisher_constants(StableIndex beta, const QuadratureConfig& quad) {
  return fisher_constants(StableLaw(beta, quad));
}

}  // namespace stablesde
