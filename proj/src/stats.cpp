#include "stablesde/stats.hpp"

#include <algorithm>
#include <cmath>

#include "stablesde/errors.hpp"

namespace stablesde {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("KS statistic needs a nonempty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.3) {
    // Dual (Jacobi theta) form converges fast for small lambda.
    const double c = M_PI * M_PI / (8.0 * lambda * lambda);
    double s = 0.0;
    for (int k = 1; k <= 50; k += 2) s += std::exp(-k * k * c);
    return 1.0 - std::sqrt(2.0 * M_PI) / lambda * s;
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

double ks_pvalue(double d, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  return kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d);
}

double ks_critical(std::size_t n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0) || n == 0) throw DomainError("ks_critical needs n >= 1 and alpha in (0, 1)");
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (ks_pvalue(mid, n) > alpha ? lo : hi) = mid;
  }
  return hi;
}

std::vector<double> autocorrelation(const std::vector<double>& x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (n < 2) throw DomainError("autocorrelation needs at least two values");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  std::vector<double> out(std::min(max_lag, n - 1) + 1, 0.0);
  if (c0 == 0.0) {
    out[0] = 1.0;
    return out;
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    double c = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) c += (x[i] - mean) * (x[i + k] - mean);
    out[k] = c / c0;
  }
  return out;
}

MeanSe mean_and_se(const std::vector<double>& x) {
  if (x.empty()) throw DomainError("mean of an empty sample");
  const double n = static_cast<double>(x.size());
  double m = 0.0;
  for (double v : x) m += v;
  m /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  const double var = x.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {m, std::sqrt(var / n)};
}

}  // namespace stablesde
