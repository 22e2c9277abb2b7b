#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

#include "stablesde/errors.hpp"

namespace stablesde {

namespace detail {

template <class G>
double integrate_half_line(const StableLaw& law, G&& integrand) {
  using boost::math::quadrature::exp_sinh;
  using boost::math::quadrature::gauss_kronrod;
  const double x_end = law.table_end();
  const double panel = 0.5;
  double sum = 0.0;
  double err_sum = 0.0;
  for (double a = 0.0; a < x_end; a += panel) {
    const double b = std::min(a + panel, x_end);
    double err = 0.0;
    sum += gauss_kronrod<double, 31>::integrate(integrand, a, b, 12, 1e-13, &err);
    err_sum += err;
  }
  exp_sinh<double> tail_rule;
  double err = 0.0;
  double tail = tail_rule.integrate(
      [&](double s) { return integrand(x_end + s); }, 1e-12, &err);
  err_sum += err;
  if (!std::isfinite(sum + tail)) throw NumericalFailure("density integral not finite", err_sum);
  return sum + tail;
}

}  // namespace detail

template <class F>
double integrate_against_density(const StableLaw& law, F&& f, bool even) {
  // Far-tail abscissas of the exp-sinh rule can overflow f while pdf
  // underflows; the true product is negligible there.
  auto pos = [&](double x) {
    const double v = f(x) * law.pdf(x);
    return std::isfinite(v) ? v : 0.0;
  };
  double total = detail::integrate_half_line(law, pos);
  if (even) return 2.0 * total;
  auto neg = [&](double x) {
    const double v = f(-x) * law.pdf(x);
    return std::isfinite(v) ? v : 0.0;
  };
  return total + detail::integrate_half_line(law, neg);
}

}  // namespace stablesde
