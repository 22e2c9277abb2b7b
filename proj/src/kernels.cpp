#include "stablesde/kernels.hpp"

#include <cmath>
#include <vector>

#include "stablesde/errors.hpp"

namespace stablesde::kernels {

double blocked_sum(const double* x, std::size_t n, Backend backend) {
  return blocked_sum_of(n, backend, [x](std::size_t i) { return x[i]; });
}

void blocked_column_sums(const double* rows, std::size_t n, std::size_t width, double* out, Backend backend) {
  for (std::size_t k = 0; k < width; ++k)
    out[k] = blocked_sum_of(n, backend, [=](std::size_t i) { return rows[i * width + k]; });
}

double complete_ratio(const double* eps, const double* log_c, const double* V, const double* eps_star,
                      const double* log_c_star, const double* V_star, std::size_t n, Backend backend) {
  if (V_star == V) {
    return blocked_sum_of(n, backend, [=](std::size_t i) {
      return (log_c[i] - log_c_star[i]) + 0.5 * (eps[i] * eps[i] - eps_star[i] * eps_star[i]) / V[i];
    });
  }
  return blocked_sum_of(n, backend, [=](std::size_t i) {
    return (log_c[i] - log_c_star[i]) + 0.5 * (eps[i] * eps[i] / V[i] - eps_star[i] * eps_star[i] / V_star[i]) +
           0.5 * (std::log(V[i]) - std::log(V_star[i]));
  });
}

void residuals(const ModelSpec& model, const Eigen::VectorXd& theta, const ObservationSet& obs, double beta,
               double* eps, double* log_c, Backend backend) {
  const double h = obs.h;
  const double noise = std::pow(h, 1.0 / beta);
  const double* x = obs.values.data();
  for_each_index(obs.N, backend, [&](std::size_t n) {
    const double a = model.drift_at(x[n], theta);
    const double c = model.scale_at(x[n], theta);
    if (!(c > 0.0)) throw ModelViolation("scale not positive along the path", n);
    eps[n] = (x[n + 1] - x[n] - a * h) / (c * noise);
    log_c[n] = std::log(c);
  });
}

void log_density(const StableLaw& law, const double* eps, std::size_t n, double* out, Backend backend) {
  for_each_index(n, backend, [&](std::size_t i) { out[i] = law.log_pdf(eps[i]); });
}

void refresh_variances(const ConditionalVarianceSampler& sampler, const double* eps, std::size_t n,
                       std::uint64_t seed, std::uint64_t key, double* V, Backend backend) {
  for_each_index(n, backend, [&](std::size_t i) {
    Stream rng = Stream::derive(seed, key, i);
    V[i] = sampler.sample(eps[i], rng);
  });
}

void cpm_update(const double* V, std::size_t n, double rho, double beta, std::uint64_t seed, std::uint64_t key,
                double* V_star, Backend backend) {
  const double keep = std::pow(rho, 2.0 / beta);
  const double fresh = std::pow(1.0 - rho, 2.0 / beta);
  for_each_index(n, backend, [&](std::size_t i) {
    if (fresh == 0.0) {
      V_star[i] = V[i];
      return;
    }
    Stream rng = Stream::derive(seed, key, i);
    V_star[i] = keep * V[i] + fresh * draw_positive_stable(beta, rng);
  });
}

}  // namespace stablesde::kernels
