#include "stablesde/quasi.hpp"

#include <cmath>

#include "stablesde/errors.hpp"

namespace stablesde {

Residuals residuals(const ModelSpec& model, const Eigen::VectorXd& theta, const ObservationSet& obs,
                    StableIndex beta, Backend backend) {
  model.check_bounds(theta);
  Residuals r;
  r.eps.resize(obs.N);
  r.log_c.resize(obs.N);
  kernels::residuals(model, theta, obs, beta, r.eps.data(), r.log_c.data(), backend);
  return r;
}

double quasi_loglik(const ModelSpec& model, const Eigen::VectorXd& theta, const ObservationSet& obs,
                    const StableLaw& law, const QuasiOptions& opt) {
  const Residuals r = residuals(model, theta, obs, StableIndex(law.beta()), opt.backend);
  const double* eps = r.eps.data();
  const double* log_c = r.log_c.data();
  double ll = kernels::blocked_sum_of(obs.N, opt.backend,
                                      [&](std::size_t n) { return law.log_pdf(eps[n]) - log_c[n]; });
  if (opt.include_h_constant) ll -= static_cast<double>(obs.N) / law.beta() * std::log(obs.h);
  return ll;
}

double complete_loglik_ratio(const ModelSpec& model, const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_star,
                             const ObservationSet& obs, const std::vector<double>& V, StableIndex beta,
                             Backend backend) {
  if (V.size() != obs.N) throw DomainError("latent variance vector has the wrong length");
  for (double v : V)
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("latent variances must be positive and finite");
  const Residuals a = residuals(model, theta, obs, beta, backend);
  const Residuals b = residuals(model, theta_star, obs, beta, backend);
  return kernels::complete_ratio(a.eps.data(), a.log_c.data(), V.data(), b.eps.data(), b.log_c.data(), V.data(),
                                 obs.N, backend);
}

Eigen::VectorXd rate_matrix(std::size_t N, double h, double beta, std::size_t p_alpha, std::size_t p_gamma) {
  if (N < 1 || !(h > 0.0)) throw DomainError("rate matrix needs N >= 1 and h > 0");
  const double root_n = std::sqrt(static_cast<double>(N));
  Eigen::VectorXd d(p_alpha + p_gamma);
  const double da = root_n * std::pow(h, 1.0 - 1.0 / beta);
  for (std::size_t i = 0; i < p_alpha; ++i) d[i] = da;
  for (std::size_t j = 0; j < p_gamma; ++j) d[p_alpha + j] = root_n;
  return d;
}

QuasiScore quasi_score(const ModelSpec& model, const Eigen::VectorXd& theta, const ObservationSet& obs,
                       const StableLaw& law, Backend backend) {
  const Residuals r = residuals(model, theta, obs, StableIndex(law.beta()), backend);
  const std::size_t pa = model.p_alpha(), pg = model.p_gamma(), p = pa + pg;
  std::vector<double> rows(obs.N * p);
  kernels::for_each_index(obs.N, backend, [&](std::size_t n) {
    const double x = obs.values[n];
    const double c = std::exp(r.log_c[n]);
    const double g = law.score(r.eps[n]);
    double* row = rows.data() + n * p;
    model.drift_grad_at(x, theta, row);
    model.scale_grad_at(x, theta, row + pa);
    for (std::size_t i = 0; i < pa; ++i) row[i] *= -g / c;
    for (std::size_t j = 0; j < pg; ++j) row[pa + j] *= -(1.0 + r.eps[n] * g) / c;
  });
  QuasiScore out;
  out.score.resize(p);
  kernels::blocked_column_sums(rows.data(), obs.N, p, out.score.data(), backend);
  const double hfac = std::pow(obs.h, 1.0 - 1.0 / law.beta());
  out.score.head(pa) *= hfac;
  const Eigen::VectorXd D = rate_matrix(obs.N, obs.h, law.beta(), pa, pg);
  out.delta = out.score.cwiseQuotient(D);
  return out;
}

QuasiInfo fisher_info(const ModelSpec& model, const Eigen::VectorXd& theta, const ObservationSet& obs,
                      const StableLaw& law, const FisherConstants& constants, Backend backend) {
  model.check_bounds(theta);
  const std::size_t pa = model.p_alpha(), pg = model.p_gamma();
  const std::size_t width = pa * pa + pg * pg;
  std::vector<double> rows(obs.N * width);
  kernels::for_each_index(obs.N, backend, [&](std::size_t n) {
    const double x = obs.values[n];
    const double c = model.scale_at(x, theta);
    if (!(c > 0.0)) throw ModelViolation("scale not positive along the path", n);
    double ga[64], gg[64];
    std::vector<double> big_a, big_g;
    double* pa_buf = ga;
    double* pg_buf = gg;
    if (pa > 64) {
      big_a.resize(pa);
      pa_buf = big_a.data();
    }
    if (pg > 64) {
      big_g.resize(pg);
      pg_buf = big_g.data();
    }
    model.drift_grad_at(x, theta, pa_buf);
    model.scale_grad_at(x, theta, pg_buf);
    const double inv_c2 = 1.0 / (c * c);
    double* row = rows.data() + n * width;
    for (std::size_t i = 0; i < pa; ++i)
      for (std::size_t k = 0; k < pa; ++k) row[i * pa + k] = pa_buf[i] * pa_buf[k] * inv_c2;
    row += pa * pa;
    for (std::size_t i = 0; i < pg; ++i)
      for (std::size_t k = 0; k < pg; ++k) row[i * pg + k] = pg_buf[i] * pg_buf[k] * inv_c2;
  });
  std::vector<double> sums(width);
  kernels::blocked_column_sums(rows.data(), obs.N, width, sums.data(), backend);
  const double inv_n = 1.0 / static_cast<double>(obs.N);

  QuasiInfo q;
  q.constants = constants;
  q.sigma_alpha.resize(pa, pa);
  q.sigma_gamma.resize(pg, pg);
  for (std::size_t i = 0; i < pa; ++i)
    for (std::size_t k = 0; k < pa; ++k) q.sigma_alpha(i, k) = sums[i * pa + k] * inv_n;
  for (std::size_t i = 0; i < pg; ++i)
    for (std::size_t k = 0; k < pg; ++k) q.sigma_gamma(i, k) = sums[pa * pa + i * pg + k] * inv_n;

  const std::size_t p = pa + pg;
  auto block = [&](double ca, double cg) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
    m.topLeftCorner(pa, pa) = ca * q.sigma_alpha;
    m.bottomRightCorner(pg, pg) = cg * q.sigma_gamma;
    return m;
  };
  q.I = block(constants.c_alpha, constants.c_gamma);
  q.I_dag = block(constants.c_alpha_dag, constants.c_gamma_dag);
  q.I_star = block(constants.c_alpha_star, constants.c_gamma_star);
  q.D = rate_matrix(obs.N, obs.h, law.beta(), pa, pg);
  q.Delta = quasi_score(model, theta, obs, law, backend).delta;
  return q;
}

QuasiInfo fisher_info(const ModelSpec& model, const Eigen::VectorXd& theta, const ObservationSet& obs,
                      const StableLaw& law, Backend backend) {
  return fisher_info(model, theta, obs, law, fisher_constants(law), backend);
}

MLEResult quasi_mle(const ModelSpec& model, const ObservationSet& obs, const StableLaw& law,
                    const Eigen::VectorXd& init, const OptimizerConfig& opt, Backend backend) {
  model.check_bounds(init);
  QuasiOptions qo;
  qo.backend = backend;
  const auto res = nelder_mead_maximize(
      [&](const Eigen::VectorXd& th) { return quasi_loglik(model, th, obs, law, qo); }, init, model.bounds(), opt);
  return {res.x, res.value, res.converged, res.iterations};
}

}  // namespace stablesde
