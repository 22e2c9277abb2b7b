#pragma once

#include <Eigen/Core>
#include <vector>

#include "stablesde/kernels.hpp"
#include "stablesde/model.hpp"
#include "stablesde/optimize.hpp"
#include "stablesde/simulate.hpp"
#include "stablesde/stable.hpp"

namespace stablesde {

/// Standardized Euler residuals and the log scale at the left endpoints.
struct Residuals {
  std::vector<double> eps;
  std::vector<double> log_c;
};

/// eps_n(theta) = (dX_n - a(X_{n-1}, alpha) h) / (c(X_{n-1}, gamma) h^{1/beta}).
Residuals residuals(const ModelSpec& model, const Eigen::VectorXd& theta, const ObservationSet& obs,
                    StableIndex beta, Backend backend = Backend::serial);

struct QuasiOptions {
  bool include_h_constant = false;  ///< add -(N / beta) log h
  Backend backend = Backend::serial;
};

/// sum_n [-log c(X_{n-1}, gamma) + log phi_beta(eps_n(theta))].
double quasi_loglik(const ModelSpec& model, const Eigen::VectorXd& theta, const ObservationSet& obs,
                    const StableLaw& law, const QuasiOptions& opt = {});

/// Log ratio of the complete quasi-likelihood at theta_star over theta with
/// the latent variances V held fixed.
double complete_loglik_ratio(const ModelSpec& model, const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_star,
                             const ObservationSet& obs, const std::vector<double>& V, StableIndex beta,
                             Backend backend = Backend::serial);

/// Diagonal of D_N = diag(sqrt(N) h^{1 - 1/beta} 1_{p_alpha}, sqrt(N) 1_{p_gamma}).
Eigen::VectorXd rate_matrix(std::size_t N, double h, double beta, std::size_t p_alpha, std::size_t p_gamma);

struct QuasiScore {
  Eigen::VectorXd score;  ///< gradient of the quasi log-likelihood
  Eigen::VectorXd delta;  ///< D_N^{-1} score
};

QuasiScore quasi_score(const ModelSpec& model, const Eigen::VectorXd& theta, const ObservationSet& obs,
                       const StableLaw& law, Backend backend = Backend::serial);

struct QuasiInfo {
  Eigen::VectorXd D;      ///< diagonal of the rate matrix
  Eigen::VectorXd Delta;  ///< D^{-1} times the quasi-score
  Eigen::MatrixXd I, I_dag, I_star;
  Eigen::MatrixXd sigma_alpha, sigma_gamma;  ///< path averages of (grad a)^2 / c^2 and (grad c)^2 / c^2
  FisherConstants constants;
};

/// Quasi Fisher information and its augmented-data counterpart, with the
/// path integrals replaced by left Riemann sums on the observation grid.
QuasiInfo fisher_info(const ModelSpec& model, const Eigen::VectorXd& theta, const ObservationSet& obs,
                      const StableLaw& law, const FisherConstants& constants, Backend backend = Backend::serial);
QuasiInfo fisher_info(const ModelSpec& model, const Eigen::VectorXd& theta, const ObservationSet& obs,
                      const StableLaw& law, Backend backend = Backend::serial);

struct MLEResult {
  Eigen::VectorXd theta;
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
};

MLEResult quasi_mle(const ModelSpec& model, const ObservationSet& obs, const StableLaw& law,
                    const Eigen::VectorXd& init, const OptimizerConfig& opt = {}, Backend backend = Backend::serial);

}  // namespace stablesde
