#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "stablesde/mcmc.hpp"
#include "stablesde/quasi.hpp"
#include "stablesde/random.hpp"
#include "stablesde/stable.hpp"
#include "stablesde/stats.hpp"

namespace stablesde {

/// Reference value from the real-data analysis this package mirrors; the
/// data are not available, so it is documentation only.
inline constexpr double kReferenceRealDataAcceptance = 0.34;
inline constexpr double kReferenceRealDataBeta = 1.411;

struct AcceptanceSummary {
  double rate = 0.0;
  std::vector<double> running_rate;  ///< prefix means of the accept flags
};

AcceptanceSummary acceptance_summary(const std::vector<bool>& accept_flags);
AcceptanceSummary acceptance_summary(const ChainTrace& trace);

struct BvMReport {
  Eigen::VectorXd center;
  std::string center_label;       ///< e.g. "true" or "quasi-mle"
  Eigen::MatrixXd rescaled;       ///< u_m = D_N (theta_m - center)
  Eigen::VectorXd limit_mean;     ///< I^{-1} Delta_N
  Eigen::MatrixXd limit_cov;      ///< I^{-1}
  Eigen::VectorXd per_coordinate_ks;
  double bl_distance_estimate = 0.0;
};

/// Compares rescaled draws with N(I^{-1} Delta_N, I^{-1}). The bounded
/// Lipschitz estimate is the largest discrepancy over 64 fixed functions
/// f(u) = clip(d'u - b, -1, 1) / 2, with the Gaussian side in closed form.
/// Throws DomainError if I is singular.
BvMReport bvm_report(const Eigen::MatrixXd& draws, const QuasiInfo& info, const Eigen::VectorXd& center,
                     std::string center_label = "true");
BvMReport bvm_report(const ChainTrace& trace, const QuasiInfo& info, const Eigen::VectorXd& center,
                     std::string center_label = "true");

enum class QuadraticCoefficient {
  derived,  ///< -1/2 I[v^2 - u^2]: the second-order expansion of the complete log-ratio
  literal,  ///< -I[v^2 - u^2]
};

/// E min{1, exp(eta)} with
///   eta = Delta'(v - u) + W'(v - u) - k I[v^2 - u^2] - 1/2 I*[(v - u)^2],
/// W ~ N(0, I*), k = 1/2 (derived) or 1 (literal). W'(v - u) is drawn as a
/// scalar normal with variance (v - u)' I* (v - u).
MeanSe limiting_acceptance(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& Delta,
                           const Eigen::MatrixXd& I, const Eigen::MatrixXd& I_star, std::size_t mc_n, Stream& rng,
                           QuadraticCoefficient k = QuadraticCoefficient::derived);

/// Monte Carlo per-proposal acceptance probability of the Metropolis-within-
/// Gibbs move from center + D^{-1} u to center + D^{-1} v, each trial with
/// freshly refreshed latent variances (stream keys (seed, trial, n)).
MeanSe empirical_acceptance(const ModelSpec& model, const ObservationSet& obs, StableIndex beta,
                            const Prior& prior, const Eigen::VectorXd& center, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& v, std::size_t trials, std::uint64_t seed,
                            Backend backend = Backend::serial);

struct PPData {
  std::vector<double> empirical;  ///< (k - 1/2) / N
  std::vector<double> model;      ///< F_beta(r_(k))
  double max_deviation() const;
};

PPData pp_data(const std::vector<double>& residual_means, const StableLaw& law);

struct BetaEstimate {
  double beta = 0.0;      ///< clamped to [1, 1.99]
  double raw = 0.0;       ///< before clamping, searched over [0.9, 1.99]
  bool clamped = false;
};

/// Quantile matching: solves (q95 - q05) / (q75 - q25) of the sample against
/// the same ratio of the symmetric stable law by bisection in beta.
BetaEstimate estimate_beta(const std::vector<double>& increments);

/// Quantile ratio q(0.95) / q(0.75) of the standard symmetric stable law.
double stable_quantile_ratio(double beta);

struct SweepOptions {
  double T = 1.0;
  double x0 = 0.0;
  bool scale_by_rate = true;
  Eigen::MatrixXd sigma;  ///< empty means the default proposal covariance
  Prior prior = Prior::standard_normal(0);  ///< dimension 0 means standard normal of model size
  bool init_at_mle = true;
};

struct SweepRow {
  std::size_t N = 0;
  double mean_rate = 0.0;
  double sd_rate = 0.0;
  std::vector<double> rates;  ///< per replicate; NaN for failed cells
  std::size_t failed = 0;
};

/// For each N: simulate data at theta0 with h = T / N, run Metropolis-within-
/// Gibbs for M iterations, record the acceptance rate. Cells run in parallel
/// with seeds derived from (base_seed, N, replicate); a failing cell is
/// recorded as NaN and excluded from the aggregates.
std::vector<SweepRow> sweep_acceptance(const ModelSpec& model, const Eigen::VectorXd& theta0, StableIndex beta,
                                       const std::vector<std::size_t>& N_list, std::size_t M, std::size_t replicates,
                                       std::uint64_t base_seed, const SweepOptions& opt = {},
                                       Backend backend = Backend::openmp);

}  // namespace stablesde
