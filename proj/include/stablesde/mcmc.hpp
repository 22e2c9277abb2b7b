#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "stablesde/kernels.hpp"
#include "stablesde/model.hpp"
#include "stablesde/samplers.hpp"
#include "stablesde/simulate.hpp"

namespace stablesde {

struct PriorTerm {
  enum class Kind { normal, uniform };
  Kind kind = Kind::uniform;
  double mean = 0.0;
  double sd = 1.0;
};

/// Product prior over the parameter box. Uniform terms are flat on their
/// interval; normal terms are truncated to it (normalization omitted).
class Prior {
 public:
  explicit Prior(std::vector<PriorTerm> terms);
  static Prior flat(std::size_t p);
  static Prior standard_normal(std::size_t p);

  std::size_t dim() const noexcept { return terms_.size(); }
  const std::vector<PriorTerm>& terms() const noexcept { return terms_; }
  /// Log density up to a constant; -infinity outside the box.
  double log_density(const ModelSpec& model, const Eigen::VectorXd& theta) const;

 private:
  std::vector<PriorTerm> terms_;
};

enum class Variant { mwg, cpm };

struct MCMCConfig {
  std::size_t iterations = 1000;  ///< M, including the initial state
  Eigen::MatrixXd sigma;          ///< proposal covariance; empty means 2.38^2 / p times identity
  std::uint64_t seed = 0;
  Variant variant = Variant::mwg;
  double rho = 0.99;              ///< autoregression weight of the cpm variance update
  bool record_variances = false;
  std::size_t variance_stride = 100;  ///< snapshot every this many iterations when recording
  bool scale_by_rate = true;          ///< proposal theta + D_N^{-1} W; false gives theta + W
  Backend backend = Backend::serial;
  ConditionalSamplerConfig sampler;

  /// Checks M >= 2, rho in [0, 1], Sigma symmetric positive definite of size p.
  void validate(std::size_t p) const;
  Eigen::MatrixXd proposal_cov(std::size_t p) const;
};

struct ChainState {
  Eigen::VectorXd theta;
  std::vector<double> V;      ///< latent variances
  std::vector<double> eps;    ///< residuals at theta
  std::vector<double> log_c;  ///< log scale at theta
  double log_prior = 0.0;
};

struct VarianceSnapshot {
  std::size_t iteration;
  std::vector<double> V;
};

struct ChainTrace {
  Eigen::MatrixXd thetas;          ///< M x p, row 0 is the initial state
  std::vector<bool> accept_flags;  ///< length M - 1
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
  Variant variant = Variant::mwg;
  double rho = 0.0;
  std::vector<std::string> names;
  std::vector<VarianceSnapshot> snapshots;
  std::vector<double> residual_means;  ///< chain average of eps_n(theta_m), m >= 1
};

/// Everything a step needs, fixed for the run.
class ChainKernel {
 public:
  ChainKernel(const ModelSpec& model, const ObservationSet& obs, StableIndex beta, const Prior& prior,
              const MCMCConfig& cfg);

  const ModelSpec& model() const noexcept { return model_; }
  const ObservationSet& obs() const noexcept { return obs_; }
  const ConditionalVarianceSampler& sampler() const noexcept { return sampler_; }
  const MCMCConfig& config() const noexcept { return cfg_; }
  double beta() const noexcept { return beta_; }
  const Eigen::VectorXd& rate() const noexcept { return rate_; }

  /// State at theta with residuals filled; V is left empty.
  ChainState init_state(const Eigen::VectorXd& theta) const;

  /// theta + D_N^{-1} L z with z standard normal; consumes p normals.
  Eigen::VectorXd propose(const Eigen::VectorXd& theta, Stream& rng) const;

  /// One Metropolis-within-Gibbs iteration m >= 1: refresh V at the current
  /// theta, then a random-walk move on theta with V fixed. Returns accepted.
  bool mwg_step(ChainState& state, std::size_t m, Stream& rng) const;
  /// Same move with V already refreshed; the log acceptance ratio is written
  /// to `log_ratio` when given (-infinity outside the box).
  bool theta_move(ChainState& state, Stream& rng, double* log_ratio = nullptr) const;
  /// One correlated pseudo-marginal iteration: joint (theta, V) proposal.
  bool cpm_step(ChainState& state, std::size_t m, Stream& rng) const;

  void refresh(ChainState& state, std::size_t m) const;

 private:
  const ModelSpec& model_;
  const ObservationSet& obs_;
  double beta_;
  const Prior& prior_;
  MCMCConfig cfg_;
  ConditionalVarianceSampler sampler_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd rate_;
};

/// V_n ~ F_beta(dv | eps_n(theta)) independently over n; index n draws from
/// the stream derived from (seed, key, n).
std::vector<double> gibbs_refresh_variances(const ModelSpec& model, const Eigen::VectorXd& theta,
                                            const ObservationSet& obs, const ConditionalVarianceSampler& sampler,
                                            std::uint64_t seed, std::uint64_t key,
                                            Backend backend = Backend::serial);

/// V* = rho^{2/beta} V + (1 - rho)^{2/beta} xi with xi ~ F_beta.
std::vector<double> cpm_variance_update(const std::vector<double>& V, double rho, StableIndex beta,
                                        std::uint64_t seed, std::uint64_t key, Backend backend = Backend::serial);

ChainTrace run_mwg(const ModelSpec& model, const ObservationSet& obs, StableIndex beta, const Prior& prior,
                   const MCMCConfig& cfg, const Eigen::VectorXd& init);
ChainTrace run_cpm(const ModelSpec& model, const ObservationSet& obs, StableIndex beta, const Prior& prior,
                   const MCMCConfig& cfg, const Eigen::VectorXd& init);
/// Dispatches on cfg.variant.
ChainTrace run_chain(const ModelSpec& model, const ObservationSet& obs, StableIndex beta, const Prior& prior,
                     const MCMCConfig& cfg, const Eigen::VectorXd& init);

/// Rows burn, burn + stride, ... of the trace.
Eigen::MatrixXd thin_draws(const ChainTrace& trace, std::size_t burn, std::size_t stride);

/// 2.38^2 / p times the sample covariance of D_N (theta_m) over the given
/// draws (or of theta_m when rate is empty): a proposal covariance retuned
/// from a pilot run.
Eigen::MatrixXd tuned_proposal(const Eigen::MatrixXd& draws, const Eigen::VectorXd& rate);

}  // namespace stablesde
