#include "stablesde/mcmc.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

#include "stablesde/errors.hpp"
#include "stablesde/quasi.hpp"

namespace stablesde {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Stream keys: the chain's own stream uses 0, the Gibbs refresh of
// iteration m uses 2m + 1 and the cpm innovations of iteration m use 2m + 2.
std::uint64_t refresh_key(std::size_t m) { return 2 * static_cast<std::uint64_t>(m) + 1; }
std::uint64_t innovation_key(std::size_t m) { return 2 * static_cast<std::uint64_t>(m) + 2; }

}  // namespace

Prior::Prior(std::vector<PriorTerm> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (t.kind == PriorTerm::Kind::normal && !(t.sd > 0.0 && std::isfinite(t.mean)))
      throw ConfigError("normal prior needs finite mean and positive sd");
  }
}

Prior Prior::flat(std::size_t p) { return Prior(std::vector<PriorTerm>(p)); }

Prior Prior::standard_normal(std::size_t p) {
  return Prior(std::vector<PriorTerm>(p, PriorTerm{PriorTerm::Kind::normal, 0.0, 1.0}));
}

double Prior::log_density(const ModelSpec& model, const Eigen::VectorXd& theta) const {
  if (terms_.size() != model.dim()) throw ConfigError("prior dimension does not match the model");
  if (!model.in_bounds(theta)) return kNegInf;
  double lp = 0.0;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i].kind == PriorTerm::Kind::normal) {
      const double z = (theta[i] - terms_[i].mean) / terms_[i].sd;
      lp -= 0.5 * z * z;
    }
  }
  return lp;
}

void MCMCConfig::validate(std::size_t p) const {
  if (iterations < 2) throw ConfigError("mcmc iterations must be at least 2");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("mcmc rho must lie in [0, 1]");
  if (record_variances && variance_stride == 0) throw ConfigError("variance_stride must be positive");
  sampler.validate();
  if (sigma.size() == 0) return;
  if (static_cast<std::size_t>(sigma.rows()) != p || static_cast<std::size_t>(sigma.cols()) != p)
    throw ConfigError("proposal covariance must be " + std::to_string(p) + " x " + std::to_string(p));
  if (!sigma.allFinite() || (sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * sigma.cwiseAbs().maxCoeff())
    throw ConfigError("proposal covariance must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw ConfigError("proposal covariance must be positive definite");
}

Eigen::MatrixXd MCMCConfig::proposal_cov(std::size_t p) const {
  if (sigma.size() != 0) return sigma;
  return Eigen::MatrixXd::Identity(p, p) * (2.38 * 2.38 / static_cast<double>(p));
}

ChainKernel::ChainKernel(const ModelSpec& model, const ObservationSet& obs, StableIndex beta, const Prior& prior,
                         const MCMCConfig& cfg)
    : model_(model), obs_(obs), beta_(beta), prior_(prior), cfg_(cfg), sampler_(beta, cfg.sampler) {
  cfg_.validate(model.dim());
  if (prior.dim() != model.dim()) throw ConfigError("prior dimension does not match the model");
  chol_ = Eigen::LLT<Eigen::MatrixXd>(cfg_.proposal_cov(model.dim())).matrixL();
  rate_ = rate_matrix(obs.N, obs.h, beta_, model.p_alpha(), model.p_gamma());
}

ChainState ChainKernel::init_state(const Eigen::VectorXd& theta) const {
  model_.check_bounds(theta);
  ChainState s;
  s.theta = theta;
  s.eps.resize(obs_.N);
  s.log_c.resize(obs_.N);
  kernels::residuals(model_, theta, obs_, beta_, s.eps.data(), s.log_c.data(), cfg_.backend);
  s.log_prior = prior_.log_density(model_, theta);
  if (!std::isfinite(s.log_prior)) throw ModelViolation("initial state has zero prior density", 0);
  return s;
}

Eigen::VectorXd ChainKernel::propose(const Eigen::VectorXd& theta, Stream& rng) const {
  const auto p = theta.size();
  Eigen::VectorXd z(p);
  for (Eigen::Index i = 0; i < p; ++i) z[i] = rng.normal();
  Eigen::VectorXd w = chol_ * z;
  if (cfg_.scale_by_rate) w = w.cwiseQuotient(rate_);
  return theta + w;
}

void ChainKernel::refresh(ChainState& state, std::size_t m) const {
  state.V.resize(obs_.N);
  try {
    kernels::refresh_variances(sampler_, state.eps.data(), obs_.N, cfg_.seed, refresh_key(m), state.V.data(),
                               cfg_.backend);
  } catch (const SamplerStall& e) {
    throw SamplerStall(e, m);
  }
}

bool ChainKernel::theta_move(ChainState& state, Stream& rng, double* log_ratio) const {
  const Eigen::VectorXd prop = propose(state.theta, rng);
  const double u = rng.uniform();
  const double lp = prior_.log_density(model_, prop);
  if (!std::isfinite(lp)) {
    if (log_ratio) *log_ratio = kNegInf;
    return false;
  }
  std::vector<double> eps(obs_.N), log_c(obs_.N);
  kernels::residuals(model_, prop, obs_, beta_, eps.data(), log_c.data(), cfg_.backend);
  const double lr = kernels::complete_ratio(state.eps.data(), state.log_c.data(), state.V.data(), eps.data(),
                                            log_c.data(), state.V.data(), obs_.N, cfg_.backend) +
                    (lp - state.log_prior);
  if (log_ratio) *log_ratio = lr;
  if (!(std::log(u) < lr)) return false;
  state.theta = prop;
  state.eps = std::move(eps);
  state.log_c = std::move(log_c);
  state.log_prior = lp;
  return true;
}

bool ChainKernel::mwg_step(ChainState& state, std::size_t m, Stream& rng) const {
  refresh(state, m);
  return theta_move(state, rng);
}

bool ChainKernel::cpm_step(ChainState& state, std::size_t m, Stream& rng) const {
  const Eigen::VectorXd prop = propose(state.theta, rng);
  const double u = rng.uniform();
  const double lp = prior_.log_density(model_, prop);
  if (!std::isfinite(lp)) return false;
  std::vector<double> V_star(obs_.N), eps(obs_.N), log_c(obs_.N);
  kernels::cpm_update(state.V.data(), obs_.N, cfg_.rho, beta_, cfg_.seed, innovation_key(m), V_star.data(),
                      cfg_.backend);
  kernels::residuals(model_, prop, obs_, beta_, eps.data(), log_c.data(), cfg_.backend);
  // Pass distinct pointers so the log V terms are included even when rho == 1.
  const double lr = kernels::complete_ratio(state.eps.data(), state.log_c.data(), state.V.data(), eps.data(),
                                            log_c.data(), V_star.data(), obs_.N, cfg_.backend) +
                    (lp - state.log_prior);
  if (!(std::log(u) < lr)) return false;
  state.theta = prop;
  state.V = std::move(V_star);
  state.eps = std::move(eps);
  state.log_c = std::move(log_c);
  state.log_prior = lp;
  return true;
}

std::vector<double> gibbs_refresh_variances(const ModelSpec& model, const Eigen::VectorXd& theta,
                                            const ObservationSet& obs, const ConditionalVarianceSampler& sampler,
                                            std::uint64_t seed, std::uint64_t key, Backend backend) {
  const Residuals r = residuals(model, theta, obs, StableIndex(sampler.beta()), backend);
  std::vector<double> V(obs.N);
  kernels::refresh_variances(sampler, r.eps.data(), obs.N, seed, key, V.data(), backend);
  return V;
}

std::vector<double> cpm_variance_update(const std::vector<double>& V, double rho, StableIndex beta,
                                        std::uint64_t seed, std::uint64_t key, Backend backend) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("rho must lie in [0, 1]");
  std::vector<double> out(V.size());
  kernels::cpm_update(V.data(), V.size(), rho, beta, seed, key, out.data(), backend);
  return out;
}

namespace {

ChainTrace run(const ModelSpec& model, const ObservationSet& obs, StableIndex beta, const Prior& prior,
               const MCMCConfig& cfg, const Eigen::VectorXd& init, Variant variant) {
  const ChainKernel kernel(model, obs, beta, prior, cfg);
  const std::size_t M = cfg.iterations, p = model.dim();
  Stream rng = Stream::derive(cfg.seed, 0, 0);
  ChainState state = kernel.init_state(init);
  if (variant == Variant::cpm) kernel.refresh(state, 0);

  ChainTrace trace;
  trace.thetas.resize(M, p);
  trace.thetas.row(0) = init.transpose();
  trace.accept_flags.reserve(M - 1);
  trace.seed = cfg.seed;
  trace.variant = variant;
  trace.rho = variant == Variant::cpm ? cfg.rho : 0.0;
  trace.names = model.param_names();
  trace.residual_means.assign(obs.N, 0.0);

  std::size_t accepted = 0;
  for (std::size_t m = 1; m < M; ++m) {
    const bool acc = variant == Variant::mwg ? kernel.mwg_step(state, m, rng) : kernel.cpm_step(state, m, rng);
    accepted += acc;
    trace.accept_flags.push_back(acc);
    trace.thetas.row(m) = state.theta.transpose();
    for (std::size_t n = 0; n < obs.N; ++n) trace.residual_means[n] += state.eps[n];
    if (cfg.record_variances && m % cfg.variance_stride == 0) trace.snapshots.push_back({m, state.V});
  }
  for (double& r : trace.residual_means) r /= static_cast<double>(M - 1);
  trace.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(M - 1);
  return trace;
}

}  // namespace

ChainTrace run_mwg(const ModelSpec& model, const ObservationSet& obs, StableIndex beta, const Prior& prior,
                   const MCMCConfig& cfg, const Eigen::VectorXd& init) {
  return run(model, obs, beta, prior, cfg, init, Variant::mwg);
}

ChainTrace run_cpm(const ModelSpec& model, const ObservationSet& obs, StableIndex beta, const Prior& prior,
                   const MCMCConfig& cfg, const Eigen::VectorXd& init) {
  return run(model, obs, beta, prior, cfg, init, Variant::cpm);
}

ChainTrace run_chain(const ModelSpec& model, const ObservationSet& obs, StableIndex beta, const Prior& prior,
                     const MCMCConfig& cfg, const Eigen::VectorXd& init) {
  return run(model, obs, beta, prior, cfg, init, cfg.variant);
}

Eigen::MatrixXd thin_draws(const ChainTrace& trace, std::size_t burn, std::size_t stride) {
  if (stride == 0) throw DomainError("thinning stride must be positive");
  const std::size_t M = static_cast<std::size_t>(trace.thetas.rows());
  if (burn >= M) throw DomainError("burn-in exceeds the chain length");
  const std::size_t k = (M - burn + stride - 1) / stride;
  Eigen::MatrixXd out(k, trace.thetas.cols());
  for (std::size_t i = 0; i < k; ++i) out.row(i) = trace.thetas.row(burn + i * stride);
  return out;
}

Eigen::MatrixXd tuned_proposal(const Eigen::MatrixXd& draws, const Eigen::VectorXd& rate) {
  if (draws.rows() < 2) throw DomainError("need at least two pilot draws");
  Eigen::MatrixXd u = draws;
  if (rate.size() != 0) u = u * rate.asDiagonal();
  const Eigen::RowVectorXd mean = u.colwise().mean();
  const Eigen::MatrixXd c = u.rowwise() - mean;
  Eigen::MatrixXd cov = c.transpose() * c / static_cast<double>(draws.rows() - 1);
  const double p = static_cast<double>(draws.cols());
  cov *= 2.38 * 2.38 / p;
  // Keep the result usable when a coordinate never moved in the pilot.
  for (Eigen::Index i = 0; i < cov.rows(); ++i)
    if (!(cov(i, i) > 0.0)) cov(i, i) = 2.38 * 2.38 / p;
  cov = 0.5 * (cov + cov.transpose());
  return cov;
}

}  // namespace stablesde
