#include "stablesde/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "stablesde/errors.hpp"

namespace stablesde {

AcceptanceSummary acceptance_summary(const std::vector<bool>& accept_flags) {
  if (accept_flags.empty()) throw DomainError("acceptance summary of an empty trace");
  AcceptanceSummary s;
  s.running_rate.reserve(accept_flags.size());
  std::size_t acc = 0;
  for (std::size_t i = 0; i < accept_flags.size(); ++i) {
    acc += accept_flags[i];
    s.running_rate.push_back(static_cast<double>(acc) / static_cast<double>(i + 1));
  }
  s.rate = s.running_rate.back();
  return s;
}

AcceptanceSummary acceptance_summary(const ChainTrace& trace) { return acceptance_summary(trace.accept_flags); }

namespace {

void check_symmetric_psd(const Eigen::MatrixXd& m, const char* name) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (m.rows() != m.cols() || !m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw DomainError(std::string(name) + " must be a finite symmetric matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10 * scale)
    throw DomainError(std::string(name) + " must be positive semidefinite");
}

// E clip(X, -1, 1) for X ~ N(m, s^2).
double gaussian_clip_mean(double m, double s) {
  if (s == 0.0) return std::clamp(m, -1.0, 1.0);
  const double a = (-1.0 - m) / s, b = (1.0 - m) / s;
  const double pa = normal_cdf(a), pb = normal_cdf(b);
  return -pa + (1.0 - pb) + m * (pb - pa) + s * (normal_pdf(a) - normal_pdf(b));
}

Eigen::MatrixXd bl_directions(Eigen::Index p) {
  constexpr int kDirections = 16;
  Eigen::MatrixXd d(kDirections, p);
  Stream rng(0xB0B5EEDULL);
  for (int k = 0; k < kDirections; ++k) {
    Eigen::VectorXd v(p);
    if (k < p) {
      v.setZero();
      v[k] = 1.0;
    } else {
      for (Eigen::Index i = 0; i < p; ++i) v[i] = rng.normal();
      v.normalize();
    }
    d.row(k) = v.transpose();
  }
  return d;
}

}  // namespace

BvMReport bvm_report(const Eigen::MatrixXd& draws, const QuasiInfo& info, const Eigen::VectorXd& center,
                     std::string center_label) {
  const Eigen::Index p = center.size();
  if (draws.cols() != p || info.I.rows() != p || info.D.size() != p || info.Delta.size() != p)
    throw DomainError("bvm_report dimension mismatch");
  if (draws.rows() < 2) throw DomainError("bvm_report needs at least two draws");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info.I, Eigen::EigenvaluesOnly);
  const double top = es.eigenvalues().maxCoeff();
  if (!(top > 0.0) || es.eigenvalues().minCoeff() <= 1e-12 * top)
    throw DomainError("information matrix is singular; use more data or check the model's identifiability");

  BvMReport r;
  r.center = center;
  r.center_label = std::move(center_label);
  r.limit_cov = info.I.inverse();
  r.limit_cov = 0.5 * (r.limit_cov + r.limit_cov.transpose());
  r.limit_mean = r.limit_cov * info.Delta;
  r.rescaled = (draws.rowwise() - center.transpose()) * info.D.asDiagonal();

  r.per_coordinate_ks.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double mu = r.limit_mean[i], sd = std::sqrt(r.limit_cov(i, i));
    std::vector<double> col(r.rescaled.rows());
    for (Eigen::Index m = 0; m < r.rescaled.rows(); ++m) col[m] = r.rescaled(m, i);
    r.per_coordinate_ks[i] = ks_statistic(std::move(col), [=](double x) { return normal_cdf((x - mu) / sd); });
  }

  const Eigen::MatrixXd dirs = bl_directions(p);
  const Eigen::MatrixXd proj = r.rescaled * dirs.transpose();  // M x 16
  double worst = 0.0;
  for (Eigen::Index k = 0; k < dirs.rows(); ++k) {
    const Eigen::VectorXd d = dirs.row(k).transpose();
    const double mu = d.dot(r.limit_mean);
    const double sd = std::sqrt(std::max(0.0, d.dot(r.limit_cov * d)));
    for (double off : {-1.5, -0.5, 0.5, 1.5}) {
      const double b = mu + off * sd;
      double emp = 0.0;
      for (Eigen::Index m = 0; m < proj.rows(); ++m) emp += 0.5 * std::clamp(proj(m, k) - b, -1.0, 1.0);
      emp /= static_cast<double>(proj.rows());
      worst = std::max(worst, std::abs(emp - 0.5 * gaussian_clip_mean(mu - b, sd)));
    }
  }
  r.bl_distance_estimate = worst;
  return r;
}

BvMReport bvm_report(const ChainTrace& trace, const QuasiInfo& info, const Eigen::VectorXd& center,
                     std::string center_label) {
  return bvm_report(trace.thetas, info, center, std::move(center_label));
}

MeanSe limiting_acceptance(const Eigen::VectorXd& u, const Eigen::VectorXd& v, const Eigen::VectorXd& Delta,
                           const Eigen::MatrixXd& I, const Eigen::MatrixXd& I_star, std::size_t mc_n, Stream& rng,
                           QuadraticCoefficient k) {
  const Eigen::Index p = u.size();
  if (v.size() != p || Delta.size() != p || I.rows() != p || I_star.rows() != p)
    throw DomainError("limiting_acceptance dimension mismatch");
  check_symmetric_psd(I, "I");
  check_symmetric_psd(I_star, "I_star");
  if (mc_n == 0) throw DomainError("limiting_acceptance needs mc_n >= 1");
  const Eigen::VectorXd d = v - u;
  if (d.isZero(0.0)) return {1.0, 0.0};
  const double coef = k == QuadraticCoefficient::derived ? 0.5 : 1.0;
  const double eta0 = Delta.dot(d) - coef * (v.dot(I * v) - u.dot(I * u)) - 0.5 * d.dot(I_star * d);
  const double s = std::sqrt(std::max(0.0, d.dot(I_star * d)));
  if (s == 0.0) return {std::min(1.0, std::exp(eta0)), 0.0};
  std::vector<double> a(mc_n);
  for (auto& x : a) x = std::min(1.0, std::exp(eta0 + s * rng.normal()));
  return mean_and_se(a);
}

MeanSe empirical_acceptance(const ModelSpec& model, const ObservationSet& obs, StableIndex beta,
                            const Prior& prior, const Eigen::VectorXd& center, const Eigen::VectorXd& u,
                            const Eigen::VectorXd& v, std::size_t trials, std::uint64_t seed, Backend backend) {
  if (trials == 0) throw DomainError("empirical_acceptance needs at least one trial");
  const Eigen::VectorXd D = rate_matrix(obs.N, obs.h, beta, model.p_alpha(), model.p_gamma());
  const Eigen::VectorXd from = center + u.cwiseQuotient(D);
  const Eigen::VectorXd to = center + v.cwiseQuotient(D);
  const double lp_from = prior.log_density(model, from);
  const double lp_to = prior.log_density(model, to);
  if (!std::isfinite(lp_from)) throw DomainError("starting point outside the parameter box");
  if (!std::isfinite(lp_to)) return {0.0, 0.0};
  const Residuals a = residuals(model, from, obs, beta, backend);
  const Residuals b = residuals(model, to, obs, beta, backend);
  const ConditionalVarianceSampler sampler(beta);
  std::vector<double> V(obs.N), acc(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    kernels::refresh_variances(sampler, a.eps.data(), obs.N, seed, t, V.data(), backend);
    const double lr = kernels::complete_ratio(a.eps.data(), a.log_c.data(), V.data(), b.eps.data(), b.log_c.data(),
                                              V.data(), obs.N, backend) +
                      (lp_to - lp_from);
    acc[t] = std::min(1.0, std::exp(lr));
  }
  return mean_and_se(acc);
}

double PPData::max_deviation() const {
  double d = 0.0;
  for (std::size_t i = 0; i < empirical.size(); ++i) d = std::max(d, std::abs(empirical[i] - model[i]));
  return d;
}

PPData pp_data(const std::vector<double>& residual_means, const StableLaw& law) {
  if (residual_means.empty()) throw DomainError("pp_data needs at least one residual");
  std::vector<double> r = residual_means;
  for (double x : r)
    if (!std::isfinite(x)) throw DomainError("residual means must be finite");
  std::sort(r.begin(), r.end());
  PPData out;
  const double n = static_cast<double>(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    out.empirical.push_back((static_cast<double>(k) + 0.5) / n);
    out.model.push_back(law.cdf(r[k]));
  }
  return out;
}

namespace {

constexpr double kBetaLo = 0.9, kBetaHi = 1.99;

double sample_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= sorted.size()) return sorted.back();
  const double w = pos - static_cast<double>(i);
  return sorted[i] + w * (sorted[i + 1] - sorted[i]);
}

// Positive quantile (p > 1/2) of the standard symmetric stable law.
double stable_quantile_any(double p, double beta) {
  double lo = 0.0, hi = 1.0;
  while (detail::stable_cdf_unchecked(hi, beta) < p) {
    lo = hi;
    hi *= 2.0;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 100 && hi - lo > 1e-12 * hi; ++it) {
    const double f = detail::stable_cdf_unchecked(x, beta) - p;
    (f < 0.0 ? lo : hi) = x;
    const double step = f / detail::stable_pdf_unchecked(x, beta);
    double next = x - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) < 1e-13 * std::max(1.0, x)) return next;
    x = next;
  }
  return x;
}

}  // namespace

double stable_quantile_ratio(double beta) {
  return stable_quantile_any(0.95, beta) / stable_quantile_any(0.75, beta);
}

BetaEstimate estimate_beta(const std::vector<double>& increments) {
  if (increments.size() < 100) throw DomainError("estimate_beta needs at least 100 increments");
  std::vector<double> s = increments;
  for (double x : s)
    if (!std::isfinite(x)) throw DomainError("increments must be finite");
  std::sort(s.begin(), s.end());
  const double iqr = sample_quantile(s, 0.75) - sample_quantile(s, 0.25);
  if (!(iqr > 0.0)) throw DomainError("degenerate sample: zero interquartile range");
  const double ratio = (sample_quantile(s, 0.95) - sample_quantile(s, 0.05)) / iqr;

  BetaEstimate e;
  if (ratio >= stable_quantile_ratio(kBetaLo)) {
    e.raw = kBetaLo;
  } else if (ratio <= stable_quantile_ratio(kBetaHi)) {
    e.raw = kBetaHi;
  } else {
    double lo = kBetaLo, hi = kBetaHi;  // ratio decreases in beta
    while (hi - lo > 1e-7) {
      const double mid = 0.5 * (lo + hi);
      (stable_quantile_ratio(mid) > ratio ? lo : hi) = mid;
    }
    e.raw = 0.5 * (lo + hi);
  }
  e.beta = std::clamp(e.raw, 1.0, kBetaHi);
  e.clamped = e.raw < 1.0 || e.raw >= kBetaHi;
  return e;
}

std::vector<SweepRow> sweep_acceptance(const ModelSpec& model, const Eigen::VectorXd& theta0, StableIndex beta,
                                       const std::vector<std::size_t>& N_list, std::size_t M, std::size_t replicates,
                                       std::uint64_t base_seed, const SweepOptions& opt, Backend backend) {
  if (N_list.empty()) throw DomainError("sweep needs at least one N");
  if (replicates == 0) throw DomainError("sweep needs at least one replicate");
  model.check_bounds(theta0);
  const Prior prior = opt.prior.dim() == 0 ? Prior::standard_normal(model.dim()) : opt.prior;
  const StableLaw law(beta);

  const std::size_t cells = N_list.size() * replicates;
  std::vector<double> rate(cells, std::numeric_limits<double>::quiet_NaN());
  auto run_cell = [&](std::size_t c) {
    const std::size_t i = c / replicates, r = c % replicates;
    const std::size_t N = N_list[i];
    Stream keys = Stream::derive(base_seed, N, r);
    PathConfig pc;
    pc.seed = keys.next();
    pc.x0 = opt.x0;
    try {
      const ObservationSet obs = simulate_path(model, theta0, beta, N, opt.T, pc);
      Eigen::VectorXd init = theta0;
      if (opt.init_at_mle) init = quasi_mle(model, obs, law, theta0).theta;
      MCMCConfig mc;
      mc.iterations = M;
      mc.seed = keys.next();
      mc.sigma = opt.sigma;
      mc.scale_by_rate = opt.scale_by_rate;
      rate[c] = run_mwg(model, obs, beta, prior, mc, init).acceptance_rate;
    } catch (const Error&) {
      // Leave NaN: the cell is reported as failed.
    }
  };
  if (backend == Backend::openmp) {
    const auto sc = static_cast<std::ptrdiff_t>(cells);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t c = 0; c < sc; ++c) run_cell(static_cast<std::size_t>(c));
  } else {
    for (std::size_t c = 0; c < cells; ++c) run_cell(c);
  }

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < N_list.size(); ++i) {
    SweepRow row;
    row.N = N_list[i];
    std::vector<double> ok;
    for (std::size_t r = 0; r < replicates; ++r) {
      const double x = rate[i * replicates + r];
      row.rates.push_back(x);
      if (std::isnan(x))
        ++row.failed;
      else
        ok.push_back(x);
    }
    if (ok.empty()) {
      row.mean_rate = row.sd_rate = std::numeric_limits<double>::quiet_NaN();
    } else {
      const MeanSe ms = mean_and_se(ok);
      row.mean_rate = ms.mean;
      row.sd_rate = ms.se * std::sqrt(static_cast<double>(ok.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace stablesde
