#pragma once

#include <cstddef>
#include <vector>

#include "stablesde/random.hpp"
#include "stablesde/stable.hpp"

namespace stablesde {

/// One draw with characteristic function exp(-|u|^beta) (Chambers-Mallows-Stuck).
double draw_symmetric_stable(double beta, Stream& rng);

/// One draw from F_beta: V = 2 S with S one-sided stable of index beta/2,
/// E exp(-t S) = exp(-t^{beta/2}) (Kanter). Returns log V in `log_v` if given.
double draw_positive_stable(double beta, Stream& rng, double* log_v = nullptr);

std::vector<double> sample_symmetric_stable(StableIndex beta, std::size_t n, Stream& rng);
std::vector<double> sample_positive_stable(StableIndex beta, std::size_t n, Stream& rng);

/// Distribution function of the one-sided stable law with Laplace transform
/// exp(-t^alpha), 0 < alpha < 1, by Zolotarev's integral representation.
double one_sided_stable_cdf(double s, double alpha);
double one_sided_stable_pdf(double s, double alpha);
double one_sided_stable_pdf(double s, double alpha, double rel_tol);

enum class EnvelopeMode {
  exact_bound,    ///< envelope |x|^{-1} e^{-1/2}, the supremum over v
  clamped_bound,  ///< envelope |x|^{-1/2} e^{-|x|/2}, acceptance clamped at 1
};

struct ConditionalSamplerConfig {
  double small_x_threshold = 1e-3;
  int grid_size = 2048;
  long max_rejections = 1000000;
  EnvelopeMode mode = EnvelopeMode::exact_bound;

  void validate() const;
};

/// Sampler for F_beta(dv | x), proportional to v^{-1/2} exp(-x^2/(2v)) F_beta(dv).
///
/// For |x| >= small_x_threshold: propose v ~ F_beta and accept with
/// probability v^{-1/2} exp(-x^2/(2v)) / M(x). Below the threshold: inverse
/// CDF on a log-spaced grid for the x = 0 target v^{-1/2} F_beta(dv), then a
/// thinning step with probability exp(-x^2/(2v)).
class ConditionalVarianceSampler {
 public:
  explicit ConditionalVarianceSampler(StableIndex beta, ConditionalSamplerConfig cfg = {});

  double beta() const noexcept { return beta_; }
  const ConditionalSamplerConfig& config() const noexcept { return cfg_; }

  double sample(double x, Stream& rng) const;

  /// Log of the unclamped acceptance ratio for proposal v under the active
  /// envelope. In exact-bound mode this is <= 0 for every v.
  double log_acceptance(double x, double v) const;

  /// Grid-path draw, exposed for testing.
  double sample_grid(double x, Stream& rng) const;

 private:
  double beta_;
  ConditionalSamplerConfig cfg_;
  std::vector<double> log_v_;  // grid nodes (log v)
  std::vector<double> cum_;    // normalized cumulative mass at the nodes
};

double sample_conditional_variance(double x, const ConditionalVarianceSampler& sampler, Stream& rng);

}  // namespace stablesde
