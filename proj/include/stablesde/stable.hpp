#pragma once

#include <array>
#include <optional>
#include <vector>

namespace stablesde {

/// Exponent of the symmetric stable law with characteristic function
/// exp(-|u|^beta). Restricted to [1, 2).
class StableIndex {
 public:
  explicit StableIndex(double beta);
  double value() const noexcept { return beta_; }
  operator double() const noexcept { return beta_; }

 private:
  double beta_;
};

struct QuadratureConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  double tail_switch = 10.0;  ///< |x| beyond which the asymptotic series is tried
  long max_nodes = 400000;    ///< integrand evaluations allowed per integral

  void validate() const;
};

/// phi and its first four derivatives at one point.
using DensityDerivatives = std::array<double, 5>;

/// Direct evaluation of phi_beta(x) = (1/pi) int_0^inf exp(-t^beta) cos(tx) dt
/// by panelled Gauss-Kronrod quadrature, or by the asymptotic tail series
/// when |x| > tail_switch and the series converges.
double stable_pdf(double x, StableIndex beta, const QuadratureConfig& quad = {});

double stable_cdf(double x, StableIndex beta, const QuadratureConfig& quad = {});

/// phi, phi', phi'', phi''', phi'''' at x.
DensityDerivatives stable_pdf_derivatives(double x, StableIndex beta,
                                          const QuadratureConfig& quad = {});

struct StableScores {
  double g;  ///< d/dx log phi
  double h;  ///< d^2/dx^2 log phi - g / x
};

/// Scores by direct quadrature. Throws DomainError for x == 0 (h has a 1/x
/// term); use stable_score_g for the g component alone.
StableScores stable_scores(double x, StableIndex beta, const QuadratureConfig& quad = {});
double stable_score_g(double x, StableIndex beta, const QuadratureConfig& quad = {});

/// Asymptotic tail expansion of phi and its derivatives for x > 0. Returns
/// nullopt if the series has not converged to `rel_tol` before its terms
/// start growing.
std::optional<DensityDerivatives> stable_tail_series(double x, double beta, double rel_tol);

/// Survival function 1 - F(x) from the tail expansion, x > 0.
std::optional<double> stable_tail_survival(double x, double beta, double rel_tol);

namespace detail {
/// Direct quadrature without the [1, 2) restriction, for 0 < beta <= 2. Used
/// where an index search must look slightly outside the supported range.
double stable_pdf_unchecked(double x, double beta, const QuadratureConfig& quad = {});
double stable_cdf_unchecked(double x, double beta, const QuadratureConfig& quad = {});
}  // namespace detail

/// Symmetric stable law with tabulated phi, phi', phi'' and F.
///
/// Nodes are computed once by direct quadrature; evaluation between nodes
/// uses quintic Hermite interpolation (phi from phi..phi'', phi' from
/// phi'..phi''', phi'' from phi''..phi''''). Beyond the table the tail
/// series is used. Immutable after construction; safe to share across threads.
class StableLaw {
 public:
  explicit StableLaw(StableIndex beta, QuadratureConfig quad = {});

  double beta() const noexcept { return beta_; }
  const QuadratureConfig& quadrature() const noexcept { return quad_; }
  double table_end() const noexcept { return x_end_; }

  double pdf(double x) const;
  double log_pdf(double x) const;
  double cdf(double x) const;
  double quantile(double p) const;

  /// g = phi'/phi. Odd in x; g(0) = 0.
  double score(double x) const;
  /// (g, h); throws DomainError at x == 0.
  StableScores scores(double x) const;
  /// h without the x == 0 check; returns the analytic limit 0 at x == 0.
  double h_unchecked(double x) const;

  /// phi, phi', phi'' at |x| (derivative signs are for the positive side).
  std::array<double, 3> derivs_abs(double ax) const;

 private:
  // Tail sums normalized by x^{-(beta+1)}, x^{-(beta+2)}, x^{-(beta+3)} so
  // they stay O(1) at any |x|.
  std::array<double, 3> tail_sums(double ax) const;
  double tail_survival(double ax) const;
  double survival_abs(double ax) const;

  double beta_;
  QuadratureConfig quad_;
  double dx_ = 0.025;
  double x_end_ = 0.0;
  std::vector<double> d0_, d1_, d2_, d3_, d4_, cdf_;
  std::vector<double> tail_a_;    // signed series coefficients, k = 1..K
  std::vector<double> tail_env_;  // their magnitudes without the sine factor
};

struct FisherConstants {
  double c_alpha;       ///< int (phi'/phi)^2 phi
  double c_gamma;       ///< int (1 + y phi'/phi)^2 phi
  double c_alpha_dag;   ///< int v^{-1} F_beta(dv)
  double c_gamma_dag;   ///< exactly 2
  double c_alpha_star;  ///< c_alpha_dag - c_alpha
  double c_gamma_star;  ///< c_gamma_dag - c_gamma
};

FisherConstants fisher_constants(const StableLaw& law);
FisherConstants fisher_constants(StableIndex beta, const QuadratureConfig& quad = {});

/// int_{-inf}^{inf} f(x) phi(x) dx for a caller-supplied weight f, splitting
/// the line at the table end and using a double-exponential rule beyond it.
/// `f` must be even or the caller must pass `even = false`.
template <class F>
double integrate_against_density(const StableLaw& law, F&& f, bool even = true);

}  // namespace stablesde

#include "stablesde/detail/integrate_against_density.hpp"
