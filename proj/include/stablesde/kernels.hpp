#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

#include "stablesde/model.hpp"
#include "stablesde/samplers.hpp"
#include "stablesde/simulate.hpp"
#include "stablesde/stable.hpp"

namespace stablesde {

/// Loop backend for the N-indexed kernels. Both produce bit-identical
/// results: elementwise work is order-free and reductions use fixed blocks.
enum class Backend { serial, openmp };

namespace kernels {

inline constexpr std::size_t kBlock = 256;

/// Runs f(i) for i in [0, n). With the OpenMP backend the first exception by
/// index is rethrown after the loop, matching the serial behaviour.
template <class F>
void for_each_index(std::size_t n, Backend backend, F&& f) {
  if (backend == Backend::serial) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr err;
  std::size_t err_index = n;
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sn; ++i) {
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(stablesde_kernel_error)
      {
        if (static_cast<std::size_t>(i) < err_index) {
          err_index = static_cast<std::size_t>(i);
          err = std::current_exception();
        }
      }
    }
  }
  if (err) std::rethrow_exception(err);
}

namespace detail {
inline double pairwise(const double* x, std::size_t n) {
  if (n <= 2) return n == 0 ? 0.0 : (n == 1 ? x[0] : x[0] + x[1]);
  const std::size_t half = n / 2;
  return pairwise(x, half) + pairwise(x + half, n - half);
}
}  // namespace detail

/// Sum of term(i), i < n, over fixed blocks of kBlock; block totals are
/// combined pairwise. The grouping does not depend on the backend.
template <class F>
double blocked_sum_of(std::size_t n, Backend backend, F&& term) {
  if (n == 0) return 0.0;
  const std::size_t nb = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nb);
  for_each_index(nb, backend, [&](std::size_t b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    partial[b] = s;
  });
  return detail::pairwise(partial.data(), nb);
}

double blocked_sum(const double* x, std::size_t n, Backend backend);

/// Column sums of a row-major n x width array, each with blocked_sum_of.
void blocked_column_sums(const double* rows, std::size_t n, std::size_t width, double* out, Backend backend);

/// sum_n [log c_n - log c*_n + (eps_n^2 / V_n - eps*_n^2 / V*_n) / 2], plus
/// sum_n (log V_n - log V*_n) / 2 when V_star differs from V.
double complete_ratio(const double* eps, const double* log_c, const double* V, const double* eps_star,
                      const double* log_c_star, const double* V_star, std::size_t n, Backend backend);

/// eps_n = (dX_n - a(X_{n-1}) h) / (c(X_{n-1}) h^{1/beta}) and log c(X_{n-1}).
/// Throws ModelViolation with the index if c <= 0.
void residuals(const ModelSpec& model, const Eigen::VectorXd& theta, const ObservationSet& obs, double beta,
               double* eps, double* log_c, Backend backend);

void log_density(const StableLaw& law, const double* eps, std::size_t n, double* out, Backend backend);

/// V_n ~ F_beta(dv | eps_n) using the stream derived from (seed, key, n).
void refresh_variances(const ConditionalVarianceSampler& sampler, const double* eps, std::size_t n,
                       std::uint64_t seed, std::uint64_t key, double* V, Backend backend);

/// V*_n = rho^{2/beta} V_n + (1 - rho)^{2/beta} xi_n, xi_n ~ F_beta from the
/// stream derived from (seed, key, n).
void cpm_update(const double* V, std::size_t n, double rho, double beta, std::uint64_t seed, std::uint64_t key,
                double* V_star, Backend backend);

}  // namespace kernels
}  // namespace stablesde
