#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "stablesde/model.hpp"
#include "stablesde/random.hpp"
#include "stablesde/stable.hpp"

namespace stablesde {

/// Discrete record X_0..X_N on the grid h = T / N.
struct ObservationSet {
  std::vector<double> values;
  std::size_t N = 0;
  double T = 1.0;
  double h = 1.0;

  /// Validates finiteness and length >= 2; sets N and h from T.
  static ObservationSet from_values(std::vector<double> values, double T);
};

struct PathConfig {
  std::uint64_t seed = 0;
  int refine = 1;  ///< Euler substeps per observation interval
  double x0 = 0.0;
};

/// Euler scheme X += a h' + c h'^{1/beta} z with z symmetric stable and
/// h' = h / refine; the record keeps every refine-th state.
ObservationSet simulate_path(const ModelSpec& model, const Eigen::VectorXd& theta0, StableIndex beta,
                             std::size_t N, double T, const PathConfig& cfg, Stream& rng);

/// Same, with the stream seeded from cfg.seed.
ObservationSet simulate_path(const ModelSpec& model, const Eigen::VectorXd& theta0, StableIndex beta,
                             std::size_t N, double T, const PathConfig& cfg);

std::vector<double> increments(const ObservationSet& obs);

}  // namespace stablesde
