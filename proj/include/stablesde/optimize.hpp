#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "stablesde/model.hpp"

namespace stablesde {

struct OptimizerConfig {
  double diameter_tol = 1e-8;   ///< stop when max |x_i - x_best| over vertices falls below
  int max_iterations = 2000;    ///< per start
  int max_restarts = 3;         ///< restarts when the best vertex sits on the box boundary
  double initial_step = 0.05;   ///< initial edge length as a fraction of each box width

  void validate() const;
};

struct OptimizerResult {
  Eigen::VectorXd x;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  int restarts = 0;
};

/// Maps a point into the closed box by reflecting at the faces.
Eigen::VectorXd reflect_into_box(Eigen::VectorXd x, const std::vector<Interval>& box);

/// Nelder-Mead maximization of f over a closed box; trial points are reflected
/// into the box. Points where f throws or is not finite count as -infinity.
OptimizerResult nelder_mead_maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const Eigen::VectorXd& init, const std::vector<Interval>& box,
                                     const OptimizerConfig& cfg = {});

}  // namespace stablesde
