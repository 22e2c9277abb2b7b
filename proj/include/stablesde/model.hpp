#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "stablesde/expr.hpp"

namespace stablesde {

struct Interval {
  double lo;
  double hi;
};

/// Drift a(x, alpha) and scale c(x, gamma) of
///   dX = a(X, alpha) dt + c(X-, gamma) dJ
/// with a box parameter space. The parameter vector is laid out as
/// theta = (alpha_1..alpha_pa, gamma_1..gamma_pg).
class ModelSpec {
 public:
  ModelSpec(const std::string& drift, const std::string& scale, std::vector<std::string> alpha_names,
            std::vector<std::string> gamma_names, std::vector<Interval> bounds);

  std::size_t p_alpha() const noexcept { return alpha_names_.size(); }
  std::size_t p_gamma() const noexcept { return gamma_names_.size(); }
  std::size_t dim() const noexcept { return p_alpha() + p_gamma(); }

  const ExprPtr& drift() const noexcept { return drift_; }
  const ExprPtr& scale() const noexcept { return scale_; }
  const std::string& drift_text() const noexcept { return drift_text_; }
  const std::string& scale_text() const noexcept { return scale_text_; }
  const std::vector<std::string>& alpha_names() const noexcept { return alpha_names_; }
  const std::vector<std::string>& gamma_names() const noexcept { return gamma_names_; }
  std::vector<std::string> param_names() const;
  const std::vector<Interval>& bounds() const noexcept { return bounds_; }

  /// Closed-box membership; the single test used everywhere.
  bool in_bounds(const Eigen::VectorXd& theta) const;
  /// Throws ModelViolation naming the first offending coordinate.
  void check_bounds(const Eigen::VectorXd& theta) const;

  double drift_at(double x, const Eigen::VectorXd& theta) const;
  double scale_at(double x, const Eigen::VectorXd& theta) const;
  /// d a / d alpha_i, i < p_alpha, written to out[0..p_alpha).
  void drift_grad_at(double x, const Eigen::VectorXd& theta, double* out) const;
  /// d c / d gamma_j, written to out[0..p_gamma).
  void scale_grad_at(double x, const Eigen::VectorXd& theta, double* out) const;

  const ExprPtr& drift_derivative(std::size_t i) const { return drift_grad_[i]; }
  const ExprPtr& scale_derivative(std::size_t j) const { return scale_grad_[j]; }

 private:
  double eval(const CompiledExpr& c, double x, const Eigen::VectorXd& theta) const;

  std::string drift_text_, scale_text_;
  std::vector<std::string> alpha_names_, gamma_names_;
  std::vector<Interval> bounds_;
  ExprPtr drift_, scale_;
  std::vector<ExprPtr> drift_grad_, scale_grad_;
  CompiledExpr drift_c_, scale_c_;
  std::vector<CompiledExpr> drift_grad_c_, scale_grad_c_;
};

struct ModelViolationRecord {
  double x;
  std::size_t probe;  ///< index into the probe list
  std::string what;
};

struct ValidationReport {
  bool passed = true;
  std::vector<ModelViolationRecord> violations;
};

/// Evaluates drift and scale at every (x, theta) pair; records nonpositive
/// scale and evaluation failures. Never throws for violations.
ValidationReport validate_model(const ModelSpec& spec, const std::vector<Eigen::VectorXd>& theta_probes,
                                const std::vector<double>& x_grid);

}  // namespace stablesde
