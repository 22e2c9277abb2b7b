#include "stablesde/model.hpp"

#include <cmath>
#include <set>

#include "stablesde/errors.hpp"

namespace stablesde {

namespace {

void check_names(const std::vector<std::string>& names, std::set<std::string>& seen) {
  for (const auto& n : names) {
    if (n == "x") throw ConfigError("parameter name 'x' is reserved for the state variable");
    if (n.empty()) throw ConfigError("empty parameter name");
    if (!seen.insert(n).second) throw ConfigError("duplicate parameter name '" + n + "'");
  }
}

}  // namespace

ModelSpec::ModelSpec(const std::string& drift, const std::string& scale, std::vector<std::string> alpha_names,
                     std::vector<std::string> gamma_names, std::vector<Interval> bounds)
    : drift_text_(drift),
      scale_text_(scale),
      alpha_names_(std::move(alpha_names)),
      gamma_names_(std::move(gamma_names)),
      bounds_(std::move(bounds)) {
  std::set<std::string> seen;
  check_names(alpha_names_, seen);
  check_names(gamma_names_, seen);
  if (gamma_names_.empty()) throw ConfigError("the scale needs at least one parameter");
  if (bounds_.size() != dim())
    throw ConfigError("expected " + std::to_string(dim()) + " bounds, got " + std::to_string(bounds_.size()));
  for (std::size_t i = 0; i < bounds_.size(); ++i) {
    if (!std::isfinite(bounds_[i].lo) || !std::isfinite(bounds_[i].hi) || !(bounds_[i].lo < bounds_[i].hi))
      throw ConfigError("bounds for parameter " + std::to_string(i) + " must be finite with lo < hi");
  }

  std::set<std::string> drift_vars{"x"}, scale_vars{"x"};
  drift_vars.insert(alpha_names_.begin(), alpha_names_.end());
  scale_vars.insert(gamma_names_.begin(), gamma_names_.end());
  drift_ = parse_expr(drift_text_, drift_vars);
  scale_ = parse_expr(scale_text_, scale_vars);

  std::vector<std::string> slots{"x"};
  slots.insert(slots.end(), alpha_names_.begin(), alpha_names_.end());
  slots.insert(slots.end(), gamma_names_.begin(), gamma_names_.end());
  drift_c_ = CompiledExpr(drift_, slots);
  scale_c_ = CompiledExpr(scale_, slots);
  for (const auto& n : alpha_names_) {
    drift_grad_.push_back(diff_expr(drift_, n));
    drift_grad_c_.emplace_back(drift_grad_.back(), slots);
  }
  for (const auto& n : gamma_names_) {
    scale_grad_.push_back(diff_expr(scale_, n));
    scale_grad_c_.emplace_back(scale_grad_.back(), slots);
  }
}

std::vector<std::string> ModelSpec::param_names() const {
  std::vector<std::string> out = alpha_names_;
  out.insert(out.end(), gamma_names_.begin(), gamma_names_.end());
  return out;
}

bool ModelSpec::in_bounds(const Eigen::VectorXd& theta) const {
  if (static_cast<std::size_t>(theta.size()) != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i)
    if (!(theta[i] >= bounds_[i].lo && theta[i] <= bounds_[i].hi)) return false;
  return true;
}

void ModelSpec::check_bounds(const Eigen::VectorXd& theta) const {
  if (static_cast<std::size_t>(theta.size()) != dim())
    throw ModelViolation("parameter vector has length " + std::to_string(theta.size()), 0);
  for (std::size_t i = 0; i < dim(); ++i)
    if (!(theta[i] >= bounds_[i].lo && theta[i] <= bounds_[i].hi))
      throw ModelViolation("parameter outside its bounds", i);
}

double ModelSpec::eval(const CompiledExpr& c, double x, const Eigen::VectorXd& theta) const {
  double slots[64];
  std::vector<double> big;
  double* s = slots;
  if (dim() + 1 > 64) {
    big.resize(dim() + 1);
    s = big.data();
  }
  s[0] = x;
  for (std::size_t i = 0; i < dim(); ++i) s[i + 1] = theta[i];
  return c.eval(s);
}

double ModelSpec::drift_at(double x, const Eigen::VectorXd& theta) const { return eval(drift_c_, x, theta); }
double ModelSpec::scale_at(double x, const Eigen::VectorXd& theta) const { return eval(scale_c_, x, theta); }

void ModelSpec::drift_grad_at(double x, const Eigen::VectorXd& theta, double* out) const {
  for (std::size_t i = 0; i < p_alpha(); ++i) out[i] = eval(drift_grad_c_[i], x, theta);
}

void ModelSpec::scale_grad_at(double x, const Eigen::VectorXd& theta, double* out) const {
  for (std::size_t j = 0; j < p_gamma(); ++j) out[j] = eval(scale_grad_c_[j], x, theta);
}

ValidationReport validate_model(const ModelSpec& spec, const std::vector<Eigen::VectorXd>& theta_probes,
                                const std::vector<double>& x_grid) {
  if (theta_probes.empty() || x_grid.empty()) throw DomainError("validation grids must be nonempty");
  ValidationReport report;
  for (std::size_t p = 0; p < theta_probes.size(); ++p) {
    for (double x : x_grid) {
      try {
        spec.drift_at(x, theta_probes[p]);
      } catch (const EvalError& e) {
        report.violations.push_back({x, p, std::string("drift: ") + e.what()});
      }
      try {
        const double c = spec.scale_at(x, theta_probes[p]);
        if (!(c > 0.0)) report.violations.push_back({x, p, "scale not positive"});
      } catch (const EvalError& e) {
        report.violations.push_back({x, p, std::string("scale: ") + e.what()});
      }
    }
  }
  report.passed = report.violations.empty();
  return report;
}

}  // namespace stablesde
