#include "stablesde/simulate.hpp"

#include <cmath>
#include <string>

#include "stablesde/errors.hpp"
#include "stablesde/samplers.hpp"

namespace stablesde {

ObservationSet ObservationSet::from_values(std::vector<double> values, double T) {
  if (values.size() < 2) throw DomainError("an observation record needs at least 2 values");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("terminal time must be positive");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i])) throw DomainError("non-finite observation at index " + std::to_string(i));
  ObservationSet obs;
  obs.N = values.size() - 1;
  obs.T = T;
  obs.h = T / static_cast<double>(obs.N);
  obs.values = std::move(values);
  return obs;
}

ObservationSet simulate_path(const ModelSpec& model, const Eigen::VectorXd& theta0, StableIndex beta,
                             std::size_t N, double T, const PathConfig& cfg, Stream& rng) {
  model.check_bounds(theta0);
  if (N < 1) throw DomainError("N must be at least 1");
  if (!(T > 0.0)) throw DomainError("T must be positive");
  if (cfg.refine < 1) throw DomainError("refine must be at least 1");
  const double h = T / static_cast<double>(N);
  const double step = h / cfg.refine;
  const double noise_scale = std::pow(step, 1.0 / beta);

  std::vector<double> values(N + 1);
  double x = cfg.x0;
  values[0] = x;
  for (std::size_t n = 1; n <= N; ++n) {
    for (int k = 0; k < cfg.refine; ++k) {
      const double a = model.drift_at(x, theta0);
      const double c = model.scale_at(x, theta0);
      x += a * step + c * noise_scale * draw_symmetric_stable(beta, rng);
      if (!std::isfinite(x) || std::abs(x) > 1e12) throw SimulationFailure("state left |x| <= 1e12", n);
    }
    values[n] = x;
  }
  ObservationSet obs;
  obs.values = std::move(values);
  obs.N = N;
  obs.T = T;
  obs.h = h;
  return obs;
}

ObservationSet simulate_path(const ModelSpec& model, const Eigen::VectorXd& theta0, StableIndex beta,
                             std::size_t N, double T, const PathConfig& cfg) {
  Stream rng(cfg.seed);
  return simulate_path(model, theta0, beta, N, T, cfg, rng);
}

std::vector<double> increments(const ObservationSet& obs) {
  std::vector<double> out(obs.values.size() > 0 ? obs.values.size() - 1 : 0);
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = obs.values[n + 1] - obs.values[n];
  return out;
}

}  // namespace stablesde
