#include "stablesde/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "stablesde/errors.hpp"

namespace stablesde {

void OptimizerConfig::validate() const {
  if (!(diameter_tol > 0.0)) throw ConfigError("optimizer diameter_tol must be positive");
  if (max_iterations < 1) throw ConfigError("optimizer max_iterations must be at least 1");
  if (max_restarts < 0) throw ConfigError("optimizer max_restarts must be nonnegative");
  if (!(initial_step > 0.0 && initial_step <= 1.0)) throw ConfigError("optimizer initial_step must lie in (0, 1]");
}

Eigen::VectorXd reflect_into_box(Eigen::VectorXd x, const std::vector<Interval>& box) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double lo = box[i].lo, hi = box[i].hi, w = hi - lo;
    double v = x[i];
    if (!std::isfinite(v)) {
      x[i] = 0.5 * (lo + hi);
      continue;
    }
    // Fold onto [lo, lo + 2w), then mirror the upper half.
    double r = std::fmod(v - lo, 2.0 * w);
    if (r < 0.0) r += 2.0 * w;
    if (r > w) r = 2.0 * w - r;
    x[i] = std::clamp(lo + r, lo, hi);
  }
  return x;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Simplex {
  std::vector<Eigen::VectorXd> x;
  std::vector<double> f;  // minimized: -objective
};

bool on_boundary(const Eigen::VectorXd& x, const std::vector<Interval>& box) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double tol = 1e-6 * (box[i].hi - box[i].lo);
    if (x[i] - box[i].lo <= tol || box[i].hi - x[i] <= tol) return true;
  }
  return false;
}

}  // namespace

OptimizerResult nelder_mead_maximize(const std::function<double(const Eigen::VectorXd&)>& f,
                                     const Eigen::VectorXd& init, const std::vector<Interval>& box,
                                     const OptimizerConfig& cfg) {
  cfg.validate();
  const auto n = init.size();
  if (n == 0 || static_cast<std::size_t>(n) != box.size()) throw DomainError("optimizer dimension mismatch");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(init[i] >= box[i].lo && init[i] <= box[i].hi)) throw DomainError("optimizer start outside the box");

  auto cost = [&](const Eigen::VectorXd& x) {
    try {
      const double v = f(x);
      return std::isfinite(v) ? -v : kInf;
    } catch (const Error&) {
      return kInf;
    }
  };

  OptimizerResult best;
  best.x = init;
  best.value = -cost(init);
  Eigen::VectorXd start = init;

  for (int attempt = 0; attempt <= cfg.max_restarts; ++attempt) {
    Simplex s;
    s.x.push_back(start);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::VectorXd v = start;
      const double step = cfg.initial_step * (box[i].hi - box[i].lo);
      v[i] += (v[i] + step <= box[i].hi) ? step : -step;
      s.x.push_back(reflect_into_box(v, box));
    }
    for (const auto& v : s.x) s.f.push_back(cost(v));

    std::vector<int> order(n + 1);
    bool converged = false;
    int it = 0;
    for (; it < cfg.max_iterations; ++it) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return s.f[a] < s.f[b]; });
      const int lo = order[0], hi = order[n], nh = order[n - 1];

      double diam = 0.0;
      for (const auto& v : s.x) diam = std::max(diam, (v - s.x[lo]).cwiseAbs().maxCoeff());
      if (diam < cfg.diameter_tol) {
        converged = true;
        break;
      }

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (Eigen::Index k = 0; k <= n; ++k)
        if (k != hi) centroid += s.x[k];
      centroid /= static_cast<double>(n);

      const Eigen::VectorXd xr = reflect_into_box(centroid + (centroid - s.x[hi]), box);
      const double fr = cost(xr);
      if (fr < s.f[lo]) {
        const Eigen::VectorXd xe = reflect_into_box(centroid + 2.0 * (centroid - s.x[hi]), box);
        const double fe = cost(xe);
        if (fe < fr) {
          s.x[hi] = xe;
          s.f[hi] = fe;
        } else {
          s.x[hi] = xr;
          s.f[hi] = fr;
        }
        continue;
      }
      if (fr < s.f[nh]) {
        s.x[hi] = xr;
        s.f[hi] = fr;
        continue;
      }
      const bool outside = fr < s.f[hi];
      const Eigen::VectorXd xc = outside ? reflect_into_box(centroid + 0.5 * (xr - centroid), box)
                                         : Eigen::VectorXd(centroid + 0.5 * (s.x[hi] - centroid));
      const double fc = cost(xc);
      if (fc < std::min(fr, s.f[hi])) {
        s.x[hi] = xc;
        s.f[hi] = fc;
        continue;
      }
      for (Eigen::Index k = 0; k <= n; ++k) {
        if (k == lo) continue;
        s.x[k] = s.x[lo] + 0.5 * (s.x[k] - s.x[lo]);
        s.f[k] = cost(s.x[k]);
      }
    }

    const auto lo = std::min_element(s.f.begin(), s.f.end()) - s.f.begin();
    best.iterations += it;
    if (-s.f[lo] >= best.value) {
      best.x = s.x[lo];
      best.value = -s.f[lo];
    }
    best.converged = converged;
    best.restarts = attempt;
    if (!converged || !on_boundary(best.x, box)) break;
    start = best.x;
  }
  return best;
}

}  // namespace stablesde
