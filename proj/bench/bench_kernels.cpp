// Serial against OpenMP for the N-indexed kernels. The second benchmark
// argument selects the backend (0 serial, 1 openmp).

#include <benchmark/benchmark.h>

#include <vector>

#include "stablesde/kernels.hpp"
#include "stablesde/quasi.hpp"
#include "stablesde/samplers.hpp"
#include "stablesde/simulate.hpp"

using namespace stablesde;

namespace {

const ModelSpec& model() {
  static const ModelSpec m("alpha1*(x-alpha2)", "exp(gamma*cos(x))", {"alpha1", "alpha2"}, {"gamma"},
                           {{-10, 10}, {-10, 10}, {-5, 5}});
  return m;
}

Eigen::VectorXd theta() { return (Eigen::VectorXd(3) << -3, 1, 0.5).finished(); }

Backend backend_of(const benchmark::State& state) { return state.range(1) ? Backend::openmp : Backend::serial; }

void label(benchmark::State& state) {
  state.SetLabel(state.range(1) ? "openmp" : "serial");
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Residuals(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto obs = simulate_path(model(), theta(), StableIndex(1.5), n, 1.0, PathConfig{1, 1, 0.0});
  std::vector<double> eps(n), log_c(n);
  for (auto _ : state) {
    kernels::residuals(model(), theta(), obs, 1.5, eps.data(), log_c.data(), backend_of(state));
    benchmark::DoNotOptimize(eps.data());
  }
  label(state);
}

void BM_LogDensity(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  static const StableLaw law{StableIndex(1.5)};
  Stream rng(2);
  const auto eps = sample_symmetric_stable(StableIndex(1.5), n, rng);
  std::vector<double> out(n);
  for (auto _ : state) {
    kernels::log_density(law, eps.data(), n, out.data(), backend_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  label(state);
}

void BM_RefreshVariances(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  static const ConditionalVarianceSampler sampler{StableIndex(1.5)};
  Stream rng(3);
  const auto eps = sample_symmetric_stable(StableIndex(1.5), n, rng);
  std::vector<double> V(n);
  std::uint64_t key = 0;
  for (auto _ : state) {
    kernels::refresh_variances(sampler, eps.data(), n, 3, ++key, V.data(), backend_of(state));
    benchmark::DoNotOptimize(V.data());
  }
  label(state);
}

void BM_CpmUpdate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Stream rng(4);
  const auto V = sample_positive_stable(StableIndex(1.5), n, rng);
  std::vector<double> out(n);
  std::uint64_t key = 0;
  for (auto _ : state) {
    kernels::cpm_update(V.data(), n, 0.99, 1.5, 4, ++key, out.data(), backend_of(state));
    benchmark::DoNotOptimize(out.data());
  }
  label(state);
}

void BM_CompleteRatio(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Stream rng(5);
  const auto eps = sample_symmetric_stable(StableIndex(1.5), n, rng);
  const auto eps2 = sample_symmetric_stable(StableIndex(1.5), n, rng);
  const auto V = sample_positive_stable(StableIndex(1.5), n, rng);
  const std::vector<double> log_c(n, 0.1), log_c2(n, 0.2);
  for (auto _ : state)
    benchmark::DoNotOptimize(kernels::complete_ratio(eps.data(), log_c.data(), V.data(), eps2.data(), log_c2.data(),
                                                     V.data(), n, backend_of(state)));
  label(state);
}

void BM_BlockedSum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Stream rng(6);
  std::vector<double> x(n);
  for (auto& v : x) v = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::blocked_sum(x.data(), n, backend_of(state)));
  label(state);
}

void BM_QuasiLoglik(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  static const StableLaw law{StableIndex(1.5)};
  const auto obs = simulate_path(model(), theta(), StableIndex(1.5), n, 1.0, PathConfig{7, 1, 0.0});
  QuasiOptions opt;
  opt.backend = backend_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(quasi_loglik(model(), theta(), obs, law, opt));
  label(state);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (long n : {2000L, 100000L})
    for (long be : {0L, 1L}) b->Args({n, be});
}

}  // namespace

BENCHMARK(BM_Residuals)->Apply(sizes);
BENCHMARK(BM_LogDensity)->Apply(sizes);
BENCHMARK(BM_RefreshVariances)->Apply(sizes);
BENCHMARK(BM_CpmUpdate)->Apply(sizes);
BENCHMARK(BM_CompleteRatio)->Apply(sizes);
BENCHMARK(BM_BlockedSum)->Apply(sizes);
BENCHMARK(BM_QuasiLoglik)->Apply(sizes);

BENCHMARK_MAIN();
