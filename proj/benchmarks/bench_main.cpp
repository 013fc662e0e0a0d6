// Microbenchmarks for the hot paths: one Gibbs sweep and its dominant blocks,
// the stochastic kernels, the integrated likelihood, and k-means.

#include <benchmark/benchmark.h>

#include "bcfm/elicitation.hpp"
#include "bcfm/gibbs.hpp"
#include "bcfm/kmeans.hpp"
#include "bcfm/selection.hpp"
#include "bcfm/simulate.hpp"

namespace {

using namespace bcfm;

struct Fixture {
  Dataset data;
  ModelDims dims;
  PriorSpec prior;
  GibbsState state;
};

Fixture make_fixture() {
  SimSpec spec = SimSpec::benchmark(0.5);
  spec.seed = 42;
  SimulatedData sim = generate_dataset(spec);
  ModelDims dims{4, 3};
  RngStream rng(derive_seed(42, 1), 0);
  Elicitation e = elicit_from_data(sim.data, dims, rng);
  GibbsState init = initial_state(e, sim.data, dims);
  return Fixture{std::move(sim.data), dims, e.prior, std::move(init)};
}

const Fixture& fixture() {
  static const Fixture f = make_fixture();
  return f;
}

void bm_update_factors(benchmark::State& bm) {
  GibbsState s = fixture().state;
  std::uint64_t id = 0;
  for (auto _ : bm) {
    RngStream rng(7, id++);
    update_factors(s, fixture().data, rng);
  }
}
BENCHMARK(bm_update_factors)->Unit(benchmark::kMicrosecond);

void bm_update_loadings(benchmark::State& bm) {
  GibbsState s = fixture().state;
  std::uint64_t id = 0;
  for (auto _ : bm) {
    RngStream rng(7, id++);
    update_loadings(s, fixture().data, rng);
  }
}
BENCHMARK(bm_update_loadings)->Unit(benchmark::kMicrosecond);

void bm_update_assignments(benchmark::State& bm) {
  GibbsState s = fixture().state;
  std::uint64_t id = 0;
  for (auto _ : bm) {
    RngStream rng(7, id++);
    update_assignments(s, rng);
  }
}
BENCHMARK(bm_update_assignments)->Unit(benchmark::kMicrosecond);

void bm_full_sweep(benchmark::State& bm) {
  GibbsState s = fixture().state;
  std::uint64_t id = 0;
  for (auto _ : bm) {
    RngStream r0(7, id++);
    update_factors(s, fixture().data, r0);
    RngStream r1(7, id++);
    update_cluster_means(s, fixture().prior, r1);
    RngStream r2(7, id++);
    update_cluster_covariances(s, fixture().prior, r2);
    RngStream r3(7, id++);
    update_loadings(s, fixture().data, r3);
    RngStream r4(7, id++);
    update_idiosyncratic_variances(s, fixture().data, fixture().prior, r4);
    RngStream r5(7, id++);
    update_tau(s, fixture().prior, r5);
    RngStream r6(7, id++);
    update_assignments(s, r6);
    RngStream r7(7, id++);
    update_weights(s, fixture().prior, r7);
  }
}
BENCHMARK(bm_full_sweep)->Unit(benchmark::kMicrosecond);

void bm_log_joint(benchmark::State& bm) {
  for (auto _ : bm) {
    benchmark::DoNotOptimize(log_joint(fixture().state, fixture().data, fixture().prior));
  }
}
BENCHMARK(bm_log_joint)->Unit(benchmark::kMicrosecond);

void bm_normal_draw(benchmark::State& bm) {
  RngStream rng(7, 0);
  for (auto _ : bm) benchmark::DoNotOptimize(rng.next_normal());
}
BENCHMARK(bm_normal_draw);

void bm_gamma_draw(benchmark::State& bm) {
  RngStream rng(7, 0);
  for (auto _ : bm) benchmark::DoNotOptimize(sample_gamma(2.5, rng));
}
BENCHMARK(bm_gamma_draw);

void bm_inverse_wishart(benchmark::State& bm) {
  RngStream rng(7, 0);
  const SpdMatrix scale = SpdMatrix::identity(3);
  for (auto _ : bm) benchmark::DoNotOptimize(sample_inverse_wishart(6.0, scale, rng));
}
BENCHMARK(bm_inverse_wishart);

void bm_integrated_loglik(benchmark::State& bm) {
  ChainConfig config;
  config.iterations = 200;
  config.thin = 10;
  config.burnin_draws = 10;
  config.seed = 11;
  const ChainOutput chain =
      run_chain(fixture().data, fixture().dims, fixture().prior, fixture().state, config);
  const PosteriorPointEstimate est = point_estimate(chain);
  for (auto _ : bm) benchmark::DoNotOptimize(integrated_loglik(fixture().data, est));
}
BENCHMARK(bm_integrated_loglik)->Unit(benchmark::kMicrosecond);

void bm_kmeans(benchmark::State& bm) {
  SimSpec spec = SimSpec::benchmark(0.5);
  spec.seed = 13;
  const Matrix X = generate_dataset(spec).truth.X;
  std::uint64_t id = 0;
  for (auto _ : bm) {
    RngStream rng(9, id++);
    benchmark::DoNotOptimize(kmeans_restarts(X, 4, 10, rng));
  }
}
BENCHMARK(bm_kmeans)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
