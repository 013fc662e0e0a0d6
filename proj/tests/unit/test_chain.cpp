#include <cmath>
#include <vector>

#include "bcfm/gibbs.hpp"
#include "bcfm/simulate.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace bcfm;

namespace {

// A small simulated problem and a short fitted chain, reused across cases.
struct FittedChain {
  SimulatedData sim;
  Elicitation elicitation;
  ChainOutput chain;
};

FittedChain fit_small(std::uint64_t seed) {
  SimSpec spec;
  spec.n = 80;
  spec.R = 5;
  spec.K = 2;
  spec.F = 2;
  spec.p_true = (Vector(2) << 0.6, 0.4).finished();
  spec.mu_true = (Matrix(2, 2) << 0.0, 0.0, 6.0, -5.0).finished();
  spec.omega_true.push_back(SpdMatrix::diagonal((Vector(2) << 1.0, 0.8).finished()));
  spec.omega_true.push_back(SpdMatrix((Matrix(2, 2) << 1.0, 0.3, 0.3, 1.2).finished()));
  spec.tau_true = (Vector(2) << 0.2, 0.2).finished();
  spec.sigma2_true = Vector::Constant(5, 0.3);
  spec.separation = 1.0;
  spec.seed = seed;
  spec.validate();

  FittedChain f{generate_dataset(spec), {}, {}};
  RngStream erng(seed + 1, 0);
  f.elicitation = elicit_from_data(f.sim.data, ModelDims{2, 2}, erng);

  ChainConfig config;
  config.iterations = 400;
  config.thin = 2;
  config.burnin_draws = 50;
  config.seed = seed + 2;
  const GibbsState init = initial_state(f.elicitation, f.sim.data, ModelDims{2, 2});
  f.chain = run_chain(f.sim.data, ModelDims{2, 2}, f.elicitation.prior, init, config);
  return f;
}

}  // namespace

TEST_CASE("run_chain is bit-for-bit deterministic in its seed") {
  const FittedChain a = fit_small(900);
  const FittedChain b = fit_small(900);
  REQUIRE(a.chain.draws.size() == b.chain.draws.size());
  for (std::size_t d = 0; d < a.chain.draws.size(); ++d) {
    CHECK(a.chain.draws[d].log_joint == b.chain.draws[d].log_joint);
    CHECK((a.chain.draws[d].B - b.chain.draws[d].B).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.chain.draws[d].p - b.chain.draws[d].p).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK((a.chain.assign_prob - b.chain.assign_prob).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.chain.map_labels == b.chain.map_labels);
}

TEST_CASE("different seeds give different chains") {
  const FittedChain a = fit_small(901);
  const FittedChain b = fit_small(902);
  CHECK(a.chain.draws.front().log_joint != b.chain.draws.front().log_joint);
}

TEST_CASE("every retained draw satisfies the structural invariants") {
  const FittedChain f = fit_small(903);
  const int F = 2;
  REQUIRE(f.chain.draws.size() ==
          static_cast<std::size_t>(f.chain.config.kept()));
  for (const ParameterDraw& d : f.chain.draws) {
    for (int r = 0; r < F; ++r) {
      CHECK(d.B(r, r) == 1.0);
      for (int c = r + 1; c < F; ++c) CHECK(d.B(r, c) == 0.0);
    }
    for (int i = 0; i < F; ++i)
      for (int j = 0; j < F; ++j)
        if (i != j) CHECK(d.omega[0](i, j) == 0.0);
    CHECK(std::abs(d.p.sum() - 1.0) <= 1e-12);
    CHECK(d.tau.minCoeff() > 0.0);
    CHECK(d.sigma2.minCoeff() > 0.0);
    CHECK(std::isfinite(d.log_joint));
  }
}

TEST_CASE("assignment probabilities are exact distributions row by row") {
  const FittedChain f = fit_small(904);
  const Matrix& ap = f.chain.assign_prob;
  REQUIRE(ap.rows() == 80);
  for (int i = 0; i < ap.rows(); ++i) {
    double sum = 0.0;
    for (int k = 0; k < ap.cols(); ++k) {
      CHECK(ap(i, k) >= 0.0);
      CHECK(ap(i, k) <= 1.0);
      sum += ap(i, k);
    }
    CHECK(sum == 1.0);  // exact, left-to-right
  }
}

TEST_CASE("modal labels are the row argmax with ties to the lowest index") {
  Matrix prob(3, 3);
  prob << 0.2, 0.5, 0.3, 0.4, 0.4, 0.2, 0.1, 0.2, 0.7;
  const std::vector<int> labels = modal_labels(prob);
  CHECK(labels == std::vector<int>{1, 0, 2});
}

TEST_CASE("assignment_probabilities normalizes any count matrix exactly") {
  RngStream rng(77, 0);
  for (int rep = 0; rep < 500; ++rep) {
    const int n = 1 + static_cast<int>(rng.next_u64() % 8);
    const int K = 2 + static_cast<int>(rng.next_u64() % 6);
    Matrix counts(n, K);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < K; ++k) {
        // Mix tiny, huge, and zero counts to stress the normalization.
        const int kind = static_cast<int>(rng.next_u64() % 4);
        if (kind == 0) counts(i, k) = 0.0;
        else if (kind == 1) counts(i, k) = static_cast<double>(rng.next_u64() % 10);
        else if (kind == 2) counts(i, k) = 1e12 * rng.next_uniform();
        else counts(i, k) = rng.next_open_uniform();
      }
      if (counts.row(i).sum() == 0.0) counts(i, 0) = 1.0;
    }
    const Matrix prob = assignment_probabilities(counts);
    for (int i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int k = 0; k < K; ++k) {
        CHECK(prob(i, k) >= 0.0);
        sum += prob(i, k);
      }
      CHECK(sum == 1.0);
      // Proportions must still be faithful to the counts.
      const double total = counts.row(i).sum();
      for (int k = 0; k < K; ++k) {
        CHECK(std::abs(prob(i, k) - counts(i, k) / total) < 1e-9);
      }
    }
  }
}

TEST_CASE("quantile_type7 interpolates order statistics") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(quantile_type7(v, 0.0) == 1.0);
  CHECK(quantile_type7(v, 1.0) == 10.0);
  CHECK(quantile_type7(v, 0.25) == doctest::Approx(3.25));
  CHECK(quantile_type7(v, 0.5) == doctest::Approx(5.5));
  CHECK(quantile_type7(v, 0.975) == doctest::Approx(9.775));
  CHECK(quantile_type7({42.0}, 0.3) == 42.0);
}

TEST_CASE("summarize_draws reports means and type-7 quantile bounds") {
  // Three hand-built draws where every family is a distinct constant.
  std::vector<ParameterDraw> draws;
  for (double v : {1.0, 2.0, 4.0}) {
    ParameterDraw d;
    d.B = Matrix::Constant(2, 1, v);
    d.tau = Vector::Constant(1, v);
    d.sigma2 = Vector::Constant(2, 10 * v);
    d.mu = Matrix::Constant(1, 1, -v);
    d.omega.push_back(Matrix::Constant(1, 1, v));
    d.p = Vector::Constant(1, 1.0);
    d.log_joint = 100 * v;
    draws.push_back(d);
  }
  const ChainSummaries s = summarize_draws(draws);
  CHECK(s.B.mean(0, 0) == doctest::Approx(7.0 / 3.0));
  CHECK(s.sigma2.mean(0, 0) == doctest::Approx(70.0 / 3.0));
  CHECK(s.mu.mean(0, 0) == doctest::Approx(-7.0 / 3.0));
  CHECK(s.log_joint.mean(0, 0) == doctest::Approx(700.0 / 3.0));
  // Type-7 2.5% of {1,2,4}: h = 0.05, 1 + 0.05*(2-1) = 1.05.
  CHECK(s.B.q025(0, 0) == doctest::Approx(1.05));
  // Type-7 97.5% of {1,2,4}: h = 1.95, 2 + 0.95*(4-2) = 3.9.
  CHECK(s.B.q975(0, 0) == doctest::Approx(3.9));
}

TEST_CASE("posterior factor means have the data's shape") {
  const FittedChain f = fit_small(905);
  CHECK(f.chain.X_mean.rows() == 80);
  CHECK(f.chain.X_mean.cols() == 2);
  CHECK(f.chain.n == 80);
  CHECK(f.chain.dims.K == 2);
  CHECK(f.chain.dims.F == 2);
}

TEST_CASE("chain configuration is validated") {
  ChainConfig bad;
  bad.iterations = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  ChainConfig neg;
  neg.iterations = 100;
  neg.thin = 10;
  neg.burnin_draws = -1;
  CHECK_THROWS_AS(neg.validate(), ConfigError);

  ChainConfig burn;
  burn.iterations = 100;
  burn.thin = 10;
  burn.burnin_draws = 10;  // nothing left after burn-in
  CHECK_THROWS_AS(burn.validate(), ConfigError);

  ChainConfig fine;
  fine.iterations = 100;
  fine.thin = 10;
  fine.burnin_draws = 5;
  CHECK_NOTHROW(fine.validate());
  CHECK(fine.kept() == 5);
}
