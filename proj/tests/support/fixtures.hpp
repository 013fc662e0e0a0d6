#pragma once

// Shared test fixtures: randomized-but-valid model states, datasets, and
// priors, plus the ratio harness that checks every Gibbs block against the
// joint density.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bcfm/gibbs.hpp"
#include "bcfm/rng.hpp"
#include "bcfm/types.hpp"

namespace bcfm::testing {

inline Matrix random_matrix(int rows, int cols, RngStream& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.next_normal();
  return m;
}

inline SpdMatrix random_spd(int dim, RngStream& rng, double jitter = 0.5) {
  const Matrix a = random_matrix(dim, dim, rng, 0.6);
  Matrix s = a * a.transpose();
  s.diagonal().array() += jitter;
  return SpdMatrix((s + s.transpose()) / 2.0);
}

inline Vector random_positive(int len, RngStream& rng, double floor = 0.3) {
  Vector v(len);
  for (int i = 0; i < len; ++i) v[i] = floor + std::abs(rng.next_normal());
  return v;
}

// Loadings matrix holding the structural constraint bitwise: leading F x F
// block lower triangular with literal 1.0 on the diagonal and literal 0.0
// above it.
inline Matrix random_constrained_loadings(int R, int F, RngStream& rng) {
  Matrix B = Matrix::Zero(R, F);
  for (int r = 0; r < R; ++r) {
    const int free = r < F ? r : F;
    for (int l = 0; l < free; ++l) B(r, l) = 0.7 * rng.next_normal();
    if (r < F) B(r, r) = 1.0;
  }
  return B;
}

struct Problem {
  Dataset data;
  ModelDims dims;
  PriorSpec prior;
  GibbsState state;
};

// A random valid problem: data, prior, and a state anywhere in the support.
// Every structural invariant holds, nothing else is special.
inline Problem make_problem(int n, int R, int F, int K, std::uint64_t seed) {
  RngStream rng(seed, 0);

  std::vector<std::string> names;
  names.reserve(R);
  for (int r = 0; r < R; ++r) names.push_back("y" + std::to_string(r + 1));
  Dataset data = Dataset::create(random_matrix(n, R, rng, 1.5), names);

  PriorSpec prior;
  prior.alpha = random_positive(K, rng, 0.8);
  prior.m.reserve(K);
  prior.C.reserve(K);
  for (int k = 0; k < K; ++k) {
    prior.m.push_back(random_matrix(F, 1, rng, 1.0).col(0));
    prior.C.push_back(random_spd(F, rng, 0.8));
  }
  prior.nu = F + 3.5;
  for (int k = 1; k < K; ++k) prior.psi.push_back(random_spd(F, rng, 0.8));
  prior.n_omega = random_positive(F, rng, 1.0);
  prior.s2_omega = random_positive(F, rng, 0.4);
  prior.validate(F);

  GibbsState s;
  s.loadings.B = random_constrained_loadings(R, F, rng);
  s.loadings.tau = random_positive(F, rng);
  s.noise.sigma2 = random_positive(R, rng);
  s.mixture.mu.reserve(K);
  s.mixture.omega.reserve(K);
  for (int k = 0; k < K; ++k) {
    s.mixture.mu.push_back(random_matrix(F, 1, rng, 2.0).col(0));
    if (k == 0) {
      s.mixture.omega.push_back(SpdMatrix::diagonal(random_positive(F, rng, 0.5)));
    } else {
      s.mixture.omega.push_back(random_spd(F, rng, 0.5));
    }
  }
  Vector g = random_positive(K, rng, 0.2);
  s.mixture.p = g / g.sum();
  s.mixture.z.resize(n);
  for (int i = 0; i < n; ++i) s.mixture.z[i] = static_cast<int>(rng.next_u64() % K);
  s.mixture.X = random_matrix(n, F, rng, 1.0);
  s.validate();
  return {std::move(data), ModelDims{K, F}, std::move(prior), std::move(s)};
}

// Runs one named update block in the canonical order. Index: 0 factors,
// 1 cluster_means, 2 cluster_covariances, 3 loadings, 4 variances, 5 tau,
// 6 assignments, 7 weights.
inline void run_block(GibbsState& s, const Dataset& data, const PriorSpec& prior, int block,
                      RngStream& rng) {
  switch (block) {
    case 0: update_factors(s, data, rng); break;
    case 1: update_cluster_means(s, prior, rng); break;
    case 2: update_cluster_covariances(s, prior, rng); break;
    case 3: update_loadings(s, data, rng); break;
    case 4: update_idiosyncratic_variances(s, data, prior, rng); break;
    case 5: update_tau(s, prior, rng); break;
    case 6: update_assignments(s, rng); break;
    case 7: update_weights(s, prior, rng); break;
    default: throw ConfigError("run_block: bad index");
  }
}

inline const char* block_name(int block) {
  static const char* names[8] = {"factors",  "cluster_means", "cluster_covariances",
                                 "loadings", "variances",     "tau",
                                 "assignments", "weights"};
  return names[block];
}

// Log full-conditional difference for one block between two states that
// differ only in that block, with the conditional laws computed from `before`.
// Blocks factor over independent components (subjects, rows, clusters), so
// the sum of component differences must match the joint-density difference.
inline double block_fc_delta(const GibbsState& before, const GibbsState& after,
                             const Dataset& data, const PriorSpec& prior, int block) {
  const int n = data.n();
  const int R = data.R();
  const int F = static_cast<int>(before.loadings.B.cols());
  const int K = before.mixture.K();
  double delta = 0.0;
  switch (block) {
    case 0:
      for (int i = 0; i < n; ++i) {
        const MvnParams fc = factor_full_conditional(before, data, i);
        delta += fc.logpdf(after.mixture.X.row(i).transpose()) -
                 fc.logpdf(before.mixture.X.row(i).transpose());
      }
      break;
    case 1:
      for (int k = 0; k < K; ++k) {
        const MvnParams fc = cluster_mean_full_conditional(before, prior, k);
        delta += fc.logpdf(after.mixture.mu[k]) - fc.logpdf(before.mixture.mu[k]);
      }
      break;
    case 2:
      for (int l = 0; l < F; ++l) {
        const IgParams fc = omega_diag_full_conditional(before, prior, l);
        delta += fc.logpdf(after.mixture.omega[0](l, l)) -
                 fc.logpdf(before.mixture.omega[0](l, l));
      }
      for (int k = 1; k < K; ++k) {
        const IwParams fc = omega_full_conditional(before, prior, k);
        delta += fc.logpdf(after.mixture.omega[k]) - fc.logpdf(before.mixture.omega[k]);
      }
      break;
    case 3:
      for (int r = 1; r < R; ++r) {
        const int free = LoadingsState::free_count(r, F);
        const MvnParams fc = loadings_row_full_conditional(before, data, r);
        delta += fc.logpdf(after.loadings.B.row(r).head(free).transpose()) -
                 fc.logpdf(before.loadings.B.row(r).head(free).transpose());
      }
      break;
    case 4:
      for (int r = 0; r < R; ++r) {
        const IgParams fc = sigma2_full_conditional(before, data, prior, r);
        delta += fc.logpdf(after.noise.sigma2[r]) - fc.logpdf(before.noise.sigma2[r]);
      }
      break;
    case 5:
      for (int l = 0; l < F; ++l) {
        const IgParams fc = tau_full_conditional(before, prior, l);
        delta += fc.logpdf(after.loadings.tau[l]) - fc.logpdf(before.loadings.tau[l]);
      }
      break;
    case 6:
      for (int i = 0; i < n; ++i) {
        const CategoricalParams fc = assignment_full_conditional(before, i);
        delta += fc.logpmf(after.mixture.z[i]) - fc.logpmf(before.mixture.z[i]);
      }
      break;
    case 7: {
      const DirichletParams fc = weights_full_conditional(before, prior);
      delta += fc.logpdf(after.mixture.p) - fc.logpdf(before.mixture.p);
      break;
    }
    default:
      throw ConfigError("block_fc_delta: bad index");
  }
  return delta;
}

// One randomized ratio check: returns |delta_fc - delta_joint| relative to
// max(1, |delta_joint|).
inline double ratio_defect(int n, int R, int F, int K, int block, std::uint64_t seed) {
  Problem p = make_problem(n, R, F, K, seed);
  const GibbsState before = p.state;
  RngStream rng(seed, 1000 + static_cast<std::uint64_t>(block));
  run_block(p.state, p.data, p.prior, block, rng);
  const double d_joint = log_joint(p.state, p.data, p.prior) -
                         log_joint(before, p.data, p.prior);
  const double d_fc = block_fc_delta(before, p.state, p.data, p.prior, block);
  return std::abs(d_fc - d_joint) / std::max(1.0, std::abs(d_joint));
}

}  // namespace bcfm::testing
