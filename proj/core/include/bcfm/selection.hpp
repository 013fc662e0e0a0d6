#pragma once

#include <vector>

#include "bcfm/gibbs.hpp"

namespace bcfm {

// Posterior means of the identified parameters, extracted from a chain.
// Constrained loadings entries are exact (every draw holds them exactly, so
// their mean does too); p_hat is renormalized onto the simplex.
struct PosteriorPointEstimate {
  Matrix B_hat;                      // R x F
  Matrix mu_hat;                     // K x F, row k = mu_k
  std::vector<SpdMatrix> Omega_hat;  // K covariances
  Vector v_hat;                      // R idiosyncratic variances
  Vector p_hat;                      // K weights

  int K() const { return static_cast<int>(p_hat.size()); }
  void validate() const;
};

PosteriorPointEstimate point_estimate(const ChainOutput& chain);

// One scored model.  ic is +infinity when the smallest modal cluster falls
// under the acceptance threshold (or, in a grid, when the model could not be
// fitted at all); loglik is NaN in the latter case.
struct ICRecord {
  int K = 0;
  int F = 0;
  double d = 0.0;
  double loglik = 0.0;
  double ic = 0.0;
  int min_cluster_size = 0;
};

// Number of unknown parameters: (K-2)(F+1)/2 + (R+K)(F+1) + F - 1, evaluated
// as a real number (odd (K-2)(F+1) makes it a half-integer).
double parameter_count(int K, int F, int R);

// Sum over subjects of ln sum_k p_k N(y_i; B mu_k, B Omega_k B' + V),
// log-sum-exp stabilized, one Cholesky per cluster reused across subjects.
double integrated_loglik(const Dataset& data, const PosteriorPointEstimate& est);

// Minimum modal-cluster size below which a model is rejected: max(3,
// ceil(0.005 n)).  Never applied to K = 1 (the single cluster holds all n).
int small_cluster_threshold(int n);

ICRecord information_criterion(const ChainOutput& chain, const Dataset& data,
                               const ModelDims& dims);

// Everything one model fit produces.  The sub-seeds are derived from
// config.seed: the elicitation and the chain run on unrelated seed spaces, so
// their streams can never collide.
struct ModelFit {
  Elicitation elicitation;
  ChainOutput chain;
  ICRecord ic;
};

ModelFit fit_model(const Dataset& data, const ModelDims& dims, const ChainConfig& config);

struct GridSpec {
  int k_min = 1;
  int k_max = 5;
  int f_min = 1;
  int f_max = 5;
  ChainConfig chain;  // chain.seed seeds the whole grid; cells derive from it

  void validate(int n, int R) const;
};

struct GridResult {
  std::vector<ICRecord> table;  // K ascending, F ascending within K
  int best_K = 0;
  int best_F = 0;
};

// Seed for one grid cell, derived so each (K, F) runs on its own seed space.
std::uint64_t grid_cell_seed(std::uint64_t seed, int K, int F);

// Fits and scores every (K, F) in the grid.  A cell whose elicitation or
// chain fails (degenerate k-means cluster, non-SPD matrix, mid-chain
// numerical failure) scores +infinity instead of aborting the grid.  The best
// model is the finite minimum, ties broken toward smaller K then smaller F;
// an all-infinite table is an error.
GridResult grid_search(const Dataset& data, const GridSpec& spec);

}  // namespace bcfm
