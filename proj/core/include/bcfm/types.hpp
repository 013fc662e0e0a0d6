#pragma once

#include <string>
#include <vector>

#include "bcfm/linalg.hpp"

namespace bcfm {

// Observed data: n subjects (rows) by R response variables (columns).
struct Dataset {
  Matrix Y;
  std::vector<std::string> variable_names;

  int n() const { return static_cast<int>(Y.rows()); }
  int R() const { return static_cast<int>(Y.cols()); }

  // Validates shape (n >= 2, R >= 2), finiteness, and name count.
  static Dataset create(Matrix y, std::vector<std::string> names);
};

// Number of mixture components K and number of factors F.
struct ModelDims {
  int K = 1;
  int F = 1;

  // K >= 1, 1 <= F <= R, K <= n.
  void validate(int n, int R) const;
};

// Loadings B (R x F) under the hierarchical identification constraint —
// the leading F x F block is lower triangular with a unit diagonal, held
// exactly (the constrained entries are written as literal 0.0 / 1.0 and are
// never touched by sampling) — plus the per-column prior variances tau.
struct LoadingsState {
  Matrix B;
  Vector tau;

  // Throws unless the constraint holds bitwise and tau is positive.
  void validate() const;

  // Number of free (sampled) entries in row r (zero-based): min(r, F).
  static int free_count(int r, int F) { return r < F ? r : F; }
};

// Mixture block: cluster means, cluster covariances (cluster 0 is restricted
// to a diagonal covariance), weights, assignments, and the latent factors.
// Clusters are indexed 0..K-1 internally; serialized output uses 1-based
// labels.
struct MixtureState {
  std::vector<Vector> mu;        // K vectors of length F
  std::vector<SpdMatrix> omega;  // K matrices, F x F; omega[0] diagonal
  Vector p;                      // K weights, positive, summing to 1 (1e-12)
  std::vector<int> z;            // n labels in [0, K)
  Matrix X;                      // n x F latent factors

  int K() const { return static_cast<int>(p.size()); }
  void validate() const;
};

// Idiosyncratic variances sigma^2_r, one per response.
struct NoiseState {
  Vector sigma2;

  void validate() const;
};

// Hyperparameters of every prior in the model.  Conventions: all inverse
// gamma blocks use the (n_*, s2_*) parameterization, i.e. the prior is
// IG(n_*/2, n_* s2_* / 2); psi[c-1] is the inverse Wishart scale for cluster
// c >= 1 (cluster 0 uses the elementwise inverse gamma prior instead).
struct PriorSpec {
  std::vector<Vector> m;         // K prior means for mu_k
  std::vector<SpdMatrix> C;      // K prior covariances for mu_k
  double nu = 0.0;               // inverse Wishart df for clusters >= 1
  std::vector<SpdMatrix> psi;    // K-1 inverse Wishart scales
  Vector alpha;                  // K Dirichlet concentrations
  double n_sigma = 2.2;          // idiosyncratic variance prior strength
  double s2_sigma = 0.1 / 2.2;   // ... and scale (prior sum of squares 0.1)
  double n_tau = 1.0;            // loadings-variance prior strength
  double s2_tau = 1.0;           // ... and scale
  Vector n_omega;                // F diagonal-covariance prior strengths
  Vector s2_omega;               // F diagonal-covariance prior scales

  int K() const { return static_cast<int>(alpha.size()); }
  void validate(int F) const;
};

}  // namespace bcfm
