#pragma once

#include <vector>

#include "bcfm/kmeans.hpp"
#include "bcfm/types.hpp"

namespace bcfm {

// Everything the elicitation pipeline computes along the way, kept for
// initialization, diagnostics, and tests.
struct ElicitationArtifacts {
  Matrix B_hat;                // R x F preliminary loadings
  Matrix B_star;               // R x F rotated loadings (leading block = I)
  Matrix M;                    // F x F rotation
  Vector V_hat;                // R preliminary idiosyncratic variances
  LdlFactors S1_ldl;           // LDL factors (L1, D1) of cluster 0's covariance
  std::vector<SpdMatrix> S;    // K within-cluster covariances of X_hat
  Matrix X_hat;                // n x F GLS factor estimates
  Matrix X_tilde;              // n x F transformed estimates, rows L1^-1 x_hat_i
  Matrix B_tilde;              // B_star * L1; satisfies the structural constraint
  std::vector<int> km_labels;  // n k-means labels, relabeled so 0 is largest
};

struct Elicitation {
  PriorSpec prior;
  ElicitationArtifacts artifacts;
};

// Hyperparameters from factor estimates plus cluster labels: within-cluster
// covariances S_k, LDL of S_1 (the largest cluster is relabeled cluster 0
// first), the transformed estimates x~, and the PriorSpec described in the
// header of types.hpp (m_k, C_k = Psi_k = L1^-1 S_k L1^-T, nu = F+2,
// n_omega = 4, s2_omega = diag(D1), plus the fixed tau/sigma/alpha defaults).
// The loadings-side artifact fields are left empty; elicit_from_data fills
// them.  Each cluster needs at least F+2 members.
Elicitation elicit_priors(const Matrix& X_hat, const std::vector<int>& labels, int K);

// Full pipeline: preliminary factor analysis -> rotation -> GLS factor
// estimates -> k-means (50 restarts on the given stream) -> elicit_priors.
Elicitation elicit_from_data(const Dataset& data, const ModelDims& dims, RngStream& rng);

}  // namespace bcfm
