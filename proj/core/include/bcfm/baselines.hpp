#pragma once

#include "bcfm/kmeans.hpp"
#include "bcfm/types.hpp"

namespace bcfm {

// Eigenvalues of the sample correlation matrix, descending.  They sum to R.
Vector correlation_eigenvalues(const Dataset& data);

// Number of correlation eigenvalues strictly greater than one.
int kaiser_count(const Dataset& data);

struct GapResult {
  int K_hat = 1;
  Vector gap;      // entries for K = 1..K_max
  Vector sk;       // simulation standard errors, same length
  int B_refs = 0;  // number of reference datasets behind the errors
};

// Gap statistic on points X (n x q rows).  For each K, the within-cluster
// dispersion W_K comes from the best k-means fit (`restarts` random starts
// plus a warm start from the K-1 fit, which makes W_K non-increasing in K);
// references are drawn uniformly over the per-dimension bounding box of X.
// gap(K) = mean_b ln W_K(ref_b) - ln W_K(X); sk carries the sqrt(1 + 1/B)
// factor; K_hat is the smallest K with gap(K) >= gap(K+1) - sk(K+1), or K_max
// when the rule never fires.  Reference fits use fewer restarts (5) than the
// observed fits; the warm start keeps them well converged.
GapResult gap_statistic(const Matrix& X, int K_max, int B_refs, RngStream& rng,
                        int restarts = 50);

// Within-cluster dispersion of a partition: sum over clusters of
// (1/(2 n_k)) * (sum of pairwise squared distances), equal to the summed
// squared distances to the cluster centroids.
double within_dispersion(const Matrix& X, const std::vector<int>& labels, int K);

// Standardized data projected onto the top F principal axes of the
// correlation matrix.  The sample covariance of the columns is diagonal.
Matrix pca_scores(const Dataset& data, int F);

struct PcaKmeansResult {
  int F_hat = 1;
  int K_hat = 1;
  bool kaiser_was_zero = false;  // F fell back from 0 to 1
};

// The reference pipeline: factor count by the Kaiser rule (with the 0 -> 1
// fallback), then the gap statistic with 50-restart k-means on the principal
// component scores.
PcaKmeansResult pca_kmeans_pipeline(const Dataset& data, int K_max, RngStream& rng);

}  // namespace bcfm
