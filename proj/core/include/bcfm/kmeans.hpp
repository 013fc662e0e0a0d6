#pragma once

#include <vector>

#include "bcfm/linalg.hpp"
#include "bcfm/rng.hpp"

namespace bcfm {

struct KmeansResult {
  std::vector<int> labels;  // n labels in [0, K)
  Matrix centers;           // K x q
  double objective;         // sum of unsquared Euclidean distances to centers
  double wss;               // sum of squared distances (within-cluster dispersion)
};

// Lloyd's algorithm from `restarts` random initializations (centers seeded by
// sampling distinct rows).  Each restart runs to convergence (relative change
// of the squared-distance objective < 1e-8, at most 100 sweeps); an emptied
// cluster is re-seeded from the point farthest from its current center.  The
// returned restart minimizes the sum of *unsquared* Euclidean distances to
// the assigned centers — that criterion, not the squared one Lloyd descends,
// decides among restarts.
KmeansResult kmeans_restarts(const Matrix& X, int K, int restarts, RngStream& rng);

// Convenience wrapper with the standard 50 restarts.
KmeansResult kmeans_restarts(const Matrix& X, int K, RngStream& rng);

// One deterministic Lloyd run from explicit initial centers (K x q rows like
// KmeansResult::centers).  Warm-starting K+1 clusters from a K-cluster fit's
// centroids plus one extra point guarantees the dispersion cannot increase
// with K.
KmeansResult kmeans_from_centers(const Matrix& X, const Matrix& centers);

}  // namespace bcfm
