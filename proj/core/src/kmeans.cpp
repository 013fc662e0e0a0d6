#include "bcfm/kmeans.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "bcfm/errors.hpp"

namespace bcfm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One Lloyd run on column-major points (Xt is q x n so each point is a
// contiguous column).  Returns labels, centers (q x K), final squared and
// unsquared objectives.
struct LloydFit {
  std::vector<int> labels;
  Matrix centers;
  double wss = kInf;
  double objective = kInf;
};

LloydFit lloyd_from(const Matrix& Xt, Matrix centers) {
  const int n = static_cast<int>(Xt.cols());
  const int q = static_cast<int>(Xt.rows());
  const int K = static_cast<int>(centers.cols());

  LloydFit fit;
  fit.labels.assign(n, 0);
  std::vector<double> min_d2(n, 0.0);
  std::vector<int> counts(K, 0);
  Matrix sums(q, K);

  double prev_wss = kInf;
  for (int sweep = 0; sweep < 100; ++sweep) {
    // Assignment step; ties go to the lowest cluster index.
    double wss = 0.0;
    for (int i = 0; i < n; ++i) {
      double best = kInf;
      int best_k = 0;
      for (int k = 0; k < K; ++k) {
        const double d2 = (Xt.col(i) - centers.col(k)).squaredNorm();
        if (d2 < best) {
          best = d2;
          best_k = k;
        }
      }
      fit.labels[i] = best_k;
      min_d2[i] = best;
      wss += best;
    }
    fit.wss = wss;

    // Update step.
    sums.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (int i = 0; i < n; ++i) {
      sums.col(fit.labels[i]) += Xt.col(i);
      ++counts[fit.labels[i]];
    }
    for (int k = 0; k < K; ++k) {
      if (counts[k] > 0) {
        centers.col(k) = sums.col(k) / static_cast<double>(counts[k]);
      } else {
        // Re-seed an emptied cluster from the point farthest from its own
        // center; claim it immediately so a second empty cluster cannot pick
        // the same point.
        int far_i = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          if (min_d2[i] > far_d) {
            far_d = min_d2[i];
            far_i = i;
          }
        }
        centers.col(k) = Xt.col(far_i);
        fit.labels[far_i] = k;
        min_d2[far_i] = 0.0;
      }
    }

    const double change = std::abs(prev_wss - wss);
    if (change <= 1e-8 * std::max(1.0, std::abs(prev_wss)) && sweep > 0) break;
    prev_wss = wss;
  }

  fit.objective = 0.0;
  for (int i = 0; i < n; ++i) fit.objective += std::sqrt(min_d2[i]);
  fit.centers = std::move(centers);
  return fit;
}

LloydFit lloyd(const Matrix& Xt, int K, RngStream& rng) {
  const int n = static_cast<int>(Xt.cols());
  const int q = static_cast<int>(Xt.rows());

  // Seed centers from K distinct points (partial Fisher-Yates).
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < K; ++i) {
    const int j = i + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n - i));
    std::swap(order[i], order[j]);
  }
  Matrix centers(q, K);
  for (int k = 0; k < K; ++k) centers.col(k) = Xt.col(order[k]);
  return lloyd_from(Xt, std::move(centers));
}

}  // namespace

KmeansResult kmeans_restarts(const Matrix& X, int K, int restarts, RngStream& rng) {
  const int n = static_cast<int>(X.rows());
  if (K < 1) throw ConfigError("kmeans: K must be >= 1");
  if (K > n) throw ConfigError("kmeans: K exceeds the number of points");
  if (restarts < 1) throw ConfigError("kmeans: need at least one restart");

  const Matrix Xt = X.transpose();
  LloydFit best;
  for (int rep = 0; rep < restarts; ++rep) {
    LloydFit fit = lloyd(Xt, K, rng);
    if (fit.objective < best.objective) best = std::move(fit);
  }
  KmeansResult out;
  out.labels = std::move(best.labels);
  out.centers = best.centers.transpose();
  out.objective = best.objective;
  out.wss = best.wss;
  return out;
}

KmeansResult kmeans_restarts(const Matrix& X, int K, RngStream& rng) {
  return kmeans_restarts(X, K, 50, rng);
}

KmeansResult kmeans_from_centers(const Matrix& X, const Matrix& centers) {
  if (centers.rows() < 1) throw ConfigError("kmeans: need at least one initial center");
  if (centers.rows() > X.rows()) throw ConfigError("kmeans: K exceeds the number of points");
  if (centers.cols() != X.cols())
    throw ConfigError("kmeans: center dimension does not match the points");
  LloydFit fit = lloyd_from(X.transpose(), centers.transpose());
  KmeansResult out;
  out.labels = std::move(fit.labels);
  out.centers = fit.centers.transpose();
  out.objective = fit.objective;
  out.wss = fit.wss;
  return out;
}

}  // namespace bcfm
