#include <algorithm>
#include <cmath>
#include <vector>

#include "bcfm/baselines.hpp"
#include "bcfm/errors.hpp"
#include "bcfm/factor_analysis.hpp"

namespace bcfm {
namespace {

// Best k-means partition for the gap statistic: random restarts plus a warm
// start built from the previous K's centroids and the point farthest from its
// centroid.  Judged by within-cluster dispersion (what the gap compares).
KmeansResult gap_fit(const Matrix& X, int K, int restarts, const KmeansResult* prev,
                     RngStream& rng) {
  KmeansResult fit = kmeans_restarts(X, K, restarts, rng);
  fit.wss = within_dispersion(X, fit.labels, K);
  if (prev == nullptr) return fit;

  const int n = static_cast<int>(X.rows());
  const int q = static_cast<int>(X.cols());
  Matrix centers(K, q);
  centers.topRows(K - 1) = prev->centers;
  int far_i = 0;
  double far_d = -1.0;
  for (int i = 0; i < n; ++i) {
    const double d2 = (X.row(i) - prev->centers.row(prev->labels[i])).squaredNorm();
    if (d2 > far_d) {
      far_d = d2;
      far_i = i;
    }
  }
  centers.row(K - 1) = X.row(far_i);
  KmeansResult warm = kmeans_from_centers(X, centers);
  warm.wss = within_dispersion(X, warm.labels, K);
  return warm.wss < fit.wss ? warm : fit;
}

// Dispersions W_1..W_Kmax for one point set, warm-started up the K ladder.
Vector dispersion_ladder(const Matrix& X, int K_max, int restarts, RngStream& rng) {
  Vector W(K_max);
  KmeansResult prev;
  for (int K = 1; K <= K_max; ++K) {
    KmeansResult fit = gap_fit(X, K, restarts, K == 1 ? nullptr : &prev, rng);
    W[K - 1] = fit.wss;
    prev = std::move(fit);
  }
  return W;
}

}  // namespace

Vector correlation_eigenvalues(const Dataset& data) {
  const Matrix corr = correlation_matrix(data);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(corr);
  if (eig.info() != Eigen::Success)
    throw NumericalError("correlation matrix eigendecomposition failed");
  return eig.eigenvalues().reverse();
}

int kaiser_count(const Dataset& data) {
  const Vector ev = correlation_eigenvalues(data);
  int count = 0;
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > 1.0) ++count;
  return count;
}

double within_dispersion(const Matrix& X, const std::vector<int>& labels, int K) {
  const int n = static_cast<int>(X.rows());
  const int q = static_cast<int>(X.cols());
  if (static_cast<int>(labels.size()) != n)
    throw ConfigError("dispersion: one label per point required");
  Matrix centroids = Matrix::Zero(K, q);
  std::vector<int> counts(K, 0);
  for (int i = 0; i < n; ++i) {
    const int k = labels[i];
    if (k < 0 || k >= K) throw ConfigError("dispersion: label out of range");
    centroids.row(k) += X.row(i);
    ++counts[k];
  }
  for (int k = 0; k < K; ++k)
    if (counts[k] > 0) centroids.row(k) /= static_cast<double>(counts[k]);
  double w = 0.0;
  for (int i = 0; i < n; ++i) w += (X.row(i) - centroids.row(labels[i])).squaredNorm();
  return w;
}

GapResult gap_statistic(const Matrix& X, int K_max, int B_refs, RngStream& rng, int restarts) {
  const int n = static_cast<int>(X.rows());
  const int q = static_cast<int>(X.cols());
  if (K_max < 1) throw ConfigError("gap statistic: K_max must be >= 1");
  if (B_refs < 1) throw ConfigError("gap statistic: need at least one reference dataset");
  if (K_max > n) throw ConfigError("gap statistic: K_max exceeds the number of points");
  if (!X.allFinite()) throw DataError("gap statistic: points must be finite");

  const Vector observed_logW = dispersion_ladder(X, K_max, restarts, rng).array().log();

  const Vector lo = X.colwise().minCoeff();
  const Vector hi = X.colwise().maxCoeff();
  constexpr int kReferenceRestarts = 5;
  Matrix ref(n, q);
  Matrix ref_logW(B_refs, K_max);
  for (int b = 0; b < B_refs; ++b) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < q; ++j) ref(i, j) = lo[j] + rng.next_uniform() * (hi[j] - lo[j]);
    ref_logW.row(b) =
        dispersion_ladder(ref, K_max, kReferenceRestarts, rng).array().log().transpose();
  }

  GapResult result;
  result.B_refs = B_refs;
  result.gap = Vector(K_max);
  result.sk = Vector(K_max);
  for (int k = 0; k < K_max; ++k) {
    const double mean_log = ref_logW.col(k).mean();
    result.gap[k] = mean_log - observed_logW[k];
    const double sd =
        std::sqrt((ref_logW.col(k).array() - mean_log).square().sum() / B_refs);
    result.sk[k] = sd * std::sqrt(1.0 + 1.0 / B_refs);
  }

  result.K_hat = K_max;
  for (int k = 0; k + 1 < K_max; ++k) {
    if (result.gap[k] >= result.gap[k + 1] - result.sk[k + 1]) {
      result.K_hat = k + 1;
      break;
    }
  }
  return result;
}

Matrix pca_scores(const Dataset& data, int F) {
  const int n = data.n();
  const int R = data.R();
  if (F < 1 || F > R) throw ConfigError("principal components: need 1 <= F <= R");

  Matrix Z(n, R);
  for (int j = 0; j < R; ++j) {
    const double mean = data.Y.col(j).mean();
    const double var = (data.Y.col(j).array() - mean).square().sum() / (n - 1);
    if (!(var > 0.0))
      throw DataError("variable " + data.variable_names[j] + " is constant");
    Z.col(j) = (data.Y.col(j).array() - mean) / std::sqrt(var);
  }

  const Matrix corr = correlation_matrix(data);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(corr);
  if (eig.info() != Eigen::Success)
    throw NumericalError("correlation matrix eigendecomposition failed");

  // Top-F axes, descending eigenvalue, sign pinned so the largest-magnitude
  // entry of each axis is positive.
  Matrix axes(R, F);
  for (int f = 0; f < F; ++f) {
    Vector v = eig.eigenvectors().col(R - 1 - f);
    int argmax = 0;
    for (int j = 1; j < R; ++j)
      if (std::abs(v[j]) > std::abs(v[argmax])) argmax = j;
    if (v[argmax] < 0.0) v = -v;
    axes.col(f) = v;
  }
  return Z * axes;
}

PcaKmeansResult pca_kmeans_pipeline(const Dataset& data, int K_max, RngStream& rng) {
  PcaKmeansResult result;
  const int count = kaiser_count(data);
  result.kaiser_was_zero = count == 0;
  result.F_hat = count == 0 ? 1 : count;
  const Matrix scores = pca_scores(data, result.F_hat);
  constexpr int kObservedRestarts = 50;
  constexpr int kGapReferences = 50;
  result.K_hat = gap_statistic(scores, K_max, kGapReferences, rng, kObservedRestarts).K_hat;
  return result;
}

}  // namespace bcfm
