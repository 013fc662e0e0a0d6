#include <cmath>
#include <limits>
#include <vector>

#include "bcfm/gibbs.hpp"

namespace bcfm {
namespace {

// In-place forward substitution L v = rhs (L lower triangular, v holds rhs).
inline void forward_solve(const Matrix& L, Vector& v) {
  const int d = static_cast<int>(v.size());
  for (int j = 0; j < d; ++j) {
    v[j] /= L(j, j);
    const double vj = v[j];
    for (int i = j + 1; i < d; ++i) v[i] -= L(i, j) * vj;
  }
}

// In-place back substitution L' v = rhs.
inline void backward_solve_transposed(const Matrix& L, Vector& v) {
  for (int j = static_cast<int>(v.size()) - 1; j >= 0; --j) {
    double sum = v[j];
    for (int i = j + 1; i < static_cast<int>(v.size()); ++i) sum -= L(i, j) * v[i];
    v[j] = sum / L(j, j);
  }
}

std::vector<int> cluster_counts(const GibbsState& s) {
  std::vector<int> counts(s.mixture.K(), 0);
  for (int k : s.mixture.z) ++counts[k];
  return counts;
}

}  // namespace

void update_factors(GibbsState& s, const Dataset& data, RngStream& rng) {
  const int n = data.n();
  const int F = static_cast<int>(s.loadings.B.cols());
  const int K = s.mixture.K();

  const Matrix VinvB = s.noise.sigma2.cwiseInverse().asDiagonal() * s.loadings.B;
  const Matrix W = symmetrize(s.loadings.B.transpose() * VinvB);
  const Matrix Gt = VinvB.transpose() * data.Y.transpose();  // column i = B' V^-1 y_i

  // Per-cluster pieces: inverse of the posterior precision Cholesky factor
  // (applying it is a plain small matrix product, faster than a triangular
  // solve at factor-sized dimensions) and Omega_k^-1 mu_k.
  std::vector<Matrix> Linv;
  std::vector<Vector> shift;
  Linv.reserve(K);
  shift.reserve(K);
  for (int k = 0; k < K; ++k) {
    const Matrix Lo = cholesky_lower(s.mixture.omega[k]);
    const Matrix omega_inv = inverse_from_cholesky(Lo);
    const Matrix prec_chol = cholesky_lower_nocheck(symmetrize(omega_inv + W));
    Linv.push_back(prec_chol.triangularView<Eigen::Lower>().solve(Matrix::Identity(F, F)));
    shift.push_back(omega_inv * s.mixture.mu[k]);
  }

  // All subjects' standard normals, drawn in subject order so the stream
  // consumption does not depend on the grouping below.
  Matrix Z(F, n);
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < F; ++f) Z(f, i) = rng.next_normal();

  // Group subjects by cluster (counting sort, no per-group allocation) and
  // push each group through x_i = L^-T (L^-1 b_i + z_i) as one batch, which
  // yields the conditional mean plus a draw with covariance (L L')^-1.  Work
  // happens in F x n layout so every gather and scatter copies a contiguous
  // column.
  std::vector<int> offset(K + 1, 0);
  for (int i = 0; i < n; ++i) ++offset[s.mixture.z[i] + 1];
  for (int k = 0; k < K; ++k) offset[k + 1] += offset[k];
  std::vector<int> order(n);
  std::vector<int> cursor(offset.begin(), offset.end() - 1);
  for (int i = 0; i < n; ++i) order[cursor[s.mixture.z[i]]++] = i;

  Matrix Xt(F, n);
  Matrix rhs, tmp;
  for (int k = 0; k < K; ++k) {
    const int m = offset[k + 1] - offset[k];
    if (m == 0) continue;
    const int* idx = order.data() + offset[k];
    rhs.resize(F, m);
    for (int j = 0; j < m; ++j) rhs.col(j) = Gt.col(idx[j]) + shift[k];
    tmp.resize(F, m);
    tmp.noalias() = Linv[k] * rhs;
    for (int j = 0; j < m; ++j) tmp.col(j) += Z.col(idx[j]);
    rhs.noalias() = Linv[k].transpose() * tmp;
    for (int j = 0; j < m; ++j) Xt.col(idx[j]) = rhs.col(j);
  }
  s.mixture.X = Xt.transpose();
}

void update_cluster_means(GibbsState& s, const PriorSpec& prior, RngStream& rng) {
  const int K = s.mixture.K();
  const Eigen::Index F = s.mixture.X.cols();
  std::vector<Vector> sums(K, Vector::Zero(F));
  std::vector<int> counts(K, 0);
  for (Eigen::Index i = 0; i < s.mixture.X.rows(); ++i) {
    const int k = s.mixture.z[i];
    sums[k] += s.mixture.X.row(i).transpose();
    ++counts[k];
  }
  for (int k = 0; k < K; ++k) {
    const Matrix C_inv = inverse_from_cholesky(cholesky_lower(prior.C[k]));
    const Matrix omega_inv = inverse_from_cholesky(cholesky_lower(s.mixture.omega[k]));
    const Matrix prec = symmetrize(C_inv + counts[k] * omega_inv);
    const Matrix Lp = cholesky_lower_nocheck(prec);
    Vector mean = C_inv * prior.m[k] + omega_inv * sums[k];
    forward_solve(Lp, mean);
    backward_solve_transposed(Lp, mean);
    s.mixture.mu[k] = sample_mvn_precision_chol(mean, Lp, rng);
  }
}

void update_cluster_covariances(GibbsState& s, const PriorSpec& prior, RngStream& rng) {
  const int K = s.mixture.K();
  const Eigen::Index F = s.mixture.X.cols();
  std::vector<Matrix> scatter(K, Matrix::Zero(F, F));
  std::vector<int> counts(K, 0);
  Vector d(F);
  for (Eigen::Index i = 0; i < s.mixture.X.rows(); ++i) {
    const int k = s.mixture.z[i];
    d = s.mixture.X.row(i).transpose() - s.mixture.mu[k];
    scatter[k].selfadjointView<Eigen::Lower>().rankUpdate(d);
    ++counts[k];
  }

  // Cluster 0: elementwise inverse gamma keeps the covariance diagonal.
  Vector diag(F);
  for (Eigen::Index l = 0; l < F; ++l) {
    diag[l] = sample_inverse_gamma(
        0.5 * (counts[0] + prior.n_omega[l]),
        0.5 * (scatter[0](l, l) + prior.n_omega[l] * prior.s2_omega[l]), rng);
  }
  s.mixture.omega[0] = SpdMatrix::diagonal(diag);

  // Remaining clusters: inverse Wishart.
  for (int k = 1; k < K; ++k) {
    const Matrix full = Matrix(scatter[k].selfadjointView<Eigen::Lower>());
    const SpdMatrix scale(symmetrize(full) + prior.psi[k - 1].mat());
    s.mixture.omega[k] = sample_inverse_wishart(counts[k] + prior.nu, scale, rng);
  }
}

void update_loadings(GibbsState& s, const Dataset& data, RngStream& rng) {
  const int R = data.R();
  const int F = static_cast<int>(s.loadings.B.cols());
  const Matrix& X = s.mixture.X;
  const Matrix XtX = symmetrize(X.transpose() * X);
  const Matrix XtY = X.transpose() * data.Y;  // column r = X' y_{.r}

  for (int r = 1; r < R; ++r) {
    const int free = LoadingsState::free_count(r, F);
    const double inv_s2 = 1.0 / s.noise.sigma2[r];
    Matrix prec = inv_s2 * XtX.topLeftCorner(free, free);
    for (int l = 0; l < free; ++l) prec(l, l) += 1.0 / s.loadings.tau[l];
    const Matrix Lp = cholesky_lower_nocheck(symmetrize(prec));
    Vector rhs = XtY.col(r).head(free);
    if (r < F) rhs -= XtX.col(r).head(free);  // response is y_{.r} - X_{.r}
    rhs *= inv_s2;
    forward_solve(Lp, rhs);
    backward_solve_transposed(Lp, rhs);
    const Vector draw = sample_mvn_precision_chol(rhs, Lp, rng);
    s.loadings.B.row(r).head(free) = draw.transpose();
  }
}

void update_idiosyncratic_variances(GibbsState& s, const Dataset& data,
                                    const PriorSpec& prior, RngStream& rng) {
  const Matrix E = data.Y - s.mixture.X * s.loadings.B.transpose();
  const int n = data.n();
  for (int r = 0; r < data.R(); ++r) {
    s.noise.sigma2[r] = sample_inverse_gamma(
        0.5 * (n + prior.n_sigma),
        0.5 * (prior.n_sigma * prior.s2_sigma + E.col(r).squaredNorm()), rng);
  }
}

void update_tau(GibbsState& s, const PriorSpec& prior, RngStream& rng) {
  const int R = static_cast<int>(s.loadings.B.rows());
  const int F = static_cast<int>(s.loadings.B.cols());
  for (int l = 0; l < F; ++l) {
    double ss = 0.0;
    for (int r = l + 1; r < R; ++r) ss += s.loadings.B(r, l) * s.loadings.B(r, l);
    s.loadings.tau[l] = sample_inverse_gamma(0.5 * (R - l - 1 + prior.n_tau),
                                             0.5 * (ss + prior.n_tau * prior.s2_tau), rng);
  }
}

void update_assignments(GibbsState& s, RngStream& rng) {
  const int n = static_cast<int>(s.mixture.X.rows());
  const int F = static_cast<int>(s.mixture.X.cols());
  const int K = s.mixture.K();

  // Log weight of every (subject, cluster) pair via the expanded quadratic
  // form x'Ax - 2x'b + c with A = Omega_k^-1 and b = A mu_k, so each cluster
  // costs two small matrix products instead of n triangular solves.  The
  // shared -F/2 log(2 pi) term cancels across clusters and is omitted.
  const Matrix& X = s.mixture.X;
  Matrix LW(n, K);
  Matrix M(n, F);
  for (int k = 0; k < K; ++k) {
    const Matrix L = cholesky_lower(s.mixture.omega[k]);
    double half_logdet = 0.0;
    for (int j = 0; j < F; ++j) half_logdet += std::log(L(j, j));
    const Matrix omega_inv = inverse_from_cholesky(L);
    const Vector b = omega_inv * s.mixture.mu[k];
    const double c = s.mixture.mu[k].dot(b);
    M.noalias() = X * omega_inv;
    LW.col(k).noalias() = X * b;
    LW.col(k) -= 0.5 * (M.array() * X.array()).rowwise().sum().matrix();
    LW.col(k).array() += std::log(s.mixture.p[k]) - half_logdet - 0.5 * c;
  }

  // Max-shifted exponentiation over the whole table at once, then one inverse
  // CDF lookup per subject.  NaN would slip through the max shift silently, so
  // reject it up front; a -inf row (all clusters impossible) is an error too.
  if (!((LW.array() == LW.array()).all()))
    throw NumericalError("assignments: NaN cluster log weight");
  const Vector rowmax = LW.rowwise().maxCoeff();
  // Row-major so the shift applies along contiguous rows and the per-subject
  // scan below walks contiguous memory.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> W = LW;
  W.colwise() -= rowmax;
  W.array() = W.array().exp();
  for (int i = 0; i < n; ++i) {
    if (rowmax[i] == -std::numeric_limits<double>::infinity())
      throw NumericalError("assignments: all cluster log weights are -inf");
    double total = 0.0;
    for (int k = 0; k < K; ++k) total += W(i, k);
    const double u = rng.next_uniform() * total;
    double cum = 0.0;
    int last_positive = 0;
    int pick = -1;
    for (int k = 0; k < K; ++k) {
      if (W(i, k) > 0.0) last_positive = k;
      cum += W(i, k);
      if (u < cum) {
        pick = k;
        break;
      }
    }
    s.mixture.z[i] = pick >= 0 ? pick : last_positive;  // rounding sliver past the last bin
  }
}

void update_weights(GibbsState& s, const PriorSpec& prior, RngStream& rng) {
  const std::vector<int> counts = cluster_counts(s);
  Vector alpha(s.mixture.K());
  for (int k = 0; k < s.mixture.K(); ++k) alpha[k] = counts[k] + prior.alpha[k];
  s.mixture.p = sample_dirichlet(alpha, rng);
}

}  // namespace bcfm
