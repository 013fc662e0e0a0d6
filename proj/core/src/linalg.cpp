#include "bcfm/linalg.hpp"

#include <cmath>
#include <string>

#include "bcfm/errors.hpp"

namespace bcfm {

SpdMatrix::SpdMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() == 0) {
    throw DataError("SpdMatrix: matrix must be square and non-empty, got " +
                    std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
  }
  if (!m_.allFinite()) {
    throw DataError("SpdMatrix: non-finite entries");
  }
  const double scale = m_.cwiseAbs().maxCoeff();
  const double tol = 1e-12 * std::max(1.0, scale);
  for (Eigen::Index i = 0; i < m_.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m_.cols(); ++j) {
      if (std::abs(m_(i, j) - m_(j, i)) > tol) {
        throw DataError("SpdMatrix: asymmetric at (" + std::to_string(i) + "," +
                        std::to_string(j) + "): " + std::to_string(m_(i, j)) +
                        " vs " + std::to_string(m_(j, i)));
      }
    }
  }
}

SpdMatrix SpdMatrix::identity(int dim) {
  return SpdMatrix(Matrix::Identity(dim, dim));
}

SpdMatrix SpdMatrix::diagonal(const Vector& diag) {
  if (diag.size() == 0) throw DataError("SpdMatrix::diagonal: empty diagonal");
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!(diag[i] > 0.0) || !std::isfinite(diag[i])) {
      throw DataError("SpdMatrix::diagonal: entry " + std::to_string(i) +
                      " not positive and finite");
    }
  }
  return SpdMatrix(Matrix(diag.asDiagonal()));
}

Matrix cholesky_lower_nocheck(const Matrix& s) {
  const Eigen::Index n = s.rows();
  Matrix L = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = s(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw NotSpdError("cholesky: non-positive pivot " + std::to_string(d),
                        static_cast<int>(j));
    }
    const double root = std::sqrt(d);
    L(j, j) = root;
    const double inv = 1.0 / root;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= L(i, k) * L(j, k);
      L(i, j) = v * inv;
    }
  }
  return L;
}

Matrix cholesky_lower(const SpdMatrix& s) { return cholesky_lower_nocheck(s.mat()); }

LdlFactors ldl_decompose(const SpdMatrix& s) {
  const Eigen::Index n = s.mat().rows();
  LdlFactors f{Matrix::Identity(n, n), Vector::Zero(n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = s(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= f.L(j, k) * f.L(j, k) * f.D[k];
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw NotSpdError("ldl: non-positive pivot " + std::to_string(d),
                        static_cast<int>(j));
    }
    f.D[j] = d;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= f.L(i, k) * f.L(j, k) * f.D[k];
      f.L(i, j) = v / d;
    }
  }
  return f;
}

double mvn_logpdf_chol(const Vector& y, const Vector& mean, const Matrix& chol_lower) {
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  const Eigen::Index p = y.size();
  Vector z = y - mean;
  chol_lower.triangularView<Eigen::Lower>().solveInPlace(z);
  double logdet_half = 0.0;
  for (Eigen::Index i = 0; i < p; ++i) logdet_half += std::log(chol_lower(i, i));
  return -0.5 * static_cast<double>(p) * kLog2Pi - logdet_half - 0.5 * z.squaredNorm();
}

double mvn_logpdf(const Vector& y, const Vector& mean, const SpdMatrix& cov) {
  if (y.size() != mean.size() || y.size() != cov.dim()) {
    throw DataError("mvn_logpdf: dimension mismatch");
  }
  return mvn_logpdf_chol(y, mean, cholesky_lower(cov));
}

Matrix inverse_from_cholesky(const Matrix& chol_lower) {
  const Eigen::Index n = chol_lower.rows();
  Matrix inv = Matrix::Identity(n, n);
  chol_lower.triangularView<Eigen::Lower>().solveInPlace(inv);
  chol_lower.transpose().triangularView<Eigen::Upper>().solveInPlace(inv);
  return symmetrize(inv);
}

Vector cholesky_solve(const Matrix& chol_lower, const Vector& b) {
  Vector x = b;
  chol_lower.triangularView<Eigen::Lower>().solveInPlace(x);
  chol_lower.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace bcfm
