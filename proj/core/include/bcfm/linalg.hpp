#pragma once

#include <Eigen/Dense>

namespace bcfm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Symmetric positive-definite matrix wrapper.  Construction checks squareness
// and symmetry (1e-12 relative to the largest |entry|); positive definiteness
// is established lazily by the factorizations, which throw NotSpdError with
// the offending pivot index.  The wrapper exists so that covariance-typed
// arguments cannot silently receive an asymmetric matrix.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix m);

  static SpdMatrix identity(int dim);
  // Diagonal covariance; entries must be positive and finite.
  static SpdMatrix diagonal(const Vector& diag);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Matrix m_;
};

// Unit-lower-triangular L and positive diagonal D with S = L * diag(D) * L'.
struct LdlFactors {
  Matrix L;
  Vector D;
};

// Lower Cholesky factor (S = G G', G lower triangular with positive diagonal).
// Throws NotSpdError naming the first non-positive pivot.
Matrix cholesky_lower(const SpdMatrix& s);
// Overload for matrices already known symmetric (hot paths; no copy/check).
Matrix cholesky_lower_nocheck(const Matrix& s);

// Unpivoted LDL' with unit-lower L.  Same pivot error contract as Cholesky.
LdlFactors ldl_decompose(const SpdMatrix& s);

// log N(y; mean, cov).  Fails (NotSpdError) rather than returning -inf when
// cov is not positive definite.
double mvn_logpdf(const Vector& y, const Vector& mean, const SpdMatrix& cov);

// Same density given a precomputed lower Cholesky factor of the covariance.
double mvn_logpdf_chol(const Vector& y, const Vector& mean, const Matrix& chol_lower);

// Inverse from a lower Cholesky factor: (G G')^{-1}.
Matrix inverse_from_cholesky(const Matrix& chol_lower);

// Solve S x = b given the lower Cholesky factor of S (two triangular solves).
Vector cholesky_solve(const Matrix& chol_lower, const Vector& b);

// Forces bitwise symmetry by averaging a matrix with its transpose.
Matrix symmetrize(const Matrix& m);

}  // namespace bcfm
