#include "bcfm/factor_analysis.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "bcfm/errors.hpp"

namespace bcfm {
namespace {

// Columns are standardized with the n-1 denominator.
struct ColumnMoments {
  Vector mean;
  Vector sd;
};

ColumnMoments column_moments(const Matrix& Y) {
  const Eigen::Index n = Y.rows();
  ColumnMoments m;
  m.mean = Y.colwise().mean();
  m.sd.resize(Y.cols());
  for (Eigen::Index j = 0; j < Y.cols(); ++j) {
    const double ss = (Y.col(j).array() - m.mean[j]).square().sum();
    m.sd[j] = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(m.sd[j] > 0.0)) {
      throw DataError("column " + std::to_string(j) + " is constant");
    }
  }
  return m;
}

// Initial communalities: squared multiple correlations 1 - 1/(R^-1)_jj when
// the correlation matrix is invertible, otherwise the largest squared
// off-diagonal correlation per column.
Vector initial_communalities(const Matrix& corr) {
  const Eigen::Index R = corr.rows();
  Vector h2(R);
  Eigen::LLT<Matrix> llt(corr);
  if (llt.info() == Eigen::Success) {
    const Matrix inv = llt.solve(Matrix::Identity(R, R));
    for (Eigen::Index j = 0; j < R; ++j) {
      h2[j] = 1.0 - 1.0 / inv(j, j);
      if (!(h2[j] > 0.0)) h2[j] = 1e-3;
    }
    return h2;
  }
  for (Eigen::Index j = 0; j < R; ++j) {
    double best = 0.0;
    for (Eigen::Index i = 0; i < R; ++i) {
      if (i != j) best = std::max(best, corr(i, j) * corr(i, j));
    }
    h2[j] = std::max(best, 1e-3);
  }
  return h2;
}

}  // namespace

Matrix correlation_matrix(const Dataset& data) {
  const ColumnMoments m = column_moments(data.Y);
  const Eigen::Index n = data.Y.rows();
  const Eigen::Index R = data.Y.cols();
  Matrix Z = data.Y;
  for (Eigen::Index j = 0; j < R; ++j) {
    Z.col(j) = (Z.col(j).array() - m.mean[j]) / m.sd[j];
  }
  Matrix corr = (Z.transpose() * Z) / static_cast<double>(n - 1);
  corr = symmetrize(corr);
  corr.diagonal().setOnes();
  return corr;
}

FactorAnalysisResult preliminary_factor_analysis(const Dataset& data, int F) {
  const int R = data.R();
  if (F < 1 || F > R) throw ConfigError("factor analysis: need 1 <= F <= R");
  const ColumnMoments moments = column_moments(data.Y);
  const Matrix corr = correlation_matrix(data);

  constexpr double kTol = 1e-6;
  constexpr int kMaxSweeps = 200;
  // Communalities are kept off the boundary so residual variances stay
  // positive even in Heywood cases.
  const auto clip = [](double v) { return std::min(std::max(v, 1e-6), 1.0 - 1e-6); };

  Vector h2 = initial_communalities(corr);
  for (Eigen::Index j = 0; j < R; ++j) h2[j] = clip(h2[j]);

  Matrix loadings(R, F);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    Matrix reduced = corr;
    reduced.diagonal() = h2;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(reduced);
    if (eig.info() != Eigen::Success) {
      throw NumericalError("factor analysis: eigendecomposition failed");
    }
    // Eigen returns ascending order; the top F components are at the end.
    int positive = 0;
    for (Eigen::Index j = 0; j < R; ++j) {
      if (eig.eigenvalues()[j] > 0.0) ++positive;
    }
    if (positive < F) {
      throw DataError("factor analysis: only " + std::to_string(positive) +
                      " positive eigenvalues for F=" + std::to_string(F));
    }
    for (int f = 0; f < F; ++f) {
      const Eigen::Index idx = R - 1 - f;
      Vector v = eig.eigenvectors().col(idx);
      // Pin the sign so results do not depend on the eigensolver's choice.
      Eigen::Index argmax = 0;
      v.cwiseAbs().maxCoeff(&argmax);
      if (v[argmax] < 0.0) v = -v;
      loadings.col(f) = v * std::sqrt(eig.eigenvalues()[idx]);
    }
    Vector h2_new(R);
    for (Eigen::Index j = 0; j < R; ++j) h2_new[j] = clip(loadings.row(j).squaredNorm());
    const double delta = (h2_new - h2).cwiseAbs().maxCoeff();
    h2 = h2_new;
    if (delta < kTol) break;
  }

  FactorAnalysisResult out;
  out.B_hat = moments.sd.asDiagonal() * loadings;
  out.V_hat.resize(R);
  for (Eigen::Index j = 0; j < R; ++j) {
    out.V_hat[j] = moments.sd[j] * moments.sd[j] * (1.0 - h2[j]);
  }
  return out;
}

RotationResult rotate_to_constraint(const Matrix& B_hat) {
  const Eigen::Index F = B_hat.cols();
  if (B_hat.rows() < F) throw ConfigError("rotate: loadings have fewer rows than columns");
  const Matrix lead = B_hat.topRows(F);
  Eigen::JacobiSVD<Matrix> svd(lead, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smin = svd.singularValues().minCoeff();
  const double smax = svd.singularValues().maxCoeff();
  if (!(smin > 0.0) || smax / smin >= 1e8) {
    throw NumericalError(
        "rotate: leading block of the loadings is near-singular (condition " +
        std::to_string(smax / (smin > 0 ? smin : 1e-300)) +
        "); reorder the variables so the first F load distinctly on the factors");
  }
  RotationResult out;
  out.M = svd.solve(Matrix::Identity(F, F));
  out.B_star = B_hat * out.M;
  // The leading block is the identity by construction; stamp it exactly so
  // the structural constraint holds bitwise downstream.
  out.B_star.topRows(F) = Matrix::Identity(F, F);
  return out;
}

Matrix estimate_factors(const Matrix& B_star, const Vector& V_hat, const Dataset& data) {
  const Eigen::Index R = B_star.rows();
  if (data.R() != R || V_hat.size() != R) throw DataError("estimate_factors: shape mismatch");
  for (Eigen::Index r = 0; r < R; ++r) {
    if (!(V_hat[r] > 0.0)) throw DataError("estimate_factors: non-positive variance");
  }
  const Matrix Wb = V_hat.cwiseInverse().asDiagonal() * B_star;  // V^-1 B*
  const Matrix G = symmetrize(B_star.transpose() * Wb);          // B*' V^-1 B*
  Matrix L;
  try {
    L = cholesky_lower_nocheck(G);
  } catch (const NotSpdError&) {
    throw NumericalError("estimate_factors: design matrix is rank deficient");
  }
  Matrix Xt = (data.Y * Wb).transpose();  // columns are B*' V^-1 y_i
  L.triangularView<Eigen::Lower>().solveInPlace(Xt);
  L.transpose().triangularView<Eigen::Upper>().solveInPlace(Xt);
  return Xt.transpose();
}

}  // namespace bcfm
