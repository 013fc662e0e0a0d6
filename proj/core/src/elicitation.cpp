#include "bcfm/elicitation.hpp"

#include <algorithm>
#include <string>

#include "bcfm/errors.hpp"
#include "bcfm/factor_analysis.hpp"

namespace bcfm {
namespace {

// Relabels clusters so the largest becomes 0 (ties to the lowest original
// label); the remaining clusters keep their relative order.
std::vector<int> relabel_largest_first(const std::vector<int>& labels, int K) {
  std::vector<int> counts(K, 0);
  for (int l : labels) ++counts[l];
  int largest = 0;
  for (int k = 1; k < K; ++k) {
    if (counts[k] > counts[largest]) largest = k;
  }
  std::vector<int> map(K);
  int next = 1;
  for (int k = 0; k < K; ++k) map[k] = (k == largest) ? 0 : next++;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = map[labels[i]];
  return out;
}

}  // namespace

Elicitation elicit_priors(const Matrix& X_hat, const std::vector<int>& labels, int K) {
  const int n = static_cast<int>(X_hat.rows());
  const int F = static_cast<int>(X_hat.cols());
  if (K < 1) throw ConfigError("elicitation: K must be >= 1");
  if (static_cast<int>(labels.size()) != n) throw DataError("elicitation: label count mismatch");
  for (int l : labels) {
    if (l < 0 || l >= K) throw DataError("elicitation: label out of range");
  }

  const std::vector<int> lab = relabel_largest_first(labels, K);
  std::vector<int> counts(K, 0);
  for (int l : lab) ++counts[l];
  for (int k = 0; k < K; ++k) {
    if (counts[k] < F + 2) {
      throw SmallClusterError("elicitation: cluster " + std::to_string(k + 1) +
                                  " has " + std::to_string(counts[k]) +
                                  " members but needs at least F+2 = " +
                                  std::to_string(F + 2) +
                                  "; use a smaller K or more data",
                              k, counts[k]);
    }
  }

  // Within-cluster sample covariances of the factor estimates.
  std::vector<Vector> means(K, Vector::Zero(F));
  for (int i = 0; i < n; ++i) means[lab[i]] += X_hat.row(i).transpose();
  for (int k = 0; k < K; ++k) means[k] /= static_cast<double>(counts[k]);
  std::vector<Matrix> scatter(K, Matrix::Zero(F, F));
  for (int i = 0; i < n; ++i) {
    const Vector d = X_hat.row(i).transpose() - means[lab[i]];
    scatter[lab[i]] += d * d.transpose();
  }
  std::vector<SpdMatrix> S;
  S.reserve(K);
  for (int k = 0; k < K; ++k) {
    try {
      SpdMatrix sk(symmetrize(scatter[k] / static_cast<double>(counts[k] - 1)));
      cholesky_lower(sk);  // positive definiteness check up front
      S.push_back(std::move(sk));
    } catch (const Error&) {
      throw NumericalError("elicitation: covariance of cluster " + std::to_string(k + 1) +
                           " is singular; use a smaller K or more data");
    }
  }

  Elicitation out;
  ElicitationArtifacts& art = out.artifacts;
  art.S1_ldl = ldl_decompose(S[0]);
  art.S = std::move(S);
  art.X_hat = X_hat;
  art.km_labels = lab;

  // x~_i = L1^-1 x^_i, computed for all rows at once.
  Matrix Xt = X_hat.transpose();
  art.S1_ldl.L.triangularView<Eigen::Lower>().solveInPlace(Xt);
  art.X_tilde = Xt.transpose();

  const Matrix L1_inv = [&] {
    Matrix inv = Matrix::Identity(F, F);
    art.S1_ldl.L.triangularView<Eigen::Lower>().solveInPlace(inv);
    return inv;
  }();

  PriorSpec& prior = out.prior;
  prior.m.reserve(K);
  prior.C.reserve(K);
  for (int k = 0; k < K; ++k) {
    Vector mk = Vector::Zero(F);
    for (int i = 0; i < n; ++i) {
      if (lab[i] == k) mk += art.X_tilde.row(i).transpose();
    }
    prior.m.push_back(mk / static_cast<double>(counts[k]));
    prior.C.emplace_back(symmetrize(L1_inv * art.S[k].mat() * L1_inv.transpose()));
  }
  prior.nu = F + 2;
  for (int k = 1; k < K; ++k) prior.psi.push_back(prior.C[k]);
  prior.alpha = Vector::Constant(K, 2.0);
  prior.n_omega = Vector::Constant(F, 4.0);
  prior.s2_omega = art.S1_ldl.D;
  prior.validate(F);
  return out;
}

Elicitation elicit_from_data(const Dataset& data, const ModelDims& dims, RngStream& rng) {
  dims.validate(data.n(), data.R());
  const FactorAnalysisResult fa = preliminary_factor_analysis(data, dims.F);
  const RotationResult rot = rotate_to_constraint(fa.B_hat);
  const Matrix X_hat = estimate_factors(rot.B_star, fa.V_hat, data);
  const KmeansResult km = kmeans_restarts(X_hat, dims.K, rng);

  Elicitation out = elicit_priors(X_hat, km.labels, dims.K);
  out.artifacts.B_hat = fa.B_hat;
  out.artifacts.B_star = rot.B_star;
  out.artifacts.M = rot.M;
  out.artifacts.V_hat = fa.V_hat;
  out.artifacts.B_tilde = rot.B_star * out.artifacts.S1_ldl.L;
  return out;
}

}  // namespace bcfm
