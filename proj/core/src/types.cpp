#include "bcfm/types.hpp"

#include <cmath>
#include <string>

#include "bcfm/errors.hpp"

namespace bcfm {
namespace {

void require_positive_finite(const Vector& v, const char* name) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
      throw DataError(std::string(name) + "[" + std::to_string(i) +
                      "] must be positive and finite, got " + std::to_string(v[i]));
    }
  }
}

}  // namespace

Dataset Dataset::create(Matrix y, std::vector<std::string> names) {
  if (y.rows() < 2) throw DataError("dataset: need at least 2 rows");
  if (y.cols() < 2) throw DataError("dataset: need at least 2 variables");
  if (!y.allFinite()) throw DataError("dataset: non-finite values present");
  if (names.empty()) {
    names.reserve(y.cols());
    for (Eigen::Index r = 0; r < y.cols(); ++r) names.push_back("y" + std::to_string(r + 1));
  }
  if (static_cast<Eigen::Index>(names.size()) != y.cols()) {
    throw DataError("dataset: " + std::to_string(names.size()) + " names for " +
                    std::to_string(y.cols()) + " variables");
  }
  return Dataset{std::move(y), std::move(names)};
}

void ModelDims::validate(int n, int R) const {
  if (K < 1) throw ConfigError("dims: K must be >= 1");
  if (F < 1) throw ConfigError("dims: F must be >= 1");
  if (F > R) throw ConfigError("dims: F=" + std::to_string(F) + " exceeds R=" + std::to_string(R));
  if (K > n) throw ConfigError("dims: K=" + std::to_string(K) + " exceeds n=" + std::to_string(n));
}

void LoadingsState::validate() const {
  const Eigen::Index R = B.rows();
  const Eigen::Index F = B.cols();
  if (F < 1 || R < F) throw DataError("loadings: bad shape");
  if (!B.allFinite()) throw DataError("loadings: non-finite entry");
  for (Eigen::Index r = 0; r < F; ++r) {
    if (B(r, r) != 1.0) {
      throw DataError("loadings: diagonal entry (" + std::to_string(r) + "," +
                      std::to_string(r) + ") must be exactly 1");
    }
    for (Eigen::Index c = r + 1; c < F; ++c) {
      if (B(r, c) != 0.0) {
        throw DataError("loadings: upper entry (" + std::to_string(r) + "," +
                        std::to_string(c) + ") must be exactly 0");
      }
    }
  }
  if (tau.size() != F) throw DataError("loadings: tau size mismatch");
  require_positive_finite(tau, "tau");
}

void MixtureState::validate() const {
  const int k = K();
  if (k < 1) throw DataError("mixture: empty weight vector");
  if (static_cast<int>(mu.size()) != k || static_cast<int>(omega.size()) != k) {
    throw DataError("mixture: mu/omega size mismatch with p");
  }
  const Eigen::Index F = X.cols();
  for (int c = 0; c < k; ++c) {
    if (mu[c].size() != F) throw DataError("mixture: mu[" + std::to_string(c) + "] size mismatch");
    if (!mu[c].allFinite()) throw DataError("mixture: non-finite mu");
    if (omega[c].dim() != F) throw DataError("mixture: omega[" + std::to_string(c) + "] size mismatch");
  }
  // Cluster 0's covariance must be diagonal, exactly.
  for (Eigen::Index i = 0; i < F; ++i) {
    for (Eigen::Index j = 0; j < F; ++j) {
      if (i != j && omega[0](static_cast<int>(i), static_cast<int>(j)) != 0.0) {
        throw DataError("mixture: omega[0] must be exactly diagonal");
      }
    }
  }
  require_positive_finite(p, "p");
  const double defect = std::abs(p.sum() - 1.0);
  if (defect > 1e-12) {
    throw DataError("mixture: weights sum off by " + std::to_string(defect));
  }
  if (static_cast<Eigen::Index>(z.size()) != X.rows()) {
    throw DataError("mixture: z length mismatch with X");
  }
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] < 0 || z[i] >= k) {
      throw DataError("mixture: label out of range at subject " + std::to_string(i));
    }
  }
  if (!X.allFinite()) throw DataError("mixture: non-finite factor");
}

void NoiseState::validate() const { require_positive_finite(sigma2, "sigma2"); }

void PriorSpec::validate(int F) const {
  const int k = K();
  if (k < 1) throw ConfigError("prior: empty alpha");
  if (static_cast<int>(m.size()) != k || static_cast<int>(C.size()) != k) {
    throw ConfigError("prior: m/C size mismatch with alpha");
  }
  for (int c = 0; c < k; ++c) {
    if (m[c].size() != F || C[c].dim() != F) {
      throw ConfigError("prior: m/C dimension mismatch at cluster " + std::to_string(c));
    }
  }
  if (static_cast<int>(psi.size()) != k - 1) {
    throw ConfigError("prior: need K-1 inverse Wishart scales, got " +
                      std::to_string(psi.size()));
  }
  for (const auto& s : psi) {
    if (s.dim() != F) throw ConfigError("prior: psi dimension mismatch");
  }
  if (k > 1 && !(nu > F - 1)) {
    throw ConfigError("prior: nu must exceed F-1, got " + std::to_string(nu));
  }
  require_positive_finite(alpha, "alpha");
  if (!(n_sigma > 0) || !(s2_sigma > 0) || !(n_tau > 0) || !(s2_tau > 0)) {
    throw ConfigError("prior: inverse gamma hyperparameters must be positive");
  }
  if (n_omega.size() != F || s2_omega.size() != F) {
    throw ConfigError("prior: n_omega/s2_omega must have length F");
  }
  require_positive_finite(n_omega, "n_omega");
  require_positive_finite(s2_omega, "s2_omega");
}

}  // namespace bcfm
