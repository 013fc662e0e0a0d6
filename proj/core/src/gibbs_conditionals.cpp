#include <cmath>

#include "bcfm/gibbs.hpp"

namespace bcfm {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Log-sum-exp with max shift; assumes at least one finite entry.
double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

// Count of subjects and sum of factor rows per cluster.
struct ClusterStats {
  std::vector<int> counts;
  std::vector<Vector> sums;
};

ClusterStats cluster_stats(const GibbsState& s) {
  const int K = s.mixture.K();
  const Eigen::Index F = s.mixture.X.cols();
  ClusterStats st{std::vector<int>(K, 0), std::vector<Vector>(K, Vector::Zero(F))};
  for (Eigen::Index i = 0; i < s.mixture.X.rows(); ++i) {
    const int k = s.mixture.z[i];
    ++st.counts[k];
    st.sums[k] += s.mixture.X.row(i).transpose();
  }
  return st;
}

}  // namespace

void GibbsState::validate() const {
  loadings.validate();
  mixture.validate();
  noise.validate();
  if (loadings.B.cols() != mixture.X.cols()) throw DataError("state: F mismatch");
  if (noise.sigma2.size() != loadings.B.rows()) throw DataError("state: R mismatch");
}

void ChainConfig::validate() const {
  if (iterations < 1 || thin < 1 || burnin_draws < 0) {
    throw ConfigError("chain config: iterations/thin must be positive, burn-in >= 0");
  }
  if (retained() <= burnin_draws) {
    throw ConfigError("chain config: iterations/thin = " + std::to_string(retained()) +
                      " retained draws, all consumed by burn-in " +
                      std::to_string(burnin_draws));
  }
}

double MvnParams::logpdf(const Vector& x) const {
  return mvn_logpdf(x, mean, SpdMatrix(symmetrize(cov)));
}

double IgParams::logpdf(double x) const { return inverse_gamma_logpdf(x, shape, scale); }

double IwParams::logpdf(const SpdMatrix& x) const {
  return inverse_wishart_logpdf(x, df, SpdMatrix(symmetrize(scale)));
}

double DirichletParams::logpdf(const Vector& p) const { return dirichlet_logpdf(p, alpha); }

double CategoricalParams::logpmf(int k) const {
  return log_weights[k] - log_sum_exp(log_weights);
}

MvnParams factor_full_conditional(const GibbsState& s, const Dataset& data, int i) {
  const int k = s.mixture.z[i];
  const Matrix VinvB = s.noise.sigma2.cwiseInverse().asDiagonal() * s.loadings.B;
  const Matrix W = symmetrize(s.loadings.B.transpose() * VinvB);
  const Matrix omega_inv = inverse_from_cholesky(cholesky_lower(s.mixture.omega[k]));
  const Matrix prec = symmetrize(omega_inv + W);
  const Matrix A = inverse_from_cholesky(cholesky_lower_nocheck(prec));
  const Vector rhs = VinvB.transpose() * data.Y.row(i).transpose() + omega_inv * s.mixture.mu[k];
  return MvnParams{A * rhs, A};
}

MvnParams cluster_mean_full_conditional(const GibbsState& s, const PriorSpec& prior, int k) {
  const ClusterStats st = cluster_stats(s);
  const Matrix C_inv = inverse_from_cholesky(cholesky_lower(prior.C[k]));
  const Matrix omega_inv = inverse_from_cholesky(cholesky_lower(s.mixture.omega[k]));
  const Matrix prec = symmetrize(C_inv + st.counts[k] * omega_inv);
  const Matrix cov = inverse_from_cholesky(cholesky_lower_nocheck(prec));
  const Vector rhs = C_inv * prior.m[k] + omega_inv * st.sums[k];
  return MvnParams{cov * rhs, cov};
}

IgParams omega_diag_full_conditional(const GibbsState& s, const PriorSpec& prior, int l) {
  double ss = 0.0;
  int n0 = 0;
  for (Eigen::Index i = 0; i < s.mixture.X.rows(); ++i) {
    if (s.mixture.z[i] == 0) {
      const double d = s.mixture.X(i, l) - s.mixture.mu[0][l];
      ss += d * d;
      ++n0;
    }
  }
  return IgParams{0.5 * (n0 + prior.n_omega[l]),
                  0.5 * (ss + prior.n_omega[l] * prior.s2_omega[l])};
}

IwParams omega_full_conditional(const GibbsState& s, const PriorSpec& prior, int k) {
  if (k < 1) throw ConfigError("omega_full_conditional: cluster 0 uses the diagonal form");
  const Eigen::Index F = s.mixture.X.cols();
  Matrix scatter = Matrix::Zero(F, F);
  int nk = 0;
  for (Eigen::Index i = 0; i < s.mixture.X.rows(); ++i) {
    if (s.mixture.z[i] == k) {
      const Vector d = s.mixture.X.row(i).transpose() - s.mixture.mu[k];
      scatter += d * d.transpose();
      ++nk;
    }
  }
  return IwParams{nk + prior.nu, symmetrize(scatter) + prior.psi[k - 1].mat()};
}

MvnParams loadings_row_full_conditional(const GibbsState& s, const Dataset& data, int r) {
  const int R = static_cast<int>(s.loadings.B.rows());
  const int F = static_cast<int>(s.loadings.B.cols());
  if (r < 1 || r >= R) throw ConfigError("loadings row: r must be in [1, R)");
  const int free = LoadingsState::free_count(r, F);
  const Matrix& X = s.mixture.X;
  const double inv_s2 = 1.0 / s.noise.sigma2[r];
  const Matrix Xf = X.leftCols(free);
  Vector rhs;
  if (r >= F) {
    rhs = inv_s2 * (Xf.transpose() * data.Y.col(r));
  } else {
    rhs = inv_s2 * (Xf.transpose() * (data.Y.col(r) - X.col(r)));
  }
  Matrix prec = inv_s2 * (Xf.transpose() * Xf).eval();
  for (int l = 0; l < free; ++l) prec(l, l) += 1.0 / s.loadings.tau[l];
  const Matrix cov = inverse_from_cholesky(cholesky_lower_nocheck(symmetrize(prec)));
  return MvnParams{cov * rhs, cov};
}

IgParams sigma2_full_conditional(const GibbsState& s, const Dataset& data,
                                 const PriorSpec& prior, int r) {
  const Vector resid = data.Y.col(r) - s.mixture.X * s.loadings.B.row(r).transpose();
  return IgParams{0.5 * (data.n() + prior.n_sigma),
                  0.5 * (prior.n_sigma * prior.s2_sigma + resid.squaredNorm())};
}

IgParams tau_full_conditional(const GibbsState& s, const PriorSpec& prior, int l) {
  const int R = static_cast<int>(s.loadings.B.rows());
  double ss = 0.0;
  for (int r = l + 1; r < R; ++r) ss += s.loadings.B(r, l) * s.loadings.B(r, l);
  return IgParams{0.5 * (R - l - 1 + prior.n_tau), 0.5 * (ss + prior.n_tau * prior.s2_tau)};
}

CategoricalParams assignment_full_conditional(const GibbsState& s, int i) {
  const int K = s.mixture.K();
  Vector lw(K);
  for (int k = 0; k < K; ++k) {
    const Matrix L = cholesky_lower(s.mixture.omega[k]);
    double logdet = 0.0;
    for (Eigen::Index j = 0; j < L.rows(); ++j) logdet += 2.0 * std::log(L(j, j));
    Vector d = s.mixture.X.row(i).transpose() - s.mixture.mu[k];
    L.triangularView<Eigen::Lower>().solveInPlace(d);
    lw[k] = std::log(s.mixture.p[k]) - 0.5 * logdet - 0.5 * d.squaredNorm();
  }
  return CategoricalParams{lw};
}

DirichletParams weights_full_conditional(const GibbsState& s, const PriorSpec& prior) {
  const ClusterStats st = cluster_stats(s);
  Vector alpha(s.mixture.K());
  for (int k = 0; k < s.mixture.K(); ++k) alpha[k] = st.counts[k] + prior.alpha[k];
  return DirichletParams{alpha};
}

double log_joint(const GibbsState& s, const Dataset& data, const PriorSpec& prior) {
  s.validate();
  prior.validate(static_cast<int>(s.loadings.B.cols()));
  const int n = data.n();
  const int R = data.R();
  const int F = static_cast<int>(s.loadings.B.cols());
  const int K = s.mixture.K();

  double lj = 0.0;

  // Observation model: y_i ~ N(B x_i, V), V diagonal.
  const Matrix E = data.Y - s.mixture.X * s.loadings.B.transpose();
  for (int r = 0; r < R; ++r) {
    const double s2 = s.noise.sigma2[r];
    lj += -0.5 * n * (kLog2Pi + std::log(s2)) - 0.5 * E.col(r).squaredNorm() / s2;
  }

  // Mixture model for the factors and assignments.
  std::vector<Matrix> chols;
  std::vector<double> logdets(K);
  chols.reserve(K);
  for (int k = 0; k < K; ++k) {
    chols.push_back(cholesky_lower(s.mixture.omega[k]));
    double ld = 0.0;
    for (int j = 0; j < F; ++j) ld += 2.0 * std::log(chols[k](j, j));
    logdets[k] = ld;
  }
  for (int i = 0; i < n; ++i) {
    const int k = s.mixture.z[i];
    Vector d = s.mixture.X.row(i).transpose() - s.mixture.mu[k];
    chols[k].triangularView<Eigen::Lower>().solveInPlace(d);
    lj += std::log(s.mixture.p[k]) - 0.5 * (F * kLog2Pi + logdets[k] + d.squaredNorm());
  }

  // Priors: free loadings, their column variances, noise variances.
  for (int r = 1; r < R; ++r) {
    const int free = LoadingsState::free_count(r, F);
    for (int l = 0; l < free; ++l) {
      lj += normal_logpdf(s.loadings.B(r, l), 0.0, s.loadings.tau[l]);
    }
  }
  for (int l = 0; l < F; ++l) {
    lj += inverse_gamma_logpdf(s.loadings.tau[l], 0.5 * prior.n_tau,
                               0.5 * prior.n_tau * prior.s2_tau);
  }
  for (int r = 0; r < R; ++r) {
    lj += inverse_gamma_logpdf(s.noise.sigma2[r], 0.5 * prior.n_sigma,
                               0.5 * prior.n_sigma * prior.s2_sigma);
  }

  // Priors: cluster means, covariances, weights.
  for (int k = 0; k < K; ++k) lj += mvn_logpdf(s.mixture.mu[k], prior.m[k], prior.C[k]);
  for (int l = 0; l < F; ++l) {
    lj += inverse_gamma_logpdf(s.mixture.omega[0](l, l), 0.5 * prior.n_omega[l],
                               0.5 * prior.n_omega[l] * prior.s2_omega[l]);
  }
  for (int k = 1; k < K; ++k) {
    lj += inverse_wishart_logpdf(s.mixture.omega[k], prior.nu, prior.psi[k - 1]);
  }
  lj += dirichlet_logpdf(s.mixture.p, prior.alpha);
  return lj;
}

}  // namespace bcfm
