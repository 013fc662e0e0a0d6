#include "bcfm/samplers.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bcfm/errors.hpp"

namespace bcfm {
namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kLogPi = 1.1447298858494001741434273513531;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string(name) + " must be positive and finite, got " +
                      std::to_string(v));
  }
}

}  // namespace

Vector sample_mvn_chol(const Vector& mean, const Matrix& chol_lower, RngStream& rng) {
  const Eigen::Index p = mean.size();
  Vector z(p);
  for (Eigen::Index i = 0; i < p; ++i) z[i] = rng.next_normal();
  return mean + chol_lower.triangularView<Eigen::Lower>() * z;
}

Vector sample_mvn(const Vector& mean, const SpdMatrix& cov, RngStream& rng) {
  if (mean.size() != cov.dim()) throw DataError("sample_mvn: dimension mismatch");
  return sample_mvn_chol(mean, cholesky_lower(cov), rng);
}

Vector sample_mvn_precision_chol(const Vector& mean, const Matrix& prec_chol_lower,
                                 RngStream& rng) {
  // If P = L L', then mean + L^{-T} z has covariance L^{-T} L^{-1} = P^{-1}.
  const Eigen::Index p = mean.size();
  Vector z(p);
  for (Eigen::Index i = 0; i < p; ++i) z[i] = rng.next_normal();
  prec_chol_lower.transpose().triangularView<Eigen::Upper>().solveInPlace(z);
  return mean + z;
}

double sample_gamma(double shape, RngStream& rng) {
  require_positive(shape, "gamma shape");
  if (shape < 1.0) {
    // Boost: if G ~ Gamma(shape+1) and U ~ U(0,1], then G * U^{1/shape} ~ Gamma(shape).
    const double u = rng.next_open_uniform();
    return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = rng.next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.next_open_uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_inverse_gamma(double shape, double scale, RngStream& rng) {
  require_positive(shape, "inverse gamma shape");
  require_positive(scale, "inverse gamma scale");
  return scale / sample_gamma(shape, rng);
}

SpdMatrix sample_inverse_wishart(double df, const SpdMatrix& scale, RngStream& rng) {
  const int d = scale.dim();
  if (!(df > d - 1)) {
    throw ConfigError("inverse wishart: df must exceed dim - 1, got df=" +
                      std::to_string(df) + ", dim=" + std::to_string(d));
  }
  const Matrix L = cholesky_lower(scale);
  // Bartlett factor of a Wishart(df, I) draw: lower triangular, chi on the
  // diagonal, standard normals below, generated column by column.
  Matrix A = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    A(j, j) = std::sqrt(2.0 * sample_gamma(0.5 * (df - j), rng));
    for (int i = j + 1; i < d; ++i) A(i, j) = rng.next_normal();
  }
  // With W = A A' ~ Wishart(df, I):  L W^{-1} L' = Z' Z ~ IW(df, L L') where
  // Z = A^{-1} L'.
  Matrix Z = L.transpose();
  A.triangularView<Eigen::Lower>().solveInPlace(Z);
  return SpdMatrix(symmetrize(Z.transpose() * Z));
}

Vector sample_dirichlet(const Vector& alphas, RngStream& rng) {
  const Eigen::Index k = alphas.size();
  if (k == 0) throw ConfigError("dirichlet: empty concentration vector");
  Vector g(k);
  double total = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    require_positive(alphas[i], "dirichlet concentration");
    g[i] = sample_gamma(alphas[i], rng);
    total += g[i];
  }
  if (!(total > 0.0)) throw NumericalError("dirichlet: gamma draws summed to zero");
  return g / total;
}

int sample_categorical(const Vector& log_weights, RngStream& rng) {
  const Eigen::Index k = log_weights.size();
  if (k == 0) throw ConfigError("categorical: empty weight vector");
  double max_lw = -kInf;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (std::isnan(log_weights[i])) throw NumericalError("categorical: NaN log weight");
    if (log_weights[i] > max_lw) max_lw = log_weights[i];
  }
  if (max_lw == -kInf) {
    throw NumericalError("categorical: all log weights are -inf");
  }
  double total = 0.0;
  Vector w(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    w[i] = std::exp(log_weights[i] - max_lw);
    total += w[i];
  }
  const double u = rng.next_uniform() * total;
  double cum = 0.0;
  int last_positive = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (w[i] > 0.0) last_positive = static_cast<int>(i);
    cum += w[i];
    if (u < cum) return static_cast<int>(i);
  }
  return last_positive;  // u landed on the rounding sliver past the last bin
}

double normal_logpdf(double x, double mean, double var) {
  require_positive(var, "normal variance");
  const double z = x - mean;
  return -0.5 * (kLog2Pi + std::log(var)) - 0.5 * z * z / var;
}

double inverse_gamma_logpdf(double x, double shape, double scale) {
  require_positive(shape, "inverse gamma shape");
  require_positive(scale, "inverse gamma scale");
  if (!(x > 0.0)) return -kInf;
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) -
         scale / x;
}

double log_multivariate_gamma(int dim, double a) {
  if (dim < 1) throw ConfigError("multivariate gamma: dim must be >= 1");
  double out = 0.25 * dim * (dim - 1) * kLogPi;
  for (int j = 1; j <= dim; ++j) out += std::lgamma(a + 0.5 * (1.0 - j));
  return out;
}

double inverse_wishart_logpdf(const SpdMatrix& x, double df, const SpdMatrix& scale) {
  const int d = scale.dim();
  if (x.dim() != d) throw DataError("inverse wishart logpdf: dimension mismatch");
  if (!(df > d - 1)) throw ConfigError("inverse wishart logpdf: df too small");
  const Matrix Lx = cholesky_lower(x);
  const Matrix Ls = cholesky_lower(scale);
  double logdet_x = 0.0;
  double logdet_s = 0.0;
  for (int i = 0; i < d; ++i) {
    logdet_x += 2.0 * std::log(Lx(i, i));
    logdet_s += 2.0 * std::log(Ls(i, i));
  }
  // tr(scale * x^{-1}) = || Lx^{-1} Ls ||_F^2
  Matrix T = Ls;
  Lx.triangularView<Eigen::Lower>().solveInPlace(T);
  const double trace_term = T.squaredNorm();
  return 0.5 * df * logdet_s - 0.5 * df * d * std::log(2.0) -
         log_multivariate_gamma(d, 0.5 * df) -
         0.5 * (df + d + 1.0) * logdet_x - 0.5 * trace_term;
}

double dirichlet_logpdf(const Vector& p, const Vector& alphas) {
  if (p.size() != alphas.size()) throw DataError("dirichlet logpdf: size mismatch");
  double out = 0.0;
  double alpha_sum = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    require_positive(alphas[i], "dirichlet concentration");
    if (!(p[i] > 0.0)) return -kInf;
    out += (alphas[i] - 1.0) * std::log(p[i]);
    out -= std::lgamma(alphas[i]);
    alpha_sum += alphas[i];
  }
  return out + std::lgamma(alpha_sum);
}

}  // namespace bcfm
