#pragma once

#include "bcfm/linalg.hpp"
#include "bcfm/rng.hpp"

namespace bcfm {

// ---- draws ----------------------------------------------------------------

// N(mean, cov).
Vector sample_mvn(const Vector& mean, const SpdMatrix& cov, RngStream& rng);
// N(mean, G G') given the lower Cholesky factor G of the covariance.
Vector sample_mvn_chol(const Vector& mean, const Matrix& chol_lower, RngStream& rng);
// N(mean, P^{-1}) given the lower Cholesky factor of the *precision* P.
Vector sample_mvn_precision_chol(const Vector& mean, const Matrix& prec_chol_lower,
                                 RngStream& rng);

// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 handled by boosting.
double sample_gamma(double shape, RngStream& rng);

// Inverse gamma with density proportional to x^{-shape-1} exp(-scale/x);
// mean scale/(shape-1) for shape > 1.
double sample_inverse_gamma(double shape, double scale, RngStream& rng);

// Inverse Wishart IW(df, scale): density proportional to
// |X|^{-(df+d+1)/2} exp(-tr(scale X^{-1})/2); mean scale/(df-d-1) for df > d+1.
// Requires df > d - 1.  Drawn by the Bartlett decomposition.
SpdMatrix sample_inverse_wishart(double df, const SpdMatrix& scale, RngStream& rng);

// Dirichlet(alphas) on the simplex; alphas must be positive.
Vector sample_dirichlet(const Vector& alphas, RngStream& rng);

// Draws an index in [0, K) from unnormalized log weights.  Weights are
// max-shifted before exponentiation, so any finite magnitudes are safe;
// entries of -inf mean "impossible".  Throws if no weight is usable.
int sample_categorical(const Vector& log_weights, RngStream& rng);

// ---- log densities (used by the joint density and by tests) ---------------

double normal_logpdf(double x, double mean, double var);
double inverse_gamma_logpdf(double x, double shape, double scale);
double inverse_wishart_logpdf(const SpdMatrix& x, double df, const SpdMatrix& scale);
double dirichlet_logpdf(const Vector& p, const Vector& alphas);

// log of the multivariate gamma function Gamma_d(a).
double log_multivariate_gamma(int dim, double a);

}  // namespace bcfm
