#pragma once

#include "bcfm/types.hpp"

namespace bcfm {

struct FactorAnalysisResult {
  Matrix B_hat;  // R x F preliminary loadings, raw-data scale
  Vector V_hat;  // R idiosyncratic variance estimates, raw-data scale
};

// Preliminary factor analysis by iterated principal-axis factoring of the
// sample correlation matrix: starting from squared-multiple-correlation
// communalities, repeatedly eigendecompose the reduced correlation matrix,
// take loadings = eigenvectors * sqrt(eigenvalues) for the top F components,
// and update communalities until they move less than 1e-6 (at most 200
// sweeps).  Loadings and residual variances are then rescaled by the sample
// standard deviations so they live on the raw data scale.
FactorAnalysisResult preliminary_factor_analysis(const Dataset& data, int F);

struct RotationResult {
  Matrix B_star;  // B_hat * M, leading F x F block = identity
  Matrix M;       // F x F rotation
};

// M = inverse of the leading F x F block of B_hat; fails with an actionable
// message (reorder the variables) when that block is near-singular.
RotationResult rotate_to_constraint(const Matrix& B_hat);

// GLS factor scores: row i solves (B*' V^-1 B*) x = B*' V^-1 y_i.
Matrix estimate_factors(const Matrix& B_star, const Vector& V_hat, const Dataset& data);

// Sample correlation matrix of the data columns; throws on constant columns.
Matrix correlation_matrix(const Dataset& data);

}  // namespace bcfm
