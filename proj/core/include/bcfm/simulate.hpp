#pragma once

#include <cstdint>
#include <vector>

#include "bcfm/rng.hpp"
#include "bcfm/types.hpp"

namespace bcfm {

// Generating process for synthetic data: z_i ~ p, x_i | z_i ~ N(s * mu_k,
// Omega_k), free loadings ~ N(0, tau_l) once per dataset, y_i = B x_i + v_i
// with v_i ~ N(0, diag(sigma2)).  mu_true holds unscaled base vectors; the
// separation s scales them, moving the clusters apart without changing
// anything else.
struct SimSpec {
  int n = 0;
  int R = 0;
  int K = 0;
  int F = 0;
  Vector p_true;                      // K cluster probabilities
  Matrix mu_true;                     // K x F base mean vectors (row k)
  std::vector<SpdMatrix> omega_true;  // K factor covariances; [0] diagonal
  Vector tau_true;                    // F loading variances
  Vector sigma2_true;                 // R idiosyncratic variances
  double separation = 1.0;
  std::uint64_t seed = 0;

  void validate() const;

  // The 4-cluster / 3-factor / 20-variable benchmark design at separation s:
  // p = (0.45, 0.30, 0.15, 0.10); base means (1,-1,0), (-3,-8,5), (-7.5,5,2),
  // (-15,-3.5,10.5); Omega_1 = diag(2,1,1.5) and compound-symmetric
  // Omega_2..4 with (diag, off) = (2,0.4), (3,0.3), (4,1.0); tau =
  // (0.05,0.10,0.15); sigma2_r = 0.1.
  static SimSpec benchmark(double separation);
};

// Everything the generator knows that an analyst would not.
struct GroundTruth {
  std::vector<int> z;  // n true labels in [0, K)
  Matrix X;            // n x F true factors
  Matrix B;            // R x F true loadings (constraint held exactly)
  Matrix mu;           // K x F scaled means, row k = separation * base_k
  std::vector<Matrix> omega;
  Vector p;
  Vector tau;
  Vector sigma2;
};

struct SimulatedData {
  Dataset data;
  GroundTruth truth;
};

// Deterministic in spec.seed.  Components draw on disjoint sub-seeds in the
// fixed order z, X, B, noise, so e.g. changing n leaves B unchanged.
SimulatedData generate_dataset(const SimSpec& spec);

}  // namespace bcfm
