#include <cmath>
#include <string>

#include "bcfm/errors.hpp"
#include "bcfm/simulate.hpp"

namespace bcfm {
namespace {

// Sub-seed tags for the independent component draws.
constexpr std::uint64_t kAssignTag = 0xD1;
constexpr std::uint64_t kFactorTag = 0xD2;
constexpr std::uint64_t kLoadingsTag = 0xD3;
constexpr std::uint64_t kNoiseTag = 0xD4;

Matrix compound_symmetric(int dim, double diag, double off) {
  Matrix m = Matrix::Constant(dim, dim, off);
  m.diagonal().setConstant(diag);
  return m;
}

int draw_label(const Vector& p, RngStream& rng) {
  const double u = rng.next_uniform() * p.sum();
  double cum = 0.0;
  for (int k = 0; k < p.size(); ++k) {
    cum += p[k];
    if (u < cum) return k;
  }
  return static_cast<int>(p.size()) - 1;
}

}  // namespace

void SimSpec::validate() const {
  if (n < 2 || R < 2 || K < 1 || F < 1) throw ConfigError("simulation: n, R, K, F too small");
  if (F > R) throw ConfigError("simulation: F must not exceed R");
  if (K > n) throw ConfigError("simulation: K must not exceed n");
  if (static_cast<int>(p_true.size()) != K || !(p_true.minCoeff() > 0.0) ||
      std::abs(p_true.sum() - 1.0) > 1e-12)
    throw ConfigError("simulation: cluster probabilities must be positive and sum to 1");
  if (static_cast<int>(mu_true.rows()) != K || static_cast<int>(mu_true.cols()) != F ||
      !mu_true.allFinite())
    throw ConfigError("simulation: mean matrix must be K x F and finite");
  if (static_cast<int>(omega_true.size()) != K)
    throw ConfigError("simulation: one factor covariance per cluster required");
  for (int k = 0; k < K; ++k)
    if (omega_true[k].dim() != F)
      throw ConfigError("simulation: factor covariance " + std::to_string(k + 1) +
                        " has the wrong dimension");
  for (int i = 0; i < F; ++i)
    for (int j = 0; j < F; ++j)
      if (i != j && omega_true[0](i, j) != 0.0)
        throw ConfigError("simulation: the first cluster's covariance must be diagonal");
  if (static_cast<int>(tau_true.size()) != F || !(tau_true.minCoeff() > 0.0))
    throw ConfigError("simulation: loading variances must be F positive values");
  if (static_cast<int>(sigma2_true.size()) != R || !(sigma2_true.minCoeff() > 0.0))
    throw ConfigError("simulation: idiosyncratic variances must be R positive values");
  if (!(separation > 0.0) || !std::isfinite(separation))
    throw ConfigError("simulation: separation must be positive");
}

SimSpec SimSpec::benchmark(double separation) {
  SimSpec spec;
  spec.n = 1000;
  spec.R = 20;
  spec.K = 4;
  spec.F = 3;
  spec.p_true = Vector(4);
  spec.p_true << 0.45, 0.30, 0.15, 0.10;
  spec.mu_true = Matrix(4, 3);
  spec.mu_true << 1.0, -1.0, 0.0,  //
      -3.0, -8.0, 5.0,             //
      -7.5, 5.0, 2.0,              //
      -15.0, -3.5, 10.5;
  Vector d1(3);
  d1 << 2.0, 1.0, 1.5;
  spec.omega_true.push_back(SpdMatrix::diagonal(d1));
  spec.omega_true.emplace_back(compound_symmetric(3, 2.0, 0.4));
  spec.omega_true.emplace_back(compound_symmetric(3, 3.0, 0.3));
  spec.omega_true.emplace_back(compound_symmetric(3, 4.0, 1.0));
  spec.tau_true = Vector(3);
  spec.tau_true << 0.05, 0.10, 0.15;
  spec.sigma2_true = Vector::Constant(20, 0.1);
  spec.separation = separation;
  return spec;
}

SimulatedData generate_dataset(const SimSpec& spec) {
  spec.validate();
  const int n = spec.n, R = spec.R, K = spec.K, F = spec.F;

  GroundTruth truth;
  truth.mu = spec.separation * spec.mu_true;
  truth.omega.reserve(K);
  for (const SpdMatrix& om : spec.omega_true) truth.omega.push_back(om.mat());
  truth.p = spec.p_true;
  truth.tau = spec.tau_true;
  truth.sigma2 = spec.sigma2_true;

  {
    RngStream rng(derive_seed(spec.seed, kAssignTag), 0);
    truth.z.resize(n);
    for (int i = 0; i < n; ++i) truth.z[i] = draw_label(spec.p_true, rng);
  }

  {
    RngStream rng(derive_seed(spec.seed, kFactorTag), 0);
    std::vector<Matrix> chols;
    chols.reserve(K);
    for (int k = 0; k < K; ++k) chols.push_back(cholesky_lower(spec.omega_true[k]));
    truth.X = Matrix(n, F);
    Vector zvec(F);
    for (int i = 0; i < n; ++i) {
      for (int f = 0; f < F; ++f) zvec[f] = rng.next_normal();
      truth.X.row(i) =
          (truth.mu.row(truth.z[i]).transpose() + chols[truth.z[i]] * zvec).transpose();
    }
  }

  {
    RngStream rng(derive_seed(spec.seed, kLoadingsTag), 0);
    truth.B = Matrix::Zero(R, F);
    for (int r = 0; r < R; ++r) {
      const int free = LoadingsState::free_count(r, F);
      for (int l = 0; l < free; ++l)
        truth.B(r, l) = std::sqrt(spec.tau_true[l]) * rng.next_normal();
      if (r < F) truth.B(r, r) = 1.0;
    }
  }

  Matrix Y = truth.X * truth.B.transpose();
  {
    RngStream rng(derive_seed(spec.seed, kNoiseTag), 0);
    Vector sd = spec.sigma2_true.cwiseSqrt();
    for (int i = 0; i < n; ++i)
      for (int r = 0; r < R; ++r) Y(i, r) += sd[r] * rng.next_normal();
  }

  SimulatedData out{Dataset::create(std::move(Y), {}), std::move(truth)};
  return out;
}

}  // namespace bcfm
