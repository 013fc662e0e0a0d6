#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "bcfm/gibbs.hpp"

namespace bcfm {
namespace {

constexpr int kBlocks = 8;
const char* const kBlockNames[kBlocks] = {
    "factors",  "cluster_means",           "cluster_covariances", "loadings",
    "variances", "loadings_prior_variances", "assignments",         "weights"};

void run_block(GibbsState& s, const Dataset& data, const PriorSpec& prior, int block,
               RngStream& rng) {
  switch (block) {
    case 0: update_factors(s, data, rng); break;
    case 1: update_cluster_means(s, prior, rng); break;
    case 2: update_cluster_covariances(s, prior, rng); break;
    case 3: update_loadings(s, data, rng); break;
    case 4: update_idiosyncratic_variances(s, data, prior, rng); break;
    case 5: update_tau(s, prior, rng); break;
    case 6: update_assignments(s, rng); break;
    default: update_weights(s, prior, rng); break;
  }
}

// Per-entry reduction over draws; get(d, i, j) reads entry (i, j) of draw d.
template <typename Get>
FamilySummary summarize_entries(int rows, int cols, std::size_t n_draws, Get get) {
  FamilySummary f{Matrix(rows, cols), Matrix(rows, cols), Matrix(rows, cols)};
  std::vector<double> values(n_draws);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      double sum = 0.0;
      for (std::size_t d = 0; d < n_draws; ++d) {
        values[d] = get(d, i, j);
        sum += values[d];
      }
      f.mean(i, j) = sum / static_cast<double>(n_draws);
      f.q025(i, j) = quantile_type7(values, 0.025);
      f.q975(i, j) = quantile_type7(values, 0.975);
    }
  }
  return f;
}

}  // namespace

GibbsState initial_state(const Elicitation& elicitation, const Dataset& data,
                         const ModelDims& dims) {
  dims.validate(data.n(), data.R());
  const PriorSpec& prior = elicitation.prior;
  const ElicitationArtifacts& art = elicitation.artifacts;
  if (prior.K() != dims.K)
    throw ConfigError("initial state: prior has " + std::to_string(prior.K()) +
                      " clusters but the model has " + std::to_string(dims.K));
  if (art.X_tilde.rows() != data.n() || art.X_tilde.cols() != dims.F)
    throw ConfigError("initial state: factor estimates do not match the data/model shape");
  if (art.B_tilde.rows() != data.R() || art.B_tilde.cols() != dims.F)
    throw ConfigError("initial state: loadings do not match the data/model shape");

  const int F = dims.F;
  GibbsState s;
  s.loadings.B = art.B_tilde;
  s.loadings.tau = Vector::Ones(F);

  s.mixture.mu = prior.m;
  Vector d0(F);
  for (int l = 0; l < F; ++l) {
    // Prior mean when it exists (strength > 2), otherwise the prior scale.
    d0[l] = prior.n_omega[l] > 2.0
                ? prior.n_omega[l] * prior.s2_omega[l] / (prior.n_omega[l] - 2.0)
                : prior.s2_omega[l];
  }
  s.mixture.omega.clear();
  s.mixture.omega.reserve(dims.K);
  s.mixture.omega.push_back(SpdMatrix::diagonal(d0));
  const double iw_denom = prior.nu - F - 1;
  for (int k = 1; k < dims.K; ++k) {
    Matrix om = prior.psi[k - 1].mat();
    if (iw_denom > 0.0) om /= iw_denom;
    s.mixture.omega.emplace_back(symmetrize(om));
  }

  s.mixture.z = art.km_labels;
  Vector weights(dims.K);
  weights.setZero();
  for (int zi : s.mixture.z) weights[zi] += 1.0;
  weights += prior.alpha;
  s.mixture.p = weights / weights.sum();
  s.mixture.X = art.X_tilde;

  s.noise.sigma2 = Vector::Constant(data.R(), 0.5);
  s.validate();
  return s;
}

ChainOutput run_chain(const Dataset& data, const ModelDims& dims, const PriorSpec& prior,
                      const GibbsState& init, const ChainConfig& config) {
  config.validate();
  dims.validate(data.n(), data.R());
  prior.validate(dims.F);
  init.validate();
  if (init.mixture.K() != dims.K || init.loadings.B.cols() != dims.F ||
      init.loadings.B.rows() != data.R() || init.mixture.X.rows() != data.n())
    throw ConfigError("chain: initial state does not match the data/model shape");
  if (prior.K() != dims.K)
    throw ConfigError("chain: prior does not match the model's cluster count");

  const int n = data.n();
  const long kept = config.kept();
  ChainOutput out;
  out.dims = dims;
  out.n = n;
  out.config = config;
  out.draws.reserve(static_cast<std::size_t>(kept));
  Matrix z_counts = Matrix::Zero(n, dims.K);
  Matrix x_sum = Matrix::Zero(n, dims.F);

  GibbsState s = init;
  GibbsState checkpoint = init;  // last state that passed validation
  for (long it = 1; it <= config.iterations; ++it) {
    int block = 0;
    try {
      for (; block < kBlocks; ++block) {
        RngStream rng(config.seed,
                      static_cast<std::uint64_t>(it - 1) * kBlocks +
                          static_cast<std::uint64_t>(block));
        run_block(s, data, prior, block, rng);
      }
    } catch (const std::exception& ex) {
      throw ChainError(ex.what(), it, kBlockNames[block], checkpoint);
    }

    if (it % config.thin != 0) continue;
    try {
      s.validate();
    } catch (const std::exception& ex) {
      throw ChainError(ex.what(), it, "invariant_check", checkpoint);
    }
    checkpoint = s;

    const long retained_index = it / config.thin;
    if (retained_index <= config.burnin_draws) continue;

    ParameterDraw draw;
    draw.B = s.loadings.B;
    draw.tau = s.loadings.tau;
    draw.sigma2 = s.noise.sigma2;
    draw.mu = Matrix(dims.K, dims.F);
    for (int k = 0; k < dims.K; ++k) draw.mu.row(k) = s.mixture.mu[k].transpose();
    draw.omega.reserve(dims.K);
    for (int k = 0; k < dims.K; ++k) draw.omega.push_back(s.mixture.omega[k].mat());
    draw.p = s.mixture.p;
    draw.log_joint = log_joint(s, data, prior);
    out.draws.push_back(std::move(draw));

    for (int i = 0; i < n; ++i) z_counts(i, s.mixture.z[i]) += 1.0;
    x_sum += s.mixture.X;
  }

  out.summaries = summarize_draws(out.draws);
  out.assign_prob = assignment_probabilities(z_counts);
  out.map_labels = modal_labels(out.assign_prob);
  out.X_mean = x_sum / static_cast<double>(kept);
  return out;
}

ChainSummaries summarize_draws(const std::vector<ParameterDraw>& draws) {
  if (draws.empty()) throw Error("cannot summarize an empty set of draws");
  const std::size_t D = draws.size();
  const ParameterDraw& first = draws.front();
  const int R = static_cast<int>(first.B.rows());
  const int F = static_cast<int>(first.B.cols());
  const int K = static_cast<int>(first.p.size());

  ChainSummaries sum;
  sum.B = summarize_entries(R, F, D, [&](std::size_t d, int i, int j) { return draws[d].B(i, j); });
  sum.tau =
      summarize_entries(F, 1, D, [&](std::size_t d, int i, int) { return draws[d].tau[i]; });
  sum.sigma2 =
      summarize_entries(R, 1, D, [&](std::size_t d, int i, int) { return draws[d].sigma2[i]; });
  sum.mu =
      summarize_entries(K, F, D, [&](std::size_t d, int i, int j) { return draws[d].mu(i, j); });
  sum.omega.reserve(K);
  for (int k = 0; k < K; ++k) {
    sum.omega.push_back(summarize_entries(
        F, F, D, [&](std::size_t d, int i, int j) { return draws[d].omega[k](i, j); }));
  }
  sum.p = summarize_entries(K, 1, D, [&](std::size_t d, int i, int) { return draws[d].p[i]; });
  sum.log_joint =
      summarize_entries(1, 1, D, [&](std::size_t d, int, int) { return draws[d].log_joint; });
  return sum;
}

Matrix assignment_probabilities(const Matrix& z_counts) {
  const int n = static_cast<int>(z_counts.rows());
  const int K = static_cast<int>(z_counts.cols());
  Matrix prob(n, K);
  for (int i = 0; i < n; ++i) {
    const double total = z_counts.row(i).sum();
    if (!(total > 0.0)) throw Error("assignment counts: row " + std::to_string(i) + " is empty");
    for (int k = 0; k < K; ++k) prob(i, k) = z_counts(i, k) / total;

    // Pin the last entry to 1 - s, where s is the left-to-right sum of the
    // leading entries.  With s <= 2 the subtraction is exact (Sterbenz) or its
    // rounding error is below half an ulp of 1, so the row then sums to 1.0
    // under plain left-to-right double addition.  If 1 - s would be negative
    // (possible only when the last count is zero and rounding pushed s above
    // one), shave one ulp off the largest leading entry and retry.
    bool exact = false;
    for (int attempt = 0; attempt < 4096 && !exact; ++attempt) {
      double s = 0.0;
      for (int k = 0; k + 1 < K; ++k) s += prob(i, k);
      const double last = 1.0 - s;
      if (last >= 0.0) {
        prob(i, K - 1) = last;
        double sum = 0.0;
        for (int k = 0; k < K; ++k) sum += prob(i, k);
        exact = sum == 1.0;
        if (exact) break;
      }
      int arg = 0;
      for (int k = 1; k + 1 < K; ++k)
        if (prob(i, k) > prob(i, arg)) arg = k;
      prob(i, arg) = std::nextafter(prob(i, arg), 0.0);
    }
    if (!exact)
      throw NumericalError("assignment probabilities: row " + std::to_string(i) +
                           " could not be normalized exactly");
  }
  return prob;
}

std::vector<int> modal_labels(const Matrix& assign_prob) {
  std::vector<int> labels(static_cast<std::size_t>(assign_prob.rows()));
  for (Eigen::Index i = 0; i < assign_prob.rows(); ++i) {
    int arg = 0;
    for (int k = 1; k < assign_prob.cols(); ++k)
      if (assign_prob(i, k) > assign_prob(i, arg)) arg = k;
    labels[static_cast<std::size_t>(i)] = arg;
  }
  return labels;
}

double quantile_type7(std::vector<double> values, double prob) {
  if (values.empty()) throw Error("quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw Error("quantile probability must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace bcfm
