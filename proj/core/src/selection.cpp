#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bcfm/selection.hpp"

namespace bcfm {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tags separating the seed spaces of the pipeline stages under one model.
constexpr std::uint64_t kElicitationTag = 1;
constexpr std::uint64_t kChainTag = 2;

void forward_solve(const Matrix& L, Vector& v) {
  const int d = static_cast<int>(v.size());
  for (int j = 0; j < d; ++j) {
    v[j] /= L(j, j);
    const double vj = v[j];
    for (int i = j + 1; i < d; ++i) v[i] -= L(i, j) * vj;
  }
}

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

}  // namespace

void PosteriorPointEstimate::validate() const {
  const int R = static_cast<int>(B_hat.rows());
  const int F = static_cast<int>(B_hat.cols());
  const int k = K();
  if (F < 1 || R < F) throw ConfigError("point estimate: loadings shape invalid");
  for (int r = 0; r < F; ++r) {
    if (B_hat(r, r) != 1.0)
      throw ConfigError("point estimate: loadings diagonal entry " + std::to_string(r + 1) +
                        " is not exactly 1");
    for (int c = r + 1; c < F; ++c)
      if (B_hat(r, c) != 0.0)
        throw ConfigError("point estimate: loadings entry above the diagonal is not exactly 0");
  }
  if (!B_hat.allFinite()) throw ConfigError("point estimate: non-finite loading");
  if (static_cast<int>(mu_hat.rows()) != k || static_cast<int>(mu_hat.cols()) != F ||
      static_cast<int>(Omega_hat.size()) != k)
    throw ConfigError("point estimate: cluster parameter shapes disagree");
  for (const SpdMatrix& om : Omega_hat)
    if (om.dim() != F) throw ConfigError("point estimate: covariance dimension mismatch");
  if (static_cast<int>(v_hat.size()) != R || !(v_hat.minCoeff() > 0.0) || !v_hat.allFinite())
    throw ConfigError("point estimate: idiosyncratic variances must be positive");
  if (k < 1 || !(p_hat.minCoeff() > 0.0) || std::abs(p_hat.sum() - 1.0) > 1e-12)
    throw ConfigError("point estimate: weights must be positive and sum to 1");
}

PosteriorPointEstimate point_estimate(const ChainOutput& chain) {
  const ChainSummaries& s = chain.summaries;
  PosteriorPointEstimate est;
  est.B_hat = s.B.mean;
  est.mu_hat = s.mu.mean;
  est.Omega_hat.reserve(s.omega.size());
  for (const FamilySummary& om : s.omega) est.Omega_hat.emplace_back(symmetrize(om.mean));
  est.v_hat = s.sigma2.mean.col(0);
  const Vector p = s.p.mean.col(0);
  est.p_hat = p / p.sum();
  est.validate();
  return est;
}

double parameter_count(int K, int F, int R) {
  return 0.5 * (K - 2) * (F + 1) + static_cast<double>((R + K) * (F + 1)) + (F - 1);
}

double integrated_loglik(const Dataset& data, const PosteriorPointEstimate& est) {
  est.validate();
  const int n = data.n();
  const int R = data.R();
  const int K = est.K();
  if (static_cast<int>(est.B_hat.rows()) != R)
    throw ConfigError("integrated likelihood: estimate does not match the data");

  std::vector<Matrix> chols;
  chols.reserve(K);
  Matrix means(K, R);
  Vector half_logdet(K), log_p(K);
  for (int k = 0; k < K; ++k) {
    Matrix cov = symmetrize(est.B_hat * est.Omega_hat[k].mat() * est.B_hat.transpose());
    cov.diagonal() += est.v_hat;
    chols.push_back(cholesky_lower_nocheck(cov));
    double ld = 0.0;
    for (int j = 0; j < R; ++j) ld += std::log(chols[k](j, j));
    half_logdet[k] = ld;
    means.row(k) = (est.B_hat * est.mu_hat.row(k).transpose()).transpose();
    log_p[k] = std::log(est.p_hat[k]);
  }

  const double norm_const = -0.5 * R * std::log(2.0 * M_PI);
  double total = 0.0;
  Vector lw(K), d(R);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < K; ++k) {
      d = (data.Y.row(i) - means.row(k)).transpose();
      forward_solve(chols[k], d);
      lw[k] = log_p[k] - half_logdet[k] - 0.5 * d.squaredNorm();
    }
    total += norm_const + log_sum_exp(lw);
  }
  return total;
}

int small_cluster_threshold(int n) {
  const int frac = static_cast<int>(std::ceil(0.005 * static_cast<double>(n)));
  return frac > 3 ? frac : 3;
}

ICRecord information_criterion(const ChainOutput& chain, const Dataset& data,
                               const ModelDims& dims) {
  const PosteriorPointEstimate est = point_estimate(chain);
  ICRecord rec;
  rec.K = dims.K;
  rec.F = dims.F;
  rec.d = parameter_count(dims.K, dims.F, data.R());
  rec.loglik = integrated_loglik(data, est);

  std::vector<int> counts(dims.K, 0);
  for (int z : chain.map_labels) ++counts[z];
  rec.min_cluster_size = counts[0];
  for (int c : counts)
    if (c < rec.min_cluster_size) rec.min_cluster_size = c;

  const bool rejected = dims.K >= 2 && rec.min_cluster_size < small_cluster_threshold(data.n());
  rec.ic = rejected ? kInf : rec.d * std::log(static_cast<double>(data.n())) - 2.0 * rec.loglik;
  return rec;
}

ModelFit fit_model(const Dataset& data, const ModelDims& dims, const ChainConfig& config) {
  config.validate();
  ModelFit fit;
  RngStream elicit_rng(derive_seed(config.seed, kElicitationTag), 0);
  fit.elicitation = elicit_from_data(data, dims, elicit_rng);
  const GibbsState init = initial_state(fit.elicitation, data, dims);
  ChainConfig chain_config = config;
  chain_config.seed = derive_seed(config.seed, kChainTag);
  fit.chain = run_chain(data, dims, fit.elicitation.prior, init, chain_config);
  fit.ic = information_criterion(fit.chain, data, dims);
  return fit;
}

void GridSpec::validate(int n, int R) const {
  if (k_min < 1 || k_max < k_min || f_min < 1 || f_max < f_min)
    throw ConfigError("grid: ranges must satisfy 1 <= min <= max");
  ModelDims{k_max, f_max}.validate(n, R);
  chain.validate();
}

std::uint64_t grid_cell_seed(std::uint64_t seed, int K, int F) {
  const std::uint64_t tag =
      (static_cast<std::uint64_t>(K) << 32) | static_cast<std::uint64_t>(F);
  return derive_seed(seed, tag);
}

GridResult grid_search(const Dataset& data, const GridSpec& spec) {
  spec.validate(data.n(), data.R());
  GridResult result;
  result.table.reserve(static_cast<std::size_t>(spec.k_max - spec.k_min + 1) *
                       static_cast<std::size_t>(spec.f_max - spec.f_min + 1));
  for (int K = spec.k_min; K <= spec.k_max; ++K) {
    for (int F = spec.f_min; F <= spec.f_max; ++F) {
      ChainConfig config = spec.chain;
      config.seed = grid_cell_seed(spec.chain.seed, K, F);
      ICRecord rec;
      rec.K = K;
      rec.F = F;
      rec.d = parameter_count(K, F, data.R());
      try {
        rec = fit_model(data, ModelDims{K, F}, config).ic;
      } catch (const SmallClusterError& ex) {
        rec.loglik = std::numeric_limits<double>::quiet_NaN();
        rec.ic = kInf;
        rec.min_cluster_size = ex.size();
      } catch (const NotSpdError&) {
        rec.loglik = std::numeric_limits<double>::quiet_NaN();
        rec.ic = kInf;
      } catch (const NumericalError&) {
        rec.loglik = std::numeric_limits<double>::quiet_NaN();
        rec.ic = kInf;
      } catch (const ChainError&) {
        rec.loglik = std::numeric_limits<double>::quiet_NaN();
        rec.ic = kInf;
      } catch (const DataError&) {
        rec.loglik = std::numeric_limits<double>::quiet_NaN();
        rec.ic = kInf;
      }
      result.table.push_back(rec);
    }
  }

  double best = kInf;
  for (const ICRecord& rec : result.table) {
    if (rec.ic < best) {  // strict: ties keep the earlier (smaller K, then F)
      best = rec.ic;
      result.best_K = rec.K;
      result.best_F = rec.F;
    }
  }
  if (!(best < kInf))
    throw Error(
        "model selection: every model in the grid was rejected; widen the (K, F) ranges or "
        "provide more data");
  return result;
}

}  // namespace bcfm
