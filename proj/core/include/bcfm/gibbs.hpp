#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcfm/elicitation.hpp"
#include "bcfm/errors.hpp"
#include "bcfm/samplers.hpp"
#include "bcfm/types.hpp"

namespace bcfm {

// The complete sampler state: one point in the posterior's support.
struct GibbsState {
  LoadingsState loadings;
  MixtureState mixture;
  NoiseState noise;

  void validate() const;
};

struct ChainConfig {
  long iterations = 50000;
  int thin = 10;
  int burnin_draws = 1500;  // counted in retained (thinned) draws
  std::uint64_t seed = 0;

  void validate() const;
  long retained() const { return iterations / thin; }
  long kept() const { return retained() - burnin_draws; }
};

// One retained draw of the model parameters.  Factors and assignments are
// aggregated on the fly (posterior-mean factors, assignment counts) instead
// of being stored per draw, which keeps a 5,000-draw chain in a few MB.
struct ParameterDraw {
  Matrix B;
  Vector tau;
  Vector sigma2;
  Matrix mu;                  // K x F, row k = mu_k
  std::vector<Matrix> omega;  // K matrices F x F
  Vector p;
  double log_joint = 0.0;
};

// Posterior mean and equal-tailed 95% bounds, same shape as the parameter.
struct FamilySummary {
  Matrix mean;
  Matrix q025;
  Matrix q975;
};

struct ChainSummaries {
  FamilySummary B;
  FamilySummary tau;     // F x 1
  FamilySummary sigma2;  // R x 1
  FamilySummary mu;      // K x F
  std::vector<FamilySummary> omega;
  FamilySummary p;          // K x 1
  FamilySummary log_joint;  // 1 x 1
};

struct ChainOutput {
  ModelDims dims;
  int n = 0;
  ChainConfig config;
  std::vector<ParameterDraw> draws;
  ChainSummaries summaries;
  Matrix assign_prob;           // n x K; each row sums to 1.0 exactly
  std::vector<int> map_labels;  // modal assignment, lowest index on ties
  Matrix X_mean;                // n x F posterior mean of the factors
};

// Thrown when an update fails mid-chain; carries the last state that passed
// validation so the caller can persist a checkpoint.
class ChainError : public Error {
 public:
  ChainError(const std::string& what, long iteration, std::string block,
             GibbsState checkpoint)
      : Error("iteration " + std::to_string(iteration) + ", block " + block + ": " + what),
        iteration_(iteration),
        block_(std::move(block)),
        checkpoint_(std::move(checkpoint)) {}

  long iteration() const { return iteration_; }
  const std::string& block() const { return block_; }
  const GibbsState& checkpoint() const { return checkpoint_; }

 private:
  long iteration_;
  std::string block_;
  GibbsState checkpoint_;
};

// ---- full-conditional parameters -------------------------------------------
// Each update block below draws from one of these exact conditional laws.
// They are exposed separately so tests can verify the ratio identity
// log fc(a) - log fc(b) = log_joint(a) - log_joint(b) for every block.

struct MvnParams {
  Vector mean;
  Matrix cov;
  double logpdf(const Vector& x) const;
};

struct IgParams {
  double shape;
  double scale;
  double logpdf(double x) const;
};

struct IwParams {
  double df;
  Matrix scale;
  double logpdf(const SpdMatrix& x) const;
};

struct DirichletParams {
  Vector alpha;
  double logpdf(const Vector& p) const;
};

struct CategoricalParams {
  Vector log_weights;          // unnormalized
  double logpmf(int k) const;  // normalized
};

MvnParams factor_full_conditional(const GibbsState& s, const Dataset& data, int i);
MvnParams cluster_mean_full_conditional(const GibbsState& s, const PriorSpec& prior, int k);
IgParams omega_diag_full_conditional(const GibbsState& s, const PriorSpec& prior, int l);
// k >= 1 (cluster 0's covariance is updated elementwise via the IG form).
IwParams omega_full_conditional(const GibbsState& s, const PriorSpec& prior, int k);
// r in [1, R); the returned law covers the min(r, F) free entries of row r.
MvnParams loadings_row_full_conditional(const GibbsState& s, const Dataset& data, int r);
IgParams sigma2_full_conditional(const GibbsState& s, const Dataset& data,
                                 const PriorSpec& prior, int r);
IgParams tau_full_conditional(const GibbsState& s, const PriorSpec& prior, int l);
CategoricalParams assignment_full_conditional(const GibbsState& s, int i);
DirichletParams weights_full_conditional(const GibbsState& s, const PriorSpec& prior);

// Log of the joint density of data, latent variables, and parameters under
// the model and all priors — the oracle every full conditional is tested
// against.
double log_joint(const GibbsState& s, const Dataset& data, const PriorSpec& prior);

// ---- update blocks ----------------------------------------------------------
// Each redraws its block in place from the exact full conditional, consuming
// the stream in a fixed documented order (subjects/rows/clusters ascending).

void update_factors(GibbsState& s, const Dataset& data, RngStream& rng);
void update_cluster_means(GibbsState& s, const PriorSpec& prior, RngStream& rng);
void update_cluster_covariances(GibbsState& s, const PriorSpec& prior, RngStream& rng);
void update_loadings(GibbsState& s, const Dataset& data, RngStream& rng);
void update_idiosyncratic_variances(GibbsState& s, const Dataset& data,
                                    const PriorSpec& prior, RngStream& rng);
void update_tau(GibbsState& s, const PriorSpec& prior, RngStream& rng);
void update_assignments(GibbsState& s, RngStream& rng);
void update_weights(GibbsState& s, const PriorSpec& prior, RngStream& rng);

// ---- orchestration ----------------------------------------------------------

// Starting point from the elicitation artifacts: X = X~, B = B~, z = k-means
// labels, mu_k = m_k, Omega_k = prior means, sigma2 = 0.5, tau = 1,
// p = (n_k + alpha_k) / sum.
GibbsState initial_state(const Elicitation& elicitation, const Dataset& data,
                         const ModelDims& dims);

// One full Gibbs run: per iteration the eight blocks above execute in the
// fixed order factors, means, covariances, loadings, variances, tau,
// assignments, weights, each on its own (iteration, block) substream of
// config.seed.  Every retained state is checked against the structural
// invariants before it is recorded.
ChainOutput run_chain(const Dataset& data, const ModelDims& dims, const PriorSpec& prior,
                      const GibbsState& init, const ChainConfig& config);

// Summaries across retained draws (mean + type-7 empirical 2.5%/97.5%).
ChainSummaries summarize_draws(const std::vector<ParameterDraw>& draws);

// Turns per-subject assignment counts into probabilities whose rows sum to
// 1.0 exactly under left-to-right addition (the final entry is pinned to one
// minus the sum of the others).
Matrix assignment_probabilities(const Matrix& z_counts);

std::vector<int> modal_labels(const Matrix& assign_prob);

// Type-7 empirical quantile (linear interpolation of order statistics).
double quantile_type7(std::vector<double> values, double prob);

}  // namespace bcfm
