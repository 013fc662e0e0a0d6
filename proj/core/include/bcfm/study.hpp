#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcfm/selection.hpp"
#include "bcfm/simulate.hpp"

namespace bcfm {

struct CompareRow {
  double separation = 0.0;
  std::string method;  // "bcfm" or "pca_kmeans"
  int K_hat = 0;
  int F_hat = 0;
  int replicate = 0;  // 1-based
};

struct CompareSummaryRow {
  double separation = 0.0;
  std::string method;
  double mean_K = 0.0;
  double se_K = 0.0;  // standard error of the mean over replicates
  double mean_F = 0.0;
  double se_F = 0.0;
  int replicates = 0;
};

struct CompareSpec {
  std::vector<double> separations;
  int replicates = 20;
  GridSpec grid;       // ranges + chain settings for the model-based method
  std::uint64_t seed = 0;

  void validate() const;
};

struct CompareResult {
  std::vector<CompareRow> rows;
  std::vector<CompareSummaryRow> summary;
};

// Head-to-head selection study: at each separation, `replicates` datasets
// from the benchmark design; both methods pick (K, F) on each dataset.  The
// reference method clusters principal-component scores with the gap statistic
// (K_max = the grid's k_max).  Every replicate runs on its own derived seed,
// so the table is deterministic and independent of execution order.  progress,
// when non-null, receives one line per completed replicate.
CompareResult run_compare(const CompareSpec& spec,
                          void (*progress)(const std::string&) = nullptr);

}  // namespace bcfm
