#include <cmath>

#include "bcfm/baselines.hpp"
#include "bcfm/study.hpp"

namespace bcfm {
namespace {

// Sub-seed tags for the stages of one replicate.
constexpr std::uint64_t kDataTag = 0xA1;
constexpr std::uint64_t kGridTag = 0xA2;
constexpr std::uint64_t kBaselineTag = 0xA3;

std::uint64_t replicate_seed(std::uint64_t seed, int sep_index, int rep) {
  const std::uint64_t tag =
      (static_cast<std::uint64_t>(sep_index) << 32) | static_cast<std::uint64_t>(rep);
  return derive_seed(seed, tag);
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& values) {
  MeanSe out;
  const double m = static_cast<double>(values.size());
  for (double v : values) out.mean += v;
  out.mean /= m;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / (m - 1.0)) / std::sqrt(m);
  }
  return out;
}

}  // namespace

void CompareSpec::validate() const {
  if (separations.empty()) throw ConfigError("comparison: need at least one separation");
  for (double s : separations)
    if (!(s > 0.0) || !std::isfinite(s))
      throw ConfigError("comparison: separations must be positive");
  for (std::size_t i = 0; i < separations.size(); ++i)
    for (std::size_t j = i + 1; j < separations.size(); ++j)
      if (separations[i] == separations[j])
        throw ConfigError("comparison: separations must be distinct");
  if (replicates < 1) throw ConfigError("comparison: need at least one replicate");
  const SimSpec bench = SimSpec::benchmark(1.0);
  grid.validate(bench.n, bench.R);
}

CompareResult run_compare(const CompareSpec& spec, void (*progress)(const std::string&)) {
  spec.validate();
  CompareResult result;
  result.rows.reserve(spec.separations.size() * static_cast<std::size_t>(spec.replicates) * 2);

  for (std::size_t si = 0; si < spec.separations.size(); ++si) {
    const double s = spec.separations[si];
    for (int rep = 1; rep <= spec.replicates; ++rep) {
      const std::uint64_t rs = replicate_seed(spec.seed, static_cast<int>(si), rep);

      SimSpec sim = SimSpec::benchmark(s);
      sim.seed = derive_seed(rs, kDataTag);
      const SimulatedData d = generate_dataset(sim);

      GridSpec grid = spec.grid;
      grid.chain.seed = derive_seed(rs, kGridTag);
      const GridResult gr = grid_search(d.data, grid);
      result.rows.push_back({s, "bcfm", gr.best_K, gr.best_F, rep});

      RngStream baseline_rng(derive_seed(rs, kBaselineTag), 0);
      const PcaKmeansResult pk = pca_kmeans_pipeline(d.data, grid.k_max, baseline_rng);
      result.rows.push_back({s, "pca_kmeans", pk.K_hat, pk.F_hat, rep});

      if (progress != nullptr) {
        progress("separation " + std::to_string(s) + " replicate " + std::to_string(rep) + "/" +
                 std::to_string(spec.replicates) + ": model selected (K=" +
                 std::to_string(gr.best_K) + ", F=" + std::to_string(gr.best_F) +
                 "), reference selected (K=" + std::to_string(pk.K_hat) + ", F=" +
                 std::to_string(pk.F_hat) + ")");
      }
    }
  }

  for (std::size_t si = 0; si < spec.separations.size(); ++si) {
    const double s = spec.separations[si];
    for (const char* method : {"bcfm", "pca_kmeans"}) {
      std::vector<double> ks, fs;
      for (const CompareRow& row : result.rows) {
        if (row.separation == s && row.method == method) {
          ks.push_back(row.K_hat);
          fs.push_back(row.F_hat);
        }
      }
      const MeanSe mk = mean_se(ks);
      const MeanSe mf = mean_se(fs);
      result.summary.push_back(
          {s, method, mk.mean, mk.se, mf.mean, mf.se, static_cast<int>(ks.size())});
    }
  }
  return result;
}

}  // namespace bcfm
