#include <algorithm>
#include <numeric>
#include <string>

#include "bcfm/errors.hpp"
#include "bcfm/scoring.hpp"

namespace bcfm {

std::vector<int> best_label_permutation(const std::vector<int>& truth,
                                        const std::vector<int>& predicted, int K) {
  if (truth.size() != predicted.size() || truth.empty())
    throw ConfigError("accuracy: need matching, non-empty label vectors");
  if (K < 1 || K > 8) throw ConfigError("accuracy: K must be in 1..8 (K! relabelings)");

  // confusion(t, p): subjects with true label t and predicted label p.
  std::vector<std::vector<long>> confusion(static_cast<std::size_t>(K),
                                           std::vector<long>(static_cast<std::size_t>(K), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i], p = predicted[i];
    if (t < 0 || t >= K || p < 0 || p >= K)
      throw ConfigError("accuracy: label out of range at subject " + std::to_string(i + 1));
    ++confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }

  std::vector<int> perm(static_cast<std::size_t>(K));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best_perm = perm;
  long best = -1;
  do {
    long hits = 0;
    for (int p = 0; p < K; ++p) hits += confusion[static_cast<std::size_t>(perm[p])][p];
    if (hits > best) {
      best = hits;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best_perm;
}

double permutation_aligned_accuracy(const std::vector<int>& truth,
                                    const std::vector<int>& predicted, int K) {
  const std::vector<int> perm = best_label_permutation(truth, predicted, K);
  long hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == perm[static_cast<std::size_t>(predicted[i])]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace bcfm
