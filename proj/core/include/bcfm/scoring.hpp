#pragma once

#include <vector>

namespace bcfm {

// Relabeling perm maximizing subject agreement: perm[p] is the true label to
// read predicted label p as.  Exhaustive over all K! permutations (K <= 8);
// ties resolve to the lexicographically smallest permutation.
std::vector<int> best_label_permutation(const std::vector<int>& truth,
                                        const std::vector<int>& predicted, int K);

// Fraction of subjects whose predicted cluster matches the true cluster under
// the most favorable relabeling (best_label_permutation).  Cluster identities
// are arbitrary, so raw label agreement would understate accuracy.
double permutation_aligned_accuracy(const std::vector<int>& truth,
                                    const std::vector<int>& predicted, int K);

}  // namespace bcfm
