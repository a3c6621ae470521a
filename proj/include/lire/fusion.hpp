#pragma once

#include <string>
#include <vector>

#include "lire/types.hpp"

namespace lire {

struct FusionWeights {
  std::vector<double> weights;

  // finite, non-negative, at least one strictly positive, one per run
  void validate(size_t n_runs) const;
};

// (s - min) / (max - min); a constant list maps every score to 1.0.
std::vector<double> min_max_normalize(const std::vector<double>& scores);

// Weighted sum of per-query min-max normalized scores over the union of the
// runs' documents; a document absent from a run contributes 0 from that run.
// Output entries are (score desc, doc_id asc), truncated to k.
Run fuse(const std::vector<Run>& runs, const FusionWeights& weights, int k,
         const std::string& tag = "fusion");

// Exhaustive search over the weight simplex with coordinates on multiples of
// grid_step, maximizing mean nDCG@10 against qrels. Ties resolve to the
// lexicographically smallest weight vector.
FusionWeights tune_weights(const std::vector<Run>& runs, const Qrels& qrels,
                           double grid_step = 0.1);

// Weights file: run_tag<TAB>weight per line, in run order.
void write_weights(const std::vector<std::string>& tags, const FusionWeights& weights,
                   const std::string& path);
FusionWeights read_weights(const std::string& path);

}  // namespace lire
