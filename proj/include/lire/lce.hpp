#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lire/types.hpp"

namespace lire {

inline constexpr int kGroupCandidateDepth = 100;
inline constexpr int kDefaultNegatives = 6;

struct ContrastiveGroup {
  std::string query_id;
  std::string positive_doc;
  double positive_score = 0.0;
  std::vector<std::pair<std::string, double>> negatives;  // (doc_id, first-stage score)
};

struct GroupSample {
  std::vector<ContrastiveGroup> groups;
  int used_queries = 0;
  int skipped_queries = 0;
};

// One group per positively judged document inside the first-stage top 100.
// Negatives are drawn uniformly without replacement from the non-positive
// top-100 entries of the same query (unjudged counts as non-positive).
// Queries with no positive in the pool, or with fewer than n_neg candidate
// negatives, are skipped and counted.
GroupSample sample_groups(const Run& first_stage, const Qrels& qrels,
                          int n_neg = kDefaultNegatives, uint64_t seed = 0);

// Grouped softmax cross-entropy over one positive and its negatives:
//   L = -log(exp(s+) / (exp(s+) + sum_i exp(s-_i)))
// computed with max-subtraction so large scores cannot overflow.
double lce_loss(double positive, const std::vector<double>& negatives);

struct LceGradient {
  double d_positive = 0.0;
  std::vector<double> d_negatives;
};

// softmax over the group minus the one-hot positive; components sum to 0.
LceGradient lce_grad(double positive, const std::vector<double>& negatives);

}  // namespace lire
