#pragma once

#include <map>
#include <string>

#include "lire/types.hpp"

namespace lire {

struct MetricReport {
  std::map<std::string, double> per_query;
  double aggregate = 0.0;  // mean over evaluated queries
  int evaluated = 0;
  int skipped = 0;  // judged queries with no positive grade
};

// nDCG@k with gain grade / log2(rank + 1), 1-based ranks. Queries without a
// positively judged document are skipped (not averaged); retrieved documents
// without a judgment count as grade 0. A judged query missing from the run
// scores 0.
MetricReport ndcg_at_k(const Run& run, const Qrels& qrels, int k = 10);

// Fraction of positively judged documents found in the top k.
MetricReport recall_at_k(const Run& run, const Qrels& qrels, int k = 100);

// Unweighted mean of per-language aggregates.
double aggregate_languages(const std::map<std::string, MetricReport>& reports);

}  // namespace lire
