#include "lire/lce.hpp"

#include <algorithm>
#include <cmath>

#include "lire/errors.hpp"
#include "lire/rng.hpp"

namespace lire {
namespace {

void check_scores(double positive, const std::vector<double>& negatives) {
  if (negatives.empty()) throw config_error("lce: at least one negative is required");
  if (!std::isfinite(positive)) throw data_error("lce: non-finite positive score");
  for (double s : negatives)
    if (!std::isfinite(s)) throw data_error("lce: non-finite negative score");
}

}  // namespace

GroupSample sample_groups(const Run& first_stage, const Qrels& qrels, int n_neg,
                          uint64_t seed) {
  if (n_neg < 1) throw config_error("sample_groups: n_neg must be >= 1");
  GroupSample out;
  for (auto& [qid, entries] : first_stage.queries) {
    const size_t depth = std::min(entries.size(), static_cast<size_t>(kGroupCandidateDepth));
    auto jt = qrels.find(qid);

    std::vector<size_t> positives, pool;
    for (size_t i = 0; i < depth; ++i) {
      int grade = 0;
      if (jt != qrels.end()) {
        auto dit = jt->second.find(entries[i].doc_id);
        if (dit != jt->second.end()) grade = dit->second;
      }
      (grade > 0 ? positives : pool).push_back(i);
    }
    if (positives.empty() || pool.size() < static_cast<size_t>(n_neg)) {
      ++out.skipped_queries;
      continue;
    }
    ++out.used_queries;

    // Per-query stream keyed off the query id, so sampling does not depend
    // on which other queries are present.
    Rng rng(derive_seed(seed, qid));
    for (size_t p : positives) {
      ContrastiveGroup group;
      group.query_id = qid;
      group.positive_doc = entries[p].doc_id;
      group.positive_score = entries[p].score;
      group.negatives.reserve(n_neg);
      for (int pick : rng.sample_indices(static_cast<int>(pool.size()), n_neg)) {
        const auto& e = entries[pool[pick]];
        group.negatives.emplace_back(e.doc_id, e.score);
      }
      out.groups.push_back(std::move(group));
    }
  }
  return out;
}

double lce_loss(double positive, const std::vector<double>& negatives) {
  check_scores(positive, negatives);
  double m = positive;
  for (double s : negatives) m = std::max(m, s);
  double z = std::exp(positive - m);
  for (double s : negatives) z += std::exp(s - m);
  return std::log(z) + m - positive;
}

LceGradient lce_grad(double positive, const std::vector<double>& negatives) {
  check_scores(positive, negatives);
  double m = positive;
  for (double s : negatives) m = std::max(m, s);
  double z = std::exp(positive - m);
  for (double s : negatives) z += std::exp(s - m);

  LceGradient g;
  g.d_positive = std::exp(positive - m) / z - 1.0;
  g.d_negatives.resize(negatives.size());
  for (size_t i = 0; i < negatives.size(); ++i)
    g.d_negatives[i] = std::exp(negatives[i] - m) / z;
  return g;
}

}  // namespace lire
