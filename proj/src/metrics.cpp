#include "lire/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lire/errors.hpp"

namespace lire {
namespace {

double dcg(const std::vector<int>& gains, int k) {
  double s = 0.0;
  const int n = std::min<int>(k, static_cast<int>(gains.size()));
  for (int i = 0; i < n; ++i) s += gains[i] / std::log2(i + 2.0);
  return s;
}

}  // namespace

MetricReport ndcg_at_k(const Run& run, const Qrels& qrels, int k) {
  if (k < 1) throw config_error("ndcg_at_k: k must be >= 1");
  MetricReport rep;
  double sum = 0.0;
  for (auto& [qid, judgments] : qrels) {
    std::vector<int> ideal;
    for (auto& [doc, grade] : judgments)
      if (grade > 0) ideal.push_back(grade);
    if (ideal.empty()) {
      ++rep.skipped;
      continue;
    }
    std::sort(ideal.begin(), ideal.end(), std::greater<int>());

    std::vector<int> gains;
    if (auto it = run.queries.find(qid); it != run.queries.end()) {
      gains.reserve(it->second.size());
      for (auto& e : it->second) {
        auto j = judgments.find(e.doc_id);
        gains.push_back(j == judgments.end() ? 0 : j->second);
      }
    }
    double value = dcg(gains, k) / dcg(ideal, k);
    rep.per_query[qid] = value;
    sum += value;
    ++rep.evaluated;
  }
  if (rep.evaluated == 0) throw data_error("ndcg_at_k: no judged queries");
  rep.aggregate = sum / rep.evaluated;
  return rep;
}

MetricReport recall_at_k(const Run& run, const Qrels& qrels, int k) {
  if (k < 1) throw config_error("recall_at_k: k must be >= 1");
  MetricReport rep;
  double sum = 0.0;
  for (auto& [qid, judgments] : qrels) {
    int n_pos = 0;
    for (auto& [doc, grade] : judgments)
      if (grade > 0) ++n_pos;
    if (n_pos == 0) {
      ++rep.skipped;
      continue;
    }
    int hits = 0;
    if (auto it = run.queries.find(qid); it != run.queries.end()) {
      const int n = std::min<int>(k, static_cast<int>(it->second.size()));
      for (int i = 0; i < n; ++i) {
        auto j = judgments.find(it->second[i].doc_id);
        if (j != judgments.end() && j->second > 0) ++hits;
      }
    }
    double value = static_cast<double>(hits) / n_pos;
    rep.per_query[qid] = value;
    sum += value;
    ++rep.evaluated;
  }
  if (rep.evaluated == 0) throw data_error("recall_at_k: no judged queries");
  rep.aggregate = sum / rep.evaluated;
  return rep;
}

double aggregate_languages(const std::map<std::string, MetricReport>& reports) {
  if (reports.empty()) throw data_error("aggregate_languages: no languages");
  double sum = 0.0;
  for (auto& [lang, rep] : reports) sum += rep.aggregate;
  return sum / static_cast<double>(reports.size());
}

}  // namespace lire
