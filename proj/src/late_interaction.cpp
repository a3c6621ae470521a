#include "lire/late_interaction.hpp"

#include <algorithm>

#include <Eigen/Dense>

#include "lire/errors.hpp"

namespace lire {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMat> as_matrix(const TokenMatrix& m) {
  return {m.data.data(), m.rows, m.cols};
}

}  // namespace

double maxsim_score(const TokenMatrix& query, const TokenMatrix& doc) {
  if (query.cols != doc.cols)
    throw data_error("maxsim: dimension mismatch (" + std::to_string(query.cols) + " vs " +
                     std::to_string(doc.cols) + ")");
  if (query.rows < 1 || doc.rows < 1) throw data_error("maxsim: empty token matrix");
  Eigen::MatrixXd sim = as_matrix(query) * as_matrix(doc).transpose();
  return sim.rowwise().maxCoeff().sum();
}

Run rerank(const Run& first_stage, const EmbeddingSet& query_embs,
           const EmbeddingSet& doc_embs, int depth) {
  if (depth < 1) throw config_error("rerank: depth must be >= 1");
  Run out;
  out.tag = "maxsim";
  for (auto& [qid, entries] : first_stage.queries) {
    auto qit = query_embs.entries.find(qid);
    if (qit == query_embs.entries.end())
      throw data_error("rerank: missing query embedding for '" + qid + "'");
    auto& rescored = out.queries[qid];
    const size_t n = std::min(entries.size(), static_cast<size_t>(depth));
    rescored.reserve(n);
    for (size_t i = 0; i < n; ++i) {
      auto dit = doc_embs.entries.find(entries[i].doc_id);
      if (dit == doc_embs.entries.end())
        throw data_error("rerank: missing document embedding for '" + entries[i].doc_id + "'");
      rescored.push_back({entries[i].doc_id, maxsim_score(qit->second, dit->second)});
    }
    sort_run_entries(rescored);
  }
  return out;
}

}  // namespace lire
