#pragma once

#include <cstdint>
#include <string>

#include "lire/types.hpp"

namespace lire {

// Desk-scale dataset with complementary lexical and semantic signal. Each
// query gets a few planted relevant documents; strong term overlap makes
// BM25 effective on one random half of the queries, planted token embeddings
// make maxsim effective on an overlapping-but-different half, and the
// generated dense run is a noisy relevance oracle standing in for an
// external retriever. Every query keeps at least a weak lexical footprint so
// its relevant documents stay reachable by the first stage.
struct SyntheticConfig {
  int n_queries = 100;
  int n_docs = 2000;
  int dim = 16;
  uint64_t seed = 42;
};

struct SyntheticData {
  std::vector<Document> corpus;
  std::vector<Query> queries;
  Qrels qrels;
  EmbeddingSet query_embs;
  EmbeddingSet doc_embs;
  Run dense_run;
};

SyntheticData gen_synthetic(const SyntheticConfig& cfg);

// Writes corpus.tsv, queries.tsv, qrels.txt, queries.emb, docs.emb, dense.run
// into out_dir (created if absent).
void write_synthetic(const SyntheticData& data, const std::string& out_dir);

}  // namespace lire
