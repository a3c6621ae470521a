#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace lire {

struct Document {
  std::string doc_id;
  std::string text;
};

struct Query {
  std::string query_id;
  std::string text;
};

// query_id -> doc_id -> relevance grade (>= 0)
using Qrels = std::map<std::string, std::map<std::string, int>>;

struct RunEntry {
  std::string doc_id;
  double score = 0.0;
};

// Canonical order within a query: score descending, doc_id ascending.
inline bool run_entry_less(const RunEntry& a, const RunEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc_id < b.doc_id;
}

inline void sort_run_entries(std::vector<RunEntry>& entries) {
  std::sort(entries.begin(), entries.end(), run_entry_less);
}

// Ranked lists for a set of queries, entries kept in canonical order.
struct Run {
  std::string tag;
  std::map<std::string, std::vector<RunEntry>> queries;
};

// Token embeddings for one text, one row per token, row-major. Values are
// held in double; the on-disk format is float32.
struct TokenMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  std::span<const double> row(int i) const {
    return {data.data() + static_cast<size_t>(i) * cols, static_cast<size_t>(cols)};
  }
};

struct EmbeddingSet {
  int dim = 0;
  std::map<std::string, TokenMatrix> entries;
};

}  // namespace lire
