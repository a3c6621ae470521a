#pragma once

#include "lire/types.hpp"

namespace lire {

inline constexpr int kRerankDepth = 100;

// Late-interaction relevance: for each query token, the maximum dot product
// against any document token, summed over query tokens. Rows are unit
// vectors, so the score lies in [-|q|, |q|]. Accumulation is in double.
double maxsim_score(const TokenMatrix& query, const TokenMatrix& doc);

// Re-scores the top `depth` entries of each query with maxsim and re-sorts;
// entries beyond `depth` are dropped. A first-stage id without an embedding
// is a data error naming the id.
Run rerank(const Run& first_stage, const EmbeddingSet& query_embs,
           const EmbeddingSet& doc_embs, int depth = kRerankDepth);

}  // namespace lire
