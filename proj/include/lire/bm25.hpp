#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lire/types.hpp"

namespace lire {

inline constexpr double kBm25K1 = 0.9;
inline constexpr double kBm25B = 0.4;

// Lowercases and splits on Unicode whitespace and punctuation. No stemming,
// no stopword removal. Case folding covers ASCII, Latin-1 and Latin
// Extended-A, Greek and Cyrillic; scripts without case pass through. CJK
// text is not segmented beyond the delimiter split.
std::vector<std::string> tokenize(std::string_view text);

struct LexicalIndex {
  struct Posting {
    int doc = 0;  // position in doc_ids
    int tf = 0;
  };
  std::unordered_map<std::string, std::vector<Posting>> postings;  // doc asc
  std::vector<std::string> doc_ids;
  std::vector<int> doc_lengths;
  double avg_doc_length = 0.0;

  int doc_count() const { return static_cast<int>(doc_ids.size()); }
};

LexicalIndex build_index(const std::vector<Document>& corpus);

// Okapi BM25 with idf(t) = ln((N - df + 0.5) / (df + 0.5) + 1). Query terms
// are a multiset (a repeated term counts twice). Only documents matching at
// least one query term appear in the result.
Run bm25_search(const LexicalIndex& index, const Query& query, int k);
Run bm25_search_all(const LexicalIndex& index, const std::vector<Query>& queries, int k);

// Sum of per-query min-max normalized scores over the union of the two runs'
// documents; a document missing from one run contributes 0 from that run.
Run hybrid_combine(const Run& lexical, const Run& dense, int k);

}  // namespace lire
