#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lire/types.hpp"

namespace lire {

// Corpus and query files are TSV: id<TAB>text, one entry per line, UTF-8.
std::vector<Document> read_corpus(const std::string& path);
std::vector<Query> read_queries(const std::string& path);
void write_corpus(const std::vector<Document>& corpus, const std::string& path);
void write_queries(const std::vector<Query>& queries, const std::string& path);

// Qrels lines: query_id 0 doc_id grade, whitespace separated, grade >= 0.
Qrels read_qrels(const std::string& path);
void write_qrels(const Qrels& qrels, const std::string& path);

// Run files are trec format: query_id Q0 doc_id rank score tag. The reader
// ignores the stored rank column and canonicalizes each query's entries to
// (score desc, doc_id asc); the writer recomputes 1-based ranks and prints
// scores with 6 decimal places.
Run read_run(const std::string& path);
void write_run(const Run& run, const std::string& path);

// Token-embedding file, little-endian binary:
//   magic "LIRE", u32 version = 1, u32 dim, u64 num_entries, then per entry
//   u32 id_len, id bytes, u32 num_tokens, num_tokens*dim float32 row-major.
// Rows are L2-normalized at load time; a zero row is a data error.
EmbeddingSet read_embeddings(const std::string& path);
void write_embeddings(const EmbeddingSet& set, const std::string& path);

// Writes to a temp file in the target directory, then renames into place, so
// readers never observe a partially written file.
void write_file_atomic(const std::string& path, std::string_view bytes);

std::string read_file(const std::string& path);

}  // namespace lire
