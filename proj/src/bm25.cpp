#include "lire/bm25.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_set>

#include "lire/errors.hpp"
#include "lire/fusion.hpp"

namespace lire {
namespace {

constexpr uint32_t kBadCp = 0xFFFFFFFFu;

// Minimal UTF-8 walk; a malformed byte acts as a delimiter and is skipped.
uint32_t decode_utf8(std::string_view s, size_t& i) {
  unsigned char b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len;
  uint32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1Fu;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0Fu;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07u;
  } else {
    ++i;
    return kBadCp;
  }
  if (i + len > s.size()) {
    ++i;
    return kBadCp;
  }
  for (int k = 1; k < len; ++k) {
    unsigned char b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return kBadCp;
    }
    cp = (cp << 6) | (b & 0x3Fu);
  }
  i += len;
  return cp;
}

void append_utf8(std::string& out, uint32_t c) {
  if (c < 0x80) {
    out += static_cast<char>(c);
  } else if (c < 0x800) {
    out += static_cast<char>(0xC0 | (c >> 6));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else if (c < 0x10000) {
    out += static_cast<char>(0xE0 | (c >> 12));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (c >> 18));
    out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  }
}

bool is_space_cp(uint32_t c) {
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
  }
  return c >= 0x2000 && c <= 0x200A;
}

// Punctuation and symbol ranges that terminate a token. Covers ASCII,
// Latin-1 (minus the ordinal/micro letters), general punctuation, CJK and
// fullwidth punctuation, plus a few common script-specific marks.
bool is_delim_cp(uint32_t c) {
  if (c < 0x80)
    return !((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'));
  if (is_space_cp(c)) return true;
  if (c >= 0xA1 && c <= 0xBF) return c != 0xAA && c != 0xB5 && c != 0xBA;
  if (c == 0xD7 || c == 0xF7) return true;
  if (c >= 0x2000 && c <= 0x206F) return true;
  if (c >= 0x3001 && c <= 0x303F) return true;
  if (c >= 0xFF01 && c <= 0xFF0F) return true;
  if (c >= 0xFF1A && c <= 0xFF20) return true;
  if (c >= 0xFF3B && c <= 0xFF40) return true;
  if (c >= 0xFF5B && c <= 0xFF65) return true;
  switch (c) {
    case 0x060C: case 0x061B: case 0x061F:  // Arabic comma, semicolon, question mark
    case 0x0964: case 0x0965:               // danda, double danda
    case 0x0F0B:                            // Tibetan tsheg
    case 0x1361: case 0x1362:               // Ethiopic wordspace, full stop
      return true;
  }
  return false;
}

// Simple case folding for the bicameral scripts we index: ASCII, Latin-1,
// Latin Extended-A, Greek, Cyrillic. Everything else passes through.
uint32_t to_lower_cp(uint32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 0x20;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  if (c == 0x130) return 0x69;  // I with dot above -> i
  if (c == 0x178) return 0xFF;  // Y with diaeresis
  if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) return c | 1;
  if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E))
    return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  size_t i = 0;
  while (i < text.size()) {
    uint32_t cp = decode_utf8(text, i);
    if (cp == kBadCp || is_delim_cp(cp)) {
      if (!cur.empty()) {
        tokens.push_back(std::move(cur));
        cur.clear();
      }
    } else {
      append_utf8(cur, to_lower_cp(cp));
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

LexicalIndex build_index(const std::vector<Document>& corpus) {
  if (corpus.empty()) throw data_error("build_index: empty corpus");
  LexicalIndex idx;
  idx.doc_ids.reserve(corpus.size());
  idx.doc_lengths.reserve(corpus.size());
  std::unordered_set<std::string> seen;
  long long total_tokens = 0;
  std::unordered_map<std::string, int> tf;
  for (auto& doc : corpus) {
    if (!seen.insert(doc.doc_id).second)
      throw data_error("build_index: duplicate doc_id '" + doc.doc_id + "'");
    int id = static_cast<int>(idx.doc_ids.size());
    idx.doc_ids.push_back(doc.doc_id);
    auto toks = tokenize(doc.text);
    idx.doc_lengths.push_back(static_cast<int>(toks.size()));
    total_tokens += static_cast<long long>(toks.size());
    tf.clear();
    for (auto& t : toks) ++tf[t];
    for (auto& [term, f] : tf) idx.postings[term].push_back({id, f});
  }
  if (total_tokens == 0)
    throw data_error("build_index: every document tokenizes to zero terms");
  idx.avg_doc_length = static_cast<double>(total_tokens) / static_cast<double>(corpus.size());
  return idx;
}

Run bm25_search(const LexicalIndex& index, const Query& query, int k) {
  if (k < 1) throw config_error("bm25_search: k must be >= 1");
  if (index.doc_count() == 0) throw data_error("bm25_search: empty index");
  Run run;
  run.tag = "bm25";
  auto& out = run.queries[query.query_id];

  std::unordered_map<int, double> acc;
  const double n_docs = index.doc_count();
  for (auto& term : tokenize(query.text)) {
    auto it = index.postings.find(term);
    if (it == index.postings.end()) continue;
    const double df = static_cast<double>(it->second.size());
    const double idf = std::log((n_docs - df + 0.5) / (df + 0.5) + 1.0);
    for (auto& p : it->second) {
      const double tf = p.tf;
      const double norm_len =
          1.0 - kBm25B + kBm25B * index.doc_lengths[p.doc] / index.avg_doc_length;
      acc[p.doc] += idf * tf * (kBm25K1 + 1.0) / (tf + kBm25K1 * norm_len);
    }
  }

  out.reserve(acc.size());
  for (auto& [doc, score] : acc) out.push_back({index.doc_ids[doc], score});
  sort_run_entries(out);
  if (out.size() > static_cast<size_t>(k)) out.resize(k);
  return run;
}

Run bm25_search_all(const LexicalIndex& index, const std::vector<Query>& queries, int k) {
  Run run;
  run.tag = "bm25";
  for (auto& q : queries) {
    Run one = bm25_search(index, q, k);
    auto node = one.queries.extract(q.query_id);
    if (!run.queries.insert(std::move(node)).inserted)
      throw data_error("bm25_search_all: duplicate query_id '" + q.query_id + "'");
  }
  return run;
}

Run hybrid_combine(const Run& lexical, const Run& dense, int k) {
  FusionWeights unit{{1.0, 1.0}};
  return fuse({lexical, dense}, unit, k, "hybrid");
}

}  // namespace lire
