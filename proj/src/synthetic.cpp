#include "lire/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <set>

#include "lire/corpus_io.hpp"
#include "lire/errors.hpp"
#include "lire/rng.hpp"

namespace lire {
namespace {

constexpr int kRelPerQuery = 3;
constexpr int kBackgroundVocab = 400;
constexpr int kDocTokens = 10;
constexpr int kQueryTerms = 3;
constexpr int kQueryEmbTokens = 3;
constexpr int kDocEmbTokens = 5;
constexpr int kStrongTermCopies = 2;
constexpr int kTermDistractors = 15;
constexpr int kSecondaryDistractors = 5;
constexpr double kConceptNoise = 0.25;
constexpr double kDenseSignal = 1.8;
constexpr int kDenseDepth = 100;

std::string query_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "q%05d", i + 1);
  return buf;
}

std::string doc_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "d%05d", i + 1);
  return buf;
}

std::string background_term(Rng& rng) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "w%03d", static_cast<int>(rng.bounded(kBackgroundVocab)));
  return buf;
}

std::string query_term(int q, int k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "t%05d%c", q + 1, static_cast<char>('a' + k));
  return buf;
}

std::vector<double> random_unit(Rng& rng, int dim) {
  std::vector<double> v(dim);
  double sq = 0.0;
  for (double& x : v) {
    x = rng.normal();
    sq += x * x;
  }
  double norm = std::sqrt(sq);
  if (!(norm > 0.0)) return random_unit(rng, dim);
  for (double& x : v) x /= norm;
  return v;
}

// distinct docs outside `exclude`, deterministic given the stream
std::vector<int> pick_docs(Rng& rng, int n_docs, int want, const std::set<int>& exclude) {
  std::set<int> chosen;
  int attempts = 0;
  const int limit = 64 * (want + 1);
  while (static_cast<int>(chosen.size()) < want && attempts < limit) {
    ++attempts;
    int d = static_cast<int>(rng.bounded(static_cast<uint64_t>(n_docs)));
    if (exclude.count(d)) continue;
    chosen.insert(d);
  }
  return {chosen.begin(), chosen.end()};
}

}  // namespace

SyntheticData gen_synthetic(const SyntheticConfig& cfg) {
  if (cfg.n_queries < 1 || cfg.n_docs < 1) throw config_error("gen_synthetic: sizes must be >= 1");
  if (cfg.n_queries > 99999 || cfg.n_docs > 99999)
    throw config_error("gen_synthetic: at most 99999 queries and documents");
  if (cfg.dim < 1) throw config_error("gen_synthetic: dim must be >= 1");

  const int rel_per_query = std::min(kRelPerQuery, cfg.n_docs);
  SyntheticData data;

  // relevant-document assignment: disjoint blocks of a shuffled permutation
  // when the corpus is large enough, wrap-around otherwise
  Rng assign_rng(derive_seed(cfg.seed, "assign"));
  std::vector<std::vector<int>> rel(cfg.n_queries);
  if (static_cast<long long>(cfg.n_queries) * rel_per_query <= cfg.n_docs) {
    std::vector<int> perm(cfg.n_docs);
    std::iota(perm.begin(), perm.end(), 0);
    assign_rng.shuffle(perm);
    for (int q = 0; q < cfg.n_queries; ++q)
      for (int j = 0; j < rel_per_query; ++j) rel[q].push_back(perm[q * rel_per_query + j]);
  } else {
    for (int q = 0; q < cfg.n_queries; ++q)
      for (int j = 0; j < rel_per_query; ++j)
        rel[q].push_back((q * rel_per_query + j) % cfg.n_docs);
  }

  // signal halves: strong term overlap for one coin, planted embeddings for
  // an independent coin; weak queries keep one term occurrence so their
  // relevant documents remain reachable
  Rng half_rng(derive_seed(cfg.seed, "halves"));
  std::vector<bool> lexical_signal(cfg.n_queries), semantic_signal(cfg.n_queries);
  for (int q = 0; q < cfg.n_queries; ++q) {
    lexical_signal[q] = half_rng.uniform() < 0.5;
    semantic_signal[q] = half_rng.uniform() < 0.5;
  }

  // corpus text
  Rng text_rng(derive_seed(cfg.seed, "corpus"));
  std::vector<std::vector<std::string>> doc_tokens(cfg.n_docs);
  for (int d = 0; d < cfg.n_docs; ++d)
    for (int t = 0; t < kDocTokens; ++t) doc_tokens[d].push_back(background_term(text_rng));

  for (int q = 0; q < cfg.n_queries; ++q) {
    std::set<int> rel_set(rel[q].begin(), rel[q].end());
    if (lexical_signal[q]) {
      for (int d : rel[q])
        for (int k = 0; k < kQueryTerms; ++k)
          for (int c = 0; c < kStrongTermCopies; ++c) doc_tokens[d].push_back(query_term(q, k));
    } else {
      doc_tokens[rel[q].front()].push_back(query_term(q, 0));
    }
    for (int d : pick_docs(text_rng, cfg.n_docs, std::min(kTermDistractors, cfg.n_docs), rel_set))
      doc_tokens[d].push_back(query_term(q, 0));
    for (int d :
         pick_docs(text_rng, cfg.n_docs, std::min(kSecondaryDistractors, cfg.n_docs), rel_set))
      doc_tokens[d].push_back(query_term(q, 1));
  }

  data.corpus.reserve(cfg.n_docs);
  for (int d = 0; d < cfg.n_docs; ++d) {
    std::string text;
    for (size_t t = 0; t < doc_tokens[d].size(); ++t) {
      if (t) text += ' ';
      text += doc_tokens[d][t];
    }
    data.corpus.push_back({doc_id(d), std::move(text)});
  }

  data.queries.reserve(cfg.n_queries);
  for (int q = 0; q < cfg.n_queries; ++q) {
    std::string text;
    for (int k = 0; k < kQueryTerms; ++k) {
      if (k) text += ' ';
      text += query_term(q, k);
    }
    data.queries.push_back({query_id(q), std::move(text)});
  }

  // qrels: the first relevant document of each query is graded 2, the rest 1
  for (int q = 0; q < cfg.n_queries; ++q)
    for (size_t j = 0; j < rel[q].size(); ++j)
      data.qrels[query_id(q)][doc_id(rel[q][j])] = (j == 0) ? 2 : 1;

  // embeddings: random unit tokens everywhere, with relevant documents of
  // semantic-signal queries carrying noisy copies of the query concepts
  Rng emb_rng(derive_seed(cfg.seed, "embeddings"));
  data.query_embs.dim = cfg.dim;
  data.doc_embs.dim = cfg.dim;
  std::vector<std::vector<std::vector<double>>> concepts(cfg.n_queries);
  for (int q = 0; q < cfg.n_queries; ++q) {
    TokenMatrix m;
    m.rows = kQueryEmbTokens;
    m.cols = cfg.dim;
    for (int t = 0; t < kQueryEmbTokens; ++t) {
      auto v = random_unit(emb_rng, cfg.dim);
      concepts[q].push_back(v);
      m.data.insert(m.data.end(), v.begin(), v.end());
    }
    data.query_embs.entries.emplace(query_id(q), std::move(m));
  }

  std::vector<TokenMatrix> doc_mats(cfg.n_docs);
  for (int d = 0; d < cfg.n_docs; ++d) {
    TokenMatrix& m = doc_mats[d];
    m.rows = kDocEmbTokens;
    m.cols = cfg.dim;
    for (int t = 0; t < kDocEmbTokens; ++t) {
      auto v = random_unit(emb_rng, cfg.dim);
      m.data.insert(m.data.end(), v.begin(), v.end());
    }
  }
  for (int q = 0; q < cfg.n_queries; ++q) {
    if (!semantic_signal[q]) continue;
    for (int d : rel[q]) {
      TokenMatrix& m = doc_mats[d];
      const int planted = std::min(kQueryEmbTokens, kDocEmbTokens);
      for (int t = 0; t < planted; ++t) {
        std::vector<double> v(cfg.dim);
        double sq = 0.0;
        for (int c = 0; c < cfg.dim; ++c) {
          v[c] = concepts[q][t][c] + kConceptNoise * emb_rng.normal();
          sq += v[c] * v[c];
        }
        double norm = std::sqrt(sq);
        for (int c = 0; c < cfg.dim; ++c)
          m.data[static_cast<size_t>(t) * cfg.dim + c] = v[c] / norm;
      }
    }
  }
  for (int d = 0; d < cfg.n_docs; ++d)
    data.doc_embs.entries.emplace(doc_id(d), std::move(doc_mats[d]));

  // dense run: noisy relevance oracle over the whole corpus, truncated
  Rng dense_rng(derive_seed(cfg.seed, "dense"));
  data.dense_run.tag = "dense";
  for (int q = 0; q < cfg.n_queries; ++q) {
    std::set<int> rel_set(rel[q].begin(), rel[q].end());
    std::vector<RunEntry> entries;
    entries.reserve(cfg.n_docs);
    for (int d = 0; d < cfg.n_docs; ++d) {
      int grade = 0;
      if (rel_set.count(d)) grade = (d == rel[q].front()) ? 2 : 1;
      entries.push_back({doc_id(d), grade * kDenseSignal + dense_rng.normal()});
    }
    sort_run_entries(entries);
    if (entries.size() > static_cast<size_t>(kDenseDepth)) entries.resize(kDenseDepth);
    data.dense_run.queries.emplace(query_id(q), std::move(entries));
  }

  return data;
}

void write_synthetic(const SyntheticData& data, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw data_error("cannot create " + out_dir + ": " + ec.message());
  const fs::path base(out_dir);
  write_corpus(data.corpus, (base / "corpus.tsv").string());
  write_queries(data.queries, (base / "queries.tsv").string());
  write_qrels(data.qrels, (base / "qrels.txt").string());
  write_embeddings(data.query_embs, (base / "queries.emb").string());
  write_embeddings(data.doc_embs, (base / "docs.emb").string());
  write_run(data.dense_run, (base / "dense.run").string());
}

}  // namespace lire
