#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "lire/bm25.hpp"
#include "lire/errors.hpp"
#include "lire/rng.hpp"
#include "oracles.hpp"

using namespace lire;

TEST_CASE("tokenize lowercases and strips punctuation") {
  CHECK(tokenize("The cat, the CAT.") == std::vector<std::string>{"the", "cat", "the", "cat"});
  CHECK(tokenize("Hello,   WORLD!!!") == std::vector<std::string>{"hello", "world"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("...!?;") == std::vector<std::string>{});
}

TEST_CASE("tokenize keeps diacritics and folds accented capitals") {
  CHECK(tokenize("été été") == std::vector<std::string>{"été", "été"});
  CHECK(tokenize("ÉTÉ") == std::vector<std::string>{"été"});
}

TEST_CASE("tokenize handles non-latin scripts") {
  CHECK(tokenize("Москва") == std::vector<std::string>{"москва"});
  CHECK(tokenize("ΑΘΗΝΑ αθηνα") == std::vector<std::string>{"αθηνα", "αθηνα"});
  // CJK punctuation splits; ideographs are not segmented further
  CHECK(tokenize("日本、語") == std::vector<std::string>{"日本", "語"});
}

TEST_CASE("tokenize treats odd whitespace and bad bytes as separators") {
  CHECK(tokenize("foo\xC2\xA0" "bar") == std::vector<std::string>{"foo", "bar"});  // NBSP
  CHECK(tokenize("a\xFF" "b") == std::vector<std::string>{"a", "b"});              // stray byte
  CHECK(tokenize("x7y9") == std::vector<std::string>{"x7y9"});                     // digits stay
}

TEST_CASE("build_index counts the hand example") {
  auto index = build_index({{"d1", "a b"}, {"d2", "a"}});
  CHECK(index.doc_count() == 2);
  CHECK(index.avg_doc_length == doctest::Approx(1.5));
  REQUIRE(index.postings.count("a") == 1);
  REQUIRE(index.postings.count("b") == 1);
  const auto& pa = index.postings.at("a");
  REQUIRE(pa.size() == 2);
  CHECK(pa[0].doc == 0);
  CHECK(pa[0].tf == 1);
  CHECK(pa[1].doc == 1);
  const auto& pb = index.postings.at("b");
  REQUIRE(pb.size() == 1);
  CHECK(pb[0].doc == 0);
  CHECK(index.doc_lengths == std::vector<int>{2, 1});
}

TEST_CASE("build_index keeps avg length consistent with doc lengths") {
  auto index = build_index({{"d1", "one two three"}, {"d2", "four"}, {"d3", "five six"}});
  double total = 0;
  for (int len : index.doc_lengths) total += len;
  CHECK(index.avg_doc_length == doctest::Approx(total / index.doc_count()).epsilon(1e-12));
}

TEST_CASE("build_index rejects bad corpora") {
  CHECK_THROWS_AS(build_index({}), data_error);
  CHECK_THROWS_AS(build_index({{"d1", "a"}, {"d1", "b"}}), data_error);
  CHECK_THROWS_AS(build_index({{"d1", "..."}, {"d2", "!!"}}), data_error);
}

TEST_CASE("a zero-length document is tolerated alongside real ones") {
  auto index = build_index({{"d1", "a"}, {"d2", "..."}});
  CHECK(index.doc_count() == 2);
  CHECK(index.doc_lengths[1] == 0);
}

TEST_CASE("bm25 hand-derived two-doc score") {
  auto index = build_index({{"d1", "a b"}, {"d2", "a"}});
  Run run = bm25_search(index, {"q1", "b"}, 10);
  REQUIRE(run.queries.at("q1").size() == 1);
  CHECK(run.queries.at("q1")[0].doc_id == "d1");
  // idf = ln 2; tf=1, |d|=2, avgdl=1.5 -> ln2 * 1.9 / 2.02
  double expected = std::log(2.0) * 1.9 / 2.02;
  CHECK(run.queries.at("q1")[0].score == doctest::Approx(expected).epsilon(1e-12));
  CHECK(run.queries.at("q1")[0].score == doctest::Approx(0.6520).epsilon(2e-4));
}

TEST_CASE("bm25 ignores absent terms and returns empty for all-absent queries") {
  auto index = build_index({{"d1", "a b"}, {"d2", "a"}});
  CHECK(bm25_search(index, {"q1", "zz yy"}, 10).queries.at("q1").empty());
  CHECK(bm25_search(index, {"q1", ""}, 10).queries.at("q1").empty());

  Run with = bm25_search(index, {"q1", "b zz"}, 10);
  Run without = bm25_search(index, {"q1", "b"}, 10);
  REQUIRE(with.queries.at("q1").size() == without.queries.at("q1").size());
  CHECK(with.queries.at("q1")[0].score ==
        doctest::Approx(without.queries.at("q1")[0].score).epsilon(1e-12));
}

TEST_CASE("bm25 treats the query as a multiset") {
  auto index = build_index({{"d1", "a b"}, {"d2", "a"}});
  double once = bm25_search(index, {"q", "b"}, 10).queries.at("q")[0].score;
  double twice = bm25_search(index, {"q", "b b"}, 10).queries.at("q")[0].score;
  CHECK(twice == doctest::Approx(2.0 * once).epsilon(1e-12));
}

TEST_CASE("bm25 k handling") {
  auto index = build_index({{"d1", "a b"}, {"d2", "a c"}, {"d3", "a d"}});
  CHECK(bm25_search(index, {"q", "a"}, 2).queries.at("q").size() == 2);
  CHECK(bm25_search(index, {"q", "a"}, 99).queries.at("q").size() == 3);
  CHECK_THROWS_AS(bm25_search(index, {"q", "a"}, 0), config_error);
}

TEST_CASE("bm25 equal scores tie-break by doc id") {
  // identical docs score identically
  auto index = build_index({{"dz", "a"}, {"da", "a"}, {"dm", "a"}});
  Run run = bm25_search(index, {"q", "a"}, 10);
  CHECK(testutil::doc_order(run.queries.at("q")) == std::vector<std::string>{"da", "dm", "dz"});
}

TEST_CASE("bm25 scores are non-negative even for terms in every doc") {
  auto index = build_index({{"d1", "a"}, {"d2", "a"}, {"d3", "a"}});
  for (const auto& e : bm25_search(index, {"q", "a"}, 10).queries.at("q")) CHECK(e.score > 0.0);
}

TEST_CASE("bm25 matches brute force on a seeded corpus") {
  Rng rng(99);
  std::vector<Document> corpus;
  for (int d = 0; d < 200; ++d) {
    std::string text;
    int len = 3 + static_cast<int>(rng.bounded(10));
    for (int t = 0; t < len; ++t) {
      if (t) text += ' ';
      text += "w" + std::to_string(rng.bounded(50));
    }
    corpus.push_back({"d" + std::to_string(1000 + d), text});
  }
  auto index = build_index(corpus);
  for (int q = 0; q < 10; ++q) {
    std::string text = "w" + std::to_string(rng.bounded(50)) + " w" + std::to_string(rng.bounded(50)) +
                       " w" + std::to_string(rng.bounded(50));
    auto got = bm25_search(index, {"q", text}, 200).queries.at("q");
    auto want = testutil::brute_bm25(corpus, text, 200);
    REQUIRE(got.size() == want.size());
    for (size_t i = 0; i < want.size(); ++i) {
      CHECK(got[i].doc_id == want[i].doc_id);
      CHECK(got[i].score == doctest::Approx(want[i].score).epsilon(1e-9));
    }
  }
}

TEST_CASE("bm25_search_all covers every query and rejects duplicates") {
  auto index = build_index({{"d1", "a b"}, {"d2", "c"}});
  Run run = bm25_search_all(index, {{"q1", "a"}, {"q2", "c"}, {"q3", "zz"}}, 10);
  CHECK(run.queries.size() == 3);
  CHECK(run.queries.at("q3").empty());
  CHECK_THROWS_AS(bm25_search_all(index, {{"q1", "a"}, {"q1", "b"}}, 10), data_error);
}

TEST_CASE("hybrid hand example") {
  Run lex;
  lex.tag = "bm25";
  lex.queries["q"] = {{"d1", 2.0}, {"d2", 1.0}};
  Run dense;
  dense.tag = "dense";
  dense.queries["q"] = {{"d2", 9.0}, {"d3", 1.0}};
  Run out = hybrid_combine(lex, dense, 100);
  auto entries = out.queries.at("q");
  CHECK(testutil::doc_order(entries) == std::vector<std::string>{"d1", "d2", "d3"});
  CHECK(entries[0].score == doctest::Approx(1.0));
  CHECK(entries[1].score == doctest::Approx(1.0));
  CHECK(entries[2].score == doctest::Approx(0.0));
}

TEST_CASE("hybrid with an empty dense run keeps the lexical ordering") {
  Run lex;
  lex.tag = "bm25";
  lex.queries["q"] = {{"d1", 5.0}, {"d3", 4.0}, {"d2", 1.0}};
  Run dense;
  dense.tag = "dense";
  Run out = hybrid_combine(lex, dense, 100);
  CHECK(testutil::doc_order(out.queries.at("q")) == testutil::doc_order(lex.queries.at("q")));
}

TEST_CASE("hybrid is symmetric in its inputs") {
  Rng rng(5);
  Run a, b;
  a.tag = "a";
  b.tag = "b";
  for (int q = 0; q < 4; ++q) {
    std::vector<RunEntry> ea, eb;
    for (int d = 0; d < 20; ++d) {
      if (rng.uniform() < 0.7) ea.push_back({"d" + std::to_string(d), rng.uniform()});
      if (rng.uniform() < 0.7) eb.push_back({"d" + std::to_string(d), rng.uniform()});
    }
    sort_run_entries(ea);
    sort_run_entries(eb);
    a.queries["q" + std::to_string(q)] = ea;
    b.queries["q" + std::to_string(q)] = eb;
  }
  Run ab = hybrid_combine(a, b, 50);
  Run ba = hybrid_combine(b, a, 50);
  REQUIRE(ab.queries.size() == ba.queries.size());
  for (const auto& [qid, entries] : ab.queries)
    CHECK(testutil::doc_order(entries) == testutil::doc_order(ba.queries.at(qid)));
}

TEST_CASE("hybrid of identical runs doubles scores, same ordering") {
  Run lex;
  lex.tag = "x";
  lex.queries["q"] = {{"d1", 3.0}, {"d2", 2.0}, {"d3", 1.0}};
  Run out = hybrid_combine(lex, lex, 100);
  CHECK(testutil::doc_order(out.queries.at("q")) == std::vector<std::string>{"d1", "d2", "d3"});
  CHECK(out.queries.at("q")[0].score == doctest::Approx(2.0));
  CHECK(out.queries.at("q")[2].score == doctest::Approx(0.0));
}

TEST_CASE("query union: a query present in only one run still appears") {
  Run lex;
  lex.tag = "x";
  lex.queries["q1"] = {{"d1", 1.0}};
  Run dense;
  dense.tag = "y";
  dense.queries["q2"] = {{"d2", 1.0}};
  Run out = hybrid_combine(lex, dense, 10);
  CHECK(out.queries.count("q1") == 1);
  CHECK(out.queries.count("q2") == 1);
}

TEST_CASE("fixed-index scoring is insensitive to unmatched documents") {
  // same index, so idf/avgdl fixed; a doc with no query terms cannot move others
  auto index = build_index({{"d1", "a a b"}, {"d2", "a b"}, {"d3", "zz"}});
  Run run = bm25_search(index, {"q", "a b"}, 10);
  auto order = testutil::doc_order(run.queries.at("q"));
  CHECK(order == std::vector<std::string>{"d1", "d2"});
}
