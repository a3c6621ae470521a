#include "lire/corpus_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "lire/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary file I/O assumes a little-endian host");

namespace lire {
namespace {

namespace fs = std::filesystem;

std::string at_line(const std::string& path, int line_no) {
  return path + ":" + std::to_string(line_no) + ": ";
}

bool has_ascii_space(std::string_view s) {
  for (char c : s)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') return true;
  return false;
}

// whitespace-delimited fields, tabs and spaces
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// Locale-independent: decimal point only, the whole field must parse.
double parse_score(std::string_view s, const std::string& where) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    throw data_error(where + "bad score '" + std::string(s) + "'");
  return v;
}

int parse_grade(std::string_view s, const std::string& where) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw data_error(where + "bad grade '" + std::string(s) + "'");
  if (v < 0) throw data_error(where + "negative grade " + std::to_string(v));
  return v;
}

template <class Fn>
void for_each_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    fn(line, line_no);
  }
}

void check_id(std::string_view id, const std::string& where) {
  if (id.empty()) throw data_error(where + "empty id");
  if (has_ascii_space(id)) throw data_error(where + "id contains whitespace");
}

// --- little-endian primitives over an in-memory buffer ---

template <class T>
void put_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T read_le(std::istream& in, const std::string& path) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof(T))) throw data_error("truncated embedding file: " + path);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);
  std::string out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return out;
}

void write_file_atomic(const std::string& path, std::string_view bytes) {
  fs::path target(path);
  fs::path tmp(path + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw data_error("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignore;
    fs::remove(tmp, ignore);
    throw data_error("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
  }
}

// --- TSV corpus / queries ---

namespace {

std::vector<std::pair<std::string, std::string>> read_tsv(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> rows;
  std::unordered_set<std::string> seen;
  for_each_line(path, [&](const std::string& line, int n) {
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw data_error(at_line(path, n) + "expected id<TAB>text");
    std::string id = line.substr(0, tab);
    check_id(id, at_line(path, n));
    if (!seen.insert(id).second)
      throw data_error(at_line(path, n) + "duplicate id '" + id + "'");
    rows.emplace_back(std::move(id), line.substr(tab + 1));
  });
  return rows;
}

void write_tsv(const std::string& path, const std::vector<std::pair<std::string_view, std::string_view>>& rows) {
  std::string out;
  for (auto& [id, text] : rows) {
    check_id(id, path + ": ");
    if (text.find('\n') != std::string_view::npos || text.find('\t') != std::string_view::npos)
      throw data_error(path + ": text for '" + std::string(id) + "' contains a tab or newline");
    out.append(id);
    out += '\t';
    out.append(text);
    out += '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace

std::vector<Document> read_corpus(const std::string& path) {
  std::vector<Document> docs;
  for (auto& [id, text] : read_tsv(path)) docs.push_back({id, text});
  return docs;
}

std::vector<Query> read_queries(const std::string& path) {
  std::vector<Query> queries;
  for (auto& [id, text] : read_tsv(path)) queries.push_back({id, text});
  return queries;
}

void write_corpus(const std::vector<Document>& corpus, const std::string& path) {
  std::vector<std::pair<std::string_view, std::string_view>> rows;
  rows.reserve(corpus.size());
  for (auto& d : corpus) rows.emplace_back(d.doc_id, d.text);
  write_tsv(path, rows);
}

void write_queries(const std::vector<Query>& queries, const std::string& path) {
  std::vector<std::pair<std::string_view, std::string_view>> rows;
  rows.reserve(queries.size());
  for (auto& q : queries) rows.emplace_back(q.query_id, q.text);
  write_tsv(path, rows);
}

// --- qrels ---

Qrels read_qrels(const std::string& path) {
  Qrels qrels;
  for_each_line(path, [&](const std::string& line, int n) {
    auto f = split_fields(line);
    if (f.size() != 4)
      throw data_error(at_line(path, n) + "expected 4 fields, got " + std::to_string(f.size()));
    check_id(f[0], at_line(path, n));
    check_id(f[2], at_line(path, n));
    int grade = parse_grade(f[3], at_line(path, n));
    auto [it, inserted] = qrels[std::string(f[0])].emplace(std::string(f[2]), grade);
    (void)it;
    if (!inserted)
      throw data_error(at_line(path, n) + "duplicate judgment for (" + std::string(f[0]) + ", " +
                       std::string(f[2]) + ")");
  });
  return qrels;
}

void write_qrels(const Qrels& qrels, const std::string& path) {
  std::string out;
  for (auto& [qid, docs] : qrels)
    for (auto& [doc, grade] : docs) {
      out += qid;
      out += " 0 ";
      out += doc;
      out += ' ';
      out += std::to_string(grade);
      out += '\n';
    }
  write_file_atomic(path, out);
}

// --- trec runs ---

Run read_run(const std::string& path) {
  Run run;
  std::unordered_map<std::string, std::unordered_set<std::string>> seen;
  for_each_line(path, [&](const std::string& line, int n) {
    auto f = split_fields(line);
    if (f.size() != 6)
      throw data_error(at_line(path, n) + "expected 6 fields, got " + std::to_string(f.size()));
    check_id(f[0], at_line(path, n));
    check_id(f[2], at_line(path, n));
    double score = parse_score(f[4], at_line(path, n));
    std::string qid(f[0]);
    std::string doc(f[2]);
    if (!seen[qid].insert(doc).second)
      throw data_error(at_line(path, n) + "duplicate document '" + doc + "' for query '" + qid + "'");
    if (run.tag.empty()) run.tag = std::string(f[5]);
    run.queries[qid].push_back({std::move(doc), score});
  });
  for (auto& [qid, entries] : run.queries) sort_run_entries(entries);
  return run;
}

void write_run(const Run& run, const std::string& path) {
  const std::string& tag = run.tag.empty() ? "run" : run.tag;
  std::string out;
  char buf[64];
  for (auto& [qid, entries] : run.queries) {
    int rank = 1;
    for (auto& e : entries) {
      if (!std::isfinite(e.score))
        throw data_error(path + ": non-finite score for (" + qid + ", " + e.doc_id + ")");
      std::snprintf(buf, sizeof buf, "%.6f", e.score);
      out += qid;
      out += " Q0 ";
      out += e.doc_id;
      out += ' ';
      out += std::to_string(rank++);
      out += ' ';
      out += buf;
      out += ' ';
      out += tag;
      out += '\n';
    }
  }
  write_file_atomic(path, out);
}

// --- embeddings ---

EmbeddingSet read_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);

  char magic[4];
  if (!in.read(magic, 4)) throw data_error("truncated embedding file: " + path);
  if (std::memcmp(magic, "LIRE", 4) != 0) throw data_error("bad magic in " + path);

  auto version = read_le<uint32_t>(in, path);
  if (version != 1)
    throw data_error(path + ": unsupported version " + std::to_string(version));
  auto dim = read_le<uint32_t>(in, path);
  if (dim == 0) throw data_error(path + ": dimension must be positive");
  auto count = read_le<uint64_t>(in, path);

  EmbeddingSet set;
  set.dim = static_cast<int>(dim);
  for (uint64_t e = 0; e < count; ++e) {
    auto id_len = read_le<uint32_t>(in, path);
    if (id_len == 0) throw data_error(path + ": empty entry id");
    std::string id(id_len, '\0');
    if (!in.read(id.data(), id_len)) throw data_error("truncated embedding file: " + path);
    check_id(id, path + ": ");
    auto num_tokens = read_le<uint32_t>(in, path);
    if (num_tokens == 0) throw data_error(path + ": entry '" + id + "' has no tokens");

    TokenMatrix m;
    m.rows = static_cast<int>(num_tokens);
    m.cols = static_cast<int>(dim);
    m.data.resize(static_cast<size_t>(num_tokens) * dim);
    std::vector<float> raw(m.data.size());
    if (!in.read(reinterpret_cast<char*>(raw.data()),
                 static_cast<std::streamsize>(raw.size() * sizeof(float))))
      throw data_error("truncated embedding file: " + path);

    // L2-normalize each row at load time, in double
    for (uint32_t r = 0; r < num_tokens; ++r) {
      double sq = 0.0;
      for (uint32_t c = 0; c < dim; ++c) {
        double x = raw[static_cast<size_t>(r) * dim + c];
        sq += x * x;
      }
      double norm = std::sqrt(sq);
      if (!(norm > 0.0) || !std::isfinite(norm))
        throw data_error(path + ": zero-norm row " + std::to_string(r) + " in entry '" + id + "'");
      for (uint32_t c = 0; c < dim; ++c)
        m.data[static_cast<size_t>(r) * dim + c] = raw[static_cast<size_t>(r) * dim + c] / norm;
    }

    if (!set.entries.emplace(std::move(id), std::move(m)).second)
      throw data_error(path + ": duplicate entry id");
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw data_error(path + ": trailing bytes after last entry");
  return set;
}

void write_embeddings(const EmbeddingSet& set, const std::string& path) {
  if (set.dim < 1) throw data_error(path + ": dimension must be positive");
  std::string out;
  out.append("LIRE", 4);
  put_le<uint32_t>(out, 1);
  put_le<uint32_t>(out, static_cast<uint32_t>(set.dim));
  put_le<uint64_t>(out, set.entries.size());
  for (auto& [id, m] : set.entries) {
    check_id(id, path + ": ");
    if (m.cols != set.dim)
      throw data_error(path + ": entry '" + id + "' has dimension " + std::to_string(m.cols));
    if (m.rows < 1) throw data_error(path + ": entry '" + id + "' has no tokens");
    put_le<uint32_t>(out, static_cast<uint32_t>(id.size()));
    out += id;
    put_le<uint32_t>(out, static_cast<uint32_t>(m.rows));
    for (double x : m.data) put_le<float>(out, static_cast<float>(x));
  }
  write_file_atomic(path, out);
}

}  // namespace lire
