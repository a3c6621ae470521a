#pragma once

// Test-side reference implementations and small fixtures. Everything here is
// deliberately naive: the point is to disagree with the production code in
// style so that agreement in output means something.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <unistd.h>

#include "lire/bm25.hpp"
#include "lire/rng.hpp"
#include "lire/types.hpp"

namespace testutil {

// Scratch directory, removed on scope exit.
struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static int counter = 0;
    auto name = "lire_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++);
    path = std::filesystem::temp_directory_path() / name;
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// Gaussian matrix with unit-normalized rows, flattened row-major.
inline lire::TokenMatrix random_token_matrix(lire::Rng& rng, int rows, int cols) {
  lire::TokenMatrix m{rows, cols, {}};
  m.data.resize(static_cast<size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i) {
    double norm2 = 0.0;
    for (int c = 0; c < cols; ++c) {
      double v = rng.normal();
      m.data[static_cast<size_t>(i) * cols + c] = v;
      norm2 += v * v;
    }
    double norm = std::sqrt(norm2);
    if (norm < 1e-12) {  // vanishing draw: fall back to a basis vector
      for (int c = 0; c < cols; ++c) m.data[static_cast<size_t>(i) * cols + c] = c == 0 ? 1.0 : 0.0;
    } else {
      for (int c = 0; c < cols; ++c) m.data[static_cast<size_t>(i) * cols + c] /= norm;
    }
  }
  return m;
}

// Literal transcription of the sum-of-row-maxima definition.
inline double naive_maxsim(const lire::TokenMatrix& q, const lire::TokenMatrix& d) {
  double total = 0.0;
  for (int i = 0; i < q.rows; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < d.rows; ++j) {
      double dot = 0.0;
      for (int c = 0; c < q.cols; ++c)
        dot += q.data[static_cast<size_t>(i) * q.cols + c] * d.data[static_cast<size_t>(j) * d.cols + c];
      best = std::max(best, dot);
    }
    total += best;
  }
  return total;
}

// Scores every document directly from raw text with the textbook formula,
// no index structure involved.
inline std::vector<lire::RunEntry> brute_bm25(const std::vector<lire::Document>& corpus,
                                              const std::string& query_text, int k) {
  std::vector<std::vector<std::string>> doc_terms;
  doc_terms.reserve(corpus.size());
  double total_len = 0.0;
  for (const auto& doc : corpus) {
    doc_terms.push_back(lire::tokenize(doc.text));
    total_len += static_cast<double>(doc_terms.back().size());
  }
  double n_docs = static_cast<double>(corpus.size());
  double avgdl = total_len / n_docs;

  auto query_terms = lire::tokenize(query_text);
  std::vector<lire::RunEntry> scored;
  for (size_t d = 0; d < corpus.size(); ++d) {
    double score = 0.0;
    bool matched = false;
    for (const auto& term : query_terms) {
      auto tf = static_cast<double>(std::count(doc_terms[d].begin(), doc_terms[d].end(), term));
      if (tf == 0.0) continue;
      matched = true;
      double df = 0.0;
      for (const auto& other : doc_terms)
        if (std::find(other.begin(), other.end(), term) != other.end()) df += 1.0;
      double idf = std::log((n_docs - df + 0.5) / (df + 0.5) + 1.0);
      double dl = static_cast<double>(doc_terms[d].size());
      score += idf * tf * (lire::kBm25K1 + 1.0) /
               (tf + lire::kBm25K1 * (1.0 - lire::kBm25B + lire::kBm25B * dl / avgdl));
    }
    if (matched) scored.push_back({corpus[d].doc_id, score});
  }
  lire::sort_run_entries(scored);
  if (static_cast<int>(scored.size()) > k) scored.resize(static_cast<size_t>(k));
  return scored;
}

// Projects an approximately feasible coupling onto the exact marginal
// polytope: scale overfull rows down, then overfull columns, then spread the
// leftover mass rank-one. Output row/col sums match a and b exactly, so its
// cost can never undercut the true LP optimum.
inline Eigen::MatrixXd round_to_feasible(const Eigen::MatrixXd& plan, const Eigen::VectorXd& a,
                                         const Eigen::VectorXd& b) {
  Eigen::MatrixXd p = plan;
  for (int i = 0; i < p.rows(); ++i) {
    double rs = p.row(i).sum();
    if (rs > a(i)) p.row(i) *= a(i) / rs;
  }
  for (int j = 0; j < p.cols(); ++j) {
    double cs = p.col(j).sum();
    if (cs > b(j)) p.col(j) *= b(j) / cs;
  }
  Eigen::VectorXd da = a - p.rowwise().sum();
  Eigen::VectorXd db = b - p.colwise().sum().transpose();
  double mass = da.sum();
  if (mass > 0.0) p += da * db.transpose() / mass;
  return p;
}

// Exact optimal-transport cost by vertex enumeration: every basic feasible
// solution of the transportation LP lives on a spanning-tree support of
// m+n-1 cells, so trying all cell subsets of that size and peeling leaves
// recovers the optimum. Only sane for m,n <= 4 or so.
inline double lp_transport_cost(const Eigen::MatrixXd& cost, const Eigen::VectorXd& a,
                                const Eigen::VectorXd& b) {
  const int m = static_cast<int>(cost.rows());
  const int n = static_cast<int>(cost.cols());
  const int cells = m * n;
  const int basis = m + n - 1;
  double best = std::numeric_limits<double>::infinity();

  std::vector<int> pick(static_cast<size_t>(basis));
  std::vector<double> flow(static_cast<size_t>(basis));
  std::vector<char> active(static_cast<size_t>(basis));
  std::vector<double> row_rem(static_cast<size_t>(m)), col_rem(static_cast<size_t>(n));
  std::vector<int> row_deg(static_cast<size_t>(m)), col_deg(static_cast<size_t>(n));

  auto evaluate = [&]() {
    std::fill(active.begin(), active.end(), char(1));
    for (int i = 0; i < m; ++i) {
      row_rem[static_cast<size_t>(i)] = a(i);
      row_deg[static_cast<size_t>(i)] = 0;
    }
    for (int j = 0; j < n; ++j) {
      col_rem[static_cast<size_t>(j)] = b(j);
      col_deg[static_cast<size_t>(j)] = 0;
    }
    for (int e = 0; e < basis; ++e) {
      ++row_deg[static_cast<size_t>(pick[static_cast<size_t>(e)] / n)];
      ++col_deg[static_cast<size_t>(pick[static_cast<size_t>(e)] % n)];
    }
    for (int step = 0; step < basis; ++step) {
      int leaf = -1;
      for (int e = 0; e < basis && leaf < 0; ++e) {
        if (!active[static_cast<size_t>(e)]) continue;
        int i = pick[static_cast<size_t>(e)] / n, j = pick[static_cast<size_t>(e)] % n;
        if (row_deg[static_cast<size_t>(i)] == 1 || col_deg[static_cast<size_t>(j)] == 1) leaf = e;
      }
      if (leaf < 0) return;  // support has a cycle: not a vertex
      int i = pick[static_cast<size_t>(leaf)] / n, j = pick[static_cast<size_t>(leaf)] % n;
      double f = row_deg[static_cast<size_t>(i)] == 1 ? row_rem[static_cast<size_t>(i)]
                                                      : col_rem[static_cast<size_t>(j)];
      flow[static_cast<size_t>(leaf)] = f;
      row_rem[static_cast<size_t>(i)] -= f;
      col_rem[static_cast<size_t>(j)] -= f;
      --row_deg[static_cast<size_t>(i)];
      --col_deg[static_cast<size_t>(j)];
      active[static_cast<size_t>(leaf)] = 0;
    }
    double total = 0.0;
    for (int e = 0; e < basis; ++e) {
      if (flow[static_cast<size_t>(e)] < -1e-9) return;  // negative flow: infeasible vertex
      total += flow[static_cast<size_t>(e)] *
               cost(pick[static_cast<size_t>(e)] / n, pick[static_cast<size_t>(e)] % n);
    }
    for (int i = 0; i < m; ++i)
      if (std::abs(row_rem[static_cast<size_t>(i)]) > 1e-9) return;
    for (int j = 0; j < n; ++j)
      if (std::abs(col_rem[static_cast<size_t>(j)]) > 1e-9) return;
    best = std::min(best, total);
  };

  std::function<void(int, int)> descend = [&](int start, int chosen) {
    if (chosen == basis) {
      evaluate();
      return;
    }
    for (int c = start; c <= cells - (basis - chosen); ++c) {
      pick[static_cast<size_t>(chosen)] = c;
      descend(c + 1, chosen + 1);
    }
  };
  descend(0, 0);
  return best;
}

// Order of doc ids in one query's list.
inline std::vector<std::string> doc_order(const std::vector<lire::RunEntry>& entries) {
  std::vector<std::string> ids;
  ids.reserve(entries.size());
  for (const auto& e : entries) ids.push_back(e.doc_id);
  return ids;
}

}  // namespace testutil
