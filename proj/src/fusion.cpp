#include "lire/fusion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <unordered_map>

#include "lire/corpus_io.hpp"
#include "lire/errors.hpp"
#include "lire/metrics.hpp"

namespace lire {

void FusionWeights::validate(size_t n_runs) const {
  if (weights.size() != n_runs)
    throw config_error("fusion: " + std::to_string(weights.size()) + " weights for " +
                       std::to_string(n_runs) + " runs");
  bool any_positive = false;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0)
      throw config_error("fusion: weights must be finite and non-negative");
    if (w > 0.0) any_positive = true;
  }
  if (!any_positive) throw config_error("fusion: at least one weight must be positive");
}

std::vector<double> min_max_normalize(const std::vector<double>& scores) {
  if (scores.empty()) throw data_error("min_max_normalize: empty score list");
  auto [mn_it, mx_it] = std::minmax_element(scores.begin(), scores.end());
  const double mn = *mn_it, mx = *mx_it;
  std::vector<double> out(scores.size());
  if (mx == mn) {
    std::fill(out.begin(), out.end(), 1.0);
    return out;
  }
  const double range = mx - mn;
  for (size_t i = 0; i < scores.size(); ++i) out[i] = (scores[i] - mn) / range;
  return out;
}

Run fuse(const std::vector<Run>& runs, const FusionWeights& weights, int k,
         const std::string& tag) {
  if (runs.empty()) throw config_error("fuse: empty run list");
  weights.validate(runs.size());
  if (k < 1) throw config_error("fuse: k must be >= 1");

  std::set<std::string> qids;
  for (auto& r : runs)
    for (auto& [qid, entries] : r.queries) qids.insert(qid);

  Run out;
  out.tag = tag;
  std::vector<double> scores;
  for (auto& qid : qids) {
    std::unordered_map<std::string, double> acc;
    for (size_t r = 0; r < runs.size(); ++r) {
      auto it = runs[r].queries.find(qid);
      if (it == runs[r].queries.end() || it->second.empty()) continue;
      scores.clear();
      scores.reserve(it->second.size());
      for (auto& e : it->second) scores.push_back(e.score);
      auto normalized = min_max_normalize(scores);
      for (size_t i = 0; i < normalized.size(); ++i)
        acc[it->second[i].doc_id] += weights.weights[r] * normalized[i];
    }
    auto& entries = out.queries[qid];
    entries.reserve(acc.size());
    for (auto& [doc, score] : acc) entries.push_back({doc, score});
    sort_run_entries(entries);
    if (entries.size() > static_cast<size_t>(k)) entries.resize(k);
  }
  return out;
}

FusionWeights tune_weights(const std::vector<Run>& runs, const Qrels& qrels,
                           double grid_step) {
  if (runs.size() < 2) throw config_error("tune_weights: need at least 2 runs");
  if (!(grid_step > 0.0) || grid_step > 1.0)
    throw config_error("tune_weights: grid_step must be in (0, 1]");
  const long long cells = std::llround(1.0 / grid_step);
  if (std::abs(cells * grid_step - 1.0) > 1e-9)
    throw config_error("tune_weights: grid_step must divide 1 evenly");

  FusionWeights best;
  double best_score = -1.0;
  std::vector<int> units(runs.size(), 0);

  // Compositions of `cells` over the runs, enumerated lexicographically
  // ascending, so the first candidate reaching the maximum is the
  // lexicographically smallest.
  std::function<void(size_t, int)> enumerate = [&](size_t i, int remaining) {
    if (i + 1 == units.size()) {
      units[i] = remaining;
      FusionWeights cand;
      cand.weights.resize(units.size());
      for (size_t j = 0; j < units.size(); ++j) cand.weights[j] = units[j] * grid_step;
      Run fused = fuse(runs, cand, std::numeric_limits<int>::max(), "tune");
      double score = ndcg_at_k(fused, qrels, 10).aggregate;
      if (score > best_score) {
        best_score = score;
        best = cand;
      }
      return;
    }
    for (int u = 0; u <= remaining; ++u) {
      units[i] = u;
      enumerate(i + 1, remaining - u);
    }
  };
  enumerate(0, static_cast<int>(cells));
  return best;
}

void write_weights(const std::vector<std::string>& tags, const FusionWeights& weights,
                   const std::string& path) {
  if (tags.size() != weights.weights.size())
    throw config_error("write_weights: " + std::to_string(tags.size()) + " tags for " +
                       std::to_string(weights.weights.size()) + " weights");
  std::string out;
  char buf[64];
  for (size_t i = 0; i < tags.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f", weights.weights[i]);
    out += tags[i];
    out += '\t';
    out += buf;
    out += '\n';
  }
  write_file_atomic(path, out);
}

FusionWeights read_weights(const std::string& path) {
  FusionWeights w;
  std::string content = read_file(path);
  size_t pos = 0;
  int line_no = 0;
  while (pos < content.size()) {
    size_t end = content.find('\n', pos);
    if (end == std::string::npos) end = content.size();
    std::string_view line(content.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw data_error(path + ":" + std::to_string(line_no) + ": expected tag<TAB>weight");
    std::string_view field = line.substr(tab + 1);
    double v = 0.0;
    auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || p != field.data() + field.size() || !std::isfinite(v))
      throw data_error(path + ":" + std::to_string(line_no) + ": bad weight '" +
                       std::string(field) + "'");
    w.weights.push_back(v);
  }
  if (w.weights.empty()) throw data_error(path + ": no weights");
  return w;
}

}  // namespace lire
