#include "lire/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lire/bm25.hpp"
#include "lire/corpus_io.hpp"
#include "lire/errors.hpp"
#include "lire/late_interaction.hpp"
#include "lire/metrics.hpp"

namespace lire {
namespace {

namespace fs = std::filesystem;

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

int parse_config_int(const std::string& value, const std::string& key) {
  int v = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || p != value.data() + value.size())
    throw config_error("config: bad integer for " + key + ": '" + value + "'");
  return v;
}

double parse_config_double(const std::string& value, const std::string& key) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || p != value.data() + value.size() || !std::isfinite(v))
    throw config_error("config: bad number for " + key + ": '" + value + "'");
  return v;
}

// Stage errors keep their category so the exit code survives, but gain a
// stage label for the report.
template <class Fn>
auto run_stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const config_error& e) {
    throw config_error("[" + name + "] " + e.what());
  } catch (const numeric_error& e) {
    throw numeric_error("[" + name + "] " + e.what());
  } catch (const data_error& e) {
    throw data_error("[" + name + "] " + e.what());
  } catch (const std::exception& e) {
    throw data_error("[" + name + "] " + e.what());
  }
}

}  // namespace

std::vector<double> parse_weight_list(const std::string& text) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    std::string field = trim(text.substr(pos, comma - pos));
    if (field.empty()) throw config_error("empty weight in '" + text + "'");
    out.push_back(parse_config_double(field, "weights"));
    pos = comma + 1;
  }
  return out;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config: " + path);
  PipelineConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw config_error(path + ":" + std::to_string(line_no) + ": expected key=value");
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));

    if (key == "corpus") cfg.corpus = value;
    else if (key == "queries") cfg.queries = value;
    else if (key == "qrels") cfg.qrels = value;
    else if (key == "dense_run") cfg.dense_run = value;
    else if (key == "query_embeddings") cfg.query_embeddings = value;
    else if (key == "doc_embeddings") cfg.doc_embeddings = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "first_stage_k") cfg.first_stage_k = parse_config_int(value, key);
    else if (key == "depth") cfg.depth = parse_config_int(value, key);
    else if (key == "fusion_k") cfg.fusion_k = parse_config_int(value, key);
    else if (key == "ndcg_k") cfg.ndcg_k = parse_config_int(value, key);
    else if (key == "recall_k") cfg.recall_k = parse_config_int(value, key);
    else if (key == "grid_step") cfg.grid_step = parse_config_double(value, key);
    else if (key == "weights") cfg.weights = parse_weight_list(value);
    else if (key == "seed") cfg.seed = static_cast<uint64_t>(parse_config_int(value, key));
    else throw config_error(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return cfg;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  // fail on configuration before any computation
  struct Required {
    const char* name;
    const std::string& value;
  };
  const Required required[] = {
      {"corpus", cfg.corpus},           {"queries", cfg.queries},
      {"qrels", cfg.qrels},             {"query_embeddings", cfg.query_embeddings},
      {"doc_embeddings", cfg.doc_embeddings}, {"out_dir", cfg.out_dir},
  };
  for (auto& r : required)
    if (r.value.empty()) throw config_error(std::string("pipeline: missing ") + r.name);
  const std::string input_paths[] = {cfg.corpus, cfg.queries, cfg.qrels, cfg.query_embeddings,
                                     cfg.doc_embeddings, cfg.dense_run};
  for (auto& p : input_paths)
    if (!p.empty() && !fs::exists(p)) throw config_error("pipeline: missing path " + p);
  if (cfg.first_stage_k < 1 || cfg.depth < 1 || cfg.fusion_k < 1 || cfg.ndcg_k < 1 ||
      cfg.recall_k < 1)
    throw config_error("pipeline: k parameters and depth must be >= 1");

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw config_error("pipeline: cannot create " + cfg.out_dir + ": " + ec.message());
  const fs::path out(cfg.out_dir);

  auto corpus = run_stage("load", [&] { return read_corpus(cfg.corpus); });
  auto queries = run_stage("load", [&] { return read_queries(cfg.queries); });
  auto qrels = run_stage("load", [&] { return read_qrels(cfg.qrels); });
  auto query_embs = run_stage("load", [&] { return read_embeddings(cfg.query_embeddings); });
  auto doc_embs = run_stage("load", [&] { return read_embeddings(cfg.doc_embeddings); });

  const bool has_dense = !cfg.dense_run.empty();
  Run dense;
  if (has_dense) dense = run_stage("load", [&] { return read_run(cfg.dense_run); });

  // every stage writes its run, then downstream stages consume the re-read
  // file, so partial re-runs from the written artifacts agree with this one
  const std::string bm25_path = (out / "bm25.run").string();
  Run bm25 = run_stage("bm25", [&] {
    LexicalIndex index = build_index(corpus);
    Run run = bm25_search_all(index, queries, cfg.first_stage_k);
    write_run(run, bm25_path);
    return read_run(bm25_path);
  });

  const std::string hybrid_path = (out / "hybrid.run").string();
  Run hybrid = run_stage("hybrid", [&] {
    Run run = hybrid_combine(bm25, has_dense ? dense : Run{"dense", {}}, cfg.first_stage_k);
    write_run(run, hybrid_path);
    return read_run(hybrid_path);
  });

  const std::string maxsim_path = (out / "maxsim.run").string();
  Run maxsim = run_stage("rerank", [&] {
    Run run = rerank(hybrid, query_embs, doc_embs, cfg.depth);
    write_run(run, maxsim_path);
    return read_run(maxsim_path);
  });

  PipelineResult result;
  const std::string fusion_path = (out / "fusion.run").string();
  Run fused = run_stage("fuse", [&] {
    std::vector<Run> inputs{hybrid, maxsim};
    result.tags = {"hybrid", "maxsim"};
    if (has_dense) {
      inputs.push_back(dense);
      result.tags.push_back("dense");
    }
    if (cfg.weights) {
      result.weights.weights = *cfg.weights;
      result.weights.validate(inputs.size());
    } else {
      result.weights = tune_weights(inputs, qrels, cfg.grid_step);
      result.weights_tuned = true;
    }
    write_weights(result.tags, result.weights, (out / "weights.tsv").string());
    Run run = fuse(inputs, result.weights, cfg.fusion_k);
    write_run(run, fusion_path);
    return read_run(fusion_path);
  });

  run_stage("eval", [&] {
    std::vector<std::pair<std::string, const Run*>> stages{{"bm25", &bm25}};
    if (has_dense) stages.emplace_back("dense", &dense);
    stages.emplace_back("hybrid", &hybrid);
    stages.emplace_back("maxsim", &maxsim);
    stages.emplace_back("fusion", &fused);

    std::string report;
    char buf[160];
    std::snprintf(buf, sizeof buf, "run\tndcg@%d\trecall@%d\n", cfg.ndcg_k, cfg.recall_k);
    report += buf;
    for (auto& [name, run] : stages) {
      MetricReport nd = ndcg_at_k(*run, qrels, cfg.ndcg_k);
      MetricReport rc = recall_at_k(*run, qrels, cfg.recall_k);
      result.rows.push_back({name, nd.aggregate, rc.aggregate, nd.evaluated, nd.skipped});
      std::snprintf(buf, sizeof buf, "%s\t%.6f\t%.6f\n", name.c_str(), nd.aggregate,
                    rc.aggregate);
      report += buf;
    }
    if (!result.rows.empty()) {
      std::snprintf(buf, sizeof buf,
                    "# evaluated=%d skipped=%d (queries without positive judgments are skipped)\n",
                    result.rows.front().evaluated, result.rows.front().skipped);
      report += buf;
    }
    result.report_path = (out / "report.tsv").string();
    write_file_atomic(result.report_path, report);
    return 0;
  });

  return result;
}

}  // namespace lire
