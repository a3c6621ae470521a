#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lire/fusion.hpp"

namespace lire {

struct PipelineConfig {
  std::string corpus;
  std::string queries;
  std::string qrels;
  std::string dense_run;  // optional external first-stage run
  std::string query_embeddings;
  std::string doc_embeddings;
  std::string out_dir;
  int first_stage_k = 1000;
  int depth = 100;  // rerank depth
  int fusion_k = 1000;
  int ndcg_k = 10;
  int recall_k = 100;
  double grid_step = 0.1;
  std::optional<std::vector<double>> weights;  // absent: tune on qrels
  uint64_t seed = 0;
};

// Flat key=value file, '#' comments, unknown keys are config errors.
PipelineConfig load_pipeline_config(const std::string& path);

// comma-separated weights, e.g. "0.5,0.3,0.2"
std::vector<double> parse_weight_list(const std::string& text);

struct StageMetrics {
  std::string name;
  double ndcg = 0.0;
  double recall = 0.0;
  int evaluated = 0;
  int skipped = 0;
};

struct PipelineResult {
  std::vector<StageMetrics> rows;   // one per written run, pipeline order
  std::vector<std::string> tags;    // fusion input tags
  FusionWeights weights;            // fusion weights actually used
  bool weights_tuned = false;
  std::string report_path;
};

// index -> bm25 -> hybrid -> maxsim rerank -> fusion -> eval. Each stage
// writes its run file under out_dir and downstream stages re-read those
// files, so re-running any stage from the written artifacts reproduces the
// same report. All required paths are checked before any work happens.
PipelineResult run_pipeline(const PipelineConfig& cfg);

}  // namespace lire
