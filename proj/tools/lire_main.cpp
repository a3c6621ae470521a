#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lire/bm25.hpp"
#include "lire/corpus_io.hpp"
#include "lire/errors.hpp"
#include "lire/fusion.hpp"
#include "lire/late_interaction.hpp"
#include "lire/lce.hpp"
#include "lire/metrics.hpp"
#include "lire/ot.hpp"
#include "lire/pipeline.hpp"
#include "lire/synthetic.hpp"
#include "lire/types.hpp"

using namespace lire;

namespace {

std::string pick(const std::string& flag, const std::string& from_config) {
  return flag.empty() ? from_config : flag;
}

// "ndcg@10" / "recall@100"
std::pair<std::string, int> parse_metric(const std::string& metric) {
  auto at = metric.find('@');
  std::string name = metric.substr(0, at);
  if (at == std::string::npos || (name != "ndcg" && name != "recall"))
    throw config_error("eval: metric must be ndcg@K or recall@K, got '" + metric + "'");
  try {
    size_t used = 0;
    int k = std::stoi(metric.substr(at + 1), &used);
    if (used != metric.size() - at - 1 || k < 1) throw std::invalid_argument("k");
    return {name, k};
  } catch (const std::exception&) {
    throw config_error("eval: bad metric cutoff in '" + metric + "'");
  }
}

void print_metric_report(const MetricReport& rep, const std::string& out_path) {
  std::string text;
  char buf[160];
  for (auto& [qid, value] : rep.per_query) {
    std::snprintf(buf, sizeof buf, "%s\t%.6f\n", qid.c_str(), value);
    text += buf;
  }
  std::snprintf(buf, sizeof buf, "ALL\t%.6f\n", rep.aggregate);
  text += buf;
  std::snprintf(buf, sizeof buf,
                "# evaluated=%d skipped=%d (queries without positive judgments are skipped)\n",
                rep.evaluated, rep.skipped);
  text += buf;
  std::fputs(text.c_str(), stdout);
  if (!out_path.empty()) write_file_atomic(out_path, text);
}

// two embedding files with matching ids, paired in id order
std::vector<std::pair<std::string, BitextPair>> pair_embeddings(const EmbeddingSet& teacher,
                                                                const EmbeddingSet& student) {
  if (teacher.dim != student.dim)
    throw data_error("teacher and student dimensions differ (" + std::to_string(teacher.dim) +
                     " vs " + std::to_string(student.dim) + ")");
  if (teacher.entries.size() != student.entries.size())
    throw data_error("teacher and student entry counts differ");
  std::vector<std::pair<std::string, BitextPair>> pairs;
  pairs.reserve(teacher.entries.size());
  for (auto& [id, tm] : teacher.entries) {
    auto it = student.entries.find(id);
    if (it == student.entries.end()) throw data_error("student file is missing id '" + id + "'");
    pairs.emplace_back(id, BitextPair{tm, it->second});
  }
  return pairs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-stage multilingual retrieval pipeline: BM25/hybrid first stage, maxsim "
               "re-ranking, run fusion, evaluation, and embedding alignment tools"};
  app.require_subcommand(1);

  uint64_t seed = 0;
  std::string config_path;
  std::string out_dir;
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomized subcommands");
  app.add_option("--config", config_path, "key=value file supplying default paths and parameters");
  app.add_option("--out-dir", out_dir, "output directory (gen-synthetic, pipeline)");

  PipelineConfig defaults;  // from --config; explicit flags win
  app.parse_complete_callback([&] {
    if (!config_path.empty()) defaults = load_pipeline_config(config_path);
  });

  // --- index ---
  auto* cmd_index = app.add_subcommand("index", "build the lexical index and print statistics");
  cmd_index->fallthrough();
  std::string index_corpus;
  cmd_index->add_option("--corpus", index_corpus, "corpus TSV");
  cmd_index->callback([&] {
    LexicalIndex index = build_index(read_corpus(pick(index_corpus, defaults.corpus)));
    size_t n_postings = 0;
    for (auto& [term, plist] : index.postings) n_postings += plist.size();
    std::printf("documents: %d\n", index.doc_count());
    std::printf("terms: %zu\n", index.postings.size());
    std::printf("postings: %zu\n", n_postings);
    std::printf("avg_doc_length: %.4f\n", index.avg_doc_length);
  });

  // --- search ---
  auto* cmd_search = app.add_subcommand("search", "BM25 top-k over a corpus");
  cmd_search->fallthrough();
  std::string search_corpus, search_queries, search_out, search_tag;
  int search_k = 1000;
  cmd_search->add_option("--corpus", search_corpus, "corpus TSV");
  cmd_search->add_option("--queries", search_queries, "queries TSV");
  cmd_search->add_option("--k", search_k, "results per query");
  cmd_search->add_option("--out", search_out, "output run file")->required();
  cmd_search->add_option("--tag", search_tag, "run tag (default bm25)");
  cmd_search->callback([&] {
    LexicalIndex index = build_index(read_corpus(pick(search_corpus, defaults.corpus)));
    Run run = bm25_search_all(index, read_queries(pick(search_queries, defaults.queries)), search_k);
    if (!search_tag.empty()) run.tag = search_tag;
    write_run(run, search_out);
  });

  // --- hybrid ---
  auto* cmd_hybrid = app.add_subcommand("hybrid", "min-max normalized sum of two runs");
  cmd_hybrid->fallthrough();
  std::string hybrid_lexical, hybrid_dense, hybrid_out;
  int hybrid_k = 1000;
  cmd_hybrid->add_option("--lexical", hybrid_lexical, "lexical run file")->required();
  cmd_hybrid->add_option("--dense", hybrid_dense, "dense run file")->required();
  cmd_hybrid->add_option("--k", hybrid_k, "results per query");
  cmd_hybrid->add_option("--out", hybrid_out, "output run file")->required();
  cmd_hybrid->callback([&] {
    write_run(hybrid_combine(read_run(hybrid_lexical), read_run(hybrid_dense), hybrid_k),
              hybrid_out);
  });

  // --- rerank ---
  auto* cmd_rerank = app.add_subcommand("rerank", "maxsim re-ranking of first-stage results");
  cmd_rerank->fallthrough();
  std::string rerank_run, rerank_qemb, rerank_demb, rerank_out;
  int rerank_depth = kRerankDepth;
  cmd_rerank->add_option("--run", rerank_run, "first-stage run file")->required();
  cmd_rerank->add_option("--query-embeddings", rerank_qemb, "query embedding file");
  cmd_rerank->add_option("--doc-embeddings", rerank_demb, "document embedding file");
  cmd_rerank->add_option("--depth", rerank_depth, "entries re-scored per query");
  cmd_rerank->add_option("--out", rerank_out, "output run file")->required();
  cmd_rerank->callback([&] {
    Run out = rerank(read_run(rerank_run),
                     read_embeddings(pick(rerank_qemb, defaults.query_embeddings)),
                     read_embeddings(pick(rerank_demb, defaults.doc_embeddings)), rerank_depth);
    write_run(out, rerank_out);
  });

  // --- fuse ---
  auto* cmd_fuse = app.add_subcommand("fuse", "weighted fusion of runs");
  cmd_fuse->fallthrough();
  std::vector<std::string> fuse_runs;
  std::string fuse_weights, fuse_weights_file, fuse_out, fuse_tag = "fusion";
  int fuse_k = 1000;
  cmd_fuse->add_option("--run", fuse_runs, "input run file (repeatable)")->required();
  cmd_fuse->add_option("--weights", fuse_weights, "comma-separated weights, one per run");
  cmd_fuse->add_option("--weights-file", fuse_weights_file, "run_tag<TAB>weight file");
  cmd_fuse->add_option("--k", fuse_k, "results per query");
  cmd_fuse->add_option("--tag", fuse_tag, "output run tag");
  cmd_fuse->add_option("--out", fuse_out, "output run file")->required();
  cmd_fuse->callback([&] {
    if (fuse_weights.empty() == fuse_weights_file.empty())
      throw config_error("fuse: provide exactly one of --weights or --weights-file");
    FusionWeights w;
    if (!fuse_weights.empty()) w.weights = parse_weight_list(fuse_weights);
    else w = read_weights(fuse_weights_file);
    std::vector<Run> runs;
    runs.reserve(fuse_runs.size());
    for (auto& path : fuse_runs) runs.push_back(read_run(path));
    write_run(fuse(runs, w, fuse_k, fuse_tag), fuse_out);
  });

  // --- tune-weights ---
  auto* cmd_tune = app.add_subcommand("tune-weights", "grid search fusion weights on qrels");
  cmd_tune->fallthrough();
  std::vector<std::string> tune_runs;
  std::string tune_qrels, tune_out;
  double tune_step = 0.1;
  cmd_tune->add_option("--run", tune_runs, "input run file (repeatable)")->required();
  cmd_tune->add_option("--qrels", tune_qrels, "qrels file");
  cmd_tune->add_option("--grid-step", tune_step, "simplex grid step");
  cmd_tune->add_option("--out", tune_out, "output weights file")->required();
  cmd_tune->callback([&] {
    std::vector<Run> runs;
    std::vector<std::string> tags;
    for (auto& path : tune_runs) {
      runs.push_back(read_run(path));
      tags.push_back(runs.back().tag);
    }
    Qrels qrels = read_qrels(pick(tune_qrels, defaults.qrels));
    FusionWeights best = tune_weights(runs, qrels, tune_step);
    write_weights(tags, best, tune_out);
    Run fused = fuse(runs, best, std::numeric_limits<int>::max(), "tune");
    double score = ndcg_at_k(fused, qrels, 10).aggregate;
    for (size_t i = 0; i < tags.size(); ++i)
      std::printf("%s\t%.6f\n", tags[i].c_str(), best.weights[i]);
    std::printf("mean_ndcg@10\t%.6f\n", score);
  });

  // --- eval ---
  auto* cmd_eval = app.add_subcommand("eval", "score a run against qrels");
  cmd_eval->fallthrough();
  std::string eval_run, eval_qrels, eval_metric = "ndcg@10", eval_out;
  cmd_eval->add_option("--run", eval_run, "run file")->required();
  cmd_eval->add_option("--qrels", eval_qrels, "qrels file");
  cmd_eval->add_option("--metric", eval_metric, "ndcg@K or recall@K");
  cmd_eval->add_option("--out", eval_out, "also write the report here");
  cmd_eval->callback([&] {
    auto [name, k] = parse_metric(eval_metric);
    Run run = read_run(eval_run);
    Qrels qrels = read_qrels(pick(eval_qrels, defaults.qrels));
    MetricReport rep = name == "ndcg" ? ndcg_at_k(run, qrels, k) : recall_at_k(run, qrels, k);
    print_metric_report(rep, eval_out);
  });

  // --- sample-groups ---
  auto* cmd_groups = app.add_subcommand("sample-groups", "contrastive groups from a first stage");
  cmd_groups->fallthrough();
  std::string groups_run, groups_qrels, groups_out;
  int groups_nneg = kDefaultNegatives;
  cmd_groups->add_option("--run", groups_run, "first-stage run file")->required();
  cmd_groups->add_option("--qrels", groups_qrels, "qrels file");
  cmd_groups->add_option("--n-neg", groups_nneg, "negatives per group");
  cmd_groups->add_option("--out", groups_out, "output TSV")->required();
  cmd_groups->callback([&] {
    GroupSample sample = sample_groups(read_run(groups_run),
                                       read_qrels(pick(groups_qrels, defaults.qrels)),
                                       groups_nneg, seed);
    std::string text;
    for (auto& g : sample.groups) {
      text += g.query_id;
      text += '\t';
      text += g.positive_doc;
      text += '\t';
      for (size_t i = 0; i < g.negatives.size(); ++i) {
        if (i) text += ',';
        text += g.negatives[i].first;
      }
      text += '\n';
    }
    write_file_atomic(groups_out, text);
    std::printf("groups=%zu used_queries=%d skipped_queries=%d\n", sample.groups.size(),
                sample.used_queries, sample.skipped_queries);
  });

  // --- lce ---
  auto* cmd_lce = app.add_subcommand("lce", "loss and gradients for score groups");
  cmd_lce->fallthrough();
  std::string lce_scores;
  cmd_lce->add_option("--scores", lce_scores, "TSV: positive<TAB>neg1,neg2,... per line")
      ->required();
  cmd_lce->callback([&] {
    std::string content = read_file(lce_scores);
    size_t pos = 0;
    int line_no = 0, groups = 0;
    double total = 0.0;
    while (pos < content.size()) {
      size_t end = content.find('\n', pos);
      if (end == std::string::npos) end = content.size();
      std::string line = content.substr(pos, end - pos);
      pos = end + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos)
        throw data_error(lce_scores + ":" + std::to_string(line_no) +
                         ": expected positive<TAB>negatives");
      double positive = parse_weight_list(line.substr(0, tab)).front();
      std::vector<double> negatives = parse_weight_list(line.substr(tab + 1));
      double loss = lce_loss(positive, negatives);
      LceGradient grad = lce_grad(positive, negatives);
      total += loss;
      ++groups;
      std::printf("loss=%.9g d_pos=%.9g d_neg=", loss, grad.d_positive);
      for (size_t i = 0; i < grad.d_negatives.size(); ++i)
        std::printf(i ? ",%.9g" : "%.9g", grad.d_negatives[i]);
      std::printf("\n");
    }
    if (groups == 0) throw data_error(lce_scores + ": no score groups");
    std::printf("mean_loss=%.9g\n", total / groups);
  });

  // --- align ---
  auto* cmd_align = app.add_subcommand("align", "transport alignment loss between embeddings");
  cmd_align->fallthrough();
  std::string align_teacher, align_student, align_plan_out;
  double align_epsilon = kSinkhornEpsilon;
  cmd_align->add_option("--teacher", align_teacher, "teacher embedding file")->required();
  cmd_align->add_option("--student", align_student, "student embedding file")->required();
  cmd_align->add_option("--epsilon", align_epsilon, "entropic regularization");
  cmd_align->add_option("--plan-out", align_plan_out, "dump transport plans as TSV");
  cmd_align->callback([&] {
    auto pairs = pair_embeddings(read_embeddings(align_teacher), read_embeddings(align_student));
    std::string plans;
    char buf[64];
    double total = 0.0;
    for (auto& [id, pair] : pairs) {
      AlignmentResult res = alignment_loss(pair.teacher, pair.student, align_epsilon);
      total += res.loss;
      std::printf("%s\t%.9g\t%d\n", id.c_str(), res.loss, res.plan.iterations);
      if (!align_plan_out.empty()) {
        plans += "# " + id + "\n";
        const auto& p = res.plan.plan;
        for (Eigen::Index r = 0; r < p.rows(); ++r) {
          for (Eigen::Index c = 0; c < p.cols(); ++c) {
            std::snprintf(buf, sizeof buf, c ? "\t%.9g" : "%.9g", p(r, c));
            plans += buf;
          }
          plans += '\n';
        }
      }
    }
    std::printf("ALL\t%.9g\n", total / static_cast<double>(pairs.size()));
    if (!align_plan_out.empty()) write_file_atomic(align_plan_out, plans);
  });

  // --- distill ---
  auto* cmd_distill = app.add_subcommand("distill", "train a linear projection on bitext pairs");
  cmd_distill->fallthrough();
  std::string distill_teacher, distill_student, distill_out, distill_trace;
  double distill_lr = 0.1, distill_epsilon = kSinkhornEpsilon;
  int distill_epochs = 100;
  cmd_distill->add_option("--teacher", distill_teacher, "teacher embedding file")->required();
  cmd_distill->add_option("--student", distill_student, "student embedding file")->required();
  cmd_distill->add_option("--lr", distill_lr, "learning rate");
  cmd_distill->add_option("--epochs", distill_epochs, "training epochs");
  cmd_distill->add_option("--epsilon", distill_epsilon, "entropic regularization");
  cmd_distill->add_option("--out", distill_out, "output projection file")->required();
  cmd_distill->add_option("--trace", distill_trace, "loss-trace CSV");
  cmd_distill->callback([&] {
    auto named = pair_embeddings(read_embeddings(distill_teacher),
                                 read_embeddings(distill_student));
    std::vector<BitextPair> pairs;
    pairs.reserve(named.size());
    for (auto& [id, pair] : named) pairs.push_back(std::move(pair));
    ProjectionStudent student =
        distill_projection(pairs, distill_lr, distill_epochs, distill_epsilon, seed);
    write_projection(student.W, distill_out);
    if (!distill_trace.empty()) {
      std::string csv = "epoch,mean_loss\n";
      char buf[64];
      for (size_t e = 0; e < student.loss_trace.size(); ++e) {
        std::snprintf(buf, sizeof buf, "%zu,%.12g\n", e + 1, student.loss_trace[e]);
        csv += buf;
      }
      write_file_atomic(distill_trace, csv);
    }
    std::printf("pairs=%zu epochs=%d initial_loss=%.9g final_loss=%.9g\n", pairs.size(),
                student.epochs, student.loss_trace.front(), student.loss_trace.back());
  });

  // --- gen-synthetic ---
  auto* cmd_gen = app.add_subcommand("gen-synthetic", "deterministic benchmark dataset");
  cmd_gen->fallthrough();
  SyntheticConfig gen_cfg;
  cmd_gen->add_option("--n-queries", gen_cfg.n_queries, "number of queries");
  cmd_gen->add_option("--n-docs", gen_cfg.n_docs, "number of documents");
  cmd_gen->add_option("--dim", gen_cfg.dim, "embedding dimension");
  cmd_gen->callback([&] {
    if (out_dir.empty()) throw config_error("gen-synthetic: --out-dir is required");
    if (seed_opt->count() > 0) gen_cfg.seed = seed;
    write_synthetic(gen_synthetic(gen_cfg), out_dir);
    std::printf("wrote corpus.tsv queries.tsv qrels.txt queries.emb docs.emb dense.run to %s\n",
                out_dir.c_str());
  });

  // --- pipeline ---
  auto* cmd_pipe = app.add_subcommand("pipeline", "first stage, rerank, fusion, evaluation");
  cmd_pipe->fallthrough();
  PipelineConfig flags;
  std::string pipe_weights;
  auto* o_corpus = cmd_pipe->add_option("--corpus", flags.corpus, "corpus TSV");
  auto* o_queries = cmd_pipe->add_option("--queries", flags.queries, "queries TSV");
  auto* o_qrels = cmd_pipe->add_option("--qrels", flags.qrels, "qrels file");
  auto* o_dense = cmd_pipe->add_option("--dense-run", flags.dense_run, "external dense run");
  auto* o_qemb =
      cmd_pipe->add_option("--query-embeddings", flags.query_embeddings, "query embedding file");
  auto* o_demb =
      cmd_pipe->add_option("--doc-embeddings", flags.doc_embeddings, "document embedding file");
  auto* o_fsk = cmd_pipe->add_option("--first-stage-k", flags.first_stage_k, "first-stage depth");
  auto* o_depth = cmd_pipe->add_option("--depth", flags.depth, "rerank depth");
  auto* o_fk = cmd_pipe->add_option("--fusion-k", flags.fusion_k, "fused list depth");
  auto* o_nk = cmd_pipe->add_option("--ndcg-k", flags.ndcg_k, "nDCG cutoff");
  auto* o_rk = cmd_pipe->add_option("--recall-k", flags.recall_k, "recall cutoff");
  auto* o_step = cmd_pipe->add_option("--grid-step", flags.grid_step, "weight tuning grid step");
  auto* o_weights =
      cmd_pipe->add_option("--weights", pipe_weights, "fusion weights (default: tuned on qrels)");
  cmd_pipe->callback([&] {
    PipelineConfig cfg = defaults;  // from --config, flags win
    if (o_corpus->count()) cfg.corpus = flags.corpus;
    if (o_queries->count()) cfg.queries = flags.queries;
    if (o_qrels->count()) cfg.qrels = flags.qrels;
    if (o_dense->count()) cfg.dense_run = flags.dense_run;
    if (o_qemb->count()) cfg.query_embeddings = flags.query_embeddings;
    if (o_demb->count()) cfg.doc_embeddings = flags.doc_embeddings;
    if (o_fsk->count()) cfg.first_stage_k = flags.first_stage_k;
    if (o_depth->count()) cfg.depth = flags.depth;
    if (o_fk->count()) cfg.fusion_k = flags.fusion_k;
    if (o_nk->count()) cfg.ndcg_k = flags.ndcg_k;
    if (o_rk->count()) cfg.recall_k = flags.recall_k;
    if (o_step->count()) cfg.grid_step = flags.grid_step;
    if (o_weights->count()) cfg.weights = parse_weight_list(pipe_weights);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed_opt->count()) cfg.seed = seed;

    PipelineResult result = run_pipeline(cfg);
    std::printf("%-8s %10s %12s\n", "run", "ndcg", "recall");
    for (auto& row : result.rows)
      std::printf("%-8s %10.4f %12.4f\n", row.name.c_str(), row.ndcg, row.recall);
    std::printf("weights:");
    for (size_t i = 0; i < result.tags.size(); ++i)
      std::printf(" %s=%.2f", result.tags[i].c_str(), result.weights.weights[i]);
    std::printf("%s\n", result.weights_tuned ? " (tuned)" : "");
    std::printf("report: %s\n", result.report_path.c_str());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
