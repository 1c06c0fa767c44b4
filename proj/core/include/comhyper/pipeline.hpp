#pragma once

#include <string>
#include <vector>

#include "comhyper/eval.hpp"

namespace comhyper {

// Parsed from a line-oriented "key = value" config with [section] headers.
struct PipelineConfig {
  // [corpus]
  std::vector<std::string> corpus_paths;
  std::string template_file;     // empty -> built-in template set
  std::uint64_t min_count = 1;
  std::size_t context_window = 10;
  std::size_t context_cap = 64;
  // [embeddings]
  std::string embedding_path;    // empty -> train in-toolkit
  SgnsConfig sgns;
  // [pattern]
  PatternMethod pattern_method = PatternMethod::SvdPpmi;
  std::size_t svd_rank = 50;
  // [encoder]
  EncoderVariant encoder_variant = EncoderVariant::W2v;
  std::size_t output_dim = 0;    // 0 -> embedding dimension
  std::string fallback_policy = "min-score";
  // [training]
  TrainConfig train;
  // [datasets]
  struct DatasetRef {
    std::string name;
    DatasetKind kind;
    std::string path;
  };
  std::vector<DatasetRef> datasets;
  // [sweep]
  std::vector<double> fractions = {0.95, 0.75, 0.55, 0.35, 0.15};
  std::vector<std::uint64_t> sweep_seeds = {1, 2, 3};
  // [output]
  std::string out_dir = "out";
  std::uint64_t seed = 1;

  std::uint64_t config_hash = 0;  // FNV-1a of the config file bytes
};

PipelineConfig load_pipeline_config(const std::string& path);
PipelineConfig parse_pipeline_config(const std::string& text);

// Each command writes its outputs under config.out_dir and appends a
// line to the run manifest. Missing prerequisites raise StateError
// naming the producing command.
void cmd_extract(const PipelineConfig& config);
void cmd_build_pattern(const PipelineConfig& config);
void cmd_train_encoder(const PipelineConfig& config);
void cmd_score(const PipelineConfig& config, const std::string& query_file);
void cmd_eval(const PipelineConfig& config);
void cmd_analyze_sparsity(const PipelineConfig& config);
void cmd_reduce_pairs(const PipelineConfig& config);

}  // namespace comhyper
