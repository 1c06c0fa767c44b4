#pragma once

#include <string>
#include <vector>

#include "comhyper/framework.hpp"
#include "comhyper/metrics.hpp"
#include "comhyper/training.hpp"

namespace comhyper {

enum class DatasetKind { Detection, Direction, Graded };
DatasetKind dataset_kind_from_string(const std::string& s);
std::string to_string(DatasetKind k);

struct LabeledPair {
  std::string hypo;
  std::string hyper;
  bool label = false;          // Detection / Direction
  double graded = 0.0;         // Graded, in [0, 10]
  std::string relation;        // optional tag
};

// TSV: word1<TAB>word2<TAB>label[<TAB>relation]. Boolean labels come from
// {true,false,1,0,hyper,other}; graded labels are decimals.
std::vector<LabeledPair> load_dataset(const std::string& path, DatasetKind kind);
void save_dataset(const std::string& path, const std::vector<LabeledPair>& pairs,
                  DatasetKind kind);

struct NamedDataset {
  std::string name;
  DatasetKind kind;
  std::vector<LabeledPair> pairs;
};

struct MetricCell {
  bool defined = false;
  double value = 0.0;
  std::string note;  // set when undefined

  static MetricCell of(double v) { return {true, v, ""}; }
  static MetricCell undefined(std::string why) { return {false, 0.0, std::move(why)}; }
};

struct DatasetReport {
  std::string name;
  DatasetKind kind;
  std::size_t total = 0;
  std::size_t evaluated = 0;   // after the oop_only restriction
  std::size_t route_ip = 0;
  std::size_t route_oop = 0;
  std::size_t route_fallback = 0;
  MetricCell metric;           // AP / accuracy / spearman by kind
  MetricCell oracle_ap;        // Detection only
};

struct EvalReport {
  bool oop_only = false;
  std::vector<DatasetReport> rows;
};

EvalReport run_benchmark(const ComHyperModel& model, const Vocabulary& vocab,
                         const std::vector<NamedDataset>& datasets,
                         bool oop_only);

void write_eval_report(const std::string& path, const EvalReport& report);

struct SweepConfig {
  PatternMethod method = PatternMethod::SvdPpmi;
  std::size_t svd_rank = 50;
  EncoderVariant variant = EncoderVariant::W2v;
  std::size_t output_dim = 0;  // 0 -> embedding dimension
  TrainConfig train;
};

struct SweepRow {
  double fraction;
  std::uint64_t seed;
  double oop_rate;
  double pattern_only_ap;  // OOP pairs pinned to the minimum score
  double comhyper_ap;
};

// Per seed, a single shuffle of the unique extracted pairs yields nested
// prefixes per fraction, so smaller fractions always have a subset V_P.
// Fractions yielding an empty pair set are skipped.
std::vector<SweepRow> reduced_pairs_experiment(
    const ExtractedPairs& full_pairs, const std::vector<double>& fractions,
    const std::vector<std::uint64_t>& seeds, const ContextStore& store,
    const EmbeddingTable& embeddings, const std::vector<QueryPair>& detection,
    const SweepConfig& config);

void write_sweep_rows(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace comhyper
