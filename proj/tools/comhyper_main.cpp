// comhyper — hypernymy scoring that routes in-pattern queries to a
// Hearst-pattern scorer and out-of-pattern queries to a distributional
// context encoder trained against it.

#include <CLI11.hpp>
#include <iostream>

#include "comhyper/pipeline.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool has_seed = false;
};

comhyper::PipelineConfig load_config(const CommonOpts& opts) {
  auto cfg = comhyper::load_pipeline_config(opts.config_path);
  if (!opts.out_override.empty()) cfg.out_dir = opts.out_override;
  if (opts.has_seed) {
    cfg.seed = opts.seed_override;
    cfg.sgns.seed = opts.seed_override;
    cfg.train.seed = opts.seed_override;
  }
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "pipeline config file")
      ->required();
  cmd->add_option("--out", opts.out_override, "output directory override");
  cmd->add_option("--seed", opts.seed_override, "seed override")
      ->each([&](const std::string&) { opts.has_seed = true; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ComHyper hypernymy detection pipeline"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string query_file;

  auto* extract = app.add_subcommand("extract", "extract Hearst pairs from the corpus");
  add_common(extract, opts);
  auto* build = app.add_subcommand("build-pattern", "build the pattern scorer matrices");
  add_common(build, opts);
  auto* train = app.add_subcommand("train-encoder", "train the distributional encoder");
  add_common(train, opts);
  auto* score = app.add_subcommand("score", "score a TSV of word pairs");
  add_common(score, opts);
  score->add_option("--queries", query_file, "query TSV: word1<TAB>word2")->required();
  auto* eval = app.add_subcommand("eval", "run the benchmark datasets");
  add_common(eval, opts);
  auto* sparsity = app.add_subcommand("analyze-sparsity",
                                      "rank/frequency overlay and OOP rates");
  add_common(sparsity, opts);
  auto* reduce = app.add_subcommand("reduce-pairs", "reduced-pair robustness sweep");
  add_common(reduce, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = load_config(opts);
    if (extract->parsed()) comhyper::cmd_extract(cfg);
    if (build->parsed()) comhyper::cmd_build_pattern(cfg);
    if (train->parsed()) comhyper::cmd_train_encoder(cfg);
    if (score->parsed()) comhyper::cmd_score(cfg, query_file);
    if (eval->parsed()) comhyper::cmd_eval(cfg);
    if (sparsity->parsed()) comhyper::cmd_analyze_sparsity(cfg);
    if (reduce->parsed()) comhyper::cmd_reduce_pairs(cfg);
  } catch (const comhyper::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const comhyper::StateError& e) {
    std::cerr << "state error: " << e.what() << '\n';
    return 3;
  } catch (const comhyper::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
