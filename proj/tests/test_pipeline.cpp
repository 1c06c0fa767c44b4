#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "comhyper/pipeline.hpp"
#include "support/fixtures.hpp"

using namespace comhyper;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Materializes the planted fixture and a matching config on disk.
struct PipelineSandbox {
  fs::path root;
  fs::path config_path;
  fixtures::PlantedFixture fx;

  explicit PipelineSandbox(const std::string& tag, std::uint64_t seed = 3) {
    root = fs::temp_directory_path() / ("comhyper_pipe_" + tag);
    fs::remove_all(root);
    fs::create_directories(root);

    fixtures::PlantedOptions opts;
    opts.categories = 4;
    opts.hyponyms_per_category = 6;
    opts.context_sentences_per_word = 6;
    fx = fixtures::make_planted_fixture(seed, opts);
    std::ofstream(root / "corpus.txt") << fx.corpus_text;

    {
      std::ofstream det(root / "detection.tsv");
      std::ofstream val(root / "validation.tsv");
      for (std::size_t i = 0; i < fx.detection.size(); ++i) {
        const auto& lp = fx.detection[i];
        auto& out = (i % 4 == 0) ? val : det;
        out << lp.hypo << '\t' << lp.hyper << '\t'
            << (lp.label ? "true" : "false") << '\t' << lp.relation << '\n';
      }
    }

    config_path = root / "pipeline.cfg";
    std::ofstream cfg(config_path);
    cfg << "[corpus]\n"
        << "path = " << (root / "corpus.txt").string() << "\n"
        << "min_count = 1\n"
        << "context_window = 6\n"
        << "context_cap = 16\n"
        << "[embeddings]\n"
        << "dimension = 10\n"
        << "window = 4\n"
        << "epochs = 2\n"
        << "[pattern]\n"
        << "method = ppmi\n"
        << "[encoder]\n"
        << "variant = w2v\n"
        << "output_dim = 6\n"
        << "[training]\n"
        << "k = 4\n"
        << "batch_size = 64\n"
        << "epochs = 10\n"
        << "learning_rate = 0.003\n"
        << "patience = 5\n"
        << "[datasets]\n"
        << "validation = detection:" << (root / "validation.tsv").string() << "\n"
        << "planted = detection:" << (root / "detection.tsv").string() << "\n"
        << "[sweep]\n"
        << "fractions = 0.9,0.4\n"
        << "seeds = 1\n"
        << "[output]\n"
        << "dir = " << (root / "out").string() << "\n"
        << "seed = 7\n";
  }

  PipelineConfig config() const {
    return load_pipeline_config(config_path.string());
  }
};

}  // namespace

TEST_CASE("parse_pipeline_config: sections, defaults, and errors") {
  auto cfg = parse_pipeline_config(
      "[corpus]\npath = a.txt\npath = b.txt\n[pattern]\nmethod = svd-count\n"
      "[training]\nk_grid = 1, 5, 9\n[output]\nseed = 42\n");
  CHECK(cfg.corpus_paths == std::vector<std::string>{"a.txt", "b.txt"});
  CHECK(cfg.pattern_method == PatternMethod::SvdCount);
  CHECK(cfg.train.k_grid == std::vector<std::size_t>{1, 5, 9});
  CHECK(cfg.seed == 42);
  CHECK(cfg.sgns.seed == 42);   // master seed fans out
  CHECK(cfg.train.seed == 42);
  CHECK(cfg.context_window == 10);  // untouched defaults
  CHECK(cfg.config_hash != 0);

  CHECK_THROWS_AS(parse_pipeline_config("[output]\ndir = x\n"), ParseError);
  CHECK_THROWS_AS(parse_pipeline_config("[corpus]\npath = a\n[bogus]\nx = 1\n"),
                  ParseError);
  CHECK_THROWS_AS(
      parse_pipeline_config("[corpus]\npath = a\n[datasets]\nfoo = nocolon\n"),
      ParseError);
}

TEST_CASE("pipeline: full command sequence produces all artifacts") {
  PipelineSandbox sandbox("full");
  auto cfg = sandbox.config();

  cmd_extract(cfg);
  auto out = fs::path(cfg.out_dir);
  CHECK(fs::exists(out / "vocab.tsv"));
  CHECK(fs::exists(out / "pairs.tsv"));
  CHECK(fs::exists(out / "extract_stats.tsv"));

  cmd_build_pattern(cfg);
  CHECK(fs::exists(out / "pattern_matrix.tsv"));

  cmd_train_encoder(cfg);
  CHECK(fs::exists(out / "encoder.ckpt"));
  CHECK(fs::exists(out / "train_log.tsv"));
  {
    std::ifstream log(out / "train_log.tsv");
    std::string header;
    std::getline(log, header);
    CHECK(header == "epoch\tmean_loss\tval_ap");
  }

  // Scoring: one IP pair, one OOP pair.
  auto queries = sandbox.root / "queries.tsv";
  {
    const auto& first = sandbox.fx.planted_pairs.begin()->first;
    std::ofstream q(queries);
    q << first.first << '\t' << first.second << '\n';
    q << sandbox.fx.oop_hyponyms[0] << '\t' << first.second << '\n';
  }
  cmd_score(cfg, queries.string());
  auto scores = slurp(out / "scores.tsv");
  CHECK(scores.find("\tIP\n") != std::string::npos);
  CHECK(scores.find("\tOOP\n") != std::string::npos);

  cmd_eval(cfg);
  CHECK(fs::exists(out / "eval_report.tsv"));
  CHECK(fs::exists(out / "eval_oop_report.tsv"));
  CHECK(slurp(out / "eval_report.tsv").find("planted") != std::string::npos);

  cmd_analyze_sparsity(cfg);
  CHECK(fs::exists(out / "sparsity_rank_freq.tsv"));
  auto summary = slurp(out / "sparsity_summary.tsv");
  CHECK(summary.find("p_oop_pair_estimate") != std::string::npos);

  cmd_reduce_pairs(cfg);
  CHECK(fs::exists(out / "sweep.tsv"));
  CHECK(fs::exists(out / "sweep_mean.tsv"));

  // The manifest recorded every command with the config hash.
  auto manifest = slurp(out / "manifest.tsv");
  for (const char* command : {"extract", "build-pattern", "train-encoder",
                              "score", "eval", "analyze-sparsity",
                              "reduce-pairs"}) {
    CHECK(manifest.find(command) != std::string::npos);
  }
  CHECK(manifest.find(std::to_string(cfg.config_hash)) != std::string::npos);
}

TEST_CASE("pipeline: missing prerequisites name the producing command") {
  PipelineSandbox sandbox("prereq");
  auto cfg = sandbox.config();
  try {
    cmd_build_pattern(cfg);
    FAIL("expected StateError");
  } catch (const StateError& e) {
    CHECK(std::string(e.what()).find("extract") != std::string::npos);
  }
  try {
    cmd_eval(cfg);
    FAIL("expected StateError");
  } catch (const StateError& e) {
    CHECK(std::string(e.what()).find("extract") != std::string::npos);
  }
}

TEST_CASE("pipeline: scoring OOP queries without an encoder is a state error") {
  PipelineSandbox sandbox("noenc");
  auto cfg = sandbox.config();
  cmd_extract(cfg);
  cmd_build_pattern(cfg);

  auto queries = sandbox.root / "queries.tsv";
  {
    const auto& first = sandbox.fx.planted_pairs.begin()->first;
    std::ofstream q(queries);
    q << sandbox.fx.oop_hyponyms[0] << '\t' << first.second << '\n';
  }
  try {
    cmd_score(cfg, queries.string());
    FAIL("expected StateError");
  } catch (const StateError& e) {
    CHECK(std::string(e.what()).find("train-encoder") != std::string::npos);
  }

  // All-IP queries are fine without an encoder.
  {
    const auto& first = sandbox.fx.planted_pairs.begin()->first;
    std::ofstream q(queries);
    q << first.first << '\t' << first.second << '\n';
  }
  CHECK_NOTHROW(cmd_score(cfg, queries.string()));
}

TEST_CASE("pipeline: svd method requires the svd model artifact") {
  PipelineSandbox sandbox("svdreq");
  auto cfg = sandbox.config();
  cfg.pattern_method = PatternMethod::SvdPpmi;
  cfg.svd_rank = 6;
  cmd_extract(cfg);
  try {
    cmd_train_encoder(cfg);
    FAIL("expected StateError");
  } catch (const StateError& e) {
    CHECK(std::string(e.what()).find("build-pattern") != std::string::npos);
  }
  cmd_build_pattern(cfg);
  CHECK(fs::exists(fs::path(cfg.out_dir) / "svd_model.tsv"));
  CHECK_NOTHROW(cmd_train_encoder(cfg));
}

TEST_CASE("pipeline: identical config and seed give byte-identical reports") {
  PipelineSandbox sandbox("det1");
  auto cfg1 = sandbox.config();
  auto run = [&](PipelineConfig cfg) {
    cmd_extract(cfg);
    cmd_build_pattern(cfg);
    cmd_train_encoder(cfg);
    cmd_eval(cfg);
    cmd_analyze_sparsity(cfg);
  };
  run(cfg1);

  auto cfg2 = cfg1;
  cfg2.out_dir = (sandbox.root / "out2").string();
  run(cfg2);

  for (const char* name : {"vocab.tsv", "pairs.tsv", "encoder.ckpt",
                           "train_log.tsv", "eval_report.tsv",
                           "eval_oop_report.tsv", "sparsity_summary.tsv"}) {
    CHECK(slurp(fs::path(cfg1.out_dir) / name) ==
          slurp(fs::path(cfg2.out_dir) / name));
  }
}
