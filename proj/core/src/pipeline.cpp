#include "comhyper/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace comhyper {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::istringstream in(s);
  std::string part;
  while (std::getline(in, part, sep)) {
    part = trim(part);
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& text) {
  PipelineConfig cfg;
  cfg.config_hash = fnv1a(text);
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("config line " + std::to_string(lineno) +
                       ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    auto fail = [&]() -> ParseError {
      return ParseError("config line " + std::to_string(lineno) +
                        ": unknown key '" + key + "' in section [" + section + "]");
    };
    try {
      if (section == "corpus") {
        if (key == "path") cfg.corpus_paths.push_back(value);
        else if (key == "templates") cfg.template_file = value;
        else if (key == "min_count") cfg.min_count = std::stoull(value);
        else if (key == "context_window") cfg.context_window = std::stoul(value);
        else if (key == "context_cap") cfg.context_cap = std::stoul(value);
        else throw fail();
      } else if (section == "embeddings") {
        if (key == "path") cfg.embedding_path = value;
        else if (key == "dimension") cfg.sgns.dimension = std::stoul(value);
        else if (key == "window") cfg.sgns.window = std::stoul(value);
        else if (key == "negatives") cfg.sgns.negatives = std::stoul(value);
        else if (key == "epochs") cfg.sgns.epochs = std::stoul(value);
        else if (key == "learning_rate") cfg.sgns.learning_rate = std::stod(value);
        else throw fail();
      } else if (section == "pattern") {
        if (key == "method") cfg.pattern_method = pattern_method_from_string(value);
        else if (key == "svd_rank") cfg.svd_rank = std::stoul(value);
        else throw fail();
      } else if (section == "encoder") {
        if (key == "variant") cfg.encoder_variant = encoder_variant_from_string(value);
        else if (key == "output_dim") cfg.output_dim = std::stoul(value);
        else if (key == "fallback") cfg.fallback_policy = value;
        else throw fail();
      } else if (section == "training") {
        if (key == "k") cfg.train.k = std::stoul(value);
        else if (key == "batch_size") cfg.train.batch_size = std::stoul(value);
        else if (key == "learning_rate") cfg.train.learning_rate = std::stod(value);
        else if (key == "epochs") cfg.train.epochs = std::stoul(value);
        else if (key == "optimizer") cfg.train.optimizer = optimizer_from_string(value);
        else if (key == "patience") cfg.train.patience = std::stoul(value);
        else if (key == "k_grid") {
          cfg.train.k_grid.clear();
          for (const auto& p : split(value, ',')) {
            cfg.train.k_grid.push_back(std::stoul(p));
          }
        } else throw fail();
      } else if (section == "datasets") {
        std::size_t colon = value.find(':');
        if (colon == std::string::npos) {
          throw ParseError("config line " + std::to_string(lineno) +
                           ": dataset value must be kind:path");
        }
        PipelineConfig::DatasetRef ref;
        ref.name = key;
        ref.kind = dataset_kind_from_string(trim(value.substr(0, colon)));
        ref.path = trim(value.substr(colon + 1));
        cfg.datasets.push_back(std::move(ref));
      } else if (section == "sweep") {
        if (key == "fractions") {
          cfg.fractions.clear();
          for (const auto& p : split(value, ',')) cfg.fractions.push_back(std::stod(p));
        } else if (key == "seeds") {
          cfg.sweep_seeds.clear();
          for (const auto& p : split(value, ',')) {
            cfg.sweep_seeds.push_back(std::stoull(p));
          }
        } else throw fail();
      } else if (section == "output") {
        if (key == "dir") cfg.out_dir = value;
        else if (key == "seed") cfg.seed = std::stoull(value);
        else throw fail();
      } else {
        throw ParseError("config line " + std::to_string(lineno) +
                         ": unknown section [" + section + "]");
      }
    } catch (const std::invalid_argument&) {
      throw ParseError("config line " + std::to_string(lineno) +
                       ": bad value '" + value + "' for key '" + key + "'");
    }
  }
  if (cfg.corpus_paths.empty()) throw ParseError("config: no corpus path given");
  // One master seed fans out to every stage.
  cfg.sgns.seed = cfg.seed;
  cfg.train.seed = cfg.seed;
  return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_pipeline_config(buf.str());
}

namespace {

std::string artifact(const PipelineConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void append_manifest(const PipelineConfig& cfg, const std::string& command) {
  fs::create_directories(cfg.out_dir);
  std::ofstream out(artifact(cfg, "manifest.tsv"), std::ios::app);
  out << command << '\t' << cfg.config_hash << '\t' << cfg.seed << '\n';
}

void require_artifact(const PipelineConfig& cfg, const std::string& name,
                      const std::string& producing_command) {
  if (!fs::exists(artifact(cfg, name))) {
    throw StateError("missing artifact '" + name + "' under " + cfg.out_dir +
                     "; run `comhyper " + producing_command + "` first");
  }
}

Corpus load_configured_corpus(const PipelineConfig& cfg) {
  Corpus corpus;
  for (const auto& path : cfg.corpus_paths) {
    Corpus part = load_corpus(path);
    corpus.sentences.insert(corpus.sentences.end(), part.sentences.begin(),
                            part.sentences.end());
  }
  return corpus;
}

void save_vocabulary(const std::string& path, const Vocabulary& vocab) {
  std::ofstream out(path);
  for (WordId w = 0; w < vocab.size(); ++w) {
    out << vocab.surfaces[w] << '\t' << vocab.counts[w] << '\n';
  }
}

Vocabulary load_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open vocabulary: " + path);
  Vocabulary vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("bad vocabulary line: " + line);
    std::string word = line.substr(0, tab);
    vocab.index.emplace(word, static_cast<WordId>(vocab.surfaces.size()));
    vocab.surfaces.push_back(word);
    vocab.counts.push_back(std::stoull(line.substr(tab + 1)));
  }
  return vocab;
}

std::vector<PatternTemplate> configured_templates(const PipelineConfig& cfg) {
  if (cfg.template_file.empty()) return default_templates();
  return parse_template_file(cfg.template_file);
}

// Builds contexts and embeddings on first use; later commands reload the
// persisted copies so every stage sees identical values.
void ensure_corpus_artifacts(const PipelineConfig& cfg, const Vocabulary& vocab) {
  if (!fs::exists(artifact(cfg, "contexts.tsv"))) {
    Corpus corpus = load_configured_corpus(cfg);
    ContextStore store = collect_contexts(corpus, vocab, cfg.context_window,
                                          cfg.context_cap, cfg.seed);
    save_context_store(artifact(cfg, "contexts.tsv"), store, vocab);
  }
  if (!fs::exists(artifact(cfg, "embeddings.txt"))) {
    if (!cfg.embedding_path.empty()) {
      LoadedEmbeddings loaded = load_embeddings(cfg.embedding_path, vocab);
      save_embeddings(artifact(cfg, "embeddings.txt"), loaded.table, vocab);
    } else {
      Corpus corpus = load_configured_corpus(cfg);
      EmbeddingTable table = train_sgns(corpus, vocab, cfg.sgns);
      save_embeddings(artifact(cfg, "embeddings.txt"), table, vocab);
    }
  }
}

PatternScorer build_scorer(const PipelineConfig& cfg, const ExtractedPairs& pairs) {
  if (cfg.pattern_method == PatternMethod::SvdCount ||
      cfg.pattern_method == PatternMethod::SvdPpmi) {
    require_artifact(cfg, "svd_model.tsv", "build-pattern");
    PatternMethod stored_method;
    SvdModel model = load_svd_model(artifact(cfg, "svd_model.tsv"), &stored_method);
    if (stored_method != cfg.pattern_method) {
      throw StateError("stored svd model was built with method " +
                       to_string(stored_method) + ", config wants " +
                       to_string(cfg.pattern_method) +
                       "; rerun `comhyper build-pattern`");
    }
    return PatternScorer(cfg.pattern_method, pairs, std::move(model));
  }
  return PatternScorer(cfg.pattern_method, pairs);
}

std::vector<QueryPair> resolve_detection_pairs(const std::vector<LabeledPair>& pairs,
                                               const Vocabulary& vocab) {
  std::vector<QueryPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back({vocab.id(p.hypo), vocab.id(p.hyper), p.label});
  }
  return out;
}

}  // namespace

void cmd_extract(const PipelineConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  Corpus corpus = load_configured_corpus(cfg);
  Vocabulary vocab = build_vocabulary(corpus, cfg.min_count);
  save_vocabulary(artifact(cfg, "vocab.tsv"), vocab);

  ExtractedPairs pairs = extract_pairs(corpus, configured_templates(cfg), vocab);
  save_pairs(artifact(cfg, "pairs.tsv"), pairs, vocab);

  std::ofstream stats(artifact(cfg, "extract_stats.tsv"));
  stats << "sentences\t" << corpus.sentences.size() << '\n'
        << "vocabulary\t" << vocab.size() << '\n'
        << "pair_tokens\t" << pairs.total_weight << '\n'
        << "pair_types\t" << pairs.weights.size() << '\n'
        << "ip_words\t" << pairs.in_pattern_vocab.size() << '\n';
  append_manifest(cfg, "extract");
}

void cmd_build_pattern(const PipelineConfig& cfg) {
  require_artifact(cfg, "vocab.tsv", "extract");
  require_artifact(cfg, "pairs.tsv", "extract");
  Vocabulary vocab = load_vocabulary(artifact(cfg, "vocab.tsv"));
  ExtractedPairs pairs = load_pairs(artifact(cfg, "pairs.tsv"), vocab);
  PatternIndex index = PatternIndex::from_pairs(pairs);

  SparsePairMatrix matrix = (cfg.pattern_method == PatternMethod::Count ||
                             cfg.pattern_method == PatternMethod::SvdCount)
                                ? build_count_matrix(pairs, index)
                                : build_ppmi(pairs, index);
  {
    std::ofstream out(artifact(cfg, "pattern_matrix.tsv"));
    out << "kind\t" << (matrix.kind == MatrixKind::Count ? "count" : "ppmi")
        << "\tdim\t" << matrix.dim << '\n';
    for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
      for (const auto& [j, v] : matrix.rows[i]) {
        out << vocab.surfaces[index.ip_words[i]] << '\t'
            << vocab.surfaces[index.ip_words[j]] << '\t' << format_real(v) << '\n';
      }
    }
  }
  if (cfg.pattern_method == PatternMethod::SvdCount ||
      cfg.pattern_method == PatternMethod::SvdPpmi) {
    std::size_t r = std::min(cfg.svd_rank, matrix.dim);
    SvdModel model = truncated_svd(matrix, r, cfg.seed);
    save_svd_model(artifact(cfg, "svd_model.tsv"), model, cfg.pattern_method);
  }
  append_manifest(cfg, "build-pattern");
}

void cmd_train_encoder(const PipelineConfig& cfg) {
  require_artifact(cfg, "vocab.tsv", "extract");
  require_artifact(cfg, "pairs.tsv", "extract");
  Vocabulary vocab = load_vocabulary(artifact(cfg, "vocab.tsv"));
  ExtractedPairs pairs = load_pairs(artifact(cfg, "pairs.tsv"), vocab);
  PatternScorer scorer = build_scorer(cfg, pairs);
  ensure_corpus_artifacts(cfg, vocab);
  ContextStore store = load_context_store(artifact(cfg, "contexts.tsv"), vocab);
  LoadedEmbeddings emb = load_embeddings(artifact(cfg, "embeddings.txt"), vocab);

  std::size_t out_dim = cfg.output_dim == 0 ? emb.table.dimension : cfg.output_dim;
  EncoderPair initial = init_encoder_pair(cfg.encoder_variant, emb.table.dimension,
                                          out_dim, cfg.seed);

  // A dataset named "validation" drives early stopping when present.
  std::vector<ValidationPair> validation;
  for (const auto& ref : cfg.datasets) {
    if (ref.name != "validation" || ref.kind != DatasetKind::Detection) continue;
    for (const auto& q : resolve_detection_pairs(load_dataset(ref.path, ref.kind),
                                                 vocab)) {
      if (q.hypo != kNoWord && q.hyper != kNoWord) {
        validation.push_back({q.hypo, q.hyper, q.positive});
      }
    }
  }

  TrainResult result = train(initial, pairs, scorer, store, emb.table, cfg.train,
                             validation.empty() ? nullptr : &validation);
  save_encoder_pair(artifact(cfg, "encoder.ckpt"), result.encoder);

  std::ofstream log(artifact(cfg, "train_log.tsv"));
  log << "epoch\tmean_loss\tval_ap\n";
  for (std::size_t e = 0; e < result.loss_history.size(); ++e) {
    log << e << '\t' << format_real(result.loss_history[e]) << '\t';
    if (e < result.val_ap_history.size()) {
      log << format_real(result.val_ap_history[e]);
    } else {
      log << "n/a";
    }
    log << '\n';
  }
  append_manifest(cfg, "train-encoder");
}

void cmd_score(const PipelineConfig& cfg, const std::string& query_file) {
  require_artifact(cfg, "vocab.tsv", "extract");
  require_artifact(cfg, "pairs.tsv", "extract");
  Vocabulary vocab = load_vocabulary(artifact(cfg, "vocab.tsv"));
  ExtractedPairs pairs = load_pairs(artifact(cfg, "pairs.tsv"), vocab);
  PatternScorer scorer = build_scorer(cfg, pairs);

  std::ifstream in(query_file);
  if (!in) throw ParseError("cannot open query file: " + query_file);
  std::vector<std::pair<std::string, std::string>> queries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError("query line " + std::to_string(lineno) +
                       ": expected word1<TAB>word2");
    }
    queries.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }

  std::vector<std::pair<WordId, WordId>> ids;
  bool any_oop = false;
  for (const auto& [w1, w2] : queries) {
    WordId a = vocab.id(w1), b = vocab.id(w2);
    ids.emplace_back(a, b);
    if (classify_query(a, b, pairs) == QueryClass::OOP) any_oop = true;
  }
  if (any_oop && !fs::exists(artifact(cfg, "encoder.ckpt"))) {
    throw StateError("query file contains OOP pairs but no trained encoder "
                     "exists; run `comhyper train-encoder` first");
  }

  ensure_corpus_artifacts(cfg, vocab);
  ContextStore store = load_context_store(artifact(cfg, "contexts.tsv"), vocab);
  LoadedEmbeddings emb = load_embeddings(artifact(cfg, "embeddings.txt"), vocab);
  std::size_t out_dim = cfg.output_dim == 0 ? emb.table.dimension : cfg.output_dim;
  EncoderPair encoder =
      fs::exists(artifact(cfg, "encoder.ckpt"))
          ? load_encoder_pair(artifact(cfg, "encoder.ckpt"))
          : init_encoder_pair(cfg.encoder_variant, emb.table.dimension, out_dim,
                              cfg.seed);
  ComHyperModel model =
      assemble_model(scorer, std::move(encoder), pairs, store, emb.table,
                     fallback_policy_from_string(cfg.fallback_policy));

  auto scored = score_batch(model, ids);
  std::ofstream out(artifact(cfg, "scores.tsv"));
  for (std::size_t i = 0; i < scored.size(); ++i) {
    out << queries[i].first << '\t' << queries[i].second << '\t'
        << format_real(scored[i].score) << '\t' << to_string(scored[i].route)
        << '\n';
  }
  append_manifest(cfg, "score");
}

void cmd_eval(const PipelineConfig& cfg) {
  require_artifact(cfg, "vocab.tsv", "extract");
  require_artifact(cfg, "pairs.tsv", "extract");
  require_artifact(cfg, "encoder.ckpt", "train-encoder");
  Vocabulary vocab = load_vocabulary(artifact(cfg, "vocab.tsv"));
  ExtractedPairs pairs = load_pairs(artifact(cfg, "pairs.tsv"), vocab);
  PatternScorer scorer = build_scorer(cfg, pairs);
  ensure_corpus_artifacts(cfg, vocab);
  ContextStore store = load_context_store(artifact(cfg, "contexts.tsv"), vocab);
  LoadedEmbeddings emb = load_embeddings(artifact(cfg, "embeddings.txt"), vocab);
  ComHyperModel model = assemble_model(
      scorer, load_encoder_pair(artifact(cfg, "encoder.ckpt")), pairs, store,
      emb.table, fallback_policy_from_string(cfg.fallback_policy));

  std::vector<NamedDataset> datasets;
  for (const auto& ref : cfg.datasets) {
    if (ref.name == "validation") continue;
    datasets.push_back({ref.name, ref.kind, load_dataset(ref.path, ref.kind)});
  }
  if (datasets.empty()) throw StateError("config lists no evaluation datasets");

  write_eval_report(artifact(cfg, "eval_report.tsv"),
                    run_benchmark(model, vocab, datasets, /*oop_only=*/false));
  write_eval_report(artifact(cfg, "eval_oop_report.tsv"),
                    run_benchmark(model, vocab, datasets, /*oop_only=*/true));
  append_manifest(cfg, "eval");
}

void cmd_analyze_sparsity(const PipelineConfig& cfg) {
  require_artifact(cfg, "vocab.tsv", "extract");
  require_artifact(cfg, "pairs.tsv", "extract");
  Vocabulary vocab = load_vocabulary(artifact(cfg, "vocab.tsv"));
  ExtractedPairs pairs = load_pairs(artifact(cfg, "pairs.tsv"), vocab);

  std::vector<WordId> all(vocab.size());
  for (WordId w = 0; w < vocab.size(); ++w) all[w] = w;
  auto full_table = frequency_rank_table(vocab, all);
  auto ip_table = frequency_rank_table(vocab, pairs.ip_words_sorted());
  {
    std::ofstream out(artifact(cfg, "sparsity_rank_freq.tsv"));
    out << "set\trank\tfrequency\n";
    for (const auto& row : full_table) {
      out << "all\t" << row.rank << '\t' << row.frequency << '\n';
    }
    for (const auto& row : ip_table) {
      out << "ip\t" << row.rank << '\t' << row.frequency << '\n';
    }
  }

  double p_oop_word = log_log_uncovered_area_ratio(full_table, ip_table);
  double p_oop_pair = estimate_oop_pair_probability(p_oop_word);

  std::ofstream out(artifact(cfg, "sparsity_summary.tsv"));
  out << "p_oop_word\t" << format_real(p_oop_word) << '\n'
      << "p_oop_pair_estimate\t" << format_real(p_oop_pair) << '\n';
  out << "dataset\toop_hyper\toop_all\ttotal\toop_rate\n";
  for (const auto& ref : cfg.datasets) {
    auto loaded = load_dataset(ref.path, ref.kind);
    std::vector<QueryPair> resolved = resolve_detection_pairs(loaded, vocab);
    OopRateStats stats = oop_rate(resolved, pairs);
    out << ref.name << '\t';
    if (ref.kind == DatasetKind::Graded) {
      out << "n/a";  // graded labels carry no boolean hypernymy flag
    } else {
      out << stats.oop_positive;
    }
    out << '\t' << stats.oop_all << '\t' << stats.total << '\t'
        << format_real(stats.rate) << '\n';
  }
  append_manifest(cfg, "analyze-sparsity");
}

void cmd_reduce_pairs(const PipelineConfig& cfg) {
  require_artifact(cfg, "vocab.tsv", "extract");
  require_artifact(cfg, "pairs.tsv", "extract");
  Vocabulary vocab = load_vocabulary(artifact(cfg, "vocab.tsv"));
  ExtractedPairs pairs = load_pairs(artifact(cfg, "pairs.tsv"), vocab);
  ensure_corpus_artifacts(cfg, vocab);
  ContextStore store = load_context_store(artifact(cfg, "contexts.tsv"), vocab);
  LoadedEmbeddings emb = load_embeddings(artifact(cfg, "embeddings.txt"), vocab);

  const PipelineConfig::DatasetRef* detection_ref = nullptr;
  for (const auto& ref : cfg.datasets) {
    if (ref.kind == DatasetKind::Detection && ref.name != "validation") {
      detection_ref = &ref;
      break;
    }
  }
  if (detection_ref == nullptr) {
    throw StateError("reduce-pairs needs a detection dataset in the config");
  }
  std::vector<QueryPair> detection = resolve_detection_pairs(
      load_dataset(detection_ref->path, detection_ref->kind), vocab);

  SweepConfig sweep;
  sweep.method = cfg.pattern_method;
  sweep.svd_rank = cfg.svd_rank;
  sweep.variant = cfg.encoder_variant;
  sweep.output_dim = cfg.output_dim;
  sweep.train = cfg.train;
  auto rows = reduced_pairs_experiment(pairs, cfg.fractions, cfg.sweep_seeds,
                                       store, emb.table, detection, sweep);
  write_sweep_rows(artifact(cfg, "sweep.tsv"), rows);

  // Plot-friendly aggregation: per-fraction means over seeds.
  std::map<double, std::vector<const SweepRow*>> by_fraction;
  for (const auto& r : rows) by_fraction[r.fraction].push_back(&r);
  std::ofstream out(artifact(cfg, "sweep_mean.tsv"));
  for (auto it = by_fraction.rbegin(); it != by_fraction.rend(); ++it) {
    double n = static_cast<double>(it->second.size());
    double oop = 0, pat = 0, com = 0;
    for (const SweepRow* r : it->second) {
      oop += r->oop_rate;
      pat += r->pattern_only_ap;
      com += r->comhyper_ap;
    }
    out << format_real(it->first) << "\toop_rate\t" << format_real(oop / n) << '\n'
        << format_real(it->first) << "\tpattern_only_ap\t" << format_real(pat / n)
        << '\n'
        << format_real(it->first) << "\tcomhyper_ap\t" << format_real(com / n)
        << '\n';
  }
  append_manifest(cfg, "reduce-pairs");
}

}  // namespace comhyper
