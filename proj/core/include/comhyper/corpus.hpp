#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "comhyper/common.hpp"

namespace comhyper {

// A tokenized sentence. Commas are kept as "," tokens so the pattern
// matcher can expand coordination lists; every other consumer skips them.
using Sentence = std::vector<std::string>;

struct Corpus {
  std::vector<Sentence> sentences;
};

inline bool is_comma_token(const std::string& t) { return t == ","; }

// Lowercases, splits on whitespace and punctuation boundaries, drops
// punctuation tokens, and closes a sentence on [.!?]. Commas survive as
// standalone "," tokens when keep_commas is set.
std::vector<Sentence> tokenize(const std::string& text, bool keep_commas = false);

// Reads a plain-text corpus (one document per line) with commas kept.
Corpus load_corpus(const std::string& path);
Corpus load_corpus_from_string(const std::string& text);

struct Vocabulary {
  std::vector<std::string> surfaces;           // id -> surface
  std::unordered_map<std::string, WordId> index;
  std::vector<std::uint64_t> counts;           // id -> occurrence count

  std::size_t size() const { return surfaces.size(); }
  bool contains(const std::string& w) const { return index.count(w) != 0; }
  WordId id(const std::string& w) const {
    auto it = index.find(w);
    return it == index.end() ? kNoWord : it->second;
  }
};

// Ids are dense 0..|V|-1, assigned in descending count order, ties
// broken lexicographically. Comma tokens are never counted.
Vocabulary build_vocabulary(const Corpus& corpus, std::uint64_t min_count);

struct Context {
  std::vector<WordId> tokens;
  std::size_t target_position = 0;
};

struct ContextStore {
  std::vector<std::vector<Context>> contexts;  // indexed by WordId
  std::size_t cap = 0;

  const std::vector<Context>& of(WordId w) const { return contexts.at(w); }
};

// Sentence windows of ±window tokens around each in-vocabulary occurrence,
// reservoir-sampled down to `cap` per word. Deterministic given seed.
ContextStore collect_contexts(const Corpus& corpus, const Vocabulary& vocab,
                              std::size_t window, std::size_t cap,
                              std::uint64_t seed);

void save_context_store(const std::string& path, const ContextStore& store,
                        const Vocabulary& vocab);
ContextStore load_context_store(const std::string& path, const Vocabulary& vocab);

struct EmbeddingTable {
  std::size_t dimension = 0;
  std::vector<Eigen::VectorXd> vectors;  // indexed by WordId; empty vector = absent
  bool has(WordId w) const {
    return w < vectors.size() && vectors[w].size() > 0;
  }
  const Eigen::VectorXd& vec(WordId w) const { return vectors.at(w); }
};

struct SgnsConfig {
  std::size_t dimension = 300;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 1;
};

// Skip-gram with negative sampling, unigram^0.75 negative distribution,
// single-threaded and seed-deterministic. epochs=0 returns the seeded
// random initialization untouched.
EmbeddingTable train_sgns(const Corpus& corpus, const Vocabulary& vocab,
                          const SgnsConfig& cfg);

// One positive/negative tuple's SGNS objective (to be maximized) and its
// gradients; the trainer ascends these, tests finite-difference them.
double sgns_objective(const Eigen::VectorXd& center,
                      const Eigen::VectorXd& context,
                      const std::vector<Eigen::VectorXd>& negatives);
void sgns_gradients(const Eigen::VectorXd& center,
                    const Eigen::VectorXd& context,
                    const std::vector<Eigen::VectorXd>& negatives,
                    Eigen::VectorXd& grad_center,
                    Eigen::VectorXd& grad_context,
                    std::vector<Eigen::VectorXd>& grad_negatives);

struct LoadedEmbeddings {
  EmbeddingTable table;
  std::size_t skipped_unknown = 0;
};

// Text format: header "count dimension", then "word v1 ... vd" per line.
LoadedEmbeddings load_embeddings(const std::string& path, const Vocabulary& vocab);
void save_embeddings(const std::string& path, const EmbeddingTable& table,
                     const Vocabulary& vocab);

struct RankFrequencyRow {
  std::size_t rank;        // 1-based
  std::uint64_t frequency;
};

// (rank, frequency) rows for `subset`, ordered by descending frequency.
std::vector<RankFrequencyRow> frequency_rank_table(
    const Vocabulary& vocab, const std::vector<WordId>& subset);

// Fraction of the area under the full vocabulary's log10-log10
// rank/frequency curve that is NOT covered by the subset's curve.
// This is the per-word OOP probability estimate behind the sparsity report.
double log_log_uncovered_area_ratio(const std::vector<RankFrequencyRow>& full,
                                    const std::vector<RankFrequencyRow>& subset);

}  // namespace comhyper
