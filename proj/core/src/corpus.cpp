#include "comhyper/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace comhyper {

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

namespace {

std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool is_word_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '_' || c == '\'' || c == '-';
}

}  // namespace

std::vector<Sentence> tokenize(const std::string& text, bool keep_commas) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::string token;
  auto flush_token = [&] {
    if (!token.empty()) {
      current.push_back(token);
      token.clear();
    }
  };
  auto flush_sentence = [&] {
    flush_token();
    if (!current.empty()) {
      sentences.push_back(std::move(current));
      current.clear();
    }
  };
  for (unsigned char c : text) {
    if (is_word_char(c)) {
      token.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '.' || c == '!' || c == '?') {
      flush_sentence();
    } else if (c == ',' && keep_commas) {
      flush_token();
      current.push_back(",");
    } else {
      flush_token();
    }
  }
  flush_sentence();
  return sentences;
}

Corpus load_corpus_from_string(const std::string& text) {
  Corpus corpus;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto sents = tokenize(line, /*keep_commas=*/true);
    for (auto& s : sents) corpus.sentences.push_back(std::move(s));
  }
  return corpus;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_corpus_from_string(buf.str());
}

Vocabulary build_vocabulary(const Corpus& corpus, std::uint64_t min_count) {
  if (min_count < 1) throw DomainError("min_count must be >= 1");
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& sent : corpus.sentences) {
    for (const auto& tok : sent) {
      if (is_comma_token(tok)) continue;
      ++counts[tok];
    }
  }
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [w, c] : counts) {
    if (c >= min_count) kept.emplace_back(w, c);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary vocab;
  vocab.surfaces.reserve(kept.size());
  vocab.counts.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    vocab.surfaces.push_back(kept[i].first);
    vocab.counts.push_back(kept[i].second);
    vocab.index.emplace(kept[i].first, static_cast<WordId>(i));
  }
  return vocab;
}

ContextStore collect_contexts(const Corpus& corpus, const Vocabulary& vocab,
                              std::size_t window, std::size_t cap,
                              std::uint64_t seed) {
  if (window < 1) throw DomainError("window must be >= 1");
  if (cap < 1) throw DomainError("cap must be >= 1");
  ContextStore store;
  store.cap = cap;
  store.contexts.resize(vocab.size());
  std::vector<std::uint64_t> seen(vocab.size(), 0);
  std::mt19937_64 rng(seed);
  std::vector<WordId> ids;
  for (const auto& sent : corpus.sentences) {
    ids.clear();
    for (const auto& tok : sent) {
      if (is_comma_token(tok)) continue;
      WordId id = vocab.id(tok);
      if (id != kNoWord) ids.push_back(id);
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      std::size_t start = i > window ? i - window : 0;
      std::size_t end = std::min(ids.size(), i + window + 1);
      Context ctx;
      ctx.tokens.assign(ids.begin() + start, ids.begin() + end);
      ctx.target_position = i - start;
      WordId w = ids[i];
      ++seen[w];
      auto& slot = store.contexts[w];
      if (slot.size() < cap) {
        slot.push_back(std::move(ctx));
      } else {
        std::uniform_int_distribution<std::uint64_t> pick(0, seen[w] - 1);
        std::uint64_t j = pick(rng);
        if (j < cap) slot[j] = std::move(ctx);
      }
    }
  }
  return store;
}

void save_context_store(const std::string& path, const ContextStore& store,
                        const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for write: " + path);
  out << "comhyper-contexts\t1\t" << store.cap << "\n";
  for (WordId w = 0; w < store.contexts.size(); ++w) {
    for (const auto& ctx : store.contexts[w]) {
      out << vocab.surfaces[w] << '\t' << ctx.target_position;
      for (WordId t : ctx.tokens) out << '\t' << vocab.surfaces[t];
      out << '\n';
    }
  }
}

ContextStore load_context_store(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open context store: " + path);
  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty context store: " + path);
  std::istringstream hs(header);
  std::string magic;
  int version = 0;
  std::size_t cap = 0;
  hs >> magic >> version >> cap;
  if (magic != "comhyper-contexts" || version != 1) {
    throw ParseError("bad context store header in " + path);
  }
  ContextStore store;
  store.cap = cap;
  store.contexts.resize(vocab.size());
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word, field;
    std::getline(ls, word, '\t');
    WordId w = vocab.id(word);
    if (w == kNoWord) {
      throw ParseError("context store line " + std::to_string(lineno) +
                       ": unknown word '" + word + "'");
    }
    Context ctx;
    if (!std::getline(ls, field, '\t')) {
      throw ParseError("context store line " + std::to_string(lineno) +
                       ": missing target position");
    }
    ctx.target_position = std::stoul(field);
    while (std::getline(ls, field, '\t')) {
      WordId t = vocab.id(field);
      if (t == kNoWord) {
        throw ParseError("context store line " + std::to_string(lineno) +
                         ": unknown token '" + field + "'");
      }
      ctx.tokens.push_back(t);
    }
    if (ctx.target_position >= ctx.tokens.size() ||
        ctx.tokens[ctx.target_position] != w) {
      throw ParseError("context store line " + std::to_string(lineno) +
                       ": target does not resolve to key word");
    }
    store.contexts[w].push_back(std::move(ctx));
  }
  return store;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double sgns_objective(const Eigen::VectorXd& center,
                      const Eigen::VectorXd& context,
                      const std::vector<Eigen::VectorXd>& negatives) {
  double obj = std::log(sigmoid(center.dot(context)));
  for (const auto& n : negatives) {
    obj += std::log(sigmoid(-center.dot(n)));
  }
  return obj;
}

void sgns_gradients(const Eigen::VectorXd& center,
                    const Eigen::VectorXd& context,
                    const std::vector<Eigen::VectorXd>& negatives,
                    Eigen::VectorXd& grad_center,
                    Eigen::VectorXd& grad_context,
                    std::vector<Eigen::VectorXd>& grad_negatives) {
  double gpos = 1.0 - sigmoid(center.dot(context));
  grad_center = gpos * context;
  grad_context = gpos * center;
  grad_negatives.resize(negatives.size());
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    double gneg = -sigmoid(center.dot(negatives[i]));
    grad_center += gneg * negatives[i];
    grad_negatives[i] = gneg * center;
  }
}

EmbeddingTable train_sgns(const Corpus& corpus, const Vocabulary& vocab,
                          const SgnsConfig& cfg) {
  if (cfg.dimension < 1) throw DomainError("dimension must be >= 1");
  if (cfg.negatives < 1) throw DomainError("negatives must be >= 1");
  if (vocab.size() < 2) throw DomainError("vocabulary too small for SGNS");

  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = vocab.size();
  const auto dim = static_cast<Eigen::Index>(cfg.dimension);

  std::vector<Eigen::VectorXd> syn0(n), syn1(n);
  std::uniform_real_distribution<double> init(-0.5 / cfg.dimension,
                                              0.5 / cfg.dimension);
  for (std::size_t w = 0; w < n; ++w) {
    syn0[w].resize(dim);
    for (Eigen::Index d = 0; d < dim; ++d) syn0[w][d] = init(rng);
    syn1[w] = Eigen::VectorXd::Zero(dim);
  }

  // Cumulative unigram^0.75 table for negative sampling.
  std::vector<double> cum(n);
  double total = 0.0;
  for (std::size_t w = 0; w < n; ++w) {
    total += std::pow(static_cast<double>(vocab.counts[w]), 0.75);
    cum[w] = total;
  }
  auto sample_negative = [&](WordId exclude) {
    std::uniform_real_distribution<double> u(0.0, total);
    for (;;) {
      double r = u(rng);
      auto it = std::lower_bound(cum.begin(), cum.end(), r);
      auto w = static_cast<WordId>(it - cum.begin());
      if (w >= n) w = static_cast<WordId>(n - 1);
      if (w != exclude) return w;
    }
  };

  std::vector<WordId> ids;
  std::vector<Eigen::VectorXd> negs;
  std::vector<Eigen::VectorXd> grad_negs;
  Eigen::VectorXd grad_center, grad_context;
  std::vector<WordId> neg_ids;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& sent : corpus.sentences) {
      ids.clear();
      for (const auto& tok : sent) {
        if (is_comma_token(tok)) continue;
        WordId id = vocab.id(tok);
        if (id != kNoWord) ids.push_back(id);
      }
      for (std::size_t i = 0; i < ids.size(); ++i) {
        std::uniform_int_distribution<std::size_t> shrink(1, cfg.window);
        std::size_t b = shrink(rng);
        std::size_t start = i > b ? i - b : 0;
        std::size_t end = std::min(ids.size(), i + b + 1);
        for (std::size_t j = start; j < end; ++j) {
          if (j == i) continue;
          WordId center = ids[i], context = ids[j];
          negs.clear();
          neg_ids.clear();
          for (std::size_t k = 0; k < cfg.negatives; ++k) {
            WordId nw = sample_negative(context);
            neg_ids.push_back(nw);
            negs.push_back(syn1[nw]);
          }
          sgns_gradients(syn0[center], syn1[context], negs, grad_center,
                         grad_context, grad_negs);
          syn0[center] += cfg.learning_rate * grad_center;
          syn1[context] += cfg.learning_rate * grad_context;
          for (std::size_t k = 0; k < neg_ids.size(); ++k) {
            syn1[neg_ids[k]] += cfg.learning_rate * grad_negs[k];
          }
        }
      }
    }
  }

  EmbeddingTable table;
  table.dimension = cfg.dimension;
  table.vectors = std::move(syn0);
  return table;
}

LoadedEmbeddings load_embeddings(const std::string& path,
                                 const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open embeddings: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty embedding file: " + path);
  std::istringstream hs(line);
  std::size_t count = 0, dimension = 0;
  if (!(hs >> count >> dimension) || dimension == 0) {
    throw ParseError("bad embedding header in " + path);
  }
  LoadedEmbeddings result;
  result.table.dimension = dimension;
  result.table.vectors.resize(vocab.size());
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    Eigen::VectorXd v(static_cast<Eigen::Index>(dimension));
    for (std::size_t d = 0; d < dimension; ++d) {
      double x;
      if (!(ls >> x)) {
        throw ParseError("embedding line " + std::to_string(lineno) +
                         ": expected " + std::to_string(dimension) + " values");
      }
      v[static_cast<Eigen::Index>(d)] = x;
    }
    double extra;
    if (ls >> extra) {
      throw ParseError("embedding line " + std::to_string(lineno) +
                       ": too many values");
    }
    WordId w = vocab.id(word);
    if (w == kNoWord) {
      ++result.skipped_unknown;
      continue;
    }
    result.table.vectors[w] = std::move(v);
  }
  return result;
}

void save_embeddings(const std::string& path, const EmbeddingTable& table,
                     const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for write: " + path);
  std::size_t count = 0;
  for (WordId w = 0; w < table.vectors.size(); ++w) {
    if (table.has(w)) ++count;
  }
  out << count << ' ' << table.dimension << '\n';
  for (WordId w = 0; w < table.vectors.size(); ++w) {
    if (!table.has(w)) continue;
    out << vocab.surfaces[w];
    const auto& v = table.vec(w);
    for (Eigen::Index d = 0; d < v.size(); ++d) out << ' ' << format_exact(v[d]);
    out << '\n';
  }
}

std::vector<RankFrequencyRow> frequency_rank_table(
    const Vocabulary& vocab, const std::vector<WordId>& subset) {
  std::vector<std::uint64_t> freqs;
  freqs.reserve(subset.size());
  for (WordId w : subset) {
    if (w >= vocab.size()) throw DomainError("subset word id out of range");
    freqs.push_back(vocab.counts[w]);
  }
  std::sort(freqs.begin(), freqs.end(), std::greater<>());
  std::vector<RankFrequencyRow> rows;
  rows.reserve(freqs.size());
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    rows.push_back({i + 1, freqs[i]});
  }
  return rows;
}

namespace {

double trapezoid_log_area(const std::vector<RankFrequencyRow>& rows) {
  double area = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double x0 = std::log10(static_cast<double>(rows[i - 1].rank));
    double x1 = std::log10(static_cast<double>(rows[i].rank));
    double y0 = std::log10(std::max<double>(1, rows[i - 1].frequency));
    double y1 = std::log10(std::max<double>(1, rows[i].frequency));
    area += 0.5 * (y0 + y1) * (x1 - x0);
  }
  return area;
}

}  // namespace

double log_log_uncovered_area_ratio(const std::vector<RankFrequencyRow>& full,
                                    const std::vector<RankFrequencyRow>& subset) {
  double a_full = trapezoid_log_area(full);
  if (a_full <= 0.0) return 0.0;
  double a_subset = trapezoid_log_area(subset);
  double ratio = (a_full - a_subset) / a_full;
  return std::clamp(ratio, 0.0, 1.0);
}

}  // namespace comhyper
