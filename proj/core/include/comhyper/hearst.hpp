#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "comhyper/corpus.hpp"

namespace comhyper {

enum class SlotKind { Literal, HypoSlot, HyperSlot };

struct TemplateSlot {
  SlotKind kind;
  std::string literal;  // set when kind == Literal
};

struct PatternTemplate {
  std::string name;
  std::vector<TemplateSlot> slots;
};

// Template config lines write the hyponym slot as {x} and the hypernym
// slot as {y}, e.g. "{y} such as {x}". One template per line; blank lines
// and lines starting with '#' are skipped.
PatternTemplate parse_template(const std::string& line);
std::vector<PatternTemplate> parse_template_file(const std::string& path);
std::vector<PatternTemplate> default_templates();

struct PairKey {
  WordId hypo;
  WordId hyper;
  auto operator<=>(const PairKey&) const = default;
};

struct ExtractedPairs {
  std::map<PairKey, std::uint64_t> weights;
  std::set<WordId> in_pattern_vocab;  // V_P
  std::uint64_t total_weight = 0;     // W = sum of counts

  bool is_ip_word(WordId w) const { return in_pattern_vocab.count(w) != 0; }
  std::uint64_t weight(WordId hypo, WordId hyper) const {
    auto it = weights.find({hypo, hyper});
    return it == weights.end() ? 0 : it->second;
  }
  std::vector<WordId> ip_words_sorted() const {
    return {in_pattern_vocab.begin(), in_pattern_vocab.end()};
  }
};

struct PatternMatch {
  std::string hypo;
  std::string hyper;
  std::string template_name;
};

// Greedy left-to-right matching of one sentence against the templates.
// Slot fillers are single tokens; coordination lists adjacent to a slot
// ("X1 , X2 and X3") expand into one match per conjunct. Fillers are
// plural-stripped ("s"/"es", preferring a form present in `vocab` when
// one is given).
std::vector<PatternMatch> match_sentence(
    const Sentence& tokens, const std::vector<PatternTemplate>& templates,
    const Vocabulary* vocab = nullptr);

// Aggregates match counts over the whole corpus; fillers outside `vocab`
// are dropped.
ExtractedPairs extract_pairs(const Corpus& corpus,
                             const std::vector<PatternTemplate>& templates,
                             const Vocabulary& vocab);

void save_pairs(const std::string& path, const ExtractedPairs& pairs,
                const Vocabulary& vocab);
ExtractedPairs load_pairs(const std::string& path, const Vocabulary& vocab);

enum class QueryClass { IP, OOP };

// IP iff both words are in V_P; total, including out-of-vocabulary ids.
QueryClass classify_query(WordId hypo, WordId hyper, const ExtractedPairs& pairs);

struct OopRateStats {
  std::uint64_t oop_all = 0;
  std::uint64_t oop_positive = 0;
  std::uint64_t total = 0;
  double rate = 0.0;
};

struct QueryPair {
  WordId hypo;
  WordId hyper;
  bool positive;  // true hypernymy label
};

OopRateStats oop_rate(const std::vector<QueryPair>& dataset,
                      const ExtractedPairs& pairs);

// 1 - (1-p)^2: probability a pair is OOP when each word is independently
// OOP with probability p.
double estimate_oop_pair_probability(double p_oop_word);

}  // namespace comhyper
