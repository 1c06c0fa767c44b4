#include "comhyper/hearst.hpp"

#include <fstream>
#include <sstream>

namespace comhyper {

namespace {

bool is_wordlike(const std::string& t) {
  return !is_comma_token(t) && t != "and" && t != "or";
}

bool is_conjunction(const std::string& t) { return t == "and" || t == "or"; }

std::string strip_plural(const std::string& token, const Vocabulary* vocab) {
  if (vocab != nullptr) {
    if (token.size() > 2 && token.ends_with("es")) {
      std::string base = token.substr(0, token.size() - 2);
      if (vocab->contains(base)) return base;
    }
    if (token.size() > 1 && token.ends_with("s")) {
      std::string base = token.substr(0, token.size() - 1);
      if (vocab->contains(base)) return base;
    }
    return token;
  }
  if (token.size() > 3 && token.ends_with("s") && !token.ends_with("ss")) {
    return token.substr(0, token.size() - 1);
  }
  return token;
}

// A coordination group anchored at `pos`: "w", "w , w", "w , w and w", ...
// Candidates ordered shortest to longest.
struct GroupCandidate {
  std::size_t end;  // one past the last consumed token
  std::vector<std::string> conjuncts;
};

std::vector<GroupCandidate> group_candidates(const Sentence& tokens,
                                             std::size_t pos) {
  std::vector<GroupCandidate> cands;
  if (pos >= tokens.size() || !is_wordlike(tokens[pos])) return cands;
  GroupCandidate g{pos + 1, {tokens[pos]}};
  cands.push_back(g);
  std::size_t p = pos + 1;
  while (p + 1 < tokens.size()) {
    if (is_comma_token(tokens[p]) && is_wordlike(tokens[p + 1])) {
      g.conjuncts.push_back(tokens[p + 1]);
      p += 2;
      g.end = p;
      cands.push_back(g);
    } else if (is_conjunction(tokens[p]) && is_wordlike(tokens[p + 1])) {
      g.conjuncts.push_back(tokens[p + 1]);
      p += 2;
      g.end = p;
      cands.push_back(g);
      break;
    } else {
      break;
    }
  }
  return cands;
}

struct MatchState {
  std::vector<std::string> hypos;
  std::vector<std::string> hypers;
  std::size_t end = 0;
};

// Greedy matcher with backtracking over coordination-group extents;
// longer extents are preferred.
bool match_from(const Sentence& tokens, const PatternTemplate& tmpl,
                std::size_t slot_idx, std::size_t pos, MatchState& state) {
  if (slot_idx == tmpl.slots.size()) {
    state.end = pos;
    return true;
  }
  const TemplateSlot& slot = tmpl.slots[slot_idx];
  if (slot.kind == SlotKind::Literal) {
    if (pos < tokens.size() && tokens[pos] == slot.literal) {
      return match_from(tokens, tmpl, slot_idx + 1, pos + 1, state);
    }
    return false;
  }
  auto cands = group_candidates(tokens, pos);
  for (auto it = cands.rbegin(); it != cands.rend(); ++it) {
    auto& target = slot.kind == SlotKind::HypoSlot ? state.hypos : state.hypers;
    target = it->conjuncts;
    if (match_from(tokens, tmpl, slot_idx + 1, it->end, state)) return true;
    target.clear();
  }
  return false;
}

}  // namespace

PatternTemplate parse_template(const std::string& line) {
  PatternTemplate tmpl;
  std::istringstream in(line);
  std::string tok;
  int x_slots = 0, y_slots = 0, literals = 0;
  std::ostringstream name;
  bool first = true;
  while (in >> tok) {
    if (!first) name << ' ';
    first = false;
    name << tok;
    if (tok == "{x}") {
      tmpl.slots.push_back({SlotKind::HypoSlot, ""});
      ++x_slots;
    } else if (tok == "{y}") {
      tmpl.slots.push_back({SlotKind::HyperSlot, ""});
      ++y_slots;
    } else {
      tmpl.slots.push_back({SlotKind::Literal, tok});
      ++literals;
    }
  }
  tmpl.name = name.str();
  if (x_slots != 1 || y_slots != 1 || literals < 1) {
    throw ParseError("template must contain exactly one {x}, one {y}, and at "
                     "least one literal: '" + line + "'");
  }
  return tmpl;
}

std::vector<PatternTemplate> parse_template_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open template file: " + path);
  std::vector<PatternTemplate> templates;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    templates.push_back(parse_template(line));
  }
  if (templates.empty()) throw ParseError("template file has no templates: " + path);
  return templates;
}

std::vector<PatternTemplate> default_templates() {
  return {
      parse_template("{y} such as {x}"),
      parse_template("{x} and other {y}"),
      parse_template("{x} or other {y}"),
      parse_template("{y} including {x}"),
      parse_template("{y} especially {x}"),
  };
}

std::vector<PatternMatch> match_sentence(
    const Sentence& tokens, const std::vector<PatternTemplate>& templates,
    const Vocabulary* vocab) {
  std::vector<PatternMatch> matches;
  for (const auto& tmpl : templates) {
    std::size_t start = 0;
    while (start < tokens.size()) {
      MatchState state;
      if (match_from(tokens, tmpl, 0, start, state)) {
        for (const auto& hypo : state.hypos) {
          for (const auto& hyper : state.hypers) {
            matches.push_back({strip_plural(hypo, vocab),
                               strip_plural(hyper, vocab), tmpl.name});
          }
        }
        start = state.end > start ? state.end : start + 1;
      } else {
        ++start;
      }
    }
  }
  return matches;
}

ExtractedPairs extract_pairs(const Corpus& corpus,
                             const std::vector<PatternTemplate>& templates,
                             const Vocabulary& vocab) {
  if (templates.empty()) throw DomainError("template set is empty");
  ExtractedPairs pairs;
  for (const auto& sent : corpus.sentences) {
    for (const auto& m : match_sentence(sent, templates, &vocab)) {
      WordId hypo = vocab.id(m.hypo);
      WordId hyper = vocab.id(m.hyper);
      if (hypo == kNoWord || hyper == kNoWord) continue;
      ++pairs.weights[{hypo, hyper}];
      ++pairs.total_weight;
      pairs.in_pattern_vocab.insert(hypo);
      pairs.in_pattern_vocab.insert(hyper);
    }
  }
  return pairs;
}

void save_pairs(const std::string& path, const ExtractedPairs& pairs,
                const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for write: " + path);
  for (const auto& [key, count] : pairs.weights) {
    out << vocab.surfaces[key.hypo] << '\t' << vocab.surfaces[key.hyper] << '\t'
        << count << '\n';
  }
}

ExtractedPairs load_pairs(const std::string& path, const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open pair file: " + path);
  ExtractedPairs pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string hypo, hyper, count_field;
    if (!std::getline(ls, hypo, '\t') || !std::getline(ls, hyper, '\t') ||
        !std::getline(ls, count_field, '\t')) {
      throw ParseError("pair file line " + std::to_string(lineno) +
                       ": expected hypo<TAB>hyper<TAB>count");
    }
    WordId h = vocab.id(hypo), H = vocab.id(hyper);
    if (h == kNoWord || H == kNoWord) {
      throw ParseError("pair file line " + std::to_string(lineno) +
                       ": word not in vocabulary");
    }
    std::uint64_t count = std::stoull(count_field);
    if (count < 1) {
      throw ParseError("pair file line " + std::to_string(lineno) +
                       ": count must be >= 1");
    }
    pairs.weights[{h, H}] += count;
    pairs.total_weight += count;
    pairs.in_pattern_vocab.insert(h);
    pairs.in_pattern_vocab.insert(H);
  }
  return pairs;
}

QueryClass classify_query(WordId hypo, WordId hyper, const ExtractedPairs& pairs) {
  bool ip = hypo != kNoWord && hyper != kNoWord && pairs.is_ip_word(hypo) &&
            pairs.is_ip_word(hyper);
  return ip ? QueryClass::IP : QueryClass::OOP;
}

OopRateStats oop_rate(const std::vector<QueryPair>& dataset,
                      const ExtractedPairs& pairs) {
  if (dataset.empty()) throw DomainError("oop_rate: empty dataset");
  OopRateStats stats;
  stats.total = dataset.size();
  for (const auto& q : dataset) {
    if (classify_query(q.hypo, q.hyper, pairs) == QueryClass::OOP) {
      ++stats.oop_all;
      if (q.positive) ++stats.oop_positive;
    }
  }
  stats.rate = static_cast<double>(stats.oop_all) / static_cast<double>(stats.total);
  return stats;
}

double estimate_oop_pair_probability(double p_oop_word) {
  if (p_oop_word < 0.0 || p_oop_word > 1.0) {
    throw DomainError("p_oop_word must be in [0,1]");
  }
  double q = 1.0 - p_oop_word;
  return 1.0 - q * q;
}

}  // namespace comhyper
