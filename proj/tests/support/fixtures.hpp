// Synthetic planted-taxonomy fixture shared by integration and
// acceptance tests.
#pragma once

#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "comhyper/corpus.hpp"
#include "comhyper/eval.hpp"

namespace fixtures {

struct PlantedOptions {
  std::size_t categories = 8;
  std::size_t hyponyms_per_category = 12;
  std::size_t topics_per_category = 8;
  std::size_t context_sentences_per_word = 12;
  std::size_t context_topics_per_sentence = 4;
  std::size_t hearst_repeats = 2;          // Hearst sentences per IP hyponym
  double ip_fraction = 0.7;                // rest of the hyponyms stay OOP
};

struct PlantedFixture {
  std::string corpus_text;  // one document per line
  std::vector<std::pair<std::string, std::string>> gold_positive;  // (hypo, hyper)
  // Exact (hypo, hyper) -> count emitted through Hearst sentences.
  std::map<std::pair<std::string, std::string>, std::uint64_t> planted_pairs;
  std::vector<std::string> oop_hyponyms;
  std::vector<comhyper::LabeledPair> detection;  // labeled, pos + neg
};

inline PlantedFixture make_planted_fixture(std::uint64_t seed,
                                           PlantedOptions opts = {}) {
  std::mt19937_64 rng(seed);
  PlantedFixture fx;
  std::ostringstream corpus;

  std::vector<std::string> hypers(opts.categories);
  std::vector<std::vector<std::string>> hypos(opts.categories);
  std::vector<std::vector<std::string>> topics(opts.categories);
  for (std::size_t c = 0; c < opts.categories; ++c) {
    hypers[c] = "h" + std::to_string(c);
    for (std::size_t j = 0; j < opts.hyponyms_per_category; ++j) {
      hypos[c].push_back("w" + std::to_string(c) + "x" + std::to_string(j));
    }
    for (std::size_t k = 0; k < opts.topics_per_category; ++k) {
      topics[c].push_back("t" + std::to_string(c) + "q" + std::to_string(k));
    }
  }

  // Context sentences: every member co-occurs with its category's topic
  // words, so embeddings separate categories. Hypernym sentences carry a
  // category-level marker token ("g<c>") that hyponym sentences never use,
  // which gives hypernym embeddings their own direction; hyponym sentences
  // mention the hypernym so distributional contexts still see it.
  auto emit_contexts = [&](std::size_t c, const std::string& word,
                           bool is_hyper) {
    std::uniform_int_distribution<std::size_t> pick(0, topics[c].size() - 1);
    std::string marker = "g" + std::to_string(c);
    for (std::size_t s = 0; s < opts.context_sentences_per_word; ++s) {
      corpus << word;
      for (std::size_t t = 0; t < opts.context_topics_per_sentence; ++t) {
        corpus << ' ' << topics[c][pick(rng)];
      }
      if (is_hyper) {
        corpus << ' ' << marker << ' ' << marker;
      } else if (s % 2 == 0) {
        corpus << ' ' << hypers[c];
      }
      corpus << " .\n";
    }
  };
  for (std::size_t c = 0; c < opts.categories; ++c) {
    emit_contexts(c, hypers[c], true);
    for (const auto& w : hypos[c]) emit_contexts(c, w, false);
  }

  // Hearst sentences for the IP share of each category's hyponyms.
  const char* hearst_forms[3] = {"%H such as %W .", "%W and other %H .",
                                 "%H including %W ."};
  auto ip_count = static_cast<std::size_t>(
      opts.ip_fraction * static_cast<double>(opts.hyponyms_per_category));
  for (std::size_t c = 0; c < opts.categories; ++c) {
    for (std::size_t j = 0; j < opts.hyponyms_per_category; ++j) {
      fx.gold_positive.emplace_back(hypos[c][j], hypers[c]);
      if (j >= ip_count) {
        fx.oop_hyponyms.push_back(hypos[c][j]);
        continue;
      }
      for (std::size_t r = 0; r < opts.hearst_repeats; ++r) {
        std::string form = hearst_forms[(j + r) % 3];
        std::string sentence = form;
        sentence.replace(sentence.find("%H"), 2, hypers[c]);
        sentence.replace(sentence.find("%W"), 2, hypos[c][j]);
        corpus << sentence << '\n';
        ++fx.planted_pairs[{hypos[c][j], hypers[c]}];
      }
    }
  }

  // Detection dataset: one positive plus two negatives per hyponym.
  std::uniform_int_distribution<std::size_t> pick_cat(0, opts.categories - 1);
  for (std::size_t c = 0; c < opts.categories; ++c) {
    for (std::size_t j = 0; j < opts.hyponyms_per_category; ++j) {
      fx.detection.push_back({hypos[c][j], hypers[c], true, 0.0, "hyper"});
      std::size_t other = pick_cat(rng);
      if (other == c) other = (other + 1) % opts.categories;
      fx.detection.push_back({hypos[c][j], hypers[other], false, 0.0, "random"});
      fx.detection.push_back({hypers[c], hypos[c][j], false, 0.0, "reversed"});
    }
  }

  fx.corpus_text = corpus.str();
  return fx;
}

}  // namespace fixtures
