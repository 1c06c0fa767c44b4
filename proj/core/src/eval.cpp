#include "comhyper/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace comhyper {

double average_precision(const std::vector<double>& scores,
                         const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) {
    throw DomainError("average_precision: length mismatch");
  }
  std::size_t positives = std::count(labels.begin(), labels.end(), true);
  if (positives == 0) {
    throw MetricUndefinedError("average_precision: no positive labels");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return sum / static_cast<double>(positives);
}

double direction_accuracy(
    const std::function<double(WordId, WordId)>& scorer,
    const std::vector<std::pair<WordId, WordId>>& true_pairs) {
  if (true_pairs.empty()) throw DomainError("direction_accuracy: empty input");
  std::size_t correct = 0;
  for (const auto& [x, y] : true_pairs) {
    if (scorer(x, y) > scorer(y, x)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(true_pairs.size());
}

namespace {

std::vector<double> fractional_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<double>(a.size());
  double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double da = a[i] - ma, db = b[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va == 0.0 || vb == 0.0) {
    throw MetricUndefinedError("spearman: constant input");
  }
  return cov / std::sqrt(va * vb);
}

}  // namespace

double spearman(const std::vector<double>& preds,
                const std::vector<double>& golds) {
  if (preds.size() != golds.size()) throw DomainError("spearman: length mismatch");
  if (preds.size() < 2) throw DomainError("spearman: need >= 2 items");
  bool constant = std::all_of(golds.begin(), golds.end(),
                              [&](double g) { return g == golds[0]; });
  if (constant) throw MetricUndefinedError("spearman: constant gold labels");
  return pearson(fractional_ranks(preds), fractional_ranks(golds));
}

DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "detection") return DatasetKind::Detection;
  if (s == "direction") return DatasetKind::Direction;
  if (s == "graded") return DatasetKind::Graded;
  throw ParseError("unknown dataset kind: " + s);
}

std::string to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::Detection: return "detection";
    case DatasetKind::Direction: return "direction";
    case DatasetKind::Graded: return "graded";
  }
  return "?";
}

std::vector<LabeledPair> load_dataset(const std::string& path, DatasetKind kind) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset: " + path);
  std::vector<LabeledPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string w1, w2, label, relation;
    if (!std::getline(ls, w1, '\t') || !std::getline(ls, w2, '\t') ||
        !std::getline(ls, label, '\t')) {
      throw ParseError("dataset line " + std::to_string(lineno) +
                       ": expected word1<TAB>word2<TAB>label");
    }
    std::getline(ls, relation, '\t');
    LabeledPair p;
    p.hypo = w1;
    p.hyper = w2;
    p.relation = relation;
    if (kind == DatasetKind::Graded) {
      std::size_t consumed = 0;
      try {
        p.graded = std::stod(label, &consumed);
      } catch (const std::exception&) {
        throw ParseError("dataset line " + std::to_string(lineno) +
                         ": bad graded label '" + label + "'");
      }
      if (consumed != label.size() || p.graded < 0.0 || p.graded > 10.0) {
        throw ParseError("dataset line " + std::to_string(lineno) +
                         ": graded label must be a decimal in [0,10]");
      }
    } else {
      if (label == "true" || label == "1" || label == "hyper") {
        p.label = true;
      } else if (label == "false" || label == "0" || label == "other") {
        p.label = false;
      } else {
        throw ParseError("dataset line " + std::to_string(lineno) +
                         ": bad boolean label '" + label + "' for " +
                         to_string(kind) + " dataset");
      }
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

void save_dataset(const std::string& path, const std::vector<LabeledPair>& pairs,
                  DatasetKind kind) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for write: " + path);
  for (const auto& p : pairs) {
    out << p.hypo << '\t' << p.hyper << '\t';
    if (kind == DatasetKind::Graded) {
      out << format_real(p.graded);
    } else {
      out << (p.label ? "true" : "false");
    }
    if (!p.relation.empty()) out << '\t' << p.relation;
    out << '\n';
  }
}

namespace {

struct ResolvedPair {
  WordId hypo;
  WordId hyper;
  const LabeledPair* src;
};

std::vector<ResolvedPair> resolve(const std::vector<LabeledPair>& pairs,
                                  const Vocabulary& vocab) {
  std::vector<ResolvedPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    out.push_back({vocab.id(p.hypo), vocab.id(p.hyper), &p});
  }
  return out;
}

}  // namespace

EvalReport run_benchmark(const ComHyperModel& model, const Vocabulary& vocab,
                         const std::vector<NamedDataset>& datasets,
                         bool oop_only) {
  EvalReport report;
  report.oop_only = oop_only;
  for (const auto& ds : datasets) {
    DatasetReport row;
    row.name = ds.name;
    row.kind = ds.kind;
    row.total = ds.pairs.size();

    auto resolved = resolve(ds.pairs, vocab);
    std::vector<ResolvedPair> subset;
    for (const auto& rp : resolved) {
      bool oop = classify_query(rp.hypo, rp.hyper, *model.pairs) == QueryClass::OOP;
      if (!oop_only || oop) subset.push_back(rp);
    }
    row.evaluated = subset.size();
    if (subset.empty()) {
      row.metric = MetricCell::undefined("empty subset");
      if (ds.kind == DatasetKind::Detection) {
        row.oracle_ap = MetricCell::undefined("empty subset");
      }
      report.rows.push_back(std::move(row));
      continue;
    }

    try {
      switch (ds.kind) {
        case DatasetKind::Detection: {
          std::vector<double> scores;
          std::vector<bool> labels;
          std::vector<std::pair<WordId, WordId>> queries;
          for (const auto& rp : subset) {
            queries.emplace_back(rp.hypo, rp.hyper);
            labels.push_back(rp.src->label);
          }
          auto scored = score_batch(model, queries);
          for (const auto& sq : scored) {
            scores.push_back(sq.score);
            switch (sq.route) {
              case Route::IP: ++row.route_ip; break;
              case Route::OOP: ++row.route_oop; break;
              case Route::Fallback: ++row.route_fallback; break;
            }
          }
          row.metric = MetricCell::of(average_precision(scores, labels));
          OracleBounds bounds = compute_oracle_bounds(model, queries);
          std::vector<double> oracle_scores;
          for (std::size_t i = 0; i < subset.size(); ++i) {
            oracle_scores.push_back(oracle_score(model, subset[i].hypo,
                                                 subset[i].hyper, labels[i],
                                                 bounds));
          }
          try {
            row.oracle_ap = MetricCell::of(average_precision(oracle_scores, labels));
          } catch (const MetricUndefinedError& e) {
            row.oracle_ap = MetricCell::undefined(e.what());
          }
          break;
        }
        case DatasetKind::Direction: {
          std::vector<std::pair<WordId, WordId>> positives;
          for (const auto& rp : subset) {
            if (rp.src->label) positives.emplace_back(rp.hypo, rp.hyper);
          }
          if (positives.empty()) {
            throw MetricUndefinedError("no positive pairs for direction accuracy");
          }
          auto scorer = [&](WordId a, WordId b) {
            RoutedScore rs = score_routed(model, a, b);
            return rs.score;
          };
          for (const auto& [x, y] : positives) {
            switch (score_routed(model, x, y).route) {
              case Route::IP: ++row.route_ip; break;
              case Route::OOP: ++row.route_oop; break;
              case Route::Fallback: ++row.route_fallback; break;
            }
          }
          row.metric = MetricCell::of(direction_accuracy(scorer, positives));
          break;
        }
        case DatasetKind::Graded: {
          std::vector<double> preds, golds;
          for (const auto& rp : subset) {
            RoutedScore rs = score_routed(model, rp.hypo, rp.hyper);
            preds.push_back(rs.score);
            golds.push_back(rp.src->graded);
            switch (rs.route) {
              case Route::IP: ++row.route_ip; break;
              case Route::OOP: ++row.route_oop; break;
              case Route::Fallback: ++row.route_fallback; break;
            }
          }
          if (preds.size() < 2) {
            throw MetricUndefinedError("graded subset smaller than 2");
          }
          row.metric = MetricCell::of(spearman(preds, golds));
          break;
        }
      }
    } catch (const MetricUndefinedError& e) {
      row.metric = MetricCell::undefined(e.what());
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

void write_eval_report(const std::string& path, const EvalReport& report) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for write: " + path);
  out << "dataset\tkind\ttotal\tevaluated\tip\toop\tfallback\tmetric\toracle_ap\n";
  for (const auto& row : report.rows) {
    out << row.name << '\t' << to_string(row.kind) << '\t' << row.total << '\t'
        << row.evaluated << '\t' << row.route_ip << '\t' << row.route_oop << '\t'
        << row.route_fallback << '\t';
    out << (row.metric.defined ? format_real(row.metric.value) : "undefined");
    out << '\t';
    if (row.kind == DatasetKind::Detection) {
      out << (row.oracle_ap.defined ? format_real(row.oracle_ap.value) : "undefined");
    } else {
      out << "n/a";
    }
    out << '\n';
  }
}

std::vector<SweepRow> reduced_pairs_experiment(
    const ExtractedPairs& full_pairs, const std::vector<double>& fractions,
    const std::vector<std::uint64_t>& seeds, const ContextStore& store,
    const EmbeddingTable& embeddings, const std::vector<QueryPair>& detection,
    const SweepConfig& config) {
  for (double f : fractions) {
    if (f <= 0.0 || f > 1.0) throw DomainError("fraction must be in (0,1]");
  }
  if (detection.empty()) throw DomainError("reduced_pairs_experiment: empty dataset");

  std::vector<std::pair<PairKey, std::uint64_t>> unique_pairs(
      full_pairs.weights.begin(), full_pairs.weights.end());
  std::vector<double> sorted_fractions = fractions;
  std::sort(sorted_fractions.begin(), sorted_fractions.end(), std::greater<>());

  std::vector<SweepRow> rows;
  for (std::uint64_t seed : seeds) {
    auto shuffled = unique_pairs;
    std::mt19937_64 rng(seed);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    for (std::size_t fi = 0; fi < sorted_fractions.size(); ++fi) {
      double fraction = sorted_fractions[fi];
      auto take = static_cast<std::size_t>(
          std::ceil(fraction * static_cast<double>(shuffled.size())));
      if (take == 0) continue;  // empty subsample, skip

      ExtractedPairs sub;
      for (std::size_t i = 0; i < take; ++i) {
        sub.weights.emplace(shuffled[i].first, shuffled[i].second);
        sub.total_weight += shuffled[i].second;
        sub.in_pattern_vocab.insert(shuffled[i].first.hypo);
        sub.in_pattern_vocab.insert(shuffled[i].first.hyper);
      }

      PatternScorer scorer(config.method, sub, config.svd_rank, seed);
      std::size_t out_dim =
          config.output_dim == 0 ? embeddings.dimension : config.output_dim;
      TrainConfig train_cfg = config.train;
      train_cfg.seed = config.train.seed * 1000003ull + seed * 7919ull + fi;
      EncoderPair initial = init_encoder_pair(config.variant, embeddings.dimension,
                                              out_dim, train_cfg.seed);
      TrainResult trained =
          train(initial, sub, scorer, store, embeddings, train_cfg);
      ComHyperModel model = assemble_model(scorer, trained.encoder, sub, store,
                                           embeddings);

      SweepRow row;
      row.fraction = fraction;
      row.seed = seed;
      row.oop_rate = oop_rate(detection, sub).rate;
      std::vector<double> comhyper_scores, pattern_scores;
      std::vector<bool> labels;
      double pattern_min = model.min_sentinel();
      for (const auto& q : detection) {
        labels.push_back(q.positive);
        comhyper_scores.push_back(score(model, q.hypo, q.hyper));
        if (classify_query(q.hypo, q.hyper, sub) == QueryClass::IP) {
          pattern_scores.push_back(scorer.score(q.hypo, q.hyper));
        } else {
          pattern_scores.push_back(pattern_min);
        }
      }
      row.comhyper_ap = average_precision(comhyper_scores, labels);
      row.pattern_only_ap = average_precision(pattern_scores, labels);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_sweep_rows(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open for write: " + path);
  out << "fraction\tseed\toop_rate\tpattern_only_ap\tcomhyper_ap\n";
  for (const auto& r : rows) {
    out << format_real(r.fraction) << '\t' << r.seed << '\t'
        << format_real(r.oop_rate) << '\t' << format_real(r.pattern_only_ap)
        << '\t' << format_real(r.comhyper_ap) << '\n';
  }
}

}  // namespace comhyper
