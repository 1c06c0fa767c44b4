#include "comhyper/framework.hpp"

#include <algorithm>

namespace comhyper {

FallbackPolicy fallback_policy_from_string(const std::string& s) {
  if (s == "min-score") return FallbackPolicy::MinScore;
  if (s == "word-vector-backoff") return FallbackPolicy::WordVectorBackoff;
  throw ParseError("unknown fallback policy: " + s);
}

std::string to_string(Route r) {
  switch (r) {
    case Route::IP: return "IP";
    case Route::OOP: return "OOP";
    case Route::Fallback: return "FALLBACK";
  }
  return "?";
}

ComHyperModel assemble_model(const PatternScorer& pattern,
                             EncoderPair distributional,
                             const ExtractedPairs& pairs,
                             const ContextStore& store,
                             const EmbeddingTable& embeddings,
                             FallbackPolicy policy) {
  if (distributional.provenance_hash != 0 &&
      distributional.provenance_hash != pattern.provenance_hash()) {
    throw StateError("encoder was trained against a different pattern model");
  }
  ComHyperModel model;
  model.pattern = &pattern;
  model.distributional = std::move(distributional);
  model.pairs = &pairs;
  model.store = &store;
  model.embeddings = &embeddings;
  model.fallback_policy = policy;
  model.min_f = pattern.min_score();
  return model;
}

RoutedScore score_routed(const ComHyperModel& model, WordId x, WordId y) {
  if (classify_query(x, y, *model.pairs) == QueryClass::IP) {
    return {model.pattern->score(x, y), Route::IP};
  }
  try {
    return {g_score(model.distributional, x, y, *model.store, *model.embeddings),
            Route::OOP};
  } catch (const MissingEmbeddingError&) {
  } catch (const NoContextError&) {
  }
  ++model.fallback_count;
  if (model.fallback_policy == FallbackPolicy::WordVectorBackoff &&
      model.backoff_encoder.has_value() && model.embeddings->has(x) &&
      model.embeddings->has(y)) {
    return {g_score(*model.backoff_encoder, x, y, *model.store, *model.embeddings),
            Route::Fallback};
  }
  return {model.min_sentinel(), Route::Fallback};
}

double score(const ComHyperModel& model, WordId x, WordId y) {
  return score_routed(model, x, y).score;
}

std::vector<ScoredQuery> score_batch(
    const ComHyperModel& model,
    const std::vector<std::pair<WordId, WordId>>& queries) {
  std::vector<ScoredQuery> out;
  out.reserve(queries.size());
  for (const auto& [x, y] : queries) {
    RoutedScore rs = score_routed(model, x, y);
    out.push_back({x, y, rs.score, rs.route});
  }
  return out;
}

OracleBounds compute_oracle_bounds(
    const ComHyperModel& model,
    const std::vector<std::pair<WordId, WordId>>& queries) {
  OracleBounds bounds;
  bool any = false;
  for (const auto& [x, y] : queries) {
    if (classify_query(x, y, *model.pairs) != QueryClass::IP) continue;
    double f = model.pattern->score(x, y);
    if (!any) {
      bounds.max_f = bounds.min_f = f;
      any = true;
    } else {
      bounds.max_f = std::max(bounds.max_f, f);
      bounds.min_f = std::min(bounds.min_f, f);
    }
  }
  return bounds;
}

double oracle_score(const ComHyperModel& model, WordId x, WordId y,
                    bool gold_label, const OracleBounds& bounds) {
  if (classify_query(x, y, *model.pairs) == QueryClass::IP) {
    return model.pattern->score(x, y);
  }
  return gold_label ? bounds.max_f + 1.0 : bounds.min_f - 1.0;
}

}  // namespace comhyper
