#pragma once

#include <optional>
#include <string>
#include <vector>

#include "comhyper/encoders.hpp"
#include "comhyper/pattern_model.hpp"

namespace comhyper {

enum class FallbackPolicy { MinScore, WordVectorBackoff };
FallbackPolicy fallback_policy_from_string(const std::string& s);

enum class Route { IP, OOP, Fallback };
std::string to_string(Route r);

// The assembled router: IP pairs go to the pattern scorer f, OOP pairs to
// the distributional encoder g, context-less OOP words to the fallback.
struct ComHyperModel {
  const PatternScorer* pattern = nullptr;
  EncoderPair distributional;
  const ExtractedPairs* pairs = nullptr;
  const ContextStore* store = nullptr;
  const EmbeddingTable* embeddings = nullptr;
  FallbackPolicy fallback_policy = FallbackPolicy::MinScore;
  std::optional<EncoderPair> backoff_encoder;  // W2V head for WordVectorBackoff
  double min_f = 0.0;                          // min of f over V_P x V_P
  mutable std::size_t fallback_count = 0;

  double min_sentinel() const { return min_f - 1.0; }
};

// Verifies that g carries the provenance hash of this f (a zero hash on
// an untrained encoder skips the check).
ComHyperModel assemble_model(const PatternScorer& pattern,
                             EncoderPair distributional,
                             const ExtractedPairs& pairs,
                             const ContextStore& store,
                             const EmbeddingTable& embeddings,
                             FallbackPolicy policy = FallbackPolicy::MinScore);

struct RoutedScore {
  double score;
  Route route;
};

RoutedScore score_routed(const ComHyperModel& model, WordId x, WordId y);
double score(const ComHyperModel& model, WordId x, WordId y);

struct ScoredQuery {
  WordId hypo;
  WordId hyper;
  double score;
  Route route;
};

std::vector<ScoredQuery> score_batch(
    const ComHyperModel& model,
    const std::vector<std::pair<WordId, WordId>>& queries);

// Dataset-level f extremes backing the oracle upper bound.
struct OracleBounds {
  double max_f = 0.0;
  double min_f = 0.0;
};

OracleBounds compute_oracle_bounds(
    const ComHyperModel& model,
    const std::vector<std::pair<WordId, WordId>>& queries);

// IP -> f(q); OOP with a true gold label -> bounds.max_f + 1; otherwise
// bounds.min_f - 1.
double oracle_score(const ComHyperModel& model, WordId x, WordId y,
                    bool gold_label, const OracleBounds& bounds);

}  // namespace comhyper
