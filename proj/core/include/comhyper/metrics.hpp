#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "comhyper/common.hpp"

namespace comhyper {

// Mean over positive ranks r of precision@r, after a stable descending
// sort by score (ties keep input order). Requires at least one positive.
double average_precision(const std::vector<double>& scores,
                         const std::vector<bool>& labels);

// Fraction of true hypernymy pairs (x, y) where scorer(x, y) > scorer(y, x);
// ties count as incorrect.
double direction_accuracy(
    const std::function<double(WordId, WordId)>& scorer,
    const std::vector<std::pair<WordId, WordId>>& true_pairs);

// Spearman's rho: Pearson correlation of fractional (average-on-ties) ranks.
double spearman(const std::vector<double>& preds,
                const std::vector<double>& golds);

}  // namespace comhyper
