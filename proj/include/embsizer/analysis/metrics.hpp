#pragma once

#include <span>

namespace embsizer::analysis {

// Rank-based (Mann-Whitney) AUC; tied scores contribute 1/2. Throws
// MetricError unless both classes are present.
double auc(std::span<const double> scores, std::span<const double> labels);

// Mean clamped cross-entropy of probabilities against {0,1} labels.
double logloss(std::span<const double> probabilities, std::span<const double> labels);

// Tie-adjusted Kendall rank correlation (tau-b) between paired score lists.
// Throws MetricError for fewer than two pairs or when either list is
// entirely tied.
double kendall_tau(std::span<const double> a, std::span<const double> b);

}  // namespace embsizer::analysis
