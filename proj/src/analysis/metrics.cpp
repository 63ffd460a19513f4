#include "embsizer/analysis/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "embsizer/core/error.hpp"
#include "embsizer/core/loss.hpp"

namespace embsizer::analysis {

double auc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw MetricError("auc: scores/labels length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positives = 0.0;
  double rank_sum = 0.0;  // sum of 1-based mid-ranks of positives
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      const double y = labels[order[k]];
      if (y != 0.0 && y != 1.0) throw MetricError("auc: label outside {0,1}");
      if (y == 1.0) {
        positives += 1.0;
        rank_sum += mid_rank;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0.0 || negatives == 0.0) throw MetricError("auc: undefined for single-class input");
  const double u = rank_sum - positives * (positives + 1.0) / 2.0;
  return u / (positives * negatives);
}

double logloss(std::span<const double> probabilities, std::span<const double> labels) {
  if (probabilities.size() != labels.size()) throw MetricError("logloss: length mismatch");
  if (probabilities.empty()) throw MetricError("logloss: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) total += cross_entropy(probabilities[i], labels[i]);
  return total / static_cast<double>(labels.size());
}

double kendall_tau(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw MetricError("kendall_tau: length mismatch");
  const std::size_t n = a.size();
  if (n < 2) throw MetricError("kendall_tau: needs at least two pairs");
  double concordant = 0.0, discordant = 0.0, ties_a = 0.0, ties_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      if (da == 0.0 && db == 0.0) {
        ties_a += 1.0;
        ties_b += 1.0;
      } else if (da == 0.0) {
        ties_a += 1.0;
      } else if (db == 0.0) {
        ties_b += 1.0;
      } else if ((da > 0.0) == (db > 0.0)) {
        concordant += 1.0;
      } else {
        discordant += 1.0;
      }
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double denom = std::sqrt((pairs - ties_a) * (pairs - ties_b));
  if (denom == 0.0) throw MetricError("kendall_tau: undefined when a ranking is entirely tied");
  return (concordant - discordant) / denom;
}

}  // namespace embsizer::analysis
