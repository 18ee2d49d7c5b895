#include "tempofeat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace tempofeat {

double cosine_pair(const BranchVector& pred, const BranchVector& truth) {
  double t_norm2 = 0.0;
  for (const auto& [b, v] : truth) t_norm2 += v * v;
  double p_norm2 = 0.0;
  for (const auto& [b, v] : pred) p_norm2 += v * v;
  if (t_norm2 <= 0.0 || p_norm2 <= 0.0) return 0.0;

  std::map<int, double> t_map;
  for (const auto& [b, v] : truth) t_map[b] += v;
  double dot = 0.0;
  for (const auto& [b, v] : pred) {
    auto it = t_map.find(b);
    if (it != t_map.end()) dot += v * it->second;
  }
  return dot / (std::sqrt(p_norm2) * std::sqrt(t_norm2));
}

double cosine_top5(const std::vector<BranchVector>& predictions,
                   const std::vector<BranchVector>& truth) {
  if (predictions.size() != truth.size())
    throw std::invalid_argument("cosine_top5: prediction/truth user counts differ");
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t u = 0; u < truth.size(); ++u) {
    double t_norm2 = 0.0;
    for (const auto& [b, v] : truth[u]) t_norm2 += v * v;
    if (t_norm2 <= 0.0) continue;  // cosine undefined, user excluded
    sum += cosine_pair(predictions[u], truth[u]);
    ++counted;
  }
  if (counted == 0)
    throw std::invalid_argument("cosine_top5: every truth vector is all-zero");
  return sum / static_cast<double>(counted);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("roc_auc: scores/labels length mismatch");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (int l : labels) {
    if (l != 0 && l != 1) throw std::invalid_argument("roc_auc: labels must be 0 or 1");
    n_pos += static_cast<std::size_t>(l);
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("roc_auc: both classes must be present");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // average ranks over tie groups; ranks are 1-based
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k)
      if (labels[idx[k]] == 1) pos_rank_sum += avg_rank;
    i = j + 1;
  }
  const double p = static_cast<double>(n_pos);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) /
         (p * static_cast<double>(n_neg));
}

}  // namespace tempofeat
