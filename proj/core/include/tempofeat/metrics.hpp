#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace tempofeat {

/// Sparse per-user vector over branches: (branch_id, value) pairs.
using BranchVector = std::vector<std::pair<int, double>>;

/// Mean per-user cosine similarity between the predicted top-5 visit vector
/// and the true visit-count vector. Users whose true vector is all-zero are
/// excluded from the average; a zero-norm prediction against a non-zero truth
/// scores 0. Throws when no user has a non-zero truth vector.
double cosine_top5(const std::vector<BranchVector>& predictions,
                   const std::vector<BranchVector>& truth);

/// Cosine similarity of two sparse branch vectors.
double cosine_pair(const BranchVector& pred, const BranchVector& truth);

/// ROC AUC via the rank-statistic (Mann-Whitney) formulation; tied scores
/// count one half. Throws unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace tempofeat
