#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tempofeat/pipeline.hpp"

namespace tempofeat {

/// Seeded shuffle of user ids into k near-equal folds (sizes differ by at
/// most one).
struct FoldSplit {
  int k = 2;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::int64_t>> folds;

  static FoldSplit make(std::vector<std::int64_t> user_ids, int k, std::uint64_t seed);
};

/// Per-fold and mean metric values plus the run fingerprint.
struct ScoreReport {
  int task = 0;
  std::string metric;  // "cosine@5" | "auc"
  std::vector<double> fold_scores;
  double mean = 0.0;
  std::uint64_t data_hash = 0;
  std::string config_echo;  // RunConfig::echo_json_string()
  std::int64_t excluded_unlabeled = 0;

  std::string to_json_string() const;
  static ScoreReport from_json_string(const std::string& text);
  /// Human-readable aligned table.
  std::string table() const;
};

/// k-fold cross validation: every stateful component (imputation mode,
/// encodings, clustering, scalers, models) is re-fitted on the training folds
/// only. Task 2 runs on labeled users; a fold with a single class throws.
ScoreReport kfold_cv(const Dataset& ds, const RunConfig& cfg);

/// Task 1 baseline: the 5 globally most-visited branches of the training
/// targets, predicted for every user with their global counts as values.
BranchVector popularity_top5(std::span<const VisitTarget> train_visits);

}  // namespace tempofeat
