#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tempofeat/features.hpp"
#include "tempofeat/forest.hpp"
#include "tempofeat/gbt.hpp"
#include "tempofeat/linear.hpp"
#include "tempofeat/types.hpp"

namespace tempofeat {

enum class ModelKind { gbt, forest, ridge, logistic };

ModelKind parse_model_kind(const std::string& name);
std::string to_string(ModelKind kind);

/// Hyperparameters for whichever learner a pipeline instantiates.
struct LearnerConfig {
  ModelKind kind = ModelKind::gbt;
  GbtConfig gbt;
  ForestConfig forest;
  double ridge_lambda = 1.0;
  LogisticConfig logistic;
};

/// One fitted learner behind a uniform predict surface.
struct Regressor {
  std::variant<GbtModel, ForestModel, LinearModel> model;

  std::vector<double> predict(const FlatMatrix& x) const;
  std::string to_json_string() const;
  static Regressor from_json_string(const std::string& text);
};

Regressor fit_regressor(const FlatMatrix& x, std::span<const double> y,
                        const LearnerConfig& cfg, std::uint64_t seed);

/// Per-branch max normalization of training visit counts; max 0 (all-zero
/// branch) leaves values untouched.
struct TargetScaler {
  double max_value = 0.0;

  double norm(double y) const { return max_value > 0.0 ? y / max_value : y; }
  double denorm(double y) const { return max_value > 0.0 ? y * max_value : y; }

  static TargetScaler fit(std::span<const double> y);
};

/// Row-aligned inputs for the branch bank: the assembled feature matrix
/// (FS9/FS10 columns present as zero placeholders when requested) plus the
/// per-user geolocations those columns are derived from.
struct BankInputs {
  const FeatureMatrix* features = nullptr;
  std::vector<GeoPoint> user_home_geo;      // per row
  std::vector<GeoPoint> user_activity_geo;  // mean activity geo per row
};

struct BankConfig {
  bool use_fs9 = false;
  bool use_fs10 = false;
  bool normalize_targets = false;
  /// Apply ln(1+x) to the filled distance columns, matching a log-transformed
  /// base matrix.
  bool log_transform_extras = false;
  LearnerConfig learner;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// One independently trained regressor per branch. The FS9/FS10 placeholder
/// columns are filled per branch from the row geolocations, both at training
/// and at prediction time; per-branch seeds are base_seed XOR branch_id so
/// results do not depend on the worker count.
struct ModelBank {
  std::vector<BranchInfo> branches;
  std::vector<Regressor> models;      // per branch
  std::vector<TargetScaler> scalers;  // per branch (identity when unused)
  BankConfig config;
  int fs9_column = -1;   // placeholder column indices, -1 when absent
  int fs10_column = -1;

  static ModelBank train(const BankInputs& inputs, std::span<const VisitTarget> targets,
                         const std::vector<BranchInfo>& branches, const BankConfig& cfg);

  /// Denormalized per-branch visit predictions for every row; scores[b][r].
  std::vector<std::vector<double>> branch_scores(const BankInputs& inputs,
                                                 int workers = 1) const;

  /// Top-5 (branch_id, predicted_visits) per row.
  std::vector<std::vector<std::pair<int, double>>> predict_top5_all(
      const BankInputs& inputs, int workers = 1) const;
};

/// Rank branch scores: clip negatives to zero, sort by value descending then
/// branch_id ascending, keep the first min(5, B).
std::vector<std::pair<int, double>> top5_from_scores(std::span<const double> scores);

/// Element-wise mean of k aligned score lists. Throws on length mismatch.
std::vector<double> ensemble_mean(const std::vector<std::vector<double>>& score_lists);

}  // namespace tempofeat
