#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tempofeat/bank.hpp"
#include "tempofeat/clustering.hpp"
#include "tempofeat/dataset.hpp"
#include "tempofeat/features.hpp"
#include "tempofeat/metrics.hpp"

namespace tempofeat {

/// Everything a run needs; every field has a default. The effective config is
/// echoed into each output artifact (runtime-only fields — paths and worker
/// count — are excluded from the echo so reruns compare byte-identical).
struct RunConfig {
  std::string data_dir;
  std::string out_dir = ".";

  int task = 2;  // 1 = branch visits, 2 = up-sell
  FeatureSet feature_set = FeatureSet::FS8;
  ModelKind model = ModelKind::gbt;
  int k_clusters = 10;
  bool normalize_targets = false;
  bool log_transform = false;
  bool scale_features = false;
  bool recency_weighted = false;
  int cv_folds = 2;
  std::uint64_t seed = 1;
  int workers = 1;

  // learner knobs
  int n_estimators = 100;
  double learning_rate = 0.1;
  int max_depth = 0;  // 0 = per-model default (gbt 3, forest 12)
  int min_samples_leaf = 1;
  double l2_lambda = 1.0;
  int logistic_max_iter = 100;
  double logistic_tol = 1e-8;

  // k-means knobs
  int kmeans_max_iter = 300;
  double kmeans_tol = 1e-6;

  LearnerConfig learner_config() const;
  int resolved_max_depth() const;

  /// Full round-trippable form, including runtime fields.
  std::string to_json_string() const;
  static RunConfig from_json_string(const std::string& text);
  /// Echo embedded in artifacts; excludes data_dir/out_dir/workers.
  std::string echo_json_string() const;
};

/// Preprocessing state fitted on training data only.
struct FittedPreprocess {
  std::string age_mode;
  EncodingMap encoding;
  std::optional<KMeansModel> kmeans;
};

FittedPreprocess fit_preprocess(const Dataset& train, const RunConfig& cfg);

struct BuiltFeatures {
  FeatureMatrix matrix;
  std::vector<GeoPoint> home_geo;      // per row
  std::vector<GeoPoint> activity_geo;  // mean activity geo per row
};

/// Assemble features for any dataset using training-fitted state. `lenient`
/// maps tokens unseen at fit time into the missing slot instead of throwing.
BuiltFeatures build_features(const Dataset& ds, const FittedPreprocess& pre,
                             const RunConfig& cfg, bool lenient,
                             const FeatureScaler* scaler = nullptr);

/// A trained end-to-end pipeline: preprocessing state plus the task model.
struct PipelineModel {
  RunConfig config;
  FittedPreprocess preprocess;
  std::optional<FeatureScaler> scaler;
  std::uint64_t manifest_hash = 0;
  std::optional<ModelBank> bank;        // task 1
  std::optional<Regressor> classifier;  // task 2
  std::int64_t excluded_unlabeled = 0;  // task 2 training rows without labels

  void save(const std::filesystem::path& path) const;
  static PipelineModel load(const std::filesystem::path& path);
};

PipelineModel train_pipeline(const Dataset& train, const RunConfig& cfg);

/// Top-5 branch predictions per user, aligned with ds.users.
std::vector<BranchVector> predict_task1(const PipelineModel& model, const Dataset& ds);

/// Up-sell scores per user, aligned with ds.users.
std::vector<double> predict_task2(const PipelineModel& model, const Dataset& ds);

/// Truth vectors per user, aligned with ds.users, from the visits table.
std::vector<BranchVector> truth_vectors(const Dataset& ds);

// --- submission files -----------------------------------------------------

void write_task1_submission(const std::filesystem::path& path,
                            const std::vector<std::int64_t>& user_ids,
                            const std::vector<BranchVector>& top5);
std::pair<std::vector<std::int64_t>, std::vector<BranchVector>> read_task1_submission(
    const std::filesystem::path& path);

void write_task2_submission(const std::filesystem::path& path,
                            const std::vector<std::int64_t>& user_ids,
                            const std::vector<double>& scores);
std::pair<std::vector<std::int64_t>, std::vector<double>> read_task2_submission(
    const std::filesystem::path& path);

/// Score a submission file against a dataset with targets.
double evaluate_task1_file(const std::filesystem::path& submission, const Dataset& ds);
double evaluate_task2_file(const std::filesystem::path& submission, const Dataset& ds);

}  // namespace tempofeat
