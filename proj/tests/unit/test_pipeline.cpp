#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tempofeat/cv.hpp"
#include "tempofeat/datagen.hpp"
#include "tempofeat/errors.hpp"
#include "tempofeat/pipeline.hpp"
#include "test_util.hpp"

using namespace tempofeat;
using test_util::TempDir;

namespace {

Dataset small_synthetic(const TempDir& dir, int users, std::uint64_t seed) {
  GenConfig cfg;
  cfg.n_users = users;
  cfg.n_branches = 6;
  cfg.seed = seed;
  cfg.missing_rate = 0.02;
  generate(cfg, dir.path());
  return load_dataset(LoadPaths::in_dir(dir.path()));
}

}  // namespace

TEST_CASE("saved pipeline models predict identically after reload") {
  TempDir dir("pipe_rt");
  const Dataset ds = small_synthetic(dir, 300, 21);

  SUBCASE("task 2 classifier") {
    RunConfig cfg;
    cfg.task = 2;
    cfg.feature_set = FeatureSet::FS8;
    cfg.model = ModelKind::gbt;
    cfg.n_estimators = 10;
    cfg.seed = 9;
    const PipelineModel model = train_pipeline(ds, cfg);
    const auto direct = predict_task2(model, ds);

    model.save(dir.file("m.json"));
    const PipelineModel loaded = PipelineModel::load(dir.file("m.json"));
    const auto reloaded = predict_task2(loaded, ds);
    REQUIRE(direct.size() == reloaded.size());
    for (std::size_t i = 0; i < direct.size(); ++i) CHECK(direct[i] == reloaded[i]);
  }
  SUBCASE("task 1 bank with branch-parameterized columns and target scaling") {
    RunConfig cfg;
    cfg.task = 1;
    cfg.feature_set = FeatureSet::FS10;
    cfg.model = ModelKind::gbt;
    cfg.n_estimators = 8;
    cfg.normalize_targets = true;
    cfg.log_transform = true;
    cfg.seed = 9;
    const PipelineModel model = train_pipeline(ds, cfg);
    const auto direct = predict_task1(model, ds);

    model.save(dir.file("m1.json"));
    const PipelineModel loaded = PipelineModel::load(dir.file("m1.json"));
    const auto reloaded = predict_task1(loaded, ds);
    REQUIRE(direct.size() == reloaded.size());
    for (std::size_t i = 0; i < direct.size(); ++i) {
      REQUIRE(direct[i].size() == reloaded[i].size());
      for (std::size_t k = 0; k < direct[i].size(); ++k) {
        CHECK(direct[i][k].first == reloaded[i][k].first);
        CHECK(direct[i][k].second == reloaded[i][k].second);
      }
    }
  }
}

TEST_CASE("pipeline rejects invalid task/feature-set combinations") {
  TempDir dir("pipe_bad");
  const Dataset ds = small_synthetic(dir, 120, 5);
  RunConfig cfg;
  cfg.task = 2;
  cfg.feature_set = FeatureSet::FS9;
  CHECK_THROWS_AS(train_pipeline(ds, cfg), ConfigError);
  cfg.feature_set = FeatureSet::FS10;
  CHECK_THROWS_AS(train_pipeline(ds, cfg), ConfigError);
  cfg.task = 3;
  CHECK_THROWS_AS(train_pipeline(ds, cfg), ConfigError);
}

TEST_CASE("prediction tolerates tokens unseen at training time") {
  TempDir dir("pipe_unseen");
  const Dataset ds = small_synthetic(dir, 200, 31);

  RunConfig cfg;
  cfg.task = 2;
  cfg.feature_set = FeatureSet::FS3;
  cfg.model = ModelKind::logistic;
  cfg.scale_features = true;
  const PipelineModel model = train_pipeline(ds, cfg);

  Dataset shifted = ds;
  for (auto& a : shifted.activities) a.loc_cat = "Z" + a.loc_cat;  // all unseen
  shifted.finalize();
  const auto scores = predict_task2(model, shifted);
  CHECK(scores.size() == shifted.users.size());
  for (double s : scores) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("run config json round trip keeps every field") {
  RunConfig cfg;
  cfg.task = 1;
  cfg.feature_set = FeatureSet::FS10;
  cfg.model = ModelKind::forest;
  cfg.k_clusters = 7;
  cfg.normalize_targets = true;
  cfg.log_transform = true;
  cfg.scale_features = true;
  cfg.recency_weighted = true;
  cfg.cv_folds = 3;
  cfg.seed = 123456789;
  cfg.workers = 6;
  cfg.n_estimators = 42;
  cfg.learning_rate = 0.05;
  cfg.max_depth = 9;
  cfg.min_samples_leaf = 4;
  cfg.l2_lambda = 0.25;

  const RunConfig back = RunConfig::from_json_string(cfg.to_json_string());
  CHECK(back.task == cfg.task);
  CHECK(back.feature_set == cfg.feature_set);
  CHECK(back.model == cfg.model);
  CHECK(back.k_clusters == cfg.k_clusters);
  CHECK(back.normalize_targets == cfg.normalize_targets);
  CHECK(back.log_transform == cfg.log_transform);
  CHECK(back.scale_features == cfg.scale_features);
  CHECK(back.recency_weighted == cfg.recency_weighted);
  CHECK(back.cv_folds == cfg.cv_folds);
  CHECK(back.seed == cfg.seed);
  CHECK(back.workers == cfg.workers);
  CHECK(back.n_estimators == cfg.n_estimators);
  CHECK(back.learning_rate == cfg.learning_rate);
  CHECK(back.max_depth == cfg.max_depth);
  CHECK(back.min_samples_leaf == cfg.min_samples_leaf);
  CHECK(back.l2_lambda == cfg.l2_lambda);

  // the artifact echo hides runtime-only fields
  CHECK(cfg.echo_json_string().find("workers") == std::string::npos);
  CHECK(cfg.echo_json_string().find("data_dir") == std::string::npos);
}

TEST_CASE("recency weighting changes FS1 but stays deterministic") {
  TempDir dir("pipe_recency");
  const Dataset ds = small_synthetic(dir, 150, 41);
  RunConfig cfg;
  cfg.task = 2;
  cfg.feature_set = FeatureSet::FS1;
  const FittedPreprocess pre = fit_preprocess(ds, cfg);

  const auto plain = build_features(ds, pre, cfg, false);
  cfg.recency_weighted = true;
  const auto weighted1 = build_features(ds, pre, cfg, false);
  const auto weighted2 = build_features(ds, pre, cfg, false);
  CHECK(weighted1.matrix.values.data == weighted2.matrix.values.data);
  CHECK(plain.matrix.values.data != weighted1.matrix.values.data);
}
