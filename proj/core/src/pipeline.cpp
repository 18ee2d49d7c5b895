#include "tempofeat/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tempofeat/csv.hpp"
#include "tempofeat/errors.hpp"
#include "tempofeat/rng.hpp"

namespace tempofeat {

namespace {

using nlohmann::json;

json config_fields(const RunConfig& c, bool runtime) {
  json j;
  if (runtime) {
    j["data_dir"] = c.data_dir;
    j["out_dir"] = c.out_dir;
    j["workers"] = c.workers;
  }
  j["task"] = c.task;
  j["feature_set"] = to_string(c.feature_set);
  j["model"] = to_string(c.model);
  j["k_clusters"] = c.k_clusters;
  j["normalize_targets"] = c.normalize_targets;
  j["log_transform"] = c.log_transform;
  j["scale_features"] = c.scale_features;
  j["recency_weighted"] = c.recency_weighted;
  j["cv_folds"] = c.cv_folds;
  j["seed"] = c.seed;
  j["n_estimators"] = c.n_estimators;
  j["learning_rate"] = c.learning_rate;
  j["max_depth"] = c.max_depth;
  j["min_samples_leaf"] = c.min_samples_leaf;
  j["l2_lambda"] = c.l2_lambda;
  j["logistic_max_iter"] = c.logistic_max_iter;
  j["logistic_tol"] = c.logistic_tol;
  j["kmeans_max_iter"] = c.kmeans_max_iter;
  j["kmeans_tol"] = c.kmeans_tol;
  return j;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spill(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int RunConfig::resolved_max_depth() const {
  if (max_depth > 0) return max_depth;
  return model == ModelKind::forest ? 12 : 3;
}

LearnerConfig RunConfig::learner_config() const {
  LearnerConfig lc;
  lc.kind = model;
  lc.gbt.n_estimators = n_estimators;
  lc.gbt.learning_rate = learning_rate;
  lc.gbt.max_depth = resolved_max_depth();
  lc.gbt.min_samples_leaf = min_samples_leaf;
  lc.gbt.loss = task == 2 ? GbtLoss::logistic : GbtLoss::squared;
  lc.forest.n_trees = n_estimators;
  lc.forest.max_depth = resolved_max_depth();
  lc.forest.min_samples_leaf = min_samples_leaf;
  lc.ridge_lambda = l2_lambda;
  lc.logistic.l2_lambda = l2_lambda;
  lc.logistic.max_iter = logistic_max_iter;
  lc.logistic.tol = logistic_tol;
  return lc;
}

std::string RunConfig::to_json_string() const { return config_fields(*this, true).dump(2); }

std::string RunConfig::echo_json_string() const { return config_fields(*this, false).dump(); }

RunConfig RunConfig::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  RunConfig c;
  auto get = [&j](const char* key, auto& into) {
    if (j.contains(key)) into = j.at(key).get<std::decay_t<decltype(into)>>();
  };
  get("data_dir", c.data_dir);
  get("out_dir", c.out_dir);
  get("workers", c.workers);
  get("task", c.task);
  if (j.contains("feature_set"))
    c.feature_set = parse_feature_set(j.at("feature_set").get<std::string>());
  if (j.contains("model")) c.model = parse_model_kind(j.at("model").get<std::string>());
  get("k_clusters", c.k_clusters);
  get("normalize_targets", c.normalize_targets);
  get("log_transform", c.log_transform);
  get("scale_features", c.scale_features);
  get("recency_weighted", c.recency_weighted);
  get("cv_folds", c.cv_folds);
  get("seed", c.seed);
  get("n_estimators", c.n_estimators);
  get("learning_rate", c.learning_rate);
  get("max_depth", c.max_depth);
  get("min_samples_leaf", c.min_samples_leaf);
  get("l2_lambda", c.l2_lambda);
  get("logistic_max_iter", c.logistic_max_iter);
  get("logistic_tol", c.logistic_tol);
  get("kmeans_max_iter", c.kmeans_max_iter);
  get("kmeans_tol", c.kmeans_tol);
  return c;
}

FittedPreprocess fit_preprocess(const Dataset& train, const RunConfig& cfg) {
  FittedPreprocess pre;
  pre.age_mode = age_mode(train.users);

  // encoding is fitted on imputed users so the dataset the models see and the
  // one the encoding saw agree
  Dataset imputed;  // shallow working copy: users only matter for encoding
  imputed.users = train.users;
  apply_age_imputation(imputed.users, pre.age_mode);
  imputed.activities = train.activities;
  pre.encoding = fit_encoding(imputed);

  if (static_cast<int>(cfg.feature_set) >= 8) {
    std::vector<GeoPoint> pts;
    pts.reserve(train.users.size());
    for (const auto& u : train.users) pts.push_back(u.geo);
    pre.kmeans = kmeans_fit(pts, cfg.k_clusters, cfg.kmeans_max_iter, cfg.kmeans_tol,
                            derive_seed(cfg.seed, 0x6b6d65616e73ULL));
  }
  return pre;
}

BuiltFeatures build_features(const Dataset& ds, const FittedPreprocess& pre,
                             const RunConfig& cfg, bool lenient, const FeatureScaler* scaler) {
  BuiltFeatures out;

  AssembleOptions opt;
  opt.feature_set = cfg.feature_set;
  opt.recency_weighted = cfg.recency_weighted;
  opt.workers = cfg.workers;
  opt.lenient_encoding = lenient;
  opt.allow_branch_placeholders = cfg.task == 1;

  std::vector<int> assignments;
  if (static_cast<int>(cfg.feature_set) >= 8) {
    if (!pre.kmeans) throw ConfigError("FS8+ requires a fitted clustering model");
    std::vector<GeoPoint> pts;
    pts.reserve(ds.users.size());
    for (const auto& u : ds.users) pts.push_back(u.geo);
    assignments = kmeans_assign_all(*pre.kmeans, pts, cfg.workers);
    opt.cluster_assignments = &assignments;
    opt.n_clusters = pre.kmeans->k;
  }

  out.matrix = assemble(ds, pre.encoding, opt);
  if (cfg.log_transform) out.matrix = log_transform(std::move(out.matrix));
  if (scaler != nullptr) scaler->apply(out.matrix);

  out.home_geo.reserve(ds.users.size());
  out.activity_geo.reserve(ds.users.size());
  for (std::size_t ui = 0; ui < ds.users.size(); ++ui) {
    out.home_geo.push_back(ds.users[ui].geo);
    out.activity_geo.push_back(
        mean_activity_geo(ds.user_activities(ui), ds.users[ui].geo));
  }
  return out;
}

PipelineModel train_pipeline(const Dataset& train, const RunConfig& cfg) {
  if (cfg.task != 1 && cfg.task != 2) throw ConfigError("task must be 1 or 2");
  if (cfg.task == 2 && static_cast<int>(cfg.feature_set) >= 9)
    throw ConfigError(to_string(cfg.feature_set) +
                      " is branch-parameterized and only valid for Task 1");

  PipelineModel model;
  model.config = cfg;
  model.preprocess = fit_preprocess(train, cfg);

  BuiltFeatures feats = build_features(train, model.preprocess, cfg, /*lenient=*/false);
  if (cfg.scale_features) {
    model.scaler = fit_scaler(feats.matrix);
    model.scaler->apply(feats.matrix);
  }
  model.manifest_hash = feats.matrix.manifest_hash();

  if (cfg.task == 1) {
    if (train.visits.empty())
      throw IntegrityError("Task 1 training requires visit targets (visits.csv)");
    BankConfig bc;
    bc.use_fs9 = static_cast<int>(cfg.feature_set) >= 9;
    bc.use_fs10 = static_cast<int>(cfg.feature_set) >= 10;
    bc.normalize_targets = cfg.normalize_targets;
    bc.log_transform_extras = cfg.log_transform;
    bc.learner = cfg.learner_config();
    bc.seed = cfg.seed;
    bc.workers = cfg.workers;
    BankInputs inputs{&feats.matrix, feats.home_geo, feats.activity_geo};
    model.bank = ModelBank::train(inputs, train.visits, train.branches, bc);
  } else {
    std::vector<std::size_t> labeled_rows;
    for (std::size_t ui = 0; ui < train.users.size(); ++ui) {
      if (train.users[ui].task2_label)
        labeled_rows.push_back(ui);
      else
        ++model.excluded_unlabeled;
    }
    if (labeled_rows.size() < 2)
      throw IntegrityError("Task 2 training requires labeled users (target column)");
    FlatMatrix x(labeled_rows.size(), feats.matrix.n_cols());
    std::vector<double> y(labeled_rows.size());
    for (std::size_t i = 0; i < labeled_rows.size(); ++i) {
      const auto src = feats.matrix.values.row(labeled_rows[i]);
      std::copy(src.begin(), src.end(), x.row(i).begin());
      y[i] = *train.users[labeled_rows[i]].task2_label;
    }
    model.classifier = fit_regressor(x, y, cfg.learner_config(), cfg.seed);
  }
  return model;
}

std::vector<BranchVector> predict_task1(const PipelineModel& model, const Dataset& ds) {
  if (!model.bank) throw ConfigError("model was not trained for Task 1");
  BuiltFeatures feats =
      build_features(ds, model.preprocess, model.config, /*lenient=*/true,
                     model.scaler ? &*model.scaler : nullptr);
  BankInputs inputs{&feats.matrix, feats.home_geo, feats.activity_geo};
  return model.bank->predict_top5_all(inputs, model.config.workers);
}

std::vector<double> predict_task2(const PipelineModel& model, const Dataset& ds) {
  if (!model.classifier) throw ConfigError("model was not trained for Task 2");
  BuiltFeatures feats =
      build_features(ds, model.preprocess, model.config, /*lenient=*/true,
                     model.scaler ? &*model.scaler : nullptr);
  return model.classifier->predict(feats.matrix.values);
}

std::vector<BranchVector> truth_vectors(const Dataset& ds) {
  std::vector<BranchVector> out(ds.users.size());
  for (std::size_t ui = 0; ui < ds.users.size(); ++ui) {
    for (const auto& v : ds.user_visits(ui))
      if (v.visits > 0) out[ui].emplace_back(v.branch_id, v.visits);
  }
  return out;
}

void PipelineModel::save(const std::filesystem::path& path) const {
  json j;
  j["format"] = "tempofeat-model";
  j["version"] = 1;
  j["config"] = json::parse(config.echo_json_string());
  j["age_mode"] = preprocess.age_mode;
  j["encoding"] = json::parse(preprocess.encoding.to_json_string());
  if (preprocess.kmeans)
    j["kmeans"] = json::parse(preprocess.kmeans->to_json_string());
  if (scaler) j["scaler"] = json::parse(scaler->to_json_string());
  j["manifest_hash"] = manifest_hash;
  j["excluded_unlabeled"] = excluded_unlabeled;
  if (bank) {
    json jb;
    jb["use_fs9"] = bank->config.use_fs9;
    jb["use_fs10"] = bank->config.use_fs10;
    jb["normalize_targets"] = bank->config.normalize_targets;
    jb["log_transform_extras"] = bank->config.log_transform_extras;
    jb["seed"] = bank->config.seed;
    jb["fs9_column"] = bank->fs9_column;
    jb["fs10_column"] = bank->fs10_column;
    json branches = json::array();
    for (const auto& b : bank->branches)
      branches.push_back({{"id", b.branch_id}, {"x", b.geo.x}, {"y", b.geo.y}});
    jb["branches"] = std::move(branches);
    json scalers = json::array();
    for (const auto& s : bank->scalers) scalers.push_back(s.max_value);
    jb["target_scalers"] = std::move(scalers);
    json models = json::array();
    for (const auto& m : bank->models) models.push_back(json::parse(m.to_json_string()));
    jb["models"] = std::move(models);
    j["bank"] = std::move(jb);
  }
  if (classifier) j["classifier"] = json::parse(classifier->to_json_string());
  spill(path, j.dump());
}

PipelineModel PipelineModel::load(const std::filesystem::path& path) {
  const json j = json::parse(slurp(path));
  if (j.value("format", "") != "tempofeat-model")
    throw std::runtime_error(path.string() + " is not a tempofeat model artifact");
  PipelineModel m;
  m.config = RunConfig::from_json_string(j.at("config").dump());
  m.preprocess.age_mode = j.at("age_mode").get<std::string>();
  m.preprocess.encoding = EncodingMap::from_json_string(j.at("encoding").dump());
  if (j.contains("kmeans"))
    m.preprocess.kmeans = KMeansModel::from_json_string(j.at("kmeans").dump());
  if (j.contains("scaler"))
    m.scaler = FeatureScaler::from_json_string(j.at("scaler").dump());
  m.manifest_hash = j.at("manifest_hash").get<std::uint64_t>();
  m.excluded_unlabeled = j.at("excluded_unlabeled").get<std::int64_t>();
  if (j.contains("bank")) {
    const json& jb = j.at("bank");
    ModelBank bank;
    bank.config.use_fs9 = jb.at("use_fs9").get<bool>();
    bank.config.use_fs10 = jb.at("use_fs10").get<bool>();
    bank.config.normalize_targets = jb.at("normalize_targets").get<bool>();
    bank.config.log_transform_extras = jb.at("log_transform_extras").get<bool>();
    bank.config.seed = jb.at("seed").get<std::uint64_t>();
    bank.fs9_column = jb.at("fs9_column").get<int>();
    bank.fs10_column = jb.at("fs10_column").get<int>();
    for (const auto& b : jb.at("branches"))
      bank.branches.push_back(
          {b.at("id").get<int>(), {b.at("x").get<double>(), b.at("y").get<double>()}});
    for (const auto& s : jb.at("target_scalers")) {
      TargetScaler ts;
      ts.max_value = s.get<double>();
      bank.scalers.push_back(ts);
    }
    for (const auto& mj : jb.at("models"))
      bank.models.push_back(Regressor::from_json_string(mj.dump()));
    m.bank = std::move(bank);
  }
  if (j.contains("classifier"))
    m.classifier = Regressor::from_json_string(j.at("classifier").dump());
  return m;
}

// --- submissions ------------------------------------------------------------

void write_task1_submission(const std::filesystem::path& path,
                            const std::vector<std::int64_t>& user_ids,
                            const std::vector<BranchVector>& top5) {
  if (user_ids.size() != top5.size())
    throw std::invalid_argument("task1 submission: user/prediction count mismatch");
  std::vector<std::string> header = {"user_id", "b1:v1", "b2:v2", "b3:v3", "b4:v4", "b5:v5"};
  std::vector<std::vector<std::string>> rows;
  rows.reserve(user_ids.size());
  for (std::size_t i = 0; i < user_ids.size(); ++i) {
    std::vector<std::string> r;
    r.push_back(std::to_string(user_ids[i]));
    for (std::size_t k = 0; k < 5; ++k) {
      if (k < top5[i].size())
        r.push_back(std::to_string(top5[i][k].first) + ":" +
                    format_double(top5[i][k].second));
      else
        r.push_back("");
    }
    rows.push_back(std::move(r));
  }
  write_csv(path, header, rows);
}

std::pair<std::vector<std::int64_t>, std::vector<BranchVector>> read_task1_submission(
    const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  std::vector<std::int64_t> ids;
  std::vector<BranchVector> preds;
  std::size_t line = 1;
  for (const auto& r : t.rows) {
    ++line;
    if (r.empty()) continue;
    ids.push_back(parse_int_field(r[0], t.path, line, "user_id"));
    BranchVector v;
    for (std::size_t k = 1; k < r.size(); ++k) {
      if (r[k].empty()) continue;
      const auto colon = r[k].find(':');
      if (colon == std::string::npos)
        throw ParseError(t.path, line, t.header[k], "expected branch:visits pair");
      const int branch = static_cast<int>(
          parse_int_field(r[k].substr(0, colon), t.path, line, t.header[k]));
      const double visits =
          parse_double_field(r[k].substr(colon + 1), t.path, line, t.header[k]);
      v.emplace_back(branch, visits);
    }
    preds.push_back(std::move(v));
  }
  return {std::move(ids), std::move(preds)};
}

void write_task2_submission(const std::filesystem::path& path,
                            const std::vector<std::int64_t>& user_ids,
                            const std::vector<double>& scores) {
  if (user_ids.size() != scores.size())
    throw std::invalid_argument("task2 submission: user/score count mismatch");
  std::vector<std::vector<std::string>> rows;
  rows.reserve(user_ids.size());
  for (std::size_t i = 0; i < user_ids.size(); ++i)
    rows.push_back({std::to_string(user_ids[i]),
                    format_double(std::clamp(scores[i], 0.0, 1.0))});
  write_csv(path, {"user_id", "score"}, rows);
}

std::pair<std::vector<std::int64_t>, std::vector<double>> read_task2_submission(
    const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header.size() != 2)
    throw ParseError(t.path, 1, "-", "expected header user_id,score");
  std::vector<std::int64_t> ids;
  std::vector<double> scores;
  std::size_t line = 1;
  for (const auto& r : t.rows) {
    ++line;
    ids.push_back(parse_int_field(r[0], t.path, line, "user_id"));
    scores.push_back(parse_double_field(r[1], t.path, line, "score"));
  }
  return {std::move(ids), std::move(scores)};
}

double evaluate_task1_file(const std::filesystem::path& submission, const Dataset& ds) {
  const auto [ids, preds] = read_task1_submission(submission);
  const auto truth = truth_vectors(ds);
  std::vector<BranchVector> aligned_pred(ds.users.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto idx = ds.user_index(ids[i]);
    if (idx < 0)
      throw IntegrityError("submission user " + std::to_string(ids[i]) +
                           " is not in the evaluation dataset");
    aligned_pred[static_cast<std::size_t>(idx)] = preds[i];
  }
  return cosine_top5(aligned_pred, truth);
}

double evaluate_task2_file(const std::filesystem::path& submission, const Dataset& ds) {
  const auto [ids, scores] = read_task2_submission(submission);
  std::vector<double> s;
  std::vector<int> labels;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto idx = ds.user_index(ids[i]);
    if (idx < 0)
      throw IntegrityError("submission user " + std::to_string(ids[i]) +
                           " is not in the evaluation dataset");
    const auto& label = ds.users[static_cast<std::size_t>(idx)].task2_label;
    if (!label) continue;  // unlabeled users cannot be scored
    s.push_back(scores[i]);
    labels.push_back(*label);
  }
  return roc_auc(s, labels);
}

}  // namespace tempofeat
