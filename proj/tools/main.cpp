// tempofeat command line: synthesize data, build features, train, predict,
// evaluate, cross-validate and ensemble.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tempofeat/bank.hpp"
#include "tempofeat/csv.hpp"
#include "tempofeat/cv.hpp"
#include "tempofeat/datagen.hpp"
#include "tempofeat/dataset.hpp"
#include "tempofeat/errors.hpp"
#include "tempofeat/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tempofeat;

namespace {

struct CliState {
  RunConfig cfg;
  std::string config_file;
  std::string feature_set_name = "FS8";
  std::string model_name = "gbt";
  bool seed_from_cli = false;
};

void add_common_options(CLI::App* cmd, CliState& st, bool with_learner = true) {
  cmd->add_option("--config", st.config_file, "JSON config file (flags take precedence)");
  cmd->add_option("--data-dir", st.cfg.data_dir, "directory with the input CSV files");
  cmd->add_option("--out", st.cfg.out_dir, "output directory");
  cmd->add_option("--feature-set", st.feature_set_name, "FS1..FS10");
  cmd->add_option("--task", st.cfg.task, "1 = branch visits, 2 = up-sell")
      ->check(CLI::IsMember({1, 2}));
  cmd->add_option("--k", st.cfg.k_clusters, "k-means cluster count for FS8");
  cmd->add_option("--seed", st.cfg.seed, "run seed");
  cmd->add_option("--workers", st.cfg.workers, "worker threads for parallel stages");
  cmd->add_option("--cv-folds", st.cfg.cv_folds, "cross-validation fold count");
  cmd->add_flag("--normalize-targets", st.cfg.normalize_targets,
                "scale visit targets by the per-branch training max");
  cmd->add_flag("--log-transform", st.cfg.log_transform,
                "apply ln(1+x) to numeric feature columns");
  cmd->add_flag("--scale-features", st.cfg.scale_features,
                "standardize feature columns on the training fold");
  cmd->add_flag("--recency-weighted", st.cfg.recency_weighted,
                "weight FS1 averages by ln(1 + day index)");
  if (with_learner) {
    cmd->add_option("--model", st.model_name, "gbt | forest | ridge | logistic");
    cmd->add_option("--n-estimators", st.cfg.n_estimators, "boosting stages / forest trees");
    cmd->add_option("--learning-rate", st.cfg.learning_rate, "gbt shrinkage");
    cmd->add_option("--max-depth", st.cfg.max_depth,
                    "tree depth (0 = model default: gbt 3, forest 12)");
    cmd->add_option("--min-samples-leaf", st.cfg.min_samples_leaf, "minimum rows per leaf");
    cmd->add_option("--l2-lambda", st.cfg.l2_lambda, "ridge/logistic L2 penalty");
  }
}

/// flags > config file > TEMPOFEAT_SEED env (seed only) > defaults
void resolve_config(CLI::App* cmd, CliState& st) {
  if (!st.config_file.empty()) {
    std::ifstream in(st.config_file);
    if (!in) throw ConfigError("cannot read config file " + st.config_file);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const RunConfig file_cfg = RunConfig::from_json_string(text);
    const nlohmann::json j = nlohmann::json::parse(text);
    RunConfig merged = file_cfg;

    // put back every value the command line set explicitly
    auto keep = [&](const char* flag) { return cmd->count(flag) > 0; };
    if (keep("--data-dir")) merged.data_dir = st.cfg.data_dir;
    if (keep("--out")) merged.out_dir = st.cfg.out_dir;
    if (cmd->get_option_no_throw("--task") && keep("--task")) merged.task = st.cfg.task;
    if (keep("--k")) merged.k_clusters = st.cfg.k_clusters;
    if (keep("--seed")) merged.seed = st.cfg.seed;
    if (keep("--workers")) merged.workers = st.cfg.workers;
    if (keep("--cv-folds")) merged.cv_folds = st.cfg.cv_folds;
    if (keep("--normalize-targets")) merged.normalize_targets = st.cfg.normalize_targets;
    if (keep("--log-transform")) merged.log_transform = st.cfg.log_transform;
    if (keep("--scale-features")) merged.scale_features = st.cfg.scale_features;
    if (keep("--recency-weighted")) merged.recency_weighted = st.cfg.recency_weighted;
    if (cmd->get_option_no_throw("--n-estimators")) {
      if (keep("--n-estimators")) merged.n_estimators = st.cfg.n_estimators;
      if (keep("--learning-rate")) merged.learning_rate = st.cfg.learning_rate;
      if (keep("--max-depth")) merged.max_depth = st.cfg.max_depth;
      if (keep("--min-samples-leaf")) merged.min_samples_leaf = st.cfg.min_samples_leaf;
      if (keep("--l2-lambda")) merged.l2_lambda = st.cfg.l2_lambda;
    }
    if (keep("--feature-set")) merged.feature_set = parse_feature_set(st.feature_set_name);
    if (cmd->get_option_no_throw("--model") && keep("--model"))
      merged.model = parse_model_kind(st.model_name);
    st.cfg = merged;
    st.seed_from_cli = keep("--seed") || j.contains("seed");
  } else {
    st.cfg.feature_set = parse_feature_set(st.feature_set_name);
    if (cmd->get_option_no_throw("--model")) st.cfg.model = parse_model_kind(st.model_name);
    st.seed_from_cli = cmd->count("--seed") > 0;
  }
  if (!st.seed_from_cli) {
    if (const char* env = std::getenv("TEMPOFEAT_SEED")) st.cfg.seed = std::strtoull(env, nullptr, 10);
  }
}

Dataset load_data_dir(const RunConfig& cfg, bool need_visits) {
  if (cfg.data_dir.empty()) throw ConfigError("--data-dir is required");
  LoadPaths paths = LoadPaths::in_dir(cfg.data_dir, /*with_visits=*/true);
  if (!fs::exists(paths.visits)) {
    if (need_visits)
      throw ConfigError("Task 1 needs " + paths.visits.string());
    paths.visits.clear();
  }
  return load_dataset(paths);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int cmd_synth(const CliState& st, const GenConfig& gen) {
  const fs::path out = st.cfg.out_dir;
  generate(gen, out, st.cfg.workers);
  std::cout << "synth: wrote " << gen.n_users << " users, " << gen.n_branches
            << " branches under " << out.string() << '\n';
  return 0;
}

int cmd_featurize(CliState& st) {
  const Dataset ds = load_data_dir(st.cfg, false);
  const FittedPreprocess pre = fit_preprocess(ds, st.cfg);
  BuiltFeatures feats = build_features(ds, pre, st.cfg, /*lenient=*/false);
  if (st.cfg.scale_features) {
    const FeatureScaler scaler = fit_scaler(feats.matrix);
    scaler.apply(feats.matrix);
  }
  const fs::path out = st.cfg.out_dir;
  fs::create_directories(out);
  feats.matrix.save_csv(out / "features.csv");
  write_text(out / "manifest.json", feats.matrix.manifest_json(st.cfg.feature_set) + "\n");
  write_text(out / "encoding.json", pre.encoding.to_json_string() + "\n");
  if (pre.kmeans) pre.kmeans->save(out / "kmeans.json");
  write_text(out / "run_config.json", st.cfg.to_json_string() + "\n");
  std::cout << "featurize: " << feats.matrix.n_rows() << " users x "
            << feats.matrix.n_cols() << " columns -> " << (out / "features.csv").string()
            << '\n';
  return 0;
}

int cmd_train(CliState& st, const std::string& model_out) {
  const Dataset ds = load_data_dir(st.cfg, st.cfg.task == 1);
  const PipelineModel model = train_pipeline(ds, st.cfg);
  const fs::path out = model_out.empty()
                           ? fs::path(st.cfg.out_dir) / "model.json"
                           : fs::path(model_out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  model.save(out);
  std::cout << "train: task " << st.cfg.task << " " << to_string(st.cfg.model) << " on "
            << to_string(st.cfg.feature_set) << " -> " << out.string() << '\n';
  return 0;
}

int cmd_predict(CliState& st, const std::string& model_path, const std::string& pred_out) {
  const PipelineModel model = PipelineModel::load(model_path);
  RunConfig data_cfg = model.config;
  data_cfg.data_dir = st.cfg.data_dir;
  data_cfg.workers = st.cfg.workers;
  const Dataset ds = load_data_dir(data_cfg, false);
  const fs::path out = pred_out.empty() ? fs::path(st.cfg.out_dir) / "submission.csv"
                                        : fs::path(pred_out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());

  std::vector<std::int64_t> ids;
  ids.reserve(ds.users.size());
  for (const auto& u : ds.users) ids.push_back(u.user_id);

  PipelineModel runtime = model;  // worker count is a runtime choice
  runtime.config.workers = st.cfg.workers;
  if (model.config.task == 1) {
    write_task1_submission(out, ids, predict_task1(runtime, ds));
  } else {
    write_task2_submission(out, ids, predict_task2(runtime, ds));
  }
  write_text(out.string() + ".config.json", model.config.echo_json_string() + "\n");
  std::cout << "predict: " << ids.size() << " users -> " << out.string() << '\n';
  return 0;
}

int cmd_evaluate(CliState& st, const std::string& pred_path, const std::string& report_out) {
  const Dataset ds = load_data_dir(st.cfg, st.cfg.task == 1);
  const double value = st.cfg.task == 1 ? evaluate_task1_file(pred_path, ds)
                                        : evaluate_task2_file(pred_path, ds);
  ScoreReport report;
  report.task = st.cfg.task;
  report.metric = st.cfg.task == 1 ? "cosine@5" : "auc";
  report.fold_scores = {value};
  report.mean = value;
  report.data_hash = dataset_fingerprint(ds);
  report.config_echo = st.cfg.echo_json_string();
  std::cout << report.table();
  if (!report_out.empty()) {
    write_text(report_out, report.to_json_string() + "\n");
    std::cout << "report: " << report_out << '\n';
  }
  return 0;
}

int cmd_cv(CliState& st, const std::string& report_out) {
  const Dataset ds = load_data_dir(st.cfg, st.cfg.task == 1);
  const ScoreReport report = kfold_cv(ds, st.cfg);
  std::cout << report.table();
  const fs::path out = report_out.empty() ? fs::path(st.cfg.out_dir) / "score_report.json"
                                          : fs::path(report_out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_text(out, report.to_json_string() + "\n");
  std::cout << "report: " << out.string() << '\n';
  return 0;
}

int cmd_ensemble(const std::vector<std::string>& inputs, const std::string& out_path) {
  if (inputs.size() < 2) throw ConfigError("ensemble needs at least two submission files");
  std::vector<std::int64_t> ids;
  std::vector<std::vector<double>> score_lists;
  for (const auto& path : inputs) {
    auto [file_ids, scores] = read_task2_submission(path);
    if (score_lists.empty()) {
      ids = std::move(file_ids);
    } else if (file_ids != ids) {
      throw IntegrityError("ensemble inputs disagree on user ids or order: " + path);
    }
    score_lists.push_back(std::move(scores));
  }
  const auto mean = ensemble_mean(score_lists);
  write_task2_submission(out_path, ids, mean);
  std::cout << "ensemble: " << inputs.size() << " submissions -> " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"temporal activity feature extraction and prediction toolkit"};
  app.require_subcommand(1);

  CliState st;

  // synth
  GenConfig gen;
  bool full_scale = false;
  auto* synth = app.add_subcommand("synth", "generate a seeded synthetic dataset");
  synth->add_option("--out", st.cfg.out_dir, "output directory")->required();
  synth->add_option("--users", gen.n_users, "user count");
  synth->add_option("--branches", gen.n_branches, "branch count");
  synth->add_option("--clusters", gen.k_true, "planted geo cluster count");
  synth->add_option("--missing-rate", gen.missing_rate, "categorical '-' injection rate");
  synth->add_option("--seed", gen.seed, "generator seed");
  synth->add_option("--workers", st.cfg.workers, "worker threads");
  synth->add_flag("--full-scale", full_scale, "191238 users, 323 branches");

  auto* featurize = app.add_subcommand("featurize", "write the feature matrix and manifest");
  add_common_options(featurize, st, /*with_learner=*/false);

  std::string model_out, model_path, pred_path, report_out;
  auto* train = app.add_subcommand("train", "fit a pipeline and save the model artifact");
  add_common_options(train, st);
  train->add_option("--model-out", model_out, "model artifact path (default <out>/model.json)");

  auto* predict = app.add_subcommand("predict", "apply a saved model to a data directory");
  predict->add_option("--model", model_path, "model artifact")->required();
  predict->add_option("--data-dir", st.cfg.data_dir, "input data directory")->required();
  predict->add_option("--out", st.cfg.out_dir, "output directory");
  predict->add_option("--submission", pred_path, "submission path (default <out>/submission.csv)");
  predict->add_option("--workers", st.cfg.workers, "worker threads");

  auto* evaluate = app.add_subcommand("evaluate", "score a submission against targets");
  evaluate->add_option("--pred", pred_path, "submission file")->required();
  evaluate->add_option("--data-dir", st.cfg.data_dir, "dataset with targets")->required();
  evaluate->add_option("--task", st.cfg.task, "1 or 2")->check(CLI::IsMember({1, 2}));
  evaluate->add_option("--report", report_out, "also write a JSON report");

  auto* cv = app.add_subcommand("cv", "k-fold cross validation");
  add_common_options(cv, st);
  cv->add_option("--report", report_out, "report path (default <out>/score_report.json)");

  std::vector<std::string> ensemble_inputs;
  std::string ensemble_out = "ensemble.csv";
  auto* ensemble = app.add_subcommand("ensemble", "element-wise mean of score submissions");
  ensemble->add_option("inputs", ensemble_inputs, "submission files")->expected(-2);
  ensemble->add_option("--out", ensemble_out, "output submission");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors exit 2
  }

  try {
    if (synth->parsed()) {
      if (full_scale) {
        gen.n_users = 191238;
        gen.n_branches = 323;
      }
      return cmd_synth(st, gen);
    }
    if (featurize->parsed()) {
      resolve_config(featurize, st);
      return cmd_featurize(st);
    }
    if (train->parsed()) {
      resolve_config(train, st);
      return cmd_train(st, model_out);
    }
    if (predict->parsed()) return cmd_predict(st, model_path, pred_path);
    if (evaluate->parsed()) return cmd_evaluate(st, pred_path, report_out);
    if (cv->parsed()) {
      resolve_config(cv, st);
      return cmd_cv(st, report_out);
    }
    if (ensemble->parsed()) return cmd_ensemble(ensemble_inputs, ensemble_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
