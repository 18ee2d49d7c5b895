#include "tempofeat/cv.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "tempofeat/errors.hpp"
#include "tempofeat/rng.hpp"

namespace tempofeat {

namespace {
using nlohmann::json;
}

FoldSplit FoldSplit::make(std::vector<std::int64_t> user_ids, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross validation needs k >= 2 folds");
  if (user_ids.size() < static_cast<std::size_t>(k))
    throw ConfigError("not enough users for " + std::to_string(k) + " folds");
  std::sort(user_ids.begin(), user_ids.end());
  Rng rng(derive_seed(seed, 0x666f6c64ULL));
  for (std::size_t i = user_ids.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(user_ids[i - 1], user_ids[j]);
  }
  FoldSplit split;
  split.k = k;
  split.seed = seed;
  split.folds.resize(k);
  const std::size_t base = user_ids.size() / k;
  const std::size_t rem = user_ids.size() % k;
  std::size_t at = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t len = base + (static_cast<std::size_t>(f) < rem ? 1 : 0);
    split.folds[f].assign(user_ids.begin() + at, user_ids.begin() + at + len);
    at += len;
  }
  return split;
}

ScoreReport kfold_cv(const Dataset& ds, const RunConfig& cfg) {
  if (cfg.task != 1 && cfg.task != 2) throw ConfigError("task must be 1 or 2");

  ScoreReport report;
  report.task = cfg.task;
  report.metric = cfg.task == 1 ? "cosine@5" : "auc";
  report.data_hash = dataset_fingerprint(ds);
  report.config_echo = cfg.echo_json_string();

  std::vector<std::int64_t> pool;
  if (cfg.task == 2) {
    for (const auto& u : ds.users) {
      if (u.task2_label)
        pool.push_back(u.user_id);
      else
        ++report.excluded_unlabeled;
    }
  } else {
    for (const auto& u : ds.users) pool.push_back(u.user_id);
  }

  const FoldSplit split = FoldSplit::make(pool, cfg.cv_folds, cfg.seed);

  for (int f = 0; f < split.k; ++f) {
    std::vector<std::int64_t> train_ids;
    for (int g = 0; g < split.k; ++g)
      if (g != f)
        train_ids.insert(train_ids.end(), split.folds[g].begin(), split.folds[g].end());

    const Dataset train = subset_users(ds, train_ids);
    const Dataset eval = subset_users(ds, split.folds[f]);

    if (cfg.task == 2) {
      auto single_class = [](const Dataset& part) {
        bool has0 = false, has1 = false;
        for (const auto& u : part.users) {
          if (!u.task2_label) continue;
          (*u.task2_label ? has1 : has0) = true;
        }
        return !(has0 && has1);
      };
      if (single_class(train) || single_class(eval))
        throw ConfigError(
            "fold " + std::to_string(f) +
            " contains a single Task 2 class; use larger folds or a different seed");
    }

    const PipelineModel model = train_pipeline(train, cfg);
    if (cfg.task == 1) {
      const auto preds = predict_task1(model, eval);
      report.fold_scores.push_back(cosine_top5(preds, truth_vectors(eval)));
    } else {
      const auto scores = predict_task2(model, eval);
      std::vector<double> s;
      std::vector<int> labels;
      for (std::size_t ui = 0; ui < eval.users.size(); ++ui) {
        if (!eval.users[ui].task2_label) continue;
        s.push_back(scores[ui]);
        labels.push_back(*eval.users[ui].task2_label);
      }
      report.fold_scores.push_back(roc_auc(s, labels));
    }
  }

  double sum = 0.0;
  for (double v : report.fold_scores) sum += v;
  report.mean = sum / static_cast<double>(report.fold_scores.size());
  return report;
}

BranchVector popularity_top5(std::span<const VisitTarget> train_visits) {
  std::map<int, double> totals;
  for (const auto& v : train_visits) totals[v.branch_id] += v.visits;
  BranchVector ranked(totals.begin(), totals.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > 5) ranked.resize(5);
  return ranked;
}

std::string ScoreReport::to_json_string() const {
  json j;
  j["task"] = task;
  j["metric"] = metric;
  j["fold_scores"] = fold_scores;
  j["mean"] = mean;
  j["data_hash"] = data_hash;
  j["config"] = json::parse(config_echo);
  j["excluded_unlabeled"] = excluded_unlabeled;
  return j.dump(2);
}

ScoreReport ScoreReport::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  ScoreReport r;
  r.task = j.at("task").get<int>();
  r.metric = j.at("metric").get<std::string>();
  r.fold_scores = j.at("fold_scores").get<std::vector<double>>();
  r.mean = j.at("mean").get<double>();
  r.data_hash = j.at("data_hash").get<std::uint64_t>();
  r.config_echo = j.at("config").dump();
  r.excluded_unlabeled = j.value("excluded_unlabeled", 0);
  return r;
}

std::string ScoreReport::table() const {
  std::ostringstream os;
  os << "task " << task << "  metric " << metric << '\n';
  os << std::fixed << std::setprecision(5);
  for (std::size_t f = 0; f < fold_scores.size(); ++f)
    os << "  fold " << std::setw(2) << f << "  " << fold_scores[f] << '\n';
  os << "  mean     " << mean << '\n';
  if (excluded_unlabeled > 0)
    os << "  (" << excluded_unlabeled << " unlabeled users excluded)\n";
  return os.str();
}

}  // namespace tempofeat
