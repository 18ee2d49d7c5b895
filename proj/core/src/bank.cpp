#include "tempofeat/bank.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "tempofeat/errors.hpp"
#include "tempofeat/parallel.hpp"
#include "tempofeat/rng.hpp"

namespace tempofeat {

namespace {

using nlohmann::json;

void check_inputs(const BankInputs& in) {
  if (in.features == nullptr) throw std::invalid_argument("bank: null feature matrix");
  const std::size_t n = in.features->n_rows();
  if (in.user_home_geo.size() != n || in.user_activity_geo.size() != n)
    throw std::invalid_argument("bank: geo vectors must align with feature rows");
}

int find_column(const FeatureMatrix& fm, const std::string& name) {
  for (std::size_t c = 0; c < fm.manifest.size(); ++c)
    if (fm.manifest[c].name == name) return static_cast<int>(c);
  return -1;
}

}  // namespace

ModelKind parse_model_kind(const std::string& name) {
  if (name == "gbt") return ModelKind::gbt;
  if (name == "forest") return ModelKind::forest;
  if (name == "ridge") return ModelKind::ridge;
  if (name == "logistic") return ModelKind::logistic;
  throw ConfigError("unknown model '" + name + "' (expected gbt|forest|ridge|logistic)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::gbt: return "gbt";
    case ModelKind::forest: return "forest";
    case ModelKind::ridge: return "ridge";
    case ModelKind::logistic: return "logistic";
  }
  return "?";
}

std::vector<double> Regressor::predict(const FlatMatrix& x) const {
  return std::visit(
      [&x](const auto& m) -> std::vector<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          return m.kind == LinearKind::logistic ? m.predict_proba(x) : m.score(x);
        } else {
          return m.predict(x);
        }
      },
      model);
}

Regressor fit_regressor(const FlatMatrix& x, std::span<const double> y,
                        const LearnerConfig& cfg, std::uint64_t seed) {
  Regressor r;
  switch (cfg.kind) {
    case ModelKind::gbt: {
      GbtConfig c = cfg.gbt;
      c.seed = seed;
      r.model = GbtModel::fit(x, y, c);
      break;
    }
    case ModelKind::forest: {
      ForestConfig c = cfg.forest;
      c.seed = seed;
      c.workers = 1;  // outer loops own the parallelism
      r.model = ForestModel::fit(x, y, c);
      break;
    }
    case ModelKind::ridge:
      r.model = ridge_fit(x, y, cfg.ridge_lambda);
      break;
    case ModelKind::logistic:
      r.model = logistic_fit(x, y, cfg.logistic);
      break;
  }
  return r;
}

std::string Regressor::to_json_string() const {
  json j;
  std::visit(
      [&j](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GbtModel>) {
          j["family"] = "gbt";
          j["model"] = json::parse(m.to_json_string());
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          j["family"] = "forest";
          j["model"] = json::parse(m.to_json_string());
        } else {
          j["family"] = "linear";
          j["model"] = json::parse(linear_to_json(m));
        }
      },
      model);
  return j.dump();
}

Regressor Regressor::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  const std::string family = j.at("family").get<std::string>();
  Regressor r;
  const std::string inner = j.at("model").dump();
  if (family == "gbt")
    r.model = GbtModel::from_json_string(inner);
  else if (family == "forest")
    r.model = ForestModel::from_json_string(inner);
  else if (family == "linear")
    r.model = linear_from_json(inner);
  else
    throw std::invalid_argument("unknown regressor family: " + family);
  return r;
}

TargetScaler TargetScaler::fit(std::span<const double> y) {
  TargetScaler s;
  for (double v : y) s.max_value = std::max(s.max_value, v);
  return s;
}

/// Copy the base matrix and fill this branch's FS9/FS10 distance columns.
static FlatMatrix branch_design(const BankInputs& in, const BranchInfo& branch,
                                const BankConfig& cfg, int fs9_col, int fs10_col) {
  FlatMatrix x = in.features->values;
  for (std::size_t r = 0; r < x.n_rows; ++r) {
    if (fs9_col >= 0) {
      double d = euclidean(in.user_home_geo[r], branch.geo);
      if (cfg.log_transform_extras) d = std::log1p(d);
      x.at(r, static_cast<std::size_t>(fs9_col)) = d;
    }
    if (fs10_col >= 0) {
      double d = euclidean(in.user_activity_geo[r], branch.geo);
      if (cfg.log_transform_extras) d = std::log1p(d);
      x.at(r, static_cast<std::size_t>(fs10_col)) = d;
    }
  }
  return x;
}

ModelBank ModelBank::train(const BankInputs& inputs, std::span<const VisitTarget> targets,
                           const std::vector<BranchInfo>& branches, const BankConfig& cfg) {
  check_inputs(inputs);
  if (branches.empty()) throw std::invalid_argument("bank: no branches");
  if (targets.empty()) throw IntegrityError("bank: Task 1 visit targets are missing");
  const std::size_t n = inputs.features->n_rows();
  const std::size_t n_branches = branches.size();

  ModelBank bank;
  bank.branches = branches;
  bank.config = cfg;
  if (cfg.use_fs9) {
    bank.fs9_column = find_column(*inputs.features, "fs9_branch_dist");
    if (bank.fs9_column < 0)
      throw std::invalid_argument("bank: FS9 requested but placeholder column missing");
  }
  if (cfg.use_fs10) {
    bank.fs10_column = find_column(*inputs.features, "fs10_branch_dist_act");
    if (bank.fs10_column < 0)
      throw std::invalid_argument("bank: FS10 requested but placeholder column missing");
  }

  // dense per-branch targets, 0 where no visits were recorded
  std::vector<std::vector<double>> dense(n_branches, std::vector<double>(n, 0.0));
  for (const auto& t : targets) {
    const auto it = std::lower_bound(inputs.features->user_ids.begin(),
                                     inputs.features->user_ids.end(), t.user_id);
    if (it == inputs.features->user_ids.end() || *it != t.user_id) continue;
    const auto row = static_cast<std::size_t>(it - inputs.features->user_ids.begin());
    if (t.branch_id < 0 || static_cast<std::size_t>(t.branch_id) >= n_branches)
      throw IntegrityError("bank: visit target references unknown branch " +
                           std::to_string(t.branch_id));
    dense[t.branch_id][row] = t.visits;
  }

  bank.models.resize(n_branches);
  bank.scalers.resize(n_branches);
  parallel_for(n_branches, cfg.workers, [&](std::size_t b) {
    const FlatMatrix x = branch_design(inputs, branches[b], cfg, bank.fs9_column,
                                       bank.fs10_column);
    std::vector<double> y = dense[b];
    if (cfg.normalize_targets) {
      bank.scalers[b] = TargetScaler::fit(y);
      for (auto& v : y) v = bank.scalers[b].norm(v);
    }
    const std::uint64_t branch_seed =
        cfg.seed ^ static_cast<std::uint64_t>(branches[b].branch_id);
    bank.models[b] = fit_regressor(x, y, cfg.learner, branch_seed);
  });
  return bank;
}

std::vector<std::vector<double>> ModelBank::branch_scores(const BankInputs& inputs,
                                                          int workers) const {
  check_inputs(inputs);
  std::vector<std::vector<double>> scores(branches.size());
  parallel_for(branches.size(), workers, [&](std::size_t b) {
    const FlatMatrix x = branch_design(inputs, branches[b], config, fs9_column, fs10_column);
    scores[b] = models[b].predict(x);
    for (auto& v : scores[b]) v = scalers[b].denorm(v);
  });
  return scores;
}

std::vector<std::vector<std::pair<int, double>>> ModelBank::predict_top5_all(
    const BankInputs& inputs, int workers) const {
  const auto scores = branch_scores(inputs, workers);
  const std::size_t n = inputs.features->n_rows();
  std::vector<std::vector<std::pair<int, double>>> out(n);
  std::vector<double> per_user(branches.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t b = 0; b < branches.size(); ++b) per_user[b] = scores[b][r];
    out[r] = top5_from_scores(per_user);
  }
  return out;
}

std::vector<std::pair<int, double>> top5_from_scores(std::span<const double> scores) {
  std::vector<std::pair<int, double>> ranked;
  ranked.reserve(scores.size());
  for (std::size_t b = 0; b < scores.size(); ++b)
    ranked.emplace_back(static_cast<int>(b), std::max(scores[b], 0.0));
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  ranked.resize(std::min<std::size_t>(5, ranked.size()));
  return ranked;
}

std::vector<double> ensemble_mean(const std::vector<std::vector<double>>& score_lists) {
  if (score_lists.empty()) throw std::invalid_argument("ensemble_mean: no inputs");
  const std::size_t n = score_lists.front().size();
  for (const auto& l : score_lists)
    if (l.size() != n)
      throw std::invalid_argument("ensemble_mean: score lists have different lengths");
  std::vector<double> out(n, 0.0);
  for (const auto& l : score_lists)
    for (std::size_t i = 0; i < n; ++i) out[i] += l[i];
  const double inv = 1.0 / static_cast<double>(score_lists.size());
  for (auto& v : out) v *= inv;
  return out;
}

}  // namespace tempofeat
