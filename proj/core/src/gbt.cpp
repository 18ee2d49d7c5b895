#include "tempofeat/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "tempofeat/linear.hpp"
#include "tempofeat/rng.hpp"

namespace tempofeat {

namespace {

using nlohmann::json;

constexpr double kMaxLeafStep = 4.0;  // clamp for Newton leaf values

}  // namespace

GbtModel GbtModel::fit(const FlatMatrix& x, std::span<const double> y, const GbtConfig& cfg) {
  if (x.n_rows < 2) throw std::invalid_argument("gbt fit: need at least 2 rows");
  if (y.size() != x.n_rows) throw std::invalid_argument("gbt fit: |X| != |y|");
  if (cfg.learning_rate < 0.0 || cfg.learning_rate > 1.0)
    throw std::invalid_argument("gbt fit: learning_rate must be in [0, 1]");

  const std::size_t n = x.n_rows;
  GbtModel model;
  model.learning_rate = cfg.learning_rate;
  model.loss = cfg.loss;
  model.trees.reserve(cfg.n_estimators);

  if (cfg.loss == GbtLoss::logistic) {
    bool has0 = false, has1 = false;
    for (double v : y) {
      if (v == 0.0)
        has0 = true;
      else if (v == 1.0)
        has1 = true;
      else
        throw std::invalid_argument("gbt fit: logistic labels must be 0 or 1");
    }
    if (!has0 || !has1)
      throw std::invalid_argument("gbt fit: both classes must be present for logistic loss");
    double pbar = 0.0;
    for (double v : y) pbar += v;
    pbar = std::clamp(pbar / static_cast<double>(n), 1e-12, 1.0 - 1e-12);
    model.init_value = std::log(pbar / (1.0 - pbar));
  } else {
    double sum = 0.0;
    for (double v : y) sum += v;
    model.init_value = sum / static_cast<double>(n);
  }

  const PresortedMatrix presorted = PresortedMatrix::build(x);
  std::vector<double> score(n, model.init_value);
  std::vector<double> residual(n);
  TreeConfig tree_cfg;
  tree_cfg.max_depth = cfg.max_depth;
  tree_cfg.min_samples_leaf = cfg.min_samples_leaf;

  for (int stage = 0; stage < cfg.n_estimators; ++stage) {
    tree_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(stage));

    if (cfg.loss == GbtLoss::squared) {
      for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - score[i];
      DecisionTree tree = DecisionTree::fit(presorted, residual, {}, tree_cfg);
      for (std::size_t i = 0; i < n; ++i)
        score[i] += cfg.learning_rate * tree.predict_row(x.row(i));
      model.trees.push_back(std::move(tree));
      double sse = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = y[i] - score[i];
        sse += d * d;
      }
      model.train_loss.push_back(sse / static_cast<double>(n));
    } else {
      std::vector<double> p(n);
      for (std::size_t i = 0; i < n; ++i) {
        p[i] = sigmoid(score[i]);
        residual[i] = y[i] - p[i];
      }
      DecisionTree tree = DecisionTree::fit(presorted, residual, {}, tree_cfg);
      // Newton step per leaf: sum(residual) / sum(p (1 - p))
      std::vector<double> num(tree.nodes().size(), 0.0), den(tree.nodes().size(), 0.0);
      std::vector<std::int32_t> leaf_of(n);
      for (std::size_t i = 0; i < n; ++i) {
        leaf_of[i] = tree.leaf_index(x.row(i));
        num[leaf_of[i]] += residual[i];
        den[leaf_of[i]] += p[i] * (1.0 - p[i]);
      }
      for (std::size_t l = 0; l < tree.nodes().size(); ++l) {
        if (!tree.nodes()[l].is_leaf()) continue;
        const double v = num[l] / std::max(den[l], 1e-12);
        tree.set_leaf_value(static_cast<std::int32_t>(l),
                            std::clamp(v, -kMaxLeafStep, kMaxLeafStep));
      }
      for (std::size_t i = 0; i < n; ++i)
        score[i] += cfg.learning_rate * tree.nodes()[leaf_of[i]].value;
      model.trees.push_back(std::move(tree));
      double ll = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        ll += std::max(score[i], 0.0) - score[i] * y[i] +
              std::log1p(std::exp(-std::abs(score[i])));
      model.train_loss.push_back(ll / static_cast<double>(n));
    }
  }
  return model;
}

std::vector<double> GbtModel::decision_scores(const FlatMatrix& x) const {
  std::vector<double> out(x.n_rows, init_value);
  for (const auto& tree : trees)
    for (std::size_t r = 0; r < x.n_rows; ++r)
      out[r] += learning_rate * tree.predict_row(x.row(r));
  return out;
}

std::vector<double> GbtModel::predict(const FlatMatrix& x) const {
  auto out = decision_scores(x);
  if (loss == GbtLoss::logistic)
    for (auto& v : out) v = sigmoid(v);
  return out;
}

std::string GbtModel::to_json_string() const {
  json j;
  j["init_value"] = init_value;
  j["learning_rate"] = learning_rate;
  j["loss"] = loss == GbtLoss::squared ? "squared" : "logistic";
  json trees_json = json::array();
  for (const auto& t : trees) trees_json.push_back(json::parse(t.to_json_string()));
  j["trees"] = std::move(trees_json);
  return j.dump();
}

GbtModel GbtModel::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  GbtModel m;
  m.init_value = j.at("init_value").get<double>();
  m.learning_rate = j.at("learning_rate").get<double>();
  m.loss = j.at("loss").get<std::string>() == "squared" ? GbtLoss::squared
                                                        : GbtLoss::logistic;
  for (const auto& t : j.at("trees"))
    m.trees.push_back(DecisionTree::from_json_string(t.dump()));
  return m;
}

}  // namespace tempofeat
