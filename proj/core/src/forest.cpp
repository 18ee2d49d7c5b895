#include "tempofeat/forest.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "tempofeat/parallel.hpp"
#include "tempofeat/rng.hpp"

namespace tempofeat {

namespace {
using nlohmann::json;
}

ForestModel ForestModel::fit(const FlatMatrix& x, std::span<const double> y,
                             const ForestConfig& cfg) {
  if (x.n_rows == 0) throw std::invalid_argument("forest fit: empty data");
  if (y.size() != x.n_rows) throw std::invalid_argument("forest fit: |X| != |y|");
  if (cfg.n_trees < 1) throw std::invalid_argument("forest fit: n_trees must be >= 1");

  const PresortedMatrix presorted = PresortedMatrix::build(x);
  const std::size_t n = x.n_rows;
  const int subsample =
      static_cast<int>(std::ceil(std::sqrt(static_cast<double>(x.n_cols))));

  ForestModel model;
  model.trees.resize(cfg.n_trees);
  parallel_for(cfg.n_trees, cfg.workers, [&](std::size_t t) {
    Rng rng(derive_seed(cfg.seed, t));
    std::vector<double> weights(n, 0.0);  // bootstrap draw counts
    for (std::size_t i = 0; i < n; ++i)
      ++weights[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1))];
    TreeConfig tree_cfg;
    tree_cfg.max_depth = cfg.max_depth;
    tree_cfg.min_samples_leaf = cfg.min_samples_leaf;
    tree_cfg.feature_subsample = subsample;
    tree_cfg.seed = rng.next_u64();
    model.trees[t] = DecisionTree::fit(presorted, y, weights, tree_cfg);
  });
  return model;
}

std::vector<double> ForestModel::predict(const FlatMatrix& x) const {
  std::vector<double> out(x.n_rows, 0.0);
  for (const auto& tree : trees)
    for (std::size_t r = 0; r < x.n_rows; ++r) out[r] += tree.predict_row(x.row(r));
  const double inv = 1.0 / static_cast<double>(trees.size());
  for (auto& v : out) v *= inv;
  return out;
}

std::string ForestModel::to_json_string() const {
  json trees_json = json::array();
  for (const auto& t : trees) trees_json.push_back(json::parse(t.to_json_string()));
  json j;
  j["trees"] = std::move(trees_json);
  return j.dump();
}

ForestModel ForestModel::from_json_string(const std::string& text) {
  const json j = json::parse(text);
  ForestModel m;
  for (const auto& t : j.at("trees"))
    m.trees.push_back(DecisionTree::from_json_string(t.dump()));
  return m;
}

}  // namespace tempofeat
