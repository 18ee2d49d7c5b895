#include "tempofeat/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "tempofeat/rng.hpp"

namespace tempofeat {

namespace {

using nlohmann::json;

struct PendingNode {
  std::int32_t id;
  std::size_t lo, hi;  // segment of the per-feature order arrays
  int depth;
  double sum_w, sum_wy;
};

}  // namespace

PresortedMatrix PresortedMatrix::build(const FlatMatrix& x) {
  PresortedMatrix p;
  p.n_rows = x.n_rows;
  p.n_cols = x.n_cols;
  p.columns.resize(x.n_rows * x.n_cols);
  for (std::size_t r = 0; r < x.n_rows; ++r)
    for (std::size_t c = 0; c < x.n_cols; ++c) p.columns[c * x.n_rows + r] = x.at(r, c);
  p.order.resize(x.n_cols);
  for (std::size_t c = 0; c < x.n_cols; ++c) {
    auto& ord = p.order[c];
    ord.resize(x.n_rows);
    std::iota(ord.begin(), ord.end(), 0);
    const double* col = p.columns.data() + c * p.n_rows;
    std::stable_sort(ord.begin(), ord.end(),
                     [col](std::int32_t a, std::int32_t b) { return col[a] < col[b]; });
  }
  return p;
}

DecisionTree DecisionTree::fit(const FlatMatrix& x, std::span<const double> y,
                               std::span<const double> w, const TreeConfig& cfg) {
  return fit(PresortedMatrix::build(x), y, w, cfg);
}

DecisionTree DecisionTree::fit(const PresortedMatrix& x, std::span<const double> y,
                               std::span<const double> w, const TreeConfig& cfg) {
  if (x.n_rows == 0 || x.n_cols == 0) throw std::invalid_argument("tree fit: empty data");
  if (y.size() != x.n_rows) throw std::invalid_argument("tree fit: |X| != |y|");
  if (!w.empty() && w.size() != x.n_rows)
    throw std::invalid_argument("tree fit: |X| != |weights|");

  const std::size_t d = x.n_cols;
  auto weight = [&w](std::int32_t row) { return w.empty() ? 1.0 : w[row]; };

  // per-feature sorted index arrays restricted to rows with positive weight
  std::vector<std::vector<std::int32_t>> cur(d);
  std::size_t m = 0;
  for (std::size_t c = 0; c < d; ++c) {
    auto& v = cur[c];
    v.reserve(x.n_rows);
    for (std::int32_t row : x.order[c])
      if (weight(row) > 0.0) v.push_back(row);
    m = v.size();
  }
  if (m == 0) throw std::invalid_argument("tree fit: no rows with positive weight");

  DecisionTree tree;
  auto& nodes = tree.nodes_;
  Rng rng(cfg.seed);
  std::vector<std::int32_t> scratch(m);
  std::vector<char> goes_left(x.n_rows, 0);
  std::vector<int> feature_pool(d);
  std::iota(feature_pool.begin(), feature_pool.end(), 0);

  double root_w = 0.0, root_wy = 0.0;
  for (std::int32_t row : cur[0]) {
    root_w += weight(row);
    root_wy += weight(row) * y[row];
  }
  nodes.push_back({-1, 0.0, -1, -1, root_wy / root_w});
  std::vector<PendingNode> stack;
  stack.push_back({0, 0, m, 0, root_w, root_wy});

  while (!stack.empty()) {
    const PendingNode node = stack.back();
    stack.pop_back();
    const std::size_t n_node = node.hi - node.lo;
    if (node.depth >= cfg.max_depth ||
        n_node < 2 * static_cast<std::size_t>(cfg.min_samples_leaf) || n_node < 2)
      continue;  // stays a leaf

    // choose the features to scan
    int n_scan = static_cast<int>(d);
    if (cfg.feature_subsample > 0 && cfg.feature_subsample < n_scan) {
      n_scan = cfg.feature_subsample;
      for (int i = 0; i < n_scan; ++i) {
        const auto j = static_cast<std::size_t>(
            rng.uniform_int(i, static_cast<std::int64_t>(d) - 1));
        std::swap(feature_pool[i], feature_pool[j]);
      }
    }

    double best_gain = -1.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::size_t best_n_left = 0;
    double best_wl = 0.0, best_wyl = 0.0;

    for (int fi = 0; fi < n_scan; ++fi) {
      const int f = (cfg.feature_subsample > 0 && cfg.feature_subsample < static_cast<int>(d))
                        ? feature_pool[fi]
                        : fi;
      const auto& ord = cur[f];
      const double* col = x.columns.data() + static_cast<std::size_t>(f) * x.n_rows;
      double wl = 0.0, wyl = 0.0;
      for (std::size_t i = node.lo; i + 1 < node.hi; ++i) {
        const std::int32_t row = ord[i];
        wl += weight(row);
        wyl += weight(row) * y[row];
        const double v = col[row];
        const double vnext = col[ord[i + 1]];
        if (v == vnext) continue;
        const std::size_t n_left = i - node.lo + 1;
        const std::size_t n_right = n_node - n_left;
        if (n_left < static_cast<std::size_t>(cfg.min_samples_leaf) ||
            n_right < static_cast<std::size_t>(cfg.min_samples_leaf))
          continue;
        const double wr = node.sum_w - wl;
        const double wyr = node.sum_wy - wyl;
        if (wl <= 0.0 || wr <= 0.0) continue;
        const double gain = wyl * wyl / wl + wyr * wyr / wr;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          double thr = v + (vnext - v) / 2.0;
          if (!(thr < vnext)) thr = v;  // midpoint rounded up to vnext
          best_threshold = thr;
          best_n_left = n_left;
          best_wl = wl;
          best_wyl = wyl;
        }
      }
    }

    const double parent_score = node.sum_wy * node.sum_wy / node.sum_w;
    if (best_feature < 0 ||
        best_gain - parent_score <= 1e-12 * (1.0 + std::abs(parent_score)))
      continue;  // no improving split

    // left rows are exactly the first best_n_left entries of the split
    // feature's order; this avoids re-comparing floats
    const auto& split_ord = cur[best_feature];
    for (std::size_t i = node.lo; i < node.hi; ++i)
      goes_left[split_ord[i]] = i < node.lo + best_n_left ? 1 : 0;

    const double wr = node.sum_w - best_wl;
    const double wyr = node.sum_wy - best_wyl;
    const auto left_id = static_cast<std::int32_t>(nodes.size());
    nodes.push_back({-1, 0.0, -1, -1, best_wyl / best_wl});
    const auto right_id = static_cast<std::int32_t>(nodes.size());
    nodes.push_back({-1, 0.0, -1, -1, wyr / wr});
    nodes[node.id].feature = best_feature;
    nodes[node.id].threshold = best_threshold;
    nodes[node.id].left = left_id;
    nodes[node.id].right = right_id;

    // stable partition of every feature's segment
    for (std::size_t c = 0; c < d; ++c) {
      auto& ord = cur[c];
      std::size_t out_l = 0, out_r = 0;
      for (std::size_t i = node.lo; i < node.hi; ++i) {
        const std::int32_t row = ord[i];
        if (goes_left[row])
          ord[node.lo + out_l++] = row;
        else
          scratch[out_r++] = row;
      }
      std::copy(scratch.begin(), scratch.begin() + out_r, ord.begin() + node.lo + out_l);
    }

    stack.push_back({right_id, node.lo + best_n_left, node.hi, node.depth + 1, wr, wyr});
    stack.push_back({left_id, node.lo, node.lo + best_n_left, node.depth + 1, best_wl,
                     best_wyl});
  }
  return tree;
}

std::int32_t DecisionTree::leaf_index(std::span<const double> row) const {
  std::int32_t at = 0;
  while (!nodes_[at].is_leaf())
    at = row[nodes_[at].feature] <= nodes_[at].threshold ? nodes_[at].left
                                                         : nodes_[at].right;
  return at;
}

double DecisionTree::predict_row(std::span<const double> row) const {
  return nodes_[leaf_index(row)].value;
}

std::vector<double> DecisionTree::predict(const FlatMatrix& x) const {
  std::vector<double> out(x.n_rows);
  for (std::size_t r = 0; r < x.n_rows; ++r) out[r] = predict_row(x.row(r));
  return out;
}

void DecisionTree::set_leaf_value(std::int32_t node, double value) {
  nodes_.at(node).value = value;
}

int DecisionTree::depth() const {
  // iterative depth over the node DAG (it is a tree, ids are topological)
  std::vector<int> dist(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].is_leaf()) {
      best = std::max(best, dist[i]);
    } else {
      dist[nodes_[i].left] = dist[i] + 1;
      dist[nodes_[i].right] = dist[i] + 1;
    }
  }
  return best;
}

DecisionTree DecisionTree::from_nodes(std::vector<TreeNode> nodes) {
  DecisionTree t;
  t.nodes_ = std::move(nodes);
  return t;
}

std::string DecisionTree::to_json_string() const {
  json arr = json::array();
  for (const auto& n : nodes_)
    arr.push_back({n.feature, n.threshold, n.left, n.right, n.value});
  return arr.dump();
}

DecisionTree DecisionTree::from_json_string(const std::string& text) {
  const json arr = json::parse(text);
  std::vector<TreeNode> nodes;
  nodes.reserve(arr.size());
  for (const auto& e : arr) {
    TreeNode n;
    n.feature = e.at(0).get<int>();
    n.threshold = e.at(1).get<double>();
    n.left = e.at(2).get<std::int32_t>();
    n.right = e.at(3).get<std::int32_t>();
    n.value = e.at(4).get<double>();
    nodes.push_back(n);
  }
  return from_nodes(std::move(nodes));
}

}  // namespace tempofeat
