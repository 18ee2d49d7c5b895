#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tempofeat/matrix.hpp"

namespace tempofeat {

/// Column-major copy of a design matrix plus, per feature, the row indices
/// sorted by value. Built once per model fit and shared by every tree.
struct PresortedMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> columns;              // column-major values
  std::vector<std::vector<std::int32_t>> order;  // per feature, rows by ascending value

  double value(std::size_t row, std::size_t col) const {
    return columns[col * n_rows + row];
  }

  static PresortedMatrix build(const FlatMatrix& x);
};

struct TreeConfig {
  int max_depth = 3;
  int min_samples_leaf = 1;
  /// Number of features scanned per split; 0 means all.
  int feature_subsample = 0;
  std::uint64_t seed = 0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
};

/// CART-style regression tree: greedy best split by squared-error reduction,
/// exact search over sorted unique values, leaf value = (weighted) mean.
class DecisionTree {
 public:
  static DecisionTree fit(const PresortedMatrix& x, std::span<const double> y,
                          std::span<const double> sample_weights, const TreeConfig& cfg);
  /// Convenience overload that presorts internally.
  static DecisionTree fit(const FlatMatrix& x, std::span<const double> y,
                          std::span<const double> sample_weights, const TreeConfig& cfg);

  double predict_row(std::span<const double> row) const;
  std::vector<double> predict(const FlatMatrix& x) const;

  /// Index into nodes() of the leaf this row falls into.
  std::int32_t leaf_index(std::span<const double> row) const;
  void set_leaf_value(std::int32_t node, double value);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int depth() const;

  std::string to_json_string() const;
  static DecisionTree from_json_string(const std::string& text);
  static DecisionTree from_nodes(std::vector<TreeNode> nodes);

 private:
  std::vector<TreeNode> nodes_;
};

}  // namespace tempofeat
