#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tempofeat/matrix.hpp"
#include "tempofeat/tree.hpp"

namespace tempofeat {

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 12;
  int min_samples_leaf = 1;
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Bagged regression trees: bootstrap row weights, sqrt(d) features scanned
/// per split, prediction = mean over trees. On 0/1 targets the output is the
/// mean leaf class frequency, i.e. a classification score.
struct ForestModel {
  std::vector<DecisionTree> trees;

  static ForestModel fit(const FlatMatrix& x, std::span<const double> y,
                         const ForestConfig& cfg);

  std::vector<double> predict(const FlatMatrix& x) const;

  std::string to_json_string() const;
  static ForestModel from_json_string(const std::string& text);
};

}  // namespace tempofeat
