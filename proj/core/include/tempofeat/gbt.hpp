#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tempofeat/matrix.hpp"
#include "tempofeat/tree.hpp"

namespace tempofeat {

enum class GbtLoss { squared, logistic };

struct GbtConfig {
  int n_estimators = 100;
  double learning_rate = 0.1;  // 0 is accepted for the init-only limit
  int max_depth = 3;
  int min_samples_leaf = 1;
  GbtLoss loss = GbtLoss::squared;
  std::uint64_t seed = 0;
};

/// Stagewise boosted regression trees fit to negative gradients: residuals
/// for squared loss, y - p for logistic loss (with Newton leaf updates).
struct GbtModel {
  double init_value = 0.0;  // mean target / prior log-odds
  double learning_rate = 0.1;
  GbtLoss loss = GbtLoss::squared;
  std::vector<DecisionTree> trees;
  /// Training loss after each stage: MSE for squared, mean log-loss for
  /// logistic. The squared-loss sequence is non-increasing.
  std::vector<double> train_loss;

  static GbtModel fit(const FlatMatrix& x, std::span<const double> y, const GbtConfig& cfg);

  /// Raw model output: prediction for squared loss, log-odds for logistic.
  std::vector<double> decision_scores(const FlatMatrix& x) const;
  /// Prediction; logistic models map scores through the sigmoid.
  std::vector<double> predict(const FlatMatrix& x) const;

  std::string to_json_string() const;
  static GbtModel from_json_string(const std::string& text);
};

}  // namespace tempofeat
