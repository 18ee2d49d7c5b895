#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tempofeat/matrix.hpp"

namespace tempofeat {

enum class LinearKind { ridge, logistic };

struct LinearModel {
  LinearKind kind = LinearKind::ridge;
  std::vector<double> weights;
  double intercept = 0.0;
  double l2_lambda = 0.0;
  bool converged = true;

  /// Linear score w.x + b (the logit for logistic models).
  double score_row(std::span<const double> row) const;
  std::vector<double> score(const FlatMatrix& x) const;
  /// Sigmoid of the score; only meaningful for logistic models.
  std::vector<double> predict_proba(const FlatMatrix& x) const;
};

/// Least squares with an L2 penalty on the weights (intercept unpenalized),
/// solved exactly via the centered normal equations. At lambda = 0 a
/// rank-deficient but consistent system is solved with free weights pinned to
/// zero; an unsolvable system throws advising lambda > 0.
LinearModel ridge_fit(const FlatMatrix& x, std::span<const double> y, double lambda);

struct LogisticConfig {
  double l2_lambda = 1.0;
  int max_iter = 100;
  double tol = 1e-8;  // on the gradient infinity norm
};

/// L2-penalized logistic regression via damped Newton iterations; y must
/// contain both classes. max_iter = 0 returns the zero model (probability ½).
LinearModel logistic_fit(const FlatMatrix& x, std::span<const double> y,
                         const LogisticConfig& cfg = {});

double sigmoid(double z);

std::string linear_to_json(const LinearModel& m);
LinearModel linear_from_json(const std::string& text);

}  // namespace tempofeat
