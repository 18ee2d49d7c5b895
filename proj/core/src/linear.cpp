#include "tempofeat/linear.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "tempofeat/linalg.hpp"

namespace tempofeat {

namespace {

using nlohmann::json;

void check_shapes(const FlatMatrix& x, std::span<const double> y) {
  if (x.n_rows == 0 || x.n_rows != y.size())
    throw std::invalid_argument("design matrix and target sizes do not match");
}

void check_binary(std::span<const double> y) {
  bool has0 = false, has1 = false;
  for (double v : y) {
    if (v == 0.0)
      has0 = true;
    else if (v == 1.0)
      has1 = true;
    else
      throw std::invalid_argument("labels must be 0 or 1");
  }
  if (!has0 || !has1)
    throw std::invalid_argument("both classes must be present in the training labels");
}

}  // namespace

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double LinearModel::score_row(std::span<const double> row) const {
  double s = intercept;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * row[i];
  return s;
}

std::vector<double> LinearModel::score(const FlatMatrix& x) const {
  std::vector<double> out(x.n_rows);
  for (std::size_t r = 0; r < x.n_rows; ++r) out[r] = score_row(x.row(r));
  return out;
}

std::vector<double> LinearModel::predict_proba(const FlatMatrix& x) const {
  auto out = score(x);
  for (auto& v : out) v = sigmoid(v);
  return out;
}

LinearModel ridge_fit(const FlatMatrix& x, std::span<const double> y, double lambda) {
  check_shapes(x, y);
  if (lambda < 0.0) throw std::invalid_argument("ridge_fit: lambda must be >= 0");
  const std::size_t n = x.n_rows, d = x.n_cols;

  std::vector<double> xmean(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) xmean[c] += x.at(r, c);
  for (auto& v : xmean) v /= static_cast<double>(n);
  double ymean = 0.0;
  for (double v : y) ymean += v;
  ymean /= static_cast<double>(n);

  // gram = Xc'Xc + lambda I, rhs = Xc'yc
  std::vector<double> gram(d * d, 0.0), rhs(d, 0.0);
  std::vector<double> xc(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) xc[c] = x.at(r, c) - xmean[c];
    const double yc = y[r] - ymean;
    for (std::size_t i = 0; i < d; ++i) {
      rhs[i] += xc[i] * yc;
      for (std::size_t j = i; j < d; ++j) gram[i * d + j] += xc[i] * xc[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    gram[i * d + i] += lambda;
    for (std::size_t j = 0; j < i; ++j) gram[i * d + j] = gram[j * d + i];
  }

  LinearModel m;
  m.kind = LinearKind::ridge;
  m.l2_lambda = lambda;
  if (!cholesky_solve(gram, rhs, d, m.weights)) {
    // Singular gram at lambda = 0: the normal equations are still consistent
    // when the target lies in the column space; solve with free weights = 0.
    if (!gauss_solve(gram, rhs, d, m.weights))
      throw std::runtime_error(
          "ridge_fit: singular system at lambda = 0; use lambda > 0");
  }
  m.intercept = ymean;
  for (std::size_t c = 0; c < d; ++c) m.intercept -= m.weights[c] * xmean[c];
  return m;
}

LinearModel logistic_fit(const FlatMatrix& x, std::span<const double> y,
                         const LogisticConfig& cfg) {
  check_shapes(x, y);
  check_binary(y);
  if (cfg.l2_lambda < 0.0)
    throw std::invalid_argument("logistic_fit: l2_lambda must be >= 0");
  const std::size_t n = x.n_rows, d = x.n_cols;
  const std::size_t dim = d + 1;  // weights + intercept (last slot, unpenalized)

  LinearModel m;
  m.kind = LinearKind::logistic;
  m.l2_lambda = cfg.l2_lambda;
  m.weights.assign(d, 0.0);
  m.intercept = 0.0;
  m.converged = false;

  auto penalized_loss = [&](const std::vector<double>& w, double b) {
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double z = b;
      const auto row = x.row(r);
      for (std::size_t c = 0; c < d; ++c) z += w[c] * row[c];
      // -log likelihood: max(z,0) - z*y + log(1 + exp(-|z|)), overflow-safe
      loss += std::max(z, 0.0) - z * y[r] + std::log1p(std::exp(-std::abs(z)));
    }
    double pen = 0.0;
    for (double v : w) pen += v * v;
    return loss + 0.5 * cfg.l2_lambda * pen;
  };

  std::vector<double> grad(dim), hess(dim * dim), step;
  std::vector<double> z(n), p(n);
  double current_loss = penalized_loss(m.weights, m.intercept);

  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    for (std::size_t r = 0; r < n; ++r) {
      z[r] = m.score_row(x.row(r));
      p[r] = sigmoid(z[r]);
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    std::fill(hess.begin(), hess.end(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const double resid = p[r] - y[r];
      const double w = std::max(p[r] * (1.0 - p[r]), 1e-10);
      const auto row = x.row(r);
      for (std::size_t i = 0; i < d; ++i) {
        grad[i] += resid * row[i];
        for (std::size_t j = i; j < d; ++j) hess[i * dim + j] += w * row[i] * row[j];
        hess[i * dim + d] += w * row[i];
      }
      grad[d] += resid;
      hess[d * dim + d] += w;
    }
    for (std::size_t i = 0; i < d; ++i) {
      grad[i] += cfg.l2_lambda * m.weights[i];
      hess[i * dim + i] += cfg.l2_lambda;
    }
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < i; ++j) hess[i * dim + j] = hess[j * dim + i];

    double gnorm = 0.0;
    for (double g : grad) gnorm = std::max(gnorm, std::abs(g));
    if (gnorm < cfg.tol) {
      m.converged = true;
      break;
    }

    if (!cholesky_solve(hess, grad, dim, step)) {
      for (std::size_t i = 0; i < dim; ++i) hess[i * dim + i] += 1e-6;
      if (!cholesky_solve(hess, grad, dim, step)) break;
    }

    // damped Newton: halve until the penalized loss does not increase
    double scale = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30; ++halving) {
      std::vector<double> w_try = m.weights;
      double b_try = m.intercept;
      for (std::size_t c = 0; c < d; ++c) w_try[c] -= scale * step[c];
      b_try -= scale * step[d];
      const double l_try = penalized_loss(w_try, b_try);
      if (l_try <= current_loss + 1e-12) {
        m.weights = std::move(w_try);
        m.intercept = b_try;
        current_loss = l_try;
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;
  }
  return m;
}

std::string linear_to_json(const LinearModel& m) {
  json j;
  j["kind"] = m.kind == LinearKind::ridge ? "ridge" : "logistic";
  j["weights"] = m.weights;
  j["intercept"] = m.intercept;
  j["l2_lambda"] = m.l2_lambda;
  j["converged"] = m.converged;
  return j.dump();
}

LinearModel linear_from_json(const std::string& text) {
  const json j = json::parse(text);
  LinearModel m;
  m.kind = j.at("kind").get<std::string>() == "ridge" ? LinearKind::ridge
                                                      : LinearKind::logistic;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.intercept = j.at("intercept").get<double>();
  m.l2_lambda = j.at("l2_lambda").get<double>();
  m.converged = j.at("converged").get<bool>();
  return m;
}

}  // namespace tempofeat
