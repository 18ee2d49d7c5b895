#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace tempofeat {

/// Dense row-major matrix of doubles.
struct FlatMatrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> data;  // n_rows * n_cols

  FlatMatrix() = default;
  FlatMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : n_rows(rows), n_cols(cols), data(rows * cols, fill) {}

  static FlatMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    FlatMatrix m;
    m.n_rows = rows.size();
    m.n_cols = rows.empty() ? 0 : rows.front().size();
    m.data.reserve(m.n_rows * m.n_cols);
    for (const auto& r : rows) {
      if (r.size() != m.n_cols) throw std::invalid_argument("from_rows: ragged rows");
      m.data.insert(m.data.end(), r.begin(), r.end());
    }
    return m;
  }

  double& at(std::size_t r, std::size_t c) { return data[r * n_cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * n_cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * n_cols, n_cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * n_cols, n_cols};
  }
};

}  // namespace tempofeat
