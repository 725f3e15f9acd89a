#pragma once

#include <cmath>
#include <vector>

#include "mbti/vectorize.hpp"

// Row-level arithmetic over the sparse+dense feature layout.
namespace mbti::ops {

// w spans all columns (sparse then dense)
inline double row_dot(const FeatureMatrix& X, std::size_t r, const std::vector<double>& w) {
  double sum = 0.0;
  const auto idx = X.row_indices(r);
  const auto val = X.row_values(r);
  for (std::size_t k = 0; k < idx.size(); ++k) sum += val[k] * w[idx[k]];
  const auto d = X.dense_row(r);
  for (std::size_t j = 0; j < X.dense_cols; ++j) sum += d[j] * w[X.sparse_cols + j];
  return sum;
}

// out[col] += scale * x[col] for every column of row r
inline void row_axpy(const FeatureMatrix& X, std::size_t r, double scale,
                     std::vector<double>& out) {
  const auto idx = X.row_indices(r);
  const auto val = X.row_values(r);
  for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] += scale * val[k];
  const auto d = X.dense_row(r);
  for (std::size_t j = 0; j < X.dense_cols; ++j) out[X.sparse_cols + j] += scale * d[j];
}

inline double row_dot_row(const FeatureMatrix& A, std::size_t ra, const FeatureMatrix& B,
                          std::size_t rb) {
  double sum = 0.0;
  const auto ia = A.row_indices(ra);
  const auto va = A.row_values(ra);
  const auto ib = B.row_indices(rb);
  const auto vb = B.row_values(rb);
  std::size_t p = 0, q = 0;
  while (p < ia.size() && q < ib.size()) {
    if (ia[p] < ib[q]) {
      ++p;
    } else if (ia[p] > ib[q]) {
      ++q;
    } else {
      sum += va[p] * vb[q];
      ++p;
      ++q;
    }
  }
  const auto da = A.dense_row(ra);
  const auto db = B.dense_row(rb);
  for (std::size_t j = 0; j < A.dense_cols; ++j) sum += da[j] * db[j];
  return sum;
}

inline double row_squared_norm(const FeatureMatrix& X, std::size_t r) {
  double sum = 0.0;
  for (double v : X.row_values(r)) sum += v * v;
  for (double v : X.dense_row(r)) sum += v * v;
  return sum;
}

// |a - b|^p summed over the union of supports
inline double row_minkowski_pow(const FeatureMatrix& A, std::size_t ra, const FeatureMatrix& B,
                                std::size_t rb, double p) {
  double sum = 0.0;
  const auto ia = A.row_indices(ra);
  const auto va = A.row_values(ra);
  const auto ib = B.row_indices(rb);
  const auto vb = B.row_values(rb);
  std::size_t i = 0, j = 0;
  while (i < ia.size() || j < ib.size()) {
    double diff;
    if (j >= ib.size() || (i < ia.size() && ia[i] < ib[j])) {
      diff = va[i++];
    } else if (i >= ia.size() || ib[j] < ia[i]) {
      diff = vb[j++];
    } else {
      diff = va[i++] - vb[j++];
    }
    sum += std::pow(std::fabs(diff), p);
  }
  const auto da = A.dense_row(ra);
  const auto db = B.dense_row(rb);
  for (std::size_t k = 0; k < A.dense_cols; ++k) {
    sum += std::pow(std::fabs(da[k] - db[k]), p);
  }
  return sum;
}

// extracts the row subset as a standalone matrix (keeps column layout)
FeatureMatrix take_rows(const FeatureMatrix& X, const std::vector<std::size_t>& rows);

void check_width(const FeatureMatrix& X, std::size_t expected, const char* what);
void check_binary_labels(const std::vector<int>& y, std::size_t n_rows, const char* what,
                         bool require_both = true);

}  // namespace mbti::ops
