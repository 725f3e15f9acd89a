#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mbti/vectorize.hpp"

namespace mbti {

enum class PcaSolver { Auto, Full, Randomized };

struct PcaOptions {
  std::size_t n_components = 0;  // 0: min(n_samples, n_features) - 1
  PcaSolver solver = PcaSolver::Auto;
  std::uint64_t seed = 0;
  std::size_t randomized_cap = 200;  // component cap for the randomized path
  std::size_t full_solver_limit = 1000;  // Auto uses Full while min(n, f) <= this
};

struct PCAModel {
  std::vector<double> mean;            // column means
  std::vector<double> components;      // row-major, n_components x n_features
  std::vector<double> singular_values; // non-increasing
  std::vector<double> explained_variance_ratio;  // sigma_i^2 / total centered SS
  std::size_t n_components = 0;
  std::size_t n_features = 0;
  std::size_t n_samples = 0;
  double total_centered_ss = 0.0;
  PcaSolver solver_used = PcaSolver::Full;

  const double* component(std::size_t i) const { return components.data() + i * n_features; }
};

// Columns centered (not scaled), then an SVD; ratios are exact shares of the
// total centered sum of squares, so they sum to 1 when every component is
// kept and to less under randomized truncation.
PCAModel fit_pca(const FeatureMatrix& X, PcaOptions options = {});

// component scores, row-major n x n_components
std::vector<double> pca_transform(const PCAModel& model, const FeatureMatrix& X);

struct CorrelationReport {
  std::size_t n_top = 0;
  std::vector<double> matrix;     // row-major, n_features x n_top, Pearson r
  std::vector<double> max_abs_r;  // per-feature summary
  std::vector<std::string> warnings;  // zero-variance columns
};

CorrelationReport feature_component_correlation(const FeatureMatrix& X, const PCAModel& model,
                                                std::size_t n_top_components);

struct ImportanceRanking {
  std::vector<std::pair<std::string, double>> items;  // (feature, percent), non-increasing
};

// variance-weighted squared loadings over the first `n_components_budget`
// components (0 = all), as percent of total variance
ImportanceRanking rank_features(const PCAModel& model,
                                const std::vector<std::string>& column_names,
                                std::size_t n_components_budget = 0);

double cumulative_explained_variance(const PCAModel& model, std::size_t k);

// symmetric eigendecomposition (Householder tridiagonalization + implicit
// QL); eigenvalues descending, eigenvectors in rows of `vectors`
void symmetric_eigen(std::vector<double>& matrix, std::size_t n, std::vector<double>& values,
                     std::vector<double>& vectors);

}  // namespace mbti
