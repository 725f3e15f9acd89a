#include "mbti/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "feature_ops.hpp"
#include "mbti/util/rng.hpp"

namespace mbti {

namespace {

double hypot2(double a, double b) { return std::sqrt(a * a + b * b); }

// Householder reduction to tridiagonal form (EISPACK tred2 lineage).
void tridiagonalize(std::vector<double>& a, std::size_t n, std::vector<double>& d,
                    std::vector<double>& e) {
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * n + c]; };
  for (std::size_t j = 0; j < n; ++j) d[j] = at(n - 1, j);

  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (std::size_t k = 0; k <= l; ++k) scale += std::fabs(d[k]);
      if (scale == 0.0) {
        e[i] = d[l];
        for (std::size_t j = 0; j <= l; ++j) {
          d[j] = at(l, j);
          at(i, j) = 0.0;
          at(j, i) = 0.0;
        }
      } else {
        for (std::size_t k = 0; k <= l; ++k) {
          d[k] /= scale;
          h += d[k] * d[k];
        }
        double f = d[l];
        double g = f > 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        d[l] = f - g;
        for (std::size_t j = 0; j <= l; ++j) e[j] = 0.0;

        for (std::size_t j = 0; j <= l; ++j) {
          f = d[j];
          at(j, i) = f;
          g = e[j] + at(j, j) * f;
          for (std::size_t k = j + 1; k <= l; ++k) {
            g += at(k, j) * d[k];
            e[k] += at(k, j) * f;
          }
          e[j] = g;
        }
        f = 0.0;
        for (std::size_t j = 0; j <= l; ++j) {
          e[j] /= h;
          f += e[j] * d[j];
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j <= l; ++j) e[j] -= hh * d[j];
        for (std::size_t j = 0; j <= l; ++j) {
          f = d[j];
          g = e[j];
          for (std::size_t k = j; k <= l; ++k) {
            at(k, j) -= f * e[k] + g * d[k];
          }
          d[j] = at(l, j);
          at(i, j) = 0.0;
        }
      }
    } else {
      e[i] = d[l];
      for (std::size_t j = 0; j <= l; ++j) {
        d[j] = at(l, j);
        at(i, j) = 0.0;
        at(j, i) = 0.0;
      }
    }
    d[i] = h;
  }

  // accumulate transformations
  for (std::size_t i = 0; i < n - 1; ++i) {
    at(n - 1, i) = at(i, i);
    at(i, i) = 1.0;
    const std::size_t l = i + 1;
    const double h = d[l];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = at(k, l) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += at(k, l) * at(k, j);
        for (std::size_t k = 0; k <= i; ++k) at(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) at(k, l) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = at(n - 1, j);
    at(n - 1, j) = 0.0;
  }
  at(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit QL with shifts on the tridiagonal form (EISPACK tql2 lineage);
// eigenvectors accumulate into `a` (columns).
void ql_implicit(std::vector<double>& a, std::size_t n, std::vector<double>& d,
                 std::vector<double>& e) {
  auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * n + c]; };
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0, tst1 = 0.0;
  const double eps = std::pow(2.0, -52.0);
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::fabs(d[l]) + std::fabs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::fabs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      for (int iter = 0; iter < 60 && std::fabs(e[l]) > eps * tst1; ++iter) {
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = hypot2(p, 1.0);
        if (p < 0.0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = c, c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = m - 1; i + 1 > l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = hypot2(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          for (std::size_t k = 0; k < n; ++k) {
            h = at(k, i + 1);
            at(k, i + 1) = s * at(k, i) + c * h;
            at(k, i) = c * at(k, i) - s * h;
          }
          if (i == l) break;
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      }
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace

void symmetric_eigen(std::vector<double>& matrix, std::size_t n, std::vector<double>& values,
                     std::vector<double>& vectors) {
  values.assign(n, 0.0);
  std::vector<double> e(n, 0.0);
  if (n == 1) {
    values[0] = matrix[0];
    vectors.assign(1, 1.0);
    return;
  }
  tridiagonalize(matrix, n, values, e);
  ql_implicit(matrix, n, values, e);

  // sort descending; matrix holds eigenvectors in columns
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] > values[y]; });
  std::vector<double> sorted_values(n);
  vectors.assign(n * n, 0.0);  // row i = eigenvector i
  for (std::size_t i = 0; i < n; ++i) {
    sorted_values[i] = values[order[i]];
    for (std::size_t k = 0; k < n; ++k) vectors[i * n + k] = matrix[k * n + order[i]];
  }
  values = std::move(sorted_values);
}

namespace {

std::vector<double> column_means(const FeatureMatrix& X) {
  std::vector<double> mean(X.cols(), 0.0);
  for (std::size_t r = 0; r < X.rows(); ++r) ops::row_axpy(X, r, 1.0, mean);
  for (double& m : mean) m /= static_cast<double>(X.rows());
  return mean;
}

double total_centered_ss(const FeatureMatrix& X, const std::vector<double>& mean) {
  double sum_sq = 0.0;
  for (double v : X.values) sum_sq += v * v;
  for (double v : X.dense) sum_sq += v * v;
  double mean_sq = 0.0;
  for (double m : mean) mean_sq += m * m;
  return sum_sq - static_cast<double>(X.rows()) * mean_sq;
}

// (x_r - mu) . v
double centered_row_dot(const FeatureMatrix& X, std::size_t r, const std::vector<double>& v,
                        double mu_dot_v) {
  return ops::row_dot(X, r, v) - mu_dot_v;
}

// deterministic orientation: largest-|loading| entry positive
void fix_signs(std::vector<double>& components, std::size_t k, std::size_t f) {
  for (std::size_t i = 0; i < k; ++i) {
    double* row = components.data() + i * f;
    std::size_t arg = 0;
    for (std::size_t j = 1; j < f; ++j) {
      if (std::fabs(row[j]) > std::fabs(row[arg])) arg = j;
    }
    if (row[arg] < 0.0) {
      for (std::size_t j = 0; j < f; ++j) row[j] = -row[j];
    }
  }
}

// multiply centered X^T by dense column block Q (n x l) -> f x l
std::vector<double> xt_times(const FeatureMatrix& X, const std::vector<double>& mean,
                             const std::vector<double>& q, std::size_t l) {
  const std::size_t f = X.cols();
  std::vector<double> out(f * l, 0.0);
  std::vector<double> col_sums(l, 0.0);
  for (std::size_t r = 0; r < X.rows(); ++r) {
    const double* qr = q.data() + r * l;
    for (std::size_t c = 0; c < l; ++c) col_sums[c] += qr[c];
    const auto idx = X.row_indices(r);
    const auto val = X.row_values(r);
    for (std::size_t kk = 0; kk < idx.size(); ++kk) {
      double* out_row = out.data() + idx[kk] * l;
      const double v = val[kk];
      for (std::size_t c = 0; c < l; ++c) out_row[c] += v * qr[c];
    }
    const auto d = X.dense_row(r);
    for (std::size_t j = 0; j < X.dense_cols; ++j) {
      double* out_row = out.data() + (X.sparse_cols + j) * l;
      const double v = d[j];
      for (std::size_t c = 0; c < l; ++c) out_row[c] += v * qr[c];
    }
  }
  for (std::size_t j = 0; j < f; ++j) {
    double* out_row = out.data() + j * l;
    for (std::size_t c = 0; c < l; ++c) out_row[c] -= mean[j] * col_sums[c];
  }
  return out;
}

// multiply centered X by dense block W (f x l) -> n x l
std::vector<double> x_times(const FeatureMatrix& X, const std::vector<double>& mean,
                            const std::vector<double>& w, std::size_t l) {
  const std::size_t n = X.rows();
  std::vector<double> out(n * l, 0.0);
  std::vector<double> mu_w(l, 0.0);
  for (std::size_t j = 0; j < X.cols(); ++j) {
    for (std::size_t c = 0; c < l; ++c) mu_w[c] += mean[j] * w[j * l + c];
  }
  for (std::size_t r = 0; r < n; ++r) {
    double* out_row = out.data() + r * l;
    const auto idx = X.row_indices(r);
    const auto val = X.row_values(r);
    for (std::size_t kk = 0; kk < idx.size(); ++kk) {
      const double* w_row = w.data() + idx[kk] * l;
      const double v = val[kk];
      for (std::size_t c = 0; c < l; ++c) out_row[c] += v * w_row[c];
    }
    const auto d = X.dense_row(r);
    for (std::size_t j = 0; j < X.dense_cols; ++j) {
      const double* w_row = w.data() + (X.sparse_cols + j) * l;
      const double v = d[j];
      for (std::size_t c = 0; c < l; ++c) out_row[c] += v * w_row[c];
    }
    for (std::size_t c = 0; c < l; ++c) out_row[c] -= mu_w[c];
  }
  return out;
}

// modified Gram-Schmidt on columns of a (rows x cols), two passes
void orthonormalize(std::vector<double>& a, std::size_t rows, std::size_t cols) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t c = 0; c < cols; ++c) {
      for (std::size_t prev = 0; prev < c; ++prev) {
        double dot = 0.0;
        for (std::size_t r = 0; r < rows; ++r) dot += a[r * cols + c] * a[r * cols + prev];
        for (std::size_t r = 0; r < rows; ++r) a[r * cols + c] -= dot * a[r * cols + prev];
      }
      double norm = 0.0;
      for (std::size_t r = 0; r < rows; ++r) norm += a[r * cols + c] * a[r * cols + c];
      norm = std::sqrt(norm);
      if (norm < 1e-300) norm = 1.0;  // degenerate column left as zeros
      for (std::size_t r = 0; r < rows; ++r) a[r * cols + c] /= norm;
    }
  }
}

}  // namespace

PCAModel fit_pca(const FeatureMatrix& X, PcaOptions options) {
  const std::size_t n = X.rows();
  const std::size_t f = X.cols();
  if (n < 2) throw InvalidArgument("fit_pca: need at least 2 samples");
  for (double v : X.values) {
    if (!std::isfinite(v)) throw InvalidArgument("fit_pca: non-finite entry");
  }
  for (double v : X.dense) {
    if (!std::isfinite(v)) throw InvalidArgument("fit_pca: non-finite entry");
  }

  PCAModel model;
  model.n_samples = n;
  model.n_features = f;
  model.mean = column_means(X);
  model.total_centered_ss = total_centered_ss(X, model.mean);
  if (!(model.total_centered_ss > 1e-12)) {
    throw InvalidArgument("fit_pca: zero total variance (all rows identical)");
  }

  const std::size_t max_rank = std::min(n, f) - 1;
  std::size_t requested = options.n_components == 0 ? max_rank
                                                    : std::min(options.n_components, max_rank);
  PcaSolver solver = options.solver;
  if (solver == PcaSolver::Auto) {
    solver = std::min(n, f) <= options.full_solver_limit ? PcaSolver::Full
                                                         : PcaSolver::Randomized;
  }
  model.solver_used = solver;

  std::vector<double> sigma;           // singular values, descending
  std::vector<double> components;      // k x f

  if (solver == PcaSolver::Full) {
    if (std::min(n, f) > 4000) {
      throw InvalidArgument("fit_pca: full solver limited to min(n,f) <= 4000");
    }
    if (n <= f) {
      // Gram matrix route: eigenvectors give the left singular vectors
      std::vector<double> mu_dot_row(n);
      for (std::size_t r = 0; r < n; ++r) mu_dot_row[r] = ops::row_dot(X, r, model.mean);
      double mu_sq = 0.0;
      for (double m : model.mean) mu_sq += m * m;
      std::vector<double> gram(n * n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
          const double g = ops::row_dot_row(X, i, X, j) - mu_dot_row[i] - mu_dot_row[j] + mu_sq;
          gram[i * n + j] = g;
          gram[j * n + i] = g;
        }
      }
      std::vector<double> values, vectors;
      symmetric_eigen(gram, n, values, vectors);
      std::size_t kept = 0;
      const double floor_value = std::max(1e-12, 1e-12 * values.front());
      while (kept < requested && kept < n && values[kept] > floor_value) ++kept;
      sigma.resize(kept);
      components.assign(kept * f, 0.0);
      // v_i = X_c^T u_i / sigma_i via one pass over the data
      std::vector<double> u_block(n * kept);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < kept; ++i) u_block[r * kept + i] = vectors[i * n + r];
      }
      std::vector<double> xtu = xt_times(X, model.mean, u_block, kept);
      for (std::size_t i = 0; i < kept; ++i) {
        sigma[i] = std::sqrt(std::max(0.0, values[i]));
        for (std::size_t j = 0; j < f; ++j) {
          components[i * f + j] = xtu[j * kept + i] / sigma[i];
        }
      }
    } else {
      // covariance route in feature space
      std::vector<double> cov(f * f, 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        const auto idx = X.row_indices(r);
        const auto val = X.row_values(r);
        std::vector<std::pair<std::size_t, double>> entries;
        entries.reserve(idx.size() + X.dense_cols);
        for (std::size_t kk = 0; kk < idx.size(); ++kk) entries.emplace_back(idx[kk], val[kk]);
        const auto d = X.dense_row(r);
        for (std::size_t j = 0; j < X.dense_cols; ++j) {
          entries.emplace_back(X.sparse_cols + j, d[j]);
        }
        for (std::size_t a = 0; a < entries.size(); ++a) {
          for (std::size_t b = a; b < entries.size(); ++b) {
            cov[entries[a].first * f + entries[b].first] += entries[a].second * entries[b].second;
          }
        }
      }
      for (std::size_t a = 0; a < f; ++a) {
        for (std::size_t b = a; b < f; ++b) {
          double v = cov[a * f + b] - static_cast<double>(n) * model.mean[a] * model.mean[b];
          cov[a * f + b] = v;
          cov[b * f + a] = v;
        }
      }
      std::vector<double> values, vectors;
      symmetric_eigen(cov, f, values, vectors);
      std::size_t kept = 0;
      const double floor_value = std::max(1e-12, 1e-12 * std::max(values.front(), 0.0));
      while (kept < requested && kept < f && values[kept] > floor_value) ++kept;
      sigma.resize(kept);
      components.assign(kept * f, 0.0);
      for (std::size_t i = 0; i < kept; ++i) {
        sigma[i] = std::sqrt(std::max(0.0, values[i]));
        for (std::size_t j = 0; j < f; ++j) components[i * f + j] = vectors[i * f + j];
      }
    }
  } else {
    // randomized range finder with power iterations
    requested = std::min(requested, options.randomized_cap);
    const std::size_t oversample = 10;
    const std::size_t l = std::min(std::min(n, f), requested + oversample);
    Rng rng(derive_seed(options.seed, "pca.randomized"));
    std::vector<double> omega(f * l);
    for (double& v : omega) v = rng.normal();
    std::vector<double> q = x_times(X, model.mean, omega, l);  // n x l
    orthonormalize(q, n, l);
    for (int power = 0; power < 4; ++power) {
      std::vector<double> z = xt_times(X, model.mean, q, l);  // f x l
      orthonormalize(z, f, l);
      q = x_times(X, model.mean, z, l);
      orthonormalize(q, n, l);
    }
    // B = Q^T X_c, factored through its small Gram matrix
    std::vector<double> bt = xt_times(X, model.mean, q, l);  // f x l = B^T
    std::vector<double> small(l * l, 0.0);
    for (std::size_t a = 0; a < l; ++a) {
      for (std::size_t b = a; b < l; ++b) {
        double dot = 0.0;
        for (std::size_t j = 0; j < f; ++j) dot += bt[j * l + a] * bt[j * l + b];
        small[a * l + b] = dot;
        small[b * l + a] = dot;
      }
    }
    std::vector<double> values, vectors;
    symmetric_eigen(small, l, values, vectors);
    std::size_t kept = 0;
    const double floor_value = std::max(1e-12, 1e-12 * std::max(values.front(), 0.0));
    while (kept < requested && kept < l && values[kept] > floor_value) ++kept;
    sigma.resize(kept);
    components.assign(kept * f, 0.0);
    for (std::size_t i = 0; i < kept; ++i) {
      sigma[i] = std::sqrt(std::max(0.0, values[i]));
      for (std::size_t j = 0; j < f; ++j) {
        double dot = 0.0;
        for (std::size_t c = 0; c < l; ++c) dot += bt[j * l + c] * vectors[i * l + c];
        components[i * f + j] = dot / sigma[i];
      }
    }
  }

  fix_signs(components, sigma.size(), f);
  model.n_components = sigma.size();
  model.singular_values = std::move(sigma);
  model.components = std::move(components);
  model.explained_variance_ratio.resize(model.n_components);
  for (std::size_t i = 0; i < model.n_components; ++i) {
    model.explained_variance_ratio[i] =
        model.singular_values[i] * model.singular_values[i] / model.total_centered_ss;
  }
  return model;
}

std::vector<double> pca_transform(const PCAModel& model, const FeatureMatrix& X) {
  ops::check_width(X, model.n_features, "pca_transform");
  const std::size_t k = model.n_components;
  std::vector<double> scores(X.rows() * k, 0.0);
  std::vector<double> comp(model.n_features);
  for (std::size_t i = 0; i < k; ++i) {
    std::copy(model.component(i), model.component(i) + model.n_features, comp.begin());
    double mu_dot = 0.0;
    for (std::size_t j = 0; j < model.n_features; ++j) mu_dot += model.mean[j] * comp[j];
    for (std::size_t r = 0; r < X.rows(); ++r) {
      scores[r * k + i] = centered_row_dot(X, r, comp, mu_dot);
    }
  }
  return scores;
}

CorrelationReport feature_component_correlation(const FeatureMatrix& X, const PCAModel& model,
                                                std::size_t n_top_components) {
  const std::size_t k = std::min(n_top_components, model.n_components);
  const std::size_t f = model.n_features;
  ops::check_width(X, f, "feature_component_correlation");
  const std::size_t n = X.rows();

  CorrelationReport report;
  report.n_top = k;
  report.matrix.assign(f * k, 0.0);
  report.max_abs_r.assign(f, 0.0);

  const std::vector<double> scores = pca_transform(model, X);  // n x k_model
  const std::size_t k_model = model.n_components;

  // score columns are centered by construction
  std::vector<double> score_ss(k, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      score_ss[c] += scores[r * k_model + c] * scores[r * k_model + c];
    }
  }

  // per-feature sums: Sum x, Sum x^2, Sum x*t_c over nonzeros (zero-mean t)
  std::vector<double> col_sum(f, 0.0), col_sum_sq(f, 0.0);
  std::vector<double> cross(f * k, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double* t = scores.data() + r * k_model;
    const auto idx = X.row_indices(r);
    const auto val = X.row_values(r);
    for (std::size_t kk = 0; kk < idx.size(); ++kk) {
      const std::size_t j = idx[kk];
      const double v = val[kk];
      col_sum[j] += v;
      col_sum_sq[j] += v * v;
      double* cj = cross.data() + j * k;
      for (std::size_t c = 0; c < k; ++c) cj[c] += v * t[c];
    }
    const auto d = X.dense_row(r);
    for (std::size_t jd = 0; jd < X.dense_cols; ++jd) {
      const std::size_t j = X.sparse_cols + jd;
      const double v = d[jd];
      col_sum[j] += v;
      col_sum_sq[j] += v * v;
      double* cj = cross.data() + j * k;
      for (std::size_t c = 0; c < k; ++c) cj[c] += v * t[c];
    }
  }

  for (std::size_t j = 0; j < f; ++j) {
    const double mean_j = col_sum[j] / static_cast<double>(n);
    const double ss_j = col_sum_sq[j] - static_cast<double>(n) * mean_j * mean_j;
    if (!(ss_j > 1e-24)) {
      report.warnings.push_back("zero-variance feature column " + std::to_string(j) +
                                ": correlation set to 0");
      continue;
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (!(score_ss[c] > 1e-24)) continue;
      // cov numerator: Sum (x - mean) t = Sum x t (t is zero-mean)
      const double r_val = cross[j * k + c] / std::sqrt(ss_j * score_ss[c]);
      report.matrix[j * k + c] = r_val;
      report.max_abs_r[j] = std::max(report.max_abs_r[j], std::fabs(r_val));
    }
  }
  return report;
}

ImportanceRanking rank_features(const PCAModel& model,
                                const std::vector<std::string>& column_names,
                                std::size_t n_components_budget) {
  if (column_names.size() != model.n_features) {
    throw InvalidArgument("rank_features: column name count mismatch");
  }
  const std::size_t budget = n_components_budget == 0
                                 ? model.n_components
                                 : std::min(n_components_budget, model.n_components);
  std::vector<double> importance(model.n_features, 0.0);
  for (std::size_t i = 0; i < budget; ++i) {
    const double ratio = model.explained_variance_ratio[i];
    const double* row = model.component(i);
    for (std::size_t j = 0; j < model.n_features; ++j) {
      importance[j] += ratio * row[j] * row[j];
    }
  }
  std::vector<std::size_t> order(model.n_features);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return importance[a] > importance[b]; });
  ImportanceRanking ranking;
  ranking.items.reserve(model.n_features);
  for (std::size_t j : order) {
    ranking.items.emplace_back(column_names[j], 100.0 * importance[j]);
  }
  return ranking;
}

double cumulative_explained_variance(const PCAModel& model, std::size_t k) {
  if (k < 1 || k > model.n_components) {
    throw InvalidArgument("cumulative_explained_variance: k out of range [1, " +
                          std::to_string(model.n_components) + "]");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += model.explained_variance_ratio[i];
  return sum;
}

}  // namespace mbti
