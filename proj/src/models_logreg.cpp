#include <algorithm>
#include <cmath>
#include <deque>

#include "feature_ops.hpp"
#include "mbti/models.hpp"
#include "models_internal.hpp"

namespace mbti {

namespace {

double log1p_exp_neg(double t) {
  // log(1 + exp(-t)), stable for both signs
  return t >= 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t));
}

double sigma_neg(double t) {
  // 1 / (1 + exp(t)) = sigma(-t)
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

struct Objective {
  const FeatureMatrix& X;
  const std::vector<double>& y_pm;  // +-1
  double C;
  double l2_factor;  // 1 for l2, (1-rho) for elastic net

  // margin z_i reused by gradient and hessian products
  mutable std::vector<double> z;

  double value_grad(const std::vector<double>& w, double c, std::vector<double>& grad_w,
                    double& grad_c) const {
    const std::size_t n = X.rows();
    z.resize(n);
    double loss = 0.0;
    grad_w.assign(w.size(), 0.0);
    grad_c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = ops::row_dot(X, i, w) + c;
      const double t = y_pm[i] * z[i];
      loss += log1p_exp_neg(t);
      const double coef = -y_pm[i] * sigma_neg(t);  // dL/dz
      ops::row_axpy(X, i, C * coef, grad_w);
      grad_c += C * coef;
    }
    double reg = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      reg += 0.5 * l2_factor * w[j] * w[j];
      grad_w[j] += l2_factor * w[j];
    }
    return reg + C * loss;
  }

  // Hessian-vector product at the last value_grad point (uses cached z)
  void hessian_vec(const std::vector<double>& v_w, double v_c, std::vector<double>& out_w,
                   double& out_c) const {
    out_w.assign(v_w.size(), 0.0);
    out_c = 0.0;
    for (std::size_t i = 0; i < X.rows(); ++i) {
      const double t = y_pm[i] * z[i];
      const double d = sigma_neg(t) * (1.0 - sigma_neg(t));  // sigma(-t) sigma(t)
      const double xv = ops::row_dot(X, i, v_w) + v_c;
      ops::row_axpy(X, i, C * d * xv, out_w);
      out_c += C * d * xv;
    }
    for (std::size_t j = 0; j < v_w.size(); ++j) out_w[j] += l2_factor * v_w[j];
  }
};

double inf_norm(const std::vector<double>& v, double extra) {
  double m = std::fabs(extra);
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

struct FitResult {
  std::vector<double> w;
  double c = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  double objective = 0.0;
};

FitResult solve_lbfgs(const Objective& obj, std::size_t n_params, double tol,
                      std::size_t max_iter) {
  constexpr std::size_t kMemory = 10;
  FitResult res;
  res.w.assign(n_params, 0.0);
  std::vector<double> grad_w;
  double grad_c = 0.0;
  double f = obj.value_grad(res.w, res.c, grad_w, grad_c);

  std::deque<std::vector<double>> s_list, y_list;  // parameter/gradient deltas (w + c appended)
  std::deque<double> rho_list;

  auto pack = [&](const std::vector<double>& w, double c) {
    std::vector<double> v = w;
    v.push_back(c);
    return v;
  };

  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    if (inf_norm(grad_w, grad_c) < tol) {
      res.converged = true;
      break;
    }
    // two-loop recursion
    std::vector<double> q = pack(grad_w, grad_c);
    std::vector<double> alpha(s_list.size());
    for (std::size_t i = s_list.size(); i-- > 0;) {
      double dot = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) dot += s_list[i][j] * q[j];
      alpha[i] = rho_list[i] * dot;
      for (std::size_t j = 0; j < q.size(); ++j) q[j] -= alpha[i] * y_list[i][j];
    }
    if (!s_list.empty()) {
      double sy = 0.0, yy = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) {
        sy += s_list.back()[j] * y_list.back()[j];
        yy += y_list.back()[j] * y_list.back()[j];
      }
      const double scale = sy / yy;
      for (double& v : q) v *= scale;
    }
    for (std::size_t i = 0; i < s_list.size(); ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) dot += y_list[i][j] * q[j];
      const double beta = rho_list[i] * dot;
      for (std::size_t j = 0; j < q.size(); ++j) q[j] += s_list[i][j] * (alpha[i] - beta);
    }
    // descent direction d = -q, safeguarded
    double dg = 0.0;
    for (std::size_t j = 0; j < n_params; ++j) dg += -q[j] * grad_w[j];
    dg += -q[n_params] * grad_c;
    if (dg >= 0.0) {
      for (std::size_t j = 0; j < n_params; ++j) q[j] = grad_w[j];
      q[n_params] = grad_c;
      dg = 0.0;
      for (double v : q) dg -= v * v;
    }

    // Armijo backtracking
    double step = 1.0;
    std::vector<double> w_new(n_params);
    double c_new = 0.0, f_new = f;
    std::vector<double> gw_new;
    double gc_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      for (std::size_t j = 0; j < n_params; ++j) w_new[j] = res.w[j] - step * q[j];
      c_new = res.c - step * q[n_params];
      f_new = obj.value_grad(w_new, c_new, gw_new, gc_new);
      if (f_new <= f + 1e-4 * step * dg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no further progress

    std::vector<double> s(n_params + 1), yv(n_params + 1);
    for (std::size_t j = 0; j < n_params; ++j) {
      s[j] = w_new[j] - res.w[j];
      yv[j] = gw_new[j] - grad_w[j];
    }
    s[n_params] = c_new - res.c;
    yv[n_params] = gc_new - grad_c;
    double sy = 0.0;
    for (std::size_t j = 0; j <= n_params; ++j) sy += s[j] * yv[j];
    if (sy > 1e-12) {
      s_list.push_back(std::move(s));
      y_list.push_back(std::move(yv));
      rho_list.push_back(1.0 / sy);
      if (s_list.size() > kMemory) {
        s_list.pop_front();
        y_list.pop_front();
        rho_list.pop_front();
      }
    }
    res.w = std::move(w_new);
    res.c = c_new;
    f = f_new;
    grad_w = std::move(gw_new);
    grad_c = gc_new;
  }
  if (!res.converged && inf_norm(grad_w, grad_c) < tol) res.converged = true;
  res.objective = f;
  return res;
}

FitResult solve_newton_cg(const Objective& obj, std::size_t n_params, double tol,
                          std::size_t max_iter) {
  FitResult res;
  res.w.assign(n_params, 0.0);
  std::vector<double> grad_w;
  double grad_c = 0.0;
  double f = obj.value_grad(res.w, res.c, grad_w, grad_c);

  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    const double gnorm = inf_norm(grad_w, grad_c);
    if (gnorm < tol) {
      res.converged = true;
      break;
    }
    // CG on H d = -g with an adaptive forcing term
    std::vector<double> d_w(n_params, 0.0);
    double d_c = 0.0;
    std::vector<double> r_w = grad_w;
    double r_c = grad_c;
    std::vector<double> p_w(n_params);
    for (std::size_t j = 0; j < n_params; ++j) p_w[j] = -r_w[j];
    double p_c = -r_c;
    double rr = 0.0;
    for (double v : r_w) rr += v * v;
    rr += r_c * r_c;
    const double stop = std::min(0.5, std::sqrt(std::sqrt(rr))) * std::sqrt(rr);
    std::vector<double> hp_w;
    double hp_c = 0.0;
    for (std::size_t cg = 0; cg < 2 * (n_params + 1) + 10; ++cg) {
      if (std::sqrt(rr) <= stop) break;
      obj.hessian_vec(p_w, p_c, hp_w, hp_c);
      double php = 0.0, pp = 0.0;
      for (std::size_t j = 0; j < n_params; ++j) {
        php += p_w[j] * hp_w[j];
        pp += p_w[j] * p_w[j];
      }
      php += p_c * hp_c;
      pp += p_c * p_c;
      if (php <= 1e-16 * pp) break;  // curvature guard
      const double alpha = rr / php;
      for (std::size_t j = 0; j < n_params; ++j) {
        d_w[j] += alpha * p_w[j];
        r_w[j] += alpha * hp_w[j];
      }
      d_c += alpha * p_c;
      r_c += alpha * hp_c;
      double rr_new = 0.0;
      for (double v : r_w) rr_new += v * v;
      rr_new += r_c * r_c;
      const double beta = rr_new / rr;
      for (std::size_t j = 0; j < n_params; ++j) p_w[j] = -r_w[j] + beta * p_w[j];
      p_c = -r_c + beta * p_c;
      rr = rr_new;
    }
    bool have_direction = false;
    for (double v : d_w) {
      if (v != 0.0) have_direction = true;
    }
    if (!have_direction && d_c == 0.0) {
      for (std::size_t j = 0; j < n_params; ++j) d_w[j] = -grad_w[j];
      d_c = -grad_c;
    }

    double dg = 0.0;
    for (std::size_t j = 0; j < n_params; ++j) dg += d_w[j] * grad_w[j];
    dg += d_c * grad_c;
    if (dg >= 0.0) {
      for (std::size_t j = 0; j < n_params; ++j) d_w[j] = -grad_w[j];
      d_c = -grad_c;
      dg = 0.0;
      for (double v : grad_w) dg -= v * v;
      dg -= grad_c * grad_c;
    }

    double step = 1.0;
    std::vector<double> w_new(n_params), gw_new;
    double c_new = 0.0, gc_new = 0.0, f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      for (std::size_t j = 0; j < n_params; ++j) w_new[j] = res.w[j] + step * d_w[j];
      c_new = res.c + step * d_c;
      f_new = obj.value_grad(w_new, c_new, gw_new, gc_new);
      if (f_new <= f + 1e-4 * step * dg) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    res.w = std::move(w_new);
    res.c = c_new;
    f = f_new;
    grad_w = std::move(gw_new);
    grad_c = gc_new;
  }
  if (!res.converged && inf_norm(grad_w, grad_c) < tol) res.converged = true;
  res.objective = f;
  return res;
}

// proximal gradient with backtracking for the l1-bearing elastic net
FitResult solve_proximal(const Objective& obj, std::size_t n_params, double l1_factor,
                         double tol, std::size_t max_iter) {
  FitResult res;
  res.w.assign(n_params, 0.0);
  std::vector<double> grad_w;
  double grad_c = 0.0;
  double f = obj.value_grad(res.w, res.c, grad_w, grad_c);
  auto l1_term = [&](const std::vector<double>& w) {
    double sum = 0.0;
    for (double v : w) sum += std::fabs(v);
    return l1_factor * sum;
  };
  double step = 1.0;
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    std::vector<double> w_new(n_params), gw_new;
    double c_new = 0.0, gc_new = 0.0, f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t j = 0; j < n_params; ++j) {
        const double u = res.w[j] - step * grad_w[j];
        const double thr = step * l1_factor;  // soft threshold
        w_new[j] = u > thr ? u - thr : (u < -thr ? u + thr : 0.0);
      }
      c_new = res.c - step * grad_c;
      f_new = obj.value_grad(w_new, c_new, gw_new, gc_new);
      // quadratic upper-bound test for the smooth part
      double quad = f, diff_sq = 0.0;
      for (std::size_t j = 0; j < n_params; ++j) {
        const double d = w_new[j] - res.w[j];
        quad += grad_w[j] * d;
        diff_sq += d * d;
      }
      const double dc = c_new - res.c;
      quad += grad_c * dc;
      diff_sq += dc * dc;
      quad += diff_sq / (2.0 * step);
      if (f_new <= quad + 1e-12) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    double move = std::fabs(c_new - res.c);
    for (std::size_t j = 0; j < n_params; ++j) {
      move = std::max(move, std::fabs(w_new[j] - res.w[j]));
    }
    // keep the penalized objective monotone
    if (f_new + l1_term(w_new) > f + l1_term(res.w) + 1e-12) break;
    res.w = std::move(w_new);
    res.c = c_new;
    f = f_new;
    grad_w = std::move(gw_new);
    grad_c = gc_new;
    if (move / step < tol) {
      res.converged = true;
      break;
    }
    step = std::min(step * 2.0, 1.0);  // gentle step recovery
  }
  res.objective = f + l1_term(res.w);
  return res;
}

}  // namespace

LogRegGradient logreg_objective(const FeatureMatrix& X, const std::vector<int>& y,
                                const std::vector<double>& w, double c,
                                const LogRegOptions& options) {
  std::vector<double> y_pm(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) y_pm[i] = y[i] == 1 ? 1.0 : -1.0;
  Objective obj{X, y_pm, options.C,
                options.penalty == Penalty::ElasticNet ? 1.0 - options.rho : 1.0, {}};
  LogRegGradient g;
  g.value = obj.value_grad(w, c, g.grad_w, g.grad_c);
  return g;
}

TrainedModel fit_logreg(const FeatureMatrix& X, const std::vector<int>& y, LogRegOptions options,
                        std::uint64_t seed) {
  ops::check_binary_labels(y, X.rows(), "fit_logreg", /*require_both=*/false);
  for (double v : X.values) {
    if (!std::isfinite(v)) throw InvalidArgument("fit_logreg: non-finite feature value");
  }
  for (double v : X.dense) {
    if (!std::isfinite(v)) throw InvalidArgument("fit_logreg: non-finite feature value");
  }
  std::vector<double> y_pm(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) y_pm[i] = y[i] == 1 ? 1.0 : -1.0;

  const bool elastic = options.penalty == Penalty::ElasticNet;
  Objective obj{X, y_pm, options.C, elastic ? 1.0 - options.rho : 1.0, {}};

  FitResult fit;
  if (elastic && options.rho > 0.0) {
    // l1 term is nonsmooth: proximal gradient regardless of the solver flag
    fit = solve_proximal(obj, X.cols(), options.rho, options.grad_tol, options.max_iter);
  } else if (options.solver == LogRegSolver::NewtonCg) {
    fit = solve_newton_cg(obj, X.cols(), options.grad_tol, options.max_iter);
  } else {
    fit = solve_lbfgs(obj, X.cols(), options.grad_tol, options.max_iter);
  }

  LogRegModel m;
  m.weights = std::move(fit.w);
  m.intercept = fit.c;
  m.penalty = options.penalty;
  m.C = options.C;
  m.rho = elastic ? options.rho : 0.0;
  m.converged = fit.converged;
  m.iterations = fit.iterations;
  m.objective = fit.objective;

  TrainedModel model;
  model.spec.family = ModelFamily::LogReg;
  model.spec.params = {{"C", options.C},
                       {"penalty", elastic ? "elasticnet" : "l2"},
                       {"solver", options.solver == LogRegSolver::NewtonCg ? "newton-cg"
                                                                           : "quasi-newton"}};
  if (elastic) model.spec.params["rho"] = options.rho;
  model.spec.seed = seed;
  model.n_features = X.cols();
  model.state = std::move(m);
  return model;
}

namespace detail {

std::vector<double> predict_logreg(const LogRegModel& m, const FeatureMatrix& X) {
  std::vector<double> probs(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const double z = ops::row_dot(X, i, m.weights) + m.intercept;
    probs[i] = sigma_neg(-z);  // sigma(z) = 1/(1+exp(-z))
  }
  return probs;
}

}  // namespace detail

}  // namespace mbti
