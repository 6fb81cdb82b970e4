#pragma once

#include <Eigen/Dense>
#include <deque>
#include <functional>

namespace srlab {

struct LbfgsOptions {
  int max_iters = 200;
  int history = 10;
  double grad_tol = 1e-10;   // stop when |g|_inf <= grad_tol * max(1,|x|_inf)
  double f_rel_tol = 1e-14;  // stop on relative objective stagnation
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search = 40;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iters = 0;
  bool converged = false;
};

/// Limited-memory BFGS with a strong-Wolfe line search. `fg` evaluates the
/// objective and writes the gradient. Deterministic: no randomness, history
/// updates skipped when curvature y.s is not positive.
inline LbfgsResult lbfgs_minimize(
    const std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>& fg,
    Eigen::VectorXd x0, const LbfgsOptions& opts = {}) {
  const int n = static_cast<int>(x0.size());
  LbfgsResult res;
  res.x = std::move(x0);
  Eigen::VectorXd g(n), g_new(n);
  res.f = fg(res.x, g);

  std::deque<Eigen::VectorXd> S, Y;
  std::deque<double> rho;

  auto line_search = [&](const Eigen::VectorXd& d, double f0, const Eigen::VectorXd& g0,
                         Eigen::VectorXd& x_out, double& f_out, Eigen::VectorXd& g_out) -> double {
    // Strong Wolfe via bracket + zoom (Nocedal-Wright).
    const double dg0 = g0.dot(d);
    if (dg0 >= 0.0) return -1.0;
    double a_prev = 0.0, f_prev = f0;
    double a = 1.0;
    double a_lo = 0.0, a_hi = 0.0, f_lo = f0;
    bool bracketed = false;
    for (int it = 0; it < opts.max_line_search; ++it) {
      x_out = res.x + a * d;
      f_out = fg(x_out, g_out);
      if (f_out > f0 + opts.wolfe_c1 * a * dg0 || (it > 0 && f_out >= f_prev)) {
        a_lo = a_prev;
        f_lo = f_prev;
        a_hi = a;
        bracketed = true;
        break;
      }
      double dg = g_out.dot(d);
      if (std::abs(dg) <= -opts.wolfe_c2 * dg0) return a;
      if (dg >= 0.0) {
        a_lo = a;
        f_lo = f_out;
        a_hi = a_prev;
        bracketed = true;
        break;
      }
      a_prev = a;
      f_prev = f_out;
      a *= 2.0;
    }
    if (!bracketed) return -1.0;
    for (int it = 0; it < opts.max_line_search; ++it) {
      a = 0.5 * (a_lo + a_hi);
      x_out = res.x + a * d;
      f_out = fg(x_out, g_out);
      if (f_out > f0 + opts.wolfe_c1 * a * dg0 || f_out >= f_lo) {
        a_hi = a;
      } else {
        double dg = g_out.dot(d);
        if (std::abs(dg) <= -opts.wolfe_c2 * dg0) return a;
        if (dg * (a_hi - a_lo) >= 0.0) a_hi = a_lo;
        a_lo = a;
        f_lo = f_out;
      }
      if (std::abs(a_hi - a_lo) < 1e-16) break;
    }
    x_out = res.x + a_lo * d;
    f_out = fg(x_out, g_out);
    return f_out < f0 ? a_lo : -1.0;
  };

  for (res.iters = 0; res.iters < opts.max_iters; ++res.iters) {
    double gscale = std::max(1.0, res.x.lpNorm<Eigen::Infinity>());
    if (g.lpNorm<Eigen::Infinity>() <= opts.grad_tol * gscale) {
      res.converged = true;
      break;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = g;
    std::vector<double> alpha(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      alpha[i] = rho[i] * S[i].dot(q);
      q -= alpha[i] * Y[i];
    }
    if (!S.empty()) {
      double gamma = S.back().dot(Y.back()) / Y.back().squaredNorm();
      q *= gamma;
    }
    for (std::size_t i = 0; i < S.size(); ++i) {
      double beta = rho[i] * Y[i].dot(q);
      q += (alpha[i] - beta) * S[i];
    }
    Eigen::VectorXd d = -q;

    Eigen::VectorXd x_new(n);
    double f_new = 0.0;
    double step = line_search(d, res.f, g, x_new, f_new, g_new);
    if (step <= 0.0) {
      // Retry with plain steepest descent before giving up.
      d = -g;
      step = line_search(d, res.f, g, x_new, f_new, g_new);
      if (step <= 0.0) break;
    }

    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd y = g_new - g;
    double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      S.push_back(s);
      Y.push_back(y);
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > opts.history) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    double f_old = res.f;
    res.x = x_new;
    res.f = f_new;
    g = g_new;
    if (std::abs(f_old - res.f) <= opts.f_rel_tol * std::max(1.0, std::abs(f_old))) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace srlab
