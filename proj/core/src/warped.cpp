#include "srlab/warped.hpp"

#include <cmath>

#include "srlab/errors.hpp"
#include "srlab/lbfgs.hpp"

namespace srlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

// w(r) = arctan(r)/r and its first two derivatives, series-switched near 0
// where the closed forms cancel catastrophically.
void atan_ratio(double r, double& w, double& wp, double& wpp) {
  if (std::abs(r) < 0.1) {
    w = 0.0;
    wp = 0.0;
    wpp = 0.0;
    double r2 = r * r;
    double p = 1.0;  // r^{2j}
    for (int j = 0; j <= 10; ++j) {
      double sgn = (j % 2 == 0) ? 1.0 : -1.0;
      double den = 2.0 * j + 1.0;
      w += sgn * p / den;
      if (j >= 1) {
        wp += sgn * 2.0 * j * p / (den * r);
        wpp += sgn * 2.0 * j * (2.0 * j - 1.0) * p / (den * r2);
      }
      p *= r2;
    }
    return;
  }
  double v = std::atan(r);
  double vp = 1.0 / (1.0 + r * r);
  double vpp = -2.0 * r * vp * vp;
  w = v / r;
  wp = (vp * r - v) / (r * r);
  wpp = (vpp * r * r - 2.0 * vp * r + 2.0 * v) / (r * r * r);
}

}  // namespace

double WarpingTriple::f(double r) { return r * std::pow(1.0 + r * r, -0.25); }

double WarpingTriple::fp(double r) {
  return (1.0 + 0.5 * r * r) * std::pow(1.0 + r * r, -1.25);
}

double WarpingTriple::fpp(double r) {
  return -0.25 * r * (r * r + 6.0) * std::pow(1.0 + r * r, -2.25);
}

double WarpingTriple::g(double r) const {
  double w, wp, wpp;
  atan_ratio(r, w, wp, wpp);
  return 0.5 * kPi * c / w;
}

double WarpingTriple::gp(double r) const { return gp_over_g(r) * g(r); }

double WarpingTriple::gpp(double r) const { return gpp_over_g(r) * g(r); }

double WarpingTriple::h(double r) const { return std::pow(1.0 + r * r, -0.5 * alpha); }

double WarpingTriple::hp(double r) const {
  return -alpha * r * std::pow(1.0 + r * r, -0.5 * alpha - 1.0);
}

double WarpingTriple::hpp(double r) const {
  return alpha * ((alpha + 1.0) * r * r - 1.0) * std::pow(1.0 + r * r, -0.5 * alpha - 2.0);
}

double WarpingTriple::fp_over_f(double r) {
  return (1.0 + 0.5 * r * r) / (r * (1.0 + r * r));
}

double WarpingTriple::fpp_over_f(double r) {
  double s = 1.0 + r * r;
  return -(r * r + 6.0) / (4.0 * s * s);
}

double WarpingTriple::one_minus_fp2_over_f2(double r) {
  // 1-f' = [ (1+r^2)^{5/4} - 1 - r^2/2 ] / (1+r^2)^{5/4}, expm1-stable.
  double s = 1.0 + r * r;
  double num = std::expm1(1.25 * std::log1p(r * r)) - 0.5 * r * r;
  double one_minus_fp = num / std::pow(s, 1.25);
  double one_plus_fp = 1.0 + fp(r);
  double f2 = r * r / std::sqrt(s);
  return one_minus_fp * one_plus_fp / f2;
}

double WarpingTriple::gp_over_g(double r) const {
  double w, wp, wpp;
  atan_ratio(r, w, wp, wpp);
  return -wp / w;
}

double WarpingTriple::gpp_over_g(double r) const {
  double w, wp, wpp;
  atan_ratio(r, w, wp, wpp);
  return -wpp / w + 2.0 * (wp / w) * (wp / w);
}

double WarpingTriple::one_minus_gp2_over_g2(double r) const {
  double gv = g(r);
  double gpv = gp(r);
  return (1.0 - gpv * gpv) / (gv * gv);
}

double WarpingTriple::hp_over_h(double r) const { return -alpha * r / (1.0 + r * r); }

double WarpingTriple::hpp_over_h(double r) const {
  double s = 1.0 + r * r;
  return alpha * ((alpha + 1.0) * r * r - 1.0) / (s * s);
}

double WarpingTriple::f_lambda(double lambda, double t) const {
  return t * std::pow(1.0 + lambda * lambda * t * t, -0.25);
}

double WarpingTriple::g_lambda(double lambda, double t) const {
  return 0.5 * kPi * c * t / std::atan(lambda * t);
}

double WarpingTriple::h_lambda(double lambda, double t) const {
  return std::pow(lambda, alpha) * std::pow(1.0 + lambda * lambda * t * t, -0.5 * alpha);
}

RicciComponents ricci_components(const WarpingTriple& W, double r) {
  if (r <= 0.0) throw ArgumentError("ricci_components: r must be positive");
  const double m = W.m, k = W.k;
  const double Ff = WarpingTriple::fpp_over_f(r);
  const double F1 = WarpingTriple::fp_over_f(r);
  const double Gg = W.gpp_over_g(r);
  const double G1 = W.gp_over_g(r);
  const double Hh = W.hpp_over_h(r);
  const double H1 = W.hp_over_h(r);

  RicciComponents ric;
  ric.rr = -m * Ff - k * Gg - Hh;
  ric.xx = -Ff + (m - 1.0) * WarpingTriple::one_minus_fp2_over_f2(r) - k * F1 * G1 - F1 * H1;
  ric.yy = -Gg - m * F1 * G1 + (k - 1.0) * W.one_minus_gp2_over_g2(r) - G1 * H1;
  ric.zz = -Hh - m * F1 * H1 - k * G1 * H1;
  return ric;
}

// ---------------------------------------------------------------------------
// Finite-difference Ricci oracle
// ---------------------------------------------------------------------------

namespace {

// Christoffel symbols at x via central differences of the metric.
void christoffel(const MetricFunction& metric, const Eigen::VectorXd& x, double h,
                 std::vector<Eigen::MatrixXd>& gamma) {
  const int d = static_cast<int>(x.size());
  Eigen::MatrixXd g0 = metric(x);
  double det = g0.determinant();
  if (!(std::abs(det) > 1e-14)) {
    throw OracleConditioning("metric nearly singular at the evaluation point");
  }
  Eigen::MatrixXd ginv = g0.inverse();
  std::vector<Eigen::MatrixXd> dg(d);
  for (int k = 0; k < d; ++k) {
    Eigen::VectorXd xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    dg[k] = (metric(xp) - metric(xm)) / (2.0 * h);
  }
  gamma.assign(d, Eigen::MatrixXd::Zero(d, d));
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      for (int c = 0; c < d; ++c) {
        double acc = 0.0;
        for (int l = 0; l < d; ++l) {
          acc += ginv(a, l) * (dg[b](c, l) + dg[c](b, l) - dg[l](b, c));
        }
        gamma[a](b, c) = 0.5 * acc;
      }
    }
  }
}

Eigen::MatrixXd ricci_fd(const MetricFunction& metric, const Eigen::VectorXd& x, double h) {
  const int d = static_cast<int>(x.size());
  std::vector<Eigen::MatrixXd> gamma;
  christoffel(metric, x, h, gamma);

  // dGamma[k][a](b,c) = d Gamma^a_{bc} / dx_k
  std::vector<std::vector<Eigen::MatrixXd>> dgamma(d);
  for (int k = 0; k < d; ++k) {
    Eigen::VectorXd xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    std::vector<Eigen::MatrixXd> gp, gm;
    christoffel(metric, xp, h, gp);
    christoffel(metric, xm, h, gm);
    dgamma[k].resize(d);
    for (int a = 0; a < d; ++a) dgamma[k][a] = (gp[a] - gm[a]) / (2.0 * h);
  }

  Eigen::MatrixXd ric = Eigen::MatrixXd::Zero(d, d);
  for (int b = 0; b < d; ++b) {
    for (int c = 0; c < d; ++c) {
      double acc = 0.0;
      for (int a = 0; a < d; ++a) {
        acc += dgamma[a][a](b, c) - dgamma[b][a](a, c);
        for (int l = 0; l < d; ++l) {
          acc += gamma[a](a, l) * gamma[l](b, c) - gamma[a](b, l) * gamma[l](a, c);
        }
      }
      ric(b, c) = acc;
    }
  }
  return ric;
}

}  // namespace

Eigen::MatrixXd curvature_oracle(const MetricFunction& metric, const Eigen::VectorXd& p,
                                 double fd_step, bool richardson) {
  Eigen::MatrixXd r1 = ricci_fd(metric, p, fd_step);
  if (!richardson) return r1;
  Eigen::MatrixXd r2 = ricci_fd(metric, p, fd_step / 2.0);
  return (4.0 * r2 - r1) / 3.0;
}

MetricFunction sphere_metric(int d) {
  return [d](const Eigen::VectorXd& t) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
    double prod = 1.0;
    for (int i = 0; i < d; ++i) {
      g(i, i) = prod;
      double s = std::sin(t[i]);
      prod *= s * s;
    }
    return g;
  };
}

MetricFunction warped_product_metric(const WarpingTriple& W) {
  const int m = W.m, k = W.k;
  return [W, m, k](const Eigen::VectorXd& x) {
    const int d = 1 + m + k + 1;
    double r = x[0];
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
    g(0, 0) = 1.0;
    double f2 = WarpingTriple::f(r) * WarpingTriple::f(r);
    double prod = 1.0;
    for (int i = 0; i < m; ++i) {
      g(1 + i, 1 + i) = f2 * prod;
      double s = std::sin(x[1 + i]);
      prod *= s * s;
    }
    double g2 = W.g(r) * W.g(r);
    prod = 1.0;
    for (int i = 0; i < k; ++i) {
      g(1 + m + i, 1 + m + i) = g2 * prod;
      double s = std::sin(x[1 + m + i]);
      prod *= s * s;
    }
    g(d - 1, d - 1) = W.h(r) * W.h(r);
    return g;
  };
}

GateCertificate parameter_gate(int k, double alpha) {
  if (k < 2 || alpha <= 0.0) throw ArgumentError("parameter_gate: need k >= 2, alpha > 0");
  double bound = std::max({k + 4.0 * alpha * (alpha + 1.0), k + 1.0, 2.0 * (alpha + 1.0)});
  int m = static_cast<int>(std::floor(bound)) + 1;  // smallest integer strictly above

  GateCertificate cert;
  cert.m = m;
  const int grid_pts = 200;
  for (int i = 0; i < grid_pts; ++i) {
    double e = -3.0 + 6.0 * i / (grid_pts - 1);
    cert.grid.push_back(std::pow(10.0, e));
  }

  double c = 0.5;
  for (int iter = 0; iter < 60; ++iter) {
    WarpingTriple W{m, k, alpha, c};
    double min_rr = 1e300, min_xx = 1e300, min_yy = 1e300, min_zz = 1e300;
    for (double r : cert.grid) {
      RicciComponents ric = ricci_components(W, r);
      min_rr = std::min(min_rr, ric.rr);
      min_xx = std::min(min_xx, ric.xx);
      min_yy = std::min(min_yy, ric.yy);
      min_zz = std::min(min_zz, ric.zz);
    }
    if (std::min({min_rr, min_xx, min_yy, min_zz}) >= 1e-8) {
      cert.c = c;
      cert.min_rr = min_rr;
      cert.min_xx = min_xx;
      cert.min_yy = min_yy;
      cert.min_zz = min_zz;
      return cert;
    }
    c *= 0.5;
  }
  throw GateFailed("no positive-Ricci c found; formula or parameter bug");
}

// ---------------------------------------------------------------------------
// Cone-Grushin distances
// ---------------------------------------------------------------------------

namespace {

struct ConeObjective {
  const ConeGrushinSpace* CG;
  int M;
  double eps;
  double r0, phi0, y0, r1, phi1, y1;

  // Unknowns: (s_j, phi_j, y_j) for j=1..M-1 with r_j = eps + s_j^2.
  int size() const { return 3 * (M - 1); }

  void nodes_from(const Eigen::VectorXd& z, std::vector<ConePathNode>& path) const {
    path.resize(M + 1);
    path[0] = {r0, phi0, y0};
    path[M] = {r1, phi1, y1};
    for (int j = 1; j < M; ++j) {
      double s = z[3 * (j - 1)];
      path[j].r = eps + s * s;
      path[j].phi = z[3 * (j - 1) + 1];
      path[j].y = z[3 * (j - 1) + 2];
    }
  }

  double seg2(const ConePathNode& A, const ConePathNode& B, double& rb) const {
    rb = 0.5 * (A.r + B.r);
    double dr = B.r - A.r, dphi = B.phi - A.phi, dy = B.y - A.y;
    double cr = CG->c * rb;
    return dr * dr + cr * cr * dphi * dphi + std::pow(rb, -2.0 * CG->alpha) * dy * dy;
  }

  double energy_grad(const Eigen::VectorXd& z, Eigen::VectorXd* grad) const {
    std::vector<ConePathNode> path;
    nodes_from(z, path);
    double E = 0.0;
    if (grad) grad->setZero(size());
    const double a = CG->alpha, c = CG->c;
    for (int j = 0; j < M; ++j) {
      const auto& A = path[j];
      const auto& B = path[j + 1];
      double rb;
      double d2 = seg2(A, B, rb);
      E += M * d2;
      if (!grad) continue;
      double dr = B.r - A.r, dphi = B.phi - A.phi, dy = B.y - A.y;
      double rpow = std::pow(rb, -2.0 * a);
      // partials w.r.t. node coordinates (both endpoints of the segment)
      auto add = [&](int node, double gr, double gphi, double gy) {
        if (node <= 0 || node >= M) return;
        double s = z[3 * (node - 1)];
        (*grad)[3 * (node - 1)] += gr * 2.0 * s;  // chain through r = eps + s^2
        (*grad)[3 * (node - 1) + 1] += gphi;
        (*grad)[3 * (node - 1) + 2] += gy;
      };
      double dmid = c * c * rb * dphi * dphi - a * std::pow(rb, -2.0 * a - 1.0) * dy * dy;
      add(j, M * (-2.0 * dr + dmid), M * (-2.0 * c * c * rb * rb * dphi),
          M * (-2.0 * rpow * dy));
      add(j + 1, M * (2.0 * dr + dmid), M * (2.0 * c * c * rb * rb * dphi),
          M * (2.0 * rpow * dy));
    }
    return E;
  }

  double length(const Eigen::VectorXd& z, std::vector<ConePathNode>* out = nullptr,
                double* min_r = nullptr) const {
    std::vector<ConePathNode> path;
    nodes_from(z, path);
    double L = 0.0, mr = path[0].r;
    for (int j = 0; j < M; ++j) {
      double rb;
      L += std::sqrt(seg2(path[j], path[j + 1], rb));
      mr = std::min(mr, path[j + 1].r);
    }
    if (out) *out = path;
    if (min_r) *min_r = mr;
    return L;
  }
};

}  // namespace

ConeDistanceResult cone_grushin_distance_reduced(const ConeGrushinSpace& CG, double r0, double y0,
                                                 double r1, double y1, double phi,
                                                 const ConeGrushinOptions& opts) {
  if (r0 < 0.0 || r1 < 0.0) throw ArgumentError("cone distance: radii must be nonnegative");
  ConeDistanceResult res;
  if (r0 == r1 && phi == 0.0 && y0 == y1) {
    res.converged = true;
    return res;
  }

  const int M = opts.path_segments;
  double dy = std::abs(y1 - y0);
  double scale = std::max({r0, r1, std::pow(dy, 1.0 / (1.0 + CG.alpha)), 0.05});

  Eigen::VectorXd best_z;
  for (std::size_t ei = 0; ei < opts.eps_schedule.size(); ++ei) {
    double eps = opts.eps_schedule[ei];
    ConeObjective obj{&CG, M, eps, std::max(r0, eps), 0.0, y0, std::max(r1, eps), phi, y1};
    // Radial connection cost of the clamped endpoints; added so every
    // eps-level value is an upper bound for the completion distance and the
    // family is monotone as the barrier loosens.
    double clamp_cost = std::max(0.0, eps - r0) + std::max(0.0, eps - r1);

    auto fg = [&](const Eigen::VectorXd& z, Eigen::VectorXd& g) {
      double E = obj.energy_grad(z, &g);
      return E;
    };

    double best_len = 1e300;
    Eigen::VectorXd best_local;
    std::vector<double> bumps = {0.0, 0.5 * scale, scale, 2.0 * scale};
    if (ei > 0) bumps = {0.0};  // warm start dominates after the first pass
    for (double bump : bumps) {
      Eigen::VectorXd z(obj.size());
      if (ei > 0 && bump == 0.0 && best_z.size() == obj.size()) {
        // Re-express the previous solution against the new barrier.
        z = best_z;
        for (int j = 1; j < M; ++j) {
          double s_old = z[3 * (j - 1)];
          double r_old = opts.eps_schedule[ei - 1] + s_old * s_old;
          z[3 * (j - 1)] = std::sqrt(std::max(r_old - eps, 1e-12));
        }
      } else {
        for (int j = 1; j < M; ++j) {
          double t = static_cast<double>(j) / M;
          double r_init = (1.0 - t) * obj.r0 + t * obj.r1 + bump * std::sin(kPi * t);
          z[3 * (j - 1)] = std::sqrt(std::max(r_init - eps, 1e-12));
          z[3 * (j - 1) + 1] = (1.0 - t) * obj.phi0 + t * obj.phi1;
          z[3 * (j - 1) + 2] = (1.0 - t) * obj.y0 + t * obj.y1;
        }
      }
      LbfgsOptions lopts;
      lopts.max_iters = opts.lbfgs_iters;
      LbfgsResult lr = lbfgs_minimize(fg, z, lopts);
      double len = obj.length(lr.x);
      if (len < best_len) {
        best_len = len;
        best_local = lr.x;
      }
    }
    best_z = best_local;
    res.eps_values.push_back(eps);
    res.eps_distances.push_back(best_len + clamp_cost);
    if (ei + 1 == opts.eps_schedule.size()) {
      ConeObjective fin = obj;
      res.upper = fin.length(best_z, &res.certificate, &res.min_r) + clamp_cost;
    }
  }

  const std::size_t ne = res.eps_distances.size();
  if (ne >= 2) {
    double d1 = res.eps_distances[ne - 2], d2 = res.eps_distances[ne - 1];
    double ratio = res.eps_values[ne - 2] / res.eps_values[ne - 1];
    res.estimate = d2 + (d2 - d1) / (ratio - 1.0);
  } else {
    res.estimate = res.eps_distances.back();
  }
  // Guard against a failed warm start making the family non-monotone
  // (up to optimizer noise).
  for (std::size_t i = 0; i + 1 < ne; ++i) {
    double slack = 5e-5 * std::max(1.0, res.eps_distances[i]);
    if (res.eps_distances[i + 1] > res.eps_distances[i] + slack) res.converged = false;
  }
  return res;
}

ConeDistanceResult cone_grushin_distance(const ConeGrushinSpace& CG, const Eigen::VectorXd& p,
                                         const Eigen::VectorXd& q,
                                         const ConeGrushinOptions& opts) {
  if (p.size() != CG.dim() || q.size() != CG.dim()) {
    throw DimensionError("cone_grushin_distance: points must be in R^{k+2}");
  }
  Eigen::VectorXd xp = p.head(CG.k + 1), xq = q.head(CG.k + 1);
  double r0 = xp.norm(), r1 = xq.norm();
  double phi = 0.0;
  if (r0 > 0.0 && r1 > 0.0) {
    double ct = xp.dot(xq) / (r0 * r1);
    phi = std::acos(std::clamp(ct, -1.0, 1.0));
  }
  return cone_grushin_distance_reduced(CG, r0, p[CG.k + 1], r1, q[CG.k + 1], phi, opts);
}

ConePathNode cone_dilate(const ConeGrushinSpace& CG, double lambda, const ConePathNode& p) {
  if (lambda <= 0.0) throw ArgumentError("cone_dilate: lambda must be positive");
  return {lambda * p.r, p.phi, std::pow(lambda, 1.0 + CG.alpha) * p.y};
}

DilationIsometryReport dilation_isometry_check(
    const ConeGrushinSpace& CG, const std::vector<std::pair<ConePathNode, ConePathNode>>& pairs,
    const std::vector<double>& lambdas, double tol, const ConeGrushinOptions& opts) {
  DilationIsometryReport rep;
  for (const auto& [P, Q] : pairs) {
    double d = cone_grushin_distance_reduced(CG, P.r, P.y, Q.r, Q.y, Q.phi - P.phi, opts).estimate;
    for (double l : lambdas) {
      ConePathNode Pl = cone_dilate(CG, l, P), Ql = cone_dilate(CG, l, Q);
      double dl =
          cone_grushin_distance_reduced(CG, Pl.r, Pl.y, Ql.r, Ql.y, Ql.phi - Pl.phi, opts).estimate;
      double rel = std::abs(dl - l * d) / (l * d);
      rep.max_rel_error = std::max(rep.max_rel_error, rel);
    }
  }
  rep.pass = rep.max_rel_error <= tol;
  return rep;
}

HausdorffFit hausdorff_dimension_estimate(const ConeGrushinSpace& CG, double axis_constant,
                                          int delta_lo_pow, int delta_hi_pow) {
  if (axis_constant <= 0.0) throw ArgumentError("hausdorff: axis constant must be positive");
  HausdorffFit fit;
  for (int e = delta_lo_pow; e <= delta_hi_pow; ++e) {
    double delta = std::pow(2.0, -e);
    // A delta-ball centered on C covers the y-interval of half-width
    // (delta/c~)^{1+alpha}; greedy covering of {|y| <= 1} needs ceil(1/w).
    double w = std::pow(delta / axis_constant, 1.0 + CG.alpha);
    double count = std::ceil(1.0 / w);
    fit.log_inv_delta.push_back(std::log(1.0 / delta));
    fit.log_count.push_back(std::log(count));
  }
  const std::size_t npts = fit.log_count.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < npts; ++i) {
    sx += fit.log_inv_delta[i];
    sy += fit.log_count[i];
    sxx += fit.log_inv_delta[i] * fit.log_inv_delta[i];
    sxy += fit.log_inv_delta[i] * fit.log_count[i];
  }
  double denom = npts * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) throw EstimateFailed("degenerate covering regression");
  fit.slope = (npts * sxy - sx * sy) / denom;
  return fit;
}

WarpingLimitReport asymptotic_warping_limit(const WarpingTriple& W,
                                            const std::vector<double>& lambdas, double a, double b,
                                            int grid) {
  if (!(0.0 < a && a < b)) throw ArgumentError("warping limit: need 0 < a < b");
  WarpingLimitReport rep;
  for (double l : lambdas) {
    double fd = 0.0, gd = 0.0, hd = 0.0;
    for (int i = 0; i <= grid; ++i) {
      double t = a + (b - a) * i / grid;
      fd = std::max(fd, std::abs(W.f_lambda(l, t)));
      gd = std::max(gd, std::abs(W.g_lambda(l, t) - W.c * t));
      hd = std::max(hd, std::abs(W.h_lambda(l, t) - std::pow(t, -W.alpha)));
    }
    rep.lambdas.push_back(l);
    rep.f_dev.push_back(fd);
    rep.g_dev.push_back(gd);
    rep.h_dev.push_back(hd);
  }
  return rep;
}

HorizontalCheckReport horizontal_distribution_check(const ConeGrushinSpace& CG,
                                                     const std::vector<ConePathNode>& path,
                                                     double tol) {
  HorizontalCheckReport rep;
  for (std::size_t j = 0; j + 1 < path.size(); ++j) {
    const auto& A = path[j];
    const auto& B = path[j + 1];
    double rb = 0.5 * (A.r + B.r);
    double dr = B.r - A.r, dphi = B.phi - A.phi, dy = B.y - A.y;
    double cr = CG.c * rb;
    double seg = std::sqrt(dr * dr + cr * cr * dphi * dphi +
                           std::pow(rb, -2.0 * CG.alpha) * dy * dy);
    double violation = std::abs(dy) - std::pow(rb, CG.alpha) * seg;
    rep.max_violation = std::max(rep.max_violation, violation);
  }
  rep.pass = rep.max_violation <= tol;
  return rep;
}

}  // namespace srlab
