#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace srlab {

/// Triply-warped product data on [0,inf) x S^m x S^k x S^1 with
///   f(r) = r (1+r^2)^{-1/4},
///   g(r) = (pi/2) c r / arctan r,
///   h(r) = (1+r^2)^{-alpha/2}.
/// Derivative ratios are evaluated through cancellation-free forms (series
/// for arctan-based quantities near 0).
struct WarpingTriple {
  int m = 2;
  int k = 2;
  double alpha = 1.0;
  double c = 0.1;

  static double f(double r);
  static double fp(double r);
  static double fpp(double r);
  double g(double r) const;
  double gp(double r) const;
  double gpp(double r) const;
  double h(double r) const;
  double hp(double r) const;
  double hpp(double r) const;

  // Stable ratios used by the Ricci formulas.
  static double fp_over_f(double r);
  static double fpp_over_f(double r);
  static double one_minus_fp2_over_f2(double r);
  double gp_over_g(double r) const;
  double gpp_over_g(double r) const;
  double one_minus_gp2_over_g2(double r) const;
  double hp_over_h(double r) const;
  double hpp_over_h(double r) const;

  // Rescaled warping functions f_l, g_l, h_l of the asymptotic argument.
  double f_lambda(double lambda, double t) const;
  double g_lambda(double lambda, double t) const;
  double h_lambda(double lambda, double t) const;
};

struct RicciComponents {
  double rr = 0.0;  // Ric(d/dr, d/dr)
  double xx = 0.0;  // Ric(X,X), X unit tangent to S^m
  double yy = 0.0;  // Ric(Y,Y), Y unit tangent to S^k
  double zz = 0.0;  // Ric(Z,Z), Z unit tangent to S^1
};

/// The four closed-form Ricci components of the triply-warped metric at r>0.
RicciComponents ricci_components(const WarpingTriple& W, double r);

using MetricFunction = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// Independent curvature oracle: Christoffel symbols by central finite
/// differences of the metric, Ricci by contraction, Richardson-extrapolated.
Eigen::MatrixXd curvature_oracle(const MetricFunction& metric, const Eigen::VectorXd& p,
                                 double fd_step = 1e-4, bool richardson = true);

/// Coordinate metric of the triply-warped product (r, S^m angles, S^k angles,
/// circle angle) in hyperspherical coordinates, for oracle cross-checks.
MetricFunction warped_product_metric(const WarpingTriple& W);

/// Round unit sphere S^d metric in hyperspherical coordinates.
MetricFunction sphere_metric(int d);

struct GateCertificate {
  int m = 0;
  double c = 0.0;
  double min_rr = 0.0, min_xx = 0.0, min_yy = 0.0, min_zz = 0.0;
  std::vector<double> grid;  // the log-spaced verification radii
};

/// Smallest integer m with m > max{k+4a(a+1), k+1, 2(a+1)}, then c halved
/// downward from 0.5 until all four Ricci components are positive on the
/// verification grid with margin >= 1e-8.
GateCertificate parameter_gate(int k, double alpha);

/// Cone-Grushin space: metric completion of dr^2 + (cr)^2 ds_k^2 + r^{-2a} dy^2
/// on R^{k+2} minus the axis C = {x = 0}.
struct ConeGrushinSpace {
  int k = 2;
  double alpha = 1.0;
  double c = 0.1;
  int dim() const { return k + 2; }
};

struct ConeGrushinOptions {
  int path_segments = 96;
  std::vector<double> eps_schedule = {1e-2, 1e-3, 1e-4};
  int lbfgs_iters = 2000;
};

struct ConePathNode {
  double r = 0.0, phi = 0.0, y = 0.0;
};

struct ConeDistanceResult {
  double estimate = 0.0;         // Richardson extrapolation of the eps family
  double upper = 0.0;            // certificate length + endpoint clamp correction
  std::vector<double> eps_values;
  std::vector<double> eps_distances;
  std::vector<ConePathNode> certificate;  // path at the finest eps
  double min_r = 0.0;            // min radius along the certificate
  bool converged = true;
};

/// Distance in the rotationally reduced model (r, phi, y). phi is the angle
/// between the two x-directions on S^k (irrelevant when an endpoint sits on
/// the axis).
ConeDistanceResult cone_grushin_distance_reduced(const ConeGrushinSpace& CG, double r0, double y0,
                                                 double r1, double y1, double phi = 0.0,
                                                 const ConeGrushinOptions& opts = {});

/// Full-coordinate entry point, p,q in R^{k+2} = R^{k+1} x R.
ConeDistanceResult cone_grushin_distance(const ConeGrushinSpace& CG, const Eigen::VectorXd& p,
                                         const Eigen::VectorXd& q,
                                         const ConeGrushinOptions& opts = {});

/// Metric dilation (x,y) -> (l x, l^{1+a} y) acting on reduced coordinates.
ConePathNode cone_dilate(const ConeGrushinSpace& CG, double lambda, const ConePathNode& p);

struct DilationIsometryReport {
  double max_rel_error = 0.0;
  bool pass = false;
};

DilationIsometryReport dilation_isometry_check(
    const ConeGrushinSpace& CG, const std::vector<std::pair<ConePathNode, ConePathNode>>& pairs,
    const std::vector<double>& lambdas, double tol = 1e-2,
    const ConeGrushinOptions& opts = {});

struct HausdorffFit {
  std::vector<double> log_inv_delta;
  std::vector<double> log_count;
  double slope = 0.0;
};

/// Covering-number regression for the singular axis C with |y| <= 1, using
/// the exact scaling-law distance d((0,y),(0,y')) = c~ |y-y'|^{1/(1+a)}.
/// Expected slope is 1 + alpha.
HausdorffFit hausdorff_dimension_estimate(const ConeGrushinSpace& CG, double axis_constant,
                                          int delta_lo_pow = 3, int delta_hi_pow = 10);

struct WarpingLimitReport {
  std::vector<double> lambdas;
  std::vector<double> f_dev, g_dev, h_dev;  // sup deviations on the window
};

/// Sup-norm deviations of (f_l, g_l, h_l) from (0, ct, t^{-a}) on [a,b].
WarpingLimitReport asymptotic_warping_limit(const WarpingTriple& W,
                                            const std::vector<double>& lambdas, double a, double b,
                                            int grid = 512);

struct HorizontalCheckReport {
  double max_violation = 0.0;  // max of |dy| - r^alpha * segment_length
  bool pass = false;
};

/// Pointwise |dy/dt| <= r^alpha |gamma'|_g + tol along certificate paths
/// (metric identity |d/dy|_g = r^{-alpha}).
HorizontalCheckReport horizontal_distribution_check(const ConeGrushinSpace& CG,
                                                     const std::vector<ConePathNode>& path,
                                                     double tol = 1e-6);

}  // namespace srlab
