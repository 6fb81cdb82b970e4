#include "srlab/separation.hpp"

#include <algorithm>

#include "srlab/errors.hpp"

namespace srlab {

SeparationReport first_order_separation_check(const SubRiemannianStructure& S,
                                              const Eigen::VectorXd& p, const ControlCurve& alpha,
                                              const ControlCurve& beta,
                                              const std::vector<double>& t_grid, double tolerance,
                                              const DistanceOptions& opts) {
  if ((alpha.at(0.0) - p).norm() > 1e-9 || (beta.at(0.0) - p).norm() > 1e-9) {
    throw ArgumentError("separation check: both curves must start at p");
  }
  SeparationReport rep;
  Eigen::MatrixXd M = S.generator_matrix(p);
  Eigen::VectorXd va = M * alpha.control_at(0.0);
  Eigen::VectorXd vb = M * beta.control_at(0.0);
  rep.target = horizontal_norm(S, p, va - vb);

  for (double t : t_grid) {
    SeparationRow row;
    row.t = t;
    Eigen::VectorXd at = alpha.at(t), bt = beta.at(t);
    double d = (at - bt).norm() == 0.0 ? 0.0 : cc_distance(S, at, bt, opts).upper;
    row.ratio = d / t;
    rep.rows.push_back(row);
  }
  // liminf proxy: the smallest ratio among the two finest scales
  double tail = rep.rows.back().ratio;
  if (rep.rows.size() >= 2) tail = std::min(tail, rep.rows[rep.rows.size() - 2].ratio);
  rep.pass = tail >= rep.target - tolerance;
  return rep;
}

}  // namespace srlab
