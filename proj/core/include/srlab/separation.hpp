#pragma once

#include <vector>

#include "srlab/geodesy.hpp"

namespace srlab {

struct SeparationRow {
  double t = 0.0;
  double ratio = 0.0;  // d_F(alpha(t), beta(t)) / t
};

struct SeparationReport {
  std::vector<SeparationRow> rows;
  double target = 0.0;  // |alpha'(0) - beta'(0)|_p
  bool pass = false;
};

/// First-order separation of two admissible curves through the same base
/// point: tabulates d_F(alpha(t), beta(t))/t on a shrinking t-grid against
/// |alpha'(0)-beta'(0)|_p. Passes when the tail ratios stay above the target
/// minus the tolerance.
SeparationReport first_order_separation_check(const SubRiemannianStructure& S,
                                              const Eigen::VectorXd& p, const ControlCurve& alpha,
                                              const ControlCurve& beta,
                                              const std::vector<double>& t_grid,
                                              double tolerance = 2e-2,
                                              const DistanceOptions& opts = {});

}  // namespace srlab
