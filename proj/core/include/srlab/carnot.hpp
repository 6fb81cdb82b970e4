#pragma once

#include <Eigen/Dense>
#include <vector>

#include "srlab/geodesy.hpp"

namespace srlab {

/// Element of the Heisenberg group lifting the Grushin nilpotentization, in
/// exponential coordinates (a,b,c) for exp(a X^1 + b X^2 + c Y), where
/// X^1 = d/dx, X^2 = x d/dy and Y = [X^1, X^2] = d/dy act on R^2.
///
/// Conventions fixed here (and verified by the check operations below):
///  * group law is the step-2 BCH formula
///      exp(U) exp(V) = exp(U + V + [U,V]/2),
///  * pi(g) = g^{-1}(0), which in coordinates is (-a, ab/2 - c),
///  * the frame xi_i is realized through left translation,
///      xi_i(g) = d/dt|_{t=0} exp(-t X^i) . g,
///    which is the composition g o exp(-t X^i) of the underlying
///    diffeomorphisms of R^2 and makes pi_* xi_i = X^i hold.
struct HeisenbergElement {
  double a = 0.0, b = 0.0, c = 0.0;

  static HeisenbergElement identity() { return {}; }
  Eigen::Vector3d coords() const { return {a, b, c}; }
};

HeisenbergElement group_multiply(const HeisenbergElement& g, const HeisenbergElement& h);
HeisenbergElement group_inverse(const HeisenbergElement& g);

/// Group dilation arising from the stratification: (a,b,c) -> (la, lb, l^2 c).
HeisenbergElement group_dilate(double lambda, const HeisenbergElement& g);

/// pi(g) = g^{-1}(0) in R^2.
Eigen::Vector2d project(const HeisenbergElement& g);

/// Preimage of x under pi with the gauge b = 0.
HeisenbergElement project_preimage(const Eigen::Vector2d& x);

/// xi_i(g) in exponential coordinates (i = 1 or 2).
Eigen::Vector3d xi_field(int i, const HeisenbergElement& g);

struct CheckReport {
  double max_deviation = 0.0;
  bool pass = false;
};

/// Finite-difference differential of pi applied to xi_i(g), compared
/// with X^_i(pi(g)), over the samples and both fields.
CheckReport pushforward_check(const std::vector<HeisenbergElement>& samples, double tol = 1e-6);

/// Commutation check d_l(pi(g)) = pi(d^_l(g)) over samples and factors.
CheckReport dilation_commute_check(const std::vector<HeisenbergElement>& samples,
                                   const std::vector<double>& lambdas, double tol = 1e-10);

/// Horizontal lift of a curve in the Grushin nilpotent structure.
struct LiftedCurve {
  std::vector<double> times;
  std::vector<HeisenbergElement> elements;
  Eigen::MatrixXd controls;  // same sampling convention as ControlCurve
  double length = 0.0;

  HeisenbergElement at(double t) const;
};

/// Integrates g' = sum_i u_i(t) xi_i(g) with the base curve's control from
/// g0; requires pi(g0) = gamma(0) within 1e-8.
LiftedCurve horizontal_lift(const ControlCurve& gamma, const HeisenbergElement& g0);

/// Projects a constant-control lift back down, re-derives the control from
/// the projected velocity, and asserts constancy; returns the projection.
ControlCurve constant_control_descent(const LiftedCurve& lifted, double tol = 1e-10);

}  // namespace srlab
