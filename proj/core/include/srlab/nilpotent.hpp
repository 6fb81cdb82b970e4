#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "srlab/geodesy.hpp"
#include "srlab/polyfield.hpp"
#include "srlab/structure.hpp"

namespace srlab {

/// Anisotropic dilation d_l(x) = (l^{w_1} x_1, ..., l^{w_n} x_n).
Eigen::VectorXd dilate(const WeightVector& w, double lambda, const Eigen::VectorXd& x);

/// Pseudo-norm |x_1|^{1/w_1} + ... + |x_n|^{1/w_n}.
double pseudo_norm(const WeightVector& w, const Eigen::VectorXd& x);

/// Degree -1 homogeneous truncation {X^_i} of the generators; the input must
/// be presented in privileged coordinates centered at 0 with weights w.
/// Validates: every split succeeds, each remainder vanishes at 0, and the
/// truncated family still bracket-generates at 0 with the expected step.
SubRiemannianStructure nilpotent_approximation(const SubRiemannianStructure& S,
                                               const WeightVector& w);

/// lambda * d_F(d_{1/lambda} x, d_{1/lambda} y); converges to the nilpotent
/// distance as lambda grows.
double rescaled_distance(const SubRiemannianStructure& S, const WeightVector& w, double lambda,
                         const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                         const DistanceOptions& opts = {});

/// The blow-up line t -> e^{t v^}(0) of a normal geodesic with initial
/// horizontal velocity v: integrates the autonomous field
/// v^ = sum_i v*_i X^_i on [-T, T].
ControlCurve blow_up_normal(const SubRiemannianStructure& S, const WeightVector& w,
                            const Eigen::VectorXd& v, double T = 1.0, int steps = 2000);

struct BlowUpReport {
  std::vector<double> lambdas;
  std::vector<double> sup_deviation;  // pseudo-norm sup over the window
  bool converged = false;
  double tolerance = 1e-3;
};

/// Measures sup_{[0,T]} ||gamma_lambda(t) - ref(t)|| (pseudo-norm) of the
/// rescaled curves gamma_lambda(t) = d_lambda(gamma(t/lambda)) against the
/// candidate limit, or Cauchy deviations between successive rescalings when
/// no candidate is supplied. gamma(0) must be 0.
BlowUpReport blow_up_convergence(const SubRiemannianStructure& S, const WeightVector& w,
                                 const ControlCurve& gamma, const std::vector<double>& lambdas,
                                 double T, const ControlCurve* candidate = nullptr,
                                 double tolerance = 1e-3, int grid = 256);

/// Checks e^{t v^}(0) = d_t(e^{v^}(0)) at t in {1/4, 1/2, 1, 2, 4} via two
/// independently integrated flows; returns the max deviation.
double dilation_line_identity_check(const SubRiemannianStructure& S_hat, const WeightVector& w,
                                    const Eigen::VectorXd& v, double tol = 1e-8,
                                    bool* pass = nullptr);

}  // namespace srlab
