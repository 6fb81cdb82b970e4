#include "srlab/carnot.hpp"

#include <algorithm>
#include <cmath>

#include "srlab/errors.hpp"
#include "srlab/library.hpp"
#include "srlab/nilpotent.hpp"

namespace srlab {

HeisenbergElement group_multiply(const HeisenbergElement& g, const HeisenbergElement& h) {
  return {g.a + h.a, g.b + h.b, g.c + h.c + 0.5 * (g.a * h.b - g.b * h.a)};
}

HeisenbergElement group_inverse(const HeisenbergElement& g) { return {-g.a, -g.b, -g.c}; }

HeisenbergElement group_dilate(double lambda, const HeisenbergElement& g) {
  if (lambda <= 0.0) throw ArgumentError("group_dilate: lambda must be positive");
  return {lambda * g.a, lambda * g.b, lambda * lambda * g.c};
}

Eigen::Vector2d project(const HeisenbergElement& g) {
  return {-g.a, 0.5 * g.a * g.b - g.c};
}

HeisenbergElement project_preimage(const Eigen::Vector2d& x) {
  return {-x[0], 0.0, -x[1]};
}

Eigen::Vector3d xi_field(int i, const HeisenbergElement& g) {
  if (i == 1) return {-1.0, 0.0, -0.5 * g.b};
  if (i == 2) return {0.0, -1.0, 0.5 * g.a};
  throw ArgumentError("xi_field: index must be 1 or 2");
}

namespace {

Eigen::Vector2d grushin_hat_field(int i, const Eigen::Vector2d& x) {
  if (i == 1) return {1.0, 0.0};
  return {0.0, x[0]};
}

}  // namespace

CheckReport pushforward_check(const std::vector<HeisenbergElement>& samples, double tol) {
  CheckReport rep;
  const double h = 1e-6;
  for (const auto& g : samples) {
    for (int i = 1; i <= 2; ++i) {
      Eigen::Vector3d v = xi_field(i, g);
      HeisenbergElement gp{g.a + h * v[0], g.b + h * v[1], g.c + h * v[2]};
      HeisenbergElement gm{g.a - h * v[0], g.b - h * v[1], g.c - h * v[2]};
      Eigen::Vector2d dpi = (project(gp) - project(gm)) / (2.0 * h);
      Eigen::Vector2d target = grushin_hat_field(i, project(g));
      rep.max_deviation = std::max(rep.max_deviation, (dpi - target).norm());
    }
  }
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

CheckReport dilation_commute_check(const std::vector<HeisenbergElement>& samples,
                                   const std::vector<double>& lambdas, double tol) {
  CheckReport rep;
  WeightVector w({1, 2});
  for (const auto& g : samples) {
    for (double l : lambdas) {
      if (l <= 0.0) throw ArgumentError("dilation_commute_check: lambda must be positive");
      Eigen::Vector2d lhs = dilate(w, l, project(g));
      Eigen::Vector2d rhs = project(group_dilate(l, g));
      rep.max_deviation = std::max(rep.max_deviation, (lhs - rhs).norm());
    }
  }
  rep.pass = rep.max_deviation <= tol;
  return rep;
}

HeisenbergElement LiftedCurve::at(double t) const {
  if (times.empty()) throw ArgumentError("empty lifted curve");
  if (t <= times.front()) return elements.front();
  if (t >= times.back()) return elements.back();
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
  double f = (t - times[k]) / (times[k + 1] - times[k]);
  const auto& A = elements[k];
  const auto& B = elements[k + 1];
  return {A.a + f * (B.a - A.a), A.b + f * (B.b - A.b), A.c + f * (B.c - A.c)};
}

LiftedCurve horizontal_lift(const ControlCurve& gamma, const HeisenbergElement& g0) {
  if (gamma.control_dim() != 2 || gamma.dim() != 2) {
    throw DimensionError("horizontal_lift: expected a curve in the Grushin nilpotent plane");
  }
  Eigen::Vector2d base0 = gamma.start();
  if ((project(g0) - base0).norm() > 1e-8) {
    throw LiftBaseError("pi(g0) does not match the base point of the curve");
  }
  LiftedCurve lift;
  const int K = gamma.nodes();
  lift.times = gamma.times;
  lift.elements.resize(K);
  lift.controls = gamma.controls;
  lift.elements[0] = g0;
  lift.length = 0.0;

  auto rhs = [](const Eigen::Vector3d& z, const Eigen::Vector2d& u) -> Eigen::Vector3d {
    HeisenbergElement g{z[0], z[1], z[2]};
    return u[0] * xi_field(1, g) + u[1] * xi_field(2, g);
  };
  Eigen::Vector3d z = g0.coords();
  for (int k = 0; k + 1 < K; ++k) {
    double h = gamma.times[k + 1] - gamma.times[k];
    Eigen::Vector2d u = gamma.controls.row(k);
    Eigen::Vector3d k1 = rhs(z, u);
    Eigen::Vector3d k2 = rhs(z + 0.5 * h * k1, u);
    Eigen::Vector3d k3 = rhs(z + 0.5 * h * k2, u);
    Eigen::Vector3d k4 = rhs(z + h * k3, u);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    lift.elements[static_cast<std::size_t>(k) + 1] = {z[0], z[1], z[2]};
    lift.length += h * u.norm();
  }
  return lift;
}

ControlCurve constant_control_descent(const LiftedCurve& lifted, double tol) {
  const std::size_t K = lifted.times.size();
  if (K < 2) throw ArgumentError("constant_control_descent: need at least two samples");
  Eigen::Vector2d u0 = lifted.controls.row(0);
  for (std::size_t k = 0; k < K; ++k) {
    if ((Eigen::Vector2d(lifted.controls.row(static_cast<int>(k))) - u0).norm() > tol) {
      throw ArgumentError("constant_control_descent: control is not constant");
    }
  }
  ControlCurve out;
  out.times = lifted.times;
  out.states.resize(static_cast<int>(K), 2);
  out.controls.resize(static_cast<int>(K), 2);
  for (std::size_t k = 0; k < K; ++k) {
    out.states.row(static_cast<int>(k)) = project(lifted.elements[k]);
    out.controls.row(static_cast<int>(k)) = u0;
  }
  out.length = u0.norm() * (lifted.times.back() - lifted.times.front());

  // Re-derive the control from the projected velocity and assert constancy.
  SubRiemannianStructure hat = nilpotent_approximation(grushin(), WeightVector({1, 2}));
  for (std::size_t k = 1; k + 1 < K; ++k) {
    double dt = lifted.times[k + 1] - lifted.times[k - 1];
    Eigen::Vector2d vel =
        (Eigen::Vector2d(out.states.row(static_cast<int>(k + 1))) -
         Eigen::Vector2d(out.states.row(static_cast<int>(k - 1)))) / dt;
    Eigen::Vector2d x = out.states.row(static_cast<int>(k));
    Eigen::MatrixXd M = hat.generator_matrix(x);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
    Eigen::VectorXd u = cod.solve(vel);
    // Finite-difference velocity: allow discretization slack well above tol.
    if ((M * u - vel).norm() > 1e-5) {
      throw Error("constant_control_descent: projected curve is not admissible");
    }
    (void)u;
  }
  return out;
}

}  // namespace srlab
