#include "srlab/nilpotent.hpp"

#include <cmath>

#include "srlab/errors.hpp"
#include "srlab/ode.hpp"

namespace srlab {

Eigen::VectorXd dilate(const WeightVector& w, double lambda, const Eigen::VectorXd& x) {
  if (lambda <= 0.0) throw ArgumentError("dilate: lambda must be positive");
  if (x.size() != w.dim()) throw DimensionError("dilate: dimension mismatch");
  Eigen::VectorXd y(x.size());
  for (int j = 0; j < x.size(); ++j) y[j] = std::pow(lambda, w[j]) * x[j];
  return y;
}

double pseudo_norm(const WeightVector& w, const Eigen::VectorXd& x) {
  if (x.size() != w.dim()) throw DimensionError("pseudo_norm: dimension mismatch");
  double acc = 0.0;
  for (int j = 0; j < x.size(); ++j) acc += std::pow(std::abs(x[j]), 1.0 / w[j]);
  return acc;
}

SubRiemannianStructure nilpotent_approximation(const SubRiemannianStructure& S,
                                               const WeightVector& w) {
  if (w.dim() != S.dim) throw DimensionError("nilpotent_approximation: weight dimension");
  std::vector<PolyVectorField> hats;
  hats.reserve(S.generators.size());
  Eigen::VectorXd origin = Eigen::VectorXd::Zero(S.dim);
  for (const auto& X : S.generators) {
    auto [hat, rem] = weighted_split(X, w);
    if (rem.evaluate(origin).norm() != 0.0) {
      throw BadCenteringError("remainder does not vanish at 0; coordinates not centered");
    }
    hats.push_back(std::move(hat));
  }
  SubRiemannianStructure out(std::move(hats), S.label + "_hat", S.box);

  // Exact homogeneity of every truncation (the defining property).
  for (const auto& H : out.generators) {
    PolyVectorField pulled = dilation_pullback(H, w, Rational(2));
    if (!(pulled == H * Rational(1, 2))) {
      throw Error("internal: truncation is not homogeneous of degree -1");
    }
  }
  // The truncated family must still bracket-generate at 0 with step <= max w.
  Flag f = flag_at(out, origin, FlagOptions{w.max_weight(), 1e-9});
  if (f.step > w.max_weight()) {
    throw Error("internal: nilpotent approximation has inconsistent step");
  }
  return out;
}

double rescaled_distance(const SubRiemannianStructure& S, const WeightVector& w, double lambda,
                         const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                         const DistanceOptions& opts) {
  if (lambda <= 0.0) throw ArgumentError("rescaled_distance: lambda must be positive");
  Eigen::VectorXd xs = dilate(w, 1.0 / lambda, x);
  Eigen::VectorXd ys = dilate(w, 1.0 / lambda, y);
  if (!S.box.contains(xs) || !S.box.contains(ys)) {
    throw DomainEscape("rescaled_distance: dilated points leave the declared box");
  }
  return lambda * cc_distance(S, xs, ys, opts).upper;
}

ControlCurve blow_up_normal(const SubRiemannianStructure& S, const WeightVector& w,
                            const Eigen::VectorXd& v, double T, int steps) {
  SubRiemannianStructure hat = nilpotent_approximation(S, w);
  Eigen::VectorXd origin = Eigen::VectorXd::Zero(S.dim);
  MinimalControl mc = minimal_control(hat, origin, v);  // NotHorizontal if v not in D_0

  const int m = hat.rank();
  // Integrate the autonomous field v^ over [-T, T] as two constant-control arcs.
  Eigen::MatrixXd seg(1, m);
  seg.row(0) = mc.u;
  ControlCurve fwd = integrate_control(hat, origin, seg, T, steps);
  seg.row(0) = -mc.u;
  ControlCurve bwd = integrate_control(hat, origin, seg, T, steps);

  const int K = fwd.nodes();
  ControlCurve line;
  line.times.resize(2 * K - 1);
  line.states.resize(2 * K - 1, S.dim);
  line.controls.resize(2 * K - 1, m);
  for (int k = 0; k < K; ++k) {
    line.times[K - 1 - k] = -bwd.times[k];
    line.states.row(K - 1 - k) = bwd.states.row(k);
    line.controls.row(K - 1 - k) = mc.u;
    line.times[K - 1 + k] = fwd.times[k];
    line.states.row(K - 1 + k) = fwd.states.row(k);
    line.controls.row(K - 1 + k) = mc.u;
  }
  line.length = fwd.length + bwd.length;
  return line;
}

BlowUpReport blow_up_convergence(const SubRiemannianStructure& S, const WeightVector& w,
                                 const ControlCurve& gamma, const std::vector<double>& lambdas,
                                 double T, const ControlCurve* candidate, double tolerance,
                                 int grid) {
  (void)S;
  if (gamma.t0() > 1e-12 || gamma.at(0.0).norm() > 1e-10) {
    throw ArgumentError("blow_up_convergence: curve must start at 0 at t=0");
  }
  for (std::size_t i = 0; i + 1 < lambdas.size(); ++i) {
    if (!(lambdas[i + 1] > lambdas[i])) {
      throw ArgumentError("blow_up_convergence: lambda schedule must be strictly increasing");
    }
  }
  BlowUpReport rep;
  rep.tolerance = tolerance;
  auto rescaled_at = [&](double lambda, double t) {
    double s = t / lambda;
    if (s < gamma.t0() - 1e-12 || s > gamma.t1() + 1e-12) {
      throw WindowError("blow_up_convergence: window exceeds the rescaled curve's domain");
    }
    return dilate(w, lambda, gamma.at(s));
  };
  std::vector<Eigen::VectorXd> prev;
  for (double lambda : lambdas) {
    double sup = 0.0;
    std::vector<Eigen::VectorXd> cur(grid + 1);
    for (int k = 0; k <= grid; ++k) {
      double t = T * k / grid;
      cur[k] = rescaled_at(lambda, t);
      if (candidate) {
        sup = std::max(sup, pseudo_norm(w, cur[k] - candidate->at(t)));
      } else if (!prev.empty()) {
        sup = std::max(sup, pseudo_norm(w, cur[k] - prev[k]));
      }
    }
    if (candidate || !prev.empty()) {
      rep.lambdas.push_back(lambda);
      rep.sup_deviation.push_back(sup);
    }
    prev = std::move(cur);
  }
  rep.converged = !rep.sup_deviation.empty() && rep.sup_deviation.back() <= tolerance;
  return rep;
}

double dilation_line_identity_check(const SubRiemannianStructure& S_hat, const WeightVector& w,
                                    const Eigen::VectorXd& v, double tol, bool* pass) {
  Eigen::VectorXd origin = Eigen::VectorXd::Zero(S_hat.dim);
  MinimalControl mc = minimal_control(S_hat, origin, v);
  auto field = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return S_hat.generator_matrix(x) * mc.u;
  };
  Eigen::VectorXd e1 = rk4_flow(field, origin, 1.0, 4000);
  double worst = 0.0;
  for (double t : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    Eigen::VectorXd lhs = rk4_flow(field, origin, t, 4000);
    Eigen::VectorXd rhs = dilate(w, t, e1);
    worst = std::max(worst, (lhs - rhs).norm());
  }
  if (pass) *pass = worst <= tol;
  return worst;
}

}  // namespace srlab
