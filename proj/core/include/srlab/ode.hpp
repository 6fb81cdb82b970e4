#pragma once

#include <Eigen/Dense>
#include <functional>

namespace srlab {

/// Classical fixed-step RK4 flow of an autonomous field, x' = f(x).
/// t may be negative.
inline Eigen::VectorXd rk4_flow(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                Eigen::VectorXd x, double t, int steps) {
  const double h = t / steps;
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd k1(n), k2(n), k3(n), k4(n);
  for (int s = 0; s < steps; ++s) {
    k1 = f(x);
    k2 = f(x + 0.5 * h * k1);
    k3 = f(x + 0.5 * h * k2);
    k4 = f(x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

}  // namespace srlab
