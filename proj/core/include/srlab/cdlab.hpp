#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "srlab/geodesy.hpp"
#include "srlab/structure.hpp"
#include "srlab/warped.hpp"

namespace srlab {

/// s_kappa(theta): sin(sqrt(k) th)/sqrt(k), th, sinh(sqrt(-k) th)/sqrt(-k).
double s_kappa(double kappa, double theta);

/// Three-case distortion coefficient sigma_{K,N}^{(t)}(theta); +infinity
/// sentinel when K theta^2 >= N pi^2.
double distortion_sigma(double K, double N, double t, double theta);

/// tau_{K,N}^{(t)}(theta) = t^{1/N} sigma_{K,N-1}^{(t)}(theta)^{1-1/N}, N > 1.
double distortion_tau(double K, double N, double t, double theta);

/// Finitely supported probability measure with declared density values
/// against a reference measure m (itself given by a Lebesgue density).
struct DiscreteMeasure {
  Eigen::MatrixXd points;   // n_pts x dim
  Eigen::VectorXd weights;  // nonnegative, sums to 1
  Eigen::VectorXd rho;      // density d mu / d m at the support points

  int size() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  void validate() const;
};

struct PlanEntry {
  int i = 0, j = 0;
  double mass = 0.0;
};

struct TransportPlan {
  std::vector<PlanEntry> entries;
  double cost = 0.0;  // sum mass * c_ij for the cost used in the solve
};

/// Exact optimal transport between the weight vectors a, b for the given
/// cost matrix (successive-shortest-path min-cost flow; exact optimum for
/// the transportation problem at these sizes, deterministic pivoting).
TransportPlan solve_transport(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                              const Eigen::MatrixXd& cost);

/// Distance provider for the CD machinery: distances plus constant-speed
/// geodesic evaluation maps e_t.
class DistanceBackend {
 public:
  virtual ~DistanceBackend() = default;
  virtual double distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) = 0;
  /// Point at arc fraction t along a (fixed, deterministic) minimizing
  /// geodesic from p to q.
  virtual Eigen::VectorXd interpolate(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                                      double t) = 0;
  virtual std::string name() const = 0;
};

std::unique_ptr<DistanceBackend> euclidean_backend();
/// cc_distance/geodesic_between backend with per-pair certificate caching.
std::unique_ptr<DistanceBackend> subriemannian_backend(const SubRiemannianStructure& S,
                                                       const DistanceOptions& opts);
/// Rotationally reduced cone-Grushin backend in coordinates (r, phi, y).
std::unique_ptr<DistanceBackend> cone_grushin_backend(const ConeGrushinSpace& CG,
                                                      const ConeGrushinOptions& opts);

/// Renyi entropy S_N(mu|m) = -sum_i w_i rho_i^{-1/N}.
double renyi_entropy(const DiscreteMeasure& mu, double N);

struct W2Options {
  double bandwidth_factor = 1.06;  // Silverman rule factor
  int threads = 0;
};

struct W2Result {
  TransportPlan plan;                        // squared-distance cost
  std::vector<DiscreteMeasure> interpolants; // one per requested t
  Eigen::MatrixXd distance_matrix;
};

/// Discrete Wasserstein geodesic: exact OT plan on the squared-distance
/// cost, interpolants supported on e_t of the per-pair geodesics, densities
/// re-estimated by Gaussian KDE against the reference density.
W2Result w2_geodesic(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                     DistanceBackend& backend, const std::vector<double>& ts,
                     const std::function<double(const Eigen::VectorXd&)>& reference_density,
                     const W2Options& opts = {});

struct CdRow {
  double t = 0.0;
  double entropy = 0.0;  // S_N(mu_t | m)
  double rhs = 0.0;
  double margin = 0.0;   // rhs - entropy; negative beyond tolerance = violation
};

struct CdReport {
  std::vector<CdRow> rows;
  std::string verdict;  // "consistent" or "violated" (evidence, not proof)
  double violation_tol = 1e-2;
  double w2_cost = 0.0;
};

struct CdOptions {
  double violation_tol = 1e-2;  // 5e-3 solver budget + 5e-3 estimator budget
  W2Options w2;
};

/// Entropy-inequality check along the discrete Wasserstein geodesic:
/// margin(t) = RHS(t) - S_N(mu_t|m) with the distortion-weighted RHS.
CdReport cd_inequality_check(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, double K,
                             double N, const std::vector<double>& ts, DistanceBackend& backend,
                             const std::function<double(const Eigen::VectorXd&)>& reference_density,
                             const CdOptions& opts = {});

}  // namespace srlab
