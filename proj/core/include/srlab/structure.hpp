#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "srlab/polyfield.hpp"

namespace srlab {

/// Axis-aligned coordinate box used to declare where trajectories and frame
/// certificates are valid.
struct Box {
  Eigen::VectorXd lo, hi;

  static Box centered(const Eigen::VectorXd& center, double radius);
  static Box cube(int dim, double radius);
  bool contains(const Eigen::VectorXd& p) const;
  Box shrink_toward(const Eigen::VectorXd& center, double factor) const;
};

/// A finite generating family F = {X_1..X_m} of polynomial vector fields on
/// R^n. The induced distby horizontal curve lengths is handled in
/// geodesy.hpp; this module owns the pointwise linear algebra.
struct SubRiemannianStructure {
  int dim = 0;
  std::vector<PolyVectorField> generators;
  std::string label;
  Box box;  // declared valid coordinate box

  SubRiemannianStructure() = default;
  SubRiemannianStructure(std::vector<PolyVectorField> gens, std::string lbl,
                         std::optional<Box> b = std::nullopt);

  int rank() const { return static_cast<int>(generators.size()); }
  /// n x m matrix [X_1(p) ... X_m(p)].
  Eigen::MatrixXd generator_matrix(const Eigen::VectorXd& p) const;

  std::string to_file_text() const;
  static SubRiemannianStructure from_file_text(const std::string& text, std::string label);
};

/// Growth vector (n_1..n_r), weights and step of the flag
/// D_p in D^2_p in ... in D^r_p = T_pM at a point.
struct Flag {
  std::vector<int> growth;
  WeightVector weights;
  int step = 0;
};

struct MinimalControl {
  Eigen::VectorXd u;
  double residual = 0.0;
  double norm() const { return u.norm(); }
};

struct FlagOptions {
  int max_depth = 6;
  double rank_rtol = 1e-9;  // singular values below rtol * s_max count as zero
};

/// Growth vector by evaluating all right-nested brackets of depth <= i at p
/// and taking numeric ranks. Throws HormanderUndecided if the flag does not
/// reach full dimension by max_depth (non-verification, not disproof).
Flag flag_at(const SubRiemannianStructure& S, const Eigen::VectorXd& p,
             const FlagOptions& opts = {});

/// Right-nested bracket layers B_1 = F, B_k = [F, B_{k-1}], exact, with
/// zero/duplicate pruning. Layer k is returned at index k-1.
std::vector<std::vector<PolyVectorField>> bracket_layers(const SubRiemannianStructure& S,
                                                         int max_depth);

/// Least-Euclidean-norm u with sum u_i X_i(p) = v. Throws NotHorizontal when
/// the residual of the least-squares solve exceeds tol.
MinimalControl minimal_control(const SubRiemannianStructure& S, const Eigen::VectorXd& p,
                               const Eigen::VectorXd& v, double tol = 1e-8);

/// Pointwise sub-Riemannian norm |v|_p (norm of the minimal control).
double horizontal_norm(const SubRiemannianStructure& S, const Eigen::VectorXd& p,
                       const Eigen::VectorXd& v, double tol = 1e-8);

struct CurveSample {
  double t;
  Eigen::VectorXd point;
  Eigen::VectorXd velocity;
};

/// L(curve) = integral of |velocity|_point dt by composite trapezoid over the
/// samples. NotHorizontal errors propagate with their time stamp.
double curve_length(const SubRiemannianStructure& S, const std::vector<CurveSample>& samples,
                    double tol = 1e-8);

/// Riemannian extension frame: the generating family plus
/// adjoined constant coordinate fields (greedy, largest residual first),
/// valid on a certified sub-box where the family stays nondegenerate.
/// The extension is Riemannian, its frame distance bounds d_F from below on
/// the box, and its metric restricted to D_p at p is the sub-Riemannian
/// scalar product.
struct RiemannianExtension {
  SubRiemannianStructure frame;      // generators followed by adjoined coordinate fields
  std::vector<int> adjoined_axes;    // 0-based coordinate indices, in adjoin order
  Box certified_box;
  double min_gram_det = 0.0;         // min det(MM^T) observed on the certification grid

  /// Metric tensor g(x) = (M(x) M(x)^T)^{-1}, where M is the frame matrix.
  Eigen::MatrixXd metric_at(const Eigen::VectorXd& x) const;
};

RiemannianExtension riemannian_lower_bound_metric(const SubRiemannianStructure& S,
                                                  const Eigen::VectorXd& p,
                                                  double det_threshold = 1e-6);

}  // namespace srlab
