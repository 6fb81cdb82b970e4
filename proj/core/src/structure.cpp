#include "srlab/structure.hpp"

#include <algorithm>
#include <sstream>

#include "srlab/errors.hpp"

namespace srlab {

Box Box::centered(const Eigen::VectorXd& center, double radius) {
  Box b;
  b.lo = center.array() - radius;
  b.hi = center.array() + radius;
  return b;
}

Box Box::cube(int dim, double radius) {
  return centered(Eigen::VectorXd::Zero(dim), radius);
}

bool Box::contains(const Eigen::VectorXd& p) const {
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] < lo[i] || p[i] > hi[i]) return false;
  }
  return true;
}

Box Box::shrink_toward(const Eigen::VectorXd& center, double factor) const {
  Box b;
  b.lo = center + factor * (lo - center);
  b.hi = center + factor * (hi - center);
  return b;
}

SubRiemannianStructure::SubRiemannianStructure(std::vector<PolyVectorField> gens,
                                               std::string lbl, std::optional<Box> b)
    : generators(std::move(gens)), label(std::move(lbl)) {
  if (generators.empty()) throw ArgumentError("structure needs at least one generator");
  dim = generators.front().dim();
  for (const auto& g : generators) {
    if (g.dim() != dim) throw DimensionError("generators have mismatched dimensions");
  }
  box = b.value_or(Box::cube(dim, 10.0));
}

Eigen::MatrixXd SubRiemannianStructure::generator_matrix(const Eigen::VectorXd& p) const {
  Eigen::MatrixXd M(dim, rank());
  for (int i = 0; i < rank(); ++i) M.col(i) = generators[i].evaluate(p);
  return M;
}

std::string SubRiemannianStructure::to_file_text() const {
  std::ostringstream os;
  os << "dim " << dim << "\n";
  os << "generators " << rank() << "\n";
  for (const auto& g : generators) os << g.to_string() << "\n";
  return os.str();
}

SubRiemannianStructure SubRiemannianStructure::from_file_text(const std::string& text,
                                                              std::string label) {
  std::istringstream is(text);
  std::string key;
  int n = 0, m = 0;
  if (!(is >> key >> n) || key != "dim") throw ArgumentError("structure file: expected 'dim n'");
  if (!(is >> key >> m) || key != "generators") {
    throw ArgumentError("structure file: expected 'generators m'");
  }
  std::string line;
  std::getline(is, line);  // consume end of header line
  std::vector<PolyVectorField> gens;
  for (int i = 0; i < m; ++i) {
    std::vector<Polynomial> comps;
    for (int j = 0; j < n; ++j) {
      if (!std::getline(is, line)) throw ArgumentError("structure file: truncated field");
      comps.push_back(Polynomial::parse(line, n));
    }
    gens.emplace_back(std::move(comps));
  }
  return SubRiemannianStructure(std::move(gens), std::move(label));
}

std::vector<std::vector<PolyVectorField>> bracket_layers(const SubRiemannianStructure& S,
                                                         int max_depth) {
  std::vector<std::vector<PolyVectorField>> layers;
  layers.push_back(S.generators);
  for (int depth = 2; depth <= max_depth; ++depth) {
    std::vector<PolyVectorField> next;
    for (const auto& X : S.generators) {
      for (const auto& Y : layers.back()) {
        PolyVectorField B = lie_bracket(X, Y);
        if (B.is_zero()) continue;
        bool dup = false;
        PolyVectorField negB = B * Rational(-1);
        for (const auto& Z : next) {
          if (Z == B || Z == negB) {
            dup = true;
            break;
          }
        }
        if (!dup) next.push_back(std::move(B));
      }
    }
    layers.push_back(std::move(next));
    if (layers.back().empty()) break;  // nilpotent: all deeper layers vanish too
  }
  return layers;
}

namespace {

int numeric_rank(const Eigen::MatrixXd& M, double rtol) {
  if (M.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i) {
    if (s[i] > rtol * s[0]) ++r;
  }
  return r;
}

}  // namespace

Flag flag_at(const SubRiemannianStructure& S, const Eigen::VectorXd& p, const FlagOptions& opts) {
  if (opts.max_depth < 1) throw ArgumentError("flag_at: max_depth must be >= 1");
  if (p.size() != S.dim) throw DimensionError("flag_at: point dimension mismatch");
  auto layers = bracket_layers(S, opts.max_depth);
  const int n = S.dim;

  std::vector<Eigen::VectorXd> cols;
  Flag flag;
  int prev = -1;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    for (const auto& X : layers[i]) cols.push_back(X.evaluate(p));
    Eigen::MatrixXd M(n, static_cast<int>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) M.col(static_cast<int>(c)) = cols[c];
    int r = numeric_rank(M, opts.rank_rtol);
    flag.growth.push_back(r);
    if (r == n) {
      flag.step = static_cast<int>(i) + 1;
      break;
    }
    if (r == prev && i + 1 == layers.size()) break;
    prev = r;
  }
  if (flag.step == 0) throw HormanderUndecided(opts.max_depth);

  std::vector<int> w(n, 0);
  for (int j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < flag.growth.size(); ++i) {
      if (j + 1 <= flag.growth[i]) {
        w[j] = static_cast<int>(i) + 1;
        break;
      }
    }
  }
  flag.weights = WeightVector(w);
  return flag;
}

MinimalControl minimal_control(const SubRiemannianStructure& S, const Eigen::VectorXd& p,
                               const Eigen::VectorXd& v, double tol) {
  if (p.size() != S.dim || v.size() != S.dim) {
    throw DimensionError("minimal_control: dimension mismatch");
  }
  Eigen::MatrixXd M = S.generator_matrix(p);
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
  cod.setThreshold(1e-12);
  MinimalControl mc;
  mc.u = cod.solve(v);  // minimum-norm least-squares solution
  mc.residual = (M * mc.u - v).norm();
  double scale = std::max(1.0, v.norm());
  if (mc.residual > tol * scale) {
    std::ostringstream os;
    os << "vector is not horizontal at the given point (residual " << mc.residual << ")";
    throw NotHorizontal(os.str());
  }
  return mc;
}

double horizontal_norm(const SubRiemannianStructure& S, const Eigen::VectorXd& p,
                       const Eigen::VectorXd& v, double tol) {
  return minimal_control(S, p, v, tol).norm();
}

double curve_length(const SubRiemannianStructure& S, const std::vector<CurveSample>& samples,
                    double tol) {
  if (samples.size() < 2) return 0.0;
  std::vector<double> speed(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i > 0 && samples[i].t <= samples[i - 1].t) {
      throw ArgumentError("curve_length: times must be strictly increasing");
    }
    try {
      speed[i] = horizontal_norm(S, samples[i].point, samples[i].velocity, tol);
    } catch (const NotHorizontal& e) {
      std::ostringstream os;
      os << e.what() << " at t=" << samples[i].t;
      throw NotHorizontal(os.str());
    }
  }
  double L = 0.0;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    L += 0.5 * (speed[i] + speed[i + 1]) * (samples[i + 1].t - samples[i].t);
  }
  return L;
}

Eigen::MatrixXd RiemannianExtension::metric_at(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd M = frame.generator_matrix(x);
  Eigen::MatrixXd gram = M * M.transpose();
  return gram.inverse();
}

RiemannianExtension riemannian_lower_bound_metric(const SubRiemannianStructure& S,
                                                  const Eigen::VectorXd& p,
                                                  double det_threshold) {
  const int n = S.dim;
  flag_at(S, p);  // precondition: the flag computation must succeed at p

  Eigen::MatrixXd M = S.generator_matrix(p);
  RiemannianExtension ext;
  std::vector<PolyVectorField> frame_fields = S.generators;

  // Greedy coordinate-field extension: adjoin the axis with the largest
  // residual to the current span until the frame spans R^n at p.
  Eigen::MatrixXd cur = M;
  while (true) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(cur, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    int r = 0;
    double smax = s.size() > 0 ? s[0] : 0.0;
    for (int i = 0; i < s.size(); ++i) {
      if (s[i] > 1e-9 * std::max(smax, 1.0)) ++r;
    }
    if (r == n) break;
    Eigen::MatrixXd U = svd.matrixU().leftCols(r);
    int best_axis = -1;
    double best_res = -1.0;
    for (int j = 0; j < n; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Unit(n, j);
      double res = (e - U * (U.transpose() * e)).norm();
      if (res > best_res + 1e-15) {
        best_res = res;
        best_axis = j;
      }
    }
    if (best_axis < 0 || best_res < 1e-12) {
      throw FrameExtensionFailed("could not extend the frame to a basis at the base point");
    }
    ext.adjoined_axes.push_back(best_axis);
    frame_fields.push_back(PolyVectorField::coordinate(n, best_axis));
    Eigen::MatrixXd grown(n, cur.cols() + 1);
    grown << cur, Eigen::VectorXd::Unit(n, best_axis);
    cur = grown;
  }

  ext.frame = SubRiemannianStructure(frame_fields, S.label + "_riem", S.box);

  // Certify a box around p on which the frame Gram determinant stays above
  // the threshold (sampled grid; halve toward p on failure).
  Box candidate = Box::centered(p, 1.0);
  for (int attempt = 0; attempt < 40; ++attempt) {
    double min_det = std::numeric_limits<double>::infinity();
    const int grid = 5;
    std::vector<int> idx(n, 0);
    bool done = false;
    while (!done) {
      Eigen::VectorXd x(n);
      for (int d = 0; d < n; ++d) {
        double f = grid == 1 ? 0.5 : static_cast<double>(idx[d]) / (grid - 1);
        x[d] = candidate.lo[d] + f * (candidate.hi[d] - candidate.lo[d]);
      }
      Eigen::MatrixXd F = ext.frame.generator_matrix(x);
      min_det = std::min(min_det, (F * F.transpose()).determinant());
      int d = 0;
      for (; d < n; ++d) {
        if (++idx[d] < grid) break;
        idx[d] = 0;
      }
      done = (d == n);
      if (n > 6) break;  // grid explodes; certify on the axes box only
    }
    if (min_det >= det_threshold) {
      ext.certified_box = candidate;
      ext.min_gram_det = min_det;
      return ext;
    }
    candidate = candidate.shrink_toward(p, 0.5);
  }
  throw FrameExtensionFailed("frame degenerate on every candidate box");
}

}  // namespace srlab
