#include "srlab/cdlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include "srlab/errors.hpp"
#include "srlab/parallel.hpp"

namespace srlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double s_kappa(double kappa, double theta) {
  if (kappa > 0.0) {
    double s = std::sqrt(kappa);
    return std::sin(s * theta) / s;
  }
  if (kappa < 0.0) {
    double s = std::sqrt(-kappa);
    return std::sinh(s * theta) / s;
  }
  return theta;
}

double distortion_sigma(double K, double N, double t, double theta) {
  if (N <= 0.0) throw ArgumentError("distortion_sigma: N must be positive");
  if (t < 0.0 || t > 1.0) throw ArgumentError("distortion_sigma: t must be in [0,1]");
  if (theta < 0.0) throw ArgumentError("distortion_sigma: theta must be nonnegative");
  double Kth2 = K * theta * theta;
  if (Kth2 >= N * kPi * kPi) return kInf;
  if (Kth2 == 0.0) return t;
  double kappa = K / N;
  return s_kappa(kappa, t * theta) / s_kappa(kappa, theta);
}

double distortion_tau(double K, double N, double t, double theta) {
  if (N <= 1.0) throw ArgumentError("distortion_tau: N must be > 1");
  double sig = distortion_sigma(K, N - 1.0, t, theta);
  if (std::isinf(sig)) return kInf;
  return std::pow(t, 1.0 / N) * std::pow(sig, 1.0 - 1.0 / N);
}

void DiscreteMeasure::validate() const {
  if (points.rows() != weights.size() || points.rows() != rho.size()) {
    throw DimensionError("discrete measure: inconsistent sizes");
  }
  double total = weights.sum();
  if (std::abs(total - 1.0) > 1e-12) {
    throw PlanError("discrete measure: weights must sum to 1 (got " + std::to_string(total) + ")");
  }
  for (int i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) throw PlanError("discrete measure: negative weight");
    if (rho[i] <= 0.0) throw DensityError("discrete measure: nonpositive density on support");
  }
}

// ---------------------------------------------------------------------------
// Exact discrete optimal transport (successive shortest paths)
// ---------------------------------------------------------------------------

TransportPlan solve_transport(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                              const Eigen::MatrixXd& cost) {
  const int n0 = static_cast<int>(a.size());
  const int n1 = static_cast<int>(b.size());
  if (cost.rows() != n0 || cost.cols() != n1) throw DimensionError("solve_transport: cost shape");
  if (std::abs(a.sum() - b.sum()) > 1e-10) {
    throw PlanError("solve_transport: supply and demand totals differ");
  }

  Eigen::VectorXd supply = a, demand = b;
  Eigen::MatrixXd flow = Eigen::MatrixXd::Zero(n0, n1);
  std::vector<double> phi_s(n0, 0.0), phi_t(n1, 0.0);  // node potentials

  const double eps_mass = 1e-15;
  for (int round = 0; round < 8 * (n0 + n1) + 16; ++round) {
    double remaining = supply.sum();
    if (remaining <= eps_mass) break;

    // Multi-source Dijkstra over the residual graph with reduced costs.
    std::vector<double> ds(n0, kInf), dt(n1, kInf);
    std::vector<int> par_t(n1, -1);   // source feeding sink j on the path
    std::vector<int> par_s(n0, -1);   // sink feeding source i via a backward edge
    std::vector<bool> done_s(n0, false), done_t(n1, false);
    for (int i = 0; i < n0; ++i) {
      if (supply[i] > eps_mass) ds[i] = 0.0;
    }
    while (true) {
      // pick the unfinished node with the smallest tentative distance
      double best = kInf;
      int bi = -1;
      bool is_source = true;
      for (int i = 0; i < n0; ++i) {
        if (!done_s[i] && ds[i] < best) {
          best = ds[i];
          bi = i;
          is_source = true;
        }
      }
      for (int j = 0; j < n1; ++j) {
        if (!done_t[j] && dt[j] < best) {
          best = dt[j];
          bi = j;
          is_source = false;
        }
      }
      if (bi < 0) break;
      if (is_source) {
        done_s[bi] = true;
        for (int j = 0; j < n1; ++j) {
          if (done_t[j]) continue;  // never re-relax finalized nodes
          double rc = cost(bi, j) + phi_s[bi] - phi_t[j];
          if (rc < 0.0) rc = 0.0;  // tiny negatives from float drift
          if (ds[bi] + rc < dt[j]) {
            dt[j] = ds[bi] + rc;
            par_t[j] = bi;
          }
        }
      } else {
        done_t[bi] = true;
        for (int i = 0; i < n0; ++i) {
          if (done_s[i]) continue;
          if (flow(i, bi) > eps_mass) {
            double rc = -cost(i, bi) + phi_t[bi] - phi_s[i];
            if (rc < 0.0) rc = 0.0;
            if (dt[bi] + rc < ds[i]) {
              ds[i] = dt[bi] + rc;
              par_s[i] = bi;
            }
          }
        }
      }
    }

    // cheapest reachable sink with remaining demand
    int tgt = -1;
    double bestd = kInf;
    for (int j = 0; j < n1; ++j) {
      if (demand[j] > eps_mass && dt[j] < bestd) {
        bestd = dt[j];
        tgt = j;
      }
    }
    if (tgt < 0) throw PlanError("solve_transport: no augmenting path (mass mismatch)");

    // reconstruct path and its bottleneck (walk length is bounded by the
    // node count; anything longer means corrupted parents)
    const int max_walk = n0 + n1 + 2;
    double bottleneck = demand[tgt];
    {
      int j = tgt;
      for (int steps = 0;; ++steps) {
        if (steps > max_walk) throw PlanError("solve_transport: parent walk did not terminate");
        int i = par_t[j];
        int jprev = par_s[i];
        if (jprev < 0) {
          bottleneck = std::min(bottleneck, supply[i]);
          break;
        }
        bottleneck = std::min(bottleneck, flow(i, jprev));
        j = jprev;
      }
    }
    {
      int j = tgt;
      for (int steps = 0;; ++steps) {
        if (steps > max_walk) throw PlanError("solve_transport: parent walk did not terminate");
        int i = par_t[j];
        flow(i, j) += bottleneck;
        int jprev = par_s[i];
        if (jprev < 0) {
          supply[i] -= bottleneck;
          break;
        }
        flow(i, jprev) -= bottleneck;
        j = jprev;
      }
      demand[tgt] -= bottleneck;
    }

    // potential update, capped at the target distance (nodes beyond the
    // augmenting target keep consistent reduced costs this way)
    for (int i = 0; i < n0; ++i) {
      if (ds[i] < kInf) phi_s[i] += std::min(ds[i], bestd);
    }
    for (int j = 0; j < n1; ++j) {
      if (dt[j] < kInf) phi_t[j] += std::min(dt[j], bestd);
    }
  }

  if (supply.lpNorm<Eigen::Infinity>() > 1e-10 || demand.lpNorm<Eigen::Infinity>() > 1e-10) {
    throw PlanError("solve_transport: residual marginal mass above tolerance");
  }

  TransportPlan plan;
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      if (flow(i, j) > eps_mass) {
        plan.entries.push_back({i, j, flow(i, j)});
        plan.cost += flow(i, j) * cost(i, j);
      }
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

namespace {

class EuclideanBackendImpl final : public DistanceBackend {
 public:
  double distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) override {
    return (p - q).norm();
  }
  Eigen::VectorXd interpolate(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                              double t) override {
    return (1.0 - t) * p + t * q;
  }
  std::string name() const override { return "euclidean"; }
};

struct PairKey {
  std::vector<double> v;
  bool operator<(const PairKey& o) const { return v < o.v; }
};

PairKey make_key(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  PairKey k;
  k.v.reserve(p.size() + q.size());
  for (int i = 0; i < p.size(); ++i) k.v.push_back(p[i]);
  for (int i = 0; i < q.size(); ++i) k.v.push_back(q[i]);
  return k;
}

class SubRiemannianBackendImpl final : public DistanceBackend {
 public:
  SubRiemannianBackendImpl(const SubRiemannianStructure& S, const DistanceOptions& opts)
      : S_(S), opts_(opts) {}

  double distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) override {
    return entry(p, q).est.upper;
  }

  Eigen::VectorXd interpolate(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                              double t) override {
    auto& e = entry(p, q);
    if (e.geodesic.times.empty()) {
      e.geodesic = reparametrize_constant_speed(e.est.certificate);
    }
    return e.geodesic.at(t);
  }

  std::string name() const override { return "subriemannian:" + S_.label; }

 private:
  struct Entry {
    DistanceEstimate est;
    ControlCurve geodesic;
  };

  Entry& entry(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    PairKey key = make_key(p, q);
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    Entry e;
    e.est = cc_distance(S_, p, q, opts_);
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = cache_.emplace(std::move(key), std::move(e));
    return it->second;
  }

  SubRiemannianStructure S_;
  DistanceOptions opts_;
  std::map<PairKey, Entry> cache_;
  std::mutex mu_;
};

class ConeGrushinBackendImpl final : public DistanceBackend {
 public:
  ConeGrushinBackendImpl(const ConeGrushinSpace& CG, const ConeGrushinOptions& opts)
      : CG_(CG), opts_(opts) {}

  // Points in reduced coordinates (r, phi, y).
  double distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) override {
    return result(p, q).estimate;
  }

  Eigen::VectorXd interpolate(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                              double t) override {
    const auto& res = result(p, q);
    const auto& path = res.certificate;
    std::vector<double> arc(path.size(), 0.0);
    for (std::size_t j = 1; j < path.size(); ++j) {
      const auto& A = path[j - 1];
      const auto& B = path[j];
      double rb = 0.5 * (A.r + B.r);
      double dr = B.r - A.r, dphi = B.phi - A.phi, dy = B.y - A.y;
      double cr = CG_.c * rb;
      arc[j] = arc[j - 1] + std::sqrt(dr * dr + cr * cr * dphi * dphi +
                                      std::pow(rb, -2.0 * CG_.alpha) * dy * dy);
    }
    double s = t * arc.back();
    std::size_t j = 1;
    while (j + 1 < arc.size() && arc[j] < s) ++j;
    double seg = arc[j] - arc[j - 1];
    double f = seg > 0.0 ? (s - arc[j - 1]) / seg : 0.0;
    Eigen::VectorXd out(3);
    out[0] = path[j - 1].r + f * (path[j].r - path[j - 1].r);
    out[1] = path[j - 1].phi + f * (path[j].phi - path[j - 1].phi);
    out[2] = path[j - 1].y + f * (path[j].y - path[j - 1].y);
    return out;
  }

  std::string name() const override { return "cone_grushin"; }

 private:
  const ConeDistanceResult& result(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    PairKey key = make_key(p, q);
    {
      std::lock_guard<std::mutex> lock(mu_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    ConeDistanceResult r =
        cone_grushin_distance_reduced(CG_, p[0], p[2], q[0], q[2], q[1] - p[1], opts_);
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = cache_.emplace(std::move(key), std::move(r));
    return it->second;
  }

  ConeGrushinSpace CG_;
  ConeGrushinOptions opts_;
  std::map<PairKey, ConeDistanceResult> cache_;
  std::mutex mu_;
};

}  // namespace

std::unique_ptr<DistanceBackend> euclidean_backend() {
  return std::make_unique<EuclideanBackendImpl>();
}

std::unique_ptr<DistanceBackend> subriemannian_backend(const SubRiemannianStructure& S,
                                                       const DistanceOptions& opts) {
  return std::make_unique<SubRiemannianBackendImpl>(S, opts);
}

std::unique_ptr<DistanceBackend> cone_grushin_backend(const ConeGrushinSpace& CG,
                                                      const ConeGrushinOptions& opts) {
  return std::make_unique<ConeGrushinBackendImpl>(CG, opts);
}

// ---------------------------------------------------------------------------
// Entropy and CD check
// ---------------------------------------------------------------------------

double renyi_entropy(const DiscreteMeasure& mu, double N) {
  if (N <= 1.0) throw ArgumentError("renyi_entropy: N must be > 1");
  double s = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    if (mu.rho[i] <= 0.0) throw DensityError("renyi_entropy: zero density on support");
    s += mu.weights[i] * std::pow(mu.rho[i], -1.0 / N);
  }
  return -s;
}

namespace {

// Weighted Gaussian KDE of the Lebesgue density with per-coordinate
// Silverman bandwidths.
Eigen::VectorXd kde_density(const Eigen::MatrixXd& pts, const Eigen::VectorXd& w,
                            double bandwidth_factor) {
  const int n = static_cast<int>(pts.rows());
  const int d = static_cast<int>(pts.cols());
  Eigen::VectorXd h(d);
  for (int c = 0; c < d; ++c) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += w[i] * pts(i, c);
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += w[i] * (pts(i, c) - mean) * (pts(i, c) - mean);
    double stdev = std::sqrt(std::max(var, 0.0));
    h[c] = std::max(bandwidth_factor * stdev * std::pow(static_cast<double>(n), -0.2), 1e-8);
  }
  Eigen::VectorXd rho(n);
  const double norm = std::pow(2.0 * kPi, -0.5 * d) / h.prod();
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int l = 0; l < n; ++l) {
      double e = 0.0;
      for (int c = 0; c < d; ++c) {
        double u = (pts(i, c) - pts(l, c)) / h[c];
        e += u * u;
      }
      acc += w[l] * std::exp(-0.5 * e);
    }
    rho[i] = acc * norm;
  }
  return rho;
}

}  // namespace

W2Result w2_geodesic(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                     DistanceBackend& backend, const std::vector<double>& ts,
                     const std::function<double(const Eigen::VectorXd&)>& reference_density,
                     const W2Options& opts) {
  mu0.validate();
  mu1.validate();
  if (mu0.dim() != mu1.dim()) throw DimensionError("w2_geodesic: dimension mismatch");
  if (mu0.size() > 200 || mu1.size() > 200) {
    throw ArgumentError("w2_geodesic: supports above 200 points are out of contract");
  }
  const int n0 = mu0.size(), n1 = mu1.size();

  W2Result res;
  res.distance_matrix.resize(n0, n1);
  int threads = opts.threads > 0 ? opts.threads : default_threads();
  parallel_for(static_cast<std::size_t>(n0) * n1, threads, [&](std::size_t idx) {
    int i = static_cast<int>(idx / n1);
    int j = static_cast<int>(idx % n1);
    res.distance_matrix(i, j) = backend.distance(mu0.points.row(i), mu1.points.row(j));
  });

  Eigen::MatrixXd cost = res.distance_matrix.array().square();
  res.plan = solve_transport(mu0.weights, mu1.weights, cost);

  for (double t : ts) {
    DiscreteMeasure mt;
    if (t <= 1e-12) {
      mt = mu0;
    } else if (t >= 1.0 - 1e-12) {
      mt = mu1;
    } else {
      const int ne = static_cast<int>(res.plan.entries.size());
      mt.points.resize(ne, mu0.dim());
      mt.weights.resize(ne);
      parallel_for(static_cast<std::size_t>(ne), threads, [&](std::size_t e) {
        const auto& entry = res.plan.entries[e];
        mt.points.row(static_cast<int>(e)) =
            backend.interpolate(mu0.points.row(entry.i), mu1.points.row(entry.j), t);
      });
      for (int e = 0; e < ne; ++e) mt.weights[e] = res.plan.entries[e].mass;
      Eigen::VectorXd leb = kde_density(mt.points, mt.weights, opts.bandwidth_factor);
      mt.rho.resize(ne);
      for (int e = 0; e < ne; ++e) {
        double mref = reference_density(mt.points.row(e));
        if (mref <= 0.0) {
          throw DensityError("w2_geodesic: interpolant support left the reference measure");
        }
        mt.rho[e] = leb[e] / mref;
      }
    }
    res.interpolants.push_back(std::move(mt));
  }
  return res;
}

CdReport cd_inequality_check(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, double K,
                             double N, const std::vector<double>& ts, DistanceBackend& backend,
                             const std::function<double(const Eigen::VectorXd&)>& reference_density,
                             const CdOptions& opts) {
  W2Result w2 = w2_geodesic(mu0, mu1, backend, ts, reference_density, opts.w2);
  CdReport rep;
  rep.violation_tol = opts.violation_tol;
  rep.w2_cost = w2.plan.cost;
  bool violated = false;
  for (std::size_t it = 0; it < ts.size(); ++it) {
    CdRow row;
    row.t = ts[it];
    row.entropy = renyi_entropy(w2.interpolants[it], N);
    double rhs = 0.0;
    for (const auto& e : w2.plan.entries) {
      double theta = w2.distance_matrix(e.i, e.j);
      double t1 = distortion_tau(K, N, 1.0 - row.t, theta);
      double t2 = distortion_tau(K, N, row.t, theta);
      if (std::isinf(t1) || std::isinf(t2)) {
        rhs = -std::numeric_limits<double>::infinity();
        break;
      }
      rhs -= e.mass * (t1 * std::pow(mu0.rho[e.i], -1.0 / N) +
                       t2 * std::pow(mu1.rho[e.j], -1.0 / N));
    }
    row.rhs = rhs;
    row.margin = rhs - row.entropy;
    if (row.margin < -opts.violation_tol) violated = true;
    rep.rows.push_back(row);
  }
  rep.verdict = violated ? "violated" : "consistent";
  return rep;
}

}  // namespace srlab
