#include <benchmark/benchmark.h>

#include <srlab/cdlab.hpp>
#include <srlab/geodesy.hpp>
#include <srlab/library.hpp>
#include <srlab/nilpotent.hpp>
#include <srlab/rng.hpp>
#include <srlab/structure.hpp>
#include <srlab/warped.hpp>

using namespace srlab;

namespace {

void BM_LieBracketTower(benchmark::State& state) {
  auto S = martinet();
  for (auto _ : state) {
    auto layers = bracket_layers(S, static_cast<int>(state.range(0)));
    benchmark::DoNotOptimize(layers);
  }
}
BENCHMARK(BM_LieBracketTower)->Arg(3)->Arg(5);

void BM_FlagAt(benchmark::State& state) {
  auto S = martinet();
  Eigen::Vector3d p(0, 0, 0);
  for (auto _ : state) {
    Flag f = flag_at(S, p);
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_FlagAt);

void BM_MinimalControl(benchmark::State& state) {
  auto S = grushin();
  Eigen::Vector2d p(0.7, 0.1), v(0.3, 0.5);
  for (auto _ : state) {
    MinimalControl mc = minimal_control(S, p, v);
    benchmark::DoNotOptimize(mc);
  }
}
BENCHMARK(BM_MinimalControl);

void BM_CcDistance(benchmark::State& state) {
  auto S = grushin();
  DistanceOptions o;
  o.restarts = static_cast<int>(state.range(0));
  o.refine_levels = 1;
  o.riemannian_lower_bound = false;
  o.threads = 1;
  Eigen::Vector2d p(0, 0), q(0, 1);
  for (auto _ : state) {
    DistanceEstimate est = cc_distance(S, p, q, o);
    benchmark::DoNotOptimize(est);
  }
}
BENCHMARK(BM_CcDistance)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_NormalGeodesic(benchmark::State& state) {
  auto S = grushin();
  Eigen::Vector2d p(0, 0), lam(1, 1);
  for (auto _ : state) {
    ControlCurve c = normal_geodesic(S, p, lam, 1.0);
    benchmark::DoNotOptimize(c);
  }
}
BENCHMARK(BM_NormalGeodesic)->Unit(benchmark::kMillisecond);

void BM_Transport(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(5);
  Eigen::VectorXd a = Eigen::VectorXd::Constant(n, 1.0 / n);
  Eigen::VectorXd b = Eigen::VectorXd::Constant(n, 1.0 / n);
  Eigen::MatrixXd c(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) c(i, j) = rng.uniform(0.0, 4.0);
  }
  for (auto _ : state) {
    TransportPlan plan = solve_transport(a, b, c);
    benchmark::DoNotOptimize(plan);
  }
}
BENCHMARK(BM_Transport)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_DistortionTau(benchmark::State& state) {
  for (auto _ : state) {
    double acc = 0.0;
    for (int i = 1; i < 100; ++i) acc += distortion_tau(-10.0, 10.0, 0.5, i * 0.05);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_DistortionTau);

void BM_RicciClosedForm(benchmark::State& state) {
  WarpingTriple W{11, 2, 1.0, 0.1};
  for (auto _ : state) {
    double acc = 0.0;
    for (int i = 0; i < 200; ++i) {
      RicciComponents r = ricci_components(W, 0.001 * (i + 1));
      acc += r.rr + r.xx + r.yy + r.zz;
    }
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_RicciClosedForm);

void BM_ConeDistance(benchmark::State& state) {
  ConeGrushinSpace CG{2, 1.0, 0.1};
  for (auto _ : state) {
    auto res = cone_grushin_distance_reduced(CG, 0.0, 0.0, 0.0, 1.0);
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_ConeDistance)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
