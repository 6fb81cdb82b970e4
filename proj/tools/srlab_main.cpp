#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

#include <srlab/carnot.hpp>
#include <srlab/cdlab.hpp>
#include <srlab/errors.hpp>
#include <srlab/geodesy.hpp>
#include <srlab/library.hpp>
#include <srlab/nilpotent.hpp>
#include <srlab/parallel.hpp>
#include <srlab/rng.hpp>
#include <srlab/separation.hpp>
#include <srlab/warped.hpp>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace srlab;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct Emitter {
  fs::path dir;
  json config;
  std::string command;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  explicit Emitter(std::string cmd, const fs::path& out) : dir(out), command(std::move(cmd)) {
    fs::create_directories(dir);
  }

  std::ofstream csv(const std::string& name, const std::string& header) {
    std::ofstream f(dir / name);
    f << header << "\n";
    return f;
  }

  void write_json(const std::string& name, const json& j) {
    std::ofstream f(dir / name);
    f << j.dump(2) << "\n";
  }

  void manifest() {
    json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["config"] = config;
    m["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_json("manifest.json", m);
  }
};

std::vector<double> parse_csv_doubles(const std::string& text) {
  std::vector<double> out;
  std::string cur;
  for (char ch : text + ",") {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(std::stod(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  return out;
}

Eigen::VectorXd parse_point(const std::string& text, int dim) {
  auto v = parse_csv_doubles(text);
  if (static_cast<int>(v.size()) != dim) {
    throw ArgumentError("point '" + text + "' has " + std::to_string(v.size()) +
                        " coordinates, expected " + std::to_string(dim));
  }
  return Eigen::Map<Eigen::VectorXd>(v.data(), dim);
}

DiscreteMeasure read_measure_csv(const fs::path& path, int dim) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot read measure file: " + path.string());
  std::string line;
  std::getline(in, line);  // header x1..xn,weight,rho
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    rows.push_back(parse_csv_doubles(line));
  }
  DiscreteMeasure m;
  m.points.resize(static_cast<int>(rows.size()), dim);
  m.weights.resize(static_cast<int>(rows.size()));
  m.rho.resize(static_cast<int>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (static_cast<int>(rows[r].size()) != dim + 2) {
      throw ArgumentError("measure row has wrong arity in " + path.string());
    }
    for (int c = 0; c < dim; ++c) m.points(static_cast<int>(r), c) = rows[r][c];
    m.weights[static_cast<int>(r)] = rows[r][dim];
    m.rho[static_cast<int>(r)] = rows[r][dim + 1];
  }
  return m;
}

void write_measure_csv(Emitter& em, const std::string& name, const DiscreteMeasure& m) {
  std::string header;
  for (int c = 0; c < m.dim(); ++c) header += "x" + std::to_string(c + 1) + ",";
  header += "weight,rho";
  auto f = em.csv(name, header);
  for (int i = 0; i < m.size(); ++i) {
    for (int c = 0; c < m.dim(); ++c) f << fmt(m.points(i, c)) << ",";
    f << fmt(m.weights[i]) << "," << fmt(m.rho[i]) << "\n";
  }
}

DiscreteMeasure uniform_block(double cx, double cy, double w, double h, int nx, int ny,
                              double ref_mass) {
  DiscreteMeasure m;
  const int n = nx * ny;
  m.points.resize(n, 2);
  m.weights.resize(n);
  m.rho.resize(n);
  int k = 0;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      m.points(k, 0) = cx - w + 2.0 * w * (i + 0.5) / nx;
      m.points(k, 1) = cy - h + 2.0 * h * (j + 0.5) / ny;
      m.weights[k] = 1.0 / n;
      m.rho[k] = 1.0 / ref_mass;
      ++k;
    }
  }
  return m;
}

struct GlobalOpts {
  std::string out = "out";
  std::uint64_t seed = 0;
  int threads = 0;
};

fs::path resolve_out(const GlobalOpts& g) {
  // Environment override applies to the output directory only.
  if (const char* env = std::getenv("SRLAB_OUTDIR")) return fs::path(env);
  return fs::path(g.out);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"sub-Riemannian geometry laboratory"};
  app.set_config("--config", "", "flat key-value config file with sections");
  app.require_subcommand(1);
  app.fallthrough(true);  // global options may follow the subcommand name

  GlobalOpts g;
  app.add_option("--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "RNG seed (mandatory; no wall-clock seeding)")->required();
  app.add_option("--threads", g.threads, "worker threads (0 = hardware)");

  // ---- flag ----
  auto* cflag = app.add_subcommand("flag", "growth vector, weights and step at a point");
  std::string flag_structure = "grushin", flag_point = "0,0";
  int flag_depth = 6;
  cflag->add_option("--structure", flag_structure, "structure name or file");
  cflag->add_option("--point", flag_point, "base point, comma separated");
  cflag->add_option("--max-depth", flag_depth, "bracket depth bound");

  // ---- distance ----
  auto* cdist = app.add_subcommand("distance", "Carnot-Caratheodory distance estimates");
  std::string dist_structure = "grushin", dist_from = "0,0", dist_to = "1,0";
  int dist_segments = 40, dist_restarts = 16;
  cdist->add_option("--structure", dist_structure);
  cdist->add_option("--from", dist_from);
  cdist->add_option("--to", dist_to);
  cdist->add_option("--segments", dist_segments);
  cdist->add_option("--restarts", dist_restarts);

  // ---- geodesic ----
  auto* cgeo = app.add_subcommand("geodesic", "constant-speed minimizing certificate");
  std::string geo_structure = "grushin", geo_from = "0,0", geo_to = "1,0";
  cgeo->add_option("--structure", geo_structure);
  cgeo->add_option("--from", geo_from);
  cgeo->add_option("--to", geo_to);

  // ---- nilpotent ----
  auto* cnil = app.add_subcommand("nilpotent", "degree -1 homogeneous truncation");
  std::string nil_structure = "perturbed_grushin", nil_weights = "1,2";
  cnil->add_option("--structure", nil_structure);
  cnil->add_option("--weights", nil_weights);

  // ---- blowup ----
  auto* cblow = app.add_subcommand("blowup", "rescaled-curve convergence report");
  std::string blow_structure = "perturbed_grushin", blow_weights = "1,2", blow_cov = "1,0";
  std::string blow_lambdas = "1,2,4,8,16,32";
  double blow_window = 0.9;
  cblow->add_option("--structure", blow_structure);
  cblow->add_option("--weights", blow_weights);
  cblow->add_option("--covector", blow_cov, "initial covector of the normal geodesic");
  cblow->add_option("--lambdas", blow_lambdas);
  cblow->add_option("--window", blow_window);

  // ---- lift ----
  auto* clift = app.add_subcommand("lift", "horizontal lift to the Heisenberg group");
  std::string lift_controls = "1,0;0,1";
  double lift_T = 2.0;
  std::string lift_from = "0,0";
  clift->add_option("--controls", lift_controls, "semicolon separated control segments");
  clift->add_option("--T", lift_T);
  clift->add_option("--from", lift_from, "base point in the Grushin nilpotent plane");

  // ---- ricci ----
  auto* cric = app.add_subcommand("ricci", "closed-form Ricci sweep of the warped product");
  int ric_m = 11, ric_k = 2;
  double ric_alpha = 1.0, ric_c = 0.1;
  cric->add_option("--m", ric_m);
  cric->add_option("--k", ric_k);
  cric->add_option("--alpha", ric_alpha);
  cric->add_option("--c", ric_c);

  // ---- gate ----
  auto* cgate = app.add_subcommand("gate", "positive-Ricci parameter certificate");
  int gate_k = 2;
  double gate_alpha = 1.0;
  cgate->add_option("--k", gate_k);
  cgate->add_option("--alpha", gate_alpha);

  // ---- cone-distance ----
  auto* ccone = app.add_subcommand("cone-distance", "cone-Grushin completion distance");
  int cone_k = 2;
  double cone_alpha = 1.0, cone_c = 0.1;
  std::string cone_from = "0,0", cone_to = "0,1";
  double cone_phi = 0.0;
  ccone->add_option("--k", cone_k);
  ccone->add_option("--alpha", cone_alpha);
  ccone->add_option("--c", cone_c);
  ccone->add_option("--from", cone_from, "reduced coordinates r,y");
  ccone->add_option("--to", cone_to, "reduced coordinates r,y");
  ccone->add_option("--phi", cone_phi, "relative sphere angle");

  // ---- dilation-check ----
  auto* cdil = app.add_subcommand("dilation-check", "metric dilation isometry report");
  int dil_k = 2, dil_pairs = 5;
  double dil_alpha = 1.0, dil_c = 0.1;
  std::string dil_lambdas = "0.5,2,10";
  cdil->add_option("--k", dil_k);
  cdil->add_option("--alpha", dil_alpha);
  cdil->add_option("--c", dil_c);
  cdil->add_option("--pairs", dil_pairs);
  cdil->add_option("--lambdas", dil_lambdas);

  // ---- hausdorff ----
  auto* chaus = app.add_subcommand("hausdorff", "covering-number dimension of the axis");
  int haus_k = 2;
  double haus_alpha = 3.0, haus_c = 0.1;
  chaus->add_option("--k", haus_k);
  chaus->add_option("--alpha", haus_alpha);
  chaus->add_option("--c", haus_c);

  // ---- cd-check ----
  auto* ccd = app.add_subcommand("cd-check", "entropy-inequality report");
  std::string cd_preset = "euclidean-control";
  std::string cd_mu0_file, cd_mu1_file, cd_backend = "euclidean";
  double cd_K = 0.0, cd_N = 10.0, cd_scale = 0.5, cd_p = 4.0;
  std::string cd_ts = "0.25,0.5,0.75";
  int cd_grid = 4;
  ccd->add_option("--preset", cd_preset,
                  "euclidean-control | grushin-violation | halfplane | files");
  ccd->add_option("--mu0", cd_mu0_file);
  ccd->add_option("--mu1", cd_mu1_file);
  ccd->add_option("--backend", cd_backend, "euclidean | grushin");
  ccd->add_option("--K", cd_K);
  ccd->add_option("--N", cd_N);
  ccd->add_option("--scale", cd_scale, "separation scale s of the preset blocks");
  ccd->add_option("--p", cd_p, "halfplane reference density exponent");
  ccd->add_option("--ts", cd_ts);
  ccd->add_option("--grid", cd_grid, "preset block grid (grid x grid points)");

  // ---- separation ----
  auto* csep = app.add_subcommand("separation", "first-order distance separation table");
  std::string sep_structure = "grushin", sep_cov_a = "1,0", sep_cov_b = "-1,0";
  std::string sep_grid = "0.4,0.2,0.1,0.05";
  std::string sep_point = "0,0";
  csep->add_option("--structure", sep_structure);
  csep->add_option("--point", sep_point);
  csep->add_option("--covector-a", sep_cov_a);
  csep->add_option("--covector-b", sep_cov_b);
  csep->add_option("--t-grid", sep_grid);

  app.parse(argc, argv);  // CLI::ParseError maps to exit code 2 in main

  int threads = g.threads > 0 ? g.threads : default_threads();
  fs::path out = resolve_out(g);

  int exit_code = 0;

  if (cflag->parsed()) {
    Emitter em("flag", out);
    em.config = {{"structure", flag_structure}, {"point", flag_point},
                 {"max_depth", flag_depth},     {"seed", g.seed}};
    auto S = structure_by_name(flag_structure);
    Flag f = flag_at(S, parse_point(flag_point, S.dim), FlagOptions{flag_depth, 1e-9});
    json rep;
    rep["structure"] = S.label;
    rep["point"] = parse_csv_doubles(flag_point);
    rep["growth"] = f.growth;
    rep["weights"] = f.weights.values();
    rep["step"] = f.step;
    em.write_json("flag_report.json", rep);
    em.manifest();
  } else if (cdist->parsed()) {
    Emitter em("distance", out);
    em.config = {{"structure", dist_structure}, {"from", dist_from},   {"to", dist_to},
                 {"segments", dist_segments},   {"restarts", dist_restarts},
                 {"seed", g.seed}};
    auto S = structure_by_name(dist_structure);
    DistanceOptions o;
    o.segments = dist_segments;
    o.restarts = dist_restarts;
    o.seed = g.seed;
    o.threads = threads;
    DistanceEstimate est = cc_distance(S, parse_point(dist_from, S.dim),
                                       parse_point(dist_to, S.dim), o);
    auto f = em.csv("distances.csv", "i,j,upper,lower,converged");
    f << "0,1," << fmt(est.upper) << "," << fmt(est.lower) << "," << (est.converged ? 1 : 0)
      << "\n";
    em.manifest();
    if (!est.converged) exit_code = 3;
  } else if (cgeo->parsed()) {
    Emitter em("geodesic", out);
    em.config = {{"structure", geo_structure}, {"from", geo_from}, {"to", geo_to},
                 {"seed", g.seed}};
    auto S = structure_by_name(geo_structure);
    DistanceOptions o;
    o.seed = g.seed;
    o.threads = threads;
    ControlCurve geo = geodesic_between(S, parse_point(geo_from, S.dim),
                                        parse_point(geo_to, S.dim), o);
    std::string header = "t";
    for (int j = 0; j < S.dim; ++j) header += ",x" + std::to_string(j + 1);
    for (int i = 0; i < S.rank(); ++i) header += ",u" + std::to_string(i + 1);
    auto f = em.csv("geodesic.csv", header);
    for (int k = 0; k < geo.nodes(); ++k) {
      f << fmt(geo.times[k]);
      for (int j = 0; j < S.dim; ++j) f << "," << fmt(geo.states(k, j));
      for (int i = 0; i < S.rank(); ++i) f << "," << fmt(geo.controls(k, i));
      f << "\n";
    }
    em.manifest();
  } else if (cnil->parsed()) {
    Emitter em("nilpotent", out);
    em.config = {{"structure", nil_structure}, {"weights", nil_weights}, {"seed", g.seed}};
    auto S = structure_by_name(nil_structure);
    std::vector<int> wv;
    for (double x : parse_csv_doubles(nil_weights)) wv.push_back(static_cast<int>(x));
    auto hat = nilpotent_approximation(S, WeightVector(wv));
    std::ofstream sf(em.dir / (S.label + "_hat.structure"));
    sf << hat.to_file_text();
    Flag f = flag_at(hat, Eigen::VectorXd::Zero(hat.dim));
    json rep;
    rep["structure"] = S.label;
    rep["weights"] = wv;
    rep["hat_label"] = hat.label;
    rep["hat_growth"] = f.growth;
    rep["hat_step"] = f.step;
    em.write_json("nilpotent.json", rep);
    em.manifest();
  } else if (cblow->parsed()) {
    Emitter em("blowup", out);
    em.config = {{"structure", blow_structure}, {"weights", blow_weights},
                 {"covector", blow_cov},        {"lambdas", blow_lambdas},
                 {"window", blow_window},       {"seed", g.seed}};
    auto S = structure_by_name(blow_structure);
    std::vector<int> wv;
    for (double x : parse_csv_doubles(blow_weights)) wv.push_back(static_cast<int>(x));
    WeightVector w(wv);
    Eigen::VectorXd lam = parse_point(blow_cov, S.dim);
    ControlCurve geo = normal_geodesic(S, Eigen::VectorXd::Zero(S.dim), lam, 1.0);
    Eigen::VectorXd v0 =
        S.generator_matrix(Eigen::VectorXd::Zero(S.dim)) * geo.controls.row(0).transpose();
    ControlCurve cand = blow_up_normal(S, w, v0);
    BlowUpReport rep =
        blow_up_convergence(S, w, geo, parse_csv_doubles(blow_lambdas), blow_window, &cand);
    auto f = em.csv("blowup.csv", "lambda,sup_deviation,verdict");
    for (std::size_t i = 0; i < rep.lambdas.size(); ++i) {
      f << fmt(rep.lambdas[i]) << "," << fmt(rep.sup_deviation[i]) << ","
        << (rep.converged ? "converged" : "open") << "\n";
    }
    em.manifest();
    if (!rep.converged) exit_code = 3;
  } else if (clift->parsed()) {
    Emitter em("lift", out);
    em.config = {{"controls", lift_controls}, {"T", lift_T}, {"from", lift_from},
                 {"seed", g.seed}};
    std::vector<std::vector<double>> segs;
    std::string cur;
    for (char ch : lift_controls + ";") {
      if (ch == ';') {
        if (!cur.empty()) segs.push_back(parse_csv_doubles(cur));
        cur.clear();
      } else {
        cur += ch;
      }
    }
    Eigen::MatrixXd U(static_cast<int>(segs.size()), 2);
    for (std::size_t s = 0; s < segs.size(); ++s) {
      if (segs[s].size() != 2) throw ArgumentError("each control segment needs two entries");
      U(static_cast<int>(s), 0) = segs[s][0];
      U(static_cast<int>(s), 1) = segs[s][1];
    }
    auto hat = nilpotent_approximation(grushin(), WeightVector({1, 2}));
    Eigen::VectorXd x0 = parse_point(lift_from, 2);
    ControlCurve base = integrate_control(hat, x0, U, lift_T);
    LiftedCurve lift = horizontal_lift(base, project_preimage(Eigen::Vector2d(x0)));
    auto f = em.csv("lift.csv", "t,a,b,c,u1,u2");
    for (std::size_t k = 0; k < lift.times.size(); ++k) {
      const auto& el = lift.elements[k];
      f << fmt(lift.times[k]) << "," << fmt(el.a) << "," << fmt(el.b) << "," << fmt(el.c) << ","
        << fmt(lift.controls(static_cast<int>(k), 0)) << ","
        << fmt(lift.controls(static_cast<int>(k), 1)) << "\n";
    }
    em.manifest();
  } else if (cric->parsed()) {
    Emitter em("ricci", out);
    em.config = {{"m", ric_m}, {"k", ric_k}, {"alpha", ric_alpha}, {"c", ric_c},
                 {"seed", g.seed}};
    WarpingTriple W{ric_m, ric_k, ric_alpha, ric_c};
    auto f = em.csv("ricci_sweep.csv", "r,ric_rr,ric_xx,ric_yy,ric_zz");
    for (int i = 0; i < 200; ++i) {
      double r = std::pow(10.0, -3.0 + 6.0 * i / 199.0);
      RicciComponents ric = ricci_components(W, r);
      f << fmt(r) << "," << fmt(ric.rr) << "," << fmt(ric.xx) << "," << fmt(ric.yy) << ","
        << fmt(ric.zz) << "\n";
    }
    em.manifest();
  } else if (cgate->parsed()) {
    Emitter em("gate", out);
    em.config = {{"k", gate_k}, {"alpha", gate_alpha}, {"seed", g.seed}};
    GateCertificate cert = parameter_gate(gate_k, gate_alpha);
    json rep;
    rep["k"] = gate_k;
    rep["alpha"] = gate_alpha;
    rep["m"] = cert.m;
    rep["c"] = cert.c;
    rep["grid_minima"] = {{"ric_rr", cert.min_rr},
                          {"ric_xx", cert.min_xx},
                          {"ric_yy", cert.min_yy},
                          {"ric_zz", cert.min_zz}};
    em.write_json("gate.json", rep);
    em.manifest();
  } else if (ccone->parsed()) {
    Emitter em("cone-distance", out);
    em.config = {{"k", cone_k},       {"alpha", cone_alpha}, {"c", cone_c},
                 {"from", cone_from}, {"to", cone_to},       {"phi", cone_phi},
                 {"seed", g.seed}};
    ConeGrushinSpace CG{cone_k, cone_alpha, cone_c};
    auto p = parse_csv_doubles(cone_from);
    auto q = parse_csv_doubles(cone_to);
    if (p.size() != 2 || q.size() != 2) {
      throw ArgumentError("cone-distance points are reduced coordinates r,y");
    }
    auto res = cone_grushin_distance_reduced(CG, p[0], p[1], q[0], q[1], cone_phi);
    auto f = em.csv("cone_distances.csv", "r0,y0,r1,y1,phi,estimate,upper,converged");
    f << fmt(p[0]) << "," << fmt(p[1]) << "," << fmt(q[0]) << "," << fmt(q[1]) << ","
      << fmt(cone_phi) << "," << fmt(res.estimate) << "," << fmt(res.upper) << ","
      << (res.converged ? 1 : 0) << "\n";
    auto fp = em.csv("cone_path.csv", "j,r,phi,y");
    for (std::size_t j = 0; j < res.certificate.size(); ++j) {
      const auto& nd = res.certificate[j];
      fp << j << "," << fmt(nd.r) << "," << fmt(nd.phi) << "," << fmt(nd.y) << "\n";
    }
    em.manifest();
    if (!res.converged) exit_code = 3;
  } else if (cdil->parsed()) {
    Emitter em("dilation-check", out);
    em.config = {{"k", dil_k}, {"alpha", dil_alpha}, {"c", dil_c}, {"pairs", dil_pairs},
                 {"lambdas", dil_lambdas}, {"seed", g.seed}};
    ConeGrushinSpace CG{dil_k, dil_alpha, dil_c};
    Rng rng(g.seed);
    std::vector<std::pair<ConePathNode, ConePathNode>> pairs;
    for (int i = 0; i < dil_pairs; ++i) {
      pairs.push_back({{rng.uniform(0.0, 1.0), 0.0, rng.uniform(-1, 1)},
                       {rng.uniform(0.1, 1.5), rng.uniform(0.0, 1.5), rng.uniform(-1, 1)}});
    }
    auto lambdas = parse_csv_doubles(dil_lambdas);
    auto rep = dilation_isometry_check(CG, pairs, lambdas, 1e-2);
    auto f = em.csv("dilation_check.csv", "pairs,lambdas,max_rel_error,pass");
    f << dil_pairs << "," << lambdas.size() << "," << fmt(rep.max_rel_error) << ","
      << (rep.pass ? 1 : 0) << "\n";
    em.manifest();
    if (!rep.pass) exit_code = 3;
  } else if (chaus->parsed()) {
    Emitter em("hausdorff", out);
    em.config = {{"k", haus_k}, {"alpha", haus_alpha}, {"c", haus_c}, {"seed", g.seed}};
    ConeGrushinSpace CG{haus_k, haus_alpha, haus_c};
    auto axis = cone_grushin_distance_reduced(CG, 0.0, 0.0, 0.0, 1.0);
    HausdorffFit fit = hausdorff_dimension_estimate(CG, axis.estimate);
    auto f = em.csv("hausdorff_fit.csv", "log_inv_delta,log_count,slope");
    for (std::size_t i = 0; i < fit.log_count.size(); ++i) {
      f << fmt(fit.log_inv_delta[i]) << "," << fmt(fit.log_count[i]) << "," << fmt(fit.slope)
        << "\n";
    }
    em.manifest();
  } else if (ccd->parsed()) {
    Emitter em("cd-check", out);
    DiscreteMeasure mu0, mu1;
    std::function<double(const Eigen::VectorXd&)> ref = [](const Eigen::VectorXd&) {
      return 1.0;
    };
    if (cd_preset == "files") {
      mu0 = read_measure_csv(cd_mu0_file, 2);
      mu1 = read_measure_csv(cd_mu1_file, 2);
    } else if (cd_preset == "euclidean-control") {
      double s = cd_scale, w = 0.5, h = 0.5;
      mu0 = uniform_block(-s - w, 0.0, w, h, cd_grid, cd_grid, 4 * w * h);
      mu1 = uniform_block(+s + w, 0.0, w, h, cd_grid, cd_grid, 4 * w * h);
      cd_backend = "euclidean";
    } else if (cd_preset == "grushin-violation") {
      // pinned violating configuration: wide block transported onto a tiny
      // block at the singular line; the deep-t interpolants over-concentrate
      mu0 = uniform_block(0.0, 1.0, 0.8, 0.25, 7, 3, 4.0 * 0.8 * 0.25);
      mu1 = uniform_block(0.0, 0.0, 0.05, 0.003, 4, 2, 4.0 * 0.05 * 0.003);
      cd_backend = "grushin";
      if (ccd->count("--N") == 0) cd_N = 2.0;
      if (ccd->count("--K") == 0) cd_K = 0.0;
      if (ccd->count("--ts") == 0) cd_ts = "0.9,0.95,0.98";
    } else if (cd_preset == "halfplane") {
      // supports in x > 0; reference density x^p
      double s = cd_scale;
      double x0 = 0.6, w = 0.25, h = 0.4;
      double lo = x0 - w, hi = x0 + w;
      double xp_mass = (std::pow(hi, cd_p + 1) - std::pow(lo, cd_p + 1)) / (cd_p + 1) * 2.0 * h;
      mu0 = uniform_block(x0, -s, w, h, cd_grid, cd_grid, 1.0);
      mu1 = uniform_block(x0, +s, w, h, cd_grid, cd_grid, 1.0);
      for (int i = 0; i < mu0.size(); ++i) mu0.rho[i] = 1.0 / xp_mass;
      for (int i = 0; i < mu1.size(); ++i) mu1.rho[i] = 1.0 / xp_mass;
      double p_exp = cd_p;
      ref = [p_exp](const Eigen::VectorXd& z) {
        return z[0] > 0.0 ? std::pow(z[0], p_exp) : 0.0;
      };
      cd_backend = "grushin";
    } else {
      throw ArgumentError("unknown cd-check preset: " + cd_preset);
    }
    em.config = {{"preset", cd_preset}, {"backend", cd_backend}, {"K", cd_K},   {"N", cd_N},
                 {"scale", cd_scale},   {"p", cd_p},             {"ts", cd_ts},
                 {"grid", cd_grid},     {"seed", g.seed}};

    std::unique_ptr<DistanceBackend> backend;
    if (cd_backend == "euclidean") {
      backend = euclidean_backend();
    } else if (cd_backend == "grushin") {
      DistanceOptions o;
      o.restarts = 2;
      o.refine_levels = 1;
      o.riemannian_lower_bound = false;
      o.seed = g.seed;
      o.threads = 1;
      backend = subriemannian_backend(grushin(), o);
    } else {
      throw ArgumentError("unknown backend: " + cd_backend);
    }

    CdOptions copt;
    copt.w2.threads = threads;
    CdReport rep = cd_inequality_check(mu0, mu1, cd_K, cd_N, parse_csv_doubles(cd_ts), *backend,
                                       ref, copt);
    write_measure_csv(em, "mu0.csv", mu0);
    write_measure_csv(em, "mu1.csv", mu1);
    json jrep;
    jrep["config"] = em.config;
    jrep["note"] = "margins are evidence, not proof, in both directions";
    jrep["per_t"] = json::array();
    for (const auto& row : rep.rows) {
      jrep["per_t"].push_back(
          {{"t", row.t}, {"entropy", row.entropy}, {"rhs", row.rhs}, {"margin", row.margin}});
    }
    jrep["verdict"] = rep.verdict;
    jrep["w2_cost"] = rep.w2_cost;
    em.write_json("cd_report.json", jrep);
    em.manifest();
  } else if (csep->parsed()) {
    Emitter em("separation", out);
    em.config = {{"structure", sep_structure}, {"point", sep_point},
                 {"covector_a", sep_cov_a},    {"covector_b", sep_cov_b},
                 {"t_grid", sep_grid},         {"seed", g.seed}};
    auto S = structure_by_name(sep_structure);
    Eigen::VectorXd p = parse_point(sep_point, S.dim);
    ControlCurve a = normal_geodesic(S, p, parse_point(sep_cov_a, S.dim), 0.5);
    ControlCurve b = normal_geodesic(S, p, parse_point(sep_cov_b, S.dim), 0.5);
    DistanceOptions o;
    o.restarts = 4;
    o.refine_levels = 1;
    o.riemannian_lower_bound = false;
    o.seed = g.seed;
    o.threads = threads;
    SeparationReport rep =
        first_order_separation_check(S, p, a, b, parse_csv_doubles(sep_grid), 2e-2, o);
    auto f = em.csv("separation.csv", "t,ratio,target,pass");
    for (const auto& row : rep.rows) {
      f << fmt(row.t) << "," << fmt(row.ratio) << "," << fmt(rep.target) << ","
        << (rep.pass ? 1 : 0) << "\n";
    }
    em.manifest();
  }

  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ArgumentError& e) {
    std::printf("{\"error\": {\"type\": \"config\", \"message\": \"%s\"}}\n", e.what());
    return 2;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return 0;  // --help and friends
    std::printf("{\"error\": {\"type\": \"config\", \"message\": \"%s\"}}\n", e.what());
    return 2;
  } catch (const GateFailed& e) {
    std::printf("{\"error\": {\"type\": \"nonconvergence\", \"message\": \"%s\"}}\n", e.what());
    return 3;
  } catch (const EstimateFailed& e) {
    std::printf("{\"error\": {\"type\": \"nonconvergence\", \"message\": \"%s\"}}\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::printf("{\"error\": {\"type\": \"internal\", \"message\": \"%s\"}}\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::printf("{\"error\": {\"type\": \"internal\", \"message\": \"%s\"}}\n", e.what());
    return 4;
  }
}
