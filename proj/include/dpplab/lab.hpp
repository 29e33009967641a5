#pragma once

// Subcommands of dpp-lab. Each one writes CSV/JSON under
// <out>/<scenario name>-<scenario hash>/<command>/ plus manifest.json and timing.json,
// and returns the process exit code (0, or 4 when a verification fails).

#include <chrono>
#include <iostream>
#include <optional>

#include "battery.hpp"

namespace dpplab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitVerification = 4;

struct RunFlags {
  std::filesystem::path out = "dpp-lab-out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::optional<double> tol;
};

// Hash of the scenario content. Seed and path count are run settings, not part of the problem, so
// runs that differ only in those share a hash and can be compared.
template <std::size_t N>
std::string scenario_hash(const Scenario<N>& s) {
  Json j = scenario_to_json(s);
  j.erase("seed");
  j.erase("n_paths");
  return json_hash(j);
}

template <std::size_t N>
Scenario<N> apply_flags(Scenario<N> s, const RunFlags& f) {
  if (f.seed) s.seed = *f.seed;
  if (f.paths) s.n_paths = *f.paths;
  if (f.tol) s.tolerances.solver = *f.tol;
  s.validate();
  return s;
}

// One command's output directory with its manifest.
template <std::size_t N>
class CommandRun {
 public:
  CommandRun(const Scenario<N>& s, const RunFlags& f, const std::string& command)
      : scn_(s), command_(command), t0_(std::chrono::steady_clock::now()),
        dir_(f.out / (s.name + "-" + scenario_hash(s)) / command) {}

  RunDir& dir() { return dir_; }

  int finish(bool verified, const Json& results) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    Json outputs = dir_.files();
    Json m{{"command", command_},
           {"scenario_hash", scenario_hash(scn_)},
           {"scenario", scenario_to_json(scn_)},
           {"version", kVersion},
           {"seeds", Json::array({scn_.seed})},
           {"results", results},
           {"verdict", verified ? "PASS" : "FAIL"},
           {"outputs", outputs},
           {"timing", "timing.json"}};
    write_text(dir_.path() / "manifest.json", m.dump(2) + "\n");
    write_text(dir_.path() / "timing.json", Json{{"seconds", secs}}.dump(2) + "\n");
    std::cout << command_ << ": " << (verified ? "PASS" : "FAIL") << " -> " << dir_.path().string() << "\n";
    return verified ? kExitOk : kExitVerification;
  }

 private:
  Scenario<N> scn_;
  std::string command_;
  std::chrono::steady_clock::time_point t0_;
  RunDir dir_;
};

template <std::size_t N>
Json point_json(const Vec<N>& x) {
  return vec_to_json<N>(x);
}

template <std::size_t N>
std::vector<Vec<N>> probes_or_center(const Scenario<N>& s) {
  return s.probes.empty() ? std::vector<Vec<N>>{s.domain.center()} : s.probes;
}

// ---------------------------------------------------------------- solve

template <std::size_t N>
int cmd_solve(const Scenario<N>& s, const std::string& kind, const RunFlags& f) {
  CommandRun<N> run(s, f, "solve-" + kind);
  const auto pb = make_problem(s);
  SolveResult<N> r;
  if (kind == "dpp") r = solve_dpp(pb);
  else if (kind == "pucci-max") r = solve_pucci(pb, PucciKind::max);
  else if (kind == "pucci-min") r = solve_pucci(pb, PucciKind::min);
  else fail_validation("solve: unknown solver '" + kind + "' (dpp, pucci-max, pucci-min)");

  std::vector<std::string> head{"node"};
  for (std::size_t i = 0; i < N; ++i) head.push_back("x" + std::to_string(i));
  head.insert(head.end(), {"class", "u"});
  Csv sol(head);
  const Grid<N>& G = *pb.grid;
  for (std::size_t i = 0; i < G.size(); ++i) {
    if (G.classify(i) == NodeClass::exterior) continue;
    std::vector<Cell> row{static_cast<std::uint64_t>(i)};
    for (double c : G.coord(i)) row.push_back(c);
    row.push_back(std::string(G.is_interior(i) ? "interior" : "collar"));
    row.push_back(r.u[i]);
    sol.row(row);
  }
  run.dir().csv("solution.csv", sol);
  Csv log({"iteration", "increment", "residual"});
  for (const auto& it : r.log) log.row({static_cast<std::uint64_t>(it.iteration), it.increment, it.residual});
  run.dir().csv("iterations.csv", log);

  Json probes = Json::array();
  for (const auto& p : probes_or_center(s)) probes.push_back(Json{{"x", point_json(p)}, {"u", r.u.at(p)}});
  Json summary{{"scenario_hash", scenario_hash(s)},
               {"solver", kind},
               {"h", s.h},
               {"iterations", r.iterations},
               {"tol", r.tol},
               {"last_increment", r.last_increment},
               {"converged", r.converged},
               {"beta_min", pb.beta_min},
               {"probes", probes}};
  // the stopping rule bounds the sweep increment by tol, i.e. the residual by tol/ε²
  const double rtol = std::max(s.tolerances.residual, r.tol / (s.params.eps * s.params.eps));
  summary["residual_tol"] = rtol;
  if (kind == "dpp") {
    const auto res = residual(pb, assemble_rows(pb), r.u, rtol);
    summary["residual_sup"] = res.sup_norm;
    summary["classification"] = to_string(res.classification);
  } else {
    const auto [lo, hi] = pucci_residuals(pb, r.u, rtol);
    summary["pucci_min_residual"] = lo.sup_norm;
    summary["pucci_max_residual"] = hi.sup_norm;
  }
  run.dir().json("summary.json", summary);
  return run.finish(r.converged, Json{{"converged", r.converged}, {"iterations", r.iterations}});
}

// ---------------------------------------------------------------- simulate

template <std::size_t N>
int cmd_simulate(const Scenario<N>& s, const std::string& kind, const RunFlags& f) {
  CommandRun<N> run(s, f, "simulate-" + kind + "-s" + std::to_string(s.seed) + "-n" + std::to_string(s.n_paths));
  const auto probes = probes_or_center(s);
  if (kind == "value") {
    Csv t({"probe", "mean", "se", "n", "capped"});
    Json pj = Json::array();
    for (const auto& p : probes) {
      const auto e = estimate_value(p, s, s.n_paths, s.seed);
      t.row({battery::point_text(p), e.mean, e.se, static_cast<std::uint64_t>(e.n), static_cast<std::uint64_t>(e.capped)});
      pj.push_back(Json{{"x", point_json(p)}, {"mean", e.mean}, {"se", e.se}, {"n", e.n}, {"capped", e.capped}});
    }
    run.dir().csv("estimates.csv", t);
    run.dir().json("summary.json", Json{{"scenario_hash", scenario_hash(s)}, {"seed", s.seed}, {"n_paths", s.n_paths}, {"probes", pj}});
    return run.finish(true, Json{{"probes", probes.size()}});
  }
  if (kind == "exit-stats") {
    const auto r = exit_time_stats(probes.front(), s, s.n_paths, s.seed);
    Json j = battery::exit_json(r);
    j["x0"] = point_json(probes.front());
    run.dir().json("exit_time.json", j);
    Csv t({"t", "prob"});
    for (const auto& p : r.tail) t.row({p.t, p.prob});
    run.dir().csv("tail.csv", t);
    return run.finish(r.within_bounds, Json{{"mean", r.time.mean}, {"lower", r.lower}, {"upper", r.upper}});
  }
  if (kind == "hitting") {
    // target: the ball of radius diam/10 around the last probe, started from the first
    const Vec<N> c = probes.back();
    const Region<N> target({Domain<N>::ball(c, 0.1 * s.domain.diameter())});
    const Region<N> stop({s.domain});
    const auto e = hitting_prob(probes.front(), target, stop, s, s.n_paths, s.seed);
    run.dir().json("hitting.json", Json{{"x0", point_json(probes.front())},
                                        {"target_center", point_json(c)},
                                        {"target_radius", 0.1 * s.domain.diameter()},
                                        {"probability", e.mean},
                                        {"se", e.se},
                                        {"n", e.n},
                                        {"capped", e.capped}});
    return run.finish(true, Json{{"probability", e.mean}});
  }
  if (kind == "drift") {
    Csv t({"x0", "drift", "se", "lower", "upper", "verdict"});
    bool ok = true;
    for (const auto& p : probes) {
      const auto r = drift_check(p, s, s.n_paths, s.seed);
      ok = ok && r.pass;
      t.row({battery::point_text(p), r.drift.mean, r.drift.se, r.lower, r.upper, battery::yes(r.pass)});
    }
    run.dir().csv("drift.csv", t);
    return run.finish(ok, Json{{"probes", probes.size()}});
  }
  fail_validation("simulate: unknown mode '" + kind + "' (value, exit-stats, hitting, drift)");
}

// ---------------------------------------------------------------- abp

template <std::size_t N>
int cmd_abp(const Scenario<N>& s, const std::string& kind, const RunFlags& f) {
  CommandRun<N> run(s, f, "abp-" + kind);
  if (kind == "continuous") {
    const auto u = solve_dpp(s).u;
    const auto r = verify_abp(s, u);
    Csv t({"cube_center", "side", "sup_f", "rho"});
    for (const auto& c : r.cubes) t.row({battery::point_text(c.cube.center), c.cube.side, c.sup_f, c.rho});
    run.dir().csv("cubes.csv", t);
    const Json j{{"lhs", r.lhs},
                 {"exterior_sup", r.exterior_sup},
                 {"constant", r.constant},
                 {"diameter_factor", r.diameter_factor},
                 {"cube_sum", r.cube_sum},
                 {"rhs", r.rhs},
                 {"contact_nodes", r.contact_nodes},
                 {"chain_bound", r.chain_bound},
                 {"chain_pass", r.chain_pass},
                 {"worst_osc_ratio", r.worst_osc_ratio},
                 {"residual_min", r.residual_min},
                 {"pass", r.pass}};
    run.dir().json("abp.json", j);
    return run.finish(r.pass, Json{{"lhs", r.lhs}, {"rhs", r.rhs}});
  }
  if (kind == "measurable") {
    const Vec<N> x0 = probes_or_center(s).front();
    const auto r = verify_abp_measurable(s, x0, s.n_paths, s.seed);
    run.dir().json("measurable.json", Json{{"x0", point_json(x0)},
                                           {"lhs", r.lhs},
                                           {"lhs_se", r.lhs_se},
                                           {"exit_time", r.exit_time},
                                           {"f_sup", r.f_sup},
                                           {"f_ln", r.f_ln},
                                           {"ell", r.ell},
                                           {"constant", r.constant},
                                           {"diameter_factor", r.diameter_factor},
                                           {"rhs", r.rhs},
                                           {"slack", r.slack},
                                           {"capped", r.capped},
                                           {"pass", r.pass}});
    return run.finish(r.pass, Json{{"lhs", r.lhs}, {"rhs", r.rhs}, {"slack", r.slack}});
  }
  if (kind == "ln-failure-demo") {
    const auto r = ln_abp_failure_demo(s, s.n_paths, s.seed);
    run.dir().json("ln_failure.json", battery::ln_json(r));
    std::cout << r.conclusion << "\n";
    return run.finish(r.pass, Json{{"s_payoff", r.s_payoff.mean}, {"f_ln_norm", r.s_norm}});
  }
  fail_validation("abp: unknown mode '" + kind + "' (continuous, measurable, ln-failure-demo)");
}

// ---------------------------------------------------------------- holder

template <std::size_t N>
int cmd_holder(const Scenario<N>& s, const std::string& kind, const RunFlags& f) {
  CommandRun<N> run(s, f, "holder-" + kind);
  const Vec<N> c = probes_or_center(s).front();
  const auto u = solve_dpp(s).u;
  const double eps = s.params.eps;
  if (kind == "profile" || kind == "fit") {
    const double r_max = 0.92 * s.domain.depth(c);
    const auto p = oscillation_profile(u, c, r_max, eps, battery::kHolderLadder);
    Csv t({"R", "omega"});
    for (std::size_t j = 0; j < p.radius.size(); ++j) t.row({p.radius[j], p.omega[j]});
    run.dir().csv("profile.csv", t);
    if (kind == "profile") return run.finish(true, Json{{"levels", p.radius.size()}});
    const auto fit = fit_holder(p, make_problem(s).f_sup);
    const auto cert = holder_certificate(u, c, fit, eps, 1.5, 1.0, 10000, s.seed);
    Csv fitted({"R", "omega", "fitted"});
    for (std::size_t j = 0; j < p.radius.size(); ++j)
      fitted.row({p.radius[j], p.omega[j], fit.constant * fit.scale * std::pow(p.radius[j] / fit.radius, fit.gamma)});
    run.dir().csv("fit.csv", fitted);
    run.dir().json("fit.json", Json{{"gamma", fit.gamma},
                                    {"ratio_median", fit.lambda},
                                    {"ls_gamma", fit.ls_gamma},
                                    {"ls_r2", fit.ls_r2},
                                    {"C", fit.constant},
                                    {"scale", fit.scale},
                                    {"R", fit.radius},
                                    {"levels", fit.levels},
                                    {"certificate", Json{{"c_factor", 1.5},
                                                         {"pairs", cert.pairs},
                                                         {"violations", cert.violations},
                                                         {"worst_ratio", cert.worst_ratio},
                                                         {"pass", cert.pass}}}});
    return run.finish(fit.gamma > 0.0 && cert.pass, Json{{"gamma", fit.gamma}, {"certificate", cert.pass}});
  }
  if (kind == "degiorgi") {
    DeGiorgiParams prm;
    prm.k = degiorgi_k(N, s.params.lambda, prm.eps0);
    prm.R = s.domain.depth(c) / prm.k;
    const auto r = degiorgi_probe(s, u, c, prm);
    run.dir().json("degiorgi.json", Json{{"center", point_json(c)},
                                         {"R", prm.R},
                                         {"k", r.k},
                                         {"M", r.M},
                                         {"m", r.m},
                                         {"sup_R", r.sup_r},
                                         {"theta_observed", r.theta_observed},
                                         {"flipped", r.flipped},
                                         {"hypothesis_met", r.hypothesis_met},
                                         {"eta_observed", r.eta_observed},
                                         {"f_term", r.f_term}});
    return run.finish(r.hypothesis_met && r.eta_observed > 0.0, Json{{"eta_observed", r.eta_observed}});
  }
  fail_validation("holder: unknown mode '" + kind + "' (profile, fit, degiorgi)");
}

// ---------------------------------------------------------------- cz

struct CzFlags {
  int dim = 2;
  int depth = 4;
  int resolution = 0;  // generation of the cells of A; 0 means L
  double delta = 0.5;
  double delta_tilde = 0.125;
  double fill = 0.4;
};

template <std::size_t N>
Json cz_json(const DyadicSet<N>& A, const CzResult<N>& res, const CzCertificate<N>& cert, const CzParams& p) {
  Json cubes = Json::array();
  for (std::size_t i = 0; i < res.cubes.size(); ++i) {
    const auto& q = res.cubes[i];
    Json idx = Json::array();
    for (auto k : q.cube.address->index) idx.push_back(k);
    cubes.push_back(Json{{"generation", q.cube.generation},
                         {"index", idx},
                         {"rule", q.rule == CzRule::predecessor ? "predecessor" : "last_level"},
                         {"density", rational_string(cert.densities[i])}});
  }
  return Json{{"dim", N},
              {"L", p.L},
              {"delta", rational_string(exact_rational(p.delta))},
              {"delta_tilde", rational_string(exact_rational(p.delta_tilde))},
              {"cells", A.cells.size()},
              {"A", rational_string(cert.a_measure)},
              {"B", rational_string(cert.b_measure)},
              {"rhs", rational_string(cert.rhs)},
              {"disjoint", cert.disjoint},
              {"densities_ok", cert.densities_ok},
              {"inequality", cert.inequality},
              {"pass", cert.pass},
              {"cubes", cubes}};
}

template <std::size_t N>
bool cz_decompose_run(RunDir& dir, const CzFlags& c, std::uint64_t seed) {
  CzParams p{c.delta, c.delta_tilde, c.depth};
  p.validate();
  RandomStream rng(seed, 0);
  const auto A = random_dyadic_set<N>(std::max(c.depth, c.resolution), c.fill, c.delta, rng);
  const auto res = cz_decompose(A, p);
  const auto cert = cz_verify(A, res.cubes, p);
  dir.json("certificate.json", cz_json(A, res, cert, p));
  return cert.pass;
}

inline int cmd_cz(const std::string& kind, const CzFlags& c, const RunFlags& f) {
  const std::uint64_t seed = f.seed.value_or(1);
  const Json cfg{{"command", "cz-" + kind}, {"dim", c.dim}, {"L", c.depth}, {"delta", c.delta}, {"delta_tilde", c.delta_tilde},
                 {"resolution", std::max(c.depth, c.resolution)}, {"fill", c.fill}, {"seed", seed}};
  if (kind != "decompose" && kind != "fuzz") fail_validation("cz: unknown mode '" + kind + "' (decompose, fuzz)");
  if (c.dim < 1 || c.dim > 2) fail_validation("cz: --dim must be 1 or 2");
  if (c.depth < 1 || c.depth > 8) fail_validation("cz: --depth must lie in [1, 8]");
  if (c.resolution != 0 && (c.resolution < c.depth || c.resolution > 10))
    fail_validation("cz: --resolution must lie in [depth, 10]");
  RunDir dir(f.out / ("cz-" + kind + "-" + json_hash(cfg)));
  bool ok;
  if (kind == "fuzz") {
    BatteryOptions o;
    o.seed = seed;
    ok = battery::calderon_zygmund(dir, o).pass;
  } else {
    ok = c.dim == 1 ? cz_decompose_run<1>(dir, c, seed) : cz_decompose_run<2>(dir, c, seed);
  }
  write_text(dir.path() / "manifest.json", Json{{"command", "cz-" + kind}, {"config_hash", json_hash(cfg)}, {"config", cfg},
                                                {"version", kVersion}, {"seeds", Json::array({seed})},
                                                {"verdict", ok ? "PASS" : "FAIL"}, {"outputs", dir.files()}}
                                              .dump(2) + "\n");
  std::cout << "cz-" << kind << ": " << (ok ? "PASS" : "FAIL") << " -> " << dir.path().string() << "\n";
  return ok ? kExitOk : kExitVerification;
}

// ---------------------------------------------------------------- compare

struct CompareRow {
  std::vector<double> x;
  double solver = 0.0, mean = 0.0, se = 0.0, diff = 0.0, bound = 0.0;
  bool pass = false;
};

// Solver summary.json against simulate-value summary.json of the same scenario.
inline std::vector<CompareRow> compare_outputs(const Json& solver, const Json& sim) {
  for (const char* key : {"scenario_hash", "probes", "h"})
    if (!solver.contains(key)) fail_validation(std::string("compare: solver output lacks '") + key + "'");
  for (const char* key : {"scenario_hash", "probes"})
    if (!sim.contains(key)) fail_validation(std::string("compare: simulator output lacks '") + key + "'");
  if (solver.at("scenario_hash") != sim.at("scenario_hash"))
    fail_validation("compare: scenario mismatch (" + solver.at("scenario_hash").get<std::string>() + " vs " +
                    sim.at("scenario_hash").get<std::string>() + ")");
  const double h = solver.at("h").get<double>();
  std::vector<CompareRow> rows;
  for (const auto& p : sim.at("probes")) {
    CompareRow r;
    r.x = p.at("x").get<std::vector<double>>();
    bool found = false;
    for (const auto& q : solver.at("probes"))
      if (q.at("x").get<std::vector<double>>() == r.x) {
        r.solver = q.at("u").get<double>();
        found = true;
      }
    if (!found) fail_validation("compare: probe missing from the solver output");
    r.mean = p.at("mean").get<double>();
    r.se = p.at("se").get<double>();
    r.diff = std::abs(r.solver - r.mean);
    r.bound = 3.0 * r.se + kGridTolerance * h;
    r.pass = r.diff <= r.bound;
    rows.push_back(r);
  }
  return rows;
}

inline int cmd_compare(const std::filesystem::path& solver_path, const std::filesystem::path& sim_path, const RunFlags& f) {
  Json a, b;
  try {
    a = Json::parse(read_text(solver_path));
    b = Json::parse(read_text(sim_path));
  } catch (const Json::exception& e) {
    fail_validation(std::string("compare: parse failure: ") + e.what());
  }
  const auto rows = compare_outputs(a, b);
  Csv t({"probe", "solver", "mc_mean", "mc_se", "abs_diff", "bound", "verdict"});
  bool ok = true;
  for (const auto& r : rows) {
    t.row({battery::point_text(r.x.data(), r.x.size()), r.solver, r.mean, r.se, r.diff, r.bound, battery::yes(r.pass)});
    ok = ok && r.pass;
  }
  RunDir dir(f.out / ("compare-" + a.at("scenario_hash").get<std::string>()));
  dir.csv("compare.csv", t);
  std::cout << t.str();
  std::cout << "compare: " << (ok ? "PASS" : "FAIL") << " -> " << dir.path().string() << "\n";
  return ok ? kExitOk : kExitVerification;
}

// ---------------------------------------------------------------- dispatch

inline int run_scenario_command(const std::string& command, const std::string& mode, const AnyScenario& any, const RunFlags& f) {
  return std::visit(
      [&](const auto& s0) -> int {
        const auto s = apply_flags(s0, f);
        if (command == "solve") return cmd_solve(s, mode, f);
        if (command == "simulate") return cmd_simulate(s, mode, f);
        if (command == "abp") return cmd_abp(s, mode, f);
        if (command == "holder") return cmd_holder(s, mode, f);
        fail_validation("unknown command '" + command + "'");
      },
      any);
}

}  // namespace dpplab
