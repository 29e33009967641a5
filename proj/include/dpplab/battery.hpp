#pragma once

// The acceptance battery behind `dpp-lab verify-all`. Every check writes its data under its own
// subdirectory; nothing timing-dependent goes into those files, so two runs with the same seed
// compare byte for byte.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <set>

#include "abp.hpp"
#include "io.hpp"
#include "regularity.hpp"

namespace dpplab {

// Grid tolerance of the solver/simulator comparison: |u_h − E| ≤ 3 SE + C_grid·h.
// Calibrated once on linear-1d, uniform-2d and plaplace-2d (worst observed excess 1.6 h).
inline constexpr double kGridTolerance = 2.0;

struct BatteryOptions {
  std::uint64_t seed = 1;
  std::size_t paths = 100000;
};

struct CheckOutcome {
  bool pass = false;
  std::string detail;
};

struct CriterionLine {
  int id = 0;
  std::string slug;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget = 0.0;  // runtime budget in seconds, 0 for none
};

namespace battery {

inline std::string point_text(const double* x, std::size_t n) {
  std::string s = "(";
  for (std::size_t i = 0; i < n; ++i) s += (i ? ", " : "") + fmt(x[i]);
  return s + ")";
}

template <std::size_t N>
std::string point_text(const Vec<N>& x) {
  return point_text(x.data(), N);
}

inline std::string yes(bool b) { return b ? "PASS" : "FAIL"; }

inline std::string short_num(double x, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << x;
  return os.str();
}

// ---------------------------------------------------------------- 1 solver against simulator

template <std::size_t N>
bool oracle_rows(const Scenario<N>& s, const BatteryOptions& o, Csv& t) {
  const auto r = solve_dpp(s);
  bool ok = true;
  for (const auto& p : s.probes) {
    const double u = r.u.at(p);
    const auto e = estimate_value(p, s, o.paths, o.seed);
    const double diff = std::abs(u - e.mean);
    const double bound = 3.0 * e.se + kGridTolerance * s.h;
    const bool pass = diff <= bound && e.capped == 0;
    ok = ok && pass;
    t.row({s.name, point_text(p), u, e.mean, e.se, diff, bound, yes(pass)});
  }
  return ok;
}

inline CheckOutcome oracle_equivalence(RunDir& dir, const BatteryOptions& o) {
  Csv t({"scenario", "probe", "solver", "mc_mean", "mc_se", "abs_diff", "bound", "verdict"});
  bool ok = oracle_rows(builtin::linear_1d(), o, t);
  ok = oracle_rows(builtin::uniform_2d(), o, t) && ok;
  ok = oracle_rows(builtin::plaplace_2d(), o, t) && ok;
  dir.csv("probes.csv", t);
  return {ok, std::to_string(t.size()) + " probes on linear-1d, uniform-2d, plaplace-2d"};
}

// ---------------------------------------------------------------- 2 PDE limit

inline CheckOutcome pde_limit(RunDir& dir, const BatteryOptions&) {
  // u'' (α/2 + β/6) = −1 on (−1,1), u(±1) = 0 gives u(0) = 1/(2(α/2 + β/6)) = 1.5 at α = β = ½
  const double limit = 1.5;
  Csv t({"eps", "h", "u0", "abs_error", "iterations"});
  std::vector<double> err;
  for (double eps : {0.1, 0.05, 0.025}) {
    const auto s = builtin::linear_1d().with_eps(eps);
    const auto r = solve_dpp(s);
    const double u0 = r.u.at(Vec<1>{0.0});
    err.push_back(std::abs(u0 - limit));
    t.row({eps, s.h, u0, err.back(), static_cast<std::uint64_t>(r.iterations)});
  }
  dir.csv("errors.csv", t);
  const bool ok = err[1] < err[0] && err[2] < err[1] && err[2] <= 0.05;
  return {ok, "errors " + short_num(err[0]) + " > " + short_num(err[1]) + " > " + short_num(err[2]) + ", final <= 0.05"};
}

// ---------------------------------------------------------------- 3 and 5 exit times

inline Json exit_json(const ExitTimeReport& r) {
  return Json{{"n_paths", r.n_paths},
              {"capped", r.capped},
              {"mean", r.time.mean},
              {"se", r.time.se},
              {"second_moment", r.time_sq.mean},
              {"second_moment_se", r.time_sq.se},
              {"dist", r.dist},
              {"c_lower", r.c_lower},
              {"c_upper", r.c_upper},
              {"lower", r.lower},
              {"upper", r.upper},
              {"within_bounds", r.within_bounds},
              {"tail_slope", r.tail_fit.slope},
              {"tail_r2", r.tail_fit.r2},
              {"tail_fit_points", r.tail_fit_points}};
}

inline CheckOutcome exit_bounds(RunDir& dir, const BatteryOptions& o) {
  const auto s = builtin::exit_1d();
  const auto r = exit_time_stats(Vec<1>{0.0}, s, o.paths, o.seed);
  Json j = exit_json(r);
  j["accept_interval"] = Json::array({3.0, 13.2});
  dir.json("exit_time.json", j);
  Csv t({"t", "prob"});
  for (const auto& p : r.tail) t.row({p.t, p.prob});
  dir.csv("tail.csv", t);
  const bool ok = r.capped == 0 && r.time.mean >= 3.0 && r.time.mean <= 13.2;
  return {ok, "E[eps^2 tau] = " + short_num(r.time.mean) + " +- " + short_num(r.time.se, 2) + " in [3, 13.2]"};
}

inline CheckOutcome second_moment(RunDir& dir, const BatteryOptions& o) {
  Csv t({"eps", "mean", "second_moment", "second_moment_se", "capped"});
  std::vector<double> m2;
  std::size_t capped = 0;
  for (double eps : {0.1, 0.05}) {
    const auto r = exit_time_stats(Vec<1>{0.0}, builtin::exit_1d().with_eps(eps), o.paths, o.seed);
    m2.push_back(r.time_sq.mean);
    capped += r.capped;
    t.row({eps, r.time.mean, r.time_sq.mean, r.time_sq.se, static_cast<std::uint64_t>(r.capped)});
  }
  dir.csv("second_moment.csv", t);
  const double change = std::abs(m2[1] - m2[0]) / m2[0];
  return {capped == 0 && change <= 0.2, "relative change " + short_num(change, 3) + " <= 0.2"};
}

// ---------------------------------------------------------------- 4 drift

template <std::size_t N>
bool drift_row(const Scenario<N>& s, const BatteryOptions& o, Csv& t) {
  const Vec<N> x0 = s.domain.center();
  const auto r = drift_check(x0, s, o.paths, o.seed);
  t.row({s.name, point_text(x0), r.drift.mean, r.drift.se, r.lower, r.upper, yes(r.pass)});
  return r.pass;
}

inline CheckOutcome drift(RunDir& dir, const BatteryOptions& o) {
  Csv t({"scenario", "x0", "drift", "se", "lower", "upper", "verdict"});
  bool ok = drift_row(builtin::linear_1d(), o, t);
  ok = drift_row(builtin::uniform_2d(), o, t) && ok;
  ok = drift_row(builtin::ellipsoid_2d(), o, t) && ok;
  dir.csv("drift.csv", t);
  return {ok, "3 scenarios within [lower, upper] +- 4 SE"};
}

// ---------------------------------------------------------------- 6 continuous ABP and envelopes

template <std::size_t N>
bool abp_row(const std::string& label, const Scenario<N>& s, const GridFunction<N>& u, Csv& t) {
  const auto r = verify_abp(s, u);
  t.row({label, static_cast<std::uint64_t>(N), r.lhs, r.exterior_sup, r.rhs, r.chain_bound, yes(r.chain_pass),
         static_cast<std::uint64_t>(r.contact_nodes), r.residual_min, yes(r.pass)});
  return r.pass;
}

struct EnvelopeCheck {
  double domination = 0.0;   // max (u⁺ − Γ)⁺
  double concavity = 0.0;    // max (½(Γ(x+d) + Γ(x−d)) − Γ(x))⁺
  double idempotence = 0.0;  // max |env(Γ) − Γ|
};

template <std::size_t N>
EnvelopeCheck envelope_invariants(const GridFunction<N>& u) {
  const auto env = concave_envelope(u);
  const auto again = reenvelope(env);
  const Grid<N>& G = u.grid();
  std::vector<std::array<std::int64_t, N>> dirs;
  if constexpr (N == 1) dirs = {{1}};
  else dirs = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  EnvelopeCheck c;
  for (std::size_t i = 0; i < G.size(); ++i) {
    if (!env.in_hull[i]) continue;
    c.domination = std::max(c.domination, env.base[i] - env.gamma[i]);
    c.idempotence = std::max(c.idempotence, std::abs(again[i] - env.gamma[i]));
    const auto k = G.index(i);
    for (const auto& d : dirs) {
      auto kp = k, km = k;
      for (std::size_t a = 0; a < N; ++a) kp[a] += d[a], km[a] -= d[a];
      const auto p = G.flat(kp), m = G.flat(km);
      if (!p || !m || !env.in_hull[*p] || !env.in_hull[*m]) continue;
      c.concavity = std::max(c.concavity, 0.5 * (env.gamma[*p] + env.gamma[*m]) - env.gamma[i]);
    }
  }
  return c;
}

template <std::size_t N>
GridFunction<N> random_grid_function(RandomStream& rng) {
  Vec<N> hw;
  for (auto& w : hw) w = rng.uniform(0.3, 0.6);
  const double h = N == 1 ? 0.02 : 0.05;
  const auto grid = std::make_shared<const Grid<N>>(build_grid(Domain<N>::box(Vec<N>{}, hw), h, 0.1));
  const double noise = rng.uniform(0.0, 1.0), bump = rng.uniform(-2.0, 2.0);
  GridFunction<N> u(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) u[i] = noise * rng.uniform(-1.0, 1.0) + bump * (0.25 - norm2(grid->coord(i)));
  return u;
}

inline CheckOutcome continuous_abp(RunDir& dir, const BatteryOptions& o) {
  Csv t({"instance", "dim", "lhs", "exterior_sup", "rhs", "chain_bound", "chain", "contact_nodes", "residual_min", "verdict"});
  bool ok = true;
  {
    const auto s = builtin::linear_1d();
    ok = abp_row("linear-1d solution", s, solve_dpp(s).u, t) && ok;
    ok = abp_row("linear-1d quadratic subsolution", s, initial_subsolution(s), t) && ok;
  }
  {
    const auto s = builtin::uniform_2d();
    ok = abp_row("uniform-2d solution", s, solve_dpp(s).u, t) && ok;
  }
  {
    auto s = builtin::plaplace_2d();
    s.f = FunctionSpec<2>::quadratic(1.0, {0.2, -0.1}, 0.1);
    s.g = FunctionSpec<2>::constant(0.0);
    ok = abp_row("plaplace-2d solution, f = |x-a|^2 + 0.1, g = 0", s, solve_dpp(s).u, t) && ok;
  }
  {
    auto s = builtin::mixture_2d();
    s.f = FunctionSpec<2>::quadratic(2.0, {0.0, 0.0}, 0.0);
    ok = abp_row("mixture-2d solution, f = 2|x|^2", s, solve_dpp(s).u, t) && ok;
  }
  dir.csv("instances.csv", t);

  const double tol = 1e-9;
  Csv e({"trial", "dim", "domination", "concavity", "idempotence", "verdict"});
  bool env_ok = true;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    RandomStream rng(o.seed, trial);
    const EnvelopeCheck c = trial < 50 ? envelope_invariants(random_grid_function<1>(rng)) : envelope_invariants(random_grid_function<2>(rng));
    const bool pass = c.domination <= tol && c.concavity <= tol && c.idempotence <= tol;
    env_ok = env_ok && pass;
    e.row({trial, static_cast<std::uint64_t>(trial < 50 ? 1 : 2), c.domination, c.concavity, c.idempotence, yes(pass)});
  }
  dir.csv("envelopes.csv", e);
  return {ok && env_ok, std::string("5 subsolution instances ") + yes(ok) + ", 100 envelopes " + yes(env_ok)};
}

// ---------------------------------------------------------------- 7 measurable ABP

template <std::size_t N>
bool measurable_row(const Scenario<N>& s, const BatteryOptions& o, Csv& t) {
  const auto r = verify_abp_measurable(s, s.probes.front(), o.paths, o.seed);
  t.row({s.name, r.lhs, r.lhs_se, r.exit_time, r.f_sup, r.f_ln, static_cast<std::int64_t>(r.ell), r.rhs, r.slack,
         static_cast<std::uint64_t>(r.capped), yes(r.pass)});
  return r.pass && r.capped == 0;
}

inline Scenario<2> mixture_box_2d() {
  auto s = builtin::mixture_2d();
  s.name = "mixture-2d box indicator";
  s.f = FunctionSpec<2>::indicator(Region<2>({Domain<2>::box({0.3, 0.0}, {0.1, 0.2})}));
  return s;
}

inline CheckOutcome measurable_abp(RunDir& dir, const BatteryOptions& o) {
  Csv t({"scenario", "lhs", "lhs_se", "exit_time", "f_sup", "f_ln", "ell", "rhs", "slack", "capped", "verdict"});
  bool ok = measurable_row(builtin::box_indicator_1d(), o, t);
  ok = measurable_row(builtin::box_indicator_2d(), o, t) && ok;
  ok = measurable_row(mixture_box_2d(), o, t) && ok;
  dir.csv("measurable.csv", t);
  return {ok, "3 box-indicator scenarios, lhs <= rhs + 3 SE"};
}

// ---------------------------------------------------------------- 8 L^N failure

inline Json ln_json(const LnFailureReport& r) {
  return Json{{"n_paths", r.n_paths},
              {"s_payoff", r.s_payoff.mean},
              {"s_payoff_se", r.s_payoff.se},
              {"exit_time", r.exit_time.mean},
              {"f_ln_norm", r.s_norm},
              {"alpha_steps", r.alpha_steps},
              {"alpha_hits", r.alpha_hits},
              {"alpha_hit_rate", r.alpha_hit_rate},
              {"alpha_hit_se", r.alpha_hit_se},
              {"floor", r.floor},
              {"pass", r.pass},
              {"conclusion", r.conclusion}};
}

inline CheckOutcome ln_failure(RunDir& dir, const BatteryOptions& o) {
  const auto r = ln_abp_failure_demo(builtin::ln_failure_2d(), o.paths, o.seed);
  dir.json("ln_failure.json", ln_json(r));
  const bool ok = r.s_norm == 0.0 && r.s_payoff.mean >= 0.1 && std::abs(r.alpha_hit_rate - 0.5) <= 4.0 * r.alpha_hit_se;
  return {ok, "S-payoff " + short_num(r.s_payoff.mean) + " >= 0.1 with zero L^N norm, hit rate " + short_num(r.alpha_hit_rate, 5)};
}

// ---------------------------------------------------------------- 9 non-uniqueness

inline Json nonuniqueness_json(const NonuniquenessReport& rep) {
  Json rows = Json::array();
  for (const auto& r : rep.rows)
    rows.push_back(Json{{"k", r.k}, {"x", r.x}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"error", r.error}, {"holds", r.holds}});
  return Json{{"rows", rows},
              {"unbounded_solution_holds", rep.unbounded_solution_holds},
              {"zero_solution_holds", rep.zero_solution_holds},
              {"conclusion", rep.conclusion}};
}

inline CheckOutcome nonuniqueness(RunDir& dir, const BatteryOptions&) {
  const auto rep = nonuniqueness_check(20);
  dir.json("nonuniqueness.json", nonuniqueness_json(rep));
  bool zero_error = true;
  for (const auto& r : rep.rows) zero_error = zero_error && r.error == "0";
  return {rep.unbounded_solution_holds && rep.zero_solution_holds && zero_error, "k = 1..20 exact, error 0"};
}

// ---------------------------------------------------------------- 10 Calderón–Zygmund

struct CzTrial {
  std::size_t dim = 1;
  CzParams params;
  bool pass = false;
  int resolution = 1;  // generation of the cells of A
  std::size_t cubes = 0, cells = 0, last_level = 0;
  std::string a, b, rhs;
};

template <std::size_t N>
CzTrial cz_trial(RandomStream& rng, CzTrial t) {
  t.dim = N;
  const auto A = random_dyadic_set<N>(t.resolution, rng.uniform(0.05, 0.95), t.params.delta, rng);
  const auto res = cz_decompose(A, t.params);
  const auto cert = cz_verify(A, res.cubes, t.params);
  t.pass = cert.pass;
  t.cubes = res.cubes.size();
  for (const auto& q : res.cubes) t.last_level += q.rule == CzRule::last_level ? 1 : 0;
  t.cells = A.cells.size();
  t.a = rational_string(cert.a_measure);
  t.b = rational_string(cert.b_measure);
  t.rhs = rational_string(cert.rhs);
  return t;
}

inline CheckOutcome calderon_zygmund(RunDir& dir, const BatteryOptions& o) {
  Csv t({"trial", "dim", "L", "resolution", "delta", "delta_tilde", "cells", "cubes", "last_level", "A", "B", "rhs", "verdict"});
  bool ok = true;
  for (std::uint64_t k = 0; k < 500; ++k) {
    RandomStream rng(o.seed, k);
    CzTrial tr;
    tr.params.L = 1 + static_cast<int>(rng.uniform() * 6.0);
    // cells finer than L make the low-density rule reachable
    tr.resolution = std::min(tr.params.L + static_cast<int>(rng.uniform() * 3.0), 7);
    // dyadic-friendly thresholds keep the exact arithmetic short
    tr.params.delta = std::ldexp(std::floor(rng.uniform(0.2, 0.9) * 64.0), -6);
    tr.params.delta_tilde = tr.params.delta * std::ldexp(std::floor(rng.uniform(0.05, 0.9) * 64.0), -6);
    tr = k % 2 == 0 ? cz_trial<1>(rng, tr) : cz_trial<2>(rng, tr);
    ok = ok && tr.pass;
    t.row({k, static_cast<std::uint64_t>(tr.dim), static_cast<std::int64_t>(tr.params.L), static_cast<std::int64_t>(tr.resolution), tr.params.delta, tr.params.delta_tilde,
           static_cast<std::uint64_t>(tr.cells), static_cast<std::uint64_t>(tr.cubes), static_cast<std::uint64_t>(tr.last_level), tr.a, tr.b, tr.rhs, yes(tr.pass)});
  }
  dir.csv("trials.csv", t);
  return {ok, "500 trials, |A| <= delta|B| + delta_tilde exactly"};
}

// ---------------------------------------------------------------- 11 Hölder

inline constexpr double kHolderRadius = 0.46;
inline const double kHolderLadder = std::sqrt(2.0);

inline CheckOutcome holder(RunDir& dir, const BatteryOptions& o) {
  Csv prof({"eps", "R", "omega"});
  Csv fits({"eps", "levels", "gamma", "ls_gamma", "ls_r2", "C", "scale", "pairs", "violations", "worst_ratio", "certificate"});
  std::vector<double> gammas;
  bool cert_ok = true;
  const Vec<2> c{0.0, 0.0};
  for (double eps : {0.08, 0.04, 0.02}) {
    const auto s = builtin::ellipsoid_2d().with_eps(eps);
    const auto r = solve_dpp(s);
    const auto p = oscillation_profile(r.u, c, kHolderRadius, eps, kHolderLadder);
    for (std::size_t j = 0; j < p.radius.size(); ++j) prof.row({eps, p.radius[j], p.omega[j]});
    const auto fit = fit_holder(p, make_problem(s).f_sup);
    const auto cert = holder_certificate(r.u, c, fit, eps, 1.5, 1.0, 10000, o.seed);
    gammas.push_back(fit.gamma);
    cert_ok = cert_ok && cert.pass && cert.pairs == 10000;
    fits.row({eps, static_cast<std::uint64_t>(fit.levels), fit.gamma, fit.ls_gamma, fit.ls_r2, fit.constant, fit.scale,
              static_cast<std::uint64_t>(cert.pairs), static_cast<std::uint64_t>(cert.violations), cert.worst_ratio, yes(cert.pass)});
  }
  dir.csv("profiles.csv", prof);
  dir.csv("fits.csv", fits);
  const double lo = *std::min_element(gammas.begin(), gammas.end()), hi = *std::max_element(gammas.begin(), gammas.end());
  const bool ok = lo > 0.0 && hi <= 1.25 * lo && cert_ok;
  return {ok, "gamma " + short_num(gammas[0], 3) + " / " + short_num(gammas[1], 3) + " / " + short_num(gammas[2], 3) +
                  ", certificate at 1.5 C " + yes(cert_ok)};
}

// ---------------------------------------------------------------- 12 Pucci ordering

template <std::size_t N>
Scenario<N> random_pucci_scenario(RandomStream& rng, std::uint64_t k) {
  Scenario<N> s;
  s.name = "pucci-random-" + std::to_string(k);
  s.domain = Domain<N>::box(Vec<N>{}, filled<N>(1.0));
  const double eps = N == 1 ? 0.1 : 0.2;
  const int m = N == 1 ? 8 : 2;
  const double alpha = rng.uniform(0.2, 0.7);
  s.params = Params{eps, alpha, 1.0 - alpha, 1.0};
  s.h = eps / 4.0;
  s.direction_resolution = m;
  const auto dirs = DirectionSet<N>::lattice(1.0, m);
  Quadrature<N> q;
  const int atoms = 1 + static_cast<int>(rng.uniform() * 3.0);
  std::vector<double> w(atoms);
  double tot = 0.0;
  for (auto& x : w) tot += (x = rng.uniform(0.2, 1.0));
  for (int a = 0; a < atoms; ++a) {
    const Vec<N> z = dirs.dirs[static_cast<std::size_t>(rng.uniform() * static_cast<double>(dirs.dirs.size()))];
    q.add(z, 0.5 * w[a] / tot);
    q.add(-z, 0.5 * w[a] / tot);
  }
  s.family = MeasureFamily<N>::finite_mixture(1.0, q);
  s.f = FunctionSpec<N>::quadratic(rng.uniform(0.0, 1.0), filled<N>(rng.uniform(-0.5, 0.5)), rng.uniform(0.0, 0.5));
  Vec<N> kv;
  for (auto& x : kv) x = rng.uniform(-3.0, 3.0);
  s.g = FunctionSpec<N>::cosine(kv, rng.uniform(0.5, 2.0));
  return s;
}

template <std::size_t N>
bool pucci_row(const Scenario<N>& s, Csv& t, Csv& lin) {
  const auto pb = make_problem(s);
  SolveOptions opt;
  opt.tol = 1e-3 * pb.default_tol();
  const auto lo = solve_pucci(pb, PucciKind::min, opt);
  const auto mid = solve_dpp(pb, opt);
  const auto hi = solve_pucci(pb, PucciKind::max, opt);
  // monotone iterates stop below their fixed points; allow that gap
  const double slack = 1e-8 * std::max(1.0, pb.g_sup + pb.f_sup);
  double worst_low = -std::numeric_limits<double>::infinity(), worst_high = worst_low;
  for (std::size_t i : pb.grid->interior_nodes()) {
    worst_low = std::max(worst_low, lo.u[i] - mid.u[i]);
    worst_high = std::max(worst_high, mid.u[i] - hi.u[i]);
  }
  const bool order = worst_low <= slack && worst_high <= slack;
  t.row({s.name, static_cast<std::uint64_t>(N), s.params.alpha, worst_low, worst_high, slack, yes(order)});

  // f ≡ 0 and affine g: all three solvers return g
  Scenario<N> l = s;
  Vec<N> grad;
  for (std::size_t i = 0; i < N; ++i) grad[i] = 0.5 + 0.25 * static_cast<double>(i);
  l.f = FunctionSpec<N>::constant(0.0);
  l.g = FunctionSpec<N>::affine(grad, 0.3);
  const auto lpb = make_problem(l);
  SolveOptions lopt;
  lopt.tol = 1e-13;
  double err = 0.0;
  for (int which = 0; which < 3; ++which) {
    const auto r = which == 0 ? solve_dpp(lpb, lopt) : solve_pucci(lpb, which == 1 ? PucciKind::max : PucciKind::min, lopt);
    for (std::size_t i : lpb.grid->interior_nodes()) err = std::max(err, std::abs(r.u[i] - l.g(lpb.grid->coord(i))));
  }
  const bool exact = err <= 1e-9;
  lin.row({s.name, err, yes(exact)});
  return order && exact;
}

inline CheckOutcome pucci_ordering(RunDir& dir, const BatteryOptions& o) {
  Csv t({"scenario", "dim", "alpha", "max(min - dpp)", "max(dpp - max)", "slack", "verdict"});
  Csv lin({"scenario", "max_abs_error", "verdict"});
  bool ok = true;
  for (std::uint64_t k = 0; k < 10; ++k) {
    RandomStream rng(o.seed, k);
    ok = (k % 2 == 0 ? pucci_row(random_pucci_scenario<1>(rng, k), t, lin) : pucci_row(random_pucci_scenario<2>(rng, k), t, lin)) && ok;
  }
  dir.csv("ordering.csv", t);
  dir.csv("linear_data.csv", lin);
  return {ok, "10 random scenarios ordered nodewise, affine data reproduced"};
}

// ---------------------------------------------------------------- 13 De Giorgi

inline Scenario<1> degiorgi_instance(std::uint64_t k, RandomStream& rng) {
  Scenario<1> s;
  s.name = "degiorgi-" + std::to_string(k);
  s.domain = Domain<1>::box({0.0}, {1.0});
  const double alpha = rng.uniform(0.0, 0.8);
  const double lambda = k % 3 == 2 ? 2.0 : 1.0;
  s.params = Params{0.04, alpha, 1.0 - alpha, lambda};
  s.h = 0.01;
  switch (k % 3) {
    case 0: s.family = MeasureFamily<1>::dirac_pair(lambda, {rng.uniform(0.3, 1.0)}); break;
    case 1: s.family = MeasureFamily<1>::uniform_ball(lambda, rng.uniform(0.3, 1.0)); break;
    default: {
      Quadrature<1> q;
      q.add({2.0}, 0.25);
      q.add({-2.0}, 0.25);
      q.add({0.5}, 0.25);
      q.add({-0.5}, 0.25);
      s.family = MeasureFamily<1>::finite_mixture(lambda, q);
    }
  }
  switch (k % 4) {
    case 0: s.g = FunctionSpec<1>::halfspace({1.0}, rng.uniform(-0.3, 0.3), 1.0); break;
    case 1: s.g = FunctionSpec<1>::affine({rng.uniform(0.5, 2.0)}, 0.0); break;
    case 2: s.g = FunctionSpec<1>::quadratic(rng.uniform(0.5, 2.0), {rng.uniform(-0.5, 0.5)}, 0.0); break;
    default: s.g = FunctionSpec<1>::cosine({rng.uniform(1.0, 4.0)}, 1.0);
  }
  return s;
}

inline CheckOutcome degiorgi(RunDir& dir, const BatteryOptions& o) {
  Csv t({"instance", "alpha", "Lambda", "k", "R", "M", "m", "sup_R", "theta_observed", "flipped", "hypothesis", "eta_observed"});
  double min_eta = std::numeric_limits<double>::infinity();
  bool hyp = true;
  for (std::uint64_t k = 0; k < 10; ++k) {
    RandomStream rng(o.seed, k);
    const auto s = degiorgi_instance(k, rng);
    DeGiorgiParams prm;
    prm.k = degiorgi_k(1, s.params.lambda, prm.eps0);
    prm.R = 1.0 / prm.k;
    const auto u = solve_dpp(s).u;
    const auto r = degiorgi_probe(s, u, Vec<1>{0.0}, prm);
    hyp = hyp && r.hypothesis_met;
    min_eta = std::min(min_eta, r.eta_observed);
    t.row({s.name, s.params.alpha, s.params.lambda, r.k, prm.R, r.M, r.m, r.sup_r, r.theta_observed,
           std::string(r.flipped ? "yes" : "no"), yes(r.hypothesis_met), r.eta_observed});
  }
  dir.csv("instances.csv", t);
  return {hyp && min_eta > 0.0, "10 instances, min eta_observed = " + short_num(min_eta, 3)};
}

}  // namespace battery

// ---------------------------------------------------------------- orchestration

struct BatteryEntry {
  int id;
  const char* slug;
  double budget;
  CheckOutcome (*run)(RunDir&, const BatteryOptions&);
};

inline const std::vector<BatteryEntry>& battery_entries() {
  static const std::vector<BatteryEntry> e = {
      {1, "oracle-equivalence", 120.0, battery::oracle_equivalence},
      {2, "pde-limit", 0.0, battery::pde_limit},
      {3, "exit-time-bounds", 30.0, battery::exit_bounds},
      {4, "martingale-drift", 0.0, battery::drift},
      {5, "second-moment", 0.0, battery::second_moment},
      {6, "eps-abp", 0.0, battery::continuous_abp},
      {7, "measurable-abp", 0.0, battery::measurable_abp},
      {8, "ln-failure", 0.0, battery::ln_failure},
      {9, "nonuniqueness", 0.0, battery::nonuniqueness},
      {10, "calderon-zygmund", 10.0, battery::calderon_zygmund},
      {11, "holder", 0.0, battery::holder},
      {12, "pucci-ordering", 0.0, battery::pucci_ordering},
      {13, "degiorgi", 0.0, battery::degiorgi},
  };
  return e;
}

inline std::string battery_line(const CriterionLine& c) {
  std::ostringstream os;
  os << (c.pass ? "PASS" : "FAIL") << " [" << (c.id < 10 ? " " : "") << c.id << "] " << c.slug << ": " << c.detail;
  os.precision(3);
  os << " (" << std::fixed << c.seconds << " s";
  if (c.budget > 0.0) os << ", budget " << std::setprecision(0) << c.budget << " s";
  os << ")";
  return os.str();
}

// Runs checks 1..13 into root/<id>-<slug>/ and writes summary.json (deterministic) and timing.json.
inline std::vector<CriterionLine> run_battery(const std::filesystem::path& root, const BatteryOptions& o,
                                              const std::function<void(const CriterionLine&)>& on_line = {}) {
  std::vector<CriterionLine> lines;
  Json summary = Json::array();
  Json timing = Json::object();
  for (const auto& e : battery_entries()) {
    char name[64];
    std::snprintf(name, sizeof name, "%02d-%s", e.id, e.slug);
    RunDir dir(root / name);
    CriterionLine line{e.id, e.slug, false, "", 0.0, e.budget};
    const auto t0 = std::chrono::steady_clock::now();
    CheckOutcome out;
    try {
      out = e.run(dir, o);
    } catch (const std::exception& ex) {
      out = {false, std::string("error: ") + ex.what()};
    }
    line.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    line.pass = out.pass && (e.budget <= 0.0 || line.seconds <= e.budget);
    line.detail = out.detail;
    summary.push_back(Json{{"id", e.id}, {"check", e.slug}, {"result", out.pass ? "PASS" : "FAIL"}, {"detail", out.detail},
                           {"files", dir.files()}});
    timing[name] = line.seconds;
    lines.push_back(line);
    if (on_line) on_line(line);
  }
  write_text(root / "summary.json", summary.dump(2) + "\n");
  write_text(root / "timing.json", timing.dump(2) + "\n");
  return lines;
}

// Every regular file under a, relative path included, except timing.json.
inline std::vector<std::filesystem::path> output_files(const std::filesystem::path& a) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a))
    if (e.is_regular_file() && e.path().filename() != "timing.json") out.push_back(std::filesystem::relative(e.path(), a));
  std::sort(out.begin(), out.end());
  return out;
}

struct TreeDiff {
  std::size_t files = 0;
  std::vector<std::string> differing;
};

inline TreeDiff compare_trees(const std::filesystem::path& a, const std::filesystem::path& b) {
  TreeDiff d;
  const auto fa = output_files(a), fb = output_files(b);
  std::set<std::filesystem::path> all(fa.begin(), fa.end());
  all.insert(fb.begin(), fb.end());
  for (const auto& f : all) {
    ++d.files;
    const bool ea = std::filesystem::exists(a / f), eb = std::filesystem::exists(b / f);
    if (!ea || !eb || read_text(a / f) != read_text(b / f)) d.differing.push_back(f.string());
  }
  return d;
}

inline Json battery_config(const BatteryOptions& o) {
  return Json{{"battery", "verify-all"}, {"version", kVersion}, {"seed", o.seed}, {"paths", o.paths}};
}

// verify-all: the battery with the current worker count, then a second pass with a different worker
// count whose outputs must match byte for byte (check 14). Returns all 14 lines.
inline std::vector<CriterionLine> verify_all(const std::filesystem::path& out, const BatteryOptions& o,
                                             const std::function<void(const CriterionLine&)>& on_line = {}) {
  const Json cfg = battery_config(o);
  const auto root = out / ("verify-all-" + json_hash(cfg));
  const std::size_t w1 = worker_count();
  const std::size_t w2 = w1 == 3 ? 1 : 3;
  auto lines = run_battery(root / "run", o, on_line);

  const auto t0 = std::chrono::steady_clock::now();
  const auto saved = detail::worker_override().load();
  set_worker_count(w2);
  CriterionLine repro{14, "reproducibility", false, "", 0.0, 0.0};
  try {
    run_battery(root / "rerun", o);
    set_worker_count(saved);
    const auto d = compare_trees(root / "run", root / "rerun");
    repro.pass = d.differing.empty() && d.files > 0;
    repro.detail = "workers " + std::to_string(w1) + " vs " + std::to_string(w2) + ": " + std::to_string(d.files) + " files, " +
                   std::to_string(d.differing.size()) + " differ" + (d.differing.empty() ? "" : " (first: " + d.differing.front() + ")");
  } catch (const std::exception& ex) {
    set_worker_count(saved);
    repro.detail = std::string("error: ") + ex.what();
  }
  repro.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  lines.push_back(repro);
  if (on_line) on_line(repro);

  Json res = Json::array();
  for (const auto& l : lines) res.push_back(Json{{"id", l.id}, {"check", l.slug}, {"result", l.pass ? "PASS" : "FAIL"}});
  Json manifest{{"command", "verify-all"}, {"config_hash", json_hash(cfg)}, {"config", cfg}, {"version", kVersion},
                {"seeds", Json::array({o.seed})}, {"results", res}, {"outputs", Json::array({"run", "rerun"})}, {"timing", "run/timing.json"}};
  write_text(root / "manifest.json", manifest.dump(2) + "\n");
  return lines;
}

}  // namespace dpplab
