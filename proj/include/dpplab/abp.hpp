#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "dpp.hpp"
#include "hull.hpp"
#include "walker.hpp"

namespace dpplab {

template <std::size_t N>
struct Envelope {
  GridFunction<N> base;              // u⁺ = max(u, sup over the exterior collar)
  GridFunction<N> gamma;             // Γ; pinned to the exterior sup off the hull domain
  std::vector<char> in_hull;         // node lies in Ω ∪ {dist < Λε}
  std::vector<Vec<N>> slope;         // supporting slope ξ at hull nodes
  double exterior_sup = 0.0;
  double osc = 0.0;                  // osc of u⁺ over the hull domain
  std::size_t hull_nodes = 0;
};

namespace detail {

template <std::size_t N>
void hull_1d(const Grid<N>& G, const std::vector<char>& in, const std::vector<double>& v, std::vector<double>& gam,
             std::vector<Vec<N>>& slope) {
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < G.size(); ++i)
    if (in[i]) nodes.push_back(i);  // flat order is coordinate order in 1D
  std::vector<std::size_t> hull;
  for (std::size_t i : nodes) {
    while (hull.size() >= 2) {
      const auto a = hull[hull.size() - 2], b = hull.back();
      const double ya = G.coord(a)[0], yb = G.coord(b)[0], yi = G.coord(i)[0];
      const double cross = (yb - ya) * (v[i] - v[a]) - (v[b] - v[a]) * (yi - ya);
      if (cross >= 0.0) hull.pop_back();
      else break;
    }
    hull.push_back(i);
  }
  std::size_t k = 0;
  for (std::size_t i : nodes) {
    const double x = G.coord(i)[0];
    while (k + 1 < hull.size() && G.coord(hull[k + 1])[0] < x) ++k;
    if (hull.size() == 1) {
      gam[i] = v[hull[0]];
      slope[i] = Vec<N>{};
      continue;
    }
    const std::size_t a = hull[std::min(k, hull.size() - 2)], b = hull[std::min(k, hull.size() - 2) + 1];
    const double ya = G.coord(a)[0], yb = G.coord(b)[0];
    const double sl = (v[b] - v[a]) / (yb - ya);
    if (i == a) gam[i] = v[a];
    else if (i == b) gam[i] = v[b];
    else gam[i] = v[a] + sl * (x - ya);
    // supporting slope: the hull segment ending at or containing x (the first segment at the left end)
    slope[i] = Vec<N>{sl};
  }
}

// lifted lattice points (integer index, value) go through the exact 3D upper hull
template <std::size_t N>
void hull_2d(const Grid<N>& G, const std::vector<char>& in, const std::vector<double>& v, std::vector<double>& gam,
             std::vector<Vec<N>>& slope) {
  std::vector<hull::Lifted> pts;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < G.size(); ++i) {
    if (!in[i]) continue;
    const auto k = G.index(i);
    pts.push_back({k[0], k[1], v[i]});
    where.push_back(i);
  }
  const auto planes = hull::upper_envelope(pts);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    gam[where[k]] = planes[k].value;
    slope[where[k]] = Vec<N>{planes[k].sa / G.h(), planes[k].sb / G.h()};
  }
}

template <std::size_t N>
void run_hull(const Grid<N>& G, const std::vector<char>& in, const std::vector<double>& v, std::vector<double>& gam,
              std::vector<Vec<N>>& slope) {
  if constexpr (N == 1) {
    hull_1d(G, in, v, gam, slope);
  } else if constexpr (N == 2) {
    hull_2d(G, in, v, gam, slope);
  } else {
    fail_validation("concave_envelope: dimension > 2 is not supported");
  }
}

}  // namespace detail

// Concave envelope of u⁺ over the nodes of Ω ∪ {dist < Λε}, exact in 1D and 2D.
template <std::size_t N>
Envelope<N> concave_envelope(const GridFunction<N>& u) {
  if constexpr (N > 2) fail_validation("concave_envelope: dimension > 2 is not supported");
  const Grid<N>& G = u.grid();
  Envelope<N> env;
  env.in_hull.assign(G.size(), 0);
  env.exterior_sup = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < G.size(); ++i) {
    if (G.is_interior(i)) env.in_hull[i] = 1;
    else if (G.in_physical_collar(i)) {
      env.in_hull[i] = 1;
      env.exterior_sup = std::max(env.exterior_sup, u[i]);
    }
  }
  if (!std::isfinite(env.exterior_sup)) fail_validation("concave_envelope: grid has no exterior collar node");
  env.base = GridFunction<N>(u.grid_ptr(), env.exterior_sup);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < G.size(); ++i) {
    if (!env.in_hull[i]) continue;
    ++env.hull_nodes;
    env.base[i] = std::max(u[i], env.exterior_sup);
    if (!std::isfinite(env.base[i])) fail_validation("concave_envelope: u must be finite");
    lo = std::min(lo, env.base[i]);
    hi = std::max(hi, env.base[i]);
  }
  env.osc = hi - lo;
  env.gamma = GridFunction<N>(u.grid_ptr(), env.exterior_sup);
  env.slope.assign(G.size(), Vec<N>{});
  detail::run_hull(G, env.in_hull, env.base.values(), env.gamma.values(), env.slope);
  return env;
}

// Envelope of Γ itself (idempotence check).
template <std::size_t N>
GridFunction<N> reenvelope(const Envelope<N>& env) {
  GridFunction<N> out(env.gamma.grid_ptr(), env.exterior_sup);
  std::vector<Vec<N>> slope(env.gamma.size());
  detail::run_hull(env.gamma.grid(), env.in_hull, env.gamma.values(), out.values(), slope);
  return out;
}

struct ContactSet {
  std::vector<std::size_t> nodes;
  double tol = 0.0;
};

// Nodes of the closed domain where u⁺ ≥ Γ − tol.
template <std::size_t N>
ContactSet contact_set(const Envelope<N>& env, double tol_contact = -1.0) {
  const Grid<N>& G = env.gamma.grid();
  ContactSet cs;
  cs.tol = tol_contact >= 0.0 ? tol_contact : 1e-8 * env.osc;
  for (std::size_t i = 0; i < G.size(); ++i) {
    if (!env.in_hull[i]) continue;
    if (!(G.is_interior(i) || G.domain().distance(G.coord(i)) == 0.0)) continue;
    if (env.base[i] >= env.gamma[i] - cs.tol) cs.nodes.push_back(i);
  }
  return cs;
}

// ρ = (2/ε)·osc_{y ∈ B_{ε/2}} {Γ(x) − Γ(x+y) + ⟨ξ, y⟩}, over hull nodes in the closed ball.
template <std::size_t N>
double superdiff_bound(const Envelope<N>& env, std::size_t node, double eps) {
  const Grid<N>& G = env.gamma.grid();
  const Vec<N> x = G.coord(node);
  const Vec<N>& xi = env.slope[node];
  const auto r = static_cast<std::int64_t>(std::floor(0.5 * eps / G.h() + 1e-9));
  const auto k0 = G.index(node);
  std::array<std::int64_t, N> lo, hi;
  for (std::size_t i = 0; i < N; ++i) lo[i] = k0[i] - r, hi[i] = k0[i] + r;
  double mn = std::numeric_limits<double>::infinity(), mx = -mn;
  detail::enumerate_box<N>(lo, hi, [&](const auto& k) {
    std::int64_t d2 = 0;
    for (std::size_t i = 0; i < N; ++i) d2 += (k[i] - k0[i]) * (k[i] - k0[i]);
    if (static_cast<double>(d2) * G.h() * G.h() > 0.25 * eps * eps * (1.0 + 1e-12)) return;
    const auto f = G.flat(k);
    if (!f) throw LabError(ErrorKind::numerical, "superdiff_bound: stencil escape");
    if (!env.in_hull[*f]) throw LabError(ErrorKind::numerical, "superdiff_bound: ball leaves the hull domain");
    const Vec<N> y = G.coord(*f) - x;
    const double v = env.gamma[node] - env.gamma[*f] + dot(xi, y);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  });
  return 2.0 / eps * (mx - mn);
}

// Same quantity for a function given by formula, sampled on a lattice of spacing ε/128 in the closed ball.
template <std::size_t N, class F>
double superdiff_bound(F&& gamma, const Vec<N>& x, const Vec<N>& xi, double eps) {
  const double r = 0.5 * eps;
  const std::int64_t m = 64;
  std::array<std::int64_t, N> lo, hi;
  lo.fill(-m);
  hi.fill(m);
  const double gx = gamma(x);
  double mn = std::numeric_limits<double>::infinity(), mx = -mn;
  detail::enumerate_box<N>(lo, hi, [&](const auto& k) {
    Vec<N> y;
    for (std::size_t i = 0; i < N; ++i) y[i] = r * static_cast<double>(k[i]) / m;
    if (norm2(y) > r * r * (1.0 + 1e-12)) return;
    const double v = gx - gamma(x + y) + dot(xi, y);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  });
  return 2.0 / eps * (mx - mn);
}

template <std::size_t N>
struct CubeTerm {
  Cube<N> cube;
  double sup_f = 0.0;   // sup over the cube (within the closed domain) of f⁺
  double rho = 0.0;     // superdifferential bound at a contact node in the cube
};

template <std::size_t N>
struct AbpReport {
  double lhs = 0.0;              // sup_Ω u
  double exterior_sup = 0.0;
  double constant = 0.0;         // 2^{N+3}/β
  double diameter_factor = 0.0;  // diam Ω + Λε
  double cube_sum = 0.0;         // (Σ_Q (sup_Q f⁺)^N)^{1/N}
  double eps = 0.0;
  double rhs = 0.0;
  bool pass = false;
  std::size_t contact_nodes = 0;
  std::vector<CubeTerm<N>> cubes;
  // chain through the gradient image: sup u − sup_ext ≤ (diam + Λε)(Σ_Q ρ_Q^N)^{1/N}
  double chain_bound = 0.0;
  bool chain_pass = false;
  // tangent-plane oscillation at contact nodes against (2^{N+2}/β) f(x0) ε²
  double worst_osc_ratio = 0.0;
  double residual_min = 0.0;

  double recompute_rhs() const { return exterior_sup + constant * diameter_factor * cube_sum * eps; }
};

namespace detail {

template <std::size_t N>
double cube_sup(const FunctionSpec<N>& f, const Domain<N>& dom, const Cube<N>& q, const std::vector<Vec<N>>& extra) {
  constexpr std::int64_t m = 16;  // 17 points per axis
  std::array<std::int64_t, N> lo, hi;
  lo.fill(0);
  hi.fill(m);
  double s = 0.0;
  enumerate_box<N>(lo, hi, [&](const auto& k) {
    Vec<N> y;
    for (std::size_t i = 0; i < N; ++i) y[i] = q.center[i] - 0.5 * q.side + q.side * static_cast<double>(k[i]) / m;
    if (dom.distance(y) > 0.0) return;
    s = std::max(s, f(y));
  });
  for (const auto& y : extra) s = std::max(s, f(y));
  return s;
}

}  // namespace detail

// Checks sup_Ω u ≤ sup_ext u + (2^{N+3}/β)(diam Ω + Λε)(Σ_Q (sup_Q f⁺)^N)^{1/N} ε for a subsolution u.
template <std::size_t N>
AbpReport<N> verify_abp(const Scenario<N>& scn, const GridFunction<N>& u) {
  const Problem<N> pb = make_problem(scn);
  if (u.grid().size() != pb.grid->size() || u.grid().h() != pb.grid->h()) fail_validation("verify_abp: u is not on the scenario grid");
  const double tol = scn.tolerances.residual;
  const auto res = residual(pb, assemble_rows(pb), u, tol);
  if (!res.is_sub()) {
    std::ostringstream os;
    os << "verify_abp: u is not a subsolution (min residual " << res.min << " < -" << tol << ")";
    fail_validation(os.str());
  }
  const Grid<N>& G = u.grid();
  AbpReport<N> rep;
  rep.residual_min = res.min;
  const auto env = concave_envelope(u);
  const double tol_c = scn.tolerances.contact > 0.0 ? scn.tolerances.contact : -1.0;
  const auto cs = contact_set(env, tol_c);
  rep.contact_nodes = cs.nodes.size();
  rep.lhs = -std::numeric_limits<double>::infinity();
  for (std::size_t i : G.interior_nodes()) rep.lhs = std::max(rep.lhs, u[i]);
  rep.exterior_sup = env.exterior_sup;
  rep.constant = std::ldexp(1.0, N + 3) / pb.beta_min;
  rep.diameter_factor = scn.domain.diameter() + scn.lambda_eps();
  rep.eps = scn.params.eps;

  std::vector<Vec<N>> pts;
  for (std::size_t i : cs.nodes) pts.push_back(G.coord(i));
  const auto cubes = eps_cover(pts, rep.eps);
  rep.cubes.resize(cubes.size());
  parallel_for(cubes.size(), [&](std::size_t c) {
    std::vector<Vec<N>> inside;
    double rho = 0.0;
    for (std::size_t k = 0; k < cs.nodes.size(); ++k) {
      if (cubes[c].closure_contains(pts[k])) {
        inside.push_back(pts[k]);
        rho = std::max(rho, superdiff_bound(env, cs.nodes[k], rep.eps));
      }
    }
    rep.cubes[c] = CubeTerm<N>{cubes[c], detail::cube_sup(scn.f, scn.domain, cubes[c], inside), rho};
  });
  std::vector<double> fp(cubes.size()), rp(cubes.size());
  for (std::size_t c = 0; c < cubes.size(); ++c) {
    fp[c] = std::pow(rep.cubes[c].sup_f, static_cast<double>(N));
    rp[c] = std::pow(rep.cubes[c].rho, static_cast<double>(N));
  }
  rep.cube_sum = std::pow(tree_sum(fp), 1.0 / N);
  rep.rhs = rep.recompute_rhs();
  rep.pass = rep.lhs <= rep.rhs + 1e-9;
  rep.chain_bound = rep.diameter_factor * std::pow(tree_sum(rp), 1.0 / N);
  rep.chain_pass = rep.lhs - rep.exterior_sup <= rep.chain_bound + 1e-9;
  // tangent-plane oscillation at interior contact nodes
  const double e2 = rep.eps * rep.eps;
  for (std::size_t i : cs.nodes) {
    if (!G.is_interior(i)) continue;
    const double osc = superdiff_bound(env, i, rep.eps) * rep.eps / 2.0;
    const double bound = std::ldexp(1.0, N + 2) / pb.beta_min * std::max(0.0, pb.f[i]) * e2;
    if (bound > 0.0) rep.worst_osc_ratio = std::max(rep.worst_osc_ratio, osc / bound);
  }
  return rep;
}

// f̃(x) = ball average of f over B_ε(x), f extended by 0 outside Ω, at every grid node.
template <std::size_t N>
GridFunction<N> mollify_f(const FunctionSpec<N>& f, const Domain<N>& dom, const std::shared_ptr<const Grid<N>>& grid, double eps) {
  const auto rule = ball_rule<N>(eps, grid->h());
  GridFunction<N> out(grid);
  parallel_for(grid->size(), [&](std::size_t i) {
    const Vec<N> x = grid->coord(i);
    double s = 0.0;
    for (std::size_t k = 0; k < rule.offset.size(); ++k) {
      const Vec<N> y = x + rule.offset[k];
      if (dom.contains(y)) s += rule.weight[k] * f(y);
    }
    out[i] = s;
  });
  return out;
}

// Grid-function form: values at non-interior nodes count as 0, off-grid points interpolate.
template <std::size_t N>
GridFunction<N> mollify_f(const GridFunction<N>& f, double eps) {
  const Grid<N>& G = f.grid();
  GridFunction<N> ext(f.grid_ptr());
  for (std::size_t i = 0; i < G.size(); ++i) ext[i] = G.is_interior(i) ? f[i] : 0.0;
  const auto rule = ball_rule<N>(eps, G.h());
  GridFunction<N> out(f.grid_ptr());
  parallel_for(G.size(), [&](std::size_t i) {
    const Vec<N> x = G.coord(i);
    double s = 0.0;
    for (std::size_t k = 0; k < rule.offset.size(); ++k) {
      const Vec<N> y = x + rule.offset[k];
      const auto st = G.stencil_if_inside(y);
      if (!st) continue;
      for (std::size_t j = 0; j < st->size; ++j) s += rule.weight[k] * st->weight[j] * ext[st->node[j]];
    }
    out[i] = s;
  });
  return out;
}

// ℓ: the odd integer with ℓ − 2 < 9√N ≤ ℓ
inline int cover_multiplier(std::size_t n) {
  const double t = 9.0 * std::sqrt(static_cast<double>(n));
  int l = static_cast<int>(std::ceil(t - 1e-12));
  if (l % 2 == 0) ++l;
  return l;
}

struct MeasurableAbpReport {
  double lhs = 0.0, lhs_se = 0.0;        // E^x[ε²Σ f(X_i)] with g = 0
  double exit_time = 0.0;                // E^x[ε²τ] from the same paths
  double f_sup = 0.0, f_ln = 0.0;        // ‖f‖_∞, ‖f‖_N
  int ell = 0;
  double constant = 0.0;                 // 2^{N+3} ℓ / |B_1|^{1/N}
  double diameter_factor = 0.0;
  double rhs = 0.0;
  double slack = 0.0;                    // rhs + 3 SE − lhs
  bool pass = false;
  std::size_t capped = 0;
};

template <std::size_t N>
MeasurableAbpReport verify_abp_measurable(const Scenario<N>& scn_in, const Vec<N>& x0, std::size_t n_paths, std::uint64_t seed) {
  Scenario<N> scn = scn_in;
  scn.g = FunctionSpec<N>::constant(0.0);
  const auto ln = scn.f.ln_norm(scn.domain);
  if (!ln) fail_validation("verify_abp_measurable: L^N norm of f is not known exactly");
  const double eps = scn.params.eps;
  const auto paths = detail::run_batch(x0, scn, n_paths, seed, default_step_cap(eps));
  std::vector<double> pay, t;
  MeasurableAbpReport r;
  for (const auto& p : paths) {
    if (p.capped) {
      ++r.capped;
      continue;
    }
    pay.push_back(p.payoff);
    t.push_back(eps * eps * static_cast<double>(p.tau));
  }
  const auto mp = moments(pay);
  r.lhs = mp.mean;
  r.lhs_se = mp.se;
  r.exit_time = moments(t).mean;
  const auto fs = scn.f.sup_abs();
  if (!fs) fail_validation("verify_abp_measurable: sup of |f| is not known exactly");
  r.f_sup = *fs;
  r.f_ln = *ln;
  r.ell = cover_multiplier(N);
  r.constant = std::ldexp(1.0, N + 3) * r.ell / std::pow(unit_ball_volume(N), 1.0 / N);
  r.diameter_factor = scn.domain.diameter() + scn.lambda_eps();
  r.rhs = (eps * eps + scn.params.alpha * r.exit_time) * r.f_sup + r.constant * r.diameter_factor * r.f_ln;
  r.slack = r.rhs + 3.0 * r.lhs_se - r.lhs;
  r.pass = r.lhs <= r.rhs + 3.0 * r.lhs_se;
  return r;
}

}  // namespace dpplab
