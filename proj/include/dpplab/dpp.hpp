#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "parallel.hpp"
#include "scenario.hpp"

namespace dpplab {

// ---------------------------------------------------------------- ball quadrature

// Symmetric quadrature for the ball average over B_ε(x). Offsets y are relative to x.
template <std::size_t N>
struct BallRule {
  std::vector<Vec<N>> offset;
  std::vector<double> weight;
  std::vector<std::array<std::int64_t, N>> lattice;  // offset / h when the rule sits on grid nodes
  bool on_nodes = false;
};

// For ε ≥ 2h: lattice offsets hk whose cells meet B_ε, weighted by the covered cell fraction
// (16^N sub-samples per boundary cell), with the boundary-cell weights rescaled so that the
// second moment equals ε²N/(N+2) exactly. For ε < 2h: the (2N+1)-point stencil {0, ±εe_i}.
template <std::size_t N>
BallRule<N> ball_rule(double eps, double h) {
  BallRule<N> r;
  if (eps < 2.0 * h) {
    r.offset.push_back(Vec<N>{});
    r.weight.push_back(2.0 / (N + 2.0));
    for (std::size_t i = 0; i < N; ++i) {
      for (double s : {1.0, -1.0}) {
        r.offset.push_back((s * eps) * unit<N>(i));
        r.weight.push_back(1.0 / (2.0 * (N + 2.0)));
      }
    }
    return r;
  }
  r.on_nodes = true;
  const auto K = static_cast<std::int64_t>(std::ceil(eps / h + 0.5));
  std::array<std::int64_t, N> lo, hi;
  lo.fill(-K);
  hi.fill(K);
  constexpr int sub = 16;
  std::vector<double> frac;
  std::vector<char> full;
  detail::enumerate_box<N>(lo, hi, [&](const auto& k) {
    // corner test: cell entirely inside the open ball
    double far2 = 0.0, near2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double a = std::abs(static_cast<double>(k[i])) * h;
      far2 += (a + 0.5 * h) * (a + 0.5 * h);
      const double nd = std::max(0.0, a - 0.5 * h);
      near2 += nd * nd;
    }
    if (near2 >= eps * eps) return;
    Vec<N> y;
    for (std::size_t i = 0; i < N; ++i) y[i] = static_cast<double>(k[i]) * h;
    double w;
    bool is_full = far2 < eps * eps;
    if (is_full) {
      w = 1.0;
    } else {
      std::array<std::int64_t, N> slo, shi;
      slo.fill(0);
      shi.fill(sub - 1);
      std::size_t in = 0, tot = 0;
      detail::enumerate_box<N>(slo, shi, [&](const auto& s) {
        Vec<N> p;
        for (std::size_t i = 0; i < N; ++i) p[i] = y[i] + h * (-0.5 + (static_cast<double>(s[i]) + 0.5) / sub);
        ++tot;
        if (norm2(p) < eps * eps) ++in;
      });
      w = static_cast<double>(in) / static_cast<double>(tot);
      if (w == 0.0) return;
    }
    r.offset.push_back(y);
    r.lattice.push_back(k);
    frac.push_back(w);
    full.push_back(is_full ? 1 : 0);
  });
  const double target = eps * eps * N / (N + 2.0);
  double af = 0, wf = 0, ap = 0, wp = 0;
  for (std::size_t i = 0; i < frac.size(); ++i) {
    const double y2 = norm2(r.offset[i]);
    if (full[i]) af += y2, wf += 1.0;
    else ap += frac[i] * y2, wp += frac[i];
  }
  const double denom = ap - target * wp;
  const double s = denom != 0.0 ? (target * wf - af) / denom : -1.0;
  if (s > 0.0 && std::isfinite(s))
    for (std::size_t i = 0; i < frac.size(); ++i)
      if (!full[i]) frac[i] *= s;
  double tot = 0.0;
  for (double w : frac) tot += w;
  for (double w : frac) r.weight.push_back(w / tot);
  return r;
}

template <std::size_t N>
double ball_average(const GridFunction<N>& u, const Vec<N>& x, double eps) {
  const auto rule = ball_rule<N>(eps, u.grid().h());
  double s = 0.0;
  for (std::size_t i = 0; i < rule.offset.size(); ++i) s += rule.weight[i] * u.at(x + rule.offset[i]);
  return s;
}

// ---------------------------------------------------------------- point operators

template <std::size_t N>
double apply_L(const GridFunction<N>& u, const MeasureFamily<N>& fam, const Params& p, const Vec<N>& x) {
  const double e = fam.expect(x, p.eps, [&](const Vec<N>& y) { return u.at(y); });
  const double b = ball_average(u, x, p.eps);
  return (p.alpha * e + p.beta * b - u.at(x)) / (p.eps * p.eps);
}

// (1/2ε²)(α∫δu(x,εz)dν + β⨍δu(x,y)dy), δu(x,y) = u(x+y)+u(x−y)−2u(x)
template <std::size_t N>
double apply_L_second_difference(const GridFunction<N>& u, const MeasureFamily<N>& fam, const Params& p, const Vec<N>& x) {
  const double ux = u.at(x);
  const auto q = fam.quadrature(x);
  double a = 0.0;
  for (std::size_t i = 0; i < q.z.size(); ++i) {
    const Vec<N> y = p.eps * q.z[i];
    a += q.w[i] * (u.at(x + y) + u.at(x - y) - 2.0 * ux);
  }
  const auto rule = ball_rule<N>(p.eps, u.grid().h());
  double b = 0.0;
  for (std::size_t i = 0; i < rule.offset.size(); ++i)
    b += rule.weight[i] * (u.at(x + rule.offset[i]) + u.at(x - rule.offset[i]) - 2.0 * ux);
  return (p.alpha * a + p.beta * b) / (2.0 * p.eps * p.eps);
}

template <std::size_t N>
double apply_L_pucci(const GridFunction<N>& u, const DirectionSet<N>& dirs, const Params& p, const Vec<N>& x, Extremum sign) {
  const double ext = pucci_extreme(dirs, x, p.eps, u, sign).value;
  const double b = ball_average(u, x, p.eps) - u.at(x);
  return (p.alpha * ext + p.beta * b) / (p.eps * p.eps);
}

// ---------------------------------------------------------------- discrete problem

// Scenario data sampled on its grid.
template <std::size_t N>
struct Problem {
  std::shared_ptr<const Grid<N>> grid;
  Scenario<N> scn;
  GridFunction<N> f;          // source at nodes
  GridFunction<N> g;          // boundary datum at non-interior nodes
  std::vector<double> beta;   // β per interior node (constant unless scn.beta_field)
  double f_sup = 0.0;         // max |f| over interior nodes
  double g_sup = 0.0;         // max |g| over collar nodes
  double beta_min = 1.0;      // β⁻

  double default_tol() const {
    const double d = grid->domain().diameter();
    return 1e-10 * std::max(1.0, g_sup + d * d * f_sup);
  }
};

template <std::size_t N>
Problem<N> make_problem(const Scenario<N>& scn) {
  scn.validate();
  Problem<N> pb;
  pb.scn = scn;
  pb.grid = std::make_shared<const Grid<N>>(build_grid(scn.domain, scn.h, scn.lambda_eps()));
  const Grid<N>& G = *pb.grid;
  pb.f = GridFunction<N>(pb.grid);
  pb.g = GridFunction<N>(pb.grid);
  for (std::size_t i = 0; i < G.size(); ++i) {
    const Vec<N> x = G.coord(i);
    if (G.is_interior(i)) {
      pb.f[i] = scn.f(x);
      if (!std::isfinite(pb.f[i])) fail_validation("f: non-finite value at an interior node");
      pb.f_sup = std::max(pb.f_sup, std::abs(pb.f[i]));
    } else {
      pb.g[i] = scn.g(x);
      if (!std::isfinite(pb.g[i])) fail_validation("g: non-finite value at a collar node");
      if (G.classify(i) == NodeClass::collar) pb.g_sup = std::max(pb.g_sup, std::abs(pb.g[i]));
    }
  }
  const auto& in = G.interior_nodes();
  pb.beta.assign(in.size(), scn.params.beta);
  if (scn.beta_field) {
    for (std::size_t r = 0; r < in.size(); ++r) {
      const double b = (*scn.beta_field)(G.coord(in[r]));
      if (!(b > 0.0 && b <= 1.0)) fail_validation("beta_field: values must lie in (0, 1]");
      pb.beta[r] = b;
    }
  }
  pb.beta_min = *std::min_element(pb.beta.begin(), pb.beta.end());
  return pb;
}

// Sparse rows: u_new(x_r) = Σ w u(col) for interior node r.
struct SparseRows {
  std::vector<std::size_t> start{0};
  std::vector<std::uint32_t> col;
  std::vector<double> w;
  std::size_t rows() const { return start.size() - 1; }
};

namespace detail {

struct RelEntry {
  std::int64_t offset;
  double w;
};

// interpolation stencil of x + y for a node x, as flat-index offsets (node independent)
template <std::size_t N>
std::vector<RelEntry> relative_stencil(const Grid<N>& G, const Vec<N>& y) {
  std::vector<RelEntry> out;
  std::array<std::int64_t, N> base;
  std::array<double, N> t;
  for (std::size_t i = 0; i < N; ++i) {
    const double s = y[i] / G.h();
    double fl = std::floor(s), fr = s - fl;
    if (fr < 1e-12) fr = 0.0;
    if (fr > 1.0 - 1e-12) fr = 0.0, fl += 1.0;
    base[i] = static_cast<std::int64_t>(fl);
    t[i] = fr;
  }
  for (std::size_t bits = 0; bits < (std::size_t{1} << N); ++bits) {
    double w = 1.0;
    std::int64_t off = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const bool up = (bits >> i) & 1u;
      w *= up ? t[i] : 1.0 - t[i];
      off += (base[i] + (up ? 1 : 0)) * static_cast<std::int64_t>(G.strides()[i]);
    }
    if (w > 0.0) out.push_back({off, w});
  }
  return out;
}

inline void merge_row(std::vector<std::pair<std::uint32_t, double>>& e) {
  std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t k = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (k > 0 && e[k - 1].first == e[i].first)
      e[k - 1].second += e[i].second;
    else
      e[k++] = e[i];
  }
  e.resize(k);
}

template <std::size_t N>
std::vector<RelEntry> relative_ball(const Grid<N>& G, const BallRule<N>& rule) {
  std::vector<RelEntry> out;
  for (std::size_t i = 0; i < rule.offset.size(); ++i) {
    if (rule.on_nodes) {
      std::int64_t off = 0;
      for (std::size_t d = 0; d < N; ++d) off += rule.lattice[i][d] * static_cast<std::int64_t>(G.strides()[d]);
      out.push_back({off, rule.weight[i]});
    } else {
      for (const auto& e : relative_stencil(G, rule.offset[i])) out.push_back({e.offset, rule.weight[i] * e.w});
    }
  }
  return out;
}

}  // namespace detail

// Rows of the linear DPP map u ↦ α∫u(x+εz)dν_x + β⨍_{B_ε(x)}u. With include_alpha = false only
// the β ball-average part is assembled (Pucci solvers add their α term themselves).
template <std::size_t N>
SparseRows assemble_rows(const Problem<N>& pb, bool include_alpha = true) {
  const Grid<N>& G = *pb.grid;
  const auto& in = G.interior_nodes();
  const double eps = pb.scn.params.eps;
  const auto ball = detail::relative_ball(G, ball_rule<N>(eps, G.h()));
  const bool alpha_part = include_alpha && pb.scn.params.alpha > 0.0;
  if (alpha_part && pb.scn.family.is_pucci()) fail_validation("linear DPP: pucci-control family needs solve_pucci");
  std::vector<detail::RelEntry> alpha_rel;
  const bool constant = pb.scn.family.is_constant();
  if (alpha_part && constant) {
    const auto q = pb.scn.family.quadrature(Vec<N>{});
    for (std::size_t i = 0; i < q.z.size(); ++i)
      for (const auto& e : detail::relative_stencil(G, eps * q.z[i])) alpha_rel.push_back({e.offset, q.w[i] * e.w});
  }
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(in.size());
  parallel_for(in.size(), [&](std::size_t r) {
    const std::size_t node = in[r];
    const double beta = pb.beta[r], alpha = 1.0 - beta;
    auto& e = rows[r];
    const auto place = [&](std::int64_t off, double w) {
      const std::int64_t c = static_cast<std::int64_t>(node) + off;
      if (c < 0 || c >= static_cast<std::int64_t>(G.size())) throw LabError(ErrorKind::numerical, "stencil escape");
      e.emplace_back(static_cast<std::uint32_t>(c), w);
    };
    for (const auto& b : ball) place(b.offset, beta * b.w);
    if (alpha_part) {
      if (constant) {
        for (const auto& a : alpha_rel) place(a.offset, alpha * a.w);
      } else {
        const Vec<N> x = G.coord(node);
        const auto q = pb.scn.family.quadrature(x);
        for (std::size_t i = 0; i < q.z.size(); ++i) {
          const auto st = G.stencil(x + eps * q.z[i]);
          for (std::size_t k = 0; k < st.size; ++k) e.emplace_back(static_cast<std::uint32_t>(st.node[k]), alpha * q.w[i] * st.weight[k]);
        }
      }
    }
    detail::merge_row(e);
  });
  SparseRows S;
  std::size_t nnz = 0;
  for (const auto& e : rows) nnz += e.size();
  S.col.reserve(nnz);
  S.w.reserve(nnz);
  for (auto& e : rows) {
    for (const auto& [c, w] : e) S.col.push_back(c), S.w.push_back(w);
    S.start.push_back(S.col.size());
    e.clear();
    e.shrink_to_fit();
  }
  return S;
}

template <std::size_t N>
void check_classified(const Grid<N>& G, const SparseRows& S) {
  for (std::uint32_t c : S.col)
    if (G.classify(c) == NodeClass::exterior) throw LabError(ErrorKind::numerical, "stencil reaches an exterior node");
}

// ---------------------------------------------------------------- residual

enum class Classification { subsolution, supersolution, solution, neither };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::subsolution: return "subsolution";
    case Classification::supersolution: return "supersolution";
    case Classification::solution: return "solution";
    case Classification::neither: return "neither";
  }
  return "?";
}

struct Residual {
  double sup_norm = 0.0;
  std::vector<double> per_node;  // L_ε u + f at interior nodes, interior order
  double min = 0.0, max = 0.0;
  double tol = 0.0;
  Classification classification = Classification::neither;
  bool is_sub() const { return classification == Classification::subsolution || classification == Classification::solution; }
  bool is_super() const { return classification == Classification::supersolution || classification == Classification::solution; }
};

inline Residual classify_residual(std::vector<double> r, double tol) {
  Residual res;
  res.tol = tol;
  res.per_node = std::move(r);
  res.min = std::numeric_limits<double>::infinity();
  res.max = -res.min;
  for (double v : res.per_node) {
    res.min = std::min(res.min, v);
    res.max = std::max(res.max, v);
    res.sup_norm = std::max(res.sup_norm, std::abs(v));
  }
  const bool sub = res.min >= -tol, sup = res.max <= tol;
  res.classification = sub && sup ? Classification::solution : sub ? Classification::subsolution : sup ? Classification::supersolution : Classification::neither;
  return res;
}

template <std::size_t N>
Residual residual(const Problem<N>& pb, const SparseRows& S, const GridFunction<N>& u, double tol) {
  if (&u.grid() != pb.grid.get() && !(u.grid().size() == pb.grid->size() && u.grid().h() == pb.grid->h()))
    fail_validation("residual: grid mismatch");
  const auto& in = pb.grid->interior_nodes();
  const double e2 = pb.scn.params.eps * pb.scn.params.eps;
  std::vector<double> r(in.size());
  parallel_for(in.size(), [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t j = S.start[k]; j < S.start[k + 1]; ++j) s += S.w[j] * u[S.col[j]];
    r[k] = (s - u[in[k]]) / e2 + pb.f[in[k]];
  });
  return classify_residual(std::move(r), tol);
}

template <std::size_t N>
Residual residual(const Scenario<N>& scn, const GridFunction<N>& u, double tol) {
  const auto pb = make_problem(scn);
  if (u.grid().size() != pb.grid->size()) fail_validation("residual: grid mismatch");
  return residual(pb, assemble_rows(pb), u, tol);
}

// Generic form: u and f share a grid; fam and p define L_ε.
template <std::size_t N>
Residual residual(const GridFunction<N>& u, const MeasureFamily<N>& fam, const GridFunction<N>& f, const Params& p, double tol) {
  if (!u.same_grid(f)) fail_validation("residual: u and f live on different grids");
  const auto& in = u.grid().interior_nodes();
  std::vector<double> r(in.size());
  parallel_for(in.size(), [&](std::size_t k) { r[k] = apply_L(u, fam, p, u.grid().coord(in[k])) + f[in[k]]; });
  return classify_residual(std::move(r), tol);
}

// ---------------------------------------------------------------- solvers

enum class SolveMode { monotone, arbitrary_init };

struct SolveOptions {
  SolveMode mode = SolveMode::monotone;
  double tol = 0.0;                 // 0 selects Problem::default_tol()
  std::size_t max_iter = 5000000;
  bool gradient_directions = false; // dirac pair along ∇u_n/|∇u_n|, frozen per sweep
};

struct IterationRecord {
  std::size_t iteration;
  double increment;  // sup |u_{n+1} − u_n|
  double residual;   // sup |L_ε u_n + f| = increment / ε²
};

template <std::size_t N>
struct SolveResult {
  GridFunction<N> u;
  std::vector<IterationRecord> log;
  std::size_t iterations = 0;
  double tol = 0.0;
  double last_increment = 0.0;
  bool converged = false;
};

template <std::size_t N>
GridFunction<N> initial_subsolution(const Problem<N>& pb) {
  const Grid<N>& G = *pb.grid;
  const double L = pb.f_sup * (N + 2.0) / (pb.beta_min * static_cast<double>(N));
  double K = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < G.size(); ++i)
    if (G.classify(i) == NodeClass::collar) K = std::min(K, pb.g[i] - L * norm2(G.coord(i)));
  GridFunction<N> v(pb.grid);
  for (std::size_t i = 0; i < G.size(); ++i) v[i] = G.is_interior(i) ? K + L * norm2(G.coord(i)) : pb.g[i];
  return v;
}

template <std::size_t N>
GridFunction<N> initial_subsolution(const Scenario<N>& scn) {
  return initial_subsolution(make_problem(scn));
}

namespace detail {

// Jacobi fixed-point loop; update(r, u) returns the new value at interior row r.
template <std::size_t N, class Update>
SolveResult<N> picard(const Problem<N>& pb, GridFunction<N> u, const SolveOptions& opt, Update&& update, const char* what) {
  const Grid<N>& G = *pb.grid;
  const auto& in = G.interior_nodes();
  SolveResult<N> res;
  res.tol = opt.tol > 0.0 ? opt.tol : pb.scn.tolerances.solver > 0.0 ? pb.scn.tolerances.solver : pb.default_tol();
  const double e2 = pb.scn.params.eps * pb.scn.params.eps;
  GridFunction<N> next = u;
  const std::size_t workers = worker_count();
  const std::size_t nb = std::max<std::size_t>(1, std::min<std::size_t>(workers, in.size()));
  std::vector<double> blk_inc(nb), blk_min(nb);
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    parallel_for(nb, [&](std::size_t b) {
      const std::size_t lo = in.size() * b / nb, hi = in.size() * (b + 1) / nb;
      double inc = 0.0, mn = std::numeric_limits<double>::infinity();
      for (std::size_t r = lo; r < hi; ++r) {
        const std::size_t node = in[r];
        const double v = update(r, u);
        const double d = v - u[node];
        next[node] = v;
        inc = std::max(inc, std::abs(d));
        mn = std::min(mn, d);
      }
      blk_inc[b] = inc;
      blk_min[b] = mn;
    }, nb);
    double inc = 0.0, mn = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < nb; ++b) inc = std::max(inc, blk_inc[b]), mn = std::min(mn, blk_min[b]);
    if (!std::isfinite(inc)) fail_numerical(std::string(what) + ": iteration diverged (non-finite increment)");
    std::swap(u, next);
    res.log.push_back({it, inc, inc / e2});
    res.iterations = it;
    res.last_increment = inc;
    if (opt.mode == SolveMode::monotone && mn < -1e-12) {
      std::ostringstream os;
      os << what << ": monotonicity violated at sweep " << it << " (decrease " << -mn << ")";
      fail_numerical(os.str());
    }
    if (inc <= res.tol) {
      res.converged = true;
      break;
    }
  }
  res.u = std::move(u);
  if (!res.converged) {
    std::ostringstream os;
    os << what << ": max_iter " << opt.max_iter << " exceeded; last residual " << res.last_increment / e2;
    fail_numerical(os.str());
  }
  return res;
}

template <std::size_t N>
GridFunction<N> starting_point(const Problem<N>& pb, SolveMode mode) {
  if (mode == SolveMode::monotone) return initial_subsolution(pb);
  GridFunction<N> u(pb.grid);
  for (std::size_t i = 0; i < pb.grid->size(); ++i) u[i] = pb.grid->is_interior(i) ? 0.0 : pb.g[i];
  return u;
}

}  // namespace detail

template <std::size_t N>
SolveResult<N> solve_dpp(const Problem<N>& pb, const SolveOptions& opt = {}) {
  const auto& in = pb.grid->interior_nodes();
  const double e2 = pb.scn.params.eps * pb.scn.params.eps;
  if (opt.gradient_directions) {
    if (opt.mode == SolveMode::monotone) fail_validation("solve_dpp: gradient-driven directions need arbitrary-init mode");
    const SparseRows ball = assemble_rows(pb, false);
    const Grid<N>& G = *pb.grid;
    const double eps = pb.scn.params.eps;
    auto update = [&](std::size_t r, const GridFunction<N>& u) {
      double s = 0.0;
      for (std::size_t j = ball.start[r]; j < ball.start[r + 1]; ++j) s += ball.w[j] * u[ball.col[j]];
      const std::size_t node = in[r];
      Vec<N> grad;
      double gn = 0.0;
      const auto k = G.index(node);
      for (std::size_t i = 0; i < N; ++i) {
        auto kp = k, km = k;
        ++kp[i];
        --km[i];
        grad[i] = (u[*G.flat(kp)] - u[*G.flat(km)]) / (2.0 * G.h());
        gn += grad[i] * grad[i];
      }
      gn = std::sqrt(gn);
      const Vec<N> x = G.coord(node);
      double a;
      if (gn > 0.0) {
        const Vec<N> d = (eps / gn) * grad;
        a = 0.5 * (u.at(x + d) + u.at(x - d));
      } else {
        a = u[node];
      }
      return (1.0 - pb.beta[r]) * a + s + e2 * pb.f[node];
    };
    return detail::picard(pb, detail::starting_point(pb, opt.mode), opt, update, "solve_dpp");
  }
  const SparseRows S = assemble_rows(pb);
  check_classified(*pb.grid, S);
  auto update = [&](std::size_t r, const GridFunction<N>& u) {
    double s = 0.0;
    for (std::size_t j = S.start[r]; j < S.start[r + 1]; ++j) s += S.w[j] * u[S.col[j]];
    return s + e2 * pb.f[in[r]];
  };
  return detail::picard(pb, detail::starting_point(pb, opt.mode), opt, update, "solve_dpp");
}

template <std::size_t N>
SolveResult<N> solve_dpp(const Scenario<N>& scn, const SolveOptions& opt = {}) {
  return solve_dpp(make_problem(scn), opt);
}

// max / min: Pucci extremal DPPs. midrange: α(x)/2·(max_z u(x+εz) + min_z u(x+εz)) over the
// direction set (tug-of-war with noise, variable coefficients allowed).
enum class PucciKind { max, min, midrange };

template <std::size_t N>
SolveResult<N> solve_pucci(const Problem<N>& pb, PucciKind kind, const SolveOptions& opt = {}) {
  const Grid<N>& G = *pb.grid;
  const auto& in = G.interior_nodes();
  const double eps = pb.scn.params.eps, e2 = eps * eps;
  const auto dirs = pb.scn.directions();
  dirs.validate(pb.scn.params.lambda);
  const SparseRows ball = assemble_rows(pb, false);
  check_classified(G, ball);
  std::vector<std::vector<detail::RelEntry>> plus(dirs.dirs.size()), minus(dirs.dirs.size());
  for (std::size_t i = 0; i < dirs.dirs.size(); ++i) {
    plus[i] = detail::relative_stencil(G, eps * dirs.dirs[i]);
    minus[i] = detail::relative_stencil(G, -eps * dirs.dirs[i]);
  }
  const auto eval = [](const std::vector<detail::RelEntry>& st, std::size_t node, const GridFunction<N>& u) {
    double s = 0.0;
    for (const auto& e : st) s += e.w * u[static_cast<std::size_t>(static_cast<std::int64_t>(node) + e.offset)];
    return s;
  };
  auto update = [&](std::size_t r, const GridFunction<N>& u) {
    const std::size_t node = in[r];
    double s = 0.0;
    for (std::size_t j = ball.start[r]; j < ball.start[r + 1]; ++j) s += ball.w[j] * u[ball.col[j]];
    double a;
    if (kind == PucciKind::midrange) {
      double mx = -std::numeric_limits<double>::infinity(), mn = -mx;
      for (std::size_t i = 0; i < plus.size(); ++i) {
        const double v = eval(plus[i], node, u);
        mx = std::max(mx, v);
        mn = std::min(mn, v);
      }
      a = 0.5 * (mx + mn);
    } else {
      a = 0.5 * (eval(plus[0], node, u) + eval(minus[0], node, u));
      for (std::size_t i = 1; i < plus.size(); ++i) {
        const double v = 0.5 * (eval(plus[i], node, u) + eval(minus[i], node, u));
        a = kind == PucciKind::max ? std::max(a, v) : std::min(a, v);
      }
    }
    return (1.0 - pb.beta[r]) * a + s + e2 * pb.f[node];
  };
  return detail::picard(pb, detail::starting_point(pb, opt.mode), opt, update, "solve_pucci");
}

template <std::size_t N>
SolveResult<N> solve_pucci(const Scenario<N>& scn, PucciKind kind, const SolveOptions& opt = {}) {
  return solve_pucci(make_problem(scn), kind, opt);
}

// Pucci residuals L^±u + f at interior nodes with constant (α, β) = (1 − β⁻, β⁻).
template <std::size_t N>
std::pair<Residual, Residual> pucci_residuals(const Problem<N>& pb, const GridFunction<N>& u, double tol) {
  Params p = pb.scn.params;
  p.beta = pb.beta_min;
  p.alpha = 1.0 - p.beta;
  const auto dirs = pb.scn.directions();
  const auto& in = pb.grid->interior_nodes();
  std::vector<double> rp(in.size()), rm(in.size());
  parallel_for(in.size(), [&](std::size_t k) {
    const Vec<N> x = pb.grid->coord(in[k]);
    rp[k] = apply_L_pucci(u, dirs, p, x, Extremum::max) + pb.f[in[k]];
    rm[k] = apply_L_pucci(u, dirs, p, x, Extremum::min) + pb.f[in[k]];
  });
  return {classify_residual(std::move(rp), tol), classify_residual(std::move(rm), tol)};
}

// ---------------------------------------------------------------- unbounded second solution

struct NonuniquenessRow {
  int k = 0;
  std::string x;        // 1/2^k
  std::string lhs;      // α-term ½·½(v(x−1/2^{k+1}) + v(x+1/2^{k+1})), ball term 0, f = 0
  std::string rhs;      // v(1/2^k) = 4^k
  std::string error;    // lhs − rhs
  bool holds = false;
};

struct NonuniquenessReport {
  std::vector<NonuniquenessRow> rows;
  bool unbounded_solution_holds = false;
  bool zero_solution_holds = false;
  std::string conclusion;
};

// v(x) = 4^k at x = 1/2^k, 0 elsewhere; ε = 1, α = β = ½, ν_{1/2^k} = ½(δ_{+1/2^{k+1}} + δ_{−1/2^{k+1}}).
inline NonuniquenessReport nonuniqueness_check(int k_max) {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  if (k_max < 1 || k_max > 25) fail_validation("nonuniqueness_check: k_max must lie in [1, 25]");
  const auto v = [](const cpp_rational& x) -> cpp_rational {
    if (x <= 0 || numerator(x) != 1) return 0;
    cpp_int d = denominator(x);
    int j = 0;
    while (d > 1) {
      if (d % 2 != 0) return 0;
      d /= 2;
      ++j;
    }
    return cpp_rational(cpp_int(1) << (2 * j));
  };
  const cpp_rational half(1, 2);
  NonuniquenessReport rep;
  rep.unbounded_solution_holds = true;
  rep.zero_solution_holds = true;
  for (int k = 1; k <= k_max; ++k) {
    const cpp_rational x(cpp_int(1), cpp_int(1) << k);
    const cpp_rational off(cpp_int(1), cpp_int(1) << (k + 1));
    const cpp_rational alpha_term = half * half * (v(x - off) + v(x + off));
    const cpp_rational ball_term = 0;  // v vanishes off a countable set
    const cpp_rational lhs = alpha_term + half * ball_term;
    const cpp_rational rhs = v(x);
    NonuniquenessRow row;
    row.k = k;
    row.x = x.str();
    row.lhs = lhs.str();
    row.rhs = rhs.str();
    row.error = cpp_rational(lhs - rhs).str();
    row.holds = lhs == rhs;
    rep.unbounded_solution_holds = rep.unbounded_solution_holds && row.holds;
    // u ≡ 0: ½·½(0 + 0) + ½·0 + 0 = 0
    const cpp_rational zero_lhs = half * half * (cpp_rational(0) + cpp_rational(0)) + half * cpp_rational(0);
    rep.zero_solution_holds = rep.zero_solution_holds && zero_lhs == 0;
    rep.rows.push_back(row);
  }
  rep.conclusion = rep.unbounded_solution_holds && rep.zero_solution_holds
                       ? "two distinct solutions (0 and the unbounded v); uniqueness fails without boundedness"
                       : "identity check failed";
  return rep;
}

}  // namespace dpplab
