#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "dpp.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace dpplab {

using Rational = boost::multiprecision::cpp_rational;

// Exact value of a finite double.
inline Rational exact_rational(double x) {
  using boost::multiprecision::cpp_int;
  if (!std::isfinite(x)) fail_validation("exact_rational: non-finite value");
  if (x == 0.0) return Rational(0);
  int e = 0;
  const double m = std::frexp(x, &e);                        // x = m·2^e, |m| in [½, 1)
  const auto mi = static_cast<std::int64_t>(std::ldexp(m, 53));  // exact 53-bit integer
  e -= 53;
  Rational r{cpp_int(mi)};
  if (e > 0) r *= Rational(cpp_int(1) << e);
  else if (e < 0) r /= Rational(cpp_int(1) << -e);
  return r;
}

inline std::string rational_string(const Rational& r) {
  std::ostringstream os;
  os << numerator(r) << "/" << denominator(r);
  return os.str();
}

// ---------------------------------------------------------------- Calderón–Zygmund

// A ⊂ Q_1 as a union of dyadic cells of one generation (the depth, at least L).
template <std::size_t N>
struct DyadicSet {
  Cube<N> root = dyadic_root<N>();
  int depth = 1;
  std::set<std::array<std::int64_t, N>> cells;

  Rational measure() const {
    using boost::multiprecision::cpp_int;
    return Rational(cpp_int(cells.size()), cpp_int(1) << (depth * static_cast<int>(N))) * exact_rational(root.volume());
  }
  void validate() const {
    if (depth < 1) fail_validation("DyadicSet: depth must be >= 1");
    if (!root.address || root.generation != 0) fail_validation("DyadicSet: root must be a generation-0 dyadic cube");
    const std::int64_t n = std::int64_t{1} << depth;
    for (const auto& c : cells)
      for (auto k : c)
        if (k < 0 || k >= n) fail_validation("DyadicSet: cell outside the root cube");
  }
};

struct CzParams {
  double delta = 0.5;
  double delta_tilde = 0.1;
  int L = 1;
  void validate() const {
    if (!(0.0 < delta_tilde && delta_tilde < delta && delta < 1.0)) fail_validation("CzParams: need 0 < delta_tilde < delta < 1");
    if (L < 1) fail_validation("CzParams: L must be >= 1");
  }
};

enum class CzRule { predecessor, last_level };

template <std::size_t N>
struct CzCube {
  Cube<N> cube;
  CzRule rule;
  std::size_t count = 0;  // generation-L cells of A inside the cube
};

template <std::size_t N>
struct CzResult {
  std::vector<CzCube<N>> cubes;
  Rational a_measure, b_measure;
};

namespace detail {

template <std::size_t N>
std::array<std::int64_t, N> ancestor(const std::array<std::int64_t, N>& k, int levels) {
  std::array<std::int64_t, N> a;
  for (std::size_t i = 0; i < N; ++i) a[i] = k[i] >> levels;
  return a;
}

// |A ∩ Q| / |Q| > t  ⇔  count > t·2^{(L−j)N}, decided exactly
inline bool density_exceeds(std::size_t count, int L, int j, std::size_t n, const Rational& t) {
  using boost::multiprecision::cpp_int;
  return Rational(cpp_int(count)) > t * Rational(cpp_int(1) << ((L - j) * static_cast<int>(n)));
}

}  // namespace detail

// Dyadic stopping: children with density > δ select their predecessor; at generation L, cubes
// with density in (δ̃, δ] are selected as well. Cubes inside a selected cube are not split.
template <std::size_t N>
CzResult<N> cz_decompose(const DyadicSet<N>& A, const CzParams& p) {
  A.validate();
  p.validate();
  if (A.depth < p.L) fail_validation("cz_decompose: DyadicSet depth must be at least L");
  const Rational delta = exact_rational(p.delta), dt = exact_rational(p.delta_tilde);
  CzResult<N> res;
  res.a_measure = A.measure();
  if (res.a_measure > delta * exact_rational(A.root.volume())) fail_validation("cz_decompose: |A| must not exceed delta");
  const int L = p.L, D = A.depth;
  // cell counts per generation
  std::vector<std::map<std::array<std::int64_t, N>, std::size_t>> count(L + 1);
  for (const auto& c : A.cells)
    for (int j = 0; j <= L; ++j) ++count[j][detail::ancestor<N>(c, D - j)];
  const auto cnt = [&](int j, const std::array<std::int64_t, N>& k) -> std::size_t {
    auto it = count[j].find(k);
    return it == count[j].end() ? 0 : it->second;
  };
  const DyadicAddress<N> root = *A.root.address;
  std::vector<std::array<std::int64_t, N>> active{std::array<std::int64_t, N>{}};
  for (int j = 1; j <= L; ++j) {
    std::vector<std::array<std::int64_t, N>> next;
    for (const auto& parent : active) {
      std::vector<std::array<std::int64_t, N>> children;
      bool exceed = false;
      for (std::size_t bits = 0; bits < (std::size_t{1} << N); ++bits) {
        std::array<std::int64_t, N> c;
        for (std::size_t i = 0; i < N; ++i) c[i] = 2 * parent[i] + static_cast<std::int64_t>((bits >> i) & 1u);
        children.push_back(c);
        if (detail::density_exceeds(cnt(j, c), D, j, N, delta)) exceed = true;
      }
      if (exceed) {
        DyadicAddress<N> a = root;
        a.index = parent;
        res.cubes.push_back({dyadic_cube(a, j - 1), CzRule::predecessor, cnt(j - 1, parent)});
        continue;
      }
      for (const auto& c : children) {
        if (j < L) {
          next.push_back(c);
        } else if (detail::density_exceeds(cnt(j, c), D, j, N, dt)) {
          DyadicAddress<N> a = root;
          a.index = c;
          res.cubes.push_back({dyadic_cube(a, j), CzRule::last_level, cnt(j, c)});
        }
      }
    }
    active = std::move(next);
  }
  using boost::multiprecision::cpp_int;
  res.b_measure = 0;
  for (const auto& q : res.cubes)
    res.b_measure += exact_rational(A.root.volume()) / Rational(cpp_int(1) << (q.cube.generation * static_cast<int>(N)));
  return res;
}

template <std::size_t N>
struct CzCertificate {
  bool pass = false;
  bool disjoint = false;
  bool densities_ok = false;
  bool inequality = false;
  Rational a_measure, b_measure, rhs;  // rhs = δ|B| + δ̃
  std::vector<Rational> densities;     // per selected cube
};

// Exact check of |A| ≤ δ|B| + δ̃, disjointness, and the density conditions of every cube.
template <std::size_t N>
CzCertificate<N> cz_verify(const DyadicSet<N>& A, const std::vector<CzCube<N>>& cubes, const CzParams& p) {
  using boost::multiprecision::cpp_int;
  const Rational delta = exact_rational(p.delta), dt = exact_rational(p.delta_tilde);
  CzCertificate<N> cert;
  cert.a_measure = A.measure();
  cert.b_measure = 0;
  const Rational vol = exact_rational(A.root.volume());
  cert.disjoint = true;
  cert.densities_ok = true;
  for (std::size_t a = 0; a < cubes.size(); ++a) {
    const auto& qa = cubes[a].cube;
    if (!qa.address) fail_validation("cz_verify: cubes must carry dyadic addresses");
    for (std::size_t b = a + 1; b < cubes.size(); ++b) {
      const auto& qb = cubes[b].cube;
      const bool a_up = qa.generation <= qb.generation;
      const auto& hi = a_up ? qa : qb;
      const auto& lo = a_up ? qb : qa;
      if (detail::ancestor<N>(lo.address->index, lo.generation - hi.generation) == hi.address->index) cert.disjoint = false;
    }
    // recount cells of A in the cube
    std::size_t c = 0;
    for (const auto& cell : A.cells)
      if (detail::ancestor<N>(cell, A.depth - qa.generation) == qa.address->index) ++c;
    const Rational dens = Rational(cpp_int(c)) / Rational(cpp_int(1) << ((A.depth - qa.generation) * static_cast<int>(N)));
    cert.densities.push_back(dens);
    if (dens > delta) cert.densities_ok = false;
    if (cubes[a].rule == CzRule::last_level && !(dens > dt && qa.generation == p.L)) cert.densities_ok = false;
    cert.b_measure += vol / Rational(cpp_int(1) << (qa.generation * static_cast<int>(N)));
  }
  cert.rhs = delta * cert.b_measure + dt * vol;
  cert.inequality = cert.a_measure <= cert.rhs;
  cert.pass = cert.disjoint && cert.densities_ok && cert.inequality;
  return cert;
}

// Random A with |A| ≤ δ: cells included with probability q, then trimmed from the end.
template <std::size_t N>
DyadicSet<N> random_dyadic_set(int depth, double q, double delta, RandomStream& rng) {
  DyadicSet<N> A;
  A.depth = depth;
  const std::int64_t n = std::int64_t{1} << depth;
  std::array<std::int64_t, N> lo, hi;
  lo.fill(0);
  hi.fill(n - 1);
  std::vector<std::array<std::int64_t, N>> picked;
  detail::enumerate_box<N>(lo, hi, [&](const auto& k) {
    if (rng.uniform() < q) picked.push_back(k);
  });
  const auto total = static_cast<double>(std::int64_t{1} << (depth * static_cast<int>(N)));
  const auto cap = static_cast<std::size_t>(std::floor(delta * total));
  while (picked.size() > cap) {
    const auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(picked.size()));
    picked.erase(picked.begin() + static_cast<std::ptrdiff_t>(i));
  }
  A.cells.insert(picked.begin(), picked.end());
  return A;
}

// ---------------------------------------------------------------- oscillation and Hölder fit

template <std::size_t N>
struct OscillationProfile {
  Vec<N> center{};
  double eps = 0.0;
  double factor = 2.0;
  std::vector<double> radius;  // R_j = R_max·k^{−j}
  std::vector<double> omega;   // sup − inf over nodes in B_{R_j}
  double sup_abs = 0.0;        // sup |u| over B_{R_max}
};

template <std::size_t N>
OscillationProfile<N> oscillation_profile(const GridFunction<N>& u, const Vec<N>& center, double r_max, double eps,
                                          double factor = 2.0, double eps0 = 0.5) {
  if (!(factor > 1.0)) fail_validation("oscillation_profile: ladder factor must exceed 1");
  const Grid<N>& G = u.grid();
  OscillationProfile<N> p;
  p.center = center;
  p.eps = eps;
  p.factor = factor;
  const double cutoff = std::max(eps / eps0, 2.0 * G.h());
  for (double r = r_max; r >= cutoff * (1.0 - 1e-12); r /= factor) p.radius.push_back(r);
  if (p.radius.empty()) fail_validation("oscillation_profile: ladder empty (R_max below the cutoff)");
  // nodes sorted by distance for nested sweeps
  std::vector<std::pair<double, std::size_t>> nodes;
  for (std::size_t i = 0; i < G.size(); ++i) {
    const double d = norm(G.coord(i) - center);
    if (d < r_max) {
      if (G.classify(i) == NodeClass::exterior) fail_validation("oscillation_profile: ball leaves the grid");
      nodes.emplace_back(d, i);
    }
  }
  std::sort(nodes.begin(), nodes.end());
  p.omega.assign(p.radius.size(), 0.0);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t k = 0;
  for (std::size_t j = p.radius.size(); j-- > 0;) {
    while (k < nodes.size() && nodes[k].first < p.radius[j]) {
      const double v = u[nodes[k].second];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      p.sup_abs = std::max(p.sup_abs, std::abs(v));
      ++k;
    }
    p.omega[j] = k > 0 ? hi - lo : 0.0;
  }
  return p;
}

struct HolderFit {
  double gamma = 0.0;          // log(1/λ)/log k
  double lambda = 0.0;         // median per-level ratio ω(R_{j+1})/ω(R_j)
  double ls_gamma = 0.0;       // least-squares slope of log ω against log R
  double ls_r2 = 0.0;
  double constant = 0.0;       // C with ω(R_j) ≤ (C/R^γ)·S·R_j^γ at every level
  double scale = 0.0;          // S = sup|u| + R²‖f‖_∞
  double radius = 0.0;         // R = R_max / 2
  std::vector<double> ratios;
  std::size_t levels = 0;
};

template <std::size_t N>
HolderFit fit_holder(const OscillationProfile<N>& p, double f_sup = 0.0) {
  if (p.radius.size() < 3) fail_validation("fit_holder: fewer than 3 usable ladder levels");
  HolderFit fit;
  fit.levels = p.radius.size();
  for (std::size_t j = 0; j + 1 < p.radius.size(); ++j)
    fit.ratios.push_back(p.omega[j] > 0.0 ? p.omega[j + 1] / p.omega[j] : 1.0);
  fit.lambda = median(fit.ratios);
  fit.gamma = fit.lambda > 0.0 ? std::log(1.0 / fit.lambda) / std::log(p.factor) : 0.0;
  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < p.radius.size(); ++j)
    if (p.omega[j] > 0.0) lx.push_back(std::log(p.radius[j])), ly.push_back(std::log(p.omega[j]));
  if (lx.size() >= 2) {
    const auto lf = linear_fit(lx, ly);
    fit.ls_gamma = lf.slope;
    fit.ls_r2 = lf.r2;
  }
  fit.radius = p.radius.front() / 2.0;
  fit.scale = p.sup_abs + fit.radius * fit.radius * f_sup;
  if (fit.scale > 0.0 && fit.gamma > 0.0)
    for (std::size_t j = 0; j < p.radius.size(); ++j)
      fit.constant = std::max(fit.constant, p.omega[j] * std::pow(fit.radius, fit.gamma) / (fit.scale * std::pow(p.radius[j], fit.gamma)));
  return fit;
}

struct HolderCertificate {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max |u(x)−u(z)| / bound
  double c_used = 0.0, gamma_used = 0.0;
  bool pass = false;
};

// |u(x)−u(z)| ≤ (C/R^γ)·S·(|x−z|^γ + ε^γ) on random node pairs in B_R(center) with |x−z| ≥ ε.
template <std::size_t N>
HolderCertificate holder_certificate(const GridFunction<N>& u, const Vec<N>& center, const HolderFit& fit, double eps,
                                     double c_factor, double gamma_factor, std::size_t n_pairs, std::uint64_t seed) {
  const Grid<N>& G = u.grid();
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < G.size(); ++i)
    if (norm(G.coord(i) - center) < fit.radius && G.classify(i) != NodeClass::exterior) nodes.push_back(i);
  if (nodes.size() < 2) fail_validation("holder_certificate: too few nodes in B_R");
  HolderCertificate c;
  c.c_used = fit.constant * c_factor;
  c.gamma_used = fit.gamma * gamma_factor;
  const double pref = c.c_used / std::pow(fit.radius, c.gamma_used) * fit.scale;
  std::vector<double> ratio(n_pairs, 0.0);
  std::vector<char> used(n_pairs, 0);
  parallel_for(n_pairs, [&](std::size_t t) {
    RandomStream rng(seed, t);
    for (int attempt = 0; attempt < 1000; ++attempt) {
      rng.set_step(static_cast<std::uint64_t>(attempt));
      const std::size_t a = nodes[static_cast<std::size_t>(rng.uniform() * static_cast<double>(nodes.size()))];
      const std::size_t b = nodes[static_cast<std::size_t>(rng.uniform() * static_cast<double>(nodes.size()))];
      const double d = norm(G.coord(a) - G.coord(b));
      if (d < eps) continue;
      const double bound = pref * (std::pow(d, c.gamma_used) + std::pow(eps, c.gamma_used));
      ratio[t] = bound > 0.0 ? std::abs(u[a] - u[b]) / bound : (u[a] == u[b] ? 0.0 : std::numeric_limits<double>::infinity());
      used[t] = 1;
      return;
    }
  });
  for (std::size_t t = 0; t < n_pairs; ++t) {
    if (!used[t]) continue;
    ++c.pairs;
    if (ratio[t] > 1.0) ++c.violations;
    c.worst_ratio = std::max(c.worst_ratio, ratio[t]);
  }
  c.pass = c.pairs > 0 && c.violations == 0;
  return c;
}

// ---------------------------------------------------------------- De Giorgi probe

struct DeGiorgiParams {
  double R = 0.0;
  double k = 0.0;       // dilation factor; 0 selects 2(5N + Λε₀)
  double theta = 0.5;
  double eps0 = 0.5;
};

struct DeGiorgiReport {
  double M = 0.0;           // sup over B_{kR}
  double m = 0.0;           // level
  double sup_r = 0.0;       // sup over B_R
  double theta_observed = 0.0;
  double eta_observed = 0.0;  // (M − sup_{B_R} u − C R²‖f‖) / (M − m), C taken as 0 here
  double f_term = 0.0;        // R²‖f‖_∞, reported
  double k = 0.0;
  bool flipped = false;       // probed −u
  bool hypothesis_met = false;
};

inline double degiorgi_k(std::size_t n, double lambda, double eps0) { return 2.0 * (5.0 * static_cast<double>(n) + lambda * eps0); }

// u must be a subsolution on a grid over B_{kR}(center). The level m is the midrange over B_R;
// if {u ≤ m} covers less than θ of the B_R nodes, the probe runs on −u.
template <std::size_t N>
DeGiorgiReport degiorgi_probe(const Scenario<N>& scn, const GridFunction<N>& u, const Vec<N>& center, const DeGiorgiParams& prm) {
  DeGiorgiReport r;
  r.k = prm.k > 0.0 ? prm.k : degiorgi_k(N, scn.params.lambda, prm.eps0);
  if (!(r.k > 1.0) || !(prm.theta > 0.0 && prm.theta < 1.0)) fail_validation("degiorgi_probe: need k > 1 and theta in (0,1)");
  if (!(scn.params.eps < prm.eps0 * prm.R)) fail_validation("degiorgi_probe: need eps < eps0·R");
  const Grid<N>& G = u.grid();
  std::vector<double> in_r, in_kr;
  double f_sup = 0.0;
  for (std::size_t i = 0; i < G.size(); ++i) {
    if (G.classify(i) == NodeClass::exterior) continue;
    const double d = norm(G.coord(i) - center);
    if (d < r.k * prm.R && scn.domain.contains(G.coord(i))) {
      in_kr.push_back(u[i]);
      f_sup = std::max(f_sup, std::abs(scn.f(G.coord(i))));
    }
    if (d < prm.R) in_r.push_back(u[i]);
  }
  if (in_r.empty()) fail_validation("degiorgi_probe: no nodes in B_R");
  const auto probe = [&](double sgn) {
    DeGiorgiReport q = r;
    q.flipped = sgn < 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : in_r) lo = std::min(lo, sgn * v), hi = std::max(hi, sgn * v);
    q.sup_r = hi;
    q.m = 0.5 * (lo + hi);
    q.M = -std::numeric_limits<double>::infinity();
    for (double v : in_kr) q.M = std::max(q.M, sgn * v);
    std::size_t below = 0;
    for (double v : in_r)
      if (sgn * v <= q.m) ++below;
    q.theta_observed = static_cast<double>(below) / static_cast<double>(in_r.size());
    q.hypothesis_met = q.theta_observed >= prm.theta;
    q.f_term = prm.R * prm.R * f_sup;
    q.eta_observed = q.M > q.m ? (q.M - q.sup_r) / (q.M - q.m) : 0.0;
    return q;
  };
  DeGiorgiReport q = probe(1.0);
  if (!q.hypothesis_met) q = probe(-1.0);
  return q;
}

}  // namespace dpplab
