#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "parallel.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "stats.hpp"

namespace dpplab {

template <std::size_t N>
struct PathState {
  Vec<N> x{};
  std::uint64_t k = 0;
  double payoff = 0.0;  // ε²Σ f(X_i), i < k
  std::uint64_t alpha_steps = 0;
  std::uint64_t beta_steps = 0;
  bool in_s = false;
};

// One transition of the controlled walk. The coin and the move use the stream at counter step k.
template <std::size_t N>
PathState<N> step(PathState<N> s, const Scenario<N>& scn, RandomStream& rng) {
  const Params& p = scn.params;
  rng.set_step(s.k);
  const double beta = scn.beta_field ? (*scn.beta_field)(s.x) : p.beta;
  s.payoff += p.eps * p.eps * scn.f(s.x);
  if (rng.uniform() < 1.0 - beta) {
    s.x = s.x + p.eps * scn.family.sample(s.x, rng);
    ++s.alpha_steps;
  } else {
    s.x = s.x + p.eps * rng.in_unit_ball<N>();
    ++s.beta_steps;
  }
  ++s.k;
  return s;
}

template <std::size_t N>
struct PathSummary {
  std::uint64_t tau = 0;
  Vec<N> exit_point{};
  double payoff = 0.0;  // ε²Σ_{i<τ} f(X_i) + g(X_τ)
  std::uint64_t alpha_steps = 0;
  bool capped = false;
};

inline std::uint64_t default_step_cap(double eps) {
  return static_cast<std::uint64_t>(std::min(1e8 / (eps * eps), 9e18));
}

template <std::size_t N>
PathSummary<N> run_to_exit(const Vec<N>& x0, const Scenario<N>& scn, RandomStream& rng, std::uint64_t step_cap) {
  if (!scn.domain.contains(x0)) fail_validation("run_to_exit: x0 must lie in the domain");
  PathState<N> s;
  s.x = x0;
  PathSummary<N> out;
  while (scn.domain.contains(s.x)) {
    if (s.k >= step_cap) {
      out.capped = true;
      break;
    }
    s = step(s, scn, rng);
  }
  out.tau = s.k;
  out.exit_point = s.x;
  out.alpha_steps = s.alpha_steps;
  out.payoff = out.capped ? std::numeric_limits<double>::quiet_NaN() : s.payoff + scn.g(s.x);
  return out;
}

namespace detail {

template <std::size_t N>
void require_walkable(const Scenario<N>& scn) {
  scn.validate();
  if (scn.family.is_pucci()) fail_validation("walker: pucci-control has no fixed transition measure");
}

template <std::size_t N>
std::vector<PathSummary<N>> run_batch(const Vec<N>& x0, const Scenario<N>& scn, std::size_t n_paths, std::uint64_t seed,
                                      std::uint64_t step_cap) {
  require_walkable(scn);
  if (!scn.domain.contains(x0)) fail_validation("walker: x0 must lie in the domain");
  std::vector<PathSummary<N>> out(n_paths);
  parallel_for(n_paths, [&](std::size_t i) {
    RandomStream rng(seed, i);
    out[i] = run_to_exit(x0, scn, rng, step_cap);
  });
  return out;
}

}  // namespace detail

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
  std::size_t capped = 0;
};

inline Estimate to_estimate(const std::vector<double>& v, std::size_t capped) {
  const auto m = moments(v);
  return {m.mean, m.se, m.n, capped};
}

template <std::size_t N>
Estimate estimate_value(const Vec<N>& x0, const Scenario<N>& scn, std::size_t n_paths, std::uint64_t seed,
                        std::uint64_t step_cap = 0) {
  const auto paths = detail::run_batch(x0, scn, n_paths, seed, step_cap ? step_cap : default_step_cap(scn.params.eps));
  std::vector<double> v;
  v.reserve(paths.size());
  std::size_t capped = 0;
  for (const auto& p : paths) {
    if (p.capped) ++capped;
    else v.push_back(p.payoff);
  }
  return to_estimate(v, capped);
}

template <std::size_t N>
Estimate estimate_value(const Vec<N>& x0, const Scenario<N>& scn) {
  return estimate_value(x0, scn, scn.n_paths, scn.seed);
}

struct TailPoint {
  double t;
  double prob;  // empirical P(ε²τ ≥ t)
};

struct ExitTimeReport {
  std::size_t n_paths = 0;
  std::size_t capped = 0;
  Moments time;         // ε²τ
  Moments time_sq;      // (ε²τ)²
  double dist = 0.0;    // dist(x0, ∂Ω)
  double c_lower = 0.0, c_upper = 0.0;
  double lower = 0.0, upper = 0.0;
  bool within_bounds = false;
  std::vector<TailPoint> tail;
  LinearFit tail_fit;    // log P against t over points with P ≤ ½ and ≥ 30 samples
  std::size_t tail_fit_points = 0;
};

// Constants of the two martingale comparisons: |X−x0|² − C ε²k is a supermartingale with
// C = αΛ² + βN/(N+2), and a submartingale with c = βN/(N+2).
inline double drift_upper_constant(const Params& p, std::size_t n) {
  return p.alpha * p.lambda * p.lambda + p.beta * n / (n + 2.0);
}
inline double drift_lower_constant(const Params& p, std::size_t n) { return p.beta * n / (n + 2.0); }

template <std::size_t N>
ExitTimeReport exit_time_stats(const Vec<N>& x0, const Scenario<N>& scn, std::size_t n_paths, std::uint64_t seed,
                               std::uint64_t step_cap = 0) {
  const double eps = scn.params.eps;
  const auto paths = detail::run_batch(x0, scn, n_paths, seed, step_cap ? step_cap : default_step_cap(eps));
  ExitTimeReport r;
  r.n_paths = n_paths;
  std::vector<double> t, t2;
  for (const auto& p : paths) {
    if (p.capped) {
      ++r.capped;
      continue;
    }
    const double v = eps * eps * static_cast<double>(p.tau);
    t.push_back(v);
    t2.push_back(v * v);
  }
  r.time = moments(t);
  r.time_sq = moments(t2);
  r.dist = scn.domain.depth(x0);
  r.c_lower = 1.0 / drift_upper_constant(scn.params, N);
  r.c_upper = 1.0 / drift_lower_constant(scn.params, N);
  const double reach = scn.domain.diameter() + scn.lambda_eps();
  r.lower = r.c_lower * r.dist * r.dist;
  r.upper = r.c_upper * reach * reach;
  r.within_bounds = r.time.mean >= r.lower && r.time.mean <= r.upper;

  std::sort(t.begin(), t.end());
  if (!t.empty()) {
    const std::size_t n_pts = 50;
    const double tmax = t.back();
    std::vector<double> xs, ys;
    for (std::size_t j = 0; j < n_pts; ++j) {
      const double tj = tmax * static_cast<double>(j) / static_cast<double>(n_pts);
      const auto ge = static_cast<std::size_t>(t.end() - std::lower_bound(t.begin(), t.end(), tj));
      const double pr = static_cast<double>(ge) / static_cast<double>(t.size());
      r.tail.push_back({tj, pr});
      if (pr <= 0.5 && ge >= 30) {
        xs.push_back(tj);
        ys.push_back(std::log(pr));
      }
    }
    r.tail_fit_points = xs.size();
    if (xs.size() >= 2) r.tail_fit = linear_fit(xs, ys);
  }
  return r;
}

struct DriftReport {
  Moments drift;  // one-step increment of |X − x0|²
  double lower = 0.0, upper = 0.0;
  bool pass = false;
};

// Sample i walks i mod 8 steps from x0 (restarting from x0 whenever the walk leaves Ω),
// then records one increment of |X − x0|² from its current interior position.
template <std::size_t N>
DriftReport drift_check(const Vec<N>& x0, const Scenario<N>& scn, std::size_t n_steps, std::uint64_t seed) {
  detail::require_walkable(scn);
  if (!scn.domain.contains(x0)) fail_validation("drift_check: x0 must lie in the domain");
  std::vector<double> inc(n_steps);
  parallel_for(n_steps, [&](std::size_t i) {
    RandomStream rng(seed, i);
    PathState<N> s;
    s.x = x0;
    for (std::size_t b = 0; b < i % 8; ++b) {
      s = step(s, scn, rng);
      if (!scn.domain.contains(s.x)) s.x = x0;
    }
    const double before = norm2(s.x - x0);
    s = step(s, scn, rng);
    inc[i] = norm2(s.x - x0) - before;
  });
  DriftReport r;
  r.drift = moments(inc);
  const double e2 = scn.params.eps * scn.params.eps;
  r.lower = drift_lower_constant(scn.params, N) * e2;
  r.upper = drift_upper_constant(scn.params, N) * e2;
  r.pass = r.drift.mean >= r.lower - 4.0 * r.drift.se && r.drift.mean <= r.upper + 4.0 * r.drift.se;
  return r;
}

// P^{x0}(T_A < τ_stop): fraction of paths entering A before leaving `stop`. Paths are keyed by
// (seed, path, step) only, so calls with the same seed share random numbers.
template <std::size_t N>
Estimate hitting_prob(const Vec<N>& x0, const Region<N>& a, const Region<N>& stop, const Scenario<N>& scn,
                      std::size_t n_paths, std::uint64_t seed, std::uint64_t step_cap = 0) {
  detail::require_walkable(scn);
  if (!stop.contains(x0)) fail_validation("hitting_prob: x0 must lie in the stop region");
  const std::uint64_t cap = step_cap ? step_cap : default_step_cap(scn.params.eps);
  std::vector<double> hit(n_paths);
  std::vector<char> capped(n_paths, 0);
  parallel_for(n_paths, [&](std::size_t i) {
    RandomStream rng(seed, i);
    PathState<N> s;
    s.x = x0;
    for (;;) {
      if (a.contains(s.x)) {
        hit[i] = 1.0;
        return;
      }
      if (!stop.contains(s.x)) {
        hit[i] = 0.0;
        return;
      }
      if (s.k >= cap) {
        capped[i] = 1;
        return;
      }
      s = step(s, scn, rng);
    }
  });
  std::vector<double> v;
  std::size_t nc = 0;
  for (std::size_t i = 0; i < n_paths; ++i) {
    if (capped[i]) ++nc;
    else v.push_back(hit[i]);
  }
  return to_estimate(v, nc);
}

struct LnFailureReport {
  std::size_t n_paths = 0;
  Moments s_payoff;      // ε²Σ_{i<τ} 1_S(X_i)
  Moments exit_time;     // ε²τ
  double alpha = 0.0;
  double s_norm = 0.0;   // ‖1_S‖_{L^N}: S has measure zero
  std::uint64_t alpha_steps = 0, alpha_hits = 0;
  double alpha_hit_rate = 0.0, alpha_hit_se = 0.0;
  double floor = 0.0;    // 0.9·(α/2)·E[ε²τ]
  bool payoff_ok = false, hit_rate_ok = false, pass = false;
  std::string conclusion;
};

// Walk on Ω = B_2 with ε = 1 and ν_x = ½(δ_{v} + δ_{−v}), where x + v is in the null set S.
// S-membership is tracked symbolically: X_0 = 0 is in S, the +v landing of an α step is in S,
// the −v landing and every ball-step landing are not.
template <std::size_t N>
LnFailureReport ln_abp_failure_demo(const Scenario<N>& scn, std::size_t n_paths, std::uint64_t seed) {
  detail::require_walkable(scn);
  const double eps = scn.params.eps;
  const Vec<N> x0{};
  const std::uint64_t cap = default_step_cap(eps);
  struct PathOut {
    double s_sum = 0, tau = 0;
    std::uint64_t a = 0, hits = 0;
  };
  std::vector<PathOut> out(n_paths);
  parallel_for(n_paths, [&](std::size_t i) {
    RandomStream rng(seed, i);
    Vec<N> x = x0;
    bool in_s = true;
    PathOut po;
    std::uint64_t k = 0;
    while (scn.domain.contains(x) && k < cap) {
      rng.set_step(k);
      if (in_s) po.s_sum += 1.0;
      const double beta = scn.params.beta;
      if (rng.uniform() < 1.0 - beta) {
        const Vec<N> z = scn.family.sample(x, rng);
        // dirac-pair sampling returns ±d with the sign drawn first; +d is the S-target
        const Vec<N> d = scn.family.dirac_direction(x);
        const bool plus = dot(z, d) > 0.0;
        x = x + eps * z;
        in_s = plus;
        ++po.a;
        if (plus) ++po.hits;
      } else {
        x = x + eps * rng.in_unit_ball<N>();
        in_s = false;
      }
      ++k;
    }
    po.s_sum *= eps * eps;
    po.tau = eps * eps * static_cast<double>(k);
    out[i] = po;
  });
  LnFailureReport r;
  r.n_paths = n_paths;
  r.alpha = scn.params.alpha;
  std::vector<double> s(n_paths), t(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) {
    s[i] = out[i].s_sum;
    t[i] = out[i].tau;
    r.alpha_steps += out[i].a;
    r.alpha_hits += out[i].hits;
  }
  r.s_payoff = moments(s);
  r.exit_time = moments(t);
  r.s_norm = 0.0;
  if (r.alpha_steps > 0) {
    r.alpha_hit_rate = static_cast<double>(r.alpha_hits) / static_cast<double>(r.alpha_steps);
    r.alpha_hit_se = std::sqrt(r.alpha_hit_rate * (1.0 - r.alpha_hit_rate) / static_cast<double>(r.alpha_steps));
  }
  r.floor = 0.9 * (r.alpha / 2.0) * r.exit_time.mean;
  r.payoff_ok = r.s_payoff.mean >= r.floor && r.s_payoff.mean >= 0.1;
  r.hit_rate_ok = std::abs(r.alpha_hit_rate - 0.5) <= 4.0 * r.alpha_hit_se;
  r.pass = r.payoff_ok && r.hit_rate_ok;
  r.conclusion = r.pass ? "L^N right-hand side is 0 while the S-payoff stays bounded below: the L^N form of the estimate fails"
                        : "demonstration did not reproduce the expected lower bound";
  return r;
}

}  // namespace dpplab
