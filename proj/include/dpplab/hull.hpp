#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>
#include <vector>

#include "error.hpp"

namespace dpplab {

// Upper hull of points (a, b, v) with integer a, b and double v. Orientation signs are exact,
// so plateaus and coplanar patches come out right.
namespace hull {

struct Lifted {
  std::int64_t a = 0, b = 0;
  double v = 0.0;
};

inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  const double bv = s - a, av = s - bv;
  e = (a - av) + (b - bv);
}

// sign of the exact sum of the terms (grow-expansion with zero elimination)
template <std::size_t K>
int exact_sign(const std::array<double, K>& terms) {
  std::array<double, 2 * K> e{};
  std::size_t m = 0;
  for (double t : terms) {
    double q = t;
    std::size_t k = 0;
    for (std::size_t i = 0; i < m; ++i) {
      double hh;
      two_sum(q, e[i], q, hh);
      if (hh != 0.0) e[k++] = hh;
    }
    if (q != 0.0) e[k++] = q;
    m = k;
  }
  return m == 0 ? 0 : (e[m - 1] > 0.0 ? 1 : -1);
}

// sign of det[p1 − p0, p2 − p0, p3 − p0]; positive when p3 lies above the plane of the
// counter-clockwise triangle p0 p1 p2
inline int orient(const Lifted& p0, const Lifted& p1, const Lifted& p2, const Lifted& p3) {
  const std::int64_t a1 = p1.a - p0.a, b1 = p1.b - p0.b, a2 = p2.a - p0.a, b2 = p2.b - p0.b, a3 = p3.a - p0.a,
                     b3 = p3.b - p0.b;
  const double m1 = static_cast<double>(a2 * b3 - b2 * a3);
  const double m2 = static_cast<double>(a1 * b3 - b1 * a3);
  const double m3 = static_cast<double>(a1 * b2 - b1 * a2);
  const double m0 = m1 - m2 + m3;  // integers below 2^53, exact
  std::array<double, 8> t;
  const auto prod = [&](double c, double v, std::size_t k) {
    t[k] = c * v;
    t[k + 1] = std::fma(c, v, -t[k]);
  };
  prod(m1, p1.v, 0);
  prod(-m2, p2.v, 2);
  prod(m3, p3.v, 4);
  prod(-m0, p0.v, 6);
  return exact_sign(t);
}

struct Plane {
  double value = 0.0;        // height at the query point
  double sa = 0.0, sb = 0.0; // slope per unit of a and b
};

// Upper envelope at every input point. out[i] is the height of the upper hull above (a_i, b_i)
// and the slope of a supporting facet there.
inline std::vector<Plane> upper_envelope(const std::vector<Lifted>& pts) {
  const std::size_t n = pts.size();
  std::vector<Plane> out(n);
  if (n == 0) return out;
  for (std::size_t i = 0; i < n; ++i) out[i].value = pts[i].v;
  if (n < 3) {
    if (n == 2 && pts[0].v != pts[1].v) fail_validation("upper_envelope: needs three non-collinear sites");
    return out;
  }

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::mt19937_64 shuffle_gen(0x9e3779b97f4a7c15ULL);
  std::shuffle(order.begin(), order.end(), shuffle_gen);

  // initial simplex: two sites, a third off their line, a fourth off their plane
  std::size_t i2 = n;
  const auto& q0 = pts[order[0]];
  const auto& q1 = pts[order[1]];
  for (std::size_t k = 2; k < n && i2 == n; ++k) {
    const auto& q = pts[order[k]];
    if ((q1.a - q0.a) * (q.b - q0.b) - (q1.b - q0.b) * (q.a - q0.a) != 0) i2 = k;
  }
  if (i2 == n) throw LabError(ErrorKind::numerical, "upper_envelope: sites are collinear");
  std::swap(order[2], order[i2]);
  std::size_t i3 = n;
  for (std::size_t k = 3; k < n && i3 == n; ++k)
    if (orient(pts[order[0]], pts[order[1]], pts[order[2]], pts[order[k]]) != 0) i3 = k;

  const auto plane_through = [&](std::uint32_t x, std::uint32_t y, std::uint32_t z) {
    const auto &p0 = pts[x], &p1 = pts[y], &p2 = pts[z];
    const double a1 = static_cast<double>(p1.a - p0.a), b1 = static_cast<double>(p1.b - p0.b);
    const double a2 = static_cast<double>(p2.a - p0.a), b2 = static_cast<double>(p2.b - p0.b);
    const double det = a1 * b2 - b1 * a2;
    const double dv1 = p1.v - p0.v, dv2 = p2.v - p0.v;
    return std::array<double, 2>{(dv1 * b2 - dv2 * b1) / det, (dv2 * a1 - dv1 * a2) / det};
  };

  if (i3 == n) {
    // every site on one plane: the envelope is that plane
    const auto s = plane_through(order[0], order[1], order[2]);
    for (auto& p : out) p.sa = s[0], p.sb = s[1];
    return out;
  }
  std::swap(order[3], order[i3]);
  if (orient(pts[order[0]], pts[order[1]], pts[order[2]], pts[order[3]]) > 0) std::swap(order[1], order[2]);

  struct Face {
    std::array<std::uint32_t, 3> v;
    bool alive = true;
    std::vector<std::uint32_t> conflicts;
  };
  std::vector<Face> faces;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_face;  // directed edge → face
  const auto key = [](std::uint32_t u, std::uint32_t w) { return (static_cast<std::uint64_t>(u) << 32) | w; };
  const auto above = [&](const Face& f, std::uint32_t q) { return orient(pts[f.v[0]], pts[f.v[1]], pts[f.v[2]], pts[q]) > 0; };
  std::vector<std::vector<std::uint32_t>> point_conflicts(n);

  const auto add_face = [&](std::uint32_t x, std::uint32_t y, std::uint32_t z) {
    const auto id = static_cast<std::uint32_t>(faces.size());
    faces.push_back(Face{{x, y, z}, true, {}});
    edge_face[key(x, y)] = id;
    edge_face[key(y, z)] = id;
    edge_face[key(z, x)] = id;
    return id;
  };

  {
    const std::uint32_t s0 = order[0], s1 = order[1], s2 = order[2], s3 = order[3];
    // s3 lies below (s0, s1, s2)
    const std::array<std::array<std::uint32_t, 3>, 4> tet = {{{s0, s1, s2}, {s0, s3, s1}, {s1, s3, s2}, {s2, s3, s0}}};
    for (const auto& t : tet) add_face(t[0], t[1], t[2]);
    for (std::size_t k = 4; k < n; ++k)
      for (std::uint32_t f = 0; f < 4; ++f)
        if (above(faces[f], order[k])) {
          faces[f].conflicts.push_back(order[k]);
          point_conflicts[order[k]].push_back(f);
        }
  }

  std::vector<std::uint32_t> visible_stamp, point_stamp(n, 0);
  std::uint32_t stamp = 0;
  std::vector<std::uint32_t> visible;
  struct HorizonEdge {
    std::uint32_t u, w, inner, outer;
  };
  std::vector<HorizonEdge> horizon;

  for (std::size_t k = 4; k < n; ++k) {
    const std::uint32_t p = order[k];
    visible.clear();
    ++stamp;
    visible_stamp.resize(faces.size(), 0);
    for (auto f : point_conflicts[p])
      if (faces[f].alive && visible_stamp[f] != stamp) {
        visible_stamp[f] = stamp;
        visible.push_back(f);
      }
    point_conflicts[p].clear();
    point_conflicts[p].shrink_to_fit();
    if (visible.empty()) continue;

    horizon.clear();
    for (auto f : visible) {
      const auto& v = faces[f].v;
      for (int e = 0; e < 3; ++e) {
        const std::uint32_t u = v[e], w = v[(e + 1) % 3];
        const std::uint32_t g = edge_face.at(key(w, u));
        if (visible_stamp[g] != stamp) horizon.push_back({u, w, f, g});
      }
    }
    for (auto f : visible) {
      auto& F = faces[f];
      F.alive = false;
      for (int e = 0; e < 3; ++e) {
        auto it = edge_face.find(key(F.v[e], F.v[(e + 1) % 3]));
        if (it != edge_face.end() && it->second == f) edge_face.erase(it);
      }
    }
    for (const auto& h : horizon) {
      const std::uint32_t id = add_face(h.u, h.w, p);
      ++stamp;  // dedupe candidates per new face; visibility marks are no longer needed
      std::vector<std::uint32_t> cand;
      for (auto src : {h.inner, h.outer})
        for (auto q : faces[src].conflicts)
          if (q != p && point_stamp[q] != stamp) {
            point_stamp[q] = stamp;
            cand.push_back(q);
          }
      auto& F = faces[id];
      for (auto q : cand)
        if (above(F, q)) {
          F.conflicts.push_back(q);
          point_conflicts[q].push_back(id);
        }
    }
    for (auto f : visible) {
      faces[f].conflicts.clear();
      faces[f].conflicts.shrink_to_fit();
    }
  }

  // rasterize upper facets (counter-clockwise in the (a, b) projection)
  std::int64_t amin = std::numeric_limits<std::int64_t>::max(), bmin = amin, amax = std::numeric_limits<std::int64_t>::min(), bmax = amax;
  for (const auto& p : pts) {
    amin = std::min(amin, p.a), amax = std::max(amax, p.a);
    bmin = std::min(bmin, p.b), bmax = std::max(bmax, p.b);
  }
  const std::int64_t wa = amax - amin + 1, wb = bmax - bmin + 1;
  std::vector<std::int64_t> site(static_cast<std::size_t>(wa * wb), -1);
  for (std::size_t i = 0; i < n; ++i) site[static_cast<std::size_t>((pts[i].a - amin) * wb + (pts[i].b - bmin))] = static_cast<std::int64_t>(i);
  std::vector<char> seen(n, 0);
  for (const auto& F : faces) {
    if (!F.alive) continue;
    const auto &p0 = pts[F.v[0]], &p1 = pts[F.v[1]], &p2 = pts[F.v[2]];
    const std::int64_t area = (p1.a - p0.a) * (p2.b - p0.b) - (p1.b - p0.b) * (p2.a - p0.a);
    if (area <= 0) continue;  // lower or vertical facet
    const auto s = plane_through(F.v[0], F.v[1], F.v[2]);
    const std::int64_t lo_a = std::min({p0.a, p1.a, p2.a}), hi_a = std::max({p0.a, p1.a, p2.a});
    const std::int64_t lo_b = std::min({p0.b, p1.b, p2.b}), hi_b = std::max({p0.b, p1.b, p2.b});
    for (std::int64_t a = lo_a; a <= hi_a; ++a)
      for (std::int64_t b = lo_b; b <= hi_b; ++b) {
        const std::int64_t idx = site[static_cast<std::size_t>((a - amin) * wb + (b - bmin))];
        if (idx < 0) continue;
        const std::int64_t e0 = (p2.a - p1.a) * (b - p1.b) - (p2.b - p1.b) * (a - p1.a);
        const std::int64_t e1 = (p0.a - p2.a) * (b - p2.b) - (p0.b - p2.b) * (a - p2.a);
        const std::int64_t e2 = (p1.a - p0.a) * (b - p0.b) - (p1.b - p0.b) * (a - p0.a);
        if (e0 < 0 || e1 < 0 || e2 < 0) continue;
        const double val = (static_cast<double>(e0) * p0.v + static_cast<double>(e1) * p1.v + static_cast<double>(e2) * p2.v) /
                           static_cast<double>(area);
        auto& o = out[static_cast<std::size_t>(idx)];
        if (!seen[static_cast<std::size_t>(idx)] || val < o.value) {
          o.value = val;
          o.sa = s[0];
          o.sb = s[1];
        }
        seen[static_cast<std::size_t>(idx)] = 1;
      }
  }
  // hull vertices carry their own value exactly
  for (const auto& F : faces)
    if (F.alive)
      for (auto v : F.v) out[v].value = std::max(out[v].value, pts[v].v);
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) throw LabError(ErrorKind::numerical, "upper_envelope: site not covered by an upper facet");
    out[i].value = std::max(out[i].value, pts[i].v);
  }
  return out;
}

}  // namespace hull
}  // namespace dpplab
