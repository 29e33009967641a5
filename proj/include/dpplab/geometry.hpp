#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "error.hpp"
#include "vec.hpp"

namespace dpplab {

enum class DomainKind { box, ball };

// Open axis-aligned box or open ball.
template <std::size_t N>
class Domain {
 public:
  static Domain box(const Vec<N>& center, const Vec<N>& half_widths) {
    for (double w : half_widths)
      if (!(w > 0.0) || !std::isfinite(w)) fail_validation("domain: half-widths must be finite and positive");
    Domain d;
    d.kind_ = DomainKind::box;
    d.center_ = center;
    d.half_ = half_widths;
    return d;
  }

  static Domain ball(const Vec<N>& center, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) fail_validation("domain: radius must be finite and positive");
    Domain d;
    d.kind_ = DomainKind::ball;
    d.center_ = center;
    d.half_ = filled<N>(radius);
    return d;
  }

  DomainKind kind() const { return kind_; }
  const Vec<N>& center() const { return center_; }
  const Vec<N>& half_widths() const { return half_; }
  double radius() const { return half_[0]; }

  bool contains(const Vec<N>& x) const {
    if (kind_ == DomainKind::ball) return norm2(x - center_) < half_[0] * half_[0];
    for (std::size_t i = 0; i < N; ++i)
      if (!(std::abs(x[i] - center_[i]) < half_[i])) return false;
    return true;
  }

  // Euclidean distance to the closure (0 inside)
  double distance(const Vec<N>& x) const {
    if (kind_ == DomainKind::ball) return std::max(0.0, norm(x - center_) - half_[0]);
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double d = std::max(0.0, std::abs(x[i] - center_[i]) - half_[i]);
      s += d * d;
    }
    return std::sqrt(s);
  }

  // distance from an interior point to the boundary (0 outside)
  double depth(const Vec<N>& x) const {
    if (!contains(x)) return 0.0;
    if (kind_ == DomainKind::ball) return half_[0] - norm(x - center_);
    double d = half_[0] - std::abs(x[0] - center_[0]);
    for (std::size_t i = 1; i < N; ++i) d = std::min(d, half_[i] - std::abs(x[i] - center_[i]));
    return d;
  }

  double diameter() const {
    if (kind_ == DomainKind::ball) return 2.0 * half_[0];
    return 2.0 * norm(half_);
  }

  double volume() const {
    if (kind_ == DomainKind::ball) return unit_ball_volume(N) * std::pow(half_[0], static_cast<double>(N));
    double v = 1.0;
    for (double w : half_) v *= 2.0 * w;
    return v;
  }

  Vec<N> lower() const { return center_ - half_; }
  Vec<N> upper() const { return center_ + half_; }

  bool operator==(const Domain&) const = default;

 private:
  Domain() = default;
  DomainKind kind_ = DomainKind::box;
  Vec<N> center_{};
  Vec<N> half_{};
};

// Extended domain {dist(x, base) < margin} ∪ base.
template <std::size_t N>
class Collar {
 public:
  Collar(const Domain<N>& base, double margin) : base_(base), margin_(margin) {}
  const Domain<N>& base() const { return base_; }
  double margin() const { return margin_; }
  bool contains(const Vec<N>& x) const { return base_.contains(x) || base_.distance(x) < margin_; }

 private:
  Domain<N> base_;
  double margin_;
};

template <std::size_t N>
Collar<N> make_collar(const Domain<N>& domain, double lambda_eps) {
  if (!(lambda_eps > 0.0)) fail_validation("make_collar: margin must be positive");
  return Collar<N>(domain, lambda_eps);
}

// Finite union of open boxes and balls.
template <std::size_t N>
class Region {
 public:
  Region() = default;
  explicit Region(std::vector<Domain<N>> parts) : parts_(std::move(parts)) {}

  bool contains(const Vec<N>& x) const {
    for (const auto& p : parts_)
      if (p.contains(x)) return true;
    return false;
  }
  const std::vector<Domain<N>>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }

  // exact measure when the parts are pairwise disjoint; nullopt when overlap cannot be excluded
  std::optional<double> disjoint_measure() const {
    for (std::size_t i = 0; i < parts_.size(); ++i)
      for (std::size_t j = i + 1; j < parts_.size(); ++j)
        if (may_overlap(parts_[i], parts_[j])) return std::nullopt;
    double m = 0.0;
    for (const auto& p : parts_) m += p.volume();
    return m;
  }

 private:
  static bool may_overlap(const Domain<N>& a, const Domain<N>& b) {
    const Vec<N> al = a.lower(), ah = a.upper(), bl = b.lower(), bh = b.upper();
    for (std::size_t i = 0; i < N; ++i)
      if (ah[i] <= bl[i] || bh[i] <= al[i]) return false;
    if (a.kind() == DomainKind::ball && b.kind() == DomainKind::ball)
      return norm(a.center() - b.center()) < a.radius() + b.radius();
    if (a.kind() == DomainKind::ball) return b.distance(a.center()) < a.radius();
    if (b.kind() == DomainKind::ball) return a.distance(b.center()) < b.radius();
    return true;
  }

  std::vector<Domain<N>> parts_;
};

template <std::size_t N>
struct DyadicAddress {
  Vec<N> root_center{};
  double root_side = 1.0;
  std::array<std::int64_t, N> index{};
  bool operator==(const DyadicAddress&) const = default;
};

// Open axis-aligned cube.
template <std::size_t N>
struct Cube {
  Vec<N> center{};
  double side = 1.0;
  int generation = 0;
  std::optional<DyadicAddress<N>> address;

  bool contains(const Vec<N>& x) const {
    for (std::size_t i = 0; i < N; ++i)
      if (!(std::abs(x[i] - center[i]) < 0.5 * side)) return false;
    return true;
  }
  bool closure_contains(const Vec<N>& x) const {
    for (std::size_t i = 0; i < N; ++i)
      if (std::abs(x[i] - center[i]) > 0.5 * side) return false;
    return true;
  }
  double volume() const { return std::pow(side, static_cast<double>(N)); }
  double diameter() const { return side * std::sqrt(static_cast<double>(N)); }
  // ℓQ: same center, side scaled by ℓ
  Cube scaled(double l) const { return Cube{center, side * l, generation, std::nullopt}; }
};

// Root of a dyadic family, Q_1 by default.
template <std::size_t N>
Cube<N> dyadic_root(const Vec<N>& center = Vec<N>{}, double side = 1.0) {
  return Cube<N>{center, side, 0, DyadicAddress<N>{center, side, {}}};
}

template <std::size_t N>
Cube<N> dyadic_cube(const DyadicAddress<N>& a, int generation) {
  const double side = a.root_side / std::ldexp(1.0, generation);
  Vec<N> c;
  for (std::size_t i = 0; i < N; ++i)
    c[i] = a.root_center[i] - 0.5 * a.root_side + (static_cast<double>(a.index[i]) + 0.5) * side;
  return Cube<N>{c, side, generation, a};
}

template <std::size_t N>
std::vector<Cube<N>> dyadic_split(const Cube<N>& q) {
  DyadicAddress<N> a = q.address ? *q.address : DyadicAddress<N>{q.center, q.side, {}};
  if (!q.address && q.generation != 0) fail_validation("dyadic_split: cube has no dyadic address");
  std::vector<Cube<N>> out;
  out.reserve(std::size_t{1} << N);
  for (std::size_t bits = 0; bits < (std::size_t{1} << N); ++bits) {
    DyadicAddress<N> c = a;
    for (std::size_t i = 0; i < N; ++i) c.index[i] = 2 * a.index[i] + static_cast<std::int64_t>((bits >> i) & 1u);
    out.push_back(dyadic_cube(c, q.generation + 1));
  }
  return out;
}

template <std::size_t N>
Cube<N> dyadic_pre(const Cube<N>& q) {
  if (q.generation < 1) fail_validation("dyadic_pre: generation 0 has no predecessor");
  if (!q.address) fail_validation("dyadic_pre: cube has no dyadic address");
  DyadicAddress<N> a = *q.address;
  for (auto& k : a.index) k = k >> 1;  // floor division, indices are non-negative
  return dyadic_cube(a, q.generation - 1);
}

// Side of the ε-cover lattice cells: diameter ε/4.
template <std::size_t N>
double eps_cover_side(double eps) {
  return eps / (4.0 * std::sqrt(static_cast<double>(N)));
}

namespace detail {
template <std::size_t N>
std::vector<Cube<N>> cubes_from_indices(const std::set<std::array<std::int64_t, N>>& idx, double s) {
  std::vector<Cube<N>> out;
  out.reserve(idx.size());
  for (const auto& k : idx) {
    Vec<N> c;
    for (std::size_t i = 0; i < N; ++i) c[i] = static_cast<double>(k[i]) * s;
    out.push_back(Cube<N>{c, s, 0, std::nullopt});
  }
  return out;
}

template <std::size_t N, class Pred>
void enumerate_box(const std::array<std::int64_t, N>& lo, const std::array<std::int64_t, N>& hi, Pred&& pred) {
  std::array<std::int64_t, N> k = lo;
  for (;;) {
    pred(k);
    std::size_t i = 0;
    while (i < N) {
      if (++k[i] <= hi[i]) break;
      k[i] = lo[i];
      ++i;
    }
    if (i == N) return;
  }
}
}  // namespace detail

// Lattice cubes of side ε/(4√N) centered on (ε/(4√N))ℤ^N whose closures meet the node set.
template <std::size_t N>
std::vector<Cube<N>> eps_cover(const std::vector<Vec<N>>& points, double eps) {
  if (!(eps > 0.0)) fail_validation("eps_cover: eps must be positive");
  const double s = eps_cover_side<N>(eps);
  std::set<std::array<std::int64_t, N>> idx;
  for (const auto& p : points) {
    std::array<std::int64_t, N> lo, hi;
    for (std::size_t i = 0; i < N; ++i) {
      lo[i] = static_cast<std::int64_t>(std::ceil(p[i] / s - 0.5));
      hi[i] = static_cast<std::int64_t>(std::floor(p[i] / s + 0.5));
    }
    detail::enumerate_box<N>(lo, hi, [&](const auto& k) { idx.insert(k); });
  }
  return detail::cubes_from_indices<N>(idx, s);
}

// Same cover for an open box or ball.
template <std::size_t N>
std::vector<Cube<N>> eps_cover(const Domain<N>& region, double eps) {
  if (!(eps > 0.0)) fail_validation("eps_cover: eps must be positive");
  const double s = eps_cover_side<N>(eps);
  std::array<std::int64_t, N> lo, hi;
  const Vec<N> l = region.lower(), u = region.upper();
  for (std::size_t i = 0; i < N; ++i) {
    lo[i] = static_cast<std::int64_t>(std::floor(l[i] / s)) - 1;
    hi[i] = static_cast<std::int64_t>(std::ceil(u[i] / s)) + 1;
  }
  std::set<std::array<std::int64_t, N>> idx;
  detail::enumerate_box<N>(lo, hi, [&](const auto& k) {
    Vec<N> c;
    for (std::size_t i = 0; i < N; ++i) c[i] = static_cast<double>(k[i]) * s;
    bool meets = true;
    if (region.kind() == DomainKind::box) {
      for (std::size_t i = 0; i < N; ++i)
        if (!(c[i] - 0.5 * s < u[i] && c[i] + 0.5 * s > l[i])) meets = false;
    } else {
      double d2 = 0.0;  // distance from the ball center to the closed cube
      for (std::size_t i = 0; i < N; ++i) {
        const double d = std::max(0.0, std::abs(region.center()[i] - c[i]) - 0.5 * s);
        d2 += d * d;
      }
      meets = d2 < region.radius() * region.radius();
    }
    if (meets) idx.insert(k);
  });
  return detail::cubes_from_indices<N>(idx, s);
}

enum class NodeClass : std::uint8_t { interior, collar, exterior };

// Regular lattice h·ℤ^N over the collar hull. Collar nodes are all non-interior nodes
// within Λε + √N·h of Ω, which is the reach of the interpolation stencil at x ± εz.
template <std::size_t N>
class Grid {
 public:
  struct Stencil {
    std::array<std::size_t, (std::size_t{1} << N)> node{};
    std::array<double, (std::size_t{1} << N)> weight{};
    std::size_t size = 0;
  };

  Grid(const Domain<N>& domain, double h, double lambda_eps)
      : domain_(domain), collar_(domain, lambda_eps), h_(h), lambda_eps_(lambda_eps) {
    hull_margin_ = lambda_eps + std::sqrt(static_cast<double>(N)) * h;
    const Vec<N> l = domain.lower(), u = domain.upper();
    std::size_t total = 1;
    for (std::size_t i = 0; i < N; ++i) {
      lo_[i] = static_cast<std::int64_t>(std::floor((l[i] - hull_margin_) / h)) - 1;
      const auto hi = static_cast<std::int64_t>(std::ceil((u[i] + hull_margin_) / h)) + 1;
      count_[i] = static_cast<std::size_t>(hi - lo_[i] + 1);
      total *= count_[i];
    }
    stride_[0] = 1;
    for (std::size_t i = 1; i < N; ++i) stride_[i] = stride_[i - 1] * count_[i - 1];
    cls_.resize(total);
    physical_.resize(total);
    for (std::size_t f = 0; f < total; ++f) {
      const Vec<N> x = coord(f);
      if (domain.contains(x)) {
        cls_[f] = NodeClass::interior;
        interior_.push_back(f);
        physical_[f] = 0;
      } else {
        const double d = domain.distance(x);
        cls_[f] = d < hull_margin_ ? NodeClass::collar : NodeClass::exterior;
        physical_[f] = d < lambda_eps ? 1 : 0;
        if (cls_[f] == NodeClass::collar) ++n_collar_;
      }
    }
  }

  const Domain<N>& domain() const { return domain_; }
  const Collar<N>& collar() const { return collar_; }
  double h() const { return h_; }
  double lambda_eps() const { return lambda_eps_; }
  double hull_margin() const { return hull_margin_; }
  std::size_t size() const { return cls_.size(); }
  const std::array<std::size_t, N>& counts() const { return count_; }
  const std::array<std::size_t, N>& strides() const { return stride_; }
  const std::array<std::int64_t, N>& lower_index() const { return lo_; }
  std::size_t interior_count() const { return interior_.size(); }
  std::size_t collar_count() const { return n_collar_; }
  const std::vector<std::size_t>& interior_nodes() const { return interior_; }

  NodeClass classify(std::size_t f) const { return cls_[f]; }
  bool is_interior(std::size_t f) const { return cls_[f] == NodeClass::interior; }
  // collar node in the sense of make_collar (distance < Λε)
  bool in_physical_collar(std::size_t f) const { return physical_[f] != 0; }

  std::array<std::int64_t, N> index(std::size_t f) const {
    std::array<std::int64_t, N> k;
    for (std::size_t i = N; i-- > 0;) {
      k[i] = lo_[i] + static_cast<std::int64_t>(f / stride_[i]);
      f %= stride_[i];
    }
    return k;
  }

  Vec<N> coord(std::size_t f) const {
    const auto k = index(f);
    Vec<N> x;
    for (std::size_t i = 0; i < N; ++i) x[i] = static_cast<double>(k[i]) * h_;
    return x;
  }

  std::optional<std::size_t> flat(const std::array<std::int64_t, N>& k) const {
    std::size_t f = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const std::int64_t r = k[i] - lo_[i];
      if (r < 0 || r >= static_cast<std::int64_t>(count_[i])) return std::nullopt;
      f += static_cast<std::size_t>(r) * stride_[i];
    }
    return f;
  }

  // node exactly at x (up to 1e-9·h), if any
  std::optional<std::size_t> find_node(const Vec<N>& x) const {
    std::array<std::int64_t, N> k;
    for (std::size_t i = 0; i < N; ++i) {
      const double s = x[i] / h_;
      k[i] = static_cast<std::int64_t>(std::llround(s));
      if (std::abs(s - static_cast<double>(k[i])) > 1e-9) return std::nullopt;
    }
    return flat(k);
  }

  std::size_t nearest_node(const Vec<N>& x) const {
    std::array<std::int64_t, N> k;
    for (std::size_t i = 0; i < N; ++i) {
      k[i] = static_cast<std::int64_t>(std::llround(x[i] / h_));
      k[i] = std::clamp<std::int64_t>(k[i], lo_[i], lo_[i] + static_cast<std::int64_t>(count_[i]) - 1);
    }
    return *flat(k);
  }

  // Multilinear interpolation stencil; zero-weight corners are dropped.
  Stencil stencil(const Vec<N>& x) const {
    auto st = stencil_if_inside(x);
    if (!st) throw LabError(ErrorKind::numerical, "stencil escape: point outside the grid hull");
    return *st;
  }

  std::optional<Stencil> stencil_if_inside(const Vec<N>& x) const {
    std::array<std::size_t, N> base;
    std::array<double, N> t;
    for (std::size_t i = 0; i < N; ++i) {
      const double s = x[i] / h_ - static_cast<double>(lo_[i]);
      double fl = std::floor(s);
      double frac = s - fl;
      if (frac < 1e-12) frac = 0.0;
      if (frac > 1.0 - 1e-12) {
        frac = 0.0;
        fl += 1.0;
      }
      if (fl < 0.0 || fl > static_cast<double>(count_[i] - 1) || (frac > 0.0 && fl + 1.0 > static_cast<double>(count_[i] - 1)))
        return std::nullopt;
      base[i] = static_cast<std::size_t>(fl);
      t[i] = frac;
    }
    Stencil st;
    for (std::size_t bits = 0; bits < (std::size_t{1} << N); ++bits) {
      double w = 1.0;
      std::size_t f = 0;
      for (std::size_t i = 0; i < N; ++i) {
        const bool up = (bits >> i) & 1u;
        w *= up ? t[i] : 1.0 - t[i];
        f += (base[i] + (up ? 1 : 0)) * stride_[i];
      }
      if (w > 0.0) {
        st.node[st.size] = f;
        st.weight[st.size] = w;
        ++st.size;
      }
    }
    return st;
  }

 private:
  Domain<N> domain_;
  Collar<N> collar_;
  double h_;
  double lambda_eps_;
  double hull_margin_ = 0.0;
  std::array<std::int64_t, N> lo_{};
  std::array<std::size_t, N> count_{};
  std::array<std::size_t, N> stride_{};
  std::vector<NodeClass> cls_;
  std::vector<std::uint8_t> physical_;
  std::vector<std::size_t> interior_;
  std::size_t n_collar_ = 0;
};

template <std::size_t N>
Grid<N> build_grid(const Domain<N>& domain, double h, double lambda_eps) {
  if (!(h > 0.0)) fail_validation("build_grid: h must be positive");
  if (!(lambda_eps > 0.0)) fail_validation("build_grid: lambda_eps must be positive");
  Grid<N> g(domain, h, lambda_eps);
  if (g.interior_count() == 0) fail_validation("build_grid: no interior node");
  return g;
}

}  // namespace dpplab
