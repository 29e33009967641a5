#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "grid_function.hpp"
#include "json_util.hpp"
#include "rng.hpp"

namespace dpplab {

// Gauss–Legendre nodes and weights on [0, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre01(std::size_t n) {
  std::vector<double> x(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    double t = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * static_cast<double>(k) - 1.0) * t * p1 - (static_cast<double>(k) - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = t;
      dp = static_cast<double>(n) * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    x[i] = 0.5 * (1.0 - t);
    w[i] = 1.0 / ((1.0 - t * t) * dp * dp);  // = (2/((1-t²)P'²)) / 2
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> xs(n), ws(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = x[order[i]], ws[i] = w[order[i]];
  return {xs, ws};
}

// Discrete probability measure on increments z.
template <std::size_t N>
struct Quadrature {
  std::vector<Vec<N>> z;
  std::vector<double> w;
  void add(const Vec<N>& p, double weight) {
    z.push_back(p);
    w.push_back(weight);
  }
  void normalize() {
    double s = 0.0;
    for (double v : w) s += v;
    for (double& v : w) v /= s;
  }
};

// Symmetric polar rule for a radially bounded region {r_in ≤ |y| < r_out(θ)} with
// density uniform in Lebesgue measure. r_out is evaluated per direction.
template <std::size_t N, class Rout>
Quadrature<N> polar_rule(double r_in, Rout&& r_out, std::size_t angular, std::size_t radial) {
  Quadrature<N> q;
  const auto [t, tw] = gauss_legendre01(radial);
  if constexpr (N == 1) {
    for (double s : {1.0, -1.0}) {
      const double ro = r_out(Vec<1>{s});
      for (std::size_t k = 0; k < radial; ++k) q.add(Vec<1>{s * (r_in + (ro - r_in) * t[k])}, tw[k] * (ro - r_in));
    }
  } else if constexpr (N == 2) {
    const std::size_t na = angular + angular % 2;  // even, so θ and θ+π both appear
    for (std::size_t j = 0; j < na; ++j) {
      const double th = (static_cast<double>(j) + 0.5) * 2.0 * pi / static_cast<double>(na);
      const Vec<2> e{std::cos(th), std::sin(th)};
      const double ro = r_out(e);
      for (std::size_t k = 0; k < radial; ++k) {
        const double r = r_in + (ro - r_in) * t[k];
        q.add(r * e, tw[k] * (ro - r_in) * r);
      }
    }
  } else if constexpr (N == 3) {
    // Gauss-Legendre in cos θ times an even φ ring; both are antipodally symmetric
    const std::size_t na = angular + angular % 2;
    const std::size_t nc = std::max<std::size_t>(2, angular / 2);
    const auto [c01, cw] = gauss_legendre01(nc);
    for (std::size_t i = 0; i < nc; ++i) {
      const double ct = 2.0 * c01[i] - 1.0, st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
      for (std::size_t j = 0; j < na; ++j) {
        const double ph = (static_cast<double>(j) + 0.5) * 2.0 * pi / static_cast<double>(na);
        const Vec<3> e{st * std::cos(ph), st * std::sin(ph), ct};
        const double ro = r_out(e);
        for (std::size_t k = 0; k < radial; ++k) {
          const double r = r_in + (ro - r_in) * t[k];
          q.add(r * e, cw[i] * tw[k] * (ro - r_in) * r * r);
        }
      }
    }
  } else {
    // midpoint cells over the cube [-R, R]^N, masked to the region
    const std::size_t m = 16;
    double R = 0.0;
    for (std::size_t i = 0; i < N; ++i) R = std::max(R, r_out(unit<N>(i)));
    std::array<std::int64_t, N> lo, hi;
    lo.fill(0);
    hi.fill(static_cast<std::int64_t>(m) - 1);
    detail::enumerate_box<N>(lo, hi, [&](const auto& k) {
      Vec<N> y;
      for (std::size_t i = 0; i < N; ++i) y[i] = R * (-1.0 + (2.0 * static_cast<double>(k[i]) + 1.0) / static_cast<double>(m));
      const double r = norm(y);
      if (r >= r_in && r > 0.0 && r < r_out((1.0 / r) * y)) q.add(y, 1.0);
    });
  }
  q.normalize();
  return q;
}

// Direction field for the dirac-pair family.
template <std::size_t N>
struct DirectionField {
  enum class Kind { constant, radial, rotating, table };
  Kind kind = Kind::constant;
  Vec<N> value{};
  double scale = 1.0;
  double spacing = 0.0;
  std::shared_ptr<const std::map<std::array<std::int64_t, N>, Vec<N>>> table;

  Vec<N> operator()(const Vec<N>& x) const {
    switch (kind) {
      case Kind::constant: return value;
      case Kind::radial: {
        const double r = norm(x);
        return r > 0.0 ? (scale / r) * x : Vec<N>{};
      }
      case Kind::rotating: {
        Vec<N> t{};
        if constexpr (N >= 2) {
          const double r = std::hypot(x[0], x[1]);
          if (r > 0.0) t[0] = -scale * x[1] / r, t[1] = scale * x[0] / r;
        }
        return t;
      }
      case Kind::table: {
        std::array<std::int64_t, N> k;
        for (std::size_t i = 0; i < N; ++i) k[i] = std::llround(x[i] / spacing);
        auto it = table->find(k);
        if (it == table->end()) throw LabError(ErrorKind::numerical, "direction table: no entry near evaluation point");
        return it->second;
      }
    }
    return {};
  }
  bool is_constant() const { return kind == Kind::constant; }
  double max_norm() const {
    switch (kind) {
      case Kind::constant: return norm(value);
      case Kind::radial:
      case Kind::rotating: return std::abs(scale);
      case Kind::table: {
        double m = 0.0;
        for (const auto& [k, v] : *table) m = std::max(m, norm(v));
        return m;
      }
    }
    return 0.0;
  }
};

// Ellipsoid field E_x: axis lengths plus an orientation rule (2D rotation angle).
template <std::size_t N>
struct EllipsoidField {
  enum class Orientation { fixed, rotating };
  Vec<N> axes = filled<N>(1.0);
  Orientation orientation = Orientation::fixed;
  double angle = 0.0;  // fixed angle, or offset added to the polar angle of x

  double angle_at(const Vec<N>& x) const {
    if constexpr (N == 2) {
      if (orientation == Orientation::rotating) return std::atan2(x[1], x[0]) + angle;
    }
    return angle;
  }
  // body-frame coordinates of y for the ellipsoid at x
  Vec<N> body(const Vec<N>& y, double th) const {
    if constexpr (N == 2) {
      const double c = std::cos(th), s = std::sin(th);
      return Vec<N>{c * y[0] + s * y[1], -s * y[0] + c * y[1]};
    } else {
      (void)th;
      return y;
    }
  }
  bool inside(const Vec<N>& y, double th) const {
    const Vec<N> b = body(y, th);
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += (b[i] / axes[i]) * (b[i] / axes[i]);
    return s < 1.0;
  }
  // distance from 0 to ∂E along the unit vector e
  double boundary_radius(const Vec<N>& e, double th) const {
    const Vec<N> b = body(e, th);
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += (b[i] / axes[i]) * (b[i] / axes[i]);
    return 1.0 / std::sqrt(s);
  }
  Vec<N> bbox_half(double th) const {
    if constexpr (N == 2) {
      const double c = std::cos(th), s = std::sin(th);
      return Vec<N>{std::sqrt(axes[0] * axes[0] * c * c + axes[1] * axes[1] * s * s),
                    std::sqrt(axes[0] * axes[0] * s * s + axes[1] * axes[1] * c * c)};
    } else {
      (void)th;
      return axes;
    }
  }
};

enum class PushMapKind { identity, linear, shift };

// Measurable map h(x, y), clipped radially into closure(B_Λ).
template <std::size_t N>
struct PushMap {
  PushMapKind kind = PushMapKind::identity;
  std::array<Vec<N>, N> matrix{};  // rows
  Vec<N> shift{};
};

struct UniformBallKind {
  double radius = 1.0;
  std::size_t angular = 16, radial = 4;
};
template <std::size_t N>
struct DiracPairKind {
  DirectionField<N> field;
};
template <std::size_t N>
struct EllipsoidShellKind {
  EllipsoidField<N> field;
  std::size_t angular = 16, radial = 3;
};
template <std::size_t N>
struct PushforwardKind {
  PushMap<N> map;
  std::size_t nodes_per_axis = 41;
};

// Finite direction set D ⊂ closure(B_Λ), closed under negation.
template <std::size_t N>
struct DirectionSet {
  std::vector<Vec<N>> dirs;

  // all points of (Λ/m)ℤ^N in the closed ball of radius Λ
  static DirectionSet lattice(double lambda, int m = 8) {
    if (m < 1) fail_validation("direction set: resolution m must be >= 1");
    DirectionSet d;
    std::array<std::int64_t, N> lo, hi;
    lo.fill(-m);
    hi.fill(m);
    const double step = lambda / m;
    detail::enumerate_box<N>(lo, hi, [&](const auto& k) {
      std::int64_t s = 0;
      for (auto c : k) s += c * c;
      if (s > static_cast<std::int64_t>(m) * m) return;
      Vec<N> z;
      for (std::size_t i = 0; i < N; ++i) z[i] = static_cast<double>(k[i]) * step;
      d.dirs.push_back(z);
    });
    return d;
  }

  // radii × uniform angular lattice (N ≤ 2), plus the origin
  static DirectionSet sphere(const std::vector<double>& radii, std::size_t angles) {
    DirectionSet d;
    d.dirs.push_back(Vec<N>{});
    for (double r : radii) {
      if constexpr (N == 1) {
        d.dirs.push_back(Vec<N>{r});
        d.dirs.push_back(Vec<N>{-r});
      } else if constexpr (N == 2) {
        const std::size_t na = 4 * ((angles + 3) / 4);
        for (std::size_t j = 0; j < na; ++j) {
          const double th = 2.0 * pi * static_cast<double>(j) / static_cast<double>(na);
          d.dirs.push_back(Vec<N>{r * std::cos(th), r * std::sin(th)});
        }
      } else {
        for (std::size_t i = 0; i < N; ++i) {
          d.dirs.push_back(r * unit<N>(i));
          d.dirs.push_back(-r * unit<N>(i));
        }
      }
    }
    return d;
  }

  void validate(double lambda) const {
    if (dirs.empty()) fail_validation("direction set: empty");
    for (const auto& z : dirs) {
      if (norm(z) > lambda * (1.0 + 1e-12)) fail_validation("direction set: element outside closure(B_Lambda)");
      bool neg = false;
      for (const auto& w : dirs)
        if (norm(z + w) <= 1e-12 * lambda) neg = true;
      if (!neg) fail_validation("direction set: not closed under negation");
    }
    for (std::size_t i = 0; i < N; ++i) {
      bool has = false;
      for (const auto& z : dirs)
        if (norm(z - lambda * unit<N>(i)) <= 1e-12 * lambda) has = true;
      if (!has) fail_validation("direction set: must contain the coordinate directions scaled to Lambda");
    }
  }

  bool contains(const Vec<N>& z, double tol = 1e-12) const {
    for (const auto& w : dirs)
      if (norm(z - w) <= tol) return true;
    return false;
  }
};

template <std::size_t N>
struct PucciControlKind {
  DirectionSet<N> dirs;
};
template <std::size_t N>
struct FiniteMixtureKind {
  Quadrature<N> atoms;
};

// x ↦ ν_x, symmetric probability measures supported in closure(B_Λ).
template <std::size_t N>
class MeasureFamily {
 public:
  using Variant = std::variant<UniformBallKind, DiracPairKind<N>, EllipsoidShellKind<N>, PushforwardKind<N>,
                               PucciControlKind<N>, FiniteMixtureKind<N>>;

  MeasureFamily(double lambda, Variant kind) : lambda_(lambda), kind_(std::move(kind)) { validate(); }

  static MeasureFamily uniform_ball(double lambda, double r) { return MeasureFamily(lambda, UniformBallKind{r}); }
  static MeasureFamily dirac_pair(double lambda, const Vec<N>& d) {
    DirectionField<N> f;
    f.value = d;
    return MeasureFamily(lambda, DiracPairKind<N>{f});
  }
  static MeasureFamily dirac_field(double lambda, const DirectionField<N>& f) { return MeasureFamily(lambda, DiracPairKind<N>{f}); }
  static MeasureFamily ellipsoid_shell(double lambda, const EllipsoidField<N>& e) {
    return MeasureFamily(lambda, EllipsoidShellKind<N>{e});
  }
  static MeasureFamily pushforward(double lambda, const PushMap<N>& m) { return MeasureFamily(lambda, PushforwardKind<N>{m}); }
  static MeasureFamily pucci_control(double lambda, const DirectionSet<N>& d) { return MeasureFamily(lambda, PucciControlKind<N>{d}); }
  static MeasureFamily finite_mixture(double lambda, const Quadrature<N>& atoms) {
    return MeasureFamily(lambda, FiniteMixtureKind<N>{atoms});
  }

  double lambda() const { return lambda_; }
  const Variant& variant() const { return kind_; }
  bool is_pucci() const { return std::holds_alternative<PucciControlKind<N>>(kind_); }
  bool is_pushforward() const { return std::holds_alternative<PushforwardKind<N>>(kind_); }

  std::string kind_name() const {
    static const char* names[] = {"uniform-ball", "dirac-pair", "ellipsoid-shell", "pushforward", "pucci-control", "finite-mixture"};
    return names[kind_.index()];
  }

  // ν_x does not depend on x
  bool is_constant() const {
    if (auto d = std::get_if<DiracPairKind<N>>(&kind_)) return d->field.is_constant();
    if (auto e = std::get_if<EllipsoidShellKind<N>>(&kind_)) return e->field.orientation == EllipsoidField<N>::Orientation::fixed;
    return true;
  }

  // quadrature for ν_x; exact for atomic kinds
  Quadrature<N> quadrature(const Vec<N>& x) const {
    return std::visit(
        [&](const auto& k) -> Quadrature<N> {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, UniformBallKind>) {
            const double r = k.radius;
            return polar_rule<N>(0.0, [r](const Vec<N>&) { return r; }, k.angular, k.radial);
          } else if constexpr (std::is_same_v<K, DiracPairKind<N>>) {
            Quadrature<N> q;
            const Vec<N> d = k.field(x);
            q.add(d, 0.5);
            q.add(-d, 0.5);
            return q;
          } else if constexpr (std::is_same_v<K, EllipsoidShellKind<N>>) {
            if constexpr (N > 2) {
              fail_validation("ellipsoid-shell: expectation rule available for N <= 2 only");
            } else {
              const double th = k.field.angle_at(x);
              return polar_rule<N>(1.0, [&](const Vec<N>& e) { return k.field.boundary_radius(e, th); }, k.angular, k.radial);
            }
          } else if constexpr (std::is_same_v<K, PushforwardKind<N>>) {
            Quadrature<N> q;
            if constexpr (N <= 2) {
              const std::size_t m = k.nodes_per_axis;
              std::array<std::int64_t, N> lo, hi;
              lo.fill(0);
              hi.fill(static_cast<std::int64_t>(m) - 1);
              detail::enumerate_box<N>(lo, hi, [&](const auto& idx) {
                Vec<N> y;
                for (std::size_t i = 0; i < N; ++i) y[i] = -1.0 + (2.0 * static_cast<double>(idx[i]) + 1.0) / static_cast<double>(m);
                if (norm2(y) < 1.0) q.add(apply_map(k.map, x, y), 1.0);
              });
            } else {
              RandomStream rs(0x5eedf00dULL, 0, 0);
              for (int i = 0; i < 4096; ++i) q.add(apply_map(k.map, x, rs.template in_unit_ball<N>()), 1.0);
            }
            q.normalize();
            return q;
          } else if constexpr (std::is_same_v<K, PucciControlKind<N>>) {
            fail_validation("expect: pucci-control has no fixed measure (use pucci_extreme)");
          } else {
            return k.atoms;
          }
        },
        kind_);
  }

  template <class Phi>
  double expect(const Vec<N>& x, double eps, Phi&& phi) const {
    const auto q = quadrature(x);
    double s = 0.0;
    for (std::size_t i = 0; i < q.z.size(); ++i) s += q.w[i] * phi(x + eps * q.z[i]);
    return s;
  }

  Vec<N> sample(const Vec<N>& x, RandomStream& rng) const {
    return std::visit(
        [&](const auto& k) -> Vec<N> {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, UniformBallKind>) {
            return k.radius * rng.template in_unit_ball<N>();
          } else if constexpr (std::is_same_v<K, DiracPairKind<N>>) {
            const Vec<N> d = k.field(x);
            return rng.uniform() < 0.5 ? d : -d;
          } else if constexpr (std::is_same_v<K, EllipsoidShellKind<N>>) {
            const double th = k.field.angle_at(x);
            const Vec<N> b = k.field.bbox_half(th);
            for (int it = 0; it < 1000000; ++it) {
              Vec<N> y;
              for (std::size_t i = 0; i < N; ++i) y[i] = rng.uniform(-b[i], b[i]);
              if (norm2(y) >= 1.0 && k.field.inside(y, th)) return y;
            }
            throw LabError(ErrorKind::numerical, "ellipsoid-shell sampler: rejection cap exceeded (degenerate ellipsoid)");
          } else if constexpr (std::is_same_v<K, PushforwardKind<N>>) {
            return apply_map(k.map, x, rng.template in_unit_ball<N>());
          } else if constexpr (std::is_same_v<K, PucciControlKind<N>>) {
            fail_validation("sample: pucci-control has no fixed measure");
          } else {
            const double u = rng.uniform();
            double c = 0.0;
            for (std::size_t i = 0; i < k.atoms.z.size(); ++i) {
              c += k.atoms.w[i];
              if (u < c) return k.atoms.z[i];
            }
            return k.atoms.z.back();
          }
        },
        kind_);
  }

  // d(x) of a dirac-pair family
  Vec<N> dirac_direction(const Vec<N>& x) const {
    auto d = std::get_if<DiracPairKind<N>>(&kind_);
    if (!d) fail_validation("dirac_direction: family is not a dirac pair");
    return d->field(x);
  }

  // second moment ∫|z|² dν_x (used by drift bounds)
  double second_moment(const Vec<N>& x) const {
    const auto q = quadrature(x);
    double s = 0.0;
    for (std::size_t i = 0; i < q.z.size(); ++i) s += q.w[i] * norm2(q.z[i]);
    return s;
  }

  Vec<N> apply_map(const PushMap<N>& m, const Vec<N>& /*x*/, const Vec<N>& y) const {
    Vec<N> z = y;
    if (m.kind == PushMapKind::linear) {
      for (std::size_t i = 0; i < N; ++i) z[i] = dot(m.matrix[i], y);
    } else if (m.kind == PushMapKind::shift) {
      z = y + m.shift;
    }
    const double r = norm(z);
    if (r > lambda_) z = (lambda_ / r) * z;
    return z;
  }

 private:
  void validate() const {
    if (!(lambda_ >= 1.0)) fail_validation("measure.Lambda: must be >= 1");
    std::visit(
        [&](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, UniformBallKind>) {
            if (!(k.radius > 0.0 && k.radius <= lambda_)) fail_validation("measure.radius: must lie in (0, Lambda]");
          } else if constexpr (std::is_same_v<K, DiracPairKind<N>>) {
            if (k.field.kind == DirectionField<N>::Kind::rotating && N < 2)
              fail_validation("measure.field: rotating direction field needs N >= 2");
            if (k.field.max_norm() > lambda_ * (1.0 + 1e-12)) fail_validation("measure.field: |d(x)| must not exceed Lambda");
          } else if constexpr (std::is_same_v<K, EllipsoidShellKind<N>>) {
            for (double a : k.field.axes)
              if (!(a >= 1.0 && a <= lambda_ * (1.0 + 1e-12))) fail_validation("measure.axes: each axis must lie in [1, Lambda]");
            double mx = 0.0;
            for (double a : k.field.axes) mx = std::max(mx, a);
            if (!(mx > 1.0)) fail_validation("measure.axes: ellipsoid equals B_1, shell is empty");
          } else if constexpr (std::is_same_v<K, PucciControlKind<N>>) {
            k.dirs.validate(lambda_);
          } else if constexpr (std::is_same_v<K, FiniteMixtureKind<N>>) {
            const auto& a = k.atoms;
            if (a.z.empty()) fail_validation("measure.atoms: empty");
            double s = 0.0;
            for (double w : a.w) {
              if (!(w >= 0.0)) fail_validation("measure.atoms: negative weight");
              s += w;
            }
            if (std::abs(s - 1.0) > 1e-12) fail_validation("measure.atoms: weights must sum to 1");
            for (std::size_t i = 0; i < a.z.size(); ++i) {
              if (norm(a.z[i]) > lambda_ * (1.0 + 1e-12)) fail_validation("measure.atoms: atom outside closure(B_Lambda)");
              double wneg = 0.0, wpos = 0.0;
              for (std::size_t j = 0; j < a.z.size(); ++j) {
                if (norm(a.z[i] + a.z[j]) <= 1e-12) wneg += a.w[j];
                if (norm(a.z[i] - a.z[j]) <= 1e-12) wpos += a.w[j];
              }
              if (std::abs(wneg - wpos) > 1e-12) fail_validation("measure.atoms: atom set must be closed under negation with equal weights");
            }
          }
        },
        kind_);
  }

  double lambda_;
  Variant kind_;
};

struct PucciValue {
  double value = 0.0;       // extremal [u(x+εz)+u(x−εz)]/2 − u(x)
  std::size_t index = 0;    // arg-extremum in the direction set
};

enum class Extremum { max, min };

template <std::size_t N>
PucciValue pucci_extreme(const DirectionSet<N>& dirs, const Vec<N>& x, double eps, const GridFunction<N>& u, Extremum sign) {
  if (dirs.dirs.empty()) fail_validation("pucci_extreme: empty direction set");
  const double ux = u.at(x);
  PucciValue best;
  for (std::size_t i = 0; i < dirs.dirs.size(); ++i) {
    const Vec<N>& z = dirs.dirs[i];
    const double v = 0.5 * (u.at(x + eps * z) + u.at(x - eps * z)) - ux;
    if (i == 0 || (sign == Extremum::max ? v > best.value : v < best.value)) best = {v, i};
  }
  return best;
}

struct SymmetryReport {
  bool structural = false;
  double statistic = 0.0;  // max per-coordinate empirical CDF deviation between {z} and {−z}
  double threshold = 0.0;
  bool pass = false;
};

template <std::size_t N>
SymmetryReport check_symmetry(const MeasureFamily<N>& fam, const Vec<N>& x, std::size_t n, std::uint64_t seed = 1) {
  SymmetryReport r;
  r.threshold = 4.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(n, 1)));
  if (!fam.is_pushforward()) {
    r.structural = true;
    r.pass = true;
    return r;
  }
  std::vector<Vec<N>> zs(n);
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream rs(seed, i, 0);
    zs[i] = fam.sample(x, rs);
  }
  for (std::size_t c = 0; c < N; ++c) {
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = zs[i][c], b[i] = -zs[i][c];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    while (i < n || j < n) {
      const double t = (j >= n || (i < n && a[i] <= b[j])) ? a[i] : b[j];
      while (i < n && a[i] <= t) ++i;
      while (j < n && b[j] <= t) ++j;
      const double d = std::abs(static_cast<double>(i) - static_cast<double>(j)) / static_cast<double>(n);
      r.statistic = std::max(r.statistic, d);
    }
  }
  r.pass = r.statistic < r.threshold;
  return r;
}

}  // namespace dpplab
