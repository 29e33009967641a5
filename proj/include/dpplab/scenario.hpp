#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "functions.hpp"
#include "measures.hpp"

namespace dpplab {

struct Params {
  double eps = 0.1;
  double alpha = 0.5;
  double beta = 0.5;
  double lambda = 1.0;

  void validate() const {
    if (!(eps > 0.0)) fail_validation("params.eps: must be positive");
    if (!(beta > 0.0 && beta <= 1.0)) fail_validation("params.beta: must lie in (0, 1]");
    if (!(alpha >= 0.0 && alpha < 1.0)) fail_validation("params.alpha: must lie in [0, 1)");
    if (std::abs(alpha + beta - 1.0) > 1e-12) {
      std::ostringstream os;
      os << "params.alpha + params.beta must equal 1 (alpha=" << alpha << ", beta=" << beta << ", sum=" << alpha + beta << ")";
      fail_validation(os.str());
    }
    if (!(lambda >= 1.0)) fail_validation("params.Lambda: must be >= 1");
  }
};

struct Tolerances {
  double solver = 0.0;    // 0 selects the default 1e-10·max(1, ‖g‖ + diam²‖f‖)
  double residual = 1e-8;
  double contact = 0.0;   // 0 selects 1e-8·osc(u⁺)
};

template <std::size_t N>
struct Scenario {
  std::string name;
  Domain<N> domain = Domain<N>::ball(Vec<N>{}, 1.0);
  Params params;
  double h = 0.025;
  MeasureFamily<N> family = MeasureFamily<N>::uniform_ball(1.0, 1.0);
  FunctionSpec<N> f = FunctionSpec<N>::constant(0.0);
  FunctionSpec<N> g = FunctionSpec<N>::constant(0.0);
  std::optional<FunctionSpec<N>> beta_field;  // variable β(x), Pucci path only
  int direction_resolution = 8;                // m in the default lattice direction set
  std::uint64_t seed = 1;
  std::size_t n_paths = 100000;
  Tolerances tolerances;
  std::vector<Vec<N>> probes;

  static constexpr std::size_t dim = N;

  double lambda_eps() const { return params.lambda * params.eps; }

  // Direction set used by the Pucci operators.
  DirectionSet<N> directions() const {
    if (auto pc = std::get_if<PucciControlKind<N>>(&family.variant())) return pc->dirs;
    return DirectionSet<N>::lattice(params.lambda, direction_resolution);
  }

  // Returns non-fatal warnings; throws LabError(validation) on invariant violations.
  std::vector<std::string> validate() const {
    params.validate();
    if (std::abs(family.lambda() - params.lambda) > 1e-12) fail_validation("measure.Lambda: must equal params.Lambda");
    if (!(h > 0.0)) fail_validation("h: must be positive");
    if (h > params.eps / 4.0 * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "h: ball quadrature resolution rule requires h <= eps/4 (h=" << h << ", eps/4=" << params.eps / 4.0 << ")";
      fail_validation(os.str());
    }
    if (n_paths == 0) fail_validation("n_paths: must be positive");
    if (tolerances.solver < 0.0 || tolerances.residual < 0.0 || tolerances.contact < 0.0)
      fail_validation("tolerances: must be non-negative");
    for (const auto& p : probes)
      if (!domain.contains(p)) fail_validation("probes: every probe point must lie in the domain");
    std::vector<std::string> warnings;
    if (params.eps > 0.5 * domain.diameter()) warnings.push_back("eps exceeds half the domain diameter; estimates are far from asymptotic");
    if (params.eps * params.lambda >= 1.0) warnings.push_back("eps >= 1/Lambda; exit-time bounds assume eps < 1/Lambda");
    if (params.alpha > 0.0 && family.is_pucci() && !beta_field) {
      // fine: the Pucci solvers use the direction set, the linear solver rejects it later
    }
    return warnings;
  }

  Scenario with_eps(double eps) const {
    Scenario s = *this;
    s.params.eps = eps;
    s.h = eps / 4.0;
    return s;
  }
};

using AnyScenario = std::variant<Scenario<1>, Scenario<2>, Scenario<3>>;

// ---------------------------------------------------------------- JSON

template <std::size_t N>
Json family_to_json(const MeasureFamily<N>& fam) {
  Json j;
  j["kind"] = fam.kind_name();
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, UniformBallKind>) {
          j["radius"] = k.radius;
          j["angular"] = k.angular;
          j["radial"] = k.radial;
        } else if constexpr (std::is_same_v<K, DiracPairKind<N>>) {
          Json f;
          using FK = typename DirectionField<N>::Kind;
          switch (k.field.kind) {
            case FK::constant:
              f["kind"] = "constant";
              f["vector"] = vec_to_json<N>(k.field.value);
              break;
            case FK::radial:
              f["kind"] = "radial";
              f["scale"] = k.field.scale;
              break;
            case FK::rotating:
              f["kind"] = "rotating";
              f["scale"] = k.field.scale;
              break;
            case FK::table: {
              f["kind"] = "table";
              f["spacing"] = k.field.spacing;
              Json rows = Json::array();
              for (const auto& [idx, v] : *k.field.table) {
                Json r = Json::array();
                for (auto c : idx) r.push_back(c);
                for (double c : v) r.push_back(c);
                rows.push_back(r);
              }
              f["rows"] = rows;
              break;
            }
          }
          j["field"] = f;
        } else if constexpr (std::is_same_v<K, EllipsoidShellKind<N>>) {
          j["axes"] = vec_to_json<N>(k.field.axes);
          j["orientation"] = k.field.orientation == EllipsoidField<N>::Orientation::fixed ? "fixed" : "rotating";
          j["angle"] = k.field.angle;
          j["angular"] = k.angular;
          j["radial"] = k.radial;
        } else if constexpr (std::is_same_v<K, PushforwardKind<N>>) {
          Json m;
          if (k.map.kind == PushMapKind::identity) m["kind"] = "identity";
          if (k.map.kind == PushMapKind::linear) {
            m["kind"] = "linear";
            Json rows = Json::array();
            for (const auto& r : k.map.matrix) rows.push_back(vec_to_json<N>(r));
            m["matrix"] = rows;
          }
          if (k.map.kind == PushMapKind::shift) {
            m["kind"] = "shift";
            m["shift"] = vec_to_json<N>(k.map.shift);
          }
          j["map"] = m;
          j["nodes_per_axis"] = k.nodes_per_axis;
        } else if constexpr (std::is_same_v<K, PucciControlKind<N>>) {
          Json d = Json::array();
          for (const auto& z : k.dirs.dirs) d.push_back(vec_to_json<N>(z));
          j["directions"] = Json{{"rule", "list"}, {"vectors", d}};
        } else {
          Json a = Json::array();
          for (std::size_t i = 0; i < k.atoms.z.size(); ++i) a.push_back(Json{{"z", vec_to_json<N>(k.atoms.z[i])}, {"w", k.atoms.w[i]}});
          j["atoms"] = a;
        }
      },
      fam.variant());
  return j;
}

template <std::size_t N>
MeasureFamily<N> family_from_json(const Json& j, double lambda, const std::string& ctx) {
  const std::string kind = string_field(j, "kind", ctx);
  auto count = [&](const char* key, std::size_t d) {
    return j.contains(key) ? j.at(key).get<std::size_t>() : d;
  };
  if (kind == "uniform-ball") {
    UniformBallKind k{number_field_or(j, "radius", 1.0, ctx), count("angular", 16), count("radial", 4)};
    return MeasureFamily<N>(lambda, k);
  }
  if (kind == "dirac-pair") {
    DirectionField<N> f;
    const Json& fj = j.at("field");
    const std::string fk = string_field(fj, "kind", ctx + ".field");
    if (fk == "constant") {
      f.kind = DirectionField<N>::Kind::constant;
      f.value = vec_from_json<N>(fj.at("vector"), ctx + ".field.vector");
    } else if (fk == "radial" || fk == "rotating") {
      f.kind = fk == "radial" ? DirectionField<N>::Kind::radial : DirectionField<N>::Kind::rotating;
      f.scale = number_field_or(fj, "scale", 1.0, ctx + ".field");
    } else if (fk == "table") {
      f.kind = DirectionField<N>::Kind::table;
      f.spacing = number_field(fj, "spacing", ctx + ".field");
      std::map<std::array<std::int64_t, N>, Vec<N>> table;
      auto add_row = [&](const std::vector<double>& r) {
        if (r.size() != 2 * N) fail_validation(ctx + ".field: table rows need N indices and N components");
        std::array<std::int64_t, N> k;
        Vec<N> v;
        for (std::size_t i = 0; i < N; ++i) k[i] = std::llround(r[i]), v[i] = r[N + i];
        table[k] = v;
      };
      if (fj.contains("rows")) {
        for (const auto& r : fj.at("rows")) add_row(r.get<std::vector<double>>());
      } else {
        const std::string file = string_field(fj, "file", ctx + ".field");
        std::ifstream in(file);
        if (!in) throw LabError(ErrorKind::io, ctx + ".field.file: cannot open '" + file + "'");
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
          if (line.empty()) continue;
          std::vector<double> r;
          std::stringstream ss(line);
          std::string cell;
          while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
          add_row(r);
        }
      }
      f.table = std::make_shared<const std::map<std::array<std::int64_t, N>, Vec<N>>>(std::move(table));
    } else {
      fail_validation(ctx + ".field.kind: unknown direction field '" + fk + "'");
    }
    return MeasureFamily<N>(lambda, DiracPairKind<N>{f});
  }
  if (kind == "ellipsoid-shell") {
    EllipsoidField<N> e;
    e.axes = vec_from_json<N>(j.at("axes"), ctx + ".axes");
    const std::string o = j.contains("orientation") ? string_field(j, "orientation", ctx) : "fixed";
    if (o != "fixed" && o != "rotating") fail_validation(ctx + ".orientation: expected fixed or rotating");
    e.orientation = o == "fixed" ? EllipsoidField<N>::Orientation::fixed : EllipsoidField<N>::Orientation::rotating;
    e.angle = number_field_or(j, "angle", 0.0, ctx);
    return MeasureFamily<N>(lambda, EllipsoidShellKind<N>{e, count("angular", 16), count("radial", 3)});
  }
  if (kind == "pushforward") {
    PushMap<N> m;
    const Json& mj = j.at("map");
    const std::string mk = string_field(mj, "kind", ctx + ".map");
    if (mk == "identity") {
      m.kind = PushMapKind::identity;
    } else if (mk == "linear") {
      m.kind = PushMapKind::linear;
      const Json& rows = mj.at("matrix");
      if (!rows.is_array() || rows.size() != N) fail_validation(ctx + ".map.matrix: expected N rows");
      for (std::size_t i = 0; i < N; ++i) m.matrix[i] = vec_from_json<N>(rows[i], ctx + ".map.matrix");
    } else if (mk == "shift") {
      m.kind = PushMapKind::shift;
      m.shift = vec_from_json<N>(mj.at("shift"), ctx + ".map.shift");
    } else {
      fail_validation(ctx + ".map.kind: unknown map '" + mk + "'");
    }
    return MeasureFamily<N>(lambda, PushforwardKind<N>{m, count("nodes_per_axis", 41)});
  }
  if (kind == "pucci-control") {
    DirectionSet<N> d;
    const Json dj = j.contains("directions") ? j.at("directions") : Json{{"rule", "lattice"}};
    const std::string rule = string_field(dj, "rule", ctx + ".directions");
    if (rule == "lattice") {
      d = DirectionSet<N>::lattice(lambda, dj.contains("m") ? dj.at("m").get<int>() : 8);
    } else if (rule == "sphere") {
      d = DirectionSet<N>::sphere(dj.at("radii").get<std::vector<double>>(), dj.contains("angles") ? dj.at("angles").get<std::size_t>() : 16);
    } else if (rule == "list") {
      for (const auto& v : dj.at("vectors")) d.dirs.push_back(vec_from_json<N>(v, ctx + ".directions.vectors"));
    } else {
      fail_validation(ctx + ".directions.rule: unknown rule '" + rule + "'");
    }
    return MeasureFamily<N>(lambda, PucciControlKind<N>{d});
  }
  if (kind == "finite-mixture") {
    Quadrature<N> q;
    for (const auto& a : j.at("atoms")) q.add(vec_from_json<N>(a.at("z"), ctx + ".atoms.z"), number_field(a, "w", ctx + ".atoms"));
    return MeasureFamily<N>(lambda, FiniteMixtureKind<N>{q});
  }
  fail_validation(ctx + ".kind: unknown measure family '" + kind + "'");
}

template <std::size_t N>
Json scenario_to_json(const Scenario<N>& s) {
  Json j;
  j["name"] = s.name;
  j["domain"] = domain_to_json<N>(s.domain);
  j["params"] = Json{{"eps", s.params.eps}, {"alpha", s.params.alpha}, {"beta", s.params.beta}, {"Lambda", s.params.lambda}};
  j["h"] = s.h;
  j["measure"] = family_to_json<N>(s.family);
  j["f"] = s.f.to_json();
  j["g"] = s.g.to_json();
  if (s.beta_field) j["beta_field"] = s.beta_field->to_json();
  j["direction_resolution"] = s.direction_resolution;
  j["seed"] = s.seed;
  j["n_paths"] = s.n_paths;
  j["tolerances"] = Json{{"solver", s.tolerances.solver}, {"residual", s.tolerances.residual}, {"contact", s.tolerances.contact}};
  Json pr = Json::array();
  for (const auto& p : s.probes) pr.push_back(vec_to_json<N>(p));
  j["probes"] = pr;
  return j;
}

template <std::size_t N>
Scenario<N> scenario_from_json(const Json& j) {
  static const char* known[] = {"name", "domain", "params", "h", "measure", "f", "g", "beta_field", "direction_resolution",
                                "seed", "n_paths", "tolerances", "probes"};
  for (const auto& [key, val] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) fail_validation("scenario: unknown key '" + key + "'");
  }
  Scenario<N> s;
  s.name = j.contains("name") ? j.at("name").get<std::string>() : "unnamed";
  s.domain = domain_from_json<N>(j.at("domain"), "domain");
  const Json& p = j.at("params");
  s.params.eps = number_field(p, "eps", "params");
  s.params.alpha = number_field(p, "alpha", "params");
  s.params.beta = number_field(p, "beta", "params");
  s.params.lambda = number_field_or(p, "Lambda", 1.0, "params");
  s.params.validate();
  s.h = j.contains("h") ? number_field(j, "h", "scenario") : s.params.eps / 4.0;
  s.family = family_from_json<N>(j.at("measure"), s.params.lambda, "measure");
  s.f = j.contains("f") ? FunctionSpec<N>::from_json(j.at("f"), "f") : FunctionSpec<N>::constant(0.0);
  s.g = j.contains("g") ? FunctionSpec<N>::from_json(j.at("g"), "g") : FunctionSpec<N>::constant(0.0);
  if (j.contains("beta_field")) s.beta_field = FunctionSpec<N>::from_json(j.at("beta_field"), "beta_field");
  if (j.contains("direction_resolution")) s.direction_resolution = j.at("direction_resolution").get<int>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("n_paths")) s.n_paths = j.at("n_paths").get<std::size_t>();
  if (j.contains("tolerances")) {
    const Json& t = j.at("tolerances");
    s.tolerances.solver = number_field_or(t, "solver", 0.0, "tolerances");
    s.tolerances.residual = number_field_or(t, "residual", 1e-8, "tolerances");
    s.tolerances.contact = number_field_or(t, "contact", 0.0, "tolerances");
  }
  if (j.contains("probes"))
    for (const auto& v : j.at("probes")) s.probes.push_back(vec_from_json<N>(v, "probes"));
  s.validate();
  return s;
}

inline AnyScenario scenario_from_json_any(const Json& j) {
  if (!j.is_object()) fail_validation("scenario: expected a JSON object");
  if (!j.contains("domain") || !j.at("domain").contains("center") || !j.at("domain").at("center").is_array())
    fail_validation("domain.center: missing (it fixes the dimension)");
  switch (j.at("domain").at("center").size()) {
    case 1: return scenario_from_json<1>(j);
    case 2: return scenario_from_json<2>(j);
    case 3: return scenario_from_json<3>(j);
    default: fail_validation("domain.center: dimension must be 1, 2 or 3");
  }
}

// ---------------------------------------------------------------- built-ins

namespace builtin {

template <std::size_t N>
Scenario<N> base(const std::string& name, const Domain<N>& d, double eps, double alpha, double lambda, const MeasureFamily<N>& fam) {
  Scenario<N> s;
  s.name = name;
  s.domain = d;
  s.params = Params{eps, alpha, 1.0 - alpha, lambda};
  s.h = eps / 4.0;
  s.family = fam;
  return s;
}

// linear limit: dirac pair d = 1, f = 1, g = 0
inline Scenario<1> linear_1d() {
  auto s = base<1>("linear-1d", Domain<1>::box({0.0}, {1.0}), 0.1, 0.5, 1.0, MeasureFamily<1>::dirac_pair(1.0, {1.0}));
  s.f = FunctionSpec<1>::constant(1.0);
  s.probes = {{-0.6}, {-0.3}, {0.0}, {0.3}, {0.6}};
  return s;
}

inline Scenario<2> uniform_2d() {
  auto s = base<2>("uniform-2d", Domain<2>::ball({0.0, 0.0}, 1.0), 0.1, 0.5, 1.0, MeasureFamily<2>::uniform_ball(1.0, 1.0));
  s.f = FunctionSpec<2>::constant(1.0);
  s.g = FunctionSpec<2>::affine({0.5, 0.0}, 0.0);
  s.probes = {{0.0, 0.0}, {0.5, 0.0}, {-0.3, 0.4}, {0.0, -0.7}, {0.6, 0.6}};
  return s;
}

// radial dirac-pair field, the direction of the gradient of a radial p-harmonic function
inline Scenario<2> plaplace_2d() {
  DirectionField<2> f;
  f.kind = DirectionField<2>::Kind::radial;
  f.scale = 1.0;
  auto s = base<2>("plaplace-2d", Domain<2>::box({0.0, 0.0}, {1.0, 1.0}), 0.1, 0.5, 1.0, MeasureFamily<2>::dirac_field(1.0, f));
  s.f = FunctionSpec<2>::constant(0.0);
  s.g = FunctionSpec<2>::quadratic(1.0, {0.0, 0.0}, 0.0);
  s.probes = {{0.0, 0.0}, {0.4, 0.1}, {-0.5, -0.5}, {0.2, -0.7}, {-0.8, 0.3}};
  return s;
}

// ellipsoid process with axes (2, 1), major axis along x/|x|
inline Scenario<2> ellipsoid_2d() {
  EllipsoidField<2> e;
  e.axes = {2.0, 1.0};
  e.orientation = EllipsoidField<2>::Orientation::rotating;
  auto s = base<2>("ellipsoid-2d", Domain<2>::ball({0.0, 0.0}, 0.5), 0.04, 0.5, 2.0, MeasureFamily<2>::ellipsoid_shell(2.0, e));
  s.g = FunctionSpec<2>::halfspace({1.0, 0.0}, 0.0, 1.0);
  s.probes = {{0.0, 0.0}, {0.2, 0.1}, {-0.2, 0.2}, {0.1, -0.3}, {-0.35, -0.1}};
  return s;
}

// α = 0: pure uniform-ball walk, exit-time studies
inline Scenario<1> exit_1d() {
  auto s = base<1>("exit-1d", Domain<1>::box({0.0}, {1.0}), 0.1, 0.0, 1.0, MeasureFamily<1>::uniform_ball(1.0, 1.0));
  s.probes = {{0.0}};
  return s;
}

// unbounded second solution on the dyadic points 1/2^k (checked symbolically)
inline Scenario<1> nonuniqueness_1d() {
  auto s = base<1>("nonuniqueness-1d", Domain<1>::box({0.0}, {2.0}), 1.0, 0.5, 1.0, MeasureFamily<1>::dirac_pair(1.0, {0.5}));
  s.probes = {{0.5}};
  return s;
}

// Dirac pairs steering onto a null set S; f = 1_S is tracked symbolically
inline Scenario<2> ln_failure_2d() {
  auto s = base<2>("ln-failure-2d", Domain<2>::ball({0.0, 0.0}, 2.0), 1.0, 0.5, 1.0, MeasureFamily<2>::dirac_pair(1.0, {1.0, 0.0}));
  s.probes = {{0.0, 0.0}};
  return s;
}

inline Scenario<1> pucci_1d() {
  auto s = base<1>("pucci-1d", Domain<1>::box({0.0}, {1.0}), 0.1, 0.5, 1.0,
                   MeasureFamily<1>::pucci_control(1.0, DirectionSet<1>::lattice(1.0, 8)));
  s.f = FunctionSpec<1>::constant(1.0);
  s.probes = {{0.0}};
  return s;
}

// tug-of-war with noise and variable β(x) in [0.3, 0.7]
inline Scenario<2> px_laplace_2d() {
  auto s = base<2>("px-laplace-2d", Domain<2>::box({0.0, 0.0}, {1.0, 1.0}), 0.2, 0.7, 1.0,
                   MeasureFamily<2>::pucci_control(1.0, DirectionSet<2>::lattice(1.0, 4)));
  s.beta_field = FunctionSpec<2>::quadratic(0.2, {0.0, 0.0}, 0.3);
  s.g = FunctionSpec<2>::radial_power(1.0, 1.0);
  s.probes = {{0.0, 0.0}};
  return s;
}

inline Scenario<1> box_indicator_1d() {
  auto s = base<1>("box-indicator-1d", Domain<1>::box({0.0}, {1.0}), 0.1, 0.5, 1.0, MeasureFamily<1>::dirac_pair(1.0, {1.0}));
  s.f = FunctionSpec<1>::indicator(Region<1>({Domain<1>::box({0.205}, {0.005})}));
  s.probes = {{0.0}};
  return s;
}

inline Scenario<2> box_indicator_2d() {
  auto s = base<2>("box-indicator-2d", Domain<2>::ball({0.0, 0.0}, 1.0), 0.1, 0.5, 1.0, MeasureFamily<2>::uniform_ball(1.0, 1.0));
  s.f = FunctionSpec<2>::indicator(Region<2>({Domain<2>::box({0.2, 0.0}, {0.1, 0.1})}));
  s.probes = {{0.0, 0.0}};
  return s;
}

inline Scenario<2> mixture_2d() {
  Quadrature<2> q;
  q.add({1.5, 0.0}, 0.2);
  q.add({-1.5, 0.0}, 0.2);
  q.add({0.5, 0.5}, 0.3);
  q.add({-0.5, -0.5}, 0.3);
  auto s = base<2>("mixture-2d", Domain<2>::box({0.0, 0.0}, {1.0, 0.5}), 0.1, 0.4, 1.5, MeasureFamily<2>::finite_mixture(1.5, q));
  s.f = FunctionSpec<2>::indicator(Region<2>({Domain<2>::ball({0.3, 0.0}, 0.2)}));
  s.probes = {{0.0, 0.0}};
  return s;
}

}  // namespace builtin

inline std::vector<std::string> scenario_list() {
  return {"linear-1d", "uniform-2d", "plaplace-2d", "ellipsoid-2d", "exit-1d", "nonuniqueness-1d", "ln-failure-2d",
          "pucci-1d", "px-laplace-2d", "box-indicator-1d", "box-indicator-2d", "mixture-2d"};
}

inline AnyScenario builtin_scenario(const std::string& name) {
  using namespace builtin;
  if (name == "linear-1d") return linear_1d();
  if (name == "uniform-2d") return uniform_2d();
  if (name == "plaplace-2d") return plaplace_2d();
  if (name == "ellipsoid-2d") return ellipsoid_2d();
  if (name == "exit-1d") return exit_1d();
  if (name == "nonuniqueness-1d") return nonuniqueness_1d();
  if (name == "ln-failure-2d") return ln_failure_2d();
  if (name == "pucci-1d") return pucci_1d();
  if (name == "px-laplace-2d") return px_laplace_2d();
  if (name == "box-indicator-1d") return box_indicator_1d();
  if (name == "box-indicator-2d") return box_indicator_2d();
  if (name == "mixture-2d") return mixture_2d();
  fail_validation("scenario: unknown built-in '" + name + "'");
}

// Built-in name or path to a JSON file.
inline AnyScenario scenario_load(const std::string& path_or_name) {
  for (const auto& n : scenario_list())
    if (n == path_or_name) return builtin_scenario(n);
  std::ifstream in(path_or_name);
  if (!in) throw LabError(ErrorKind::io, "scenario: '" + path_or_name + "' is neither a built-in nor a readable file");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    fail_validation(std::string("scenario: parse failure: ") + e.what());
  }
  try {
    return scenario_from_json_any(j);
  } catch (const Json::exception& e) {
    fail_validation(std::string("scenario: malformed field: ") + e.what());
  }
}

}  // namespace dpplab
