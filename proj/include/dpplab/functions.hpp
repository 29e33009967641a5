#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "json_util.hpp"

namespace dpplab {

// Scalar data on R^N: source terms f, boundary data g, coefficient fields.
template <std::size_t N>
class FunctionSpec {
 public:
  enum class Kind { constant, affine, quadratic, indicator, halfspace, radial_power, cosine, tabulated };

  static FunctionSpec constant(double c) {
    FunctionSpec f;
    f.kind_ = Kind::constant;
    f.offset_ = c;
    return f;
  }
  static FunctionSpec affine(const Vec<N>& grad, double offset) {
    FunctionSpec f;
    f.kind_ = Kind::affine;
    f.vec_ = grad;
    f.offset_ = offset;
    return f;
  }
  // c|x|² + a·x + b
  static FunctionSpec quadratic(double c, const Vec<N>& a, double b) {
    FunctionSpec f;
    f.kind_ = Kind::quadratic;
    f.coeff_ = c;
    f.vec_ = a;
    f.offset_ = b;
    return f;
  }
  static FunctionSpec indicator(const Region<N>& region, double value = 1.0) {
    FunctionSpec f;
    f.kind_ = Kind::indicator;
    f.region_ = region;
    f.coeff_ = value;
    return f;
  }
  // value on {n·x > offset}, 0 elsewhere
  static FunctionSpec halfspace(const Vec<N>& normal, double offset, double value = 1.0) {
    FunctionSpec f;
    f.kind_ = Kind::halfspace;
    f.vec_ = normal;
    f.offset_ = offset;
    f.coeff_ = value;
    return f;
  }
  // scale·|x|^p
  static FunctionSpec radial_power(double p, double scale) {
    FunctionSpec f;
    f.kind_ = Kind::radial_power;
    f.offset_ = p;
    f.coeff_ = scale;
    return f;
  }
  // amplitude·cos(k·x)
  static FunctionSpec cosine(const Vec<N>& k, double amplitude) {
    FunctionSpec f;
    f.kind_ = Kind::cosine;
    f.vec_ = k;
    f.coeff_ = amplitude;
    return f;
  }
  // values on the lattice spacing·ℤ^N, nearest-node lookup
  static FunctionSpec tabulated(std::map<std::array<std::int64_t, N>, double> table, double spacing, std::string file) {
    FunctionSpec f;
    f.kind_ = Kind::tabulated;
    f.table_ = std::make_shared<const std::map<std::array<std::int64_t, N>, double>>(std::move(table));
    f.offset_ = spacing;
    f.file_ = std::move(file);
    return f;
  }

  Kind kind() const { return kind_; }

  double operator()(const Vec<N>& x) const {
    switch (kind_) {
      case Kind::constant: return offset_;
      case Kind::affine: return dot(vec_, x) + offset_;
      case Kind::quadratic: return coeff_ * norm2(x) + dot(vec_, x) + offset_;
      case Kind::indicator: return region_.contains(x) ? coeff_ : 0.0;
      case Kind::halfspace: return dot(vec_, x) > offset_ ? coeff_ : 0.0;
      case Kind::radial_power: return coeff_ * std::pow(norm(x), offset_);
      case Kind::cosine: return coeff_ * std::cos(dot(vec_, x));
      case Kind::tabulated: {
        std::array<std::int64_t, N> k;
        for (std::size_t i = 0; i < N; ++i) k[i] = std::llround(x[i] / offset_);
        auto it = table_->find(k);
        if (it == table_->end()) throw LabError(ErrorKind::numerical, "tabulated function: no entry near evaluation point");
        return it->second;
      }
    }
    return 0.0;
  }

  bool is_affine() const {
    return kind_ == Kind::constant || kind_ == Kind::affine || (kind_ == Kind::quadratic && coeff_ == 0.0);
  }

  // ‖f‖_{L^N(Ω)} when known in closed form
  std::optional<double> ln_norm(const Domain<N>& omega) const {
    const double invn = 1.0 / static_cast<double>(N);
    if (kind_ == Kind::constant) return std::abs(offset_) * std::pow(omega.volume(), invn);
    if (kind_ == Kind::indicator) {
      for (const auto& p : region_.parts()) {
        // parts must lie inside Ω so that |A ∩ Ω| = |A|
        if (p.kind() == DomainKind::box) {
          const Vec<N> l = p.lower(), u = p.upper();
          for (std::size_t c = 0; c < (std::size_t{1} << N); ++c) {
            Vec<N> corner;
            for (std::size_t i = 0; i < N; ++i) corner[i] = (c >> i) & 1u ? u[i] : l[i];
            if (omega.distance(corner) > 0.0) return std::nullopt;
          }
        } else if (omega.kind() == DomainKind::ball) {
          if (norm(p.center() - omega.center()) + p.radius() > omega.radius()) return std::nullopt;
        } else {
          for (std::size_t i = 0; i < N; ++i)
            if (std::abs(p.center()[i] - omega.center()[i]) + p.radius() > omega.half_widths()[i]) return std::nullopt;
        }
      }
      auto m = region_.disjoint_measure();
      if (!m) return std::nullopt;
      return std::abs(coeff_) * std::pow(*m, invn);
    }
    return std::nullopt;
  }

  // sup |f| when known in closed form
  std::optional<double> sup_abs() const {
    switch (kind_) {
      case Kind::constant: return std::abs(offset_);
      case Kind::indicator:
      case Kind::halfspace:
      case Kind::cosine: return std::abs(coeff_);
      default: return std::nullopt;
    }
  }

  const Region<N>& region() const { return region_; }

  Json to_json() const {
    Json j;
    switch (kind_) {
      case Kind::constant:
        j["kind"] = "constant";
        j["value"] = offset_;
        break;
      case Kind::affine:
        j["kind"] = "affine";
        j["gradient"] = vec_to_json<N>(vec_);
        j["offset"] = offset_;
        break;
      case Kind::quadratic:
        j["kind"] = "quadratic";
        j["coeff"] = coeff_;
        j["gradient"] = vec_to_json<N>(vec_);
        j["offset"] = offset_;
        break;
      case Kind::indicator:
        j["kind"] = "indicator";
        j["regions"] = region_to_json<N>(region_);
        j["value"] = coeff_;
        break;
      case Kind::halfspace:
        j["kind"] = "halfspace";
        j["normal"] = vec_to_json<N>(vec_);
        j["offset"] = offset_;
        j["value"] = coeff_;
        break;
      case Kind::radial_power:
        j["kind"] = "radial-power";
        j["exponent"] = offset_;
        j["scale"] = coeff_;
        break;
      case Kind::cosine:
        j["kind"] = "cosine";
        j["wavevector"] = vec_to_json<N>(vec_);
        j["amplitude"] = coeff_;
        break;
      case Kind::tabulated:
        j["kind"] = "tabulated";
        j["file"] = file_;
        j["spacing"] = offset_;
        // table contents participate in the scenario hash
        {
          Json rows = Json::array();
          for (const auto& [k, v] : *table_) {
            Json r = Json::array();
            for (auto c : k) r.push_back(c);
            r.push_back(v);
            rows.push_back(r);
          }
          j["rows"] = rows;
        }
        break;
    }
    return j;
  }

  static FunctionSpec from_json(const Json& j, const std::string& ctx) {
    if (j.is_number()) return constant(j.get<double>());
    const std::string kind = string_field(j, "kind", ctx);
    if (kind == "constant") return constant(number_field(j, "value", ctx));
    if (kind == "affine")
      return affine(vec_from_json<N>(j.at("gradient"), ctx + ".gradient"), number_field_or(j, "offset", 0.0, ctx));
    if (kind == "quadratic")
      return quadratic(number_field(j, "coeff", ctx),
                       j.contains("gradient") ? vec_from_json<N>(j.at("gradient"), ctx + ".gradient") : Vec<N>{},
                       number_field_or(j, "offset", 0.0, ctx));
    if (kind == "indicator" || kind == "box-indicator")
      return indicator(region_from_json<N>(j.at("regions"), ctx + ".regions"), number_field_or(j, "value", 1.0, ctx));
    if (kind == "halfspace")
      return halfspace(vec_from_json<N>(j.at("normal"), ctx + ".normal"), number_field_or(j, "offset", 0.0, ctx),
                       number_field_or(j, "value", 1.0, ctx));
    if (kind == "radial-power") return radial_power(number_field(j, "exponent", ctx), number_field_or(j, "scale", 1.0, ctx));
    if (kind == "cosine")
      return cosine(vec_from_json<N>(j.at("wavevector"), ctx + ".wavevector"), number_field_or(j, "amplitude", 1.0, ctx));
    if (kind == "tabulated") {
      const double spacing = number_field(j, "spacing", ctx);
      if (!(spacing > 0.0)) fail_validation(ctx + ".spacing: must be positive");
      std::map<std::array<std::int64_t, N>, double> table;
      std::string file = j.contains("file") ? string_field(j, "file", ctx) : std::string{};
      if (j.contains("rows")) {
        for (const auto& r : j.at("rows")) {
          std::array<std::int64_t, N> k;
          for (std::size_t i = 0; i < N; ++i) k[i] = r.at(i).get<std::int64_t>();
          table[k] = r.at(N).get<double>();
        }
      } else {
        std::ifstream in(file);
        if (!in) throw LabError(ErrorKind::io, ctx + ".file: cannot open '" + file + "'");
        std::string line;
        bool header = true;
        while (std::getline(in, line)) {
          if (line.empty()) continue;
          if (header) {  // first line is a header (x1,...,xN,value)
            header = false;
            continue;
          }
          std::stringstream ss(line);
          std::string cell;
          Vec<N> x;
          for (std::size_t i = 0; i < N; ++i) {
            std::getline(ss, cell, ',');
            x[i] = std::stod(cell);
          }
          std::getline(ss, cell, ',');
          std::array<std::int64_t, N> k;
          for (std::size_t i = 0; i < N; ++i) k[i] = std::llround(x[i] / spacing);
          table[k] = std::stod(cell);
        }
      }
      if (table.empty()) fail_validation(ctx + ": tabulated function has no rows");
      return tabulated(std::move(table), spacing, file);
    }
    fail_validation(ctx + ".kind: unknown function kind '" + kind + "'");
  }

 private:
  Kind kind_ = Kind::constant;
  Vec<N> vec_{};
  double offset_ = 0.0;
  double coeff_ = 0.0;
  Region<N> region_;
  std::shared_ptr<const std::map<std::array<std::int64_t, N>, double>> table_;
  std::string file_;
};

}  // namespace dpplab
