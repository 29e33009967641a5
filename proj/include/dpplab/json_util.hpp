#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "geometry.hpp"

namespace dpplab {

using Json = nlohmann::ordered_json;

template <std::size_t N>
Vec<N> vec_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.size() != N)
    fail_validation(field + ": expected an array of " + std::to_string(N) + " numbers");
  Vec<N> v;
  for (std::size_t i = 0; i < N; ++i) {
    if (!j[i].is_number()) fail_validation(field + ": expected numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

template <std::size_t N>
Json vec_to_json(const Vec<N>& v) {
  Json j = Json::array();
  for (double x : v) j.push_back(x);
  return j;
}

inline double number_field(const Json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key)) fail_validation(ctx + "." + key + ": missing");
  if (!j.at(key).is_number()) fail_validation(ctx + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

inline double number_field_or(const Json& j, const std::string& key, double dflt, const std::string& ctx) {
  return j.contains(key) ? number_field(j, key, ctx) : dflt;
}

inline std::string string_field(const Json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key) || !j.at(key).is_string()) fail_validation(ctx + "." + key + ": expected a string");
  return j.at(key).get<std::string>();
}

template <std::size_t N>
Domain<N> domain_from_json(const Json& j, const std::string& ctx) {
  const std::string kind = string_field(j, "kind", ctx);
  const Vec<N> c = vec_from_json<N>(j.at("center"), ctx + ".center");
  if (kind == "box") return Domain<N>::box(c, vec_from_json<N>(j.at("half_widths"), ctx + ".half_widths"));
  if (kind == "ball") return Domain<N>::ball(c, number_field(j, "radius", ctx));
  fail_validation(ctx + ".kind: unknown domain kind '" + kind + "'");
}

template <std::size_t N>
Json domain_to_json(const Domain<N>& d) {
  Json j;
  j["kind"] = d.kind() == DomainKind::box ? "box" : "ball";
  j["center"] = vec_to_json<N>(d.center());
  if (d.kind() == DomainKind::box)
    j["half_widths"] = vec_to_json<N>(d.half_widths());
  else
    j["radius"] = d.radius();
  return j;
}

template <std::size_t N>
Region<N> region_from_json(const Json& j, const std::string& ctx) {
  if (!j.is_array()) fail_validation(ctx + ": expected an array of boxes/balls");
  std::vector<Domain<N>> parts;
  for (std::size_t i = 0; i < j.size(); ++i) parts.push_back(domain_from_json<N>(j[i], ctx + "[" + std::to_string(i) + "]"));
  return Region<N>(std::move(parts));
}

template <std::size_t N>
Json region_to_json(const Region<N>& r) {
  Json j = Json::array();
  for (const auto& p : r.parts()) j.push_back(domain_to_json<N>(p));
  return j;
}

}  // namespace dpplab
