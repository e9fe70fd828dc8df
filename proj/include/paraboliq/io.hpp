#pragma once

// JSON schema for charts, forms and sampler settings.
//
//   polynomial   [{"exps": [e_0, ..., e_{m-1}], "re": c_re, "im": c_im}, ...]
//   chart        {"name", "n", "N", "radii", "pi": [poly...], "cut_pullbacks": [poly...],
//                 "monomial": {"k": [...]}}            (name, radii, monomial optional)
//   stokes form  {"name", "a": [poly...], "b": [poly...], "bump": {"outer_radius": R}}
//   bounded form {"name", "q": 0|1, "a": [poly...], "sup": s, "dbar": [poly...]}
//   sampler      {"seed", "n_samples", "block_size", "mode", "log_radial_floor"}
//
// Doubles are written with round-trip precision, so parse(dump(x)) == x.
// Every error names the offending field by its path in the document.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "paraboliq/dbar.hpp"
#include "paraboliq/geometry.hpp"
#include "paraboliq/integrate.hpp"
#include "paraboliq/polynomial.hpp"
#include "paraboliq/stokes.hpp"

namespace paraboliq::io {

using json = nlohmann::ordered_json;

/// Malformed configuration: bad JSON text or a field of the wrong shape.
struct ConfigError : ContractViolation {
  using ContractViolation::ContractViolation;
};

/// Parse JSON text; syntax errors report line and column.
inline json parse_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON (" +
                      e.what() + ")");
  }
}

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ConfigError("field '" + path + "': " + what);
}

inline const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing");
  return *it;
}

inline const json* optional_member(const json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

inline std::uint64_t unsigned_integer(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    fail(path, "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

inline const json& array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  return v;
}

/// Turn a library contract violation into a field diagnostic.
template <class F>
auto at_path(const std::string& path, F&& build) {
  try {
    return build();
  } catch (const ConfigError&) {
    throw;
  } catch (const ContractViolation& e) {
    fail(path, e.what());
  }
}

}  // namespace detail

// ---- polynomials -------------------------------------------------------------

inline json to_json(const Polynomial& p) {
  json out = json::array();
  for (const auto& t : p.terms()) out.push_back({{"exps", t.exps}, {"re", t.coeff.real()}, {"im", t.coeff.imag()}});
  return out;
}

inline Polynomial polynomial_from_json(const json& v, std::size_t num_vars, const std::string& path) {
  std::vector<Term> terms;
  const json& list = detail::array(v, path);
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string tp = path + "[" + std::to_string(i) + "]";
    const json& e = detail::array(detail::member(list[i], "exps", tp), tp + ".exps");
    if (e.size() != num_vars)
      detail::fail(tp + ".exps", "expected " + std::to_string(num_vars) + " exponents, got " + std::to_string(e.size()));
    Exponents exps;
    for (std::size_t k = 0; k < e.size(); ++k)
      exps.push_back(static_cast<unsigned>(detail::unsigned_integer(e[k], tp + ".exps[" + std::to_string(k) + "]")));
    const double re = detail::number(detail::member(list[i], "re", tp), tp + ".re");
    const json* im = detail::optional_member(list[i], "im");
    terms.push_back({std::move(exps), {re, im ? detail::number(*im, tp + ".im") : 0.0}});
  }
  return Polynomial(num_vars, std::move(terms));
}

inline json to_json(std::span<const Polynomial> ps) {
  json out = json::array();
  for (const auto& p : ps) out.push_back(to_json(p));
  return out;
}

inline std::vector<Polynomial> polynomials_from_json(const json& v, std::size_t num_vars, const std::string& path) {
  std::vector<Polynomial> out;
  const json& list = detail::array(v, path);
  for (std::size_t i = 0; i < list.size(); ++i)
    out.push_back(polynomial_from_json(list[i], num_vars, path + "[" + std::to_string(i) + "]"));
  return out;
}

// ---- charts ------------------------------------------------------------------

inline json to_json(const ResolutionChart& c) {
  json out{{"name", c.name()},
           {"n", c.n()},
           {"N", c.N()},
           {"radii", c.radii()},
           {"pi", to_json(c.pi())},
           {"cut_pullbacks", to_json(c.cut_pullbacks())}};
  if (c.monomial()) out["monomial"] = {{"k", c.monomial()->k}};
  return out;
}

inline ResolutionChart chart_from_json(const json& v, const std::string& path) {
  const std::size_t n = detail::unsigned_integer(detail::member(v, "n", path), path + ".n");
  const std::size_t N = detail::unsigned_integer(detail::member(v, "N", path), path + ".N");
  if (n == 0) detail::fail(path + ".n", "must be positive");
  std::string name = "custom";
  if (const json* nm = detail::optional_member(v, "name")) {
    if (!nm->is_string()) detail::fail(path + ".name", "expected a string");
    name = nm->get<std::string>();
  }
  std::vector<double> radii;
  if (const json* r = detail::optional_member(v, "radii")) {
    const json& list = detail::array(*r, path + ".radii");
    for (std::size_t i = 0; i < list.size(); ++i)
      radii.push_back(detail::number(list[i], path + ".radii[" + std::to_string(i) + "]"));
  }
  auto pi = polynomials_from_json(detail::member(v, "pi", path), n, path + ".pi");
  auto cut = polynomials_from_json(detail::member(v, "cut_pullbacks", path), n, path + ".cut_pullbacks");
  std::optional<MonomialDeclaration> mono;
  if (const json* m = detail::optional_member(v, "monomial")) {
    MonomialDeclaration d;
    const json& k = detail::array(detail::member(*m, "k", path + ".monomial"), path + ".monomial.k");
    for (std::size_t i = 0; i < k.size(); ++i)
      d.k.push_back(static_cast<unsigned>(detail::unsigned_integer(k[i], path + ".monomial.k[" + std::to_string(i) + "]")));
    mono = std::move(d);
  }
  return detail::at_path(path, [&] { return ResolutionChart(name, n, N, radii, pi, cut, mono); });
}

// ---- forms -------------------------------------------------------------------

inline json to_json(const std::string& name, const AmbientOneForm& f) {
  json out{{"name", name}, {"a", to_json(f.a())}, {"b", to_json(f.b())}};
  if (f.bump()) out["bump"] = {{"outer_radius", f.bump()->outer_radius()}};
  return out;
}

inline AmbientOneForm stokes_form_from_json(const json& v, std::size_t N, const std::string& path) {
  std::vector<Polynomial> a, b;
  if (const json* x = detail::optional_member(v, "a")) a = polynomials_from_json(*x, 2 * N, path + ".a");
  if (const json* x = detail::optional_member(v, "b")) b = polynomials_from_json(*x, 2 * N, path + ".b");
  std::optional<double> bump;
  if (const json* x = detail::optional_member(v, "bump"))
    bump = detail::number(detail::member(*x, "outer_radius", path + ".bump"), path + ".bump.outer_radius");
  return detail::at_path(path, [&] { return AmbientOneForm(N, a, b, bump); });
}

inline json to_json(const BoundedTestForm& f) {
  return json{{"name", f.name},
              {"q", f.q},
              {"a", to_json(f.coefficients)},
              {"sup", f.declared_sup},
              {"dbar", to_json(f.dbar_coefficients)}};
}

inline BoundedTestForm bounded_form_from_json(const json& v, const ResolutionChart& chart, const std::string& path) {
  BoundedTestForm f;
  const std::size_t n = chart.n();
  f.name = "form";
  if (const json* nm = detail::optional_member(v, "name")) {
    if (!nm->is_string()) detail::fail(path + ".name", "expected a string");
    f.name = nm->get<std::string>();
  }
  f.q = static_cast<unsigned>(detail::unsigned_integer(detail::member(v, "q", path), path + ".q"));
  f.coefficients = polynomials_from_json(detail::member(v, "a", path), 2 * n, path + ".a");
  f.declared_sup = detail::number(detail::member(v, "sup", path), path + ".sup");
  f.dbar_coefficients = polynomials_from_json(detail::member(v, "dbar", path), 2 * n, path + ".dbar");
  detail::at_path(path, [&] {
    check_form_shape(chart, f);
    return 0;
  });
  return f;
}

/// A form entry is a bounded test form when it carries "q".
inline bool is_bounded_form(const json& v) { return v.is_object() && v.contains("q"); }

// ---- sampler -----------------------------------------------------------------

inline json to_json(const SamplerConfig& c) {
  return json{{"seed", c.seed},
              {"n_samples", c.n_samples},
              {"block_size", c.block_size},
              {"mode", to_string(c.mode)},
              {"log_radial_floor", c.log_radial_floor}};
}

/// Fields absent from v keep the values of base.
inline SamplerConfig sampler_from_json(const json& v, SamplerConfig base, const std::string& path) {
  if (!v.is_object()) detail::fail(path, "expected an object");
  for (const auto& [key, value] : v.items()) {
    const std::string p = path + "." + key;
    if (key == "seed") {
      base.seed = detail::unsigned_integer(value, p);
    } else if (key == "n_samples") {
      base.n_samples = detail::unsigned_integer(value, p);
    } else if (key == "block_size") {
      base.block_size = detail::unsigned_integer(value, p);
    } else if (key == "mode") {
      if (!value.is_string()) detail::fail(p, "expected a string");
      base.mode = detail::at_path(p, [&] { return radial_mode_from_string(value.get<std::string>()); });
    } else if (key == "log_radial_floor") {
      base.log_radial_floor = detail::number(value, p);
    } else if (key == "workers") {
      base.workers = static_cast<unsigned>(detail::unsigned_integer(value, p));
    } else {
      detail::fail(p, "unknown sampler field");
    }
  }
  return base;
}

}  // namespace paraboliq::io
