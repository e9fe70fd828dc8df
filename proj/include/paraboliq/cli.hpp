#pragma once

// Batch driver: resolve a RunConfig from flags and/or a JSON config file,
// run one command, and write a deterministic CSV or JSON report.
//
// Report layout (CSV):
//   # timestamp: <UTC time>          (omitted with --no-timestamp)
//   # paraboliq <version>
//   # config: <resolved config, one-line JSON; re-parseable as a config file>
//   # rng: <generator>
//   # model_tail_bound: <2 pi / |log floor|>
//   <header row>
//   <rows>
//   # verdict <name>: <pass|fail> (<tolerance and measured value>)
// JSON output carries the same content as {"metadata": {...}, "rows": [...]}.
//
// Exit status: 0 all verdicts pass, 1 a verdict failed or the computation
// raised, 2 malformed flags or config.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "paraboliq/capacity.hpp"
#include "paraboliq/dbar.hpp"
#include "paraboliq/examples.hpp"
#include "paraboliq/exhaustion.hpp"
#include "paraboliq/geometry.hpp"
#include "paraboliq/integrate.hpp"
#include "paraboliq/io.hpp"
#include "paraboliq/random.hpp"
#include "paraboliq/stokes.hpp"

#ifndef PARABOLIQ_VERSION
#define PARABOLIQ_VERSION "0.0.0"
#endif

namespace paraboliq::cli {

using io::json;

enum class Command { energy, capacity, certificate, lemma21, stokes, dbar, gradcheck };
enum class Format { csv, json };

inline const std::vector<std::pair<Command, std::string>>& command_names() {
  static const std::vector<std::pair<Command, std::string>> names{
      {Command::energy, "energy"},   {Command::capacity, "capacity"}, {Command::certificate, "certificate"},
      {Command::lemma21, "lemma21"}, {Command::stokes, "stokes"},     {Command::dbar, "dbar"},
      {Command::gradcheck, "gradcheck"}};
  return names;
}

inline std::string to_string(Command c) {
  for (const auto& [k, v] : command_names())
    if (k == c) return v;
  return "?";
}

inline Command command_from_string(const std::string& s) {
  for (const auto& [k, v] : command_names())
    if (v == s) return k;
  throw io::ConfigError("unknown command '" + s + "'");
}

struct Params {
  unsigned k_max = 6;
  double epsilon = 0.5;
  std::vector<double> eps_list{0.1, 0.01, 0.001};
  unsigned j_min = 1;
  unsigned j_max = 6;
  std::string quantity = "dbar_F";
  std::optional<unsigned> k;
  unsigned levels = 1;
  unsigned grid_density = 16;
  std::optional<std::string> form;

  friend bool operator==(const Params&, const Params&) = default;
};

/// Every verdict threshold, with its default.
struct Tolerances {
  double sigma = 3;                // noise allowance in standard errors
  double doubling = 0.02;          // top-two-level relative change
  double analytic = 0.01;          // relative deviation from a closed-form value
  double capacity_ratio = 0.05;    // |c_{k+1}/c_k - e^{-1}| / e^{-1}
  double gradient = 1e-6;          // max relative gradient error
  double stokes_relative = 1e-4;   // residual floor relative to the scale
  double slope_min_drop = 0.2;     // inner-mass slope >= 1 - this
  double slope = 0.5;              // |slope - declared order|
  double limit_fraction = 0.1;     // error at j_max below this fraction of j_min
  double lemma21 = 0.01;           // relative deviation of the grid maximum

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

struct RunConfig {
  Command command = Command::energy;
  std::optional<std::string> example;
  std::optional<json> chart;  // inline chart document
  json forms = json::array();
  SamplerConfig sampler;
  Params params;
  Tolerances tol;
  std::optional<std::string> out;
  Format format = Format::csv;
  bool no_timestamp = false;
};

// ---- config <-> JSON ----------------------------------------------------------

inline json params_to_json(const Params& p) {
  json j{{"k_max", p.k_max},   {"epsilon", p.epsilon}, {"eps_list", p.eps_list},         {"j_min", p.j_min},
         {"j_max", p.j_max},   {"quantity", p.quantity}, {"levels", p.levels}, {"grid_density", p.grid_density}};
  if (p.k) j["k"] = *p.k;
  if (p.form) j["form"] = *p.form;
  return j;
}

inline json tolerances_to_json(const Tolerances& t) {
  return json{{"sigma", t.sigma},
              {"doubling", t.doubling},
              {"analytic", t.analytic},
              {"capacity_ratio", t.capacity_ratio},
              {"gradient", t.gradient},
              {"stokes_relative", t.stokes_relative},
              {"slope_min_drop", t.slope_min_drop},
              {"slope", t.slope},
              {"limit_fraction", t.limit_fraction},
              {"lemma21", t.lemma21}};
}

/// The resolved configuration as a config-file document. Worker count and
/// output location are left out: they never change the results.
inline json to_json(const RunConfig& c) {
  json j{{"command", to_string(c.command)}};
  if (c.example) j["example"] = *c.example;
  if (c.chart) j["chart"] = *c.chart;
  if (!c.forms.empty()) j["forms"] = c.forms;
  j["sampler"] = io::to_json(c.sampler);
  j["params"] = params_to_json(c.params);
  j["tolerances"] = tolerances_to_json(c.tol);
  return j;
}

namespace detail {

inline unsigned as_unsigned(const json& v, const std::string& path) {
  return static_cast<unsigned>(io::detail::unsigned_integer(v, path));
}

inline void params_from_json(const json& v, Params& p, const std::string& path) {
  if (!v.is_object()) io::detail::fail(path, "expected an object");
  for (const auto& [key, value] : v.items()) {
    const std::string fp = path + "." + key;
    if (key == "k_max") {
      p.k_max = as_unsigned(value, fp);
    } else if (key == "epsilon") {
      p.epsilon = io::detail::number(value, fp);
    } else if (key == "eps_list") {
      p.eps_list.clear();
      const json& list = io::detail::array(value, fp);
      for (std::size_t i = 0; i < list.size(); ++i)
        p.eps_list.push_back(io::detail::number(list[i], fp + "[" + std::to_string(i) + "]"));
    } else if (key == "j_min") {
      p.j_min = as_unsigned(value, fp);
    } else if (key == "j_max") {
      p.j_max = as_unsigned(value, fp);
    } else if (key == "quantity") {
      if (!value.is_string()) io::detail::fail(fp, "expected a string");
      p.quantity = value.get<std::string>();
    } else if (key == "k") {
      p.k = as_unsigned(value, fp);
    } else if (key == "levels") {
      p.levels = as_unsigned(value, fp);
    } else if (key == "grid_density") {
      p.grid_density = as_unsigned(value, fp);
    } else if (key == "form") {
      if (!value.is_string()) io::detail::fail(fp, "expected a string");
      p.form = value.get<std::string>();
    } else {
      io::detail::fail(fp, "unknown parameter");
    }
  }
}

inline void tolerances_from_json(const json& v, Tolerances& t, const std::string& path) {
  if (!v.is_object()) io::detail::fail(path, "expected an object");
  const std::vector<std::pair<std::string, double*>> fields{
      {"sigma", &t.sigma},           {"doubling", &t.doubling},
      {"analytic", &t.analytic},     {"capacity_ratio", &t.capacity_ratio},
      {"gradient", &t.gradient},     {"stokes_relative", &t.stokes_relative},
      {"slope_min_drop", &t.slope_min_drop}, {"slope", &t.slope},
      {"limit_fraction", &t.limit_fraction}, {"lemma21", &t.lemma21}};
  for (const auto& [key, value] : v.items()) {
    bool known = false;
    for (const auto& [name, ptr] : fields) {
      if (name != key) continue;
      *ptr = io::detail::number(value, path + "." + key);
      known = true;
    }
    if (!known) io::detail::fail(path + "." + key, "unknown tolerance");
  }
}

}  // namespace detail

/// Apply a config-file document on top of base.
inline RunConfig config_from_json(const json& doc, RunConfig base) {
  if (!doc.is_object()) io::detail::fail("$", "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    const std::string path = "$." + key;
    if (key == "command") {
      if (!value.is_string()) io::detail::fail(path, "expected a string");
      base.command = io::detail::at_path(path, [&] { return command_from_string(value.get<std::string>()); });
    } else if (key == "example") {
      if (!value.is_string()) io::detail::fail(path, "expected a string");
      base.example = value.get<std::string>();
    } else if (key == "chart") {
      (void)io::chart_from_json(value, path);  // validate eagerly
      base.chart = value;
    } else if (key == "forms") {
      base.forms = io::detail::array(value, path);
    } else if (key == "sampler") {
      base.sampler = io::sampler_from_json(value, base.sampler, path);
    } else if (key == "params") {
      detail::params_from_json(value, base.params, path);
    } else if (key == "tolerances") {
      detail::tolerances_from_json(value, base.tol, path);
    } else {
      io::detail::fail(path, "unknown top-level field");
    }
  }
  return base;
}

inline void validate(const RunConfig& c) {
  using io::ConfigError;
  if (c.example.has_value() == c.chart.has_value())
    throw ConfigError("exactly one chart source is required: --example NAME, or a config file with \"chart\"/\"example\"");
  const auto& p = c.params;
  if (!(p.epsilon > 0)) throw ConfigError("field 'params.epsilon': must be positive");
  if (p.eps_list.empty()) throw ConfigError("field 'params.eps_list': must not be empty");
  for (double e : p.eps_list)
    if (!(e > 0)) throw ConfigError("field 'params.eps_list': entries must be positive");
  if (p.j_min > p.j_max) throw ConfigError("field 'params.j_min': must not exceed j_max");
  if (p.levels < 1) throw ConfigError("field 'params.levels': must be positive");
  if (p.grid_density < 2) throw ConfigError("field 'params.grid_density': must be >= 2");
  if (c.sampler.n_samples < 1) throw ConfigError("field 'sampler.n_samples': must be positive");
  if (c.sampler.block_size < 1) throw ConfigError("field 'sampler.block_size': must be positive");
  for (const auto* t : {&c.tol.sigma, &c.tol.doubling, &c.tol.analytic, &c.tol.capacity_ratio, &c.tol.gradient,
                        &c.tol.stokes_relative, &c.tol.slope, &c.tol.limit_fraction, &c.tol.lemma21})
    if (!(*t > 0)) throw ConfigError("field 'tolerances': every tolerance must be positive");
  (void)energy_quantity_from_string(p.quantity);
}

/// The example addressed by the config, extended by the config's forms.
inline NamedExample resolve_example(const RunConfig& c) {
  NamedExample e = c.example ? find_example(*c.example)
                             : NamedExample{"", io::chart_from_json(*c.chart, "$.chart"), {}, {}, {}};
  e.name = e.chart.name();
  for (std::size_t i = 0; i < c.forms.size(); ++i) {
    const std::string path = "$.forms[" + std::to_string(i) + "]";
    const json& f = c.forms[i];
    if (io::is_bounded_form(f)) {
      e.bounded_forms.push_back(io::bounded_form_from_json(f, e.chart, path));
    } else {
      std::string name = "form" + std::to_string(i);
      if (const json* nm = io::detail::optional_member(f, "name"); nm && nm->is_string()) name = nm->get<std::string>();
      e.stokes_forms.push_back({name, io::stokes_form_from_json(f, e.chart.N(), path), false, std::nullopt});
    }
  }
  return e;
}

// ---- reports ----------------------------------------------------------------

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;  // tolerance and measured value
};

struct Report {
  std::vector<std::string> columns;
  std::vector<json> rows;  // objects keyed by column
  std::vector<Verdict> verdicts;
  json summary = json::object();

  bool pass() const {
    for (const auto& v : verdicts)
      if (!v.pass) return false;
    return true;
  }
};

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return format_number(v.get<double>());
  return v.dump();
}

/// Non-finite doubles become strings so the JSON stays valid.
inline json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string render(const RunConfig& cfg, const Report& rep) {
  std::ostringstream os;
  const json config = to_json(cfg);
  const double tail = model_tail_bound(cfg.sampler.log_radial_floor);
  if (cfg.format == Format::json) {
    json meta;
    if (!cfg.no_timestamp) meta["timestamp"] = utc_timestamp();
    meta["version"] = PARABOLIQ_VERSION;
    meta["config"] = config;
    meta["rng"] = kRngAlgorithm;
    meta["model_tail_bound"] = json_number(tail);
    meta["columns"] = rep.columns;
    meta["summary"] = rep.summary;
    json verdicts = json::array();
    for (const auto& v : rep.verdicts) verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
    meta["verdicts"] = verdicts;
    meta["pass"] = rep.pass();
    json doc{{"metadata", meta}, {"rows", rep.rows}};
    os << doc.dump(2) << "\n";
    return os.str();
  }
  if (!cfg.no_timestamp) os << "# timestamp: " << utc_timestamp() << "\n";
  os << "# paraboliq " << PARABOLIQ_VERSION << "\n";
  os << "# config: " << config.dump() << "\n";
  os << "# rng: " << kRngAlgorithm << "\n";
  os << "# model_tail_bound: " << format_number(tail) << "\n";
  for (std::size_t i = 0; i < rep.columns.size(); ++i) os << (i ? "," : "") << rep.columns[i];
  os << "\n";
  for (const auto& row : rep.rows) {
    for (std::size_t i = 0; i < rep.columns.size(); ++i) {
      const auto it = row.find(rep.columns[i]);
      os << (i ? "," : "") << (it == row.end() ? std::string() : csv_cell(*it));
    }
    os << "\n";
  }
  for (const auto& [key, value] : rep.summary.items()) os << "# summary " << key << ": " << csv_cell(value) << "\n";
  for (const auto& v : rep.verdicts)
    os << "# verdict " << v.name << ": " << (v.pass ? "pass" : "fail") << " (" << v.detail << ")\n";
  return os.str();
}

// ---- commands ----------------------------------------------------------------

namespace detail {

inline const AnalyticFact* fact(const NamedExample& e, const std::string& quantity) {
  for (const auto& f : e.analytic_facts)
    if (f.quantity == quantity && f.value) return &f;
  return nullptr;
}

inline std::string fmt(double v) { return format_number(v); }

inline const char* word(bool pass) { return pass ? "pass" : "fail"; }

inline Report run_energy(const RunConfig& c, const NamedExample& ex) {
  const CutoffFamily family(ex.chart);
  const EnergyQuantity q = energy_quantity_from_string(c.params.quantity);
  const std::optional<unsigned> k = is_cutoff_quantity(q) ? c.params.k : std::nullopt;
  if (is_cutoff_quantity(q) && !k) throw io::ConfigError("field 'params.k': required for quantity " + c.params.quantity);
  Report rep;
  rep.columns = {"level", "quantity", "k", "n_samples", "estimate", "stderr", "rel_change"};
  std::vector<IntegralEstimate> levels;
  DoublingReport dbl;
  if (c.params.levels >= 2) {
    dbl = energy_doubling(family, q, k, c.sampler, c.params.levels);
    levels = dbl.levels;
  } else {
    levels.push_back(energy(family, q, k, c.sampler).value);
  }
  bool finite = true;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    json row{{"level", l},
             {"quantity", to_string(q)},
             {"k", k ? json(*k) : json()},
             {"n_samples", levels[l].n_samples},
             {"estimate", json_number(levels[l].estimate)},
             {"stderr", json_number(levels[l].std_error)},
             {"rel_change", l > 0 ? json_number(dbl.relative_change[l - 1]) : json()}};
    rep.rows.push_back(row);
    finite = finite && std::isfinite(levels[l].estimate) && std::isfinite(levels[l].std_error);
  }
  rep.verdicts.push_back({"finite", finite, "estimate and stderr finite at every level"});
  if (c.params.levels >= 2) {
    const double top = dbl.top_relative_change();
    rep.verdicts.push_back({"doubling", top < c.tol.doubling,
                            "top-two-level relative change " + fmt(top) + " < " + fmt(c.tol.doubling)});
  }
  const std::string fact_name = q == EnergyQuantity::dbar_F ? "dbar_energy_F" : q == EnergyQuantity::d_F ? "d_energy_F" : "";
  if (const AnalyticFact* f = fact_name.empty() ? nullptr : fact(ex, fact_name)) {
    const double est = levels.back().estimate;
    const double dev = std::abs(est - *f->value) / std::abs(*f->value);
    rep.verdicts.push_back({"analytic", dev < c.tol.analytic,
                            "relative deviation from " + fmt(*f->value) + " is " + fmt(dev) + " < " + fmt(c.tol.analytic)});
  }
  return rep;
}

/// phi_U at the corner (floor, ..., floor) of the log-radial sampling range:
/// bands above it are only partly sampled.
inline double band_reach(const NamedExample& ex, const SamplerConfig& s) {
  if (s.mode != RadialMode::log_radial) return std::numeric_limits<double>::infinity();
  const std::vector<Complex> z(ex.chart.n(), Complex(static_cast<Real>(s.log_radial_floor), 0));
  return static_cast<double>(CutoffFamily(ex.chart).exhaustion(z).value);
}

inline Report capacity_report(const RunConfig& c, const NamedExample& ex, const std::vector<CapacityRow>& table) {
  Report rep;
  const double reach = band_reach(ex, c.sampler);
  rep.summary["band_reach"] = json_number(reach);
  rep.columns = {"k", "c_k", "stderr", "c_dbar", "c_dbar_stderr", "ratio", "n_samples", "verdict"};
  const AnalyticFact* ratio_fact = fact(ex, "capacity_ratio");
  bool monotone = true, ratios = true;
  std::string worst_ratio = "none";
  double worst_dev = 0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& r = table[i];
    bool ok = true;
    std::optional<double> ratio;
    const bool resolved = static_cast<double>(r.k) + 1 <= reach;
    if (i > 0) {
      const auto& a = table[i - 1].d.value;
      const auto& b = r.d.value;
      ratio = b.estimate / a.estimate;
      if (table[i - 1].k >= 1) {
        const bool mono = b.estimate <= a.estimate + c.tol.sigma * std::hypot(a.std_error, b.std_error);
        monotone = monotone && mono;
        ok = ok && mono;
        if (ratio_fact && resolved) {
          const double dev = std::abs(*ratio - *ratio_fact->value) / *ratio_fact->value;
          if (dev >= worst_dev) {
            worst_dev = dev;
            worst_ratio = "k=" + std::to_string(r.k);
          }
          const bool rok = dev < c.tol.capacity_ratio;
          ratios = ratios && rok;
          ok = ok && rok;
        }
      }
    }
    rep.rows.push_back(json{{"k", r.k},
                            {"c_k", json_number(r.d.value.estimate)},
                            {"stderr", json_number(r.d.value.std_error)},
                            {"c_dbar", json_number(r.dbar.value.estimate)},
                            {"c_dbar_stderr", json_number(r.dbar.value.std_error)},
                            {"ratio", ratio ? json_number(*ratio) : json()},
                            {"n_samples", r.d.value.n_samples},
                            {"verdict", resolved ? word(ok) : (ok ? "truncated" : "fail")}});
  }
  rep.verdicts.push_back({"monotone", monotone, "c_{k+1} <= c_k + " + fmt(c.tol.sigma) + " combined stderr for k >= 1"});
  if (ratio_fact)
    rep.verdicts.push_back({"ratio", ratios,
                            "|c_{k+1}/c_k - " + fmt(*ratio_fact->value) + "| / " + fmt(*ratio_fact->value) + " < " +
                                fmt(c.tol.capacity_ratio) + " for k >= 1 with k + 1 <= band_reach; worst " + fmt(worst_dev) + " at " + worst_ratio});
  return rep;
}

inline Report run_capacity(const RunConfig& c, const NamedExample& ex) {
  const CutoffFamily family(ex.chart);
  return capacity_report(c, ex, capacity_sequence(family, 0, c.params.k_max, c.sampler));
}

inline Report run_certificate(const RunConfig& c, const NamedExample& ex) {
  const CutoffFamily family(ex.chart);
  const auto cert = capacity_certificate(family, c.params.epsilon, c.params.k_max, c.sampler);
  Report rep = capacity_report(c, ex, cert.table);
  const double eps2 = c.params.epsilon * c.params.epsilon;
  rep.summary["epsilon"] = c.params.epsilon;
  rep.summary["k_star"] = cert.k_star ? json(*cert.k_star) : json("none");
  std::string detail = "smallest k <= " + std::to_string(c.params.k_max) + " with c_k + 3 stderr < " + fmt(eps2);
  if (cert.k_star) {
    const auto& v = cert.table[*cert.k_star].d.value;
    detail += "; k_star = " + std::to_string(*cert.k_star) + ", c = " + fmt(v.estimate) + " +- " + fmt(v.std_error);
  }
  rep.verdicts.push_back({"certificate", cert.k_star.has_value(), detail});
  return rep;
}

inline std::string describe(std::span<const Complex> z) {
  std::string s;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (j) s += " ";
    s += fmt(static_cast<double>(z[j].real())) + (z[j].imag() < 0 ? "" : "+") + fmt(static_cast<double>(z[j].imag())) + "i";
  }
  return s;
}

inline Report run_lemma21(const RunConfig& c, const NamedExample& ex) {
  Report rep;
  rep.columns = {"grid_density", "mu", "max_hsharp", "witness"};
  bool finite = true;
  std::vector<Real> last;
  for (unsigned l = 0; l < c.params.levels; ++l) {
    const std::size_t d = static_cast<std::size_t>(c.params.grid_density) << l;
    const auto res = lemma21_check(ex.chart, d);
    for (std::size_t mu = 0; mu < res.maxima.size(); ++mu) {
      finite = finite && std::isfinite(res.maxima[mu]);
      rep.rows.push_back(json{{"grid_density", d},
                              {"mu", mu + 1},
                              {"max_hsharp", json_number(static_cast<double>(res.maxima[mu]))},
                              {"witness", describe(res.witnesses[mu])}});
    }
    last = res.maxima;
  }
  rep.verdicts.push_back({"finite", finite, "adjugate diagonal maxima finite on every grid"});
  if (const AnalyticFact* f = fact(ex, "lemma21_max_mu1")) {
    const double dev = std::abs(static_cast<double>(last[0]) - *f->value) / *f->value;
    rep.verdicts.push_back({"closed_form", dev < c.tol.lemma21,
                            "finest-grid mu=1 maximum vs " + fmt(*f->value) + ": relative deviation " + fmt(dev) +
                                " < " + fmt(c.tol.lemma21)});
  }
  return rep;
}

inline Report run_stokes(const RunConfig& c, const NamedExample& ex) {
  if (ex.stokes_forms.empty()) throw io::ConfigError("example '" + ex.name + "' ships no Stokes forms; add one under \"forms\"");
  const NamedStokesForm* form = &ex.stokes_forms.front();
  if (c.params.form) form = &ex.stokes_form(*c.params.form);
  SamplerConfig s = c.sampler;
  const auto res = stokes_residual(ex.chart, form->alpha, c.params.eps_list, s);
  Report rep;
  rep.columns = {"eps",      "interior_re", "interior_im", "interior_stderr", "inner_re", "inner_im", "outer_re",
                 "outer_im", "inner_mass",  "outer_mass",  "residual",        "tolerance", "verdict"};
  bool residual_ok = true;
  for (const auto& r : res.rows) {
    const double tol =
        std::max(c.tol.sigma * r.interior_std_error(), c.tol.stokes_relative * static_cast<double>(r.scale));
    const bool ok = r.residual <= tol;
    residual_ok = residual_ok && ok;
    rep.rows.push_back(json{{"eps", r.eps},
                            {"interior_re", json_number(r.interior_re.estimate)},
                            {"interior_im", json_number(r.interior_im.estimate)},
                            {"interior_stderr", json_number(r.interior_std_error())},
                            {"inner_re", json_number(static_cast<double>(r.inner.real()))},
                            {"inner_im", json_number(static_cast<double>(r.inner.imag()))},
                            {"outer_re", json_number(static_cast<double>(r.outer.real()))},
                            {"outer_im", json_number(static_cast<double>(r.outer.imag()))},
                            {"inner_mass", json_number(static_cast<double>(r.inner_mass))},
                            {"outer_mass", json_number(static_cast<double>(r.outer_mass))},
                            {"residual", json_number(static_cast<double>(r.residual))},
                            {"tolerance", json_number(tol)},
                            {"verdict", word(ok)}});
  }
  rep.summary["form"] = form->name;
  rep.summary["mass_slope"] = res.mass_slope ? json_number(*res.mass_slope) : json("undefined");
  rep.summary["l2_norm_squared"] = json_number(res.l2_norm_squared.estimate);
  rep.summary["l2_norm_squared_stderr"] = json_number(res.l2_norm_squared.std_error);
  rep.verdicts.push_back({"residual", residual_ok,
                          "|interior - (outer - inner)| <= max(" + fmt(c.tol.sigma) + " stderr, " +
                              fmt(c.tol.stokes_relative) + " scale), scale = |interior| + boundary masses, on every row"});
  if (c.params.eps_list.size() >= 2) {
    const double slope_min = 1 - c.tol.slope_min_drop;
    const bool vanish = res.monotone_mass && res.mass_slope && *res.mass_slope >= slope_min;
    rep.verdicts.push_back({"vanishing_boundary", vanish,
                            "inner mass strictly decreasing with log-log slope " +
                                (res.mass_slope ? fmt(*res.mass_slope) : std::string("undefined")) + " >= " + fmt(slope_min)});
    if (form->mass_order && res.mass_slope) {
      const double dev = std::abs(*res.mass_slope - *form->mass_order);
      rep.verdicts.push_back({"mass_order", dev <= c.tol.slope,
                              "|slope - " + fmt(*form->mass_order) + "| = " + fmt(dev) + " <= " + fmt(c.tol.slope)});
    }
  }
  rep.verdicts.push_back({"l2_finite", std::isfinite(res.l2_norm_squared.estimate),
                          "square-integrability of the pulled-back form (reported, finite estimate)"});
  return rep;
}

inline Report run_dbar(const RunConfig& c, const NamedExample& ex) {
  if (ex.bounded_forms.empty()) throw io::ConfigError("example '" + ex.name + "' ships no bounded forms; add one under \"forms\"");
  const BoundedTestForm* form = &ex.bounded_forms.front();
  if (c.params.form) form = &ex.bounded_form(*c.params.form);
  const CutoffFamily family(ex.chart);
  const auto validation = validate_form(ex.chart, *form);
  const auto rows = approx_sequence(family, *form, c.params.j_min, c.params.j_max, c.sampler);
  Report rep;
  rep.columns = {"j",        "err_form", "err_form_stderr", "err_dbar_main", "err_dbar_main_stderr", "err_wedge",
                 "err_wedge_stderr", "c_dbar", "c_dbar_stderr", "bound", "verdict"};
  bool holder = true;
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    auto rel = [](const IntegralEstimate& e) { return e.estimate > 0 ? e.std_error / e.estimate : 0.0; };
    const double rel_se = std::max(rel(r.err_wedge.squared), rel(r.c_dbar));
    const bool hok = r.err_wedge.value <= r.bound * (1 + c.tol.sigma * rel_se);
    holder = holder && hok;
    if (i > 0) {
      const auto& p = rows[i - 1];
      monotone = monotone &&
                 r.err_form.value <= p.err_form.value + c.tol.sigma * std::hypot(p.err_form.std_error, r.err_form.std_error) &&
                 r.err_wedge.value <= p.err_wedge.value + c.tol.sigma * std::hypot(p.err_wedge.std_error, r.err_wedge.std_error);
    }
    rep.rows.push_back(json{{"j", r.j},
                            {"err_form", json_number(r.err_form.value)},
                            {"err_form_stderr", json_number(r.err_form.std_error)},
                            {"err_dbar_main", json_number(r.err_dbar_main.value)},
                            {"err_dbar_main_stderr", json_number(r.err_dbar_main.std_error)},
                            {"err_wedge", json_number(r.err_wedge.value)},
                            {"err_wedge_stderr", json_number(r.err_wedge.std_error)},
                            {"c_dbar", json_number(r.c_dbar.estimate)},
                            {"c_dbar_stderr", json_number(r.c_dbar.std_error)},
                            {"bound", json_number(r.bound)},
                            {"verdict", word(hok)}});
  }
  rep.summary["form"] = form->name;
  rep.summary["max_pointwise_norm"] = json_number(static_cast<double>(validation.max_norm));
  rep.verdicts.push_back({"declared_sup", validation.sup_ok,
                          "max pointwise norm " + fmt(static_cast<double>(validation.max_norm)) + " <= " +
                              fmt(form->declared_sup) + " (1 + 1e-6)"});
  rep.verdicts.push_back({"dbar_symbolic", validation.dbar_ok,
                          "supplied dbar vs symbolic: max coefficient distance " + fmt(validation.dbar_deviation) + " <= 1e-12"});
  rep.verdicts.push_back({"holder", holder,
                          "err_wedge <= sup sqrt(c_dbar) (1 + " + fmt(c.tol.sigma) + " rel-stderr) on every row"});
  rep.verdicts.push_back({"monotone", monotone, "err_form and err_wedge non-increasing in j up to " + fmt(c.tol.sigma) + " stderr"});
  if (c.params.j_min < c.params.j_max) {
    const bool lim = limit_verdict(rows, c.params.j_min, c.params.j_max, c.tol.limit_fraction);
    rep.verdicts.push_back({"limit", lim,
                            "every error column at j=" + std::to_string(c.params.j_max) + " below " +
                                fmt(c.tol.limit_fraction) + " x its value at j=" + std::to_string(c.params.j_min)});
  }
  const auto support = support_check(family, *form, c.params.j_max, 1000, c.sampler.seed);
  rep.verdicts.push_back({"support", support.pass,
                          "phi_j alpha == 0 at " + std::to_string(support.tested) + " points with phi_U > j+1; nonzero at " +
                              std::to_string(support.nonzero)});
  return rep;
}

inline Report run_gradcheck(const RunConfig& c, const NamedExample& ex) {
  const CutoffFamily family(ex.chart);
  Report rep;
  rep.columns = {"quantity", "points", "max_rel_error", "verdict"};
  bool all = true;
  std::vector<std::optional<unsigned>> which{std::nullopt};
  for (unsigned k = 0; k <= c.params.k_max; ++k) which.push_back(k);
  double worst = 0;
  for (const auto& k : which) {
    const auto row = gradient_check(family, k, c.sampler.n_samples, c.sampler.seed);
    const double err = static_cast<double>(row.max_relative_error);
    const bool ok = err < c.tol.gradient;
    all = all && ok;
    worst = std::max(worst, err);
    rep.rows.push_back(json{{"quantity", row.quantity}, {"points", row.points}, {"max_rel_error", json_number(err)}, {"verdict", word(ok)}});
  }
  rep.verdicts.push_back({"gradient", all, "max relative gradient error " + fmt(worst) + " < " + fmt(c.tol.gradient)});
  return rep;
}

}  // namespace detail

inline Report run(const RunConfig& c) {
  validate(c);
  const NamedExample ex = resolve_example(c);
  switch (c.command) {
    case Command::energy: return detail::run_energy(c, ex);
    case Command::capacity: return detail::run_capacity(c, ex);
    case Command::certificate: return detail::run_certificate(c, ex);
    case Command::lemma21: return detail::run_lemma21(c, ex);
    case Command::stokes: return detail::run_stokes(c, ex);
    case Command::dbar: return detail::run_dbar(c, ex);
    case Command::gradcheck: return detail::run_gradcheck(c, ex);
  }
  throw io::ConfigError("unhandled command");
}

// ---- flags -------------------------------------------------------------------

inline const char* kColumnHelp =
    "CSV columns per command:\n"
    "  energy       level,quantity,k,n_samples,estimate,stderr,rel_change\n"
    "  capacity     k,c_k,stderr,c_dbar,c_dbar_stderr,ratio,n_samples,verdict\n"
    "  certificate  as capacity; k_star in the summary lines\n"
    "  lemma21      grid_density,mu,max_hsharp,witness\n"
    "  stokes       eps,interior_re,interior_im,interior_stderr,inner_re,inner_im,outer_re,outer_im,\n"
    "               inner_mass,outer_mass,residual,tolerance,verdict\n"
    "  dbar         j,err_form,err_form_stderr,err_dbar_main,err_dbar_main_stderr,err_wedge,\n"
    "               err_wedge_stderr,c_dbar,c_dbar_stderr,bound,verdict\n"
    "  gradcheck    quantity,points,max_rel_error,verdict\n"
    "Header lines start with '#'; verdicts follow the rows. JSON output: {\"metadata\", \"rows\"}.\n"
    "Exit status: 0 all verdicts pass, 1 a verdict failed, 2 malformed flags or config.\n"
    "PARABOLIQ_SEED, when set, overrides --seed and the config file's seed.\n";

struct ParseOutcome {
  std::optional<RunConfig> config;  // empty: exit with `status`
  int status = 0;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Flags on top of an optional config file; explicit flags win.
inline ParseOutcome parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"paraboliq: numerical certificates for cutoff constructions on singular charts", "paraboliq"};
  app.footer(kColumnHelp);
  app.require_subcommand(1);
  app.set_version_flag("--version", PARABOLIQ_VERSION);

  RunConfig flags;
  std::string example, config_path, mode, quantity, form, format = "csv", out_path, eps_list;
  std::uint64_t seed = 0;
  std::size_t samples = 0, block_size = 0;
  double floor = 0, epsilon = 0;
  unsigned workers = 0, k_max = 0, j_min = 0, j_max = 0, k = 0, levels = 0, grid_density = 0;
  Tolerances tol;

  std::vector<CLI::App*> subs;
  std::vector<CLI::Option*> opts;
  auto track = [&](CLI::Option* o) {
    opts.push_back(o);
    return o;
  };
  const std::vector<std::pair<std::string, std::string>> descriptions{
      {"energy", "dbar-/d-energy of F or phi_k (optionally with a doubling check)"},
      {"capacity", "capacity sequence c_k for k = 0..k_max"},
      {"certificate", "smallest k with c_k < epsilon^2"},
      {"lemma21", "grid maxima of the adjugate diagonal"},
      {"stokes", "interior integral vs boundary circulation on a curve chart"},
      {"dbar", "approximation errors of phi_j alpha for a bounded form"},
      {"gradcheck", "analytic vs finite-difference Wirtinger gradients"}};
  for (const auto& [name, desc] : descriptions) {
    CLI::App* s = app.add_subcommand(name, desc);
    subs.push_back(s);
    track(s->add_option("--example", example, "built-in chart name"));
    track(s->add_option("--config", config_path, "JSON config file"));
    track(s->add_option("--samples", samples, "Monte-Carlo samples (gradcheck: points per quantity)"));
    track(s->add_option("--seed", seed, "random seed"));
    track(s->add_option("--block-size", block_size, "samples per deterministic block"));
    track(s->add_option("--mode", mode, "radial sampling: log_radial or uniform"));
    track(s->add_option("--floor", floor, "log-radial floor (>= 1e-300)"));
    track(s->add_option("--workers", workers, "worker threads (0: hardware); never changes results"));
    track(s->add_option("--out", out_path, "report path (default: stdout)"));
    track(s->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"})));
    track(s->add_flag("--no-timestamp", flags.no_timestamp, "omit the timestamp header line"));
    track(s->add_option("--k-max", k_max, "largest k (capacity, certificate, gradcheck)"));
    track(s->add_option("--epsilon", epsilon, "certificate threshold: c_k < epsilon^2"));
    track(s->add_option("--eps-list", eps_list, "comma-separated decreasing radii (stokes)"));
    track(s->add_option("--j-min", j_min, "first cutoff index (dbar)"));
    track(s->add_option("--j-max", j_max, "last cutoff index (dbar)"));
    track(s->add_option("--quantity", quantity, "dbar_F, d_F, dbar_phi or d_phi (energy)"));
    track(s->add_option("--k", k, "cutoff index for the phi quantities (energy)"));
    track(s->add_option("--levels", levels, "doubling levels (energy: samples, lemma21: grid density)"));
    track(s->add_option("--grid-density", grid_density, "radii and angles per coordinate (lemma21)"));
    track(s->add_option("--form", form, "test form name (stokes, dbar)"));
    track(s->add_option("--tol-sigma", tol.sigma, "noise allowance in standard errors")->default_val(tol.sigma));
    track(s->add_option("--tol-doubling", tol.doubling, "doubling relative change")->default_val(tol.doubling));
    track(s->add_option("--tol-analytic", tol.analytic, "deviation from closed forms")->default_val(tol.analytic));
    track(s->add_option("--tol-ratio", tol.capacity_ratio, "capacity ratio deviation")->default_val(tol.capacity_ratio));
    track(s->add_option("--tol-gradient", tol.gradient, "gradient relative error")->default_val(tol.gradient));
    track(s->add_option("--tol-stokes", tol.stokes_relative, "Stokes residual relative floor")->default_val(tol.stokes_relative));
    track(s->add_option("--tol-slope-drop", tol.slope_min_drop, "inner-mass slope >= 1 - this")->default_val(tol.slope_min_drop));
    track(s->add_option("--tol-slope", tol.slope, "inner-mass slope vs declared order")->default_val(tol.slope));
    track(s->add_option("--tol-limit", tol.limit_fraction, "limit fraction (dbar)")->default_val(tol.limit_fraction));
    track(s->add_option("--tol-lemma21", tol.lemma21, "grid maximum vs closed form")->default_val(tol.lemma21));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return {std::nullopt, 0};
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return {std::nullopt, 0};
  } catch (const CLI::CallForVersion& e) {
    out << PARABOLIQ_VERSION << "\n";
    return {std::nullopt, 0};
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return {std::nullopt, 2};
  }

  CLI::App* used = app.get_subcommands().front();
  auto given = [&](const std::string& name) { return used->get_option(name)->count() > 0; };

  try {
    RunConfig c;
    c.command = command_from_string(used->get_name());
    if (given("--config")) {
      c = config_from_json(io::parse_text(read_file(config_path), config_path), c);
      c.command = command_from_string(used->get_name());
    }
    if (given("--example")) {
      c.example = example;
      c.chart.reset();
    }
    if (given("--samples")) c.sampler.n_samples = samples;
    if (given("--seed")) c.sampler.seed = seed;
    if (given("--block-size")) c.sampler.block_size = block_size;
    if (given("--mode")) c.sampler.mode = radial_mode_from_string(mode);
    if (given("--floor")) c.sampler.log_radial_floor = floor;
    if (given("--workers")) c.sampler.workers = workers;
    if (given("--out")) c.out = out_path;
    c.format = format == "json" ? Format::json : Format::csv;
    c.no_timestamp = flags.no_timestamp;
    if (given("--k-max")) c.params.k_max = k_max;
    if (given("--epsilon")) c.params.epsilon = epsilon;
    if (given("--eps-list")) {
      c.params.eps_list.clear();
      std::stringstream ss(eps_list);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          std::size_t used_chars = 0;
          c.params.eps_list.push_back(std::stod(item, &used_chars));
          if (used_chars != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
          throw io::ConfigError("flag '--eps-list': cannot parse '" + item + "' as a number");
        }
      }
    }
    if (given("--j-min")) c.params.j_min = j_min;
    if (given("--j-max")) c.params.j_max = j_max;
    if (given("--quantity")) c.params.quantity = quantity;
    if (given("--k")) c.params.k = k;
    if (given("--levels")) c.params.levels = levels;
    if (given("--grid-density")) c.params.grid_density = grid_density;
    if (given("--form")) c.params.form = form;
    const std::vector<std::pair<std::string, double*>> tol_flags{
        {"--tol-sigma", &c.tol.sigma},         {"--tol-doubling", &c.tol.doubling},
        {"--tol-analytic", &c.tol.analytic},   {"--tol-ratio", &c.tol.capacity_ratio},
        {"--tol-gradient", &c.tol.gradient},   {"--tol-stokes", &c.tol.stokes_relative},
        {"--tol-slope-drop", &c.tol.slope_min_drop}, {"--tol-slope", &c.tol.slope},
        {"--tol-limit", &c.tol.limit_fraction}, {"--tol-lemma21", &c.tol.lemma21}};
    const std::vector<double> tol_values{tol.sigma,    tol.doubling,        tol.analytic,       tol.capacity_ratio,
                                         tol.gradient, tol.stokes_relative, tol.slope_min_drop, tol.slope,
                                         tol.limit_fraction, tol.lemma21};
    for (std::size_t i = 0; i < tol_flags.size(); ++i)
      if (given(tol_flags[i].first)) *tol_flags[i].second = tol_values[i];
    if (const char* env = std::getenv("PARABOLIQ_SEED"); env && *env) {
      try {
        std::size_t used_chars = 0;
        const unsigned long long v = std::stoull(env, &used_chars);
        if (used_chars != std::string(env).size()) throw std::invalid_argument(env);
        c.sampler.seed = v;
      } catch (const std::exception&) {
        throw io::ConfigError(std::string("PARABOLIQ_SEED: cannot parse '") + env + "' as an unsigned integer");
      }
    }
    validate(c);
    return {c, 0};
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n\n" << used->help();
    return {std::nullopt, 2};
  }
}

/// Shared entry point of the paraboliq executable.
inline int main_entry(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  const ParseOutcome parsed = parse_args(argc, argv, out, err);
  if (!parsed.config) return parsed.status;
  const RunConfig& c = *parsed.config;
  Report rep;
  try {
    rep = run(c);
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  const std::string text = render(c, rep);
  if (c.out) {
    std::ofstream f(*c.out, std::ios::binary);
    if (!f) {
      err << "error: cannot write '" << *c.out << "'\n";
      return 1;
    }
    f << text;
  } else {
    out << text;
  }
  for (const auto& v : rep.verdicts)
    if (!v.pass) err << "verdict " << v.name << " failed: " << v.detail << "\n";
  return rep.pass() ? 0 : 1;
}

}  // namespace paraboliq::cli
