#pragma once

// Approximation of a bounded (0,q)-form alpha by alpha_j = phi_j alpha with
// support off the cut-out set, and the three error norms
//   ||alpha_j - alpha||,  ||(phi_j - 1) dbar alpha||,  ||dbar phi_j ^ alpha||
// whose vanishing puts alpha in the domain of the minimal dbar extension.
// Every pointwise norm is formed already multiplied by det H (see geometry.hpp).

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "paraboliq/capacity.hpp"
#include "paraboliq/exhaustion.hpp"
#include "paraboliq/geometry.hpp"
#include "paraboliq/integrate.hpp"
#include "paraboliq/polynomial.hpp"

namespace paraboliq {

/// alpha = a (q = 0) or sum_j a_j dzbar_j (q = 1) on an n <= 2 chart, with
/// coefficients polynomial in (z, zbar). dbar_coefficients: dzbar_j
/// components of dbar a (q = 0) or the dzbar_0 ^ dzbar_1 component (q = 1, n = 2).
struct BoundedTestForm {
  std::string name;
  unsigned q = 0;
  std::vector<Polynomial> coefficients;
  double declared_sup = 1;
  std::vector<Polynomial> dbar_coefficients;
};

inline std::size_t expected_coefficient_count(unsigned q, std::size_t n) { return q == 0 ? 1 : n; }
inline std::size_t expected_dbar_count(unsigned q, std::size_t n) { return q == 0 ? n : n * (n - 1) / 2; }

inline void check_form_shape(const ResolutionChart& chart, const BoundedTestForm& form) {
  const std::size_t n = chart.n();
  require(n <= 2, "BoundedTestForm: charts of dimension n <= 2 only");
  require(form.q <= 1, "BoundedTestForm: bidegree (0, q) with q in {0, 1}");
  require(form.declared_sup > 0, "BoundedTestForm: declared_sup must be positive");
  require(form.coefficients.size() == expected_coefficient_count(form.q, n),
          "BoundedTestForm: wrong number of coefficients for the bidegree");
  require(form.dbar_coefficients.size() == expected_dbar_count(form.q, n),
          "BoundedTestForm: wrong number of dbar coefficients for the bidegree");
  for (const auto* list : {&form.coefficients, &form.dbar_coefficients})
    for (const auto& p : *list) require(p.num_vars() == 2 * n, "BoundedTestForm: coefficients must be polynomials in (z, zbar)");
}

/// Symbolic dbar of the coefficients in the layout of dbar_coefficients.
inline std::vector<Polynomial> symbolic_dbar(const BoundedTestForm& form, std::size_t n) {
  std::vector<Polynomial> out;
  if (form.q == 0) {
    for (std::size_t j = 0; j < n; ++j) out.push_back(form.coefficients[0].derivative(n + j));
  } else if (n == 2) {
    // dbar(a_0 dzbar_0 + a_1 dzbar_1) = (da_1/dzbar_0 - da_0/dzbar_1) dzbar_0 ^ dzbar_1
    out.push_back(form.coefficients[1].derivative(n + 0) - form.coefficients[0].derivative(n + 1));
  }
  return out;
}

namespace detail {

inline std::vector<Complex> eval_all(const std::vector<Polynomial>& ps, std::span<const Complex> z) {
  std::vector<Complex> v;
  v.reserve(ps.size());
  for (const auto& p : ps) v.push_back(eval_doubled(p, z));
  return v;
}

}  // namespace detail

/// |alpha|^2_gamma det H.
inline Real form_density(const GramSample& g, unsigned q, std::span<const Complex> a) {
  if (q == 0) return std::norm(a[0]) * g.detH;
  return cometric_energy_density(g, a);
}

/// |dbar alpha|^2_gamma det H.
///
/// For q = 1, n = 2 the only component is b dzbar_0 ^ dzbar_1. With the
/// cometric G = H^{-1} on (0,1)-covectors, the induced norm on 2-vectors is
/// the Gram determinant: for xi, eta, |xi ^ eta|^2 = det [<xi,xi> <xi,eta>;
/// <eta,xi> <eta,eta>] = |det[xi eta]|^2 det G. Hence
/// |dzbar_0 ^ dzbar_1|^2 = 1 / det H and the density is |b|^2.
inline Real dbar_density(const GramSample& g, unsigned q, std::span<const Complex> d) {
  if (q == 0) return cometric_energy_density(g, d);
  return d.empty() ? Real(0) : std::norm(d[0]);
}

/// |dbar phi ^ alpha|^2_gamma det H for a function gradient gphi.
/// q = 0: dbar phi ^ a = a dbar phi, density |a|^2 gphi^H H# gphi.
/// q = 1, n = 2: (g_0 a_1 - g_1 a_0) dzbar_0 ^ dzbar_1, density |g_0 a_1 - g_1 a_0|^2
/// by the Gram-determinant identity above. q = 1, n = 1: no (0,2)-forms.
inline Real wedge_density(const GramSample& g, unsigned q, std::span<const Complex> gphi, std::span<const Complex> a) {
  if (q == 0) return std::norm(a[0]) * cometric_energy_density(g, gphi);
  if (gphi.size() < 2) return 0;
  return std::norm(gphi[0] * a[1] - gphi[1] * a[0]);
}

struct FormValidation {
  Real max_norm = 0;           // max pointwise |alpha|_gamma over the samples
  bool sup_ok = false;         // max_norm <= declared_sup (1 + 1e-6)
  double dbar_deviation = 0;   // max coefficient distance to the symbolic dbar
  bool dbar_ok = false;
  std::size_t samples = 0;
};

/// Checks the declared sup at uniform points and the supplied dbar against
/// symbolic differentiation.
inline FormValidation validate_form(const ResolutionChart& chart, const BoundedTestForm& form,
                                    std::size_t samples = 100000, std::uint64_t seed = 11) {
  check_form_shape(chart, form);
  FormValidation v;
  v.samples = samples;
  StreamRng rng(seed, 0);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto z = uniform_polydisc_point(rng, chart.radii());
    const auto a = detail::eval_all(form.coefficients, z);
    Real norm2;
    if (form.q == 0) {
      norm2 = std::norm(a[0]);
    } else {
      const GramSample g = gram(chart, z);
      if (!(g.detH > 0)) continue;
      norm2 = cometric_energy_density(g, a) / g.detH;
    }
    v.max_norm = std::max(v.max_norm, std::sqrt(norm2));
  }
  v.sup_ok = v.max_norm <= static_cast<Real>(form.declared_sup) * (1 + 1e-6L);
  const auto symbolic = symbolic_dbar(form, chart.n());
  for (std::size_t i = 0; i < symbolic.size(); ++i)
    v.dbar_deviation = std::max(v.dbar_deviation, max_coeff_distance(symbolic[i], form.dbar_coefficients[i]));
  v.dbar_ok = v.dbar_deviation <= 1e-12;
  return v;
}

/// sqrt of a squared-norm estimate with a delta-method standard error.
struct NormEstimate {
  double value = 0;
  double std_error = 0;
  IntegralEstimate squared;
};

inline NormEstimate norm_from_squared(const IntegralEstimate& sq) {
  NormEstimate n;
  n.squared = sq;
  n.value = std::sqrt(std::max(sq.estimate, 0.0));
  n.std_error = n.value > 0 ? sq.std_error / (2 * n.value) : std::sqrt(sq.std_error);
  return n;
}

struct ApproxRow {
  unsigned j = 0;
  NormEstimate err_form;
  NormEstimate err_dbar_main;
  NormEstimate err_wedge;
  IntegralEstimate c_dbar;  // dbar-energy of phi_j
  double bound = 0;         // declared_sup * sqrt(c_dbar)
  bool holder_ok = false;   // err_wedge <= bound (1 + 3 rel-stderr)
};

/// Rows j in [j_first, j_last], every column from one shared sample set.
inline std::vector<ApproxRow> approx_sequence(const CutoffFamily& family, const BoundedTestForm& form, unsigned j_first,
                                              unsigned j_last, const SamplerConfig& cfg) {
  const auto& chart = family.chart();
  check_form_shape(chart, form);
  require(j_first <= j_last, "approx_sequence: empty j range");
  const std::size_t count = j_last - j_first + 1;
  auto est = integrate_channels(
      4 * count,
      [&](std::span<const Complex> z, std::span<Real> out) {
        const auto a = detail::eval_all(form.coefficients, z);
        const auto d = detail::eval_all(form.dbar_coefficients, z);
        const GramSample g = gram(chart, z);
        const ExhaustionValue phi_U = family.exhaustion(z);
        const Real form2 = form_density(g, form.q, a);
        const Real dbar2 = dbar_density(g, form.q, d);
        const Real wedge_unit = wedge_density(g, form.q, phi_U.gradbar, a);  // scales with slope^2
        const Real grad2 = cometric_energy_density(g, phi_U.gradbar);
        for (std::size_t i = 0; i < count; ++i) {
          const PlateauFunction f(static_cast<unsigned>(j_first + i));
          const Real miss = 1 - f.value(phi_U.value);
          const Real slope = f.derivative(phi_U.value);
          out[4 * i + 0] = miss * miss * form2;
          out[4 * i + 1] = miss * miss * dbar2;
          out[4 * i + 2] = slope * slope * wedge_unit;
          out[4 * i + 3] = slope * slope * grad2;
        }
      },
      chart.radii(), cfg);

  std::vector<ApproxRow> rows;
  for (std::size_t i = 0; i < count; ++i) {
    ApproxRow r;
    r.j = static_cast<unsigned>(j_first + i);
    r.err_form = norm_from_squared(est[4 * i + 0]);
    r.err_dbar_main = norm_from_squared(est[4 * i + 1]);
    r.err_wedge = norm_from_squared(est[4 * i + 2]);
    r.c_dbar = est[4 * i + 3];
    r.bound = form.declared_sup * std::sqrt(std::max(r.c_dbar.estimate, 0.0));
    auto rel = [](const IntegralEstimate& e) { return e.estimate > 0 ? e.std_error / e.estimate : 0.0; };
    const double rel_se = std::max(rel(r.err_wedge.squared), rel(r.c_dbar));
    r.holder_ok = r.err_wedge.value <= r.bound * (1 + 3 * rel_se);
    rows.push_back(r);
  }
  return rows;
}

/// All three error columns at j_final below fraction of their value at j_ref
/// (a column that is exactly zero at j_ref must stay zero).
inline bool limit_verdict(const std::vector<ApproxRow>& rows, unsigned j_ref, unsigned j_final, double fraction = 0.1) {
  const ApproxRow* ref = nullptr;
  const ApproxRow* fin = nullptr;
  for (const auto& r : rows) {
    if (r.j == j_ref) ref = &r;
    if (r.j == j_final) fin = &r;
  }
  require(ref && fin, "limit_verdict: rows for j_ref and j_final are required");
  auto ok = [&](double a, double b) { return a == 0 ? b == 0 : b < fraction * a; };
  return ok(ref->err_form.value, fin->err_form.value) && ok(ref->err_dbar_main.value, fin->err_dbar_main.value) &&
         ok(ref->err_wedge.value, fin->err_wedge.value);
}

struct SupportVerdict {
  bool pass = false;
  std::size_t tested = 0;
  std::size_t nonzero = 0;
};

/// phi_j alpha must vanish identically at points with phi_U > j + 1. Points
/// are drawn log-radially (v_l = -log|z_l| uniform up to 690) and kept when
/// they fall beyond the threshold.
inline SupportVerdict support_check(const CutoffFamily& family, const BoundedTestForm& form, unsigned j,
                                    std::size_t sample_count, std::uint64_t seed = 5) {
  const auto& chart = family.chart();
  check_form_shape(chart, form);
  SupportVerdict v;
  StreamRng rng(seed, 0);
  std::vector<Complex> z(chart.n());
  const Real v_max = 690;
  for (std::size_t attempt = 0; v.tested < sample_count && attempt < 1000 * sample_count; ++attempt) {
    for (std::size_t l = 0; l < chart.n(); ++l) {
      const Real v_min = -std::log(static_cast<Real>(chart.radii()[l]));
      const Real vv = v_min + (v_max - v_min) * static_cast<Real>(rng.uniform());
      z[l] = std::polar(std::exp(-vv), 2 * std::numbers::pi_v<Real> * static_cast<Real>(rng.uniform()));
    }
    const ExhaustionValue phi_U = family.exhaustion(z);
    if (!(phi_U.value > static_cast<Real>(j) + 1)) continue;
    ++v.tested;
    const Real phi = PlateauFunction(j).value(phi_U.value);
    bool zero = true;
    for (const auto& c : detail::eval_all(form.coefficients, z)) zero = zero && (phi * c == Complex(0));
    if (!zero) ++v.nonzero;
  }
  v.pass = v.tested > 0 && v.nonzero == 0;
  return v;
}

}  // namespace paraboliq
