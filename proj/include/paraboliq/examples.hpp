#pragma once

// Built-in charts with ground-truth metadata, plus the test forms shipped
// with each of them.
//
//   punctured_disc  pi(z) = z,                  f = (z)          thin set {0}
//   cusp            pi(t) = (t^2, t^3),         f = (t^2, t^3)   |f|^2 = |t|^4 (1 + |t|^2)
//   node_branch     one branch of the node w_2^2 = w_1^2 (w_1 + 1) through
//                   t = 1 of pi(t) = (t^2 - 1, t (t^2 - 1)); local u = t - 1:
//                   pi(u) = (2u + u^2, 2u + 3u^2 + u^3),  f = pi
//   cone_blowup     pi(s, t) = (s, s t, s t^2) into {w_0 w_2 = w_1^2},
//                   exceptional set {s = 0},    f = pi

#include <algorithm>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "paraboliq/dbar.hpp"
#include "paraboliq/geometry.hpp"
#include "paraboliq/polynomial.hpp"
#include "paraboliq/stokes.hpp"

namespace paraboliq {

struct AnalyticFact {
  std::string quantity;
  std::optional<double> value;  // closed form when available
  std::string law;              // formula or decay law
  std::string provenance;       // how the value was derived
};

struct NamedStokesForm {
  std::string name;
  AmbientOneForm alpha;
  bool exact = false;                 // alpha = d(beta) for a polynomial beta
  std::optional<double> mass_order;  // oint_{|t|=eps} |pi^* alpha| ~ eps^order
};

struct NamedExample {
  std::string name;
  ResolutionChart chart;
  std::vector<AnalyticFact> analytic_facts;
  std::vector<NamedStokesForm> stokes_forms;
  std::vector<BoundedTestForm> bounded_forms;

  const NamedStokesForm& stokes_form(const std::string& form_name) const {
    for (const auto& f : stokes_forms)
      if (f.name == form_name) return f;
    throw ContractViolation("example '" + name + "' has no Stokes form '" + form_name + "'");
  }
  const BoundedTestForm& bounded_form(const std::string& form_name) const {
    for (const auto& f : bounded_forms)
      if (f.name == form_name) return f;
    throw ContractViolation("example '" + name + "' has no bounded form '" + form_name + "'");
  }
};

namespace detail {

/// Monomial c * prod x_i^{e_i}.
inline Polynomial mono(std::vector<unsigned> e, std::complex<double> c = 1.0) { return Polynomial::monomial(std::move(e), c); }

inline BoundedTestForm constant_one(std::size_t n) {
  BoundedTestForm f;
  f.name = "one";
  f.q = 0;
  f.coefficients = {Polynomial::constant(2 * n, 1.0)};
  f.declared_sup = 1;
  f.dbar_coefficients.assign(n, Polynomial(2 * n));
  return f;
}

inline ResolutionChart make_punctured_disc() {
  const Polynomial z = Polynomial::variable(1, 0);
  return ResolutionChart("punctured_disc", 1, 1, {0.5}, {z}, {z}, MonomialDeclaration{{1}});
}

inline ResolutionChart make_cusp() {
  const std::vector<Polynomial> f{mono({2}), mono({3})};
  return ResolutionChart("cusp", 1, 2, {0.5}, f, f, MonomialDeclaration{{2}});
}

inline ResolutionChart make_node_branch() {
  const std::vector<Polynomial> f{mono({1}, 2.0) + mono({2}), mono({1}, 2.0) + mono({2}, 3.0) + mono({3})};
  return ResolutionChart("node_branch", 1, 2, {0.5}, f, f, MonomialDeclaration{{1}});
}

inline ResolutionChart make_cone_blowup() {
  const std::vector<Polynomial> f{mono({1, 0}), mono({1, 1}), mono({1, 2})};
  return ResolutionChart("cone_blowup", 2, 3, {0.5, 0.5}, f, f, MonomialDeclaration{{1, 0}});
}

}  // namespace detail

inline std::vector<NamedExample> catalog() {
  using detail::mono;
  std::vector<NamedExample> out;
  const double pi = std::numbers::pi;
  const double ln2 = std::numbers::ln2;

  {
    NamedExample e{"punctured_disc", detail::make_punctured_disc(), {}, {}, {}};
    e.analytic_facts = {
        {"model_integral", 2 * pi / ln2, "int_{|z|<1/2} dV / (|z|^2 log^2 |z|) = 2 pi / log 2",
         "radial reduction with antiderivative -1/log(rho)"},
        {"dbar_energy_F", pi / (2 * ln2), "||dbar F||^2 = pi / (2 log 2)",
         "|dbar F|^2 = 1 / (4 rho^2 log^2 rho) on the identity zone; antiderivative -1/log(rho)"},
        {"d_energy_F", pi / ln2, "||dF||^2 = 2 ||dbar F||^2", "d- and dbar-parts of a real function agree"},
        {"capacity_ratio", std::exp(-1.0), "c_{k+1} / c_k = e^{-1} for k >= 1",
         "band reduction: c_k = 2 pi e^{-k} int_0^1 (6 t (1 - t))^2 e^{-t} dt"},
    };
    // bump(|w| <= 0.2 -> 1, vanishes for |w| >= 0.4) * wbar_1 dw_1
    e.stokes_forms.push_back({"bump_wbar_dw", AmbientOneForm(1, {mono({0, 1})}, {}, 0.4), false, 2.0});
    e.stokes_forms.push_back({"dw", AmbientOneForm(1, {Polynomial::constant(2, 1.0)}, {}), true, 1.0});
    e.bounded_forms.push_back(detail::constant_one(1));
    BoundedTestForm zbar_dzbar;
    zbar_dzbar.name = "zbar_dzbar";
    zbar_dzbar.q = 1;
    zbar_dzbar.coefficients = {mono({0, 1})};
    zbar_dzbar.declared_sup = 0.5;
    zbar_dzbar.dbar_coefficients = {};  // no (0,2)-forms on a curve
    e.bounded_forms.push_back(zbar_dzbar);
    out.push_back(std::move(e));
  }
  {
    NamedExample e{"cusp", detail::make_cusp(), {}, {}, {}};
    e.analytic_facts = {
        {"declared_monomial", std::nullopt, "k = (2), |f|^2 = |t|^4 g with g = 1 + |t|^2 in [1, 1.25]",
         "direct substitution on the radius-1/2 disc"},
        {"gram_determinant", std::nullopt, "det H = |t|^2 (4 + 9 |t|^2)", "J = (2t, 3t^2)"},
        {"inner_mass_order", 5.0, "oint_{|t|=eps} |pi^*(wbar_2 dw_1)| = 4 pi eps^5",
         "pullback coefficient conj(t^3) 2t has modulus 2|t|^4"},
    };
    // bump(|w| <= 0.1 -> 1, vanishes for |w| >= 0.2) * wbar_2 dw_1; wbar_2 is variable 3 of (w1, w2, wbar1, wbar2)
    e.stokes_forms.push_back(
        {"bump_wbar2_dw1", AmbientOneForm(2, {mono({0, 0, 0, 1}), Polynomial(4)}, {}, 0.2), false, 5.0});
    e.stokes_forms.push_back({"dw1", AmbientOneForm(2, {Polynomial::constant(4, 1.0), Polynomial(4)}, {}), true, 2.0});
    // d(w_1 wbar_2) = wbar_2 dw_1 + w_1 dwbar_2
    e.stokes_forms.push_back({"d_w1_wbar2",
                              AmbientOneForm(2, {mono({0, 0, 0, 1}), Polynomial(4)}, {Polynomial(4), mono({1, 0, 0, 0})}),
                              true, 5.0});
    e.bounded_forms.push_back(detail::constant_one(1));
    out.push_back(std::move(e));
  }
  {
    NamedExample e{"node_branch", detail::make_node_branch(), {}, {}, {}};
    e.analytic_facts = {
        {"branch_tangent", std::nullopt, "pi'(0) = (2, 2): the branch is smooth and transverse to the other branch",
         "differentiate pi(u) = (2u + u^2, 2u + 3u^2 + u^3)"},
    };
    e.stokes_forms.push_back({"dw1", AmbientOneForm(2, {Polynomial::constant(4, 1.0), Polynomial(4)}, {}), true, 1.0});
    e.bounded_forms.push_back(detail::constant_one(1));
    out.push_back(std::move(e));
  }
  {
    NamedExample e{"cone_blowup", detail::make_cone_blowup(), {}, {}, {}};
    e.analytic_facts = {
        {"gram_determinant", std::nullopt,
         "det H = |s|^2 [(1 + |t|^2 + |t|^4)(1 + 4|t|^2) - |t|^2 (1 + 2|t|^2)^2], zero exactly on {s = 0}",
         "symbolic 2x2 determinant of J^H J, checked by computer algebra"},
        {"lemma21_max_mu1", 0.5, "max over the chart of H#_{11} = |s|^2 (1 + 4|t|^2) equals 1/4 (1 + 1) = 0.5",
         "H#_{11} = H_{22}, maximal at the polydisc corner |s| = |t| = 1/2"},
    };
    e.bounded_forms.push_back(detail::constant_one(2));
    BoundedTestForm ds_bar;
    ds_bar.name = "dsbar";
    ds_bar.q = 1;
    ds_bar.coefficients = {Polynomial::constant(4, 1.0), Polynomial(4)};
    ds_bar.declared_sup = 1;  // pullback of the unit covector dwbar_0
    ds_bar.dbar_coefficients = {Polynomial(4)};
    e.bounded_forms.push_back(ds_bar);
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<std::string> example_names() {
  std::vector<std::string> names;
  for (const auto& e : catalog()) names.push_back(e.name);
  return names;
}

inline NamedExample find_example(const std::string& name) {
  for (auto& e : catalog())
    if (e.name == name) return e;
  std::string known;
  for (const auto& n : example_names()) known += (known.empty() ? "" : ", ") + n;
  throw ContractViolation("unknown example '" + name + "' (known: " + known + ")");
}

}  // namespace paraboliq
