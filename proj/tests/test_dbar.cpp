#include <gtest/gtest.h>

#include "oracles.hpp"
#include "paraboliq/capacity.hpp"
#include "paraboliq/dbar.hpp"
#include "paraboliq/examples.hpp"

using namespace paraboliq;

namespace {

SamplerConfig config(std::size_t n) {
  SamplerConfig c;
  c.n_samples = n;
  c.workers = 1;
  return c;
}

BoundedTestForm zero_form(std::size_t n) {
  BoundedTestForm f;
  f.name = "zero";
  f.q = 0;
  f.coefficients = {Polynomial(2 * n)};
  f.declared_sup = 1;
  f.dbar_coefficients.assign(n, Polynomial(2 * n));
  return f;
}

}  // namespace

TEST(BoundedForm, ShapeChecks) {
  const auto cone = find_example("cone_blowup");
  BoundedTestForm f = cone.bounded_form("dsbar");
  EXPECT_NO_THROW(check_form_shape(cone.chart, f));
  f.dbar_coefficients.clear();
  EXPECT_THROW(check_form_shape(cone.chart, f), ContractViolation);
  f = cone.bounded_form("dsbar");
  f.q = 2;
  EXPECT_THROW(check_form_shape(cone.chart, f), ContractViolation);
  f = cone.bounded_form("one");
  f.declared_sup = 0;
  EXPECT_THROW(check_form_shape(cone.chart, f), ContractViolation);
  EXPECT_EQ(expected_coefficient_count(1, 2), 2u);
  EXPECT_EQ(expected_dbar_count(1, 2), 1u);
  EXPECT_EQ(expected_dbar_count(1, 1), 0u);
  EXPECT_EQ(expected_dbar_count(0, 2), 2u);
}

TEST(BoundedForm, SymbolicDbar) {
  // a = z zbar^2 on a curve: da/dzbar = 2 z zbar
  BoundedTestForm f;
  f.q = 0;
  f.coefficients = {Polynomial::monomial({1, 2})};
  const auto d = symbolic_dbar(f, 1);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(max_coeff_distance(d[0], Polynomial::monomial({1, 1}, 2.0)), 0.0);
  // (0,1)-form a_0 dsbar + a_1 dtbar with a_0 = tbar, a_1 = 0 on a surface:
  // dbar = -(da_0/dtbar) dsbar ^ dtbar = -1.
  BoundedTestForm g;
  g.q = 1;
  g.coefficients = {Polynomial::monomial({0, 0, 0, 1}), Polynomial(4)};
  const auto dg = symbolic_dbar(g, 2);
  ASSERT_EQ(dg.size(), 1u);
  EXPECT_EQ(max_coeff_distance(dg[0], Polynomial::constant(4, -1.0)), 0.0);
}

TEST(BoundedForm, ValidationFlagsWrongSupAndWrongDbar) {
  const auto disc = find_example("punctured_disc");
  BoundedTestForm f = disc.bounded_form("zbar_dzbar");
  auto v = validate_form(disc.chart, f, 20000);
  EXPECT_TRUE(v.sup_ok);
  EXPECT_TRUE(v.dbar_ok);
  EXPECT_LE(v.max_norm, 0.5L);
  f.declared_sup = 0.4;
  EXPECT_FALSE(validate_form(disc.chart, f, 20000).sup_ok);

  BoundedTestForm g = disc.bounded_form("one");
  g.dbar_coefficients = {Polynomial::constant(2, 1.0)};
  v = validate_form(disc.chart, g, 100);
  EXPECT_FALSE(v.dbar_ok);
  EXPECT_DOUBLE_EQ(v.dbar_deviation, 1.0);
}

TEST(BoundedForm, ShippedFormsValidate) {
  for (const auto& e : catalog())
    for (const auto& f : e.bounded_forms) {
      const auto v = validate_form(e.chart, f, 20000);
      EXPECT_TRUE(v.sup_ok) << e.name << " " << f.name;
      EXPECT_TRUE(v.dbar_ok) << e.name << " " << f.name;
    }
}

TEST(Densities, WedgeOnASurfaceIsTheGramDeterminant) {
  // |xi ^ eta|^2_gamma det H = |det [xi eta]|^2 for (0,1)-covectors on a
  // surface: compare against the explicit Gram determinant with G = H^{-1}.
  const auto cone = find_example("cone_blowup").chart;
  StreamRng rng(4, 0);
  for (int i = 0; i < 50; ++i) {
    const auto z = uniform_polydisc_point(rng, cone.radii());
    const GramSample g = gram(cone, z);
    if (!(g.detH > 1e-6L)) continue;
    const std::vector<Complex> gphi{{0.3, -0.2}, {1.1, 0.4}}, a{{-0.5, 0.7}, {0.2, 0.1}};
    const CMatrix G = g.H.inverse();
    auto ip = [&](const std::vector<Complex>& x, const std::vector<Complex>& y) {
      Complex s{};
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) s += std::conj(x[p]) * G(p, q) * y[q];
      return s;
    };
    const Complex gram_det = ip(gphi, gphi) * ip(a, a) - ip(gphi, a) * ip(a, gphi);
    const Real expect = gram_det.real() * g.detH;
    EXPECT_NEAR(static_cast<double>(wedge_density(g, 1, gphi, a)), static_cast<double>(expect),
                1e-9 * (1 + static_cast<double>(std::abs(expect))));
  }
}

TEST(Densities, FormDensityIsPointwiseNormTimesDetH) {
  const auto cone = find_example("cone_blowup").chart;
  const std::vector<Complex> z{{0.2, 0.1}, {-0.3, 0.2}};
  const GramSample g = gram(cone, z);
  const std::vector<Complex> a{{1, 0}, {0, 0}};
  // |dsbar|^2 det H = H#_{11} = |s|^2 (1 + 4|t|^2)
  EXPECT_NEAR(static_cast<double>(form_density(g, 1, a)),
              oracle::cone_hsharp11({0.2, 0.1}, {-0.3, 0.2}), 1e-15);
  const std::vector<Complex> c{{2, 0}};
  EXPECT_NEAR(static_cast<double>(form_density(g, 0, c)), 4 * static_cast<double>(g.detH), 1e-15);
}

TEST(ApproxSequence, ZeroFormGivesZeroColumns) {
  for (const auto& e : catalog()) {
    const auto rows = approx_sequence(CutoffFamily(e.chart), zero_form(e.chart.n()), 1, 3, config(20000));
    for (const auto& r : rows) {
      EXPECT_EQ(r.err_form.value, 0);
      EXPECT_EQ(r.err_dbar_main.value, 0);
      EXPECT_EQ(r.err_wedge.value, 0);
      EXPECT_TRUE(r.holder_ok);
    }
  }
}

TEST(ApproxSequence, ConstantOneCollapsesToTheCapacityColumn) {
  const CutoffFamily fam(find_example("punctured_disc").chart);
  const auto cfg = config(100000);
  const auto rows = approx_sequence(fam, find_example("punctured_disc").bounded_form("one"), 1, 6, cfg);
  const auto cap = capacity_sequence(fam, 1, 6, cfg);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double w2 = rows[i].err_wedge.squared.estimate;
    EXPECT_LE(std::abs(w2 - rows[i].c_dbar.estimate), 1e-10 * rows[i].c_dbar.estimate);
    EXPECT_LE(std::abs(w2 - cap[i].dbar.value.estimate), 1e-10 * cap[i].dbar.value.estimate);
    EXPECT_EQ(rows[i].err_dbar_main.value, 0);
  }
}

TEST(ApproxSequence, ErrorFormMatchesRadialOracle) {
  // ||(1 - phi_j) 1||^2 on the punctured disc: 2 pi int (1 - f_j(log 2v))^2 rho^2 dv.
  const CutoffFamily fam(find_example("punctured_disc").chart);
  const auto rows = approx_sequence(fam, find_example("punctured_disc").bounded_form("one"), 1, 2, config(200000));
  for (const auto& r : rows) {
    const int j = static_cast<int>(r.j);
    const double v_lo = std::exp(static_cast<double>(j)) / 2;
    auto miss2 = [&](double v) {
      const double t = std::log(2 * v) - j;
      const double m = t <= 0 ? 0 : (t >= 1 ? 1 : t * t * (3 - 2 * t));
      return 2 * std::numbers::pi * m * m * std::exp(-2 * v);
    };
    const double expect = oracle::gk(miss2, v_lo, v_lo * std::numbers::e) + oracle::tail(miss2, v_lo * std::numbers::e);
    EXPECT_NEAR(r.err_form.squared.estimate, expect, 4 * r.err_form.squared.std_error + 1e-15) << "j=" << j;
  }
}

TEST(ApproxSequence, HolderBoundAndLimitOnShippedForms) {
  for (const auto& e : catalog()) {
    const CutoffFamily fam(e.chart);
    for (const auto& f : e.bounded_forms) {
      const auto rows = approx_sequence(fam, f, 1, 6, config(100000));
      for (const auto& r : rows) EXPECT_TRUE(r.holder_ok) << e.name << " " << f.name << " j=" << r.j;
      EXPECT_TRUE(limit_verdict(rows, 1, 6)) << e.name << " " << f.name;
    }
  }
}

TEST(ApproxSequence, LimitVerdictLogic) {
  std::vector<ApproxRow> rows(2);
  rows[0].j = 1;
  rows[1].j = 6;
  rows[0].err_form.value = 1;
  rows[1].err_form.value = 0.05;
  EXPECT_TRUE(limit_verdict(rows, 1, 6));
  rows[1].err_form.value = 0.2;
  EXPECT_FALSE(limit_verdict(rows, 1, 6));
  rows[1].err_form.value = 0;
  rows[1].err_wedge.value = 1e-30;  // zero at j = 1, nonzero later
  EXPECT_FALSE(limit_verdict(rows, 1, 6));
  EXPECT_THROW(limit_verdict(rows, 1, 7), ContractViolation);
}

TEST(Support, CutoffFormsVanishBeyondTheBand) {
  for (const auto& e : catalog()) {
    const CutoffFamily fam(e.chart);
    for (const auto& f : e.bounded_forms) {
      const auto v = support_check(fam, f, 3, 500);
      EXPECT_TRUE(v.pass) << e.name << " " << f.name;
      EXPECT_EQ(v.tested, 500u);
    }
  }
}

TEST(Support, NegativeControlInsideTheBand) {
  // At points with phi_U < j the cutoff equals 1 and phi_j alpha = alpha != 0.
  const auto ex = find_example("punctured_disc");
  const CutoffFamily fam(ex.chart);
  const std::vector<Complex> z{{0.3, 0}};
  ASSERT_LT(fam.exhaustion(z).value, 3);
  EXPECT_EQ(fam.cutoff_phi(3, z).value, 1);
  EXPECT_NE(eval_doubled(ex.bounded_form("zbar_dzbar").coefficients[0], std::span<const Complex>(z)), Complex(0));
}
