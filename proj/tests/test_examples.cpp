#include <gtest/gtest.h>

#include "oracles.hpp"
#include "paraboliq/examples.hpp"

using namespace paraboliq;

TEST(Examples, CatalogNamesAndLookup) {
  EXPECT_EQ(example_names(), (std::vector<std::string>{"punctured_disc", "cusp", "node_branch", "cone_blowup"}));
  EXPECT_EQ(find_example("cusp").chart.N(), 2u);
  EXPECT_EQ(find_example("cone_blowup").chart.n(), 2u);
  try {
    find_example("whitney_umbrella");
    FAIL() << "expected ContractViolation";
  } catch (const ContractViolation& e) {
    EXPECT_NE(std::string(e.what()).find("punctured_disc"), std::string::npos);
  }
  EXPECT_THROW(find_example("cusp").stokes_form("nope"), ContractViolation);
  EXPECT_THROW(find_example("cusp").bounded_form("nope"), ContractViolation);
}

TEST(Examples, EveryChartIsGenericallyNondegenerateWithThinZeroSet) {
  for (const auto& e : catalog()) {
    const auto nd = check_generic_nondegeneracy(e.chart);
    EXPECT_TRUE(nd.pass()) << e.name << " fraction " << nd.fraction();
    EXPECT_TRUE(check_thin_zero_set(e.chart).pass()) << e.name;
  }
}

TEST(Examples, MonomialDeclarationsHold) {
  for (const auto& e : catalog()) {
    ASSERT_TRUE(e.chart.monomial().has_value()) << e.name;
    const auto d = monomial_diagnostic(e.chart, 20000);
    EXPECT_TRUE(d.pass) << e.name << " [" << static_cast<double>(d.min_ratio) << ", " << static_cast<double>(d.max_ratio)
                        << "]";
  }
  // Cusp: |f|^2 / |t|^4 = 1 + |t|^2 in [1, 1.25].
  const auto d = monomial_diagnostic(find_example("cusp").chart, 20000);
  EXPECT_GE(d.min_ratio, 1);
  EXPECT_LE(d.max_ratio, 1.25L);
}

TEST(Examples, WrongMonomialDeclarationIsDetected) {
  const auto cusp = find_example("cusp").chart;
  const ResolutionChart wrong("cusp_wrong", 1, 2, {0.5}, std::vector<Polynomial>(cusp.pi().begin(), cusp.pi().end()),
                              std::vector<Polynomial>(cusp.cut_pullbacks().begin(), cusp.cut_pullbacks().end()),
                              MonomialDeclaration{{5}});
  EXPECT_FALSE(monomial_diagnostic(wrong, 20000).pass);
}

TEST(Examples, NodeBranchLiesOnTheNode) {
  // w_2^2 = w_1^2 (w_1 + 1) along pi(u) = (2u + u^2, 2u + 3u^2 + u^3).
  const auto chart = find_example("node_branch").chart;
  StreamRng rng(8, 0);
  for (int i = 0; i < 100; ++i) {
    const auto u = uniform_polydisc_point(rng, chart.radii());
    const Complex w1 = chart.pi()[0].eval(std::span<const Complex>(u));
    const Complex w2 = chart.pi()[1].eval(std::span<const Complex>(u));
    EXPECT_LE(std::abs(w2 * w2 - w1 * w1 * (w1 + Real(1))), 1e-15L);
  }
  // The branch passes through the node smoothly: pi'(0) = (2, 2).
  const std::vector<Complex> zero{{0, 0}};
  const GramSample g = gram(chart, zero);
  EXPECT_NEAR(static_cast<double>(g.detH), 8.0, 1e-15);
}

TEST(Examples, ConeBlowupLiesOnTheCone) {
  const auto chart = find_example("cone_blowup").chart;
  StreamRng rng(8, 0);
  for (int i = 0; i < 100; ++i) {
    const auto z = uniform_polydisc_point(rng, chart.radii());
    Complex w[3];
    for (int j = 0; j < 3; ++j) w[j] = chart.pi()[j].eval(std::span<const Complex>(z));
    EXPECT_LE(std::abs(w[0] * w[2] - w[1] * w[1]), 1e-16L);
  }
  // det H vanishes exactly on the exceptional set s = 0.
  const std::vector<Complex> on{{0, 0}, {0.3, 0.1}};
  EXPECT_EQ(gram(chart, on).detH, 0);
}

TEST(Examples, AnalyticFactsCarryOracleValues) {
  auto value = [](const NamedExample& e, const std::string& q) -> std::optional<double> {
    for (const auto& f : e.analytic_facts)
      if (f.quantity == q) return f.value;
    return std::nullopt;
  };
  const auto disc = find_example("punctured_disc");
  EXPECT_NEAR(*value(disc, "model_integral"), oracle::model_integral(), 1e-10);
  EXPECT_NEAR(*value(disc, "dbar_energy_F"), oracle::punctured_disc_dbar_F(), 1e-10);
  EXPECT_NEAR(*value(disc, "d_energy_F"), 2 * oracle::punctured_disc_dbar_F(), 1e-10);
  EXPECT_NEAR(*value(disc, "capacity_ratio"),
              oracle::punctured_disc_capacity(2) / oracle::punctured_disc_capacity(1), 1e-12);
  EXPECT_NEAR(*value(find_example("cone_blowup"), "lemma21_max_mu1"), oracle::cone_hsharp11(0.5, 0.5), 1e-15);
  EXPECT_EQ(*value(find_example("cusp"), "inner_mass_order"), 5.0);
}

TEST(Examples, ShippedFormsAreWellShaped) {
  for (const auto& e : catalog()) {
    EXPECT_FALSE(e.bounded_forms.empty()) << e.name;
    for (const auto& f : e.bounded_forms) EXPECT_NO_THROW(check_form_shape(e.chart, f)) << e.name << " " << f.name;
    for (const auto& s : e.stokes_forms) EXPECT_EQ(s.alpha.N(), e.chart.N()) << e.name << " " << s.name;
  }
}
