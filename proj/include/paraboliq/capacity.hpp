#pragma once

// Gradient energies of the exhaustion and the capacity sequence of the
// cutoffs. Metric convention: |dz_mu|^2_gamma = H^{mu mu}, dz and dzbar
// orthogonal with equal norms, and the Riemannian energy of a real function
// is the d-energy = (d-part) + (dbar-part). For real psi the two parts agree
// pointwise, so the d-energy is twice the dbar-energy.

#include <optional>
#include <string>
#include <vector>

#include "paraboliq/exhaustion.hpp"
#include "paraboliq/geometry.hpp"
#include "paraboliq/integrate.hpp"

namespace paraboliq {

enum class EnergyQuantity { dbar_F, d_F, dbar_phi, d_phi };

inline const char* to_string(EnergyQuantity q) {
  switch (q) {
    case EnergyQuantity::dbar_F: return "dbar_F";
    case EnergyQuantity::d_F: return "d_F";
    case EnergyQuantity::dbar_phi: return "dbar_phi";
    case EnergyQuantity::d_phi: return "d_phi";
  }
  return "?";
}

inline EnergyQuantity energy_quantity_from_string(const std::string& s) {
  for (auto q : {EnergyQuantity::dbar_F, EnergyQuantity::d_F, EnergyQuantity::dbar_phi, EnergyQuantity::d_phi})
    if (s == to_string(q)) return q;
  throw ContractViolation("unknown energy quantity '" + s + "'");
}

inline bool is_cutoff_quantity(EnergyQuantity q) { return q == EnergyQuantity::dbar_phi || q == EnergyQuantity::d_phi; }

struct EnergyResult {
  std::string chart;
  EnergyQuantity quantity = EnergyQuantity::dbar_F;
  std::optional<unsigned> k;
  IntegralEstimate value;
};

/// dbar- and d-energy densities (already multiplied by det H) of a real
/// function with antiholomorphic gradient g.
struct EnergyDensity {
  Real dbar = 0;
  Real d = 0;
};

inline EnergyDensity energy_density(const GramSample& s, std::span<const Complex> gradbar) {
  std::vector<Complex> grad(gradbar.size());
  for (std::size_t j = 0; j < gradbar.size(); ++j) grad[j] = std::conj(gradbar[j]);  // dpsi/dz_j for real psi
  const Real dbar = cometric_energy_density(s, gradbar);
  const Real del = holomorphic_cometric_density(s, grad);
  return {dbar, dbar + del};
}

struct EnergyPair {
  EnergyResult dbar;
  EnergyResult d;
};

/// dbar- and d-energy of F (k empty) or of phi_k, from shared samples.
inline EnergyPair energy_pair(const CutoffFamily& family, std::optional<unsigned> k, const SamplerConfig& cfg) {
  const auto& chart = family.chart();
  auto est = integrate_channels(
      2,
      [&](std::span<const Complex> z, std::span<Real> out) {
        const GramSample g = gram(chart, z);
        ExhaustionValue v = family.exhaustion(z);
        if (k) v = CutoffFamily::apply_plateau(v, *k);
        const EnergyDensity e = energy_density(g, v.gradbar);
        out[0] = e.dbar;
        out[1] = e.d;
      },
      chart.radii(), cfg);
  EnergyPair p;
  p.dbar = {chart.name(), k ? EnergyQuantity::dbar_phi : EnergyQuantity::dbar_F, k, est[0]};
  p.d = {chart.name(), k ? EnergyQuantity::d_phi : EnergyQuantity::d_F, k, est[1]};
  return p;
}

inline EnergyResult energy(const CutoffFamily& family, EnergyQuantity quantity, std::optional<unsigned> k,
                           const SamplerConfig& cfg) {
  require(is_cutoff_quantity(quantity) == k.has_value(), "energy: k is required exactly for the phi quantities");
  const EnergyPair p = energy_pair(family, k, cfg);
  return (quantity == EnergyQuantity::dbar_F || quantity == EnergyQuantity::dbar_phi) ? p.dbar : p.d;
}

/// Energies at n, 2n, ..., 2^{levels-1} n samples.
inline DoublingReport energy_doubling(const CutoffFamily& family, EnergyQuantity quantity, std::optional<unsigned> k,
                                      const SamplerConfig& cfg, unsigned levels) {
  require(levels >= 2, "energy_doubling: levels must be >= 2");
  std::vector<IntegralEstimate> out;
  SamplerConfig c = cfg;
  for (unsigned l = 0; l < levels; ++l) {
    c.n_samples = cfg.n_samples << l;
    out.push_back(energy(family, quantity, k, c).value);
  }
  return doubling_report(std::move(out));
}

struct CapacityRow {
  unsigned k = 0;
  EnergyResult d;     // c_k
  EnergyResult dbar;  // dbar variant
};

/// c_k = ||d phi_k||^2 for k in [k_first, k_last], all from one sample set.
inline std::vector<CapacityRow> capacity_sequence(const CutoffFamily& family, unsigned k_first, unsigned k_last,
                                                  const SamplerConfig& cfg) {
  require(k_first <= k_last, "capacity_sequence: empty k range");
  const auto& chart = family.chart();
  const std::size_t count = k_last - k_first + 1;
  auto est = integrate_channels(
      2 * count,
      [&](std::span<const Complex> z, std::span<Real> out) {
        const ExhaustionValue phi_U = family.exhaustion(z);
        // Bands [k, k+1] containing phi_U(z); zero elsewhere.
        bool any = false;
        for (std::size_t i = 0; i < count; ++i) {
          const Real t = phi_U.value - static_cast<Real>(k_first + i);
          any = any || (t >= 0 && t <= 1);
        }
        if (!any) return;
        const GramSample g = gram(chart, z);
        const EnergyDensity e = energy_density(g, phi_U.gradbar);
        for (std::size_t i = 0; i < count; ++i) {
          const Real slope = PlateauFunction(static_cast<unsigned>(k_first + i)).derivative(phi_U.value);
          out[2 * i] = slope * slope * e.d;
          out[2 * i + 1] = slope * slope * e.dbar;
        }
      },
      chart.radii(), cfg);
  std::vector<CapacityRow> rows;
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned k = static_cast<unsigned>(k_first + i);
    rows.push_back({k, {chart.name(), EnergyQuantity::d_phi, k, est[2 * i]},
                    {chart.name(), EnergyQuantity::dbar_phi, k, est[2 * i + 1]}});
  }
  return rows;
}

/// c_{k+1} <= c_k + 3 combined stderr for every consecutive pair with k >= 1.
inline bool capacity_monotone(const std::vector<CapacityRow>& rows) {
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (rows[i].k < 1) continue;
    const auto& a = rows[i].d.value;
    const auto& b = rows[i + 1].d.value;
    if (b.estimate > a.estimate + 3 * std::hypot(a.std_error, b.std_error)) return false;
  }
  return true;
}

struct CapacityCertificate {
  double epsilon = 0;
  std::optional<unsigned> k_star;  // psi = phi_{k_star}: 1 on {phi_U <= k_star}, 0 on {phi_U >= k_star + 1}
  std::vector<CapacityRow> table;
  bool monotone = false;
  bool pass = false;
};

/// Smallest k in [0, k_max] with c_k + 3 stderr < epsilon^2.
inline CapacityCertificate capacity_certificate(const CutoffFamily& family, double epsilon, unsigned k_max,
                                                const SamplerConfig& cfg) {
  require(epsilon > 0, "capacity_certificate: epsilon must be positive");
  CapacityCertificate cert;
  cert.epsilon = epsilon;
  cert.table = capacity_sequence(family, 0, k_max, cfg);
  cert.monotone = capacity_monotone(cert.table);
  for (const auto& row : cert.table) {
    if (row.d.value.estimate + 3 * row.d.value.std_error < epsilon * epsilon) {
      cert.k_star = row.k;
      break;
    }
  }
  cert.pass = cert.k_star.has_value() && cert.monotone;
  return cert;
}

}  // namespace paraboliq
