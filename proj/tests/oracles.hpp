#pragma once

// Independent reference values for the test suites. Each oracle reduces the
// quantity to a one-dimensional radial integral (all built-in curve charts
// except node_branch are rotation invariant) and evaluates it with Boost
// quadrature, without touching the library's sampler or cutoff code.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>

namespace oracle {

inline constexpr double pi = std::numbers::pi;
inline constexpr double ln2 = std::numbers::ln2;

/// Largest v = -log rho reached by the default log-radial floor 1e-300.
inline double floor_v(double floor = 1e-300) { return -std::log(floor); }

/// int_a^b g(v) dv by adaptive Gauss-Kronrod.
inline double gk(const std::function<double(double)>& g, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, a, b, 15, 1e-13);
}

/// int_a^inf g(v) dv by exp-sinh.
inline double tail(const std::function<double(double)>& g, double a) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate([&](double x) { return g(a + x); }, 1e-13);
}

/// Radial integral int_{|z| < 1/2} w(rho) dV in the variable v = -log rho:
/// 2 pi int h(v) dv with h(v) = rho^2 w(rho), from v = log 2 to v_max
/// (infinity when v_max < 0). Callers supply h in closed form so that it stays
/// finite where rho underflows.
inline double radial(const std::function<double(double v)>& h, double v_max = -1) {
  auto g = [&](double v) { return 2 * pi * h(v); };
  return v_max < 0 ? tail(g, ln2) : gk(g, ln2, v_max);
}

/// int_{|z|<1/2} dV / (|z|^2 log^2 |z|): h = 1 / v^2.
inline double model_integral(double v_max = -1) {
  return radial([](double v) { return 1 / (v * v); }, v_max);
}

/// Closed form of the model integral: antiderivative -1/log(rho).
inline double model_integral_closed() { return 2 * pi / ln2; }

// ||dbar F||^2 for a radial F = G(rho) on a curve chart: in dimension one the
// adjugate is 1, so the density is |dF/dzbar|^2 = G'^2 / 4 in chart
// coordinates and h = (rho G')^2 / 4.

/// Punctured disc: S = rho^2 lies in the identity zone of the clamp, so
/// F = log(2 v) and rho G' = -1 / v.
inline double punctured_disc_dbar_F(double v_max = -1) {
  return radial([](double v) { return 1 / (4 * v * v); }, v_max);
}

/// Cusp: S = rho^4 (1 + rho^2) <= 0.078 stays in the identity zone;
/// L = -log S = 4 v - log(1 + rho^2), F = log L, rho G' = rho L' / L with
/// rho L' = -(4 + 2 rho^2 / (1 + rho^2)).
inline double cusp_dbar_F(double v_max = -1) {
  return radial(
      [](double v) {
        const double r2 = std::exp(-2 * v);
        const double L = 4 * v - std::log1p(r2);
        const double rdL = -(4 + 2 * r2 / (1 + r2));
        return rdL * rdL / (4 * L * L);
      },
      v_max);
}

/// Plateau derivative on [k, k+1]: -6 t (1 - t), t = x - k.
inline double plateau_slope(double x, int k) {
  const double t = x - k;
  return (t < 0 || t > 1) ? 0.0 : -6 * t * (1 - t);
}

/// Punctured-disc capacity c_k = ||d phi_k||^2 = 2 ||dbar phi_k||^2 by direct
/// radial quadrature over the band k <= F <= k + 1, F = log(2 v).
inline double punctured_disc_capacity(int k, double v_max = -1) {
  const double v_lo = std::exp(static_cast<double>(k)) / 2;
  double v_hi = std::exp(static_cast<double>(k) + 1) / 2;
  if (v_max >= 0) v_hi = std::min(v_hi, v_max);
  if (v_hi <= std::max(v_lo, ln2)) return 0;
  auto g = [&](double v) {
    const double slope = plateau_slope(std::log(2 * v), k);
    // |dbar phi|^2 dV = slope^2 / (4 rho^2 v^2) * 2 pi rho^2 dv; d-energy doubles it.
    return 2 * 2 * pi * slope * slope / (4 * v * v);
  };
  return gk(g, std::max(v_lo, ln2), v_hi);
}

/// Same quantity from the band reduction 2 pi e^{-k} int_0^1 s'(t)^2 e^{-t} dt.
inline double punctured_disc_capacity_band(int k) {
  return 2 * pi * std::exp(-static_cast<double>(k)) *
         gk([](double t) { return 36 * t * t * (1 - t) * (1 - t) * std::exp(-t); }, 0, 1);
}

/// Cusp pullback of wbar_2 dw_1 has coefficient conj(t)^3 2t, modulus 2 rho^4:
/// oint_{|t|=eps} |beta| = 2 eps^4 * 2 pi eps.
inline double cusp_wbar2_dw1_inner_mass(double eps) { return 4 * pi * std::pow(eps, 5); }

/// Cone blowup, adjugate diagonal entry H#_{11} = H_{22} = |s|^2 (1 + 4 |t|^2).
inline double cone_hsharp11(std::complex<double> s, std::complex<double> t) {
  return std::norm(s) * (1 + 4 * std::norm(t));
}

/// Cone blowup det H from the symbolic 2x2 determinant.
inline double cone_det_h(std::complex<double> s, std::complex<double> t) {
  const double a = std::norm(t);
  return std::norm(s) * ((1 + a + a * a) * (1 + 4 * a) - a * (1 + 2 * a) * (1 + 2 * a));
}

/// Second-order central difference (f(h) - f(-h)) / 2h.
template <class F>
double central(F&& f, double h) {
  return (f(h) - f(-h)) / (2 * h);
}

}  // namespace oracle
