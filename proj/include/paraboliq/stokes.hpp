#pragma once

// Stokes' theorem on the regular part of a curve, checked through a
// one-dimensional resolution chart t -> pi(t). For a 1-form alpha on C^N,
// beta = pi^* alpha = A dt + B dtbar and
//   d beta = (dB/dt - dA/dtbar) dt ^ dtbar = -2i (dB/dt - dA/dtbar) dx ^ dy.
// On the annulus {eps < |t| < R}:  int d beta = oint_{|t|=R} beta - oint_{|t|=eps} beta.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "paraboliq/exhaustion.hpp"
#include "paraboliq/geometry.hpp"
#include "paraboliq/integrate.hpp"
#include "paraboliq/polynomial.hpp"

namespace paraboliq {

/// chi(|w|^2): 1 for |w| <= R/2, 0 for |w| >= R, quintic Hermite in |w|^2 between.
class RadialBump {
 public:
  explicit RadialBump(double outer_radius)
      : outer_radius_(outer_radius),
        ramp_(static_cast<Real>(outer_radius) * outer_radius / 4, static_cast<Real>(outer_radius) * outer_radius,
              {1, 0, 0}, {0, 0, 0}) {
    require(outer_radius > 0, "RadialBump: outer_radius must be positive");
  }

  double outer_radius() const { return outer_radius_; }

  Real value(Real x) const {
    if (x < ramp_.lower()) return 1;
    if (x < ramp_.upper()) return ramp_.value(x);
    return 0;  // exactly zero on and beyond the outer radius
  }

  Real derivative(Real x) const {
    if (x < ramp_.lower() || x >= ramp_.upper()) return 0;
    return ramp_.derivative(x);
  }

 private:
  double outer_radius_;
  QuinticHermite ramp_;
};

/// alpha = chi(|w|^2) * sum_j (a_j dw_j + b_j dwbar_j), coefficients are
/// polynomials in (w, wbar).
class AmbientOneForm {
 public:
  AmbientOneForm(std::size_t N, std::vector<Polynomial> a, std::vector<Polynomial> b,
                 std::optional<double> bump_outer_radius = std::nullopt)
      : N_(N), a_(std::move(a)), b_(std::move(b)) {
    require(N_ >= 1, "AmbientOneForm: N must be positive");
    if (a_.empty()) a_.assign(N_, Polynomial(2 * N_));
    if (b_.empty()) b_.assign(N_, Polynomial(2 * N_));
    require(a_.size() == N_ && b_.size() == N_, "AmbientOneForm: need N coefficients for dw and for dwbar");
    for (const auto* list : {&a_, &b_})
      for (const auto& p : *list)
        require(p.num_vars() == 2 * N_, "AmbientOneForm: coefficients must be polynomials in (w, wbar)");
    if (bump_outer_radius) bump_.emplace(*bump_outer_radius);
    for (std::size_t j = 0; j < N_; ++j) {
      std::vector<Polynomial> da, db;
      for (std::size_t v = 0; v < 2 * N_; ++v) {
        da.push_back(a_[j].derivative(v));
        db.push_back(b_[j].derivative(v));
      }
      da_.push_back(std::move(da));
      db_.push_back(std::move(db));
    }
  }

  std::size_t N() const { return N_; }
  const std::vector<Polynomial>& a() const { return a_; }
  const std::vector<Polynomial>& b() const { return b_; }
  const std::optional<RadialBump>& bump() const { return bump_; }
  const Polynomial& da(std::size_t j, std::size_t var) const { return da_[j][var]; }
  const Polynomial& db(std::size_t j, std::size_t var) const { return db_[j][var]; }

 private:
  std::size_t N_;
  std::vector<Polynomial> a_, b_;
  std::optional<RadialBump> bump_;
  std::vector<std::vector<Polynomial>> da_, db_;
};

struct PulledBackForm {
  Complex dt;     // coefficient of dt
  Complex dtbar;  // coefficient of dtbar
};

namespace detail {

struct CurvePoint {
  std::vector<Complex> wz;  // (w, conj w)
  std::vector<Complex> dw;  // pi'(t)
  Real chi = 1;
  Real dchi = 0;
  Real s = 0;  // |w|^2
};

inline CurvePoint curve_point(const ResolutionChart& chart, const AmbientOneForm& alpha, Complex t) {
  if (chart.n() != 1) throw UnsupportedDimension("Stokes checks are implemented for curve charts (n = 1) only");
  require(alpha.N() == chart.N(), "AmbientOneForm: ambient dimension differs from the chart's");
  const std::size_t N = chart.N();
  const std::array<Complex, 1> tt{t};
  CurvePoint p;
  p.wz.resize(2 * N);
  p.dw.resize(N);
  for (std::size_t l = 0; l < N; ++l) {
    const Complex w = chart.map().component(l).eval(std::span<const Complex>(tt));
    p.wz[l] = w;
    p.wz[N + l] = std::conj(w);
    p.dw[l] = chart.map().partial(l, 0).eval(std::span<const Complex>(tt));
    p.s += std::norm(w);
  }
  if (alpha.bump()) {
    p.chi = alpha.bump()->value(p.s);
    p.dchi = alpha.bump()->derivative(p.s);
  }
  return p;
}

}  // namespace detail

/// pi^* alpha at t: dw_j = pi_j'(t) dt, dwbar_j = conj(pi_j'(t)) dtbar.
inline PulledBackForm pullback_form(const ResolutionChart& chart, const AmbientOneForm& alpha, Complex t) {
  const auto p = detail::curve_point(chart, alpha, t);
  PulledBackForm f{};
  if (p.chi == 0) return f;
  const std::span<const Complex> wz(p.wz);
  for (std::size_t j = 0; j < chart.N(); ++j) {
    f.dt += alpha.a()[j].eval(wz) * p.dw[j];
    f.dtbar += alpha.b()[j].eval(wz) * std::conj(p.dw[j]);
  }
  f.dt *= p.chi;
  f.dtbar *= p.chi;
  return f;
}

/// Density of d(pi^* alpha) against dx ^ dy at t (complex for complex forms).
inline Complex exterior_derivative_pullback(const ResolutionChart& chart, const AmbientOneForm& alpha, Complex t) {
  const auto p = detail::curve_point(chart, alpha, t);
  const std::size_t N = chart.N();
  const std::span<const Complex> wz(p.wz);
  Complex sum_a{}, sum_b{}, dA_poly{}, dB_poly{};
  Complex ds_dtbar{}, ds_dt{};
  for (std::size_t l = 0; l < N; ++l) {
    ds_dtbar += p.wz[l] * std::conj(p.dw[l]);
    ds_dt += p.wz[N + l] * p.dw[l];
  }
  for (std::size_t j = 0; j < N; ++j) {
    sum_a += alpha.a()[j].eval(wz) * p.dw[j];
    sum_b += alpha.b()[j].eval(wz) * std::conj(p.dw[j]);
    for (std::size_t l = 0; l < N; ++l) {
      dA_poly += alpha.da(j, N + l).eval(wz) * std::conj(p.dw[l]) * p.dw[j];
      dB_poly += alpha.db(j, l).eval(wz) * p.dw[l] * std::conj(p.dw[j]);
    }
  }
  const Complex dA_dtbar = p.dchi * ds_dtbar * sum_a + p.chi * dA_poly;
  const Complex dB_dt = p.dchi * ds_dt * sum_b + p.chi * dB_poly;
  return Complex(0, -2) * (dB_dt - dA_dtbar);
}

struct Circulation {
  Complex value;     // oint beta, counter-clockwise
  Real mass = 0;     // oint |beta(tangent)| dtheta
  std::size_t nodes = 0;
};

/// Trapezoid rule on |t| = radius, doubling from 512 nodes until the change
/// is below 1e-8 relative (to max(|value|, mass)) or 2^16 nodes.
inline Circulation circulation(const ResolutionChart& chart, const AmbientOneForm& alpha, Real radius) {
  auto rule = [&](std::size_t M) {
    Circulation c;
    c.nodes = M;
    const Real h = 2 * std::numbers::pi_v<Real> / static_cast<Real>(M);
    for (std::size_t i = 0; i < M; ++i) {
      const Real theta = h * static_cast<Real>(i);
      const Complex t = std::polar(radius, theta);
      const PulledBackForm f = pullback_form(chart, alpha, t);
      const Complex v = f.dt * Complex(0, 1) * t + f.dtbar * Complex(0, -1) * std::conj(t);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw PoisonedSampleError("circulation: non-finite pulled-back form at a quadrature node, t = " +
                                  detail::describe_point(std::span<const Complex>(&t, 1)));
      c.value += v;
      c.mass += std::abs(v);
    }
    c.value *= h;
    c.mass *= h;
    return c;
  };
  Circulation prev = rule(512);
  for (std::size_t M = 1024; M <= 65536; M *= 2) {
    Circulation next = rule(M);
    const Real scale = std::max(std::abs(next.value), next.mass);
    if (std::abs(next.value - prev.value) <= 1e-8L * scale) return next;
    prev = next;
  }
  return prev;
}

struct StokesRow {
  double eps = 0;
  IntegralEstimate interior_re;
  IntegralEstimate interior_im;
  Complex inner;
  Complex outer;
  Real inner_mass = 0;
  Real outer_mass = 0;
  Real scale = 0;  // |interior| + masses of both boundary circulations
  Real residual = 0;
  Real tolerance = 0;
  bool pass = false;

  Complex interior() const { return {interior_re.estimate, interior_im.estimate}; }
  double interior_std_error() const { return std::hypot(interior_re.std_error, interior_im.std_error); }
};

struct StokesReport {
  std::vector<StokesRow> rows;
  std::optional<double> mass_slope;  // least-squares slope of log(inner mass) vs log(eps)
  bool monotone_mass = false;        // inner mass strictly decreasing along eps_list
  IntegralEstimate l2_norm_squared;  // int |pi^* alpha|^2_gamma dV_gamma
  bool pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
};

/// Least-squares slope of log y against log x; empty if any y <= 0.
inline std::optional<double> loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2 || x.size() != y.size()) return std::nullopt;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) return std::nullopt;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double n = static_cast<double>(x.size());
  const double den = n * sxx - sx * sx;
  if (den == 0) return std::nullopt;
  return (n * sxy - sx * sy) / den;
}

inline StokesReport stokes_residual(const ResolutionChart& chart, const AmbientOneForm& alpha,
                                    const std::vector<double>& eps_list, const SamplerConfig& cfg) {
  if (chart.n() != 1) throw UnsupportedDimension("stokes_residual: curve charts (n = 1) only");
  require(!eps_list.empty(), "stokes_residual: eps_list is empty");
  const double R = chart.radii()[0];
  require(eps_list.front() < R, "stokes_residual: eps must stay below the chart radius");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    require(eps_list[i] > 0, "stokes_residual: eps must be positive");
    if (i > 0) require(eps_list[i] < eps_list[i - 1], "stokes_residual: eps_list must be strictly decreasing");
  }

  StokesReport rep;
  const Circulation outer = circulation(chart, alpha, R);
  std::vector<double> masses;
  for (double eps : eps_list) {
    const Real e = eps;
    auto est = integrate_channels(
        2,
        [&](std::span<const Complex> z, std::span<Real> out) {
          if (std::abs(z[0]) <= e) return;
          const Complex d = exterior_derivative_pullback(chart, alpha, z[0]);
          out[0] = d.real();
          out[1] = d.imag();
        },
        chart.radii(), cfg);
    const Circulation inner = circulation(chart, alpha, e);
    StokesRow row;
    row.eps = eps;
    row.interior_re = est[0];
    row.interior_im = est[1];
    row.inner = inner.value;
    row.outer = outer.value;
    row.inner_mass = inner.mass;
    row.outer_mass = outer.mass;
    row.residual = std::abs(row.interior() - (outer.value - inner.value));
    // A circulation's size is its absolute mass oint |beta|: for exact forms
    // the signed values cancel to rounding level and cannot set a scale.
    row.scale = std::abs(row.interior()) + outer.mass + inner.mass;
    row.tolerance = std::max<Real>(3 * row.interior_std_error(), 1e-4L * row.scale);
    row.pass = row.residual <= row.tolerance;
    masses.push_back(static_cast<double>(inner.mass));
    rep.rows.push_back(row);
  }
  rep.mass_slope = loglog_slope(eps_list, masses);
  rep.monotone_mass = true;
  for (std::size_t i = 1; i < masses.size(); ++i) rep.monotone_mass = rep.monotone_mass && masses[i] < masses[i - 1];

  rep.l2_norm_squared = integrate_channels(
      1,
      [&](std::span<const Complex> z, std::span<Real> out) {
        const GramSample g = gram(chart, z);
        const PulledBackForm f = pullback_form(chart, alpha, z[0]);
        const std::array<Complex, 1> a{f.dt}, b{f.dtbar};
        out[0] = holomorphic_cometric_density(g, a) + cometric_energy_density(g, b);
      },
      chart.radii(), cfg)[0];
  return rep;
}

}  // namespace paraboliq
