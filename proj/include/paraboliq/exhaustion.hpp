#pragma once

// The log-log exhaustion F = log|log r(|f|^2)| of the thin set {f = 0},
// the clamp r, the plateau family f_k and the cutoffs phi_k = f_k(F + hat_phi).
// All gradients are antiholomorphic Wirtinger gradients d/dzbar_j, given in
// closed form by the chain rule.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <span>
#include <vector>

#include "paraboliq/geometry.hpp"
#include "paraboliq/polynomial.hpp"
#include "paraboliq/random.hpp"
#include "paraboliq/types.hpp"

namespace paraboliq {

/// Quintic on [a, b] matching value, first and second derivative at both ends.
class QuinticHermite {
 public:
  struct EndpointData {
    Real value = 0;
    Real d1 = 0;
    Real d2 = 0;
  };

  QuinticHermite(Real a, Real b, EndpointData left, EndpointData right) : a_(a), h_(b - a) {
    require(b > a, "QuinticHermite: empty interval");
    // Hermite basis on t in [0, 1], coefficients of t^0..t^5.
    static constexpr std::array<std::array<Real, 6>, 6> basis{{
        {1, 0, 0, -10, 15, -6},         // value at 0
        {0, 1, 0, -6, 8, -3},           // slope at 0
        {0, 0, 0.5L, -1.5L, 1.5L, -0.5L},  // curvature at 0
        {0, 0, 0, 10, -15, 6},          // value at 1
        {0, 0, 0, -4, 7, -3},           // slope at 1
        {0, 0, 0, 0.5L, -1, 0.5L},      // curvature at 1
    }};
    const std::array<Real, 6> weights{left.value,  h_ * left.d1,  h_ * h_ * left.d2,
                                      right.value, h_ * right.d1, h_ * h_ * right.d2};
    coeffs_.fill(0);
    for (std::size_t b_idx = 0; b_idx < 6; ++b_idx)
      for (std::size_t i = 0; i < 6; ++i) coeffs_[i] += weights[b_idx] * basis[b_idx][i];
  }

  Real lower() const { return a_; }
  Real upper() const { return a_ + h_; }
  /// Coefficients of the local variable t = (x - a) / (b - a).
  const std::array<Real, 6>& coefficients() const { return coeffs_; }

  Real value(Real x) const {
    const Real t = (x - a_) / h_;
    Real p = coeffs_[5];
    for (int i = 4; i >= 0; --i) p = p * t + coeffs_[static_cast<std::size_t>(i)];
    return p;
  }

  Real derivative(Real x) const {
    const Real t = (x - a_) / h_;
    Real p = 5 * coeffs_[5];
    for (int i = 4; i >= 1; --i) p = p * t + static_cast<Real>(i) * coeffs_[static_cast<std::size_t>(i)];
    return p / h_;
  }

  Real second_derivative(Real x) const {
    const Real t = (x - a_) / h_;
    Real p = 20 * coeffs_[5];
    for (int i = 4; i >= 2; --i) p = p * t + static_cast<Real>(i * (i - 1)) * coeffs_[static_cast<std::size_t>(i)];
    return p / (h_ * h_);
  }

 private:
  Real a_;
  Real h_;
  std::array<Real, 6> coeffs_{};
};

/// r(x) = x on [0, 1/4], r(x) = 1/2 on [1/2, inf), quintic Hermite between.
/// C^2 at both junctions.
class ClampFunction {
 public:
  struct Eval {
    Real value;
    Real derivative;
  };

  ClampFunction() : middle_(kIdentityEnd, kPlateauStart, {kIdentityEnd, 1, 0}, {kPlateauStart, 0, 0}) {}

  static constexpr Real kIdentityEnd = 0.25L;
  static constexpr Real kPlateauStart = 0.5L;

  const QuinticHermite& middle() const { return middle_; }

  Eval operator()(Real x) const {
    require(x >= 0, "ClampFunction: argument must be non-negative");
    if (x < kIdentityEnd) return {x, 1};
    if (x <= kPlateauStart) return {middle_.value(x), middle_.derivative(x)};
    return {kPlateauStart, 0};
  }

  Real second_derivative(Real x) const {
    require(x >= 0, "ClampFunction: argument must be non-negative");
    if (x < kIdentityEnd || x > kPlateauStart) return 0;
    return middle_.second_derivative(x);
  }

 private:
  QuinticHermite middle_;
};

/// f_k(x) = 1 for x <= k, 0 for x >= k+1, 1 - s(x - k) between with
/// s(t) = 3t^2 - 2t^3. |f_k'| <= 3/2.
class PlateauFunction {
 public:
  explicit PlateauFunction(unsigned k) : k_(k) {}

  unsigned k() const { return k_; }

  Real value(Real x) const {
    const Real t = x - static_cast<Real>(k_);
    if (t < 0) return 1;
    if (t <= 1) return 1 - t * t * (3 - 2 * t);
    return 0;
  }

  Real derivative(Real x) const {
    const Real t = x - static_cast<Real>(k_);
    if (t < 0 || t > 1) return 0;
    return -6 * t * (1 - t);
  }

 private:
  unsigned k_;
};

struct ExhaustionValue {
  Real value = 0;
  std::vector<Complex> gradbar;
  Real S = 0;  // sum |f_k|^2 at the point
};

/// F from log S, valid in the identity zone of the clamp (S <= 1/4).
inline Real loglog_F_from_log_S(Real log_S) {
  require(log_S <= std::log(ClampFunction::kIdentityEnd), "loglog_F_from_log_S: S must lie in the identity zone");
  return std::log(-log_S);
}

class CutoffFamily {
 public:
  explicit CutoffFamily(ResolutionChart chart, ClampFunction clamp = {}, std::optional<Polynomial> hat_phi = std::nullopt)
      : chart_(std::move(chart)), clamp_(std::move(clamp)), hat_phi_(hat_phi ? std::move(*hat_phi) : Polynomial(2 * chart_.n())) {
    require(hat_phi_.num_vars() == 2 * chart_.n(), "CutoffFamily: hat_phi must be a polynomial in (z, zbar)");
    for (std::size_t j = 0; j < chart_.n(); ++j) hat_phi_dzbar_.push_back(hat_phi_.derivative(chart_.n() + j));
  }

  const ResolutionChart& chart() const { return chart_; }
  const ClampFunction& clamp() const { return clamp_; }
  const Polynomial& hat_phi() const { return hat_phi_; }

  /// F = log(-log r(S)) and dF/dzbar_j = r'(S) (dS/dzbar_j) / (r log r).
  /// log r < 0, so F grows as S shrinks.
  ExhaustionValue loglog_F(std::span<const Complex> z) const {
    const Abs2Sum s = chart_.cut().abs2_sum(z);
    if (!(s.value > 0)) throw SingularPointError("loglog_F: point lies on the cut-out set (S = 0)");
    if (s.value < std::numeric_limits<Real>::min())
      throw OverflowError("loglog_F: S underflows the working precision; use loglog_F_from_log_S");
    const auto r = clamp_(s.value);
    const Real log_r = std::log(r.value);
    ExhaustionValue out;
    out.S = s.value;
    out.value = std::log(-log_r);
    out.gradbar.resize(s.gradbar.size());
    const Real factor = r.derivative / (r.value * log_r);
    for (std::size_t j = 0; j < s.gradbar.size(); ++j) out.gradbar[j] = factor * s.gradbar[j];
    return out;
  }

  /// phi_U = F + hat_phi.
  ExhaustionValue exhaustion(std::span<const Complex> z) const {
    ExhaustionValue out = loglog_F(z);
    if (!hat_phi_.is_zero()) {
      out.value += eval_doubled(hat_phi_, z).real();
      for (std::size_t j = 0; j < out.gradbar.size(); ++j) out.gradbar[j] += eval_doubled(hat_phi_dzbar_[j], z);
    }
    return out;
  }

  /// phi_k = f_k(phi_U), gradient f_k'(phi_U) * dphi_U/dzbar.
  static ExhaustionValue apply_plateau(const ExhaustionValue& phi_U, unsigned k) {
    const PlateauFunction f(k);
    ExhaustionValue out;
    out.S = phi_U.S;
    out.value = f.value(phi_U.value);
    const Real slope = f.derivative(phi_U.value);
    out.gradbar.resize(phi_U.gradbar.size());
    for (std::size_t j = 0; j < out.gradbar.size(); ++j) out.gradbar[j] = slope * phi_U.gradbar[j];
    return out;
  }

  ExhaustionValue cutoff_phi(unsigned k, std::span<const Complex> z) const { return apply_plateau(exhaustion(z), k); }

 private:
  ResolutionChart chart_;
  ClampFunction clamp_;
  Polynomial hat_phi_;
  std::vector<Polynomial> hat_phi_dzbar_;
};

/// Wirtinger gradient d value / dzbar_j by fourth-order central differences
/// along x_j and y_j with steps h_j: dzbar = (d/dx + i d/dy) / 2.
template <class Scalar>
std::vector<Complex> finite_difference_gradbar(Scalar&& value, std::span<const Complex> z, std::span<const Real> steps) {
  require(steps.size() == z.size(), "finite_difference_gradbar: one step per coordinate");
  std::vector<Complex> out(z.size());
  std::vector<Complex> w(z.begin(), z.end());
  for (std::size_t j = 0; j < z.size(); ++j) {
    const Real h = steps[j];
    auto at = [&](Complex dir, Real m) {
      w[j] = z[j] + m * h * dir;
      const Real v = value(std::span<const Complex>(w));
      w[j] = z[j];
      return v;
    };
    auto central = [&](Complex dir) {
      return (-at(dir, 2) + 8 * at(dir, 1) - 8 * at(dir, -1) + at(dir, -2)) / (12 * h);
    };
    out[j] = (central({1, 0}) + Complex(0, 1) * central({0, 1})) / Real(2);
  }
  return out;
}

struct GradientCheckRow {
  std::string quantity;  // "F" or "phi_k"
  std::optional<unsigned> k;
  std::size_t points = 0;
  Real max_relative_error = 0;
};

/// Analytic against finite-difference gradients of phi_U (k empty) or of
/// phi_k. Points are log-radial (log v_j uniform, v_j = -log|z_j| up to 700)
/// or uniform, alternately; phi_k points are kept only inside the band
/// k < phi_U < k + 1. Error: max-norm difference over max-norm of the
/// analytic gradient (absolute when that vanishes). Steps follow the local
/// length scale of S: h_j = 1e-6 min(R_j, S / |dS/dzbar_j|), which is
/// 1e-6 |z_j| near a radial zero of S and O(1e-6) where S barely depends on z_j.
inline GradientCheckRow gradient_check(const CutoffFamily& family, std::optional<unsigned> k, std::size_t points,
                                       std::uint64_t seed) {
  const auto& chart = family.chart();
  GradientCheckRow row;
  row.quantity = k ? "phi_" + std::to_string(*k) : "F";
  row.k = k;
  StreamRng rng(seed, k ? 1 + *k : 0);
  auto value = [&](std::span<const Complex> z) {
    const ExhaustionValue v = family.exhaustion(z);
    return k ? PlateauFunction(*k).value(v.value) : v.value;
  };
  const Real v_cap = 700;
  std::size_t attempt = 0;
  const std::size_t max_attempts = 10000 * points;
  while (row.points < points) {
    require(++attempt <= max_attempts, "gradient_check: band " + row.quantity + " not reached by the point sampler");
    std::vector<Complex> z;
    if (attempt % 2 == 1) {
      z = uniform_polydisc_point(rng, chart.radii());
    } else {
      z.resize(chart.n());
      for (std::size_t j = 0; j < chart.n(); ++j) {
        const Real v_min = -std::log(static_cast<Real>(chart.radii()[j]));
        const Real lv = std::log(v_min) + (std::log(v_cap) - std::log(v_min)) * static_cast<Real>(rng.uniform());
        z[j] = std::polar(std::exp(-std::exp(lv)), 2 * std::numbers::pi_v<Real> * static_cast<Real>(rng.uniform()));
      }
    }
    const ExhaustionValue phi_U = family.exhaustion(z);
    if (k && !(phi_U.value > static_cast<Real>(*k) && phi_U.value < static_cast<Real>(*k) + 1)) continue;
    const ExhaustionValue analytic = k ? CutoffFamily::apply_plateau(phi_U, *k) : phi_U;
    const Abs2Sum S = chart.cut().abs2_sum(z);
    std::vector<Real> steps(z.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
      const Real R = chart.radii()[j];
      const Real g = std::abs(S.gradbar[j]);
      steps[j] = 1e-6L * (g > 0 ? std::min(R, S.value / g) : R);
    }
    const auto fd = finite_difference_gradbar(value, z, std::span<const Real>(steps));
    Real diff = 0, scale = 0;
    for (std::size_t j = 0; j < fd.size(); ++j) {
      diff = std::max(diff, std::abs(fd[j] - analytic.gradbar[j]));
      scale = std::max(scale, std::abs(analytic.gradbar[j]));
    }
    row.max_relative_error = std::max(row.max_relative_error, scale > 0 ? diff / scale : diff);
    ++row.points;
  }
  return row;
}

}  // namespace paraboliq
