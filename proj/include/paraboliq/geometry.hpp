#pragma once

// Local model of a resolution chart pi: D -> X in C^N. The pulled-back
// metric gamma = pi^* <.,.> is represented by the Gram matrix
// H = Jac(pi)^H Jac(pi). Energy integrands are formed against the adjugate
// H# so that det H, the density of dV_gamma, cancels symbolically:
// |xi|^2_gamma det H = xi^H H# xi. Nothing here divides by det H.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "paraboliq/polynomial.hpp"
#include "paraboliq/random.hpp"
#include "paraboliq/types.hpp"

namespace paraboliq {

using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
using CVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

/// Declared factorization pi^*|f|^2 = |z_1|^{2k_1} ... |z_n|^{2k_n} g with g
/// non-vanishing. Used only for diagnostics; zeros are allowed in k.
struct MonomialDeclaration {
  std::vector<unsigned> k;
};

class ResolutionChart {
 public:
  ResolutionChart(std::string name, std::size_t n, std::size_t N, std::vector<double> radii,
                  std::vector<Polynomial> pi, std::vector<Polynomial> cut_pullbacks,
                  std::optional<MonomialDeclaration> monomial = std::nullopt)
      : name_(std::move(name)), n_(n), N_(N), radii_(std::move(radii)), monomial_(std::move(monomial)) {
    require(n_ >= 1, "ResolutionChart: n must be positive");
    require(N_ >= n_, "ResolutionChart: ambient dimension N must be >= n");
    if (radii_.empty()) radii_.assign(n_, 0.5);
    require(radii_.size() == n_, "ResolutionChart: need one radius per chart variable");
    for (double r : radii_) require(r > 0 && std::isfinite(r), "ResolutionChart: radii must be positive");
    require(pi.size() == N_, "ResolutionChart: pi must have N components");
    require(!cut_pullbacks.empty(), "ResolutionChart: at least one cut-out function is required");
    for (const auto& p : pi) require(p.num_vars() == n_, "ResolutionChart: pi component has wrong num_vars");
    for (const auto& p : cut_pullbacks)
      require(p.num_vars() == n_, "ResolutionChart: cut_pullback has wrong num_vars");
    if (monomial_) require(monomial_->k.size() <= n_, "ResolutionChart: monomial exponent list longer than n");
    map_ = DifferentiatedTuple(std::move(pi), n_);
    cut_ = DifferentiatedTuple(std::move(cut_pullbacks), n_);
  }

  const std::string& name() const { return name_; }
  std::size_t n() const { return n_; }
  std::size_t N() const { return N_; }
  const std::vector<double>& radii() const { return radii_; }
  std::span<const Polynomial> pi() const { return map_.components(); }
  std::span<const Polynomial> cut_pullbacks() const { return cut_.components(); }
  const std::optional<MonomialDeclaration>& monomial() const { return monomial_; }
  const DifferentiatedTuple& map() const { return map_; }
  const DifferentiatedTuple& cut() const { return cut_; }

  bool contains(std::span<const Complex> z) const {
    if (z.size() != n_) return false;
    for (std::size_t j = 0; j < n_; ++j)
      if (!(std::abs(z[j]) <= static_cast<Real>(radii_[j]) * (1 + 1e-12L))) return false;
    return true;
  }

  void require_inside(std::span<const Complex> z) const {
    require(z.size() == n_, "ResolutionChart: point has wrong dimension");
    if (!contains(z)) {
      std::ostringstream os;
      os << "point outside the closed polydisc of chart '" << name_ << "'";
      throw DomainError(os.str());
    }
  }

  /// Same chart on the polydisc with every radius multiplied by factor.
  ResolutionChart restricted(double factor) const {
    require(factor > 0, "ResolutionChart::restricted: factor must be positive");
    auto r = radii_;
    for (auto& x : r) x *= factor;
    return ResolutionChart(name_, n_, N_, std::move(r), std::vector<Polynomial>(pi().begin(), pi().end()),
                           std::vector<Polynomial>(cut_pullbacks().begin(), cut_pullbacks().end()), monomial_);
  }

 private:
  std::string name_;
  std::size_t n_;
  std::size_t N_;
  std::vector<double> radii_;
  std::optional<MonomialDeclaration> monomial_;
  DifferentiatedTuple map_;
  DifferentiatedTuple cut_;
};

struct GramSample {
  CVector z;
  CMatrix J;       // N x n
  CMatrix H;       // n x n, J^H J
  Real detH = 0;   // >= 0
  CMatrix Hsharp;  // adjugate of H
};

/// Entry (j,k) = d pi_j / d z_k at z.
inline CMatrix jacobian(const ResolutionChart& chart, std::span<const Complex> z) {
  chart.require_inside(z);
  const auto& map = chart.map();
  CMatrix J(chart.N(), chart.n());
  for (std::size_t j = 0; j < chart.N(); ++j)
    for (std::size_t k = 0; k < chart.n(); ++k) J(j, k) = map.partial(j, k).eval(z);
  return J;
}

namespace detail {

inline CMatrix minor_of(const CMatrix& A, Eigen::Index row, Eigen::Index col) {
  const Eigen::Index n = A.rows();
  CMatrix M(n - 1, n - 1);
  for (Eigen::Index i = 0, mi = 0; i < n; ++i) {
    if (i == row) continue;
    for (Eigen::Index j = 0, mj = 0; j < n; ++j) {
      if (j == col) continue;
      M(mi, mj++) = A(i, j);
    }
    ++mi;
  }
  return M;
}

}  // namespace detail

/// Determinant by explicit formulas for n <= 3, Laplace expansion beyond.
inline Complex determinant(const CMatrix& A) {
  require(A.rows() == A.cols(), "determinant: matrix must be square");
  const Eigen::Index n = A.rows();
  switch (n) {
    case 0: return Complex(1);
    case 1: return A(0, 0);
    case 2: return A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    case 3:
      return A(0, 0) * (A(1, 1) * A(2, 2) - A(1, 2) * A(2, 1)) - A(0, 1) * (A(1, 0) * A(2, 2) - A(1, 2) * A(2, 0)) +
             A(0, 2) * (A(1, 0) * A(2, 1) - A(1, 1) * A(2, 0));
    default: {
      Complex d{};
      for (Eigen::Index j = 0; j < n; ++j) {
        const Complex c = determinant(detail::minor_of(A, 0, j));
        d += (j % 2 == 0 ? A(0, j) : -A(0, j)) * c;
      }
      return d;
    }
  }
}

/// Transposed cofactor matrix: A * adjugate(A) = det(A) * I.
inline CMatrix adjugate(const CMatrix& A) {
  require(A.rows() == A.cols(), "adjugate: matrix must be square");
  const Eigen::Index n = A.rows();
  CMatrix adj(n, n);
  if (n == 1) {
    adj(0, 0) = Complex(1);
    return adj;
  }
  if (n == 2) {
    adj << A(1, 1), -A(0, 1), -A(1, 0), A(0, 0);
    return adj;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const Complex c = determinant(detail::minor_of(A, i, j));
      adj(j, i) = ((i + j) % 2 == 0) ? c : -c;
    }
  return adj;
}

inline GramSample gram(const ResolutionChart& chart, std::span<const Complex> z) {
  GramSample g;
  g.J = jacobian(chart, z);
  g.z = Eigen::Map<const CVector>(z.data(), static_cast<Eigen::Index>(z.size()));
  g.H = g.J.adjoint() * g.J;
  // H is Hermitian by construction; symmetrize away rounding in the diagonal.
  for (Eigen::Index i = 0; i < g.H.rows(); ++i) g.H(i, i) = Complex(g.H(i, i).real(), 0);
  const Real d = determinant(g.H).real();
  g.detH = std::max<Real>(d, 0);
  g.Hsharp = adjugate(g.H);
  return g;
}

namespace detail {

inline Real guarded_nonnegative(Real v, Real scale) {
  if (v >= 0) return v;
  if (v >= -1e-10L * scale) return 0;
  throw std::logic_error("cometric density is negative beyond rounding: adjugate is not positive semidefinite");
}

}  // namespace detail

/// xi^H H# xi for an antiholomorphic covector sum_j xi_j dzbar_j. Equals
/// |xi|^2_gamma * det H with |dzbar_mu|^2_gamma = H^{mu mu}.
inline Real cometric_energy_density(const GramSample& s, std::span<const Complex> xi) {
  const auto n = static_cast<std::size_t>(s.Hsharp.rows());
  require(xi.size() == n, "cometric_energy_density: covector has wrong length");
  Complex acc{};
  Real scale = 0;
  for (std::size_t j = 0; j < n; ++j) {
    Complex row{};
    for (std::size_t k = 0; k < n; ++k) row += s.Hsharp(j, k) * xi[k];
    acc += std::conj(xi[j]) * row;
    scale += std::norm(xi[j]) * std::abs(s.Hsharp(j, j));
  }
  return detail::guarded_nonnegative(acc.real(), scale);
}

/// Same for a holomorphic covector sum_j xi_j dz_j: xi^T H# conj(xi).
inline Real holomorphic_cometric_density(const GramSample& s, std::span<const Complex> xi) {
  const auto n = static_cast<std::size_t>(s.Hsharp.rows());
  require(xi.size() == n, "holomorphic_cometric_density: covector has wrong length");
  Complex acc{};
  Real scale = 0;
  for (std::size_t j = 0; j < n; ++j) {
    Complex row{};
    for (std::size_t k = 0; k < n; ++k) row += s.Hsharp(j, k) * std::conj(xi[k]);
    acc += xi[j] * row;
    scale += std::norm(xi[j]) * std::abs(s.Hsharp(j, j));
  }
  return detail::guarded_nonnegative(acc.real(), scale);
}

struct Lemma21Result {
  std::vector<Real> maxima;                     // max of H#_{mu mu} per mu
  std::vector<std::vector<Complex>> witnesses;  // argmax points
  std::size_t grid_density = 0;
  std::size_t points = 0;
};

/// Maximum of the adjugate diagonal over a polar tensor grid: per complex
/// coordinate, grid_density radii in [0, R_j] times grid_density angles.
inline Lemma21Result lemma21_check(const ResolutionChart& chart, std::size_t grid_density) {
  require(grid_density >= 2, "lemma21_check: grid_density must be >= 2");
  const std::size_t n = chart.n();
  const std::size_t d = grid_density;
  const std::size_t per_coord = d * d;
  std::size_t total = 1;
  for (std::size_t j = 0; j < n; ++j) total *= per_coord;

  Lemma21Result out;
  out.grid_density = d;
  out.points = total;
  out.maxima.assign(n, -std::numeric_limits<Real>::infinity());
  out.witnesses.assign(n, std::vector<Complex>(n));

  std::vector<Complex> z(n);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t c = rem % per_coord;
      rem /= per_coord;
      const Real rho = static_cast<Real>(chart.radii()[j]) * static_cast<Real>(c / d) / static_cast<Real>(d - 1);
      const Real theta = 2 * std::numbers::pi_v<Real> * static_cast<Real>(c % d) / static_cast<Real>(d);
      z[j] = std::polar(rho, theta);
    }
    const GramSample g = gram(chart, z);
    for (std::size_t mu = 0; mu < n; ++mu) {
      const Real v = g.Hsharp(mu, mu).real();
      if (!std::isfinite(v)) throw PoisonedSampleError("lemma21_check: non-finite adjugate entry");
      if (v > out.maxima[mu]) {
        out.maxima[mu] = v;
        out.witnesses[mu] = z;
      }
    }
  }
  return out;
}

struct ProbabilisticCheck {
  std::size_t samples = 0;
  std::size_t passing = 0;
  double threshold = 0.999;

  double fraction() const { return samples == 0 ? 0.0 : static_cast<double>(passing) / static_cast<double>(samples); }
  bool pass() const { return fraction() >= threshold; }
};

/// Fraction of uniform chart points with S > 0 (common zero set is thin).
inline ProbabilisticCheck check_thin_zero_set(const ResolutionChart& chart, std::size_t samples = 10000,
                                              std::uint64_t seed = 1) {
  StreamRng rng(seed, 0);
  ProbabilisticCheck out;
  out.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto z = uniform_polydisc_point(rng, chart.radii());
    if (chart.cut().abs2_sum(z).value > 0) ++out.passing;
  }
  return out;
}

/// Fraction of uniform chart points with det H > 0.
inline ProbabilisticCheck check_generic_nondegeneracy(const ResolutionChart& chart, std::size_t samples = 10000,
                                                      std::uint64_t seed = 2) {
  StreamRng rng(seed, 0);
  ProbabilisticCheck out;
  out.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    const auto z = uniform_polydisc_point(rng, chart.radii());
    if (gram(chart, z).detH > 0) ++out.passing;
  }
  return out;
}

struct MonomialDiagnostic {
  Real min_ratio = 0;
  Real max_ratio = 0;
  std::size_t samples = 0;
  bool pass = false;
};

/// Range of S / prod |z_j|^{2k_j} over uniform points with every |z_j| > 1e-3.
/// Passes when the range lies inside [1e-3, 1e3].
inline MonomialDiagnostic monomial_diagnostic(const ResolutionChart& chart, std::size_t samples = 100000,
                                              std::uint64_t seed = 3) {
  require(chart.monomial().has_value(), "monomial_diagnostic: chart declares no monomial");
  const auto& k = chart.monomial()->k;
  StreamRng rng(seed, 0);
  MonomialDiagnostic out;
  out.min_ratio = std::numeric_limits<Real>::infinity();
  out.max_ratio = 0;
  while (out.samples < samples) {
    const auto z = uniform_polydisc_point(rng, chart.radii());
    bool ok = true;
    for (const auto& zj : z) ok = ok && std::abs(zj) > 1e-3L;
    if (!ok) continue;
    Real mono = 1;
    for (std::size_t j = 0; j < k.size(); ++j) mono *= std::pow(std::norm(z[j]), static_cast<Real>(k[j]));
    const Real ratio = chart.cut().abs2_sum(z).value / mono;
    out.min_ratio = std::min(out.min_ratio, ratio);
    out.max_ratio = std::max(out.max_ratio, ratio);
    ++out.samples;
  }
  out.pass = out.min_ratio >= 1e-3L && out.max_ratio <= 1e3L;
  return out;
}

}  // namespace paraboliq
