#pragma once

// Sparse multivariate polynomials with complex coefficients.
//
// Terms are kept in canonical form: sorted lexicographically by exponent
// vector, no duplicate exponents, no exact-zero coefficients. Variable
// indices are 0-based throughout.

#include <algorithm>
#include <complex>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "paraboliq/types.hpp"

namespace paraboliq {

using Exponents = std::vector<unsigned>;

struct Term {
  Exponents exps;
  std::complex<double> coeff;

  friend bool operator==(const Term&, const Term&) = default;
};

class Polynomial {
 public:
  explicit Polynomial(std::size_t num_vars = 1) : num_vars_(num_vars) {
    require(num_vars >= 1, "Polynomial: num_vars must be positive");
  }

  Polynomial(std::size_t num_vars, std::vector<Term> terms) : Polynomial(num_vars) {
    std::map<Exponents, std::complex<double>> merged;
    for (auto& t : terms) {
      require(t.exps.size() == num_vars_, "Polynomial: exponent vector length differs from num_vars");
      merged[t.exps] += t.coeff;
    }
    assign(merged);
  }

  static Polynomial constant(std::size_t num_vars, std::complex<double> c) {
    return Polynomial(num_vars, {Term{Exponents(num_vars, 0u), c}});
  }

  static Polynomial variable(std::size_t num_vars, std::size_t j) {
    require(j < num_vars, "Polynomial::variable: index out of range");
    Exponents e(num_vars, 0u);
    e[j] = 1;
    return Polynomial(num_vars, {Term{std::move(e), 1.0}});
  }

  /// Monomial coeff * prod z_j^{exps_j}.
  static Polynomial monomial(Exponents exps, std::complex<double> coeff = 1.0) {
    const std::size_t n = exps.size();
    return Polynomial(n, {Term{std::move(exps), coeff}});
  }

  std::size_t num_vars() const { return num_vars_; }
  std::span<const Term> terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  unsigned degree() const {
    unsigned d = 0;
    for (const auto& t : terms_) {
      unsigned s = 0;
      for (unsigned e : t.exps) s += e;
      d = std::max(d, s);
    }
    return d;
  }

  /// Sum of coeff * prod z_j^{e_j}, accumulated in canonical term order.
  template <class T>
  std::complex<T> eval(std::span<const std::complex<T>> z) const {
    require(z.size() == num_vars_, "Polynomial::eval: dimension mismatch");
    if (terms_.empty()) return {};
    // power table: powers[j][e] = z_j^e
    std::vector<std::vector<std::complex<T>>> powers(num_vars_);
    for (std::size_t j = 0; j < num_vars_; ++j) {
      unsigned max_e = 0;
      for (const auto& t : terms_) max_e = std::max(max_e, t.exps[j]);
      auto& row = powers[j];
      row.resize(max_e + 1);
      row[0] = std::complex<T>(1);
      for (unsigned e = 1; e <= max_e; ++e) row[e] = row[e - 1] * z[j];
    }
    std::complex<T> sum{};
    for (const auto& t : terms_) {
      std::complex<T> m(static_cast<T>(t.coeff.real()), static_cast<T>(t.coeff.imag()));
      for (std::size_t j = 0; j < num_vars_; ++j)
        if (t.exps[j] != 0) m *= powers[j][t.exps[j]];
      sum += m;
    }
    return sum;
  }

  template <class T>
  std::complex<T> eval(const std::vector<std::complex<T>>& z) const {
    return eval(std::span<const std::complex<T>>(z));
  }

  /// Formal partial derivative d/dz_j.
  Polynomial derivative(std::size_t j) const {
    require(j < num_vars_, "Polynomial::derivative: variable index out of range");
    std::vector<Term> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) {
      if (t.exps[j] == 0) continue;
      Term d = t;
      d.coeff *= static_cast<double>(t.exps[j]);
      --d.exps[j];
      out.push_back(std::move(d));
    }
    return Polynomial(num_vars_, std::move(out));
  }

  Polynomial& operator+=(const Polynomial& other) {
    require(other.num_vars_ == num_vars_, "Polynomial: num_vars mismatch in addition");
    std::map<Exponents, std::complex<double>> merged;
    for (const auto& t : terms_) merged[t.exps] += t.coeff;
    for (const auto& t : other.terms_) merged[t.exps] += t.coeff;
    assign(merged);
    return *this;
  }

  Polynomial& operator-=(const Polynomial& other) { return *this += other * std::complex<double>(-1.0); }

  Polynomial& operator*=(const Polynomial& other) {
    require(other.num_vars_ == num_vars_, "Polynomial: num_vars mismatch in product");
    std::map<Exponents, std::complex<double>> merged;
    for (const auto& a : terms_) {
      for (const auto& b : other.terms_) {
        Exponents e(num_vars_);
        for (std::size_t j = 0; j < num_vars_; ++j) e[j] = a.exps[j] + b.exps[j];
        merged[e] += a.coeff * b.coeff;
      }
    }
    assign(merged);
    return *this;
  }

  Polynomial& operator*=(std::complex<double> c) {
    std::vector<Term> out = terms_;
    for (auto& t : out) t.coeff *= c;
    *this = Polynomial(num_vars_, std::move(out));
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Polynomial& b) { return a *= b; }
  friend Polynomial operator*(Polynomial a, std::complex<double> c) { return a *= c; }
  friend Polynomial operator*(std::complex<double> c, Polynomial a) { return a *= c; }

  Polynomial pow(unsigned e) const {
    Polynomial result = constant(num_vars_, 1.0);
    Polynomial base = *this;
    while (e != 0) {
      if (e & 1u) result *= base;
      e >>= 1;
      if (e != 0) base *= base;
    }
    return result;
  }

  /// p(q_0(x), ..., q_{n-1}(x)); all q share one variable count.
  Polynomial compose(std::span<const Polynomial> q) const {
    require(q.size() == num_vars_, "Polynomial::compose: need one substitute per variable");
    const std::size_t m = q.empty() ? 1 : q.front().num_vars();
    for (const auto& qi : q) require(qi.num_vars() == m, "Polynomial::compose: substitutes disagree on num_vars");
    Polynomial result(m);
    for (const auto& t : terms_) {
      Polynomial mono = constant(m, t.coeff);
      for (std::size_t j = 0; j < num_vars_; ++j)
        if (t.exps[j] != 0) mono *= q[j].pow(t.exps[j]);
      result += mono;
    }
    return result;
  }

  /// Max coefficient-wise distance between canonical forms.
  friend double max_coeff_distance(const Polynomial& a, const Polynomial& b) {
    require(a.num_vars_ == b.num_vars_, "Polynomial: num_vars mismatch");
    std::map<Exponents, std::complex<double>> diff;
    for (const auto& t : a.terms_) diff[t.exps] += t.coeff;
    for (const auto& t : b.terms_) diff[t.exps] -= t.coeff;
    double m = 0.0;
    for (const auto& [e, c] : diff) m = std::max(m, std::abs(c));
    return m;
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  void assign(const std::map<Exponents, std::complex<double>>& merged) {
    terms_.clear();
    terms_.reserve(merged.size());
    for (const auto& [e, c] : merged)
      if (c != std::complex<double>(0.0, 0.0)) terms_.push_back(Term{e, c});
  }

  std::size_t num_vars_;
  std::vector<Term> terms_;
};

/// Wirtinger d/dz_j of a holomorphic polynomial (d/dzbar_j of it is zero).
inline Polynomial wirtinger_dz(const Polynomial& p, std::size_t j) { return p.derivative(j); }

/// Evaluate a polynomial written in the doubled variables (z, conj z).
template <class T>
std::complex<T> eval_doubled(const Polynomial& p, std::span<const std::complex<T>> z) {
  require(p.num_vars() == 2 * z.size(), "eval_doubled: polynomial must have 2n variables");
  std::vector<std::complex<T>> zz(z.begin(), z.end());
  for (const auto& zi : z) zz.push_back(std::conj(zi));
  return p.eval(std::span<const std::complex<T>>(zz));
}

struct Abs2Sum {
  Real value = 0;              // S = sum |f_k|^2
  std::vector<Complex> gradbar;  // dS/dzbar_j = sum f_k conj(df_k/dz_j)
};

/// A tuple (f_1..f_m) with its first derivatives precomputed.
class DifferentiatedTuple {
 public:
  DifferentiatedTuple() = default;
  DifferentiatedTuple(std::vector<Polynomial> f, std::size_t num_vars) : f_(std::move(f)), n_(num_vars) {
    for (const auto& fk : f_) {
      require(fk.num_vars() == n_, "DifferentiatedTuple: dimension mismatch");
      std::vector<Polynomial> row;
      for (std::size_t j = 0; j < n_; ++j) row.push_back(fk.derivative(j));
      df_.push_back(std::move(row));
    }
  }

  std::size_t size() const { return f_.size(); }
  std::size_t num_vars() const { return n_; }
  const Polynomial& component(std::size_t k) const { return f_[k]; }
  const Polynomial& partial(std::size_t k, std::size_t j) const { return df_[k][j]; }
  std::span<const Polynomial> components() const { return f_; }

  Abs2Sum abs2_sum(std::span<const Complex> z) const {
    require(z.size() == n_, "abs2_sum: dimension mismatch");
    Abs2Sum out;
    out.gradbar.assign(n_, Complex{});
    for (std::size_t k = 0; k < f_.size(); ++k) {
      const Complex v = f_[k].eval(z);
      out.value += std::norm(v);
      for (std::size_t j = 0; j < n_; ++j) out.gradbar[j] += v * std::conj(df_[k][j].eval(z));
    }
    return out;
  }

 private:
  std::vector<Polynomial> f_;
  std::vector<std::vector<Polynomial>> df_;
  std::size_t n_ = 0;
};

/// S = sum_k |f_k(z)|^2 together with its antiholomorphic gradient.
inline Abs2Sum abs2_sum(std::span<const Polynomial> f, std::span<const Complex> z) {
  return DifferentiatedTuple(std::vector<Polynomial>(f.begin(), f.end()), z.size()).abs2_sum(z);
}

}  // namespace paraboliq
