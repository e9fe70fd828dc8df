#pragma once

// Monte-Carlo quadrature over a polydisc prod {|z_j| <= R_j}.
//
// Two radial modes:
//   uniform     z_j uniform in the disc, weight prod pi R_j^2.
//   log_radial  v_j = -log|z_j| drawn per stratum on the dyadic octave grid
//               [v_min, 1], [1, 2], [2, 4], ..., [2^m, -log floor]; equal
//               samples per stratum (product strata across coordinates).
//               Per-coordinate weight width * 2 pi * rho^2, since
//               dA = rho^2 dv dtheta.
//
// The estimate is the stratified mean sum_s mean_s(w f) with standard error
// sqrt(sum_s var_s / n_s); for uniform mode (one stratum) this is the plain
// sample mean and sd/sqrt(n).
//
// Determinism: sample i belongs to block i / block_size and stratum
// i mod strata; each block draws from its own sub-stream and block
// accumulators are merged in block order, so results are bit-identical for
// any number of workers.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "paraboliq/geometry.hpp"
#include "paraboliq/random.hpp"
#include "paraboliq/types.hpp"

namespace paraboliq {

enum class RadialMode { uniform, log_radial };

inline const char* to_string(RadialMode m) { return m == RadialMode::uniform ? "uniform" : "log_radial"; }

inline RadialMode radial_mode_from_string(const std::string& s) {
  if (s == "uniform") return RadialMode::uniform;
  if (s == "log_radial") return RadialMode::log_radial;
  throw ContractViolation("unknown radial mode '" + s + "' (expected uniform or log_radial)");
}

struct SamplerConfig {
  std::uint64_t seed = 42;
  std::size_t n_samples = 100000;
  std::size_t block_size = 4096;
  RadialMode mode = RadialMode::log_radial;
  double log_radial_floor = 1e-300;
  unsigned workers = 0;  // 0: hardware concurrency. Never changes results.

  void validate(std::span<const double> radii) const {
    require(n_samples >= 1, "SamplerConfig: n_samples must be positive");
    require(block_size >= 1, "SamplerConfig: block_size must be positive");
    if (mode == RadialMode::log_radial) {
      require(log_radial_floor >= 1e-300, "SamplerConfig: log_radial_floor below the 1e-300 guard");
      for (double r : radii)
        require(log_radial_floor < r, "SamplerConfig: log_radial_floor must be below every chart radius");
    }
  }
};

struct IntegralEstimate {
  double estimate = 0;
  double std_error = 0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  RadialMode mode = RadialMode::uniform;
};

/// Truncated tail of the model integral int dV / (|z|^2 log^2 |z|) below the
/// log-radial floor: 2 pi / |log floor|.
inline double model_tail_bound(double floor) { return 2 * std::numbers::pi / std::abs(std::log(floor)); }

class PolydiscSampler {
 public:
  PolydiscSampler(std::span<const double> radii, const SamplerConfig& cfg)
      : radii_(radii.begin(), radii.end()), mode_(cfg.mode) {
    cfg.validate(radii);
    if (mode_ == RadialMode::log_radial) {
      const Real v_max = -std::log(static_cast<Real>(cfg.log_radial_floor));
      for (double r : radii_) {
        const Real v_min = -std::log(static_cast<Real>(r));
        std::vector<Real> b{v_min};
        Real p = 1;
        while (p <= v_min) p *= 2;
        for (; p < v_max; p *= 2) b.push_back(p);
        b.push_back(v_max);
        bounds_.push_back(std::move(b));
      }
    }
    strata_ = 1;
    for (const auto& b : bounds_) strata_ *= b.size() - 1;
    require(cfg.n_samples >= 2 * strata_,
            "SamplerConfig: n_samples must provide at least two samples per stratum (" + std::to_string(strata_) +
                " strata)");
  }

  std::size_t strata() const { return strata_; }
  std::size_t dims() const { return radii_.size(); }

  /// Draw sample i into z; returns its quadrature weight.
  Real draw(std::size_t i, StreamRng& rng, std::vector<Complex>& z) const {
    const std::size_t n = radii_.size();
    z.resize(n);
    Real weight = 1;
    if (mode_ == RadialMode::uniform) {
      for (std::size_t j = 0; j < n; ++j) {
        const Real R = radii_[j];
        const Real rho = R * std::sqrt(static_cast<Real>(rng.uniform_open0()));
        const Real theta = 2 * std::numbers::pi_v<Real> * static_cast<Real>(rng.uniform());
        z[j] = std::polar(rho, theta);
        weight *= std::numbers::pi_v<Real> * R * R;
      }
      return weight;
    }
    std::size_t rem = stratum_of(i);
    for (std::size_t j = 0; j < n; ++j) {
      const auto& b = bounds_[j];
      const std::size_t m = rem % (b.size() - 1);
      rem /= b.size() - 1;
      const Real width = b[m + 1] - b[m];
      const Real v = b[m] + width * static_cast<Real>(rng.uniform());
      const Real rho = std::exp(-v);
      const Real theta = 2 * std::numbers::pi_v<Real> * static_cast<Real>(rng.uniform());
      z[j] = std::polar(rho, theta);
      weight *= width * 2 * std::numbers::pi_v<Real> * rho * rho;
    }
    return weight;
  }

  std::size_t stratum_of(std::size_t i) const { return i % strata_; }

 private:
  std::vector<double> radii_;
  RadialMode mode_;
  std::vector<std::vector<Real>> bounds_;
  std::size_t strata_ = 1;
};

namespace detail {

struct Moments {
  std::size_t count = 0;
  Real mean = 0;
  Real m2 = 0;

  void add(Real x) {
    ++count;
    const Real delta = x - mean;
    mean += delta / static_cast<Real>(count);
    m2 += delta * (x - mean);
  }

  void merge(const Moments& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const Real n = static_cast<Real>(count + o.count);
    const Real delta = o.mean - mean;
    mean += delta * static_cast<Real>(o.count) / n;
    m2 += o.m2 + delta * delta * static_cast<Real>(count) * static_cast<Real>(o.count) / n;
    count += o.count;
  }
};

inline std::string describe_point(std::span<const Complex> z) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (j) os << ", ";
    os << static_cast<double>(z[j].real()) << (z[j].imag() < 0 ? "-" : "+")
       << static_cast<double>(std::abs(z[j].imag())) << "i";
  }
  os << ")";
  return os.str();
}

inline unsigned resolve_workers(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Run body(block) for block in [0, blocks) on a worker pool; rethrows the
/// failure of the lowest-numbered failing block.
template <class Body>
void parallel_blocks(std::size_t blocks, unsigned workers, Body&& body) {
  workers = static_cast<unsigned>(std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(blocks, 1)));
  std::vector<std::exception_ptr> errors(blocks);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto run = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks || failed.load()) return;
      try {
        body(b);
      } catch (...) {
        errors[b] = std::current_exception();
        failed.store(true);
      }
    }
  };
  if (workers <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

/// Integrate several real channels from shared samples. The integrand has
/// signature void(std::span<const Complex> z, std::span<Real> out) and must
/// be safe to call concurrently.
template <class Integrand>
std::vector<IntegralEstimate> integrate_channels(std::size_t channels, Integrand&& f, std::span<const double> radii,
                                                 const SamplerConfig& cfg) {
  require(channels >= 1, "integrate_channels: need at least one channel");
  const PolydiscSampler sampler(radii, cfg);
  const std::size_t T = sampler.strata();
  const std::size_t blocks = (cfg.n_samples + cfg.block_size - 1) / cfg.block_size;
  std::vector<std::vector<detail::Moments>> acc(blocks);

  detail::parallel_blocks(blocks, cfg.workers, [&](std::size_t b) {
    auto& local = acc[b];
    local.assign(T * channels, detail::Moments{});
    StreamRng rng(cfg.seed, b);
    std::vector<Complex> z;
    std::vector<Real> out(channels);
    const std::size_t begin = b * cfg.block_size;
    const std::size_t end = std::min(cfg.n_samples, begin + cfg.block_size);
    for (std::size_t i = begin; i < end; ++i) {
      const Real w = sampler.draw(i, rng, z);
      std::fill(out.begin(), out.end(), Real(0));
      f(std::span<const Complex>(z), std::span<Real>(out));
      const std::size_t s = sampler.stratum_of(i);
      for (std::size_t c = 0; c < channels; ++c) {
        const Real v = w * out[c];
        if (!std::isfinite(v))
          throw PoisonedSampleError("non-finite integrand value at sample " + std::to_string(i) + ", z = " +
                                    detail::describe_point(z));
        local[s * channels + c].add(v);
      }
    }
  });

  std::vector<detail::Moments> total(T * channels);
  for (const auto& block : acc)
    for (std::size_t k = 0; k < total.size(); ++k) total[k].merge(block[k]);

  std::vector<IntegralEstimate> result(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    Real est = 0;
    Real var = 0;
    for (std::size_t s = 0; s < T; ++s) {
      const auto& m = total[s * channels + c];
      est += m.mean;
      if (m.count > 1) var += m.m2 / static_cast<Real>(m.count - 1) / static_cast<Real>(m.count);
    }
    result[c] = IntegralEstimate{static_cast<double>(est), static_cast<double>(std::sqrt(var)), cfg.n_samples,
                                 cfg.seed, cfg.mode};
  }
  return result;
}

using ScalarIntegrand = std::function<Real(std::span<const Complex>)>;

/// Estimate of int_polydisc f dV_{C^n}.
inline IntegralEstimate mc_integrate(const ScalarIntegrand& f, const ResolutionChart& chart, const SamplerConfig& cfg) {
  auto est = integrate_channels(
      1, [&](std::span<const Complex> z, std::span<Real> out) { out[0] = f(z); }, chart.radii(), cfg);
  return est.front();
}

struct DoublingReport {
  std::vector<IntegralEstimate> levels;
  std::vector<double> relative_change;  // between level l and l+1
  std::vector<bool> unstable;           // change > max(3 combined stderr, 2%)

  bool stable() const { return std::none_of(unstable.begin(), unstable.end(), [](bool b) { return b; }); }
  double top_relative_change() const { return relative_change.empty() ? 0.0 : relative_change.back(); }
};

inline DoublingReport doubling_report(std::vector<IntegralEstimate> levels) {
  DoublingReport rep;
  rep.levels = std::move(levels);
  for (std::size_t l = 0; l + 1 < rep.levels.size(); ++l) {
    const auto& a = rep.levels[l];
    const auto& b = rep.levels[l + 1];
    const double diff = std::abs(b.estimate - a.estimate);
    const double scale = std::max(std::abs(b.estimate), std::abs(a.estimate));
    rep.relative_change.push_back(scale > 0 ? diff / scale : 0.0);
    const double combined = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    rep.unstable.push_back(diff > std::max(3 * combined, 0.02 * scale));
  }
  return rep;
}

/// Estimates at n, 2n, ..., 2^{levels-1} n samples from the same seed.
inline DoublingReport doubling_check(const ScalarIntegrand& f, const ResolutionChart& chart, const SamplerConfig& cfg,
                                     unsigned levels) {
  require(levels >= 2, "doubling_check: levels must be >= 2");
  std::vector<IntegralEstimate> out;
  SamplerConfig c = cfg;
  for (unsigned l = 0; l < levels; ++l) {
    c.n_samples = cfg.n_samples << l;
    out.push_back(mc_integrate(f, chart, c));
  }
  return doubling_report(std::move(out));
}

}  // namespace paraboliq
