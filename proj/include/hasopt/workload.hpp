#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hasopt/domain.hpp"
#include "hasopt/rng.hpp"

namespace hasopt {

// Second-order statistics helpers. Population formulas throughout; the
// generators pin their targets with the same estimators the tests use.
namespace stats {

inline double mean(const std::vector<double>& v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

inline double stddev(const std::vector<double>& v) {
  const double m = mean(v);
  long double s = 0.0L;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(static_cast<double>(s / static_cast<long double>(v.size())));
}

inline double coefficient_of_variation(const std::vector<double>& v) {
  const double m = mean(v);
  return m == 0.0 ? 0.0 : stddev(v) / m;
}

inline double lag1_autocorrelation(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  long double num = 0.0L, den = 0.0L;
  for (std::size_t t = 0; t < v.size(); ++t) {
    den += (v[t] - m) * (v[t] - m);
    if (t + 1 < v.size()) num += (v[t] - m) * (v[t + 1] - m);
  }
  return den == 0.0L ? 0.0 : static_cast<double>(num / den);
}

}  // namespace stats

struct TraceSpec {
  double mean_rate_Bps = 83750.0; // 0.67 Mbit/s
  double cv = 0.38;
  double ac1 = 0.80;
  std::uint32_t duration_s = 720;
  std::uint64_t seed = 1;
};

struct VideoSpec {
  std::uint32_t n_segments = 200;
  std::vector<double> level_rates_Bps = {12500.0, 28750.0, 45000.0, 85000.0, 166250.0};
  double burstiness = 0.5;
  std::uint64_t seed = 1;
};

namespace detail {

// Stationary AR(1) in log space driven by a fixed innovation vector;
// exponentiation keeps samples positive. sigma_sq is the stationary log
// variance, phi the AR coefficient.
inline std::vector<double> lognormal_ar1(const std::vector<double>& innovations, double phi,
                                         double sigma_sq) {
  const double sigma = std::sqrt(sigma_sq);
  std::vector<double> g(innovations.size());
  double x = sigma * innovations[0];
  g[0] = std::exp(x);
  const double noise_scale = sigma * std::sqrt(std::max(0.0, 1.0 - phi * phi));
  for (std::size_t t = 1; t < innovations.size(); ++t) {
    x = phi * x + noise_scale * innovations[t];
    g[t] = std::exp(x);
  }
  return g;
}

}  // namespace detail

// Synthetic goodput trace with pinned sample statistics. The mean and CV are
// matched exactly by an affine rescale of the realized sequence (affine maps
// preserve Pearson autocorrelation); the lag-1 autocorrelation is matched by
// bisecting the AR coefficient against the same innovation vector.
inline ThroughputTrace generate_trace(const TraceSpec& spec) {
  if (spec.mean_rate_Bps <= 0.0) throw std::invalid_argument("trace spec: mean rate must be > 0");
  if (spec.cv < 0.0) throw std::invalid_argument("trace spec: cv must be >= 0");
  if (spec.ac1 < 0.0 || spec.ac1 >= 1.0) throw std::invalid_argument("trace spec: ac1 in [0,1)");
  if (spec.duration_s < 1) throw std::invalid_argument("trace spec: duration must be >= 1 s");
  if (spec.cv == 0.0 && spec.ac1 > 0.0)
    throw std::invalid_argument("trace spec: a constant trace (cv = 0) cannot carry autocorrelation");

  if (spec.cv == 0.0 || spec.duration_s == 1)
    return ThroughputTrace(std::vector<double>(spec.duration_s, spec.mean_rate_Bps));

  SplitMix64 rng(spec.seed);
  std::vector<double> innovations(spec.duration_s);
  for (double& e : innovations) e = rng.next_normal();

  const double sigma_sq = std::log(1.0 + spec.cv * spec.cv);
  const auto realized_ac1 = [&](double phi) {
    return stats::lag1_autocorrelation(detail::lognormal_ar1(innovations, phi, sigma_sq));
  };

  double lo = -0.35, hi = 0.995;
  double phi;
  if (realized_ac1(lo) >= spec.ac1) {
    phi = lo;
  } else if (realized_ac1(hi) <= spec.ac1) {
    phi = hi;
  } else {
    for (int iter = 0; iter < 60; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (realized_ac1(mid) < spec.ac1 ? lo : hi) = mid;
    }
    phi = 0.5 * (lo + hi);
  }

  std::vector<double> g = detail::lognormal_ar1(innovations, phi, sigma_sq);
  const double g_mean = stats::mean(g);
  const double g_std = stats::stddev(g);
  const double scale = g_std > 0.0 ? spec.cv * spec.mean_rate_Bps / g_std : 0.0;
  const double shift = spec.mean_rate_Bps - scale * g_mean;
  for (double& x : g) x = std::max(0.0, scale * x + shift);
  return ThroughputTrace(std::move(g));
}

// Synthetic manifest with a shared piecewise-constant "scene" modulation:
// low-motion dips hit every level at once. Segment duration is fixed at 1 s,
// matching the segmentation the level rates are stated for.
inline Video generate_video(const VideoSpec& spec) {
  if (spec.n_segments < 1) throw std::invalid_argument("video spec: need at least one segment");
  if (spec.level_rates_Bps.empty()) throw std::invalid_argument("video spec: no level rates");
  for (std::size_t j = 0; j < spec.level_rates_Bps.size(); ++j) {
    if (spec.level_rates_Bps[j] <= 0.0)
      throw std::invalid_argument("video spec: level rates must be > 0");
    if (j > 0 && spec.level_rates_Bps[j] <= spec.level_rates_Bps[j - 1])
      throw std::invalid_argument("video spec: level rates must be strictly increasing");
  }
  if (spec.burstiness < 0.0) throw std::invalid_argument("video spec: burstiness must be >= 0");

  constexpr double kSegmentDurationS = 1.0;
  constexpr double kMeanSceneLengthSegments = 15.0;

  SplitMix64 rng(spec.seed);
  const double lo = std::max(0.0, 1.0 - spec.burstiness);
  const double hi = 1.0 + spec.burstiness;

  std::vector<double> modulation(spec.n_segments);
  std::size_t i = 0;
  while (i < spec.n_segments) {
    const double factor = rng.next_uniform(lo, hi);
    // Geometric scene length, mean kMeanSceneLengthSegments.
    const double u = rng.next_unit_pos();
    const auto scene_len = static_cast<std::size_t>(
        1.0 + std::floor(std::log(u) / std::log(1.0 - 1.0 / kMeanSceneLengthSegments)));
    for (std::size_t k = 0; k < scene_len && i < spec.n_segments; ++k) modulation[i++] = factor;
  }

  // Normalize so every level's manifest-average rate equals its nominal rate
  // exactly (up to byte rounding).
  const double mod_mean = stats::mean(modulation);
  if (mod_mean > 0.0)
    for (double& m : modulation) m /= mod_mean;

  const std::size_t r = spec.level_rates_Bps.size();
  std::vector<Bytes> sizes(static_cast<std::size_t>(spec.n_segments) * r);
  for (std::size_t seg = 0; seg < spec.n_segments; ++seg) {
    for (std::size_t j = 0; j < r; ++j) {
      const double bytes = spec.level_rates_Bps[j] * kSegmentDurationS * modulation[seg];
      sizes[seg * r + j] = static_cast<Bytes>(std::llround(bytes));
    }
    for (std::size_t j = 1; j < r; ++j)
      sizes[seg * r + j] = std::max(sizes[seg * r + j], sizes[seg * r + j - 1]);
  }
  return Video(kSegmentDurationS, r, std::move(sizes), spec.level_rates_Bps);
}

}  // namespace hasopt
