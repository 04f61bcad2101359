#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hasopt {

using Bytes = std::uint64_t;

// Segmented video manifest: n segments, r quality levels, byte size of every
// (segment, level) pair. Levels are 1-based (1 = lowest, r = highest) and a
// higher level is never smaller for the same segment.
class Video {
public:
  Video(double segment_duration_s, std::size_t num_levels,
        std::vector<Bytes> sizes_row_major, std::vector<double> level_nominal_rates_Bps = {})
      : segment_duration_s_(segment_duration_s),
        num_levels_(num_levels),
        sizes_(std::move(sizes_row_major)),
        level_rates_(std::move(level_nominal_rates_Bps)) {
    if (segment_duration_s_ <= 0.0 || !std::isfinite(segment_duration_s_))
      throw std::invalid_argument("Video: segment duration must be positive");
    if (num_levels_ < 1) throw std::invalid_argument("Video: need at least one level");
    if (sizes_.empty() || sizes_.size() % num_levels_ != 0)
      throw std::invalid_argument("Video: size matrix must be n x r with n >= 1");
    num_segments_ = sizes_.size() / num_levels_;
    for (std::size_t i = 0; i < num_segments_; ++i)
      for (std::size_t j = 1; j < num_levels_; ++j)
        if (sizes_[i * num_levels_ + j] < sizes_[i * num_levels_ + j - 1])
          throw std::invalid_argument("Video: sizes must be non-decreasing in level at segment " +
                                      std::to_string(i + 1));
    if (level_rates_.empty()) {
      // Metadata only: fall back to the manifest average when not provided.
      level_rates_.resize(num_levels_, 0.0);
      for (std::size_t j = 0; j < num_levels_; ++j) {
        long double total = 0.0L;
        for (std::size_t i = 0; i < num_segments_; ++i) total += sizes_[i * num_levels_ + j];
        level_rates_[j] =
            static_cast<double>(total / num_segments_) / segment_duration_s_;
      }
    } else if (level_rates_.size() != num_levels_) {
      throw std::invalid_argument("Video: nominal rate list must have one entry per level");
    }
  }

  std::size_t num_segments() const { return num_segments_; }
  std::size_t num_levels() const { return num_levels_; }
  double segment_duration_s() const { return segment_duration_s_; }
  double duration_s() const { return segment_duration_s_ * static_cast<double>(num_segments_); }

  // segment is 0-based, level is 1-based.
  Bytes size_bytes(std::size_t segment, int level) const {
    return sizes_[segment * num_levels_ + static_cast<std::size_t>(level - 1)];
  }
  const std::vector<Bytes>& sizes_row_major() const { return sizes_; }
  const std::vector<double>& level_nominal_rates_Bps() const { return level_rates_; }

private:
  double segment_duration_s_;
  std::size_t num_segments_ = 0;
  std::size_t num_levels_;
  std::vector<Bytes> sizes_;
  std::vector<double> level_rates_;
};

// 1 Hz goodput samples in bytes/second; sample k covers [k, k+1) of trace
// time. Queries wrap around the trace end.
class ThroughputTrace {
public:
  explicit ThroughputTrace(std::vector<double> samples_Bps) : samples_(std::move(samples_Bps)) {
    if (samples_.empty()) throw std::invalid_argument("ThroughputTrace: empty");
    bool any_positive = false;
    for (double g : samples_) {
      if (!(g >= 0.0) || !std::isfinite(g))
        throw std::invalid_argument("ThroughputTrace: samples must be finite and >= 0");
      any_positive |= g > 0.0;
    }
    if (!any_positive) throw std::invalid_argument("ThroughputTrace: all samples are zero");
    prefix_.resize(samples_.size() + 1, 0.0);
    for (std::size_t i = 0; i < samples_.size(); ++i) prefix_[i + 1] = prefix_[i] + samples_[i];
  }

  std::size_t duration_s() const { return samples_.size(); }
  const std::vector<double>& samples() const { return samples_; }
  double sample(std::size_t i) const { return samples_[i]; }
  double sample_wrapped(std::uint64_t i) const { return samples_[i % samples_.size()]; }
  double cycle_volume() const { return prefix_.back(); }

  // Sum of `count` whole samples starting at wrapped offset `first`.
  double whole_second_volume(std::uint64_t first, std::uint64_t count) const {
    const std::uint64_t len = samples_.size();
    first %= len;
    const std::uint64_t cycles = count / len;
    const std::uint64_t rem = count % len;
    double v = static_cast<double>(cycles) * cycle_volume();
    if (first + rem <= len) {
      v += prefix_[first + rem] - prefix_[first];
    } else {
      v += (cycle_volume() - prefix_[first]) + prefix_[first + rem - len];
    }
    return v;
  }

private:
  std::vector<double> samples_;
  std::vector<double> prefix_;
};

// One quality level per segment, values in {1,...,r}.
struct AdaptationPath {
  std::vector<int> levels;

  std::size_t size() const { return levels.size(); }
};

inline int count_switches(const AdaptationPath& path) {
  int switches = 0;
  for (std::size_t i = 1; i < path.levels.size(); ++i)
    switches += path.levels[i] != path.levels[i - 1];
  return switches;
}

inline std::int64_t quality_sum(const AdaptationPath& path) {
  std::int64_t q = 0;
  for (int level : path.levels) q += level;
  return q;
}

inline double mean_quality(const AdaptationPath& path) {
  if (path.levels.empty()) return 0.0;
  return static_cast<double>(quality_sum(path)) / static_cast<double>(path.levels.size());
}

struct SessionConfig {
  double startup_delay_s = 5.0;    // T0
  double rebuffer_target_s = 10.0; // D-policy threshold
  std::uint32_t trace_start_s = 0; // offset into the trace, whole seconds
  double epsilon = 0.05;           // optimizer quality gap, in quality levels
};

inline void validate_config(const SessionConfig& cfg, const Video& video,
                            const ThroughputTrace& trace) {
  if (cfg.startup_delay_s < 0.0) throw std::invalid_argument("config: startup delay < 0");
  if (cfg.rebuffer_target_s < 0.0) throw std::invalid_argument("config: rebuffer target < 0");
  if (cfg.epsilon < 0.0 || cfg.epsilon > static_cast<double>(video.num_levels()))
    throw std::invalid_argument("config: epsilon must be in [0, r]");
  if (cfg.trace_start_s >= trace.duration_s())
    throw std::invalid_argument("config: trace start beyond trace end");
}

// V(t): bytes deliverable during the first t seconds of a session whose
// goodput follows `trace` from offset `start`, wrapping at the trace end.
// Piecewise linear and monotone; V(0) = 0.
inline double cumulative_volume(const ThroughputTrace& trace, std::uint32_t start, double t) {
  if (t < 0.0) throw std::invalid_argument("cumulative_volume: t < 0");
  const auto whole = static_cast<std::uint64_t>(std::floor(t));
  const double frac = t - static_cast<double>(whole);
  double v = trace.whole_second_volume(start, whole);
  if (frac > 0.0) v += frac * trace.sample_wrapped(start + whole);
  return v;
}

// T(v): smallest t with V(t) >= v. Inverse of cumulative_volume wherever
// goodput is positive; zero-goodput stretches are skipped.
inline double inverse_time(const ThroughputTrace& trace, std::uint32_t start, double v) {
  if (v < 0.0) throw std::invalid_argument("inverse_time: v < 0");
  if (v == 0.0) return 0.0;
  const double cycle = trace.cycle_volume();
  const auto len = static_cast<std::uint64_t>(trace.duration_s());

  // Whole trace cycles first: largest c with c * cycle < v.
  auto cycles = static_cast<std::uint64_t>(std::floor(v / cycle));
  while (cycles > 0 && static_cast<double>(cycles) * cycle >= v) --cycles;
  double base_t = static_cast<double>(cycles * len);
  double remaining = v - static_cast<double>(cycles) * cycle;

  // Guard against rounding leaving slightly more than one cycle.
  while (remaining > cycle) {
    base_t += static_cast<double>(len);
    remaining -= cycle;
  }
  if (remaining <= 0.0) return base_t;

  // Binary search the smallest whole second m in [0, len] whose cumulative
  // volume from `start` reaches `remaining`, then interpolate inside it.
  std::uint64_t lo = 0, hi = len;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (trace.whole_second_volume(start, mid) >= remaining)
      hi = mid;
    else
      lo = mid + 1;
  }
  const std::uint64_t m = lo;
  if (m == 0) return base_t;
  const double before = trace.whole_second_volume(start, m - 1);
  const double rate = trace.sample_wrapped(start + m - 1);
  double frac = (remaining - before) / rate;
  frac = std::clamp(frac, 0.0, 1.0);
  return base_t + static_cast<double>(m - 1) + frac;
}

// D_i = T0 + (i - 1) * tau: segment i (1-based) must be fully downloaded
// before its playout begins.
inline double deadline(std::size_t i, const SessionConfig& cfg, const Video& video) {
  if (i < 1 || i > video.num_segments()) throw std::out_of_range("deadline: segment index");
  return cfg.startup_delay_s + static_cast<double>(i - 1) * video.segment_duration_s();
}

}  // namespace hasopt
