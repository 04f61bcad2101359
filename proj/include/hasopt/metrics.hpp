#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "hasopt/domain.hpp"
#include "hasopt/optimizer.hpp"
#include "hasopt/simulator.hpp"

namespace hasopt {

struct SessionMetrics {
  double switching_per_min = 0.0;   // level changes per minute of video
  double avg_quality = 0.0;         // mean level index, in [1, r]
  double avg_buffer_s = 0.0;        // time-weighted mean buffer level
  double stalls_per_min = 0.0;      // stall events per minute of video
  double stall_time_ratio = 0.0;    // session duration / video duration
};

// Algorithm metrics minus optimal-path metrics, field by field.
struct DifferentialMetrics {
  double switching_per_min = 0.0;
  double avg_quality = 0.0;
  double avg_buffer_s = 0.0;
  double stalls_per_min = 0.0;
  double stall_time_ratio = 0.0;
};

namespace detail {

// Exact integral of the piecewise-linear buffer trajectory over the whole
// session [0, playout_end]. Buffer level jumps by tau at download
// completions and drains at unit rate while playing.
inline double buffer_integral(const SessionLog& log, const Video& video) {
  const double tau = video.segment_duration_s();
  std::vector<double> brk;
  brk.reserve(log.decisions.size() + log.stalls.size() * 2 + 3);
  brk.push_back(0.0);
  for (const Decision& d : log.decisions) brk.push_back(d.download_end_s);
  brk.push_back(log.playout_start_s);
  for (const StallEvent& s : log.stalls) {
    brk.push_back(s.start_s);
    brk.push_back(s.end_s);
  }
  brk.push_back(log.playout_end_s);
  std::sort(brk.begin(), brk.end());
  brk.erase(std::unique(brk.begin(), brk.end()), brk.end());

  const auto played_at = [&](double t) {
    if (t <= log.playout_start_s) return 0.0;
    double played = t - log.playout_start_s;
    for (const StallEvent& s : log.stalls) {
      if (s.start_s < t) played -= std::min(t, s.end_s) - s.start_s;
    }
    return played;
  };

  double integral = 0.0;
  std::size_t arrivals = 0;
  for (std::size_t k = 0; k + 1 < brk.size(); ++k) {
    const double a = brk[k];
    const double b = brk[k + 1];
    if (b > log.playout_end_s) break;
    while (arrivals < log.decisions.size() && log.decisions[arrivals].download_end_s <= a)
      ++arrivals;
    const double downloaded = tau * static_cast<double>(arrivals);
    const double left = downloaded - played_at(a);
    const double right = downloaded - played_at(b);
    integral += (b - a) * 0.5 * (left + right);
  }
  return integral;
}

}  // namespace detail

// The five evaluation metrics of one playback session. Per-minute rates are
// normalized by the video duration n*tau so the optimal path's figures stay
// comparable across algorithms; the stall time ratio runs from t = 0 and so
// includes the initial delay.
inline SessionMetrics compute(const SessionLog& log, const Video& video,
                              const SessionConfig& /*cfg*/) {
  const std::size_t n = video.num_segments();
  if (log.decisions.size() != n) throw std::invalid_argument("metrics: log/video mismatch");
  const double video_minutes = video.duration_s() / 60.0;

  SessionMetrics m;
  int switches = 0;
  long long level_sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    level_sum += log.decisions[i].level;
    if (i > 0) switches += log.decisions[i].level != log.decisions[i - 1].level;
  }
  m.switching_per_min = static_cast<double>(switches) / video_minutes;
  m.avg_quality = static_cast<double>(level_sum) / static_cast<double>(n);
  m.stalls_per_min = static_cast<double>(log.stalls.size()) / video_minutes;
  m.stall_time_ratio = log.playout_end_s / video.duration_s();
  m.avg_buffer_s = detail::buffer_integral(log, video) / log.playout_end_s;
  return m;
}

// Optimal-path metrics without running the simulator: the path is stall-free
// by construction, so its session log can be written down directly.
inline SessionMetrics optimal_metrics(const AdaptationPath& path, const Video& video,
                                      const ThroughputTrace& trace, const SessionConfig& cfg) {
  return compute(analytic_session_log(path, video, trace, cfg), video, cfg);
}

inline DifferentialMetrics subtract(const SessionMetrics& algo, const SessionMetrics& opt) {
  return {algo.switching_per_min - opt.switching_per_min, algo.avg_quality - opt.avg_quality,
          algo.avg_buffer_s - opt.avg_buffer_s, algo.stalls_per_min - opt.stalls_per_min,
          algo.stall_time_ratio - opt.stall_time_ratio};
}

inline DifferentialMetrics differential(const SessionMetrics& algo, const OptimalResult& opt,
                                        const Video& video, const ThroughputTrace& trace,
                                        const SessionConfig& cfg) {
  return subtract(algo, optimal_metrics(opt.path, video, trace, cfg));
}

// Empirical distribution of one differential metric across runs: the sorted
// values (CDF support), the median and the fraction of runs at or below zero.
struct DistributionSummary {
  std::vector<double> values_sorted;
  double median = 0.0;
  double frac_le_zero = 0.0;
};

struct AggregateSummary {
  DistributionSummary switching_per_min;
  DistributionSummary avg_quality;
  DistributionSummary avg_buffer_s;
  DistributionSummary stalls_per_min;
  DistributionSummary stall_time_ratio;
};

namespace detail {

inline DistributionSummary summarize(std::vector<double> values) {
  DistributionSummary s;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  s.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  std::size_t le_zero = 0;
  for (double v : values) le_zero += v <= 0.0;
  s.frac_le_zero = static_cast<double>(le_zero) / static_cast<double>(n);
  s.values_sorted = std::move(values);
  return s;
}

}  // namespace detail

inline AggregateSummary aggregate(const std::vector<DifferentialMetrics>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
  const auto pick = [&](double DifferentialMetrics::* field) {
    std::vector<double> v;
    v.reserve(runs.size());
    for (const DifferentialMetrics& run : runs) v.push_back(run.*field);
    return detail::summarize(std::move(v));
  };
  AggregateSummary s;
  s.switching_per_min = pick(&DifferentialMetrics::switching_per_min);
  s.avg_quality = pick(&DifferentialMetrics::avg_quality);
  s.avg_buffer_s = pick(&DifferentialMetrics::avg_buffer_s);
  s.stalls_per_min = pick(&DifferentialMetrics::stalls_per_min);
  s.stall_time_ratio = pick(&DifferentialMetrics::stall_time_ratio);
  return s;
}

}  // namespace hasopt
