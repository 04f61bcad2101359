#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "hasopt/domain.hpp"
#include "hasopt/simulator.hpp"

namespace hasopt {

// Representative threshold-based adaptation families: a conservative
// rate-and-buffer logic and an aggressive rate-matching logic. Both are pure
// functions of the player state view.

struct RateBasedConfig {
  double safety_factor = 0.9;       // fraction of the smoothed throughput to spend
  std::size_t smoothing_window = 5; // past downloads averaged
  double upswitch_min_buffer_s = 10.0;
};

// Conservative: picks the highest level whose manifest-average rate fits
// under a safety discount of the smoothed observed throughput. Up-switches
// need a comfortable buffer and move one level at a time; down-switches are
// damped to one level unless the buffer is critically low.
class RateBasedLogic final : public AdaptationLogic {
public:
  RateBasedLogic(const RateBasedConfig& cfg, const Video& video) : cfg_(cfg) {
    if (cfg_.safety_factor <= 0.0 || cfg_.safety_factor > 1.0)
      throw std::invalid_argument("rate-based: safety factor must be in (0,1]");
    if (cfg_.smoothing_window < 1)
      throw std::invalid_argument("rate-based: smoothing window must be >= 1");
    // Thresholds come from the manifest itself, not the nominal metadata.
    nominal_rates_.resize(video.num_levels());
    for (std::size_t j = 0; j < video.num_levels(); ++j) {
      long double total = 0.0L;
      for (std::size_t i = 0; i < video.num_segments(); ++i)
        total += video.size_bytes(i, static_cast<int>(j) + 1);
      nominal_rates_[j] = static_cast<double>(total / video.num_segments()) /
                          video.segment_duration_s();
    }
  }

  int decide(const PlayerStateView& view) const override {
    const std::size_t h = view.history_count();
    if (h == 0) return 1;

    const std::size_t window = std::min(cfg_.smoothing_window, h);
    double sum = 0.0;
    for (std::size_t k = h - window; k < h; ++k) sum += view.observed_throughputs_Bps[k];
    const double budget = cfg_.safety_factor * (sum / static_cast<double>(window));

    int target = 1;
    for (std::size_t j = 0; j < nominal_rates_.size(); ++j)
      if (nominal_rates_[j] <= budget) target = static_cast<int>(j) + 1;

    const int prev = view.downloaded_levels[h - 1];
    if (target > prev) {
      if (view.buffer_level_s < cfg_.upswitch_min_buffer_s) return prev;
      return prev + 1;
    }
    if (target < prev && view.buffer_level_s >= 0.5 * cfg_.upswitch_min_buffer_s)
      return prev - 1;
    return target;
  }

  std::string name() const override { return "rate"; }

private:
  RateBasedConfig cfg_;
  std::vector<double> nominal_rates_;
};

inline RateBasedLogic rate_based_logic(const RateBasedConfig& cfg, const Video& video) {
  return RateBasedLogic(cfg, video);
}

// Aggressive: matches the actual next-segment size against the most recent
// observed throughput, with no buffer gating and no damping.
class AggressiveLogic final : public AdaptationLogic {
public:
  explicit AggressiveLogic(const Video& video) : tau_(video.segment_duration_s()) {}

  int decide(const PlayerStateView& view) const override {
    const std::size_t h = view.history_count();
    if (h == 0) return 1;
    const double last_tp = view.observed_throughputs_Bps[h - 1];
    int level = 1;
    for (std::size_t j = 0; j < view.video->num_levels(); ++j) {
      const double rate = static_cast<double>(view.future_size(0, static_cast<int>(j) + 1)) / tau_;
      if (rate <= last_tp) level = static_cast<int>(j) + 1;
    }
    return level;
  }

  std::string name() const override { return "aggressive"; }

private:
  double tau_;
};

inline AggressiveLogic aggressive_logic(const Video& video) { return AggressiveLogic(video); }

}  // namespace hasopt
