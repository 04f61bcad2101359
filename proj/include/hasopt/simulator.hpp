#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hasopt/domain.hpp"

namespace hasopt {

// Player state offered to an adaptation logic at a decision instant.
// History spans cover segments 1..i-1; the manifest is visible through the
// video pointer (k = 0 below is the segment being decided).
struct PlayerStateView {
  std::size_t segment_index = 1;  // 1-based next segment to download
  double buffer_level_s = 0.0;
  double now_s = 0.0;
  std::span<const int> downloaded_levels;
  std::span<const Bytes> downloaded_sizes;
  std::span<const double> observed_throughputs_Bps;
  const Video* video = nullptr;

  std::size_t history_count() const { return downloaded_levels.size(); }
  std::size_t remaining_segments() const {
    return video->num_segments() - (segment_index - 1);
  }
  Bytes future_size(std::size_t k, int level) const {
    return video->size_bytes(segment_index - 1 + k, level);
  }
};

// Quality selection strategy. decide() must be deterministic in the view and
// must not retain state between calls; the simulator may share one instance
// across many sessions.
class AdaptationLogic {
public:
  virtual ~AdaptationLogic() = default;
  virtual int decide(const PlayerStateView& view) const = 0;
  virtual std::string name() const { return "logic"; }
};

class ProtocolViolationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Decision {
  double decision_time_s = 0.0;
  int level = 0;
  double download_start_s = 0.0;
  double download_end_s = 0.0;
  double observed_throughput_Bps = 0.0;
};

struct StallEvent {
  double start_s = 0.0;
  double end_s = 0.0;
};

struct SessionLog {
  std::vector<Decision> decisions;
  std::vector<StallEvent> stalls;
  double playout_start_s = 0.0;
  double playout_end_s = 0.0;
};

// Replays a fixed path: the decision for segment i is always path[i].
class ScriptLogic final : public AdaptationLogic {
public:
  explicit ScriptLogic(AdaptationPath path) : path_(std::move(path)) {}
  int decide(const PlayerStateView& view) const override {
    return path_.levels[view.segment_index - 1];
  }
  std::string name() const override { return "script"; }

private:
  AdaptationPath path_;
};

inline ScriptLogic script_logic(AdaptationPath path, const Video& video) {
  if (path.levels.size() != video.num_segments())
    throw std::invalid_argument("script_logic: path length does not match the video");
  for (int level : path.levels)
    if (level < 1 || level > static_cast<int>(video.num_levels()))
      throw std::invalid_argument("script_logic: level out of range");
  return ScriptLogic(std::move(path));
}

// Invoked after every accepted decision; used by training-sample extraction.
using DecisionObserver = std::function<void(const PlayerStateView&, int level)>;

// Deterministic single-client playback session.
//
// Downloads are sequential and back-to-back from t = 0 with an unlimited
// buffer; the decision for segment i is taken the instant download i starts.
// Playout begins at max(T0, first segment complete) and consumes buffer in
// real time. An empty buffer mid-playout opens a stall, which closes once at
// least `rebuffer_target_s` seconds are buffered or the last segment has
// arrived. A dry buffer refilled at the very same instant is not a stall.
// Playback positions are derived from anchor points rather than accumulated,
// so replaying a deadline-feasible path reproduces the analytic session
// bit for bit.
inline SessionLog simulate(const Video& video, const ThroughputTrace& trace,
                           const SessionConfig& cfg, const AdaptationLogic& logic,
                           const DecisionObserver& observer = {}) {
  validate_config(cfg, video, trace);
  const std::size_t n = video.num_segments();
  const int r = static_cast<int>(video.num_levels());
  const double tau = video.segment_duration_s();

  SessionLog log;
  log.decisions.reserve(n);
  std::vector<int> levels_hist;
  std::vector<Bytes> sizes_hist;
  std::vector<double> tp_hist;
  levels_hist.reserve(n);
  sizes_hist.reserve(n);
  tp_hist.reserve(n);

  Bytes consumed = 0;
  std::size_t arrived = 0;
  double avail_s = 0.0;

  bool started = false;
  bool stalled = false;
  double resume_t = 0.0, resume_played = 0.0;  // playing anchor
  double stall_began = 0.0, stall_played = 0.0;

  const auto played_at = [&](double t) {
    if (!started) return 0.0;
    if (stalled) return stall_played;
    return resume_played + std::max(0.0, t - resume_t);
  };

  // Record a buffer dry-out happening strictly before time t. Anything at
  // exactly t is resolved by the arrival processed at t.
  const auto advance_playback_to = [&](double t) {
    if (!started || stalled || arrived == n) return;
    const double dry_t = resume_t + (avail_s - resume_played);
    if (dry_t < t) {
      stalled = true;
      stall_began = dry_t;
      stall_played = avail_s;
    }
  };

  for (std::size_t i = 0; i < n; ++i) {
    const double t_start = i == 0 ? 0.0 : log.decisions.back().download_end_s;
    advance_playback_to(t_start);

    PlayerStateView view;
    view.segment_index = i + 1;
    view.now_s = t_start;
    view.buffer_level_s = std::max(0.0, avail_s - played_at(t_start));
    view.downloaded_levels = levels_hist;
    view.downloaded_sizes = sizes_hist;
    view.observed_throughputs_Bps = tp_hist;
    view.video = &video;

    const int level = logic.decide(view);
    if (level < 1 || level > r)
      throw ProtocolViolationError("adaptation logic returned level " + std::to_string(level) +
                                   " outside {1,...," + std::to_string(r) + "}");
    if (observer) observer(view, level);

    const Bytes size = video.size_bytes(i, level);
    double end, throughput;
    if (size == 0) {
      // Degenerate segment: instantaneous download at the current sample's
      // goodput.
      end = t_start;
      throughput = trace.sample_wrapped(cfg.trace_start_s +
                                        static_cast<std::uint64_t>(std::floor(t_start)));
    } else {
      consumed += size;
      end = inverse_time(trace, cfg.trace_start_s, static_cast<double>(consumed));
      throughput = static_cast<double>(size) / (end - t_start);
    }
    log.decisions.push_back({t_start, level, t_start, end, throughput});
    levels_hist.push_back(level);
    sizes_hist.push_back(size);
    tp_hist.push_back(throughput);

    advance_playback_to(end);
    ++arrived;
    avail_s = tau * static_cast<double>(arrived);
    if (!started) {
      log.playout_start_s = std::max(cfg.startup_delay_s, end);
      started = true;
      resume_t = log.playout_start_s;
      resume_played = 0.0;
    } else if (stalled && (avail_s - stall_played >= cfg.rebuffer_target_s || arrived == n)) {
      log.stalls.push_back({stall_began, end});
      stalled = false;
      resume_t = end;
      resume_played = stall_played;
    }
  }

  log.playout_end_s = resume_t + (video.duration_s() - resume_played);
  return log;
}

// Session log of a deadline-feasible path, written down directly from the
// download completion times: playout starts on schedule and never stalls.
// Mirrors the simulator's arithmetic so a scripted replay agrees exactly;
// the event loop is the thing being cross-checked, not the formulas.
inline SessionLog analytic_session_log(const AdaptationPath& path, const Video& video,
                                       const ThroughputTrace& trace, const SessionConfig& cfg) {
  validate_config(cfg, video, trace);
  const std::size_t n = video.num_segments();
  if (path.levels.size() != n)
    throw std::invalid_argument("analytic_session_log: path length mismatch");

  SessionLog log;
  log.decisions.reserve(n);
  Bytes consumed = 0;
  double prev_end = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t_start = prev_end;
    const Bytes size = video.size_bytes(i, path.levels[i]);
    double end, throughput;
    if (size == 0) {
      end = t_start;
      throughput = trace.sample_wrapped(cfg.trace_start_s +
                                        static_cast<std::uint64_t>(std::floor(t_start)));
    } else {
      consumed += size;
      end = inverse_time(trace, cfg.trace_start_s, static_cast<double>(consumed));
      throughput = static_cast<double>(size) / (end - t_start);
    }
    if (end > deadline(i + 1, cfg, video) + 1e-9)
      throw std::invalid_argument("analytic_session_log: path misses deadline of segment " +
                                  std::to_string(i + 1));
    log.decisions.push_back({t_start, path.levels[i], t_start, end, throughput});
    prev_end = end;
  }
  log.playout_start_s = std::max(cfg.startup_delay_s, log.decisions.front().download_end_s);
  log.playout_end_s = log.playout_start_s + (video.duration_s() - 0.0);
  return log;
}

}  // namespace hasopt
