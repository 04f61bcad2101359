#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hasopt/domain.hpp"
#include "hasopt/optimizer.hpp"
#include "hasopt/parallel.hpp"
#include "hasopt/simulator.hpp"

namespace hasopt {

// Feature scalers. nu scales every byte and byte-per-second quantity with a
// single value so their ratios survive scaling; bl_max scales the buffer
// level. c_ot and c_m are the throughput and decision memory horizons.
struct ScalingContext {
  double nu = 1.0;
  double bl_max = 20.0;
  int c_m = 30;
  int c_ot = 30;
};

inline void validate_scaling(const ScalingContext& ctx) {
  if (ctx.nu <= 0.0) throw std::invalid_argument("scaling: nu must be > 0");
  if (ctx.bl_max <= 0.0) throw std::invalid_argument("scaling: bl_max must be > 0");
  if (ctx.c_m < 1 || ctx.c_ot < 1) throw std::invalid_argument("scaling: horizons must be >= 1");
}

struct Sample {
  std::vector<float> features;
  int label = 0;  // 0-based class: optimal level - 1
};

// 1 average + c_ot throughputs + c_m levels + c_m sizes + c_m*r future sizes
// + 1 buffer level; 242 with the defaults and r = 5.
inline std::size_t feature_count(const ScalingContext& ctx, std::size_t r) {
  return 1 + static_cast<std::size_t>(ctx.c_ot) + 2 * static_cast<std::size_t>(ctx.c_m) +
         static_cast<std::size_t>(ctx.c_m) * r + 1;
}

// Scaled feature vector of one decision instant, every entry in [0, 1].
// Memory blocks are oldest-first and left-padded with zeros at session
// start; the future block is zero-filled past the last segment.
inline std::vector<double> extract(const PlayerStateView& view, const Video& video,
                                   const ScalingContext& ctx) {
  validate_scaling(ctx);
  const std::size_t r = video.num_levels();
  const std::size_t n = video.num_segments();
  const auto h = static_cast<std::int64_t>(view.history_count());
  const double nu = ctx.nu;
  const auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };

  std::vector<double> out;
  out.reserve(feature_count(ctx, r));

  // (a) average observed throughput over the last c_ot downloads; the few
  // available at session start are averaged against the full horizon.
  double tp_sum = 0.0;
  for (std::int64_t k = std::max<std::int64_t>(0, h - ctx.c_ot); k < h; ++k)
    tp_sum += view.observed_throughputs_Bps[static_cast<std::size_t>(k)];
  out.push_back(clamp01(tp_sum / static_cast<double>(ctx.c_ot) / nu));

  // (b) the last c_ot observed throughputs.
  for (int p = 0; p < ctx.c_ot; ++p) {
    const std::int64_t k = h - ctx.c_ot + p;
    out.push_back(k < 0 ? 0.0
                        : clamp01(view.observed_throughputs_Bps[static_cast<std::size_t>(k)] / nu));
  }

  // (c) memory of selected quality levels, encoded j/r.
  for (int p = 0; p < ctx.c_m; ++p) {
    const std::int64_t k = h - ctx.c_m + p;
    out.push_back(k < 0 ? 0.0
                        : clamp01(static_cast<double>(
                                      view.downloaded_levels[static_cast<std::size_t>(k)]) /
                                  static_cast<double>(r)));
  }

  // (d) memory of selected segment sizes.
  for (int p = 0; p < ctx.c_m; ++p) {
    const std::int64_t k = h - ctx.c_m + p;
    out.push_back(
        k < 0 ? 0.0
              : clamp01(static_cast<double>(view.downloaded_sizes[static_cast<std::size_t>(k)]) /
                        nu));
  }

  // (e) future segment sizes for all levels, level-major per segment;
  // k = 0 is the segment being decided.
  const std::size_t current = view.segment_index - 1;
  for (int k = 0; k < ctx.c_m; ++k) {
    const std::size_t seg = current + static_cast<std::size_t>(k);
    for (std::size_t j = 1; j <= r; ++j) {
      out.push_back(seg < n ? clamp01(static_cast<double>(
                                          video.size_bytes(seg, static_cast<int>(j))) /
                                      nu)
                            : 0.0);
    }
  }

  // (f) buffer level.
  out.push_back(clamp01(view.buffer_level_s / ctx.bl_max));
  return out;
}

// Column names for the corpus CSV, in extraction order.
inline std::vector<std::string> feature_names(const ScalingContext& ctx, std::size_t r) {
  const auto pad2 = [](int v) {
    const std::string s = std::to_string(v);
    return s.size() < 2 ? "0" + s : s;
  };
  std::vector<std::string> names;
  names.reserve(feature_count(ctx, r));
  names.push_back("tp_avg");
  for (int p = 0; p < ctx.c_ot; ++p) names.push_back("tp_mem_" + pad2(p));
  for (int p = 0; p < ctx.c_m; ++p) names.push_back("lvl_mem_" + pad2(p));
  for (int p = 0; p < ctx.c_m; ++p) names.push_back("sz_mem_" + pad2(p));
  for (int k = 0; k < ctx.c_m; ++k)
    for (std::size_t j = 1; j <= r; ++j)
      names.push_back("fut_s" + pad2(k) + "_l" + std::to_string(j));
  names.push_back("buf_lvl");
  return names;
}

class CorpusBuildError : public std::runtime_error {
public:
  CorpusBuildError(std::size_t video_index, std::uint32_t start_s, const std::string& what)
      : std::runtime_error("corpus build failed for video " + std::to_string(video_index) +
                           ", start " + std::to_string(start_s) + "s: " + what),
        video_index_(video_index),
        start_s_(start_s) {}
  std::size_t video_index() const { return video_index_; }
  std::uint32_t start_s() const { return start_s_; }

private:
  std::size_t video_index_;
  std::uint32_t start_s_;
};

struct Corpus {
  std::vector<Sample> samples;
  ScalingContext scaling;
};

// Imitation-learning corpus: solve every (video, start) pair, replay the
// optimal path, and emit one sample per decision labelled with the optimal
// level. When no scaling context is given, nu becomes the maximum over all
// manifest sizes and all observed throughputs of the corpus. Jobs run on
// `workers` threads and are merged in (video, start, segment) order, so the
// corpus is reproducible for any worker count.
inline Corpus build_corpus(const std::vector<Video>& videos, const ThroughputTrace& trace,
                           const std::vector<std::uint32_t>& starts, const SessionConfig& base_cfg,
                           const std::optional<ScalingContext>& ctx = std::nullopt,
                           unsigned workers = 1) {
  if (videos.empty() || starts.empty())
    throw std::invalid_argument("build_corpus: need at least one video and one start");
  for (const Video& video : videos)
    if (video.num_levels() != videos.front().num_levels())
      throw std::invalid_argument("build_corpus: videos disagree on the level count");

  struct PairRun {
    AdaptationPath path;
    SessionLog log;
  };
  const std::size_t job_count = videos.size() * starts.size();
  std::vector<PairRun> runs(job_count);

  run_indexed_jobs(job_count, workers, [&](std::size_t job) {
    const std::size_t vi = job / starts.size();
    const std::uint32_t start = starts[job % starts.size()];
    SessionConfig cfg = base_cfg;
    cfg.trace_start_s = start;
    try {
      OptimalResult opt = solve(videos[vi], trace, cfg);
      const ScriptLogic logic = script_logic(opt.path, videos[vi]);
      runs[job].log = simulate(videos[vi], trace, cfg, logic);
      runs[job].path = std::move(opt.path);
    } catch (const InfeasibleError& e) {
      throw CorpusBuildError(vi, start, e.what());
    }
  });

  ScalingContext scaling = ctx.value_or(ScalingContext{});
  if (!ctx) {
    double nu = 0.0;
    for (const Video& video : videos)
      for (Bytes s : video.sizes_row_major()) nu = std::max(nu, static_cast<double>(s));
    for (const PairRun& run : runs)
      for (const Decision& d : run.log.decisions) nu = std::max(nu, d.observed_throughput_Bps);
    if (nu <= 0.0) throw std::invalid_argument("build_corpus: degenerate corpus, nu = 0");
    scaling.nu = nu;
  }
  validate_scaling(scaling);

  std::vector<std::vector<Sample>> per_job(job_count);
  run_indexed_jobs(job_count, workers, [&](std::size_t job) {
    const std::size_t vi = job / starts.size();
    const std::uint32_t start = starts[job % starts.size()];
    SessionConfig cfg = base_cfg;
    cfg.trace_start_s = start;
    const Video& video = videos[vi];
    std::vector<Sample>& samples = per_job[job];
    samples.reserve(video.num_segments());
    const ScriptLogic logic = script_logic(runs[job].path, video);
    simulate(video, trace, cfg, logic, [&](const PlayerStateView& view, int level) {
      const std::vector<double> values = extract(view, video, scaling);
      Sample sample;
      sample.features.assign(values.begin(), values.end());
      sample.label = level - 1;
      samples.push_back(std::move(sample));
    });
  });

  Corpus corpus;
  corpus.scaling = scaling;
  std::size_t total = 0;
  for (const auto& job_samples : per_job) total += job_samples.size();
  corpus.samples.reserve(total);
  for (auto& job_samples : per_job)
    for (Sample& s : job_samples) corpus.samples.push_back(std::move(s));
  return corpus;
}

}  // namespace hasopt
