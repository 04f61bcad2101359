#include <catch2/catch_amalgamated.hpp>

#include "hasopt/features.hpp"
#include "hasopt/optimizer.hpp"
#include "hasopt/simulator.hpp"
#include "hasopt/workload.hpp"

using namespace hasopt;

namespace {

Video five_level_video(std::size_t n) {
  VideoSpec spec;
  spec.n_segments = static_cast<std::uint32_t>(n);
  spec.burstiness = 0.0;
  return generate_video(spec);
}

}  // namespace

TEST_CASE("feature count formula") {
  ScalingContext ctx;
  CHECK(feature_count(ctx, 5) == 242);
  ctx.c_m = 3;
  ctx.c_ot = 2;
  CHECK(feature_count(ctx, 2) == 1 + 2 + 3 + 3 + 6 + 1);
  ctx.c_m = 7;
  ctx.c_ot = 11;
  CHECK(feature_count(ctx, 4) == 1 + 11 + 7 + 7 + 28 + 1);
  CHECK(feature_names(ctx, 4).size() == feature_count(ctx, 4));
}

TEST_CASE("first decision extracts zero-padded memory and empty buffer") {
  const Video video = five_level_video(40);
  ScalingContext ctx;
  ctx.nu = 1e6;
  PlayerStateView view;
  view.segment_index = 1;
  view.buffer_level_s = 0.0;
  view.video = &video;

  const std::vector<double> f = extract(view, video, ctx);
  REQUIRE(f.size() == 242);
  // (a), (b), (c), (d) all zero: indices 0..90.
  for (std::size_t k = 0; k < 91; ++k) CHECK(f[k] == 0.0);
  // (f) zero buffer.
  CHECK(f.back() == 0.0);
  // (e) future sizes of the first segment are visible and scaled.
  CHECK(f[91] == static_cast<double>(video.size_bytes(0, 1)) / ctx.nu);
}

TEST_CASE("near the end of the session the future block is zero-padded") {
  const Video video = five_level_video(40);
  ScalingContext ctx;
  ctx.nu = 1e6;
  std::vector<int> levels(39, 2);
  std::vector<Bytes> sizes(39, 1000);
  std::vector<double> tps(39, 5000.0);
  PlayerStateView view;
  view.segment_index = 40;  // deciding the last segment
  view.buffer_level_s = 12.0;
  view.downloaded_levels = levels;
  view.downloaded_sizes = sizes;
  view.observed_throughputs_Bps = tps;
  view.video = &video;

  const std::vector<double> f = extract(view, video, ctx);
  // Future block: only k = 0 (the last segment itself) is non-zero.
  const std::size_t future_begin = 91;
  for (std::size_t k = 0; k < 30; ++k)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK((f[future_begin + k * 5 + j] > 0.0) == (k == 0));
}

TEST_CASE("mid-session features match hand-scaled history") {
  const Video video = five_level_video(40);
  ScalingContext ctx;
  ctx.nu = 200000.0;  // above every size and throughput in play
  ctx.bl_max = 20.0;

  std::vector<int> levels = {2, 1, 3};
  std::vector<Bytes> sizes = {2000, 1000, 3000};
  std::vector<double> tps = {4000.0, 2000.0, 8000.0};
  PlayerStateView view;
  view.segment_index = 4;
  view.buffer_level_s = 7.5;
  view.now_s = 3.0;
  view.downloaded_levels = levels;
  view.downloaded_sizes = sizes;
  view.observed_throughputs_Bps = tps;
  view.video = &video;

  const std::vector<double> f = extract(view, video, ctx);
  // (a): (4000 + 2000 + 8000) / 30 / nu.
  CHECK(f[0] == Catch::Approx(14000.0 / 30.0 / 200000.0).margin(1e-15));
  // (b): 27 zeros then the three observations, oldest first.
  for (std::size_t k = 1; k <= 27; ++k) CHECK(f[k] == 0.0);
  CHECK(f[28] == 0.02);
  CHECK(f[29] == 0.01);
  CHECK(f[30] == 0.04);
  // (c): levels j/r at the tail of the block.
  for (std::size_t k = 31; k <= 57; ++k) CHECK(f[k] == 0.0);
  CHECK(f[58] == 0.4);
  CHECK(f[59] == 0.2);
  CHECK(f[60] == 0.6);
  // (d): sizes / nu at the tail.
  for (std::size_t k = 61; k <= 87; ++k) CHECK(f[k] == 0.0);
  CHECK(f[88] == 0.01);
  CHECK(f[89] == 0.005);
  CHECK(f[90] == 0.015);
  // (e): starts at the segment being decided (index 3, 0-based).
  CHECK(f[91] == static_cast<double>(video.size_bytes(3, 1)) / ctx.nu);
  CHECK(f[92] == static_cast<double>(video.size_bytes(3, 2)) / ctx.nu);
  // (f): buffer 7.5 / 20.
  CHECK(f.back() == 0.375);
}

TEST_CASE("scaling is shared: doubling sizes and throughputs changes nothing") {
  const Video video = five_level_video(20);
  std::vector<Bytes> doubled_sizes_matrix = video.sizes_row_major();
  for (Bytes& b : doubled_sizes_matrix) b *= 2;
  const Video doubled_video(video.segment_duration_s(), video.num_levels(),
                            doubled_sizes_matrix);

  std::vector<int> levels = {1, 4};
  std::vector<Bytes> sizes = {500, 4000};
  std::vector<double> tps = {1500.0, 6000.0};
  std::vector<Bytes> sizes2 = {1000, 8000};
  std::vector<double> tps2 = {3000.0, 12000.0};

  PlayerStateView view;
  view.segment_index = 3;
  view.buffer_level_s = 4.0;
  view.downloaded_levels = levels;
  view.downloaded_sizes = sizes;
  view.observed_throughputs_Bps = tps;
  view.video = &video;

  PlayerStateView view2 = view;
  view2.downloaded_sizes = sizes2;
  view2.observed_throughputs_Bps = tps2;
  view2.video = &doubled_video;

  ScalingContext ctx;
  ctx.nu = 200000.0;
  ScalingContext ctx2 = ctx;
  ctx2.nu = 400000.0;

  CHECK(extract(view, video, ctx) == extract(view2, doubled_video, ctx2));
}

TEST_CASE("build_corpus labels reconstruct the optimal path") {
  TraceSpec ts;
  ts.seed = 4;
  ts.duration_s = 200;
  const ThroughputTrace trace = generate_trace(ts);
  VideoSpec vs;
  vs.n_segments = 50;
  vs.seed = 6;
  vs.burstiness = 0.6;
  const Video video = generate_video(vs);
  SessionConfig cfg;

  const Corpus corpus = build_corpus({video}, trace, {0}, cfg);
  REQUIRE(corpus.samples.size() == 50);  // one sample per segment

  const OptimalResult opt = solve(video, trace, cfg);
  for (std::size_t i = 0; i < corpus.samples.size(); ++i)
    CHECK(corpus.samples[i].label + 1 == opt.path.levels[i]);

  // nu covers the corpus: every feature lands in [0, 1].
  for (const Sample& s : corpus.samples) {
    REQUIRE(s.features.size() == 242);
    for (float v : s.features) {
      CHECK(v >= 0.0f);
      CHECK(v <= 1.0f);
    }
  }
}

TEST_CASE("build_corpus is deterministic and worker-count independent") {
  TraceSpec ts;
  ts.seed = 40;
  ts.duration_s = 150;
  const ThroughputTrace trace = generate_trace(ts);
  std::vector<Video> videos;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    VideoSpec vs;
    vs.n_segments = 30;
    vs.seed = 50 + seed;
    vs.burstiness = 0.5;
    videos.push_back(generate_video(vs));
  }
  SessionConfig cfg;
  const std::vector<std::uint32_t> starts = {0, 50, 100};

  const Corpus a = build_corpus(videos, trace, starts, cfg, std::nullopt, 1);
  const Corpus b = build_corpus(videos, trace, starts, cfg, std::nullopt, 4);
  REQUIRE(a.samples.size() == b.samples.size());
  CHECK(a.scaling.nu == b.scaling.nu);
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].label == b.samples[i].label);
    CHECK(a.samples[i].features == b.samples[i].features);
  }
}

TEST_CASE("a caller-provided scaling context is reused unchanged") {
  TraceSpec ts;
  ts.seed = 41;
  ts.duration_s = 100;
  const ThroughputTrace trace = generate_trace(ts);
  VideoSpec vs;
  vs.n_segments = 20;
  vs.seed = 42;
  const Video video = generate_video(vs);
  SessionConfig cfg;

  ScalingContext ctx;
  ctx.nu = 1e9;  // far above every corpus quantity
  const Corpus corpus = build_corpus({video}, trace, {0, 10}, cfg, ctx);
  CHECK(corpus.scaling.nu == 1e9);
}
