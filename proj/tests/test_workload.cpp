#include <catch2/catch_amalgamated.hpp>

#include "hasopt/workload.hpp"

using namespace hasopt;

TEST_CASE("generate_trace with cv 0 is a constant trace") {
  TraceSpec spec;
  spec.mean_rate_Bps = 50000.0;
  spec.cv = 0.0;
  spec.ac1 = 0.0;
  spec.duration_s = 100;
  const ThroughputTrace trace = generate_trace(spec);
  REQUIRE(trace.duration_s() == 100);
  for (double g : trace.samples()) CHECK(g == 50000.0);
}

TEST_CASE("generate_trace rejects a constant trace with autocorrelation") {
  TraceSpec spec;
  spec.cv = 0.0;
  spec.ac1 = 0.5;
  CHECK_THROWS_AS(generate_trace(spec), std::invalid_argument);
}

TEST_CASE("generate_trace is deterministic per seed") {
  TraceSpec spec;
  spec.seed = 42;
  const ThroughputTrace a = generate_trace(spec);
  const ThroughputTrace b = generate_trace(spec);
  CHECK(a.samples() == b.samples());
  spec.seed = 43;
  CHECK(generate_trace(spec).samples() != a.samples());
}

TEST_CASE("generate_trace hits the target statistics") {
  // Reference parameters: 0.67 Mbit/s mean, CV 0.38, lag-1 autocorrelation
  // 0.80 over 720 s. A 20-seed sweep here; the acceptance suite runs 100.
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    TraceSpec spec;
    spec.seed = seed;
    const ThroughputTrace trace = generate_trace(spec);
    REQUIRE(trace.duration_s() == 720);
    const double mean = stats::mean(trace.samples());
    const double cv = stats::coefficient_of_variation(trace.samples());
    const double ac1 = stats::lag1_autocorrelation(trace.samples());
    CHECK(std::abs(mean - 83750.0) <= 0.02 * 83750.0);
    CHECK(std::abs(cv - 0.38) <= 0.10 * 0.38);
    CHECK(std::abs(ac1 - 0.80) <= 0.05);
    for (double g : trace.samples()) CHECK(g >= 0.0);
  }
}

TEST_CASE("generate_video with burstiness 0 has exact nominal sizes") {
  VideoSpec spec;
  spec.n_segments = 40;
  spec.burstiness = 0.0;
  const Video video = generate_video(spec);
  for (std::size_t i = 0; i < video.num_segments(); ++i)
    for (std::size_t j = 1; j <= video.num_levels(); ++j)
      CHECK(video.size_bytes(i, static_cast<int>(j)) ==
            static_cast<Bytes>(spec.level_rates_Bps[j - 1]));
}

TEST_CASE("generate_video per-level average rates match the requested rates") {
  VideoSpec spec;
  spec.n_segments = 300;
  spec.burstiness = 0.8;
  spec.seed = 9;
  const Video video = generate_video(spec);
  for (std::size_t j = 0; j < video.num_levels(); ++j) {
    long double total = 0.0L;
    for (std::size_t i = 0; i < video.num_segments(); ++i)
      total += video.size_bytes(i, static_cast<int>(j) + 1);
    const double avg_rate = static_cast<double>(total / video.num_segments());
    CHECK(std::abs(avg_rate - spec.level_rates_Bps[j]) <= 0.05 * spec.level_rates_Bps[j]);
  }
}

TEST_CASE("generate_video is deterministic and respects level monotonicity") {
  VideoSpec spec;
  spec.n_segments = 120;
  spec.burstiness = 1.0;
  spec.seed = 5;
  const Video a = generate_video(spec);
  const Video b = generate_video(spec);
  CHECK(a.sizes_row_major() == b.sizes_row_major());
  for (std::size_t i = 0; i < a.num_segments(); ++i)
    for (std::size_t j = 2; j <= a.num_levels(); ++j)
      CHECK(a.size_bytes(i, static_cast<int>(j)) >= a.size_bytes(i, static_cast<int>(j) - 1));
}

TEST_CASE("generated artifacts satisfy domain invariants over a seed sweep") {
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    TraceSpec ts;
    ts.seed = seed;
    ts.duration_s = 64;
    CHECK_NOTHROW(generate_trace(ts));  // ThroughputTrace ctor revalidates

    VideoSpec vs;
    vs.seed = seed;
    vs.n_segments = 30;
    vs.burstiness = 0.9;
    CHECK_NOTHROW(generate_video(vs));  // Video ctor revalidates
  }
}

TEST_CASE("per-level rate tolerance holds across a seed sweep") {
  for (std::uint64_t seed = 500; seed < 520; ++seed) {
    VideoSpec vs;
    vs.seed = seed;
    vs.n_segments = 60;
    vs.burstiness = 1.0;
    const Video video = generate_video(vs);
    for (std::size_t j = 0; j < video.num_levels(); ++j) {
      long double total = 0.0L;
      for (std::size_t i = 0; i < video.num_segments(); ++i)
        total += video.size_bytes(i, static_cast<int>(j) + 1);
      const double avg_rate = static_cast<double>(total / video.num_segments());
      CHECK(std::abs(avg_rate - vs.level_rates_Bps[j]) <= 0.05 * vs.level_rates_Bps[j]);
    }
  }
}

TEST_CASE("workload spec validation") {
  TraceSpec ts;
  ts.mean_rate_Bps = 0.0;
  CHECK_THROWS_AS(generate_trace(ts), std::invalid_argument);
  ts = TraceSpec{};
  ts.ac1 = 1.0;
  CHECK_THROWS_AS(generate_trace(ts), std::invalid_argument);

  VideoSpec vs;
  vs.level_rates_Bps = {100.0, 100.0};
  CHECK_THROWS_AS(generate_video(vs), std::invalid_argument);
  vs = VideoSpec{};
  vs.n_segments = 0;
  CHECK_THROWS_AS(generate_video(vs), std::invalid_argument);
}
