#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "hasopt/io.hpp"
#include "hasopt/pipeline.hpp"
#include "hasopt/workload.hpp"

using namespace hasopt;

namespace {

std::filesystem::path work_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "hasopt_io_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("video json round-trips") {
  VideoSpec spec;
  spec.n_segments = 25;
  spec.seed = 3;
  spec.burstiness = 0.7;
  const Video video = generate_video(spec);
  const auto path = work_dir() / "video.json";
  io::save_video(video, path);
  const Video loaded = io::load_video(path);
  CHECK(loaded.segment_duration_s() == video.segment_duration_s());
  CHECK(loaded.sizes_row_major() == video.sizes_row_major());
  CHECK(loaded.level_nominal_rates_Bps() == video.level_nominal_rates_Bps());
}

TEST_CASE("trace csv round-trips exactly and tolerates provenance comments") {
  TraceSpec spec;
  spec.seed = 11;
  spec.duration_s = 64;
  const ThroughputTrace trace = generate_trace(spec);
  io::Provenance prov;
  prov.params = {{"seed", 11}};
  const auto path = work_dir() / "trace.csv";
  io::save_trace(trace, path, &prov);
  const ThroughputTrace loaded = io::load_trace(path);
  CHECK(loaded.samples() == trace.samples());

  CHECK_THROWS_AS(io::trace_from_csv("bogus\n1,2\n"), std::runtime_error);
}

TEST_CASE("optimal result json carries the pinned keys") {
  OptimalResult r;
  r.path.levels = {1, 2, 2};
  r.w_opt = 2.0;
  r.w_opt_sum = 6;
  r.switches = 1;
  r.step2_mean_quality = 5.0 / 3.0;
  r.path_quality_sum = 5;
  const io::json j = io::optimal_to_json(r, 0.5);
  CHECK(j.at("levels").get<std::vector<int>>() == r.path.levels);
  CHECK(j.at("w_opt").get<double>() == 2.0);
  CHECK(j.at("switches").get<int>() == 1);
  CHECK(j.at("mean_quality").get<double>() == 5.0 / 3.0);
  CHECK(io::path_from_json(j).levels == r.path.levels);
}

TEST_CASE("session log json rounds times to microseconds") {
  SessionLog log;
  log.decisions.push_back({0.123456789, 2, 0.123456789, 1.000000049, 5000.0});
  log.playout_start_s = 5.0;
  log.playout_end_s = 35.0000004999;
  const io::json j = io::session_log_to_json(log);
  CHECK(j.at("decisions")[0].at("decision_time_s").get<double>() == 0.123457);
  CHECK(j.at("decisions")[0].at("download_end_s").get<double>() == 1.0);
  CHECK(j.at("playout_end_s").get<double>() == 35.0);
}

TEST_CASE("corpus csv round-trips samples") {
  Corpus corpus;
  corpus.scaling.nu = 12345.0;
  corpus.scaling.c_m = 2;
  corpus.scaling.c_ot = 2;
  for (int i = 0; i < 5; ++i) {
    Sample s;
    for (std::size_t k = 0; k < feature_count(corpus.scaling, 3); ++k)
      s.features.push_back(static_cast<float>(0.01 * static_cast<double>(i + 1) *
                                              static_cast<double>(k + 1)));
    s.label = i % 3;
    corpus.samples.push_back(std::move(s));
  }
  const auto path = work_dir() / "corpus.csv";
  io::Provenance prov;
  io::save_corpus(corpus, 3, path, &prov);

  const std::vector<Sample> loaded = io::load_corpus_samples(path);
  REQUIRE(loaded.size() == corpus.samples.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].features == corpus.samples[i].features);
    CHECK(loaded[i].label == corpus.samples[i].label);
  }
  const ScalingContext ctx = io::load_scaling(io::scaling_path_for(path));
  CHECK(ctx.nu == corpus.scaling.nu);
  CHECK(ctx.c_m == 2);
}

TEST_CASE("digests are stable and content-sensitive") {
  const auto a = work_dir() / "a.txt";
  const auto b = work_dir() / "b.txt";
  io::write_file(a, "hello");
  io::write_file(b, "hello");
  CHECK(io::file_digest(a) == io::file_digest(b));
  io::write_file(b, "hello!");
  CHECK(io::file_digest(a) != io::file_digest(b));
}

TEST_CASE("start spec parsing") {
  CHECK(parse_starts_spec("0:700:7").size() == 101);
  CHECK(parse_starts_spec("0:700:7").front() == 0);
  CHECK(parse_starts_spec("0:700:7").back() == 700);
  CHECK(parse_starts_spec("5:5:1") == std::vector<std::uint32_t>{5});
  CHECK_THROWS_AS(parse_starts_spec("5:1:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_starts_spec("0:10:0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_starts_spec("7"), std::invalid_argument);
  CHECK_THROWS_AS(parse_starts_spec("a:b:c"), std::invalid_argument);
}

TEST_CASE("algo token parsing") {
  CHECK(parse_algo_token("rate").kind == AlgoSpec::Kind::kRate);
  CHECK(parse_algo_token("aggressive").kind == AlgoSpec::Kind::kAggressive);
  const AlgoSpec m = parse_algo_token("model:m.json");
  CHECK(m.kind == AlgoSpec::Kind::kModel);
  CHECK(m.model_path == "m.json");
  const AlgoSpec s = parse_algo_token("script:p.json");
  CHECK(s.kind == AlgoSpec::Kind::kScript);
  CHECK(s.script_path == "p.json");
  CHECK_THROWS_AS(parse_algo_token("bogus"), std::invalid_argument);
}
