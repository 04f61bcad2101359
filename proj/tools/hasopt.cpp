// hasopt: end-to-end pipeline for optimal-path adaptive streaming
// experiments. Subcommands generate workloads, solve the two-step optimal
// adaptation program, extract training corpora, train the network policy,
// simulate playback sessions and evaluate algorithms against the optimal
// path.
//
// Exit codes: 0 ok, 2 usage error, 3 infeasible instance, 4 partial
// evaluation failure, 1 other errors.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hasopt/baselines.hpp"
#include "hasopt/domain.hpp"
#include "hasopt/features.hpp"
#include "hasopt/io.hpp"
#include "hasopt/metrics.hpp"
#include "hasopt/mlp.hpp"
#include "hasopt/optimizer.hpp"
#include "hasopt/pipeline.hpp"
#include "hasopt/simulator.hpp"
#include "hasopt/workload.hpp"

namespace {

constexpr double kBytesPerSecPerMbps = 125000.0;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitPartialFailure = 4;

struct GenTraceArgs {
  double mean_mbps = 0.67;
  double cv = 0.38;
  double ac1 = 0.80;
  std::uint32_t duration_s = 720;
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_gen_trace(const GenTraceArgs& args) {
  hasopt::TraceSpec spec;
  spec.mean_rate_Bps = args.mean_mbps * kBytesPerSecPerMbps;
  spec.cv = args.cv;
  spec.ac1 = args.ac1;
  spec.duration_s = args.duration_s;
  spec.seed = args.seed;
  const hasopt::ThroughputTrace trace = hasopt::generate_trace(spec);

  hasopt::io::Provenance prov;
  prov.params = {{"mean_mbps", args.mean_mbps}, {"cv", args.cv},     {"ac1", args.ac1},
                 {"duration_s", args.duration_s}, {"seed", args.seed}};
  hasopt::io::save_trace(trace, args.output, &prov);
  std::cout << "wrote " << args.output << " (" << trace.duration_s() << " samples)\n";
  return kExitOk;
}

struct GenVideoArgs {
  std::uint32_t segments = 200;
  std::vector<double> rates_mbps = {0.1, 0.23, 0.36, 0.68, 1.33};
  double burstiness = 0.5;
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_gen_video(const GenVideoArgs& args) {
  hasopt::VideoSpec spec;
  spec.n_segments = args.segments;
  spec.level_rates_Bps.clear();
  for (double mbps : args.rates_mbps) spec.level_rates_Bps.push_back(mbps * kBytesPerSecPerMbps);
  spec.burstiness = args.burstiness;
  spec.seed = args.seed;
  const hasopt::Video video = hasopt::generate_video(spec);

  hasopt::io::Provenance prov;
  prov.params = {{"segments", args.segments},
                 {"rates_mbps", args.rates_mbps},
                 {"burstiness", args.burstiness},
                 {"seed", args.seed}};
  hasopt::io::save_video(video, args.output, &prov);
  std::cout << "wrote " << args.output << " (" << video.num_segments() << " segments x "
            << video.num_levels() << " levels)\n";
  return kExitOk;
}

struct SolveArgs {
  std::string video_path;
  std::string trace_path;
  std::uint32_t start_s = 0;
  double epsilon = 0.05;
  double t0 = 5.0;
  bool brute = false;
  std::string output;
};

int cmd_solve(const SolveArgs& args) {
  const hasopt::Video video = hasopt::io::load_video(args.video_path);
  const hasopt::ThroughputTrace trace = hasopt::io::load_trace(args.trace_path);
  hasopt::SessionConfig cfg;
  cfg.trace_start_s = args.start_s;
  cfg.epsilon = args.epsilon;
  cfg.startup_delay_s = args.t0;

  const hasopt::OptimalResult result = args.brute ? hasopt::brute_force(video, trace, cfg)
                                                  : hasopt::solve(video, trace, cfg);

  hasopt::io::Provenance prov;
  prov.inputs["video"] = hasopt::io::file_digest(args.video_path);
  prov.inputs["trace"] = hasopt::io::file_digest(args.trace_path);
  prov.params = {{"start_s", args.start_s}, {"epsilon", args.epsilon}, {"t0", args.t0}};
  hasopt::io::write_file(args.output,
                         hasopt::io::optimal_to_json(result, args.epsilon, &prov).dump(2) + "\n");
  std::cout << "w_opt=" << result.w_opt << " mean_quality=" << result.step2_mean_quality
            << " switches=" << result.switches << "\n";
  return kExitOk;
}

struct ExtractArgs {
  std::vector<std::string> videos;
  std::string trace_path;
  std::string starts_spec = "0:700:7";
  double epsilon = 0.05;
  double t0 = 5.0;
  unsigned workers = 0;
  std::string output;
};

int cmd_extract(const ExtractArgs& args) {
  std::vector<hasopt::Video> videos;
  hasopt::io::Provenance prov;
  for (const std::string& p : args.videos) {
    videos.push_back(hasopt::io::load_video(p));
    prov.inputs["video:" + std::filesystem::path(p).stem().string()] =
        hasopt::io::file_digest(p);
  }
  const hasopt::ThroughputTrace trace = hasopt::io::load_trace(args.trace_path);
  prov.inputs["trace"] = hasopt::io::file_digest(args.trace_path);
  const std::vector<std::uint32_t> starts = hasopt::parse_starts_spec(args.starts_spec);

  hasopt::SessionConfig cfg;
  cfg.epsilon = args.epsilon;
  cfg.startup_delay_s = args.t0;
  const unsigned workers = args.workers ? args.workers : hasopt::default_workers();
  const hasopt::Corpus corpus =
      hasopt::build_corpus(videos, trace, starts, cfg, std::nullopt, workers);

  prov.params = {{"starts", args.starts_spec}, {"epsilon", args.epsilon}, {"t0", args.t0}};
  hasopt::io::save_corpus(corpus, videos.front().num_levels(), args.output, &prov);
  std::cout << "wrote " << args.output << " (" << corpus.samples.size() << " samples, nu="
            << corpus.scaling.nu << ")\n";
  return kExitOk;
}

struct TrainArgs {
  std::string corpus_path;
  std::string scaling_path;
  std::size_t hidden = 110;
  std::size_t epochs = 30;
  double learning_rate = 0.05;
  std::size_t batch = 64;
  std::uint64_t seed = 1;
  double validation_fraction = 1.0 / 9.0;
  std::string output;
  std::string report_path;
};

int cmd_train(const TrainArgs& args) {
  const std::vector<hasopt::Sample> samples = hasopt::io::load_corpus_samples(args.corpus_path);
  const std::string scaling_file =
      args.scaling_path.empty() ? hasopt::io::scaling_path_for(args.corpus_path).string()
                                : args.scaling_path;
  const hasopt::ScalingContext scaling = hasopt::io::load_scaling(scaling_file);

  hasopt::TrainConfig cfg;
  cfg.learning_rate = args.learning_rate;
  cfg.batch_size = args.batch;
  cfg.epochs = args.epochs;
  cfg.seed = args.seed;
  cfg.validation_fraction = args.validation_fraction;
  auto [model, report] = hasopt::train(samples, cfg, args.hidden, scaling);

  hasopt::io::Provenance prov;
  prov.inputs["corpus"] = hasopt::io::file_digest(args.corpus_path);
  prov.params = {{"hidden", args.hidden},       {"epochs", args.epochs},
                 {"learning_rate", args.learning_rate}, {"batch", args.batch},
                 {"seed", args.seed},           {"validation_fraction", args.validation_fraction}};
  hasopt::io::save_model(model, args.output, &prov);
  if (!args.report_path.empty()) {
    auto j = hasopt::io::train_report_to_json(report);
    j["provenance"] = prov.to_json();
    hasopt::io::write_file(args.report_path, j.dump(2) + "\n");
  }
  std::cout << "validation accuracy " << report.final_val_accuracy << "\n";
  return kExitOk;
}

struct SimulateArgs {
  std::string algo_token;
  std::string video_path;
  std::string trace_path;
  std::uint32_t start_s = 0;
  double t0 = 5.0;
  double rebuffer_d = 10.0;
  hasopt::RateBasedConfig rate_cfg;
  std::string output;
};

int cmd_simulate(const SimulateArgs& args) {
  hasopt::AlgoSpec spec = hasopt::parse_algo_token(args.algo_token);
  spec.rate_cfg = args.rate_cfg;
  hasopt::load_algo_resources(spec);
  const hasopt::Video video = hasopt::io::load_video(args.video_path);
  const hasopt::ThroughputTrace trace = hasopt::io::load_trace(args.trace_path);
  hasopt::SessionConfig cfg;
  cfg.trace_start_s = args.start_s;
  cfg.startup_delay_s = args.t0;
  cfg.rebuffer_target_s = args.rebuffer_d;

  const auto logic = hasopt::make_logic(spec, video);
  const hasopt::SessionLog log = hasopt::simulate(video, trace, cfg, *logic);

  hasopt::io::Provenance prov;
  prov.inputs["video"] = hasopt::io::file_digest(args.video_path);
  prov.inputs["trace"] = hasopt::io::file_digest(args.trace_path);
  prov.params = {{"algo", spec.label},
                 {"start_s", args.start_s},
                 {"t0", args.t0},
                 {"rebuffer_d", args.rebuffer_d}};
  hasopt::io::write_file(args.output, hasopt::io::session_log_to_json(log, &prov).dump(2) + "\n");
  const hasopt::SessionMetrics m = hasopt::compute(log, video, cfg);
  std::cout << "stalls=" << log.stalls.size() << " avg_quality=" << m.avg_quality
            << " switching_per_min=" << m.switching_per_min << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string manifest_path;
  std::string out_dir;
  unsigned workers = 0;
};

int cmd_evaluate(const EvaluateArgs& args) {
  hasopt::RunManifest manifest = hasopt::load_manifest(args.manifest_path);
  if (!args.out_dir.empty()) manifest.out_dir = args.out_dir;
  const unsigned workers = args.workers ? args.workers : hasopt::default_workers();
  const hasopt::EvaluateOutcome outcome = hasopt::evaluate(manifest, workers);
  std::cout << "evaluated " << outcome.pairs << " (video,start) pairs -> " << outcome.runs_csv
            << "\n";
  if (!outcome.failures.empty()) {
    std::cerr << outcome.failures.size() << " pairs failed:\n";
    for (const std::string& f : outcome.failures) std::cerr << "  " << f << "\n";
    return kExitPartialFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optimal-path toolchain for adaptive video streaming"};
  app.require_subcommand(1);

  GenTraceArgs gen_trace;
  CLI::App* c_gt = app.add_subcommand("gen-trace", "generate a synthetic goodput trace (CSV)");
  c_gt->add_option("--mean-mbps", gen_trace.mean_mbps, "target mean goodput in Mbit/s");
  c_gt->add_option("--cv", gen_trace.cv, "coefficient of variation");
  c_gt->add_option("--ac1", gen_trace.ac1, "lag-1 autocorrelation, in [0,1)");
  c_gt->add_option("--duration", gen_trace.duration_s, "trace duration in seconds");
  c_gt->add_option("--seed", gen_trace.seed, "PRNG seed");
  c_gt->add_option("-o,--output", gen_trace.output, "output CSV path")->required();

  GenVideoArgs gen_video;
  CLI::App* c_gv = app.add_subcommand("gen-video", "generate a synthetic video manifest (JSON)");
  c_gv->add_option("--segments", gen_video.segments, "number of segments");
  c_gv->add_option("--rates-mbps", gen_video.rates_mbps, "level rates in Mbit/s, ascending")
      ->delimiter(',');
  c_gv->add_option("--burstiness", gen_video.burstiness, "scene modulation amplitude, >= 0");
  c_gv->add_option("--seed", gen_video.seed, "PRNG seed");
  c_gv->add_option("-o,--output", gen_video.output, "output JSON path")->required();

  SolveArgs solve_args;
  CLI::App* c_solve = app.add_subcommand("solve", "compute the optimal adaptation path");
  c_solve->add_option("--video", solve_args.video_path, "video JSON")->required();
  c_solve->add_option("--trace", solve_args.trace_path, "trace CSV")->required();
  c_solve->add_option("--start", solve_args.start_s, "trace start offset in seconds");
  c_solve->add_option("--epsilon", solve_args.epsilon, "quality gap for switch minimization");
  c_solve->add_option("--t0", solve_args.t0, "startup delay in seconds");
  c_solve->add_flag("--brute-force", solve_args.brute, "use the exhaustive oracle (small n only)");
  c_solve->add_option("-o,--output", solve_args.output, "output JSON path")->required();

  ExtractArgs extract_args;
  CLI::App* c_extract =
      app.add_subcommand("extract", "build a training corpus from optimal paths");
  c_extract->add_option("--videos", extract_args.videos, "video JSON files")
      ->required()
      ->expected(-1);
  c_extract->add_option("--trace", extract_args.trace_path, "trace CSV")->required();
  c_extract->add_option("--starts", extract_args.starts_spec, "start offsets as begin:end:step");
  c_extract->add_option("--epsilon", extract_args.epsilon, "optimizer quality gap");
  c_extract->add_option("--t0", extract_args.t0, "startup delay in seconds");
  c_extract->add_option("--workers", extract_args.workers, "worker threads (default HASOPT_WORKERS)");
  c_extract->add_option("-o,--output", extract_args.output, "output corpus CSV")->required();

  TrainArgs train_args;
  CLI::App* c_train = app.add_subcommand("train", "train the network policy on a corpus");
  c_train->add_option("--corpus", train_args.corpus_path, "corpus CSV")->required();
  c_train->add_option("--scaling", train_args.scaling_path,
                      "scaling JSON (default: <corpus>.scaling.json)");
  c_train->add_option("--hidden", train_args.hidden, "hidden layer width");
  c_train->add_option("--epochs", train_args.epochs, "training epochs");
  c_train->add_option("--lr", train_args.learning_rate, "learning rate");
  c_train->add_option("--batch", train_args.batch, "mini-batch size");
  c_train->add_option("--seed", train_args.seed, "PRNG seed");
  c_train->add_option("--validation-fraction", train_args.validation_fraction,
                      "held-out fraction in (0,1)");
  c_train->add_option("--report", train_args.report_path, "training report JSON path");
  c_train->add_option("-o,--output", train_args.output, "output model JSON")->required();

  SimulateArgs sim_args;
  CLI::App* c_sim = app.add_subcommand("simulate", "simulate one playback session");
  c_sim->add_option("--algo", sim_args.algo_token,
                    "rate | aggressive | model:<path> | script:<path>")
      ->required();
  c_sim->add_option("--video", sim_args.video_path, "video JSON")->required();
  c_sim->add_option("--trace", sim_args.trace_path, "trace CSV")->required();
  c_sim->add_option("--start", sim_args.start_s, "trace start offset in seconds");
  c_sim->add_option("--t0", sim_args.t0, "startup delay in seconds");
  c_sim->add_option("--rebuffer-d", sim_args.rebuffer_d, "rebuffer target D in seconds");
  c_sim->add_option("--safety-factor", sim_args.rate_cfg.safety_factor,
                    "rate logic: throughput fraction to spend");
  c_sim->add_option("--smoothing-window", sim_args.rate_cfg.smoothing_window,
                    "rate logic: downloads averaged");
  c_sim->add_option("--upswitch-min-buffer", sim_args.rate_cfg.upswitch_min_buffer_s,
                    "rate logic: buffer needed to up-switch, seconds");
  c_sim->add_option("-o,--output", sim_args.output, "output session JSON")->required();

  EvaluateArgs eval_args;
  CLI::App* c_eval =
      app.add_subcommand("evaluate", "run the full evaluation protocol from a manifest");
  c_eval->add_option("--manifest", eval_args.manifest_path, "run manifest JSON")->required();
  c_eval->add_option("-o,--out-dir", eval_args.out_dir, "output directory (overrides manifest)");
  c_eval->add_option("--workers", eval_args.workers, "worker threads (default HASOPT_WORKERS)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (c_gt->parsed()) return cmd_gen_trace(gen_trace);
    if (c_gv->parsed()) return cmd_gen_video(gen_video);
    if (c_solve->parsed()) return cmd_solve(solve_args);
    if (c_extract->parsed()) return cmd_extract(extract_args);
    if (c_train->parsed()) return cmd_train(train_args);
    if (c_sim->parsed()) return cmd_simulate(sim_args);
    if (c_eval->parsed()) return cmd_evaluate(eval_args);
  } catch (const hasopt::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const hasopt::CorpusBuildError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
