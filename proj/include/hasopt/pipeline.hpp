#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hasopt/baselines.hpp"
#include "hasopt/domain.hpp"
#include "hasopt/io.hpp"
#include "hasopt/metrics.hpp"
#include "hasopt/mlp.hpp"
#include "hasopt/optimizer.hpp"
#include "hasopt/parallel.hpp"
#include "hasopt/simulator.hpp"

namespace hasopt {

// "begin:end:step" inclusive arithmetic sequence of trace start offsets.
inline std::vector<std::uint32_t> parse_starts_spec(const std::string& spec) {
  std::uint32_t begin = 0, end = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> begin >> c1 >> end >> c2 >> step) || c1 != ':' || c2 != ':' || step == 0 ||
      end < begin || !(in >> std::ws).eof())
    throw std::invalid_argument("start spec must be begin:end:step, got '" + spec + "'");
  std::vector<std::uint32_t> starts;
  for (std::uint64_t t = begin; t <= end; t += step) starts.push_back(static_cast<std::uint32_t>(t));
  return starts;
}

// One adaptation algorithm under evaluation.
struct AlgoSpec {
  enum class Kind { kRate, kAggressive, kModel, kScript };
  Kind kind = Kind::kRate;
  std::string label = "rate";
  RateBasedConfig rate_cfg;
  std::filesystem::path model_path;
  std::shared_ptr<const MlpModel> model;  // loaded lazily from model_path
  std::filesystem::path script_path;
  std::optional<AdaptationPath> script;
};

// Accepts rate | aggressive | model:<path> | script:<path>.
inline AlgoSpec parse_algo_token(const std::string& token) {
  AlgoSpec spec;
  if (token == "rate") {
    spec.kind = AlgoSpec::Kind::kRate;
    spec.label = "rate";
  } else if (token == "aggressive") {
    spec.kind = AlgoSpec::Kind::kAggressive;
    spec.label = "aggressive";
  } else if (token.starts_with("model:")) {
    spec.kind = AlgoSpec::Kind::kModel;
    spec.label = "model";
    spec.model_path = token.substr(6);
  } else if (token.starts_with("script:")) {
    spec.kind = AlgoSpec::Kind::kScript;
    spec.label = "script";
    spec.script_path = token.substr(7);
  } else {
    throw std::invalid_argument("unknown algorithm token '" + token + "'");
  }
  return spec;
}

inline void load_algo_resources(AlgoSpec& spec) {
  if (spec.kind == AlgoSpec::Kind::kModel && !spec.model)
    spec.model = std::make_shared<MlpModel>(io::load_model(spec.model_path));
  if (spec.kind == AlgoSpec::Kind::kScript && !spec.script)
    spec.script = io::load_path(spec.script_path);
}

inline std::unique_ptr<AdaptationLogic> make_logic(const AlgoSpec& spec, const Video& video) {
  switch (spec.kind) {
    case AlgoSpec::Kind::kRate:
      return std::make_unique<RateBasedLogic>(spec.rate_cfg, video);
    case AlgoSpec::Kind::kAggressive:
      return std::make_unique<AggressiveLogic>(video);
    case AlgoSpec::Kind::kModel:
      return std::make_unique<MlpLogic>(spec.model, video);
    case AlgoSpec::Kind::kScript:
      return std::make_unique<ScriptLogic>(script_logic(*spec.script, video));
  }
  throw std::logic_error("unreachable algo kind");
}

struct RunManifest {
  std::vector<std::filesystem::path> video_paths;
  std::filesystem::path trace_path;
  std::vector<std::uint32_t> starts;
  std::vector<AlgoSpec> algos;
  SessionConfig session;
  std::filesystem::path out_dir;
};

// Manifest JSON: videos, trace, starts (list or "a:b:c" spec), algorithms
// (list of {"algo": token}), session overrides, out_dir. Relative paths are
// resolved against the manifest's directory.
inline RunManifest load_manifest(const std::filesystem::path& path) {
  const io::json j = io::json::parse(io::read_file(path));
  const std::filesystem::path base = path.has_parent_path() ? path.parent_path() : ".";
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };

  RunManifest m;
  for (const auto& v : j.at("videos")) m.video_paths.push_back(resolve(v.get<std::string>()));
  m.trace_path = resolve(j.at("trace").get<std::string>());
  if (j.at("starts").is_string())
    m.starts = parse_starts_spec(j.at("starts").get<std::string>());
  else
    m.starts = j.at("starts").get<std::vector<std::uint32_t>>();
  for (const auto& a : j.at("algorithms")) {
    AlgoSpec spec = parse_algo_token(a.at("algo").get<std::string>());
    if (spec.kind == AlgoSpec::Kind::kModel && !spec.model_path.is_absolute())
      spec.model_path = base / spec.model_path;
    if (spec.kind == AlgoSpec::Kind::kScript && !spec.script_path.is_absolute())
      spec.script_path = base / spec.script_path;
    if (a.contains("safety_factor")) spec.rate_cfg.safety_factor = a.at("safety_factor");
    if (a.contains("smoothing_window")) spec.rate_cfg.smoothing_window = a.at("smoothing_window");
    if (a.contains("upswitch_min_buffer_s"))
      spec.rate_cfg.upswitch_min_buffer_s = a.at("upswitch_min_buffer_s");
    if (a.contains("label")) spec.label = a.at("label");
    m.algos.push_back(std::move(spec));
  }
  if (j.contains("session")) {
    const auto& s = j.at("session");
    if (s.contains("startup_delay_s")) m.session.startup_delay_s = s.at("startup_delay_s");
    if (s.contains("rebuffer_target_s")) m.session.rebuffer_target_s = s.at("rebuffer_target_s");
    if (s.contains("epsilon")) m.session.epsilon = s.at("epsilon");
  }
  m.out_dir = resolve(j.at("out_dir").get<std::string>());
  return m;
}

struct EvaluateOutcome {
  std::size_t pairs = 0;
  std::vector<std::string> failures;  // "video,start: reason"
  std::filesystem::path runs_csv;
  std::filesystem::path aggregate_json;
};

// Full evaluation protocol: for every (video, start) pair, solve the optimal
// path, simulate every algorithm, compute the five metrics and their
// differentials, and write one CSV row per session plus one per optimal
// path. Pairs run on `workers` threads; rows and aggregates are merged in
// manifest order, so output files are identical for any worker count.
inline EvaluateOutcome evaluate(const RunManifest& manifest, unsigned workers) {
  if (manifest.video_paths.empty() || manifest.starts.empty() || manifest.algos.empty())
    throw std::invalid_argument("evaluate: manifest needs videos, starts and algorithms");

  const ThroughputTrace trace = io::load_trace(manifest.trace_path);
  std::vector<Video> videos;
  std::vector<std::string> video_ids;
  for (const auto& p : manifest.video_paths) {
    videos.push_back(io::load_video(p));
    video_ids.push_back(p.stem().string());
  }
  std::vector<AlgoSpec> algos = manifest.algos;
  for (AlgoSpec& a : algos) load_algo_resources(a);

  struct PairResult {
    bool ok = false;
    std::string error;
    SessionMetrics optimal;
    std::vector<SessionMetrics> algo_metrics;
    std::vector<DifferentialMetrics> algo_diffs;
  };
  const std::size_t pair_count = videos.size() * manifest.starts.size();
  std::vector<PairResult> results(pair_count);

  run_indexed_jobs(pair_count, workers, [&](std::size_t job) {
    const std::size_t vi = job / manifest.starts.size();
    const std::uint32_t start = manifest.starts[job % manifest.starts.size()];
    const Video& video = videos[vi];
    SessionConfig cfg = manifest.session;
    cfg.trace_start_s = start;
    PairResult& out = results[job];
    try {
      const OptimalResult opt = solve(video, trace, cfg);
      out.optimal = optimal_metrics(opt.path, video, trace, cfg);
      for (const AlgoSpec& algo : algos) {
        const auto logic = make_logic(algo, video);
        const SessionLog log = simulate(video, trace, cfg, *logic);
        const SessionMetrics m = compute(log, video, cfg);
        out.algo_metrics.push_back(m);
        out.algo_diffs.push_back(subtract(m, out.optimal));
      }
      out.ok = true;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  });

  io::Provenance prov;
  prov.inputs["trace"] = io::file_digest(manifest.trace_path);
  for (std::size_t vi = 0; vi < manifest.video_paths.size(); ++vi)
    prov.inputs["video:" + video_ids[vi]] = io::file_digest(manifest.video_paths[vi]);
  io::json algo_params = io::json::array();
  for (const AlgoSpec& a : algos) {
    io::json entry = {{"algo", a.label}};
    if (a.kind == AlgoSpec::Kind::kModel)
      prov.inputs["model:" + a.label] = io::file_digest(a.model_path);
    if (a.kind == AlgoSpec::Kind::kRate)
      entry["rate_cfg"] = {{"safety_factor", a.rate_cfg.safety_factor},
                           {"smoothing_window", a.rate_cfg.smoothing_window},
                           {"upswitch_min_buffer_s", a.rate_cfg.upswitch_min_buffer_s}};
    algo_params.push_back(std::move(entry));
  }
  prov.params = {{"starts", manifest.starts},
                 {"algorithms", algo_params},
                 {"session",
                  {{"startup_delay_s", manifest.session.startup_delay_s},
                   {"rebuffer_target_s", manifest.session.rebuffer_target_s},
                   {"epsilon", manifest.session.epsilon}}}};

  EvaluateOutcome outcome;
  outcome.pairs = pair_count;
  outcome.runs_csv = manifest.out_dir / "runs.csv";
  outcome.aggregate_json = manifest.out_dir / "aggregate.json";

  std::string csv = prov.comment_line() + "\n" + io::metrics_csv_header();
  std::vector<std::vector<DifferentialMetrics>> diffs_per_algo(algos.size());
  const DifferentialMetrics zero{};
  for (std::size_t job = 0; job < pair_count; ++job) {
    const std::size_t vi = job / manifest.starts.size();
    const std::uint32_t start = manifest.starts[job % manifest.starts.size()];
    const PairResult& res = results[job];
    if (!res.ok) {
      outcome.failures.push_back(video_ids[vi] + "," + std::to_string(start) + ": " + res.error);
      continue;
    }
    csv += io::metrics_csv_row(video_ids[vi], start, "optimal", res.optimal, zero);
    for (std::size_t ai = 0; ai < algos.size(); ++ai) {
      csv += io::metrics_csv_row(video_ids[vi], start, algos[ai].label, res.algo_metrics[ai],
                                 res.algo_diffs[ai]);
      diffs_per_algo[ai].push_back(res.algo_diffs[ai]);
    }
  }
  io::write_file(outcome.runs_csv, csv);

  io::json agg;
  agg["provenance"] = prov.to_json();
  agg["pairs_total"] = pair_count;
  agg["pairs_failed"] = outcome.failures.size();
  agg["failed_pairs"] = outcome.failures;
  agg["algorithms"] = io::json::object();
  for (std::size_t ai = 0; ai < algos.size(); ++ai) {
    if (!diffs_per_algo[ai].empty())
      agg["algorithms"][algos[ai].label] = io::aggregate_to_json(aggregate(diffs_per_algo[ai]));
  }
  io::write_file(outcome.aggregate_json, agg.dump(2) + "\n");
  return outcome;
}

inline unsigned default_workers() {
  if (const char* env = std::getenv("HASOPT_WORKERS")) {
    const int v = std::atoi(env);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return 1;
}

}  // namespace hasopt
