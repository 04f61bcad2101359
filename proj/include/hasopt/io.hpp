#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hasopt/domain.hpp"
#include "hasopt/features.hpp"
#include "hasopt/metrics.hpp"
#include "hasopt/mlp.hpp"
#include "hasopt/optimizer.hpp"
#include "hasopt/simulator.hpp"

namespace hasopt {

inline constexpr const char* kToolName = "hasopt";
inline constexpr const char* kToolVersion = "0.1.0";

namespace io {

using nlohmann::json;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string file_digest(const std::filesystem::path& path) {
  char buf[19];
  const auto res = std::to_chars(buf, buf + sizeof(buf), fnv1a64(read_file(path)), 16);
  return "fnv64:" + std::string(buf, res.ptr);
}

// Shortest round-trip decimal form.
inline std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double round_us(double seconds) { return std::round(seconds * 1e6) / 1e6; }

// Carried on every output file: tool identity, digests of the inputs it was
// derived from and the semantic parameters of the run. Runtime-only knobs
// (worker counts, verbosity) stay out so reruns produce identical bytes.
struct Provenance {
  std::map<std::string, std::string> inputs;  // label -> digest
  json params = json::object();

  json to_json() const {
    json j;
    j["tool"] = kToolName;
    j["version"] = kToolVersion;
    j["inputs"] = inputs;
    j["params"] = params;
    return j;
  }

  std::string comment_line() const { return "# provenance: " + to_json().dump(); }
};

// ---- Video JSON -----------------------------------------------------------

inline json video_to_json(const Video& video, const Provenance* prov = nullptr) {
  json sizes = json::array();
  for (std::size_t i = 0; i < video.num_segments(); ++i) {
    json row = json::array();
    for (std::size_t j = 1; j <= video.num_levels(); ++j)
      row.push_back(video.size_bytes(i, static_cast<int>(j)));
    sizes.push_back(std::move(row));
  }
  json j;
  j["segment_duration_s"] = video.segment_duration_s();
  j["sizes"] = std::move(sizes);
  j["level_nominal_rates_Bps"] = video.level_nominal_rates_Bps();
  if (prov) j["provenance"] = prov->to_json();
  return j;
}

inline Video video_from_json(const json& j) {
  const double tau = j.at("segment_duration_s").get<double>();
  const auto& rows = j.at("sizes");
  if (!rows.is_array() || rows.empty()) throw std::runtime_error("video json: bad sizes matrix");
  const std::size_t r = rows.front().size();
  std::vector<Bytes> sizes;
  sizes.reserve(rows.size() * r);
  for (const auto& row : rows) {
    if (row.size() != r) throw std::runtime_error("video json: ragged sizes matrix");
    for (const auto& v : row) sizes.push_back(v.get<Bytes>());
  }
  std::vector<double> rates;
  if (j.contains("level_nominal_rates_Bps"))
    rates = j.at("level_nominal_rates_Bps").get<std::vector<double>>();
  return Video(tau, r, std::move(sizes), std::move(rates));
}

inline void save_video(const Video& video, const std::filesystem::path& path,
                       const Provenance* prov = nullptr) {
  write_file(path, video_to_json(video, prov).dump(2) + "\n");
}

inline Video load_video(const std::filesystem::path& path) {
  return video_from_json(json::parse(read_file(path)));
}

// ---- Trace CSV -------------------------------------------------------------

inline std::string trace_to_csv(const ThroughputTrace& trace, const Provenance* prov = nullptr) {
  std::string out;
  if (prov) out += prov->comment_line() + "\n";
  out += "t_s,goodput_Bps\n";
  for (std::size_t t = 0; t < trace.duration_s(); ++t)
    out += std::to_string(t) + "," + fmt_double(trace.sample(t)) + "\n";
  return out;
}

inline ThroughputTrace trace_from_csv(std::string_view csv) {
  std::vector<double> samples;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos < csv.size()) {
    std::size_t eol = csv.find('\n', pos);
    if (eol == std::string_view::npos) eol = csv.size();
    std::string_view line = csv.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "t_s,goodput_Bps") throw std::runtime_error("trace csv: bad header");
      header_seen = true;
      continue;
    }
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos) throw std::runtime_error("trace csv: bad row");
    samples.push_back(std::stod(std::string(line.substr(comma + 1))));
  }
  return ThroughputTrace(std::move(samples));
}

inline void save_trace(const ThroughputTrace& trace, const std::filesystem::path& path,
                       const Provenance* prov = nullptr) {
  write_file(path, trace_to_csv(trace, prov));
}

inline ThroughputTrace load_trace(const std::filesystem::path& path) {
  return trace_from_csv(read_file(path));
}

// ---- Optimal result JSON ----------------------------------------------------

inline json optimal_to_json(const OptimalResult& r, double epsilon,
                            const Provenance* prov = nullptr) {
  json j;
  j["levels"] = r.path.levels;
  j["w_opt"] = r.w_opt;
  j["switches"] = r.switches;
  j["mean_quality"] = r.step2_mean_quality;
  j["epsilon"] = epsilon;
  if (prov) j["provenance"] = prov->to_json();
  return j;
}

inline AdaptationPath path_from_json(const json& j) {
  return AdaptationPath{j.at("levels").get<std::vector<int>>()};
}

inline AdaptationPath load_path(const std::filesystem::path& path) {
  return path_from_json(json::parse(read_file(path)));
}

// ---- Session log JSON -------------------------------------------------------

inline json session_log_to_json(const SessionLog& log, const Provenance* prov = nullptr) {
  json decisions = json::array();
  for (const Decision& d : log.decisions) {
    decisions.push_back({{"decision_time_s", round_us(d.decision_time_s)},
                         {"level", d.level},
                         {"download_start_s", round_us(d.download_start_s)},
                         {"download_end_s", round_us(d.download_end_s)},
                         {"observed_throughput_Bps", d.observed_throughput_Bps}});
  }
  json stalls = json::array();
  for (const StallEvent& s : log.stalls)
    stalls.push_back({{"start_s", round_us(s.start_s)}, {"end_s", round_us(s.end_s)}});
  json j;
  j["decisions"] = std::move(decisions);
  j["stall_events"] = std::move(stalls);
  j["playout_start_s"] = round_us(log.playout_start_s);
  j["playout_end_s"] = round_us(log.playout_end_s);
  if (prov) j["provenance"] = prov->to_json();
  return j;
}

// ---- Model JSON -------------------------------------------------------------

inline json scaling_to_json(const ScalingContext& ctx) {
  return {{"nu", ctx.nu}, {"bl_max", ctx.bl_max}, {"c_m", ctx.c_m}, {"c_ot", ctx.c_ot}};
}

inline ScalingContext scaling_from_json(const json& j) {
  ScalingContext ctx;
  ctx.nu = j.at("nu").get<double>();
  ctx.bl_max = j.at("bl_max").get<double>();
  ctx.c_m = j.at("c_m").get<int>();
  ctx.c_ot = j.at("c_ot").get<int>();
  validate_scaling(ctx);
  return ctx;
}

inline json model_to_json(const MlpModel& m, const Provenance* prov = nullptr) {
  json j;
  j["format_version"] = 1;
  j["n_inputs"] = m.n_inputs;
  j["hidden_size"] = m.n_hidden;
  j["n_outputs"] = m.n_outputs;
  j["w1"] = m.w1;
  j["b1"] = m.b1;
  j["w2"] = m.w2;
  j["b2"] = m.b2;
  j["scaling"] = scaling_to_json(m.scaling);
  if (prov) j["provenance"] = prov->to_json();
  return j;
}

inline MlpModel model_from_json(const json& j) {
  if (j.at("format_version").get<int>() != 1)
    throw std::runtime_error("model json: unsupported format version");
  MlpModel m;
  m.n_inputs = j.at("n_inputs").get<std::size_t>();
  m.n_hidden = j.at("hidden_size").get<std::size_t>();
  m.n_outputs = j.at("n_outputs").get<std::size_t>();
  m.w1 = j.at("w1").get<std::vector<double>>();
  m.b1 = j.at("b1").get<std::vector<double>>();
  m.w2 = j.at("w2").get<std::vector<double>>();
  m.b2 = j.at("b2").get<std::vector<double>>();
  m.scaling = scaling_from_json(j.at("scaling"));
  if (m.w1.size() != m.n_inputs * m.n_hidden || m.b1.size() != m.n_hidden ||
      m.w2.size() != m.n_hidden * m.n_outputs || m.b2.size() != m.n_outputs)
    throw std::runtime_error("model json: inconsistent shapes");
  return m;
}

inline void save_model(const MlpModel& m, const std::filesystem::path& path,
                       const Provenance* prov = nullptr) {
  write_file(path, model_to_json(m, prov).dump() + "\n");
}

inline MlpModel load_model(const std::filesystem::path& path) {
  return model_from_json(json::parse(read_file(path)));
}

inline json train_report_to_json(const TrainReport& r) {
  return {{"epoch_loss", r.epoch_loss},
          {"epoch_val_accuracy", r.epoch_val_accuracy},
          {"final_val_accuracy", r.final_val_accuracy}};
}

// ---- Corpus CSV -------------------------------------------------------------

inline std::filesystem::path scaling_path_for(const std::filesystem::path& corpus_path) {
  return std::filesystem::path(corpus_path.string() + ".scaling.json");
}

inline void save_corpus(const Corpus& corpus, std::size_t r, const std::filesystem::path& path,
                        const Provenance* prov = nullptr) {
  std::string out;
  if (prov) out += prov->comment_line() + "\n";
  const std::vector<std::string> names = feature_names(corpus.scaling, r);
  for (const std::string& name : names) out += name + ",";
  out += "label\n";
  for (const Sample& s : corpus.samples) {
    for (float v : s.features) {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof(buf), v);
      out.append(buf, res.ptr);
      out += ',';
    }
    out += std::to_string(s.label) + "\n";
  }
  write_file(path, out);
  json scaling = scaling_to_json(corpus.scaling);
  if (prov) scaling["provenance"] = prov->to_json();
  write_file(scaling_path_for(path), scaling.dump(2) + "\n");
}

inline std::vector<Sample> load_corpus_samples(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<Sample> samples;
  std::size_t pos = 0;
  bool header_seen = false;
  std::size_t columns = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      header_seen = true;
      columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
      continue;
    }
    Sample s;
    s.features.reserve(columns - 1);
    const char* cur = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t c = 0; c + 1 < columns; ++c) {
      float value = 0.0f;
      const auto res = std::from_chars(cur, end, value);
      if (res.ec != std::errc{} || res.ptr == end || *res.ptr != ',')
        throw std::runtime_error("corpus csv: bad feature row");
      s.features.push_back(value);
      cur = res.ptr + 1;
    }
    const auto res = std::from_chars(cur, end, s.label);
    if (res.ec != std::errc{}) throw std::runtime_error("corpus csv: bad label");
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw std::runtime_error("corpus csv: no samples");
  return samples;
}

inline ScalingContext load_scaling(const std::filesystem::path& path) {
  return scaling_from_json(json::parse(read_file(path)));
}

// ---- Metrics CSV / aggregate JSON -------------------------------------------

inline std::string metrics_csv_header() {
  return "video,start_s,algorithm,switching_per_min,avg_quality,avg_buffer_s,stalls_per_min,"
         "stall_time_ratio,d_switching_per_min,d_avg_quality,d_avg_buffer_s,d_stalls_per_min,"
         "d_stall_time_ratio\n";
}

inline std::string metrics_csv_row(const std::string& video_id, std::uint32_t start_s,
                                   const std::string& algorithm, const SessionMetrics& m,
                                   const DifferentialMetrics& d) {
  std::string row = video_id + "," + std::to_string(start_s) + "," + algorithm;
  for (double v : {m.switching_per_min, m.avg_quality, m.avg_buffer_s, m.stalls_per_min,
                   m.stall_time_ratio, d.switching_per_min, d.avg_quality, d.avg_buffer_s,
                   d.stalls_per_min, d.stall_time_ratio})
    row += "," + fmt_double(v);
  return row + "\n";
}

inline json distribution_to_json(const DistributionSummary& d) {
  return {{"cdf", d.values_sorted}, {"median", d.median}, {"frac_le_zero", d.frac_le_zero}};
}

inline json aggregate_to_json(const AggregateSummary& a) {
  return {{"switching_per_min", distribution_to_json(a.switching_per_min)},
          {"avg_quality", distribution_to_json(a.avg_quality)},
          {"avg_buffer_s", distribution_to_json(a.avg_buffer_s)},
          {"stalls_per_min", distribution_to_json(a.stalls_per_min)},
          {"stall_time_ratio", distribution_to_json(a.stall_time_ratio)}};
}

}  // namespace io
}  // namespace hasopt
