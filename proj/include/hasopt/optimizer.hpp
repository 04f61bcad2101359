#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hasopt/domain.hpp"

namespace hasopt {

// Exact solution of the two-step optimal-adaptation program:
//   step 1  maximize mean quality subject to one level per segment and
//           prefix byte sums within V(D_k) for every k (no stalling);
//   step 2  among paths whose mean quality is at least the step-1 optimum
//           minus epsilon, minimize the number of adjacent level changes.
// Ties in step 2 are broken toward maximal quality, then toward the
// lexicographically smallest level sequence, so results are reproducible.

struct OptimalResult {
  AdaptationPath path;
  double w_opt = 0.0;                 // step-1 optimum, mean quality in [1, r]
  std::int64_t w_opt_sum = 0;         // n * w_opt, exact integer
  int switches = 0;
  double step2_mean_quality = 0.0;    // mean quality of the returned path
  std::int64_t path_quality_sum = 0;  // n * step2_mean_quality, exact integer
};

struct FeasibilityReport {
  std::vector<double> slack_bytes;  // V(D_k) minus prefix bytes, per segment
  bool feasible = false;
  std::size_t first_violation = 0;  // 1-based segment, 0 if none
};

class InfeasibleError : public std::runtime_error {
public:
  InfeasibleError(std::size_t first_violated_segment)
      : std::runtime_error("no stall-free path exists; first violated deadline at segment " +
                           std::to_string(first_violated_segment)),
        first_violated_segment_(first_violated_segment) {}
  std::size_t first_violated_segment() const { return first_violated_segment_; }

private:
  std::size_t first_violated_segment_;
};

class InstanceTooLargeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Smallest admissible path quality sum under the gap epsilon: the least
// integer Q with Q/n >= w_opt - epsilon, clamped to the attainable range.
// The 1e-9 slack only absorbs the binary representation of epsilon; quality
// sums themselves stay exact integers.
inline std::int64_t quality_floor(std::int64_t w_opt_sum, std::size_t n, double epsilon) {
  const double threshold =
      static_cast<double>(w_opt_sum) - static_cast<double>(n) * epsilon - 1e-9;
  auto q = static_cast<std::int64_t>(std::ceil(threshold));
  q = std::max<std::int64_t>(q, static_cast<std::int64_t>(n));
  q = std::min(q, w_opt_sum);
  return q;
}

namespace detail {

constexpr std::int64_t kByteInf = std::numeric_limits<std::int64_t>::max() / 4;
constexpr std::int64_t kByteNegInf = std::numeric_limits<std::int64_t>::min() / 4;

// Whole-byte deadline budgets. Segment sizes are integral, so flooring V(D_k)
// keeps every feasibility comparison exact in integer arithmetic; budgets are
// additionally capped just above the total top-level size, beyond which they
// cannot constrain anything.
inline std::vector<std::int64_t> deadline_budgets(const Video& video, const ThroughputTrace& trace,
                                                  const SessionConfig& cfg) {
  const std::size_t n = video.num_segments();
  const int r = static_cast<int>(video.num_levels());
  std::int64_t cap = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const Bytes s = video.size_bytes(i, r);
    if (s > static_cast<Bytes>(kByteInf) / 4 || cap > kByteInf / 4)
      throw InstanceTooLargeError("segment sizes exceed the supported byte range");
    cap += static_cast<std::int64_t>(s);
  }
  std::vector<std::int64_t> budgets(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = cumulative_volume(trace, cfg.trace_start_s, deadline(i + 1, cfg, video));
    budgets[i] = v >= static_cast<double>(cap) ? cap : static_cast<std::int64_t>(std::floor(v));
  }
  return budgets;
}

inline std::size_t first_violated_deadline(const Video& video,
                                           const std::vector<std::int64_t>& budgets) {
  std::int64_t prefix = 0;
  for (std::size_t i = 0; i < video.num_segments(); ++i) {
    prefix += static_cast<std::int64_t>(video.size_bytes(i, 1));
    if (prefix > budgets[i]) return i + 1;
  }
  return 0;
}

// Step 1 as a forward DP over (segments done, quality sum): the cheapest
// byte consumption per quality sum dominates every other prefix with the
// same sum, because smaller prefixes only relax future deadline constraints.
inline std::int64_t max_quality_sum(const Video& video,
                                    const std::vector<std::int64_t>& budgets) {
  const std::size_t n = video.num_segments();
  const int r = static_cast<int>(video.num_levels());
  std::vector<std::int64_t> layer{0};  // index u = quality sum - i
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::int64_t> next((i + 1) * (r - 1) + 1, kByteInf);
    for (std::size_t u = 0; u < layer.size(); ++u) {
      if (layer[u] >= kByteInf) continue;
      for (int j = 1; j <= r; ++j) {
        const std::int64_t bytes = layer[u] + static_cast<std::int64_t>(video.size_bytes(i, j));
        if (bytes > budgets[i]) break;  // sizes are non-decreasing in j
        auto& slot = next[u + static_cast<std::size_t>(j - 1)];
        slot = std::min(slot, bytes);
      }
    }
    layer = std::move(next);
  }
  for (std::size_t u = layer.size(); u-- > 0;)
    if (layer[u] < kByteInf) return static_cast<std::int64_t>(n) + static_cast<std::int64_t>(u);
  throw InfeasibleError(first_violated_deadline(video, budgets));
}

// Step-2 suffix table. Cell (i, j, q, t) stores the largest byte consumption
// after segments 0..i-1 (previous level j) that still admits completing
// segments i..n-1 with exactly q additional quality and at most t further
// switches while meeting every remaining deadline. Monotone in its byte
// argument, so a single max per cell is a complete description.
struct SuffixTable {
  std::size_t n = 0;
  int r = 0;
  int switch_cap = 0;
  std::vector<std::vector<std::int64_t>> layers;  // layers[i], i in [1, n]

  std::size_t quality_count(std::size_t i) const { return (n - i) * (r - 1) + 1; }
  std::int64_t quality_min(std::size_t i) const { return static_cast<std::int64_t>(n - i); }

  std::int64_t at(std::size_t i, int prev_level, std::int64_t q, int t) const {
    const std::int64_t qo = q - quality_min(i);
    if (qo < 0 || qo >= static_cast<std::int64_t>(quality_count(i))) return kByteNegInf;
    const std::size_t idx =
        (static_cast<std::size_t>(prev_level - 1) * quality_count(i) + static_cast<std::size_t>(qo)) *
            static_cast<std::size_t>(switch_cap + 1) +
        static_cast<std::size_t>(t);
    return layers[i][idx];
  }
};

inline SuffixTable build_suffix_table(const Video& video, const std::vector<std::int64_t>& budgets,
                                      int switch_cap) {
  SuffixTable table;
  table.n = video.num_segments();
  table.r = static_cast<int>(video.num_levels());
  table.switch_cap = switch_cap;
  table.layers.resize(table.n + 1);

  const std::size_t t_count = static_cast<std::size_t>(switch_cap) + 1;
  table.layers[table.n].assign(static_cast<std::size_t>(table.r) * 1 * t_count, kByteInf);

  for (std::size_t i = table.n; i-- > 1;) {
    const std::size_t qc = table.quality_count(i);
    const std::int64_t q_lo = table.quality_min(i);
    auto& layer = table.layers[i];
    layer.assign(static_cast<std::size_t>(table.r) * qc * t_count, kByteNegInf);
    for (int prev = 1; prev <= table.r; ++prev) {
      for (std::size_t qo = 0; qo < qc; ++qo) {
        const std::int64_t q = q_lo + static_cast<std::int64_t>(qo);
        std::int64_t* cell = &layer[(static_cast<std::size_t>(prev - 1) * qc + qo) * t_count];
        for (int j = 1; j <= table.r; ++j) {
          const auto seg_bytes = static_cast<std::int64_t>(video.size_bytes(i, j));
          const int cost = j != prev;
          for (int t = cost; t <= switch_cap; ++t) {
            const std::int64_t cont = table.at(i + 1, j, q - j, t - cost);
            if (cont <= kByteNegInf) continue;
            const std::int64_t val = std::min(budgets[i], cont) - seg_bytes;
            if (val > cell[t]) cell[t] = val;
          }
        }
        // More switch budget never hurts; make each cell monotone in t so
        // lookups with unused budget stay exact.
        for (std::size_t t = 1; t < t_count; ++t) cell[t] = std::max(cell[t], cell[t - 1]);
      }
    }
  }
  return table;
}

struct Step2Target {
  int switches = -1;  // -1: not representable within the switch cap
  std::int64_t quality = 0;
};

// First-segment scan: feasibility of a full path with quality sum Q and at
// most t switches, minimized over t then maximized over Q.
inline Step2Target scan_targets(const Video& video, const std::vector<std::int64_t>& budgets,
                                const SuffixTable& table, std::int64_t q_floor) {
  const std::size_t n = video.num_segments();
  const int r = static_cast<int>(video.num_levels());
  const auto feasible = [&](std::int64_t q_total, int t) {
    for (int j0 = 1; j0 <= r; ++j0) {
      const std::int64_t cont = table.at(1, j0, q_total - j0, t);
      if (cont <= kByteNegInf) continue;
      const std::int64_t lim = std::min(budgets[0], cont);
      if (static_cast<std::int64_t>(video.size_bytes(0, j0)) <= lim) return true;
    }
    return false;
  };

  const std::int64_t q_hi = static_cast<std::int64_t>(n) * r;
  for (int t = 0; t <= table.switch_cap; ++t) {
    for (std::int64_t q = q_hi; q >= q_floor; --q) {
      if (feasible(q, t)) return {t, q};
    }
  }
  return {};
}

}  // namespace detail

// Exact maximum mean quality (step 1); throws InfeasibleError when even the
// all-lowest path misses a deadline.
inline std::int64_t solve_step1_sum(const Video& video, const ThroughputTrace& trace,
                                    const SessionConfig& cfg) {
  validate_config(cfg, video, trace);
  return detail::max_quality_sum(video, detail::deadline_budgets(video, trace, cfg));
}

inline double solve_step1(const Video& video, const ThroughputTrace& trace,
                          const SessionConfig& cfg) {
  return static_cast<double>(solve_step1_sum(video, trace, cfg)) /
         static_cast<double>(video.num_segments());
}

namespace detail {

inline OptimalResult solve_with_quality_sum(const Video& video, const ThroughputTrace& trace,
                                            const SessionConfig& cfg, std::int64_t w_opt_sum) {
  const std::size_t n = video.num_segments();
  const int r = static_cast<int>(video.num_levels());
  const std::vector<std::int64_t> budgets = deadline_budgets(video, trace, cfg);
  const std::int64_t q_floor = quality_floor(w_opt_sum, n, cfg.epsilon);

  const int max_cap = std::max(0, static_cast<int>(n) - 1);
  int cap = std::min(8, max_cap);
  SuffixTable table;
  Step2Target target;
  for (;;) {
    table = build_suffix_table(video, budgets, cap);
    target = scan_targets(video, budgets, table, q_floor);
    if (target.switches >= 0 || cap == max_cap) break;
    cap = std::min(cap * 2, max_cap);
  }
  if (target.switches < 0)
    throw std::logic_error("step 2 failed to recover a path despite a feasible step 1");

  // Forward greedy reconstruction: taking the smallest level that still
  // completes yields the lexicographically smallest optimal path.
  OptimalResult result;
  result.path.levels.reserve(n);
  std::int64_t consumed = 0;
  std::int64_t q_left = target.quality;
  int t_left = target.switches;
  int prev = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool chosen = false;
    for (int j = 1; j <= r && !chosen; ++j) {
      const int cost = (i == 0) ? 0 : (j != prev);
      if (cost > t_left) continue;
      const std::int64_t q_next = q_left - j;
      const std::int64_t cont = table.at(i + 1, j, q_next, t_left - cost);
      if (cont <= detail::kByteNegInf) continue;
      const std::int64_t lim = std::min(budgets[i], cont);
      const std::int64_t bytes = consumed + static_cast<std::int64_t>(video.size_bytes(i, j));
      if (bytes <= lim) {
        result.path.levels.push_back(j);
        consumed = bytes;
        q_left = q_next;
        t_left -= cost;
        prev = j;
        chosen = true;
      }
    }
    if (!chosen) throw std::logic_error("step 2 reconstruction dead-ended");
  }

  result.w_opt_sum = w_opt_sum;
  result.w_opt = static_cast<double>(w_opt_sum) / static_cast<double>(n);
  result.switches = count_switches(result.path);
  result.path_quality_sum = quality_sum(result.path);
  result.step2_mean_quality =
      static_cast<double>(result.path_quality_sum) / static_cast<double>(n);
  return result;
}

}  // namespace detail

// Step 2 for a caller-supplied step-1 optimum (as returned by solve_step1).
inline OptimalResult solve_step2(const Video& video, const ThroughputTrace& trace,
                                 const SessionConfig& cfg, double w_opt) {
  validate_config(cfg, video, trace);
  const auto w_opt_sum =
      static_cast<std::int64_t>(std::llround(w_opt * static_cast<double>(video.num_segments())));
  return detail::solve_with_quality_sum(video, trace, cfg, w_opt_sum);
}

// Both steps; the optimum quality sum is carried between them exactly.
inline OptimalResult solve(const Video& video, const ThroughputTrace& trace,
                           const SessionConfig& cfg) {
  validate_config(cfg, video, trace);
  const std::vector<std::int64_t> budgets = detail::deadline_budgets(video, trace, cfg);
  const std::int64_t w_opt_sum = detail::max_quality_sum(video, budgets);
  return detail::solve_with_quality_sum(video, trace, cfg, w_opt_sum);
}

// Exhaustive ground truth with the same budgets, quality floor and
// tie-breaks as solve(). Guarded to r^n <= 1e7 paths.
inline OptimalResult brute_force(const Video& video, const ThroughputTrace& trace,
                                 const SessionConfig& cfg) {
  validate_config(cfg, video, trace);
  const std::size_t n = video.num_segments();
  const int r = static_cast<int>(video.num_levels());
  double path_count = 1.0;
  for (std::size_t i = 0; i < n; ++i) path_count *= r;
  if (path_count > 1e7)
    throw InstanceTooLargeError("brute force guard: more than 1e7 candidate paths");

  const std::vector<std::int64_t> budgets = detail::deadline_budgets(video, trace, cfg);

  const auto for_each_feasible = [&](auto&& visit) {
    std::vector<int> levels(n, 1);
    for (;;) {
      std::int64_t prefix = 0;
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i) {
        prefix += static_cast<std::int64_t>(video.size_bytes(i, levels[i]));
        ok = prefix <= budgets[i];
      }
      if (ok) visit(levels);
      // Odometer advance in lexicographic order (last index fastest).
      std::size_t pos = n;
      for (;;) {
        if (pos == 0) return;
        --pos;
        if (levels[pos] < r) {
          ++levels[pos];
          break;
        }
        levels[pos] = 1;
      }
    }
  };

  std::int64_t w_opt_sum = -1;
  for_each_feasible([&](const std::vector<int>& levels) {
    std::int64_t q = 0;
    for (int j : levels) q += j;
    w_opt_sum = std::max(w_opt_sum, q);
  });
  if (w_opt_sum < 0) throw InfeasibleError(detail::first_violated_deadline(video, budgets));

  const std::int64_t q_floor = quality_floor(w_opt_sum, n, cfg.epsilon);
  OptimalResult best;
  bool have_best = false;
  for_each_feasible([&](const std::vector<int>& levels) {
    std::int64_t q = 0;
    int switches = 0;
    for (std::size_t i = 0; i < n; ++i) {
      q += levels[i];
      if (i > 0) switches += levels[i] != levels[i - 1];
    }
    if (q < q_floor) return;
    // Lexicographic enumeration order makes "strictly better" the whole
    // tie-break: earlier paths win remaining ties.
    if (!have_best || switches < best.switches ||
        (switches == best.switches && q > best.path_quality_sum)) {
      best.path.levels = levels;
      best.switches = switches;
      best.path_quality_sum = q;
      have_best = true;
    }
  });

  best.w_opt_sum = w_opt_sum;
  best.w_opt = static_cast<double>(w_opt_sum) / static_cast<double>(n);
  best.step2_mean_quality = static_cast<double>(best.path_quality_sum) / static_cast<double>(n);
  return best;
}

// Per-segment slack V(D_k) minus prefix bytes; feasible iff no slack is
// negative.
inline FeasibilityReport check_feasibility(const AdaptationPath& path, const Video& video,
                                           const ThroughputTrace& trace,
                                           const SessionConfig& cfg) {
  if (path.levels.size() != video.num_segments())
    throw std::invalid_argument("check_feasibility: path length mismatch");
  FeasibilityReport report;
  report.slack_bytes.reserve(path.levels.size());
  report.feasible = true;
  long double prefix = 0.0L;
  for (std::size_t i = 0; i < path.levels.size(); ++i) {
    prefix += static_cast<long double>(video.size_bytes(i, path.levels[i]));
    const double v = cumulative_volume(trace, cfg.trace_start_s, deadline(i + 1, cfg, video));
    const double slack = static_cast<double>(static_cast<long double>(v) - prefix);
    report.slack_bytes.push_back(slack);
    if (slack < 0.0 && report.feasible) {
      report.feasible = false;
      report.first_violation = i + 1;
    }
  }
  return report;
}

}  // namespace hasopt
