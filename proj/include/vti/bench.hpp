#pragma once

#include <algorithm>
#include <chrono>
#include <ctime>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vti/perfmodel.hpp"
#include "vti/propagator.hpp"
#include "vti/threading.hpp"

namespace vti::bench {

inline constexpr int kDefaultRepetitions = 3;
inline constexpr int kBenchRxy = 12;
inline constexpr int kBenchRz = 8;

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

struct ThroughputReport {
  int nx = 0, ny = 0, nz = 0;
  long n_steps = 0;
  long warmup_steps = 0;
  std::string kernel;
  std::string precision;
  std::string placement;
  int threads = 1;
  int block_w = 0, block_h = 0;
  int tile_x = 0, tile_y = 0, column_width = 1;
  int repetitions = 1;
  std::vector<double> rep_elapsed_sec;
  double elapsed_sec = 0.0;  // median over repetitions
  double sweeps_per_sec = 0.0;
  double points_per_sec = 0.0;
  double flops_per_point = 0.0;
  double modeled_flops_per_sec = 0.0;
  double noise = 0.0;  // (max - min) / median of the repetition timings
  std::string timestamp;

  std::size_t interior_points() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
};

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Fill the derived rates from the timings. The identities
// points = sweeps * N and flops = points * flops_per_point hold exactly
// because every rate is computed from the previous one.
inline void finalize(ThroughputReport& r) {
  r.elapsed_sec = median(r.rep_elapsed_sec);
  r.sweeps_per_sec = static_cast<double>(r.n_steps) / r.elapsed_sec;
  r.points_per_sec = r.sweeps_per_sec * static_cast<double>(r.interior_points());
  r.modeled_flops_per_sec = r.points_per_sec * r.flops_per_point;
  const auto [lo, hi] = std::minmax_element(r.rep_elapsed_sec.begin(), r.rep_elapsed_sec.end());
  r.noise = r.elapsed_sec > 0.0 ? (*hi - *lo) / r.elapsed_sec : 0.0;
}

/// Time `n_steps` steps after `warmup` untimed steps, repeated `reps`
/// times on a fresh state; setup and warmup are excluded.
template <typename Real>
ThroughputReport measure(const Problem<Real>& pb, const SimConfig& cfg, long n_steps, long warmup = 1,
                         int reps = kDefaultRepetitions) {
  if (n_steps < 1) throw ParameterError("benchmark needs n_steps >= 1");
  if (reps < 1) throw ParameterError("repetitions must be >= 1");
  const Grid& g = pb.grid();
  cfg.validate(g);

  ThroughputReport r;
  r.nx = g.nx;
  r.ny = g.ny;
  r.nz = g.nz;
  r.n_steps = n_steps;
  r.warmup_steps = warmup;
  r.kernel = to_string(cfg.kernel);
  r.precision = sizeof(Real) == 4 ? "single" : "double";
  r.placement = to_string(cfg.placement);
  r.threads = cfg.threads;
  r.block_w = cfg.block_w;
  r.block_h = cfg.block_h;
  r.tile_x = cfg.tile_x;
  r.tile_y = cfg.tile_y;
  r.column_width = cfg.column_width;
  r.repetitions = reps;
  r.flops_per_point = perf::ci_estimate(pb.kw.r_xy, pb.kw.r_z, static_cast<int>(sizeof(Real))).flops_per_point;
  r.timestamp = utc_timestamp();

  apply_placement(cfg.placement, cfg.threads);
  for (int rep = 0; rep < reps; ++rep) {
    WaveState<Real> s = make_state<Real>(g, cfg);
    for (long n = 0; n < warmup; ++n) step(s, pb, cfg);
    const auto t0 = std::chrono::steady_clock::now();
    for (long n = 0; n < n_steps; ++n) step(s, pb, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    if (!all_finite(s.p_cur, g) || !all_finite(s.q_cur, g)) throw InstabilityError(s.t_index, "benchmark run");
    r.rep_elapsed_sec.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  finalize(r);
  return r;
}

struct Candidate {
  int w = 0, h = 0;
  std::vector<double> points_per_sec;  // one per grid
  std::vector<double> noise;           // relative timing spread per grid
  double mean_points_per_sec = 0.0;
};

struct AutotuneResult {
  std::vector<Candidate> candidates;
  std::vector<std::array<int, 3>> grids;
  std::size_t winner = 0;
  double noise_band = 0.0;  // largest relative spread seen over all measurements

  const Candidate& best() const { return candidates.at(winner); }
};

inline std::vector<std::pair<int, int>> candidate_blocks(const std::vector<int>& ws, const std::vector<int>& hs) {
  if (ws.empty() || hs.empty()) throw ParameterError("autotune needs nonempty block ranges");
  std::vector<std::pair<int, int>> out;
  for (int w : ws)
    for (int h : hs) out.emplace_back(w, h);
  if (std::find(out.begin(), out.end(), std::pair{kDefaultBlockW, kDefaultBlockH}) == out.end()) {
    out.emplace_back(kDefaultBlockW, kDefaultBlockH);
  }
  return out;
}

/// Exhaustive sweep of blocked-kernel tile sizes over a set of problems.
/// Every candidate is measured with identical steps, warmup and repetition
/// count; the winner has the highest mean points/s over the grid set.
template <typename Real>
AutotuneResult autotune(const std::vector<const Problem<Real>*>& problems, SimConfig cfg, const std::vector<int>& ws,
                        const std::vector<int>& hs, long n_steps, long warmup = 1, int reps = kDefaultRepetitions) {
  if (problems.empty()) throw ParameterError("autotune needs at least one grid");
  cfg.kernel = KernelKind::blocked;
  AutotuneResult res;
  for (const auto* pb : problems) res.grids.push_back({pb->grid().nx, pb->grid().ny, pb->grid().nz});
  for (const auto& [w, h] : candidate_blocks(ws, hs)) {
    Candidate c;
    c.w = w;
    c.h = h;
    cfg.block_w = w;
    cfg.block_h = h;
    for (const auto* pb : problems) {
      SimConfig local = cfg;
      const Grid& g = pb->grid();
      local.source_pos = {g.nx / 2, g.ny / 2, g.nz / 2};
      const auto rep = measure(*pb, local, n_steps, warmup, reps);
      c.points_per_sec.push_back(rep.points_per_sec);
      c.noise.push_back(rep.noise);
      res.noise_band = std::max(res.noise_band, rep.noise);
    }
    double sum = 0.0;
    for (double v : c.points_per_sec) sum += v;
    c.mean_points_per_sec = sum / static_cast<double>(c.points_per_sec.size());
    res.candidates.push_back(std::move(c));
  }
  for (std::size_t i = 1; i < res.candidates.size(); ++i) {
    if (res.candidates[i].mean_points_per_sec > res.candidates[res.winner].mean_points_per_sec) res.winner = i;
  }
  return res;
}

struct ScalingRow {
  int threads = 1;
  double points_per_sec = 0.0;
  double speedup = 1.0;
  double efficiency = 1.0;  // speedup / threads
  bool oversubscribed = false;
  ThroughputReport report;
};

struct ScalingReport {
  std::string placement;
  int hardware_threads = 1;
  std::vector<ScalingRow> rows;
  std::vector<std::string> warnings;
};

/// One measured row per thread count; efficiency is relative to a
/// single-thread run (measured even when 1 is not requested).
template <typename Real>
ScalingReport scaling_report(const Problem<Real>& pb, SimConfig cfg, const std::vector<int>& thread_counts,
                             long n_steps, long warmup = 1, int reps = kDefaultRepetitions) {
  if (thread_counts.empty()) throw ParameterError("scaling report needs at least one thread count");
  for (int t : thread_counts)
    if (t < 1) throw ParameterError("thread counts must be >= 1");
  ScalingReport out;
  out.placement = to_string(cfg.placement);
  out.hardware_threads = hardware_threads();

  auto run_at = [&](int t) {
    SimConfig c = cfg;
    c.threads = t;
    return measure(pb, c, n_steps, warmup, reps);
  };
  const ThroughputReport base = run_at(1);
  for (int t : thread_counts) {
    ScalingRow row;
    row.threads = t;
    row.report = t == 1 ? base : run_at(t);
    row.points_per_sec = row.report.points_per_sec;
    row.speedup = row.points_per_sec / base.points_per_sec;
    row.efficiency = row.speedup / t;
    row.oversubscribed = t > out.hardware_threads;
    if (row.oversubscribed) {
      out.warnings.push_back(std::to_string(t) + " threads exceed the " + std::to_string(out.hardware_threads) +
                             " hardware threads available");
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace vti::bench
