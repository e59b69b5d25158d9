#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vti/bench.hpp"
#include "vti/config.hpp"
#include "vti/io.hpp"
#include "vti/perfmodel.hpp"
#include "vti/propagator.hpp"
#include "vti/stencil.hpp"

namespace vti::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int { kOk = 0, kValidation = 2, kInstability = 3, kIo = 4 };

// Runs `body`, reporting library errors on `err` and mapping them to the
// documented exit statuses.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const InstabilityError& e) {
    err << "error: " << e.what() << '\n';
    return kInstability;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
}

inline void emit(const json& j, const std::optional<fs::path>& out_path, std::ostream& out) {
  if (out_path) {
    io::write_json(*out_path, j);
  } else {
    out << j.dump(2) << '\n';
  }
}

template <typename Real>
json field_norms(const Array3D<Real>& a, const Grid& g) {
  double l2 = 0.0, mx = 0.0;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double v = a(g.px(i), g.py(j), g.pz(k));
        l2 += v * v;
        mx = std::max(mx, std::abs(v));
      }
  return {{"l2", std::sqrt(l2)}, {"max_abs", mx}};
}

// ---------------------------------------------------------------------------
// run

template <typename Real>
int run_with(config::RunConfig& c, std::ostream& out) {
  Problem<Real> pb = config::build_problem<Real>(c);
  const Grid& g = pb.grid();
  const double dt_max = stability_dt(pb);
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (ec) throw IoError(c.output_dir.string(), "cannot create output directory: " + ec.message());

  StepObserver<Real> observer;
  if (c.snapshots.every > 0) {
    observer = [&](const WaveState<Real>& s) {
      if (c.snapshots.due(s.t_index)) io::write_snapshot(s, g, c.snapshots, c.sim.dt);
    };
  }
  const auto t0 = std::chrono::steady_clock::now();
  const WaveState<Real> s = run(pb, c.sim, observer);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json summary{{"steps", s.t_index},
               {"dt", c.sim.dt},
               {"dt_auto", c.dt_auto},
               {"stability_dt", dt_max},
               {"stability_margin", c.sim.dt / dt_max},
               {"grid", {{"nx", g.nx}, {"ny", g.ny}, {"nz", g.nz}, {"h", g.h}}},
               {"radii", {{"r_xy", pb.kw.r_xy}, {"r_z", pb.kw.r_z}}},
               {"kernel", to_string(c.sim.kernel)},
               {"threads", c.sim.threads},
               {"placement", to_string(c.sim.placement)},
               {"precision", to_string(c.sim.precision)},
               {"aniso_warnings", pb.model.aniso_warnings},
               {"elapsed_sec", elapsed},
               {"final", {{"p", field_norms(s.p_cur, g)}, {"q", field_norms(s.q_cur, g)}}}};
  io::write_json(c.summary_path, summary);
  out << summary.dump(2) << '\n';
  return kOk;
}

inline int cmd_run(const fs::path& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    config::RunConfig c = config::load(config_path);
    config::apply_env_overrides(c);
    return c.sim.precision == Precision::double_precision ? run_with<double>(c, out) : run_with<float>(c, out);
  });
}

// ---------------------------------------------------------------------------
// shared benchmark problem

struct SyntheticProblem {
  int nx = 128, ny = 128, nz = 128;
  double h = 10.0, dz = 10.0;
  double vz = 3000.0, eps = 0.24, delta = 0.1;
  int r_xy = bench::kBenchRxy, r_z = bench::kBenchRz;
  int damping_width = kDefaultDampingWidth;
  double damping_alpha = kDefaultDampingAlpha;
};

template <typename Real>
Problem<Real> make_synthetic(const SyntheticProblem& sp) {
  const Grid g = Grid::uniform(sp.nx, sp.ny, sp.nz, sp.h, sp.dz, sp.r_xy, sp.r_z);
  const int width = 2 * sp.damping_width < std::min({sp.nx, sp.ny, sp.nz}) ? sp.damping_width : 0;
  return Problem<Real>(constant_model<Real>(g, sp.vz, sp.eps, sp.delta), make_xy_weights(sp.r_xy, sp.h),
                       make_z_weights(g.z_coords, sp.r_z), build_damping(g, width, sp.damping_alpha));
}

inline std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
  std::vector<int> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stoi(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ValidationError(what, "'" + tok + "' is not an integer");
    }
  }
  if (v.empty()) throw ValidationError(what, "empty list");
  return v;
}

inline std::array<int, 3> parse_dims(const std::string& s) {
  std::string t = s;
  for (char& ch : t)
    if (ch == 'x' || ch == 'X') ch = ',';
  const auto v = parse_int_list(t, "grid '" + s + "'");
  if (v.size() != 3 || v[0] < 1 || v[1] < 1 || v[2] < 1) throw ValidationError("grids", "'" + s + "' is not NXxNYxNZ");
  return {v[0], v[1], v[2]};
}

inline json to_json(const bench::ThroughputReport& r) {
  return {{"grid", {r.nx, r.ny, r.nz}},
          {"n_steps", r.n_steps},
          {"warmup_steps", r.warmup_steps},
          {"kernel", r.kernel},
          {"precision", r.precision},
          {"placement", r.placement},
          {"threads", r.threads},
          {"block", {r.block_w, r.block_h}},
          {"tile", {r.tile_x, r.tile_y}},
          {"column_width", r.column_width},
          {"repetitions", r.repetitions},
          {"rep_elapsed_sec", r.rep_elapsed_sec},
          {"elapsed_sec", r.elapsed_sec},
          {"sweeps_per_sec", r.sweeps_per_sec},
          {"points_per_sec", r.points_per_sec},
          {"flops_per_point", r.flops_per_point},
          {"modeled_flops_per_sec", r.modeled_flops_per_sec},
          {"noise", r.noise},
          {"timestamp", r.timestamp}};
}

inline json to_json(const bench::ScalingReport& s) {
  json rows = json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"threads", r.threads},
                    {"points_per_sec", r.points_per_sec},
                    {"speedup", r.speedup},
                    {"efficiency", r.efficiency},
                    {"oversubscribed", r.oversubscribed},
                    {"report", to_json(r.report)}});
  }
  return {{"placement", s.placement}, {"hardware_threads", s.hardware_threads}, {"rows", rows},
          {"warnings", s.warnings}};
}

inline std::string scaling_csv(const bench::ScalingReport& s) {
  std::ostringstream os;
  os.precision(17);
  os << "threads,points_per_sec,speedup,efficiency,placement\n";
  for (const auto& r : s.rows) {
    os << r.threads << ',' << r.points_per_sec << ',' << r.speedup << ',' << r.efficiency << ',' << s.placement
       << '\n';
  }
  return os.str();
}

inline json to_json(const bench::AutotuneResult& a) {
  json cands = json::array();
  for (const auto& c : a.candidates) {
    cands.push_back({{"block", {c.w, c.h}},
                     {"points_per_sec", c.points_per_sec},
                     {"noise", c.noise},
                     {"mean_points_per_sec", c.mean_points_per_sec}});
  }
  const auto& w = a.best();
  return {{"grids", a.grids},
          {"candidates", cands},
          {"winner", {{"block", {w.w, w.h}}, {"mean_points_per_sec", w.mean_points_per_sec}}},
          {"noise_band", a.noise_band}};
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  SyntheticProblem problem;
  std::string kernel = "blocked";
  std::string precision = "single";
  std::string placement = "none";
  int threads = 1;
  int block_w = kDefaultBlockW, block_h = kDefaultBlockH;
  int tile_x = 32, tile_y = 8, column_width = 1;
  long steps = 20, warmup = 2;
  int reps = bench::kDefaultRepetitions;
  std::string scaling;  // comma list of thread counts
  std::optional<fs::path> out, csv;
  double peak_flops = 0.0, peak_bw = 0.0;
};

inline SimConfig bench_sim(const BenchArgs& a) {
  SimConfig c;
  c.kernel = parse_kernel(a.kernel);
  c.precision = parse_precision(a.precision);
  c.placement = parse_placement(a.placement);
  c.threads = a.threads;
  c.block_w = a.block_w;
  c.block_h = a.block_h;
  c.tile_x = a.tile_x;
  c.tile_y = a.tile_y;
  c.column_width = a.column_width;
  c.source_pos = {a.problem.nx / 2, a.problem.ny / 2, a.problem.nz / 2};
  c.t0 = 1.0 / c.f;
  if (const char* t = std::getenv("VTI_THREADS"); t && *t) c.threads = std::max(1, std::atoi(t));
  if (const char* p = std::getenv("VTI_PLACEMENT"); p && *p) c.placement = parse_placement(p);
  return c;
}

template <typename Real>
int bench_with(const BenchArgs& a, std::ostream& out) {
  Problem<Real> pb = make_synthetic<Real>(a.problem);
  SimConfig cfg = bench_sim(a);
  cfg.dt = kDefaultDtFraction * stability_dt(pb);
  json j;
  if (!a.scaling.empty()) {
    const auto counts = parse_int_list(a.scaling, "scaling");
    const auto rep = bench::scaling_report(pb, cfg, counts, a.steps, a.warmup, a.reps);
    j = to_json(rep);
    if (a.csv) {
      std::ofstream f(*a.csv);
      if (!f) throw IoError(a.csv->string(), "cannot open for writing");
      f << scaling_csv(rep);
    }
  } else {
    const auto rep = bench::measure(pb, cfg, a.steps, a.warmup, a.reps);
    j = to_json(rep);
    if (a.peak_flops > 0.0 && a.peak_bw > 0.0) {
      const auto rf = perf::peak_fraction(rep.points_per_sec, rep.flops_per_point, a.peak_flops, a.peak_bw,
                                          static_cast<int>(sizeof(Real)));
      j["roofline"] = {{"achieved_flops", rf.achieved_flops},
                       {"fraction_of_peak", rf.fraction_of_peak},
                       {"ci", rf.ci},
                       {"attainable_fraction", rf.attainable_fraction}};
    }
  }
  emit(j, a.out, out);
  return kOk;
}

inline int cmd_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    return parse_precision(a.precision) == Precision::double_precision ? bench_with<double>(a, out)
                                                                        : bench_with<float>(a, out);
  });
}

// ---------------------------------------------------------------------------
// autotune

struct AutotuneArgs {
  SyntheticProblem problem;
  std::string grids = "64x64x64,96x80x72";
  std::string ws = "8,16,28,32", hs = "8,16,20,32";
  std::string precision = "single";
  std::string placement = "none";
  int threads = 1;
  long steps = 5, warmup = 1;
  int reps = bench::kDefaultRepetitions;
  std::optional<fs::path> out;
};

template <typename Real>
int autotune_with(const AutotuneArgs& a, std::ostream& out) {
  std::vector<Problem<Real>> problems;
  for (std::string_view rest = a.grids; !rest.empty();) {
    const auto comma = rest.find(',');
    const auto dims = parse_dims(std::string(rest.substr(0, comma)));
    SyntheticProblem sp = a.problem;
    sp.nx = dims[0];
    sp.ny = dims[1];
    sp.nz = dims[2];
    problems.push_back(make_synthetic<Real>(sp));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  std::vector<const Problem<Real>*> ptrs;
  for (const auto& p : problems) ptrs.push_back(&p);
  SimConfig cfg;
  cfg.threads = a.threads;
  cfg.placement = parse_placement(a.placement);
  if (const char* t = std::getenv("VTI_THREADS"); t && *t) cfg.threads = std::max(1, std::atoi(t));
  if (const char* p = std::getenv("VTI_PLACEMENT"); p && *p) cfg.placement = parse_placement(p);
  cfg.t0 = 1.0 / cfg.f;
  double dt = INFINITY;
  for (const auto& p : problems) dt = std::min(dt, kDefaultDtFraction * stability_dt(p));
  cfg.dt = dt;
  const auto res = bench::autotune(ptrs, cfg, parse_int_list(a.ws, "w"), parse_int_list(a.hs, "h"), a.steps,
                                   a.warmup, a.reps);
  emit(to_json(res), a.out, out);
  return kOk;
}

inline int cmd_autotune(const AutotuneArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    return parse_precision(a.precision) == Precision::double_precision ? autotune_with<double>(a, out)
                                                                        : autotune_with<float>(a, out);
  });
}

// ---------------------------------------------------------------------------
// perfmodel

struct PerfmodelArgs {
  int r_xy = bench::kBenchRxy, r_z = bench::kBenchRz;
  std::string precision = "single";
  double modes = 0.0, c_p = 1.0;
  double peak_flops = 666e9, peak_bw = 102.4e9;
  double measured_points_per_sec = 0.0;
  std::optional<fs::path> out;
};

inline json perfmodel_json(const PerfmodelArgs& a) {
  const int bytes = parse_precision(a.precision) == Precision::double_precision ? 8 : 4;
  const auto ci = perf::ci_estimate(a.r_xy, a.r_z, bytes);
  json j{{"r_xy", ci.r_xy},
         {"r_z", ci.r_z},
         {"bytes_per_value", ci.bytes_per_value},
         {"flops_per_point", ci.flops_per_point},
         {"ci_pessimistic", ci.ci_pessimistic},
         {"ci_optimistic", ci.ci_optimistic},
         {"ci_optimistic_approx", ci.ci_optimistic_approx}};
  const auto rf = perf::peak_fraction(a.measured_points_per_sec, ci.flops_per_point, a.peak_flops, a.peak_bw, bytes);
  j["roofline"] = {{"peak_flops", a.peak_flops},
                   {"peak_bw", a.peak_bw},
                   {"measured_points_per_sec", a.measured_points_per_sec},
                   {"achieved_flops", rf.achieved_flops},
                   {"fraction_of_peak", rf.fraction_of_peak},
                   {"attainable_fraction", rf.attainable_fraction}};
  if (a.modes >= 1.0) {
    j["resolution"] = {{"modes", a.modes},
                       {"c_p", a.c_p},
                       {"points_r_xy", perf::resolution_points(a.modes, a.r_xy, a.c_p)},
                       {"points_r_z", perf::resolution_points(a.modes, a.r_z, a.c_p)}};
  }
  return j;
}

inline int cmd_perfmodel(const PerfmodelArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    emit(perfmodel_json(a), a.out, out);
    return int(kOk);
  });
}

// ---------------------------------------------------------------------------
// weights

struct WeightsArgs {
  int r_xy = 0;
  double h = 1.0;
  int r_z = 0;
  double dz = 1.0;
  int nz = 1;
  std::optional<fs::path> z_coords_file;  // whitespace-separated depths
  std::optional<fs::path> out;
};

inline json weights_json(const WeightsArgs& a) {
  json j = json::object();
  if (a.r_xy > 0) {
    const auto w = make_xy_weights(a.r_xy, a.h);
    j["xy"] = {{"r_xy", w.r_xy}, {"h", w.h}, {"w", w.w}};
  }
  if (a.r_z > 0) {
    std::vector<double> z;
    if (a.z_coords_file) {
      for (const auto& row : io::read_weight_rows(*a.z_coords_file)) z.insert(z.end(), row.begin(), row.end());
    } else {
      if (a.nz < 1) throw ParameterError("nz must be >= 1");
      for (int k = 0; k < a.nz + 2 * a.r_z; ++k) z.push_back((k - a.r_z) * a.dz);
    }
    const auto w = make_z_weights(z, a.r_z);
    json rows = json::array();
    for (int k = 0; k < w.n_z; ++k) rows.push_back(std::vector<double>(w.row(k).begin(), w.row(k).end()));
    j["z"] = {{"r_z", w.r_z}, {"n_z", w.n_z}, {"z_coords", w.z_coords}, {"rows", rows}};
  }
  if (j.empty()) throw ParameterError("weights needs --rxy and/or --rz");
  return j;
}

inline int cmd_weights(const WeightsArgs& a, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    emit(weights_json(a), a.out, out);
    return int(kOk);
  });
}

}  // namespace vti::cli
