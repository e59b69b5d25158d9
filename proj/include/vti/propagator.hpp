#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>

#include "vti/error.hpp"
#include "vti/grid.hpp"
#include "vti/kernels.hpp"
#include "vti/model.hpp"
#include "vti/state.hpp"
#include "vti/stencil.hpp"
#include "vti/threading.hpp"

namespace vti {

inline constexpr double kDefaultRickerFrequency = 15.0;
inline constexpr int kDefaultBlockW = 28;
inline constexpr int kDefaultBlockH = 20;
inline constexpr double kDefaultDtFraction = 0.9;

/// Ricker wavelet (1 - 2 pi^2 f^2 tau^2) exp(-pi^2 f^2 tau^2), tau = t - t0.
inline double ricker(double t, double f = kDefaultRickerFrequency, double t0 = 0.0) {
  const double a = std::numbers::pi * std::numbers::pi * f * f * (t - t0) * (t - t0);
  return (1.0 - 2.0 * a) * std::exp(-a);
}

enum class KernelKind { reference, blocked, column };
enum class Precision { single_precision, double_precision };

inline const char* to_string(KernelKind k) {
  switch (k) {
    case KernelKind::reference: return "reference";
    case KernelKind::column: return "column";
    default: return "blocked";
  }
}
inline KernelKind parse_kernel(const std::string& s) {
  if (s == "reference") return KernelKind::reference;
  if (s == "blocked") return KernelKind::blocked;
  if (s == "column") return KernelKind::column;
  throw ParameterError("unknown kernel '" + s + "' (expected reference|blocked|column)");
}
inline const char* to_string(Precision p) {
  return p == Precision::double_precision ? "double" : "single";
}
inline Precision parse_precision(const std::string& s) {
  if (s == "single") return Precision::single_precision;
  if (s == "double") return Precision::double_precision;
  throw ParameterError("unknown precision '" + s + "' (expected single|double)");
}

struct SimConfig {
  double dt = 0.0;
  long n_steps = 0;
  std::array<int, 3> source_pos{0, 0, 0};  // interior indices
  double f = kDefaultRickerFrequency;
  double t0 = 0.0;
  double amplitude = 1.0;
  bool source_normalize = false;  // divide by the cell volume h^2 dz_k
  bool source_both = false;       // test harness: inject into q as well
  KernelKind kernel = KernelKind::blocked;
  int block_w = kDefaultBlockW;  // along z
  int block_h = kDefaultBlockH;  // along y
  int tile_x = 32, tile_y = 8;   // column kernel
  int column_width = 1;
  int threads = 1;
  Placement placement = Placement::none;
  Precision precision = Precision::single_precision;
  int check_every = 0;  // non-finite scan cadence in steps, 0 = never
  bool allow_unstable_dt = false;

  void validate(const Grid& g) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt must be positive and finite");
    if (n_steps < 0) throw ParameterError("n_steps must be >= 0");
    if (block_w < 1 || block_h < 1) throw ParameterError("block extents must be >= 1");
    if (tile_x < 1 || tile_y < 1) throw ParameterError("column tile extents must be >= 1");
    if (column_width != 1 && column_width != 2) throw ParameterError("column_width must be 1 or 2");
    if (threads < 1) throw ParameterError("threads must be >= 1");
    if (check_every < 0) throw ParameterError("check_every must be >= 0");
    const auto& s = source_pos;
    if (s[0] < 0 || s[0] >= g.nx || s[1] < 0 || s[1] >= g.ny || s[2] < 0 || s[2] >= g.nz) {
      throw ParameterError("source position (" + std::to_string(s[0]) + "," + std::to_string(s[1]) + "," +
                           std::to_string(s[2]) + ") is outside the interior");
    }
  }
};

/// Everything a step needs besides the state.
template <typename Real>
struct Problem {
  EarthModel<Real> model;
  XYWeights wxy;
  ZWeights wz;
  KernelWeights<Real> kw;
  DampingProfile damping;

  Problem(EarthModel<Real> m, XYWeights xy, ZWeights z, DampingProfile d)
      : model(std::move(m)), wxy(std::move(xy)), wz(std::move(z)), kw(wxy, wz), damping(std::move(d)) {
    const Grid& g = model.grid;
    if (wxy.r_xy != g.pad_xy || wz.r_z != g.pad_z || wz.n_z != g.nz) {
      throw GeometryError("stencil radii / plane count do not match the grid padding");
    }
  }
  const Grid& grid() const noexcept { return model.grid; }
};

/// Upper bound on a stable dt from a Gershgorin bound on the spatial
/// operator's spectral radius (leapfrog needs dt^2 rho <= 4).
template <typename Real>
double stability_dt(const EarthModel<Real>& m, const XYWeights& wxy, const ZWeights& wz) {
  const Grid& g = m.grid;
  double s_xy = std::abs(wxy.w[0]);
  for (int l = 1; l <= wxy.r_xy; ++l) s_xy += 4.0 * std::abs(wxy.w[static_cast<std::size_t>(l)]);
  double s_z = 0.0;
  for (int k = 0; k < wz.n_z; ++k) {
    double row = 0.0;
    for (double w : wz.row(k)) row += std::abs(w);
    s_z = std::max(s_z, row);
  }
  double vh = 0.0, vv = 0.0;
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const auto pi = g.px(i), pj = g.py(j), pk = g.pz(k);
        vh = std::max({vh, static_cast<double>(m.vx2(pi, pj, pk)), static_cast<double>(m.vn2(pi, pj, pk))});
        vv = std::max(vv, static_cast<double>(m.vz2(pi, pj, pk)));
      }
  return 2.0 / std::sqrt(vh * s_xy / (wxy.h * wxy.h) + vv * s_z);
}

template <typename Real>
double stability_dt(const Problem<Real>& pb) {
  return stability_dt(pb.model, pb.wxy, pb.wz);
}

/// (F_p, F_q) at interior point (i, j, k), source excluded.
template <typename Real>
std::pair<Real, Real> rhs_point(const WaveState<Real>& s, const EarthModel<Real>& m, const KernelWeights<Real>& kw,
                                int i, int j, int k) {
  const Grid& g = m.grid;
  if (i < 0 || j < 0 || k < 0 || i >= g.nx || j >= g.ny || k >= g.nz) {
    throw IndexError("rhs_point outside the interior");
  }
  const std::ptrdiff_t idx = s.p_cur.index(g.px(i), g.py(j), g.pz(k));
  const Real* qc = s.q_cur.data();
  const std::ptrdiff_t sz = s.q_cur.plane_stride();
  const Real lap = detail::xy_stencil<Real>(s.p_cur.data() + idx, s.p_cur.row_stride(), kw.xy.data(), kw.r_xy);
  const Real dz = detail::z_stencil<Real>([&](int l) { return qc[idx + l * sz]; }, kw.z_row(k), kw.r_z);
  const auto f = detail::combine<Real>(lap, dz, kw.inv_h2, m.vx2.data()[idx], m.vn2.data()[idx], m.vz2.data()[idx]);
  return {f.fp, f.fq};
}

/// Zero-filled state whose pages are first touched by the worker that
/// owns them under the blocked kernel's static schedule.
template <typename Real>
WaveState<Real> make_state(const Grid& g, const SimConfig& cfg) {
  WaveState<Real> s(g, Array3D<Real>::Init::none);
  const BlockPlan plan(g, cfg.block_w, cfg.block_h);
  s.for_each_array([&](Array3D<Real>& a) {
#pragma omp parallel for num_threads(cfg.threads) schedule(static)
    for (int b = 0; b < plan.count(); ++b) {
      const int kb = (b / plan.nby) * plan.block_w;
      const int jb = (b % plan.nby) * plan.block_h;
      const int ke = std::min(kb + plan.block_w, g.nz);
      const int je = std::min(jb + plan.block_h, g.ny);
      for (int j = jb; j < je; ++j)
        for (int k = kb; k < ke; ++k) std::fill_n(a.row(g.py(j), g.pz(k)), a.row_stride(), Real(0));
    }
    // Remaining halo rows.
    for (std::ptrdiff_t k = 0; k < a.nz(); ++k)
      for (std::ptrdiff_t j = 0; j < a.ny(); ++j)
        if (k < g.pad_z || k >= g.pad_z + g.nz || j < g.pad_xy || j >= g.pad_xy + g.ny)
          std::fill_n(a.row(j, k), a.row_stride(), Real(0));
  });
  return s;
}

/// Run only the selected update kernel (p_next, q_next on the interior).
template <typename Real, typename Rec = NoRecord>
void apply_kernel(WaveState<Real>& s, const Problem<Real>& pb, const SimConfig& cfg, const Rec& rec = Rec{}) {
  const Real dt2 = static_cast<Real>(cfg.dt * cfg.dt);
  switch (cfg.kernel) {
    case KernelKind::reference:
      kernel_reference<Real, Real, Rec>(s, pb.model, pb.kw, dt2, rec);
      break;
    case KernelKind::blocked:
      kernel_blocked<Real, Rec>(s, pb.model, pb.kw, dt2, cfg.block_w, cfg.block_h, cfg.threads, rec);
      break;
    case KernelKind::column:
      kernel_column<Real, Rec>(s, pb.model, pb.kw, dt2, cfg.tile_x, cfg.tile_y, cfg.column_width, cfg.threads, rec);
      break;
  }
}

/// dt^2 s(t^n) scaled by amplitude (and optionally 1 / (h^2 dz_k)).
inline double source_increment(const SimConfig& cfg, const Grid& g, long n) {
  double v = cfg.dt * cfg.dt * cfg.amplitude * ricker(static_cast<double>(n) * cfg.dt, cfg.f, cfg.t0);
  if (cfg.source_normalize) {
    const std::size_t kp = static_cast<std::size_t>(g.pz(cfg.source_pos[2]));
    const double dz = 0.5 * (g.z_coords[kp + 1] - g.z_coords[kp - 1]);
    v /= g.h * g.h * dz;
  }
  return v;
}

template <typename Real>
bool all_finite(const Array3D<Real>& a, const Grid& g) {
  bool ok = true;
  for (int k = 0; k < g.nz && ok; ++k)
    for (int j = 0; j < g.ny && ok; ++j) {
      const Real* r = a.row(g.py(j), g.pz(k)) + g.pad_xy;
      for (int i = 0; i < g.nx; ++i) ok = ok && std::isfinite(r[i]);
    }
  return ok;
}

/// Advance by one step: kernel, source, damping of next/cur/prev, optional
/// finite check, then buffer rotation.
template <typename Real, typename Rec = NoRecord>
void step(WaveState<Real>& s, const Problem<Real>& pb, const SimConfig& cfg, const Rec& rec = Rec{}) {
  const Grid& g = pb.grid();
  apply_kernel(s, pb, cfg, rec);

  if (cfg.amplitude != 0.0) {
    const auto idx = s.p_next.index(g.px(cfg.source_pos[0]), g.py(cfg.source_pos[1]), g.pz(cfg.source_pos[2]));
    const Real inc = static_cast<Real>(source_increment(cfg, g, s.t_index));
    s.p_next.data()[idx] += inc;
    if (cfg.source_both) s.q_next.data()[idx] += inc;
  }

  if (pb.damping.enabled()) {
    for (Array3D<Real>* a : {&s.p_next, &s.p_cur, &s.p_prev, &s.q_next, &s.q_cur, &s.q_prev}) {
      apply_damping(*a, g, pb.damping, cfg.threads);
    }
  }

  const long done = s.t_index + 1;
  if (cfg.check_every > 0 && done % cfg.check_every == 0) {
    if (!all_finite(s.p_next, g)) throw InstabilityError(done, "p");
    if (!all_finite(s.q_next, g)) throw InstabilityError(done, "q");
  }
  s.rotate();
  s.t_index = done;
}

template <typename Real>
using StepObserver = std::function<void(const WaveState<Real>&)>;

/// Advance an existing state by cfg.n_steps; `after_step` sees the state
/// after every step (t_index already incremented).
template <typename Real>
void run(WaveState<Real>& s, const Problem<Real>& pb, const SimConfig& cfg, const StepObserver<Real>& after_step = {}) {
  cfg.validate(pb.grid());
  if (!cfg.allow_unstable_dt) {
    const double dt_max = stability_dt(pb);
    if (cfg.dt > dt_max) {
      throw ParameterError("dt " + std::to_string(cfg.dt) + " exceeds the stability estimate " +
                           std::to_string(dt_max) + " (set allow_unstable_dt to override)");
    }
  }
  apply_placement(cfg.placement, cfg.threads);
  for (long n = 0; n < cfg.n_steps; ++n) {
    step(s, pb, cfg);
    if (after_step) after_step(s);
  }
}

template <typename Real>
WaveState<Real> run(const Problem<Real>& pb, const SimConfig& cfg, const StepObserver<Real>& after_step = {}) {
  cfg.validate(pb.grid());
  WaveState<Real> s = make_state<Real>(pb.grid(), cfg);
  run(s, pb, cfg, after_step);
  return s;
}

}  // namespace vti
