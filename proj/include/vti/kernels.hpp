#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <memory>
#include <vector>

#include "vti/array3d.hpp"
#include "vti/grid.hpp"
#include "vti/model.hpp"
#include "vti/state.hpp"
#include "vti/stencil.hpp"

// Update kernels for one time step of the coupled p/q system.
//
// Every kernel evaluates, per interior point,
//
//   L  = (w0 p + sum_l w_l (p[x+l] + p[x-l]) + sum_l w_l (p[y+l] + p[y-l])) / h^2
//   D  = wz_0 q + sum_l (wz_+l q[z+l] + wz_-l q[z-l])
//   p' = 2 p - p_prev + dt^2 (vx2 L + vz2 D)
//   q' = 2 q - q_prev + dt^2 (vn2 L + vz2 D)
//
// in exactly this order (x pairs, then y pairs, then z; mirror partners
// summed first), so with contraction disabled the kernels agree bitwise.

namespace vti {

/// Stencil weights converted to simulation precision.
template <typename Real>
struct KernelWeights {
  int r_xy = 0, r_z = 0, n_z = 0;
  std::vector<Real> xy;  // r_xy + 1
  Real inv_h2 = 0;
  std::vector<Real> z;  // n_z rows of 2 r_z + 1

  KernelWeights() = default;
  KernelWeights(const XYWeights& wxy, const ZWeights& wz)
      : r_xy(wxy.r_xy), r_z(wz.r_z), n_z(wz.n_z), xy(wxy.w.begin(), wxy.w.end()),
        inv_h2(static_cast<Real>(1.0 / (wxy.h * wxy.h))), z(wz.w.begin(), wz.w.end()) {}

  const Real* z_row(std::ptrdiff_t k) const noexcept { return z.data() + k * (2 * r_z + 1); }
};

// Write instrumentation. The default recorder compiles away.
struct NoRecord {
  static constexpr bool active = false;
  void operator()(int /*field*/, std::ptrdiff_t /*idx*/) const noexcept {}
};

// Counts writes to p_next (field 0) and q_next (field 1) per padded index.
class WriteCounter {
 public:
  static constexpr bool active = true;
  explicit WriteCounter(std::size_t n) : n_(n), counts_(new std::atomic<int>[2 * n]) { reset(); }
  void reset() {
    for (std::size_t i = 0; i < 2 * n_; ++i) counts_[i].store(0, std::memory_order_relaxed);
  }
  void operator()(int field, std::ptrdiff_t idx) const noexcept {
    counts_[static_cast<std::size_t>(field) * n_ + static_cast<std::size_t>(idx)].fetch_add(
        1, std::memory_order_relaxed);
  }
  int count(int field, std::ptrdiff_t idx) const noexcept {
    return counts_[static_cast<std::size_t>(field) * n_ + static_cast<std::size_t>(idx)].load();
  }

 private:
  std::size_t n_;
  std::unique_ptr<std::atomic<int>[]> counts_;
};

namespace detail {

template <typename Acc, typename Real>
inline Acc xy_stencil(const Real* p, std::ptrdiff_t sy, const Real* w, int r) {
  Acc acc = Acc(w[0]) * Acc(p[0]);
  for (int l = 1; l <= r; ++l) acc += Acc(w[l]) * (Acc(p[l]) + Acc(p[-l]));
  for (int l = 1; l <= r; ++l) acc += Acc(w[l]) * (Acc(p[l * sy]) + Acc(p[-l * sy]));
  return acc;
}

// `q(l)` returns the value at depth offset l.
template <typename Acc, typename Real, typename Q>
inline Acc z_stencil(Q&& q, const Real* wrow, int r) {
  Acc acc = Acc(wrow[r]) * Acc(q(0));
  for (int l = 1; l <= r; ++l) acc += Acc(wrow[r + l]) * Acc(q(l)) + Acc(wrow[r - l]) * Acc(q(-l));
  return acc;
}

template <typename Acc>
struct PointRhs {
  Acc fp, fq;
};

template <typename Acc, typename Real>
inline PointRhs<Acc> combine(Acc lap, Acc dz, Real inv_h2, Real vx2, Real vn2, Real vz2) {
  const Acc l = lap * Acc(inv_h2);
  return {Acc(vx2) * l + Acc(vz2) * dz, Acc(vn2) * l + Acc(vz2) * dz};
}

template <typename Acc, typename Real>
inline Real advance(Real cur, Real prev, Real dt2, Acc f) {
  return static_cast<Real>(Acc(2) * Acc(cur) - Acc(prev) + Acc(dt2) * f);
}

}  // namespace detail

/// Naive single-threaded sweep over every interior point; the oracle for
/// the other kernels. `Acc` selects the accumulation precision.
template <typename Real, typename Acc = Real, typename Rec = NoRecord>
void kernel_reference(WaveState<Real>& s, const EarthModel<Real>& m, const KernelWeights<Real>& kw, Real dt2,
                      const Rec& rec = Rec{}) {
  const Grid& g = m.grid;
  const std::ptrdiff_t sy = s.p_cur.row_stride();
  const std::ptrdiff_t sz = s.p_cur.plane_stride();
  const Real* pc = s.p_cur.data();
  const Real* qc = s.q_cur.data();
  for (int k = 0; k < g.nz; ++k) {
    const Real* wz = kw.z_row(k);
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        const std::ptrdiff_t idx = s.p_cur.index(g.px(i), g.py(j), g.pz(k));
        const Acc lap = detail::xy_stencil<Acc>(pc + idx, sy, kw.xy.data(), kw.r_xy);
        const Acc dz = detail::z_stencil<Acc>([&](int l) { return qc[idx + l * sz]; }, wz, kw.r_z);
        const auto f = detail::combine<Acc>(lap, dz, kw.inv_h2, m.vx2.data()[idx], m.vn2.data()[idx],
                                            m.vz2.data()[idx]);
        s.p_next.data()[idx] = detail::advance<Acc>(pc[idx], s.p_prev.data()[idx], dt2, f.fp);
        s.q_next.data()[idx] = detail::advance<Acc>(qc[idx], s.q_prev.data()[idx], dt2, f.fq);
        if constexpr (Rec::active) {
          rec(0, idx);
          rec(1, idx);
        }
      }
    }
  }
}

/// Decomposition of the interior (z, y) index plane into block_w x block_h
/// tiles (block_w along z, block_h along y); x rows are never split.
struct BlockPlan {
  int block_w = 28, block_h = 20;
  int nbz = 0, nby = 0;

  BlockPlan(const Grid& g, int bw, int bh)
      : block_w(std::max(1, bw)), block_h(std::max(1, bh)), nbz((g.nz + block_w - 1) / block_w),
        nby((g.ny + block_h - 1) / block_h) {}
  int count() const noexcept { return nbz * nby; }
};

/// Cache-blocked kernel: each worker owns whole blocks and sweeps them with
/// y outermost, then z, then stride-1 x. Rows are evaluated as vector
/// loops over x with one scratch row per worker.
template <typename Real, typename Rec = NoRecord>
void kernel_blocked(WaveState<Real>& s, const EarthModel<Real>& m, const KernelWeights<Real>& kw, Real dt2,
                    int block_w, int block_h, int threads, const Rec& rec = Rec{}) {
  const Grid& g = m.grid;
  const BlockPlan plan(g, block_w, block_h);
  const std::ptrdiff_t sy = s.p_cur.row_stride();
  const std::ptrdiff_t sz = s.p_cur.plane_stride();
  const int nx = g.nx, rxy = kw.r_xy, rz = kw.r_z;

#pragma omp parallel num_threads(threads)
  {
    std::vector<Real> lap_row(static_cast<std::size_t>(nx)), dz_row(static_cast<std::size_t>(nx));
    Real* __restrict lap = lap_row.data();
    Real* __restrict dzr = dz_row.data();

#pragma omp for schedule(static)
    for (int b = 0; b < plan.count(); ++b) {
      const int kb = (b / plan.nby) * plan.block_w;
      const int jb = (b % plan.nby) * plan.block_h;
      const int ke = std::min(kb + plan.block_w, g.nz);
      const int je = std::min(jb + plan.block_h, g.ny);
      for (int j = jb; j < je; ++j) {
        for (int k = kb; k < ke; ++k) {
          const std::ptrdiff_t base = s.p_cur.index(g.px(0), g.py(j), g.pz(k));
          const Real* __restrict pc = s.p_cur.data() + base;
          const Real* __restrict qc = s.q_cur.data() + base;
          const Real* wxy = kw.xy.data();
          const Real* wz = kw.z_row(k);

          for (int i = 0; i < nx; ++i) lap[i] = wxy[0] * pc[i];
          for (int l = 1; l <= rxy; ++l) {
            const Real w = wxy[l];
            for (int i = 0; i < nx; ++i) lap[i] += w * (pc[i + l] + pc[i - l]);
          }
          for (int l = 1; l <= rxy; ++l) {
            const Real w = wxy[l];
            const Real* up = pc + l * sy;
            const Real* dn = pc - l * sy;
            for (int i = 0; i < nx; ++i) lap[i] += w * (up[i] + dn[i]);
          }
          {
            const Real w0 = wz[rz];
            for (int i = 0; i < nx; ++i) dzr[i] = w0 * qc[i];
          }
          for (int l = 1; l <= rz; ++l) {
            const Real wp = wz[rz + l], wm = wz[rz - l];
            const Real* up = qc + l * sz;
            const Real* dn = qc - l * sz;
            for (int i = 0; i < nx; ++i) dzr[i] += wp * up[i] + wm * dn[i];
          }

          const Real* __restrict vx2 = m.vx2.data() + base;
          const Real* __restrict vn2 = m.vn2.data() + base;
          const Real* __restrict vz2 = m.vz2.data() + base;
          const Real* __restrict pp = s.p_prev.data() + base;
          const Real* __restrict qp = s.q_prev.data() + base;
          Real* __restrict pn = s.p_next.data() + base;
          Real* __restrict qn = s.q_next.data() + base;
          const Real ih2 = kw.inv_h2;
#pragma omp simd
          for (int i = 0; i < nx; ++i) {
            const Real l = lap[i] * ih2;
            const Real fp = vx2[i] * l + vz2[i] * dzr[i];
            const Real fq = vn2[i] * l + vz2[i] * dzr[i];
            pn[i] = Real(2) * pc[i] - pp[i] + dt2 * fp;
            qn[i] = Real(2) * qc[i] - qp[i] + dt2 * fq;
          }
          if constexpr (Rec::active) {
            for (int i = 0; i < nx; ++i) {
              rec(0, base + i);
              rec(1, base + i);
            }
          }
        }
      }
    }
  }
}

/// Per-worker state of the column kernel: a staged p-plane tile with an
/// r_xy apron (the CPU stand-in for GPU shared memory) and a rolling window
/// of 2 r_z + 1 q planes for every column of the tile.
template <typename Real>
class ColumnTile {
 public:
  ColumnTile(const Grid& g, int r_xy, int r_z, int tile_x, int tile_y)
      : g_(&g), rxy_(r_xy), rz_(r_z), tx_(tile_x), ty_(tile_y), bx_(tile_x + 2 * r_xy),
        by_(tile_y + 2 * r_xy), len_(2 * r_z + 1),
        pbuf_(static_cast<std::size_t>(bx_) * static_cast<std::size_t>(by_)),
        window_(static_cast<std::size_t>(len_) * static_cast<std::size_t>(tx_) * static_cast<std::size_t>(ty_)) {}

  // Interior origin and clipped extent of the tile being processed.
  void reset(int i0, int j0) {
    i0_ = i0;
    j0_ = j0;
    nx_ = std::min(tx_, g_->nx - i0);
    ny_ = std::min(ty_, g_->ny - j0);
    loaded_ = 0;
  }
  int width() const noexcept { return nx_; }
  int height() const noexcept { return ny_; }

  // Copy plane k of p (interior depth), apron included, into the tile buffer.
  void stage_p(const Array3D<Real>& p, int k) {
    const std::ptrdiff_t pk = g_->pz(k);
    for (int jj = -rxy_; jj < ny_ + rxy_; ++jj) {
      const Real* src = p.row(g_->py(j0_ + jj), pk) + g_->px(i0_);
      Real* dst = &pbuf_[static_cast<std::size_t>((jj + rxy_) * bx_ + rxy_)];
      std::copy(src - rxy_, src + nx_ + rxy_, dst - rxy_);
    }
  }
  // Buffer value at tile-relative (ii, jj), ii in [-r_xy, width + r_xy).
  const Real& p_at(int ii, int jj) const {
    return pbuf_[static_cast<std::size_t>((jj + rxy_) * bx_ + ii + rxy_)];
  }
  const Real* p_ptr(int ii, int jj) const { return &p_at(ii, jj); }
  std::ptrdiff_t p_stride() const noexcept { return bx_; }

  // Load the 2 r_z planes above interior depth 0 (padded planes 0 .. 2 r_z - 1).
  void prime(const Array3D<Real>& q) {
    for (int d = 0; d < 2 * rz_; ++d) load_plane(q, d);
  }
  // Bring padded plane pz(k) + r_z into the window; afterwards q_at(., ., l)
  // returns q at interior depth k + l.
  void roll(const Array3D<Real>& q, int k) { load_plane(q, k + 2 * rz_); }
  int planes_loaded() const noexcept { return loaded_; }

  Real q_at(int ii, int jj, int k, int l) const {
    const int slot = (k + rz_ + l) % len_;
    return window_[(static_cast<std::size_t>(slot) * ty_ + jj) * tx_ + ii];
  }

 private:
  void load_plane(const Array3D<Real>& q, int padded_k) {
    const int slot = padded_k % len_;
    for (int jj = 0; jj < ny_; ++jj) {
      const Real* src = q.row(g_->py(j0_ + jj), padded_k) + g_->px(i0_);
      std::copy(src, src + nx_, &window_[(static_cast<std::size_t>(slot) * ty_ + jj) * tx_]);
    }
    ++loaded_;
  }

  const Grid* g_;
  int rxy_, rz_, tx_, ty_, bx_, by_, len_;
  int i0_ = 0, j0_ = 0, nx_ = 0, ny_ = 0, loaded_ = 0;
  std::vector<Real> pbuf_;
  std::vector<Real> window_;
};

/// Column kernel: the x-y plane is tiled into tile_x x tile_y columns; a
/// worker carries its tile from the top interior plane to the bottom,
/// staging p per depth and rolling q. With column_width 2 each lane
/// evaluates two neighbouring columns (in y) per inner iteration.
template <typename Real, typename Rec = NoRecord>
void kernel_column(WaveState<Real>& s, const EarthModel<Real>& m, const KernelWeights<Real>& kw, Real dt2,
                   int tile_x, int tile_y, int column_width, int threads, const Rec& rec = Rec{}) {
  const Grid& g = m.grid;
  tile_x = std::max(1, tile_x);
  tile_y = std::max(1, tile_y);
  const int cw = std::clamp(column_width, 1, 2);
  const int ntx = (g.nx + tile_x - 1) / tile_x;
  const int nty = (g.ny + tile_y - 1) / tile_y;

#pragma omp parallel num_threads(threads)
  {
    ColumnTile<Real> tile(g, kw.r_xy, kw.r_z, tile_x, tile_y);

#pragma omp for schedule(static)
    for (int t = 0; t < ntx * nty; ++t) {
      const int i0 = (t % ntx) * tile_x;
      const int j0 = (t / ntx) * tile_y;
      tile.reset(i0, j0);
      tile.prime(s.q_cur);
      const int nlane = (tile.height() + cw - 1) / cw;
      for (int k = 0; k < g.nz; ++k) {
        tile.stage_p(s.p_cur, k);
        tile.roll(s.q_cur, k);
        const Real* wz = kw.z_row(k);
        for (int lane = 0; lane < nlane; ++lane) {
          const int jlo = lane * cw;
          const int jhi = std::min(jlo + cw, tile.height());
          for (int ii = 0; ii < tile.width(); ++ii) {
            for (int jj = jlo; jj < jhi; ++jj) {
              const std::ptrdiff_t idx = s.p_cur.index(g.px(i0 + ii), g.py(j0 + jj), g.pz(k));
              const Real lap = detail::xy_stencil<Real>(tile.p_ptr(ii, jj), tile.p_stride(), kw.xy.data(), kw.r_xy);
              const Real dz = detail::z_stencil<Real>([&](int l) { return tile.q_at(ii, jj, k, l); }, wz, kw.r_z);
              const auto f = detail::combine<Real>(lap, dz, kw.inv_h2, m.vx2.data()[idx], m.vn2.data()[idx],
                                                   m.vz2.data()[idx]);
              s.p_next.data()[idx] = detail::advance<Real>(tile.p_at(ii, jj), s.p_prev.data()[idx], dt2, f.fp);
              s.q_next.data()[idx] =
                  detail::advance<Real>(tile.q_at(ii, jj, k, 0), s.q_prev.data()[idx], dt2, f.fq);
              if constexpr (Rec::active) {
                rec(0, idx);
                rec(1, idx);
              }
            }
          }
        }
      }
    }
  }
}

}  // namespace vti
