#pragma once

#include <cstddef>
#include <utility>

#include "vti/array3d.hpp"
#include "vti/grid.hpp"

namespace vti {

/// Three time levels of p and q on the padded grid.
template <typename Real>
struct WaveState {
  Array3D<Real> p_prev, p_cur, p_next;
  Array3D<Real> q_prev, q_cur, q_next;
  long t_index = 0;

  WaveState() = default;
  explicit WaveState(const Grid& g,
                     typename Array3D<Real>::Init init = Array3D<Real>::Init::zero)
      : p_prev(g.make_array<Real>(init)), p_cur(g.make_array<Real>(init)), p_next(g.make_array<Real>(init)),
        q_prev(g.make_array<Real>(init)), q_cur(g.make_array<Real>(init)), q_next(g.make_array<Real>(init)) {}

  // next -> cur -> prev; the old prev becomes scratch for the next step.
  void rotate() noexcept {
    std::swap(p_prev, p_cur);
    std::swap(p_cur, p_next);
    std::swap(q_prev, q_cur);
    std::swap(q_cur, q_next);
  }

  template <typename F>
  void for_each_array(F&& f) {
    f(p_prev), f(p_cur), f(p_next), f(q_prev), f(q_cur), f(q_next);
  }
  template <typename F>
  void for_each_array(F&& f) const {
    f(p_prev), f(p_cur), f(p_next), f(q_prev), f(q_cur), f(q_next);
  }
};

/// Zero every non-interior point of `a` (halo rings, halo planes and the
/// row-alignment tail).
template <typename T>
void zero_halo(Array3D<T>& a, const Grid& g) {
  const std::ptrdiff_t x0 = g.pad_xy, x1 = g.pad_xy + g.nx;
  const std::ptrdiff_t y0 = g.pad_xy, y1 = g.pad_xy + g.ny;
  const std::ptrdiff_t z0 = g.pad_z, z1 = g.pad_z + g.nz;
  for (std::ptrdiff_t k = 0; k < a.nz(); ++k) {
    for (std::ptrdiff_t j = 0; j < a.ny(); ++j) {
      T* r = a.row(j, k);
      if (k < z0 || k >= z1 || j < y0 || j >= y1) {
        std::fill_n(r, a.row_stride(), T{});
      } else {
        std::fill(r, r + x0, T{});
        std::fill(r + x1, r + a.row_stride(), T{});
      }
    }
  }
}

template <typename Real>
void zero_exterior(WaveState<Real>& s, const Grid& g) {
  s.for_each_array([&](Array3D<Real>& a) { zero_halo(a, g); });
}

/// True when every non-interior value of `a` is exactly zero.
template <typename T>
bool halo_is_zero(const Array3D<T>& a, const Grid& g) {
  for (std::ptrdiff_t k = 0; k < a.nz(); ++k)
    for (std::ptrdiff_t j = 0; j < a.ny(); ++j)
      for (std::ptrdiff_t i = 0; i < a.row_stride(); ++i)
        if (!g.is_interior_padded(i, j, k) && a.data()[a.index(i, j, k)] != T{}) return false;
  return true;
}

}  // namespace vti
