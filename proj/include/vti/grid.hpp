#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "vti/array3d.hpp"
#include "vti/error.hpp"

namespace vti {

inline constexpr std::ptrdiff_t kRowAlignPoints = 16;

// Structured grid: uniform spacing h in x and y, arbitrary node depths in z.
// The interior is surrounded by a halo of pad_xy points in x/y and pad_z
// planes in z; rows are then padded in x to a multiple of kRowAlignPoints.
struct Grid {
  int nx = 0, ny = 0, nz = 0;
  double h = 0.0;
  // nz + 2*pad_z node depths, halo planes included, strictly increasing.
  std::vector<double> z_coords;
  int pad_xy = 0;
  int pad_z = 0;
  int x_stride_pad = 0;

  static Grid make(int nx, int ny, int nz, double h, std::vector<double> z_coords, int r_xy,
                   int r_z) {
    if (nx < 1 || ny < 1 || nz < 1) throw ParameterError("grid extents must be positive");
    if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("grid spacing h must be positive");
    if (r_xy < 1 || r_z < 1) throw ParameterError("stencil radii must be >= 1");
    if (z_coords.size() != static_cast<std::size_t>(nz + 2 * r_z)) {
      throw GeometryError("z_coords must hold nz + 2*r_z = " + std::to_string(nz + 2 * r_z) +
                          " nodes, got " + std::to_string(z_coords.size()));
    }
    for (std::size_t k = 1; k < z_coords.size(); ++k) {
      if (!(z_coords[k] > z_coords[k - 1])) throw GeometryError("z_coords must be strictly increasing");
    }
    Grid g;
    g.nx = nx;
    g.ny = ny;
    g.nz = nz;
    g.h = h;
    g.z_coords = std::move(z_coords);
    g.pad_xy = r_xy;
    g.pad_z = r_z;
    const std::ptrdiff_t raw = nx + 2 * r_xy;
    const std::ptrdiff_t stride = (raw + kRowAlignPoints - 1) / kRowAlignPoints * kRowAlignPoints;
    g.x_stride_pad = static_cast<int>(stride - raw);
    return g;
  }

  // Uniform z spacing dz; interior plane k sits at depth k*dz.
  static Grid uniform(int nx, int ny, int nz, double h, double dz, int r_xy, int r_z) {
    if (!(dz > 0.0)) throw ParameterError("dz must be positive");
    if (nz < 1 || r_z < 1) throw ParameterError("nz and r_z must be >= 1");
    std::vector<double> z(static_cast<std::size_t>(nz + 2 * r_z));
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = (static_cast<double>(k) - r_z) * dz;
    return make(nx, ny, nz, h, std::move(z), r_xy, r_z);
  }

  std::ptrdiff_t padded_nx() const noexcept { return nx + 2 * pad_xy; }
  std::ptrdiff_t padded_ny() const noexcept { return ny + 2 * pad_xy; }
  std::ptrdiff_t padded_nz() const noexcept { return nz + 2 * pad_z; }
  std::ptrdiff_t row_stride() const noexcept { return padded_nx() + x_stride_pad; }
  std::size_t interior_points() const noexcept {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }

  // Interior index (i, j, k) -> padded index.
  std::ptrdiff_t px(std::ptrdiff_t i) const noexcept { return i + pad_xy; }
  std::ptrdiff_t py(std::ptrdiff_t j) const noexcept { return j + pad_xy; }
  std::ptrdiff_t pz(std::ptrdiff_t k) const noexcept { return k + pad_z; }

  bool is_interior_padded(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) const noexcept {
    return i >= pad_xy && i < pad_xy + nx && j >= pad_xy && j < pad_xy + ny && k >= pad_z &&
           k < pad_z + nz;
  }

  template <typename T>
  Array3D<T> make_array(typename Array3D<T>::Init init = Array3D<T>::Init::zero) const {
    return Array3D<T>(padded_nx(), padded_ny(), padded_nz(), row_stride(), init);
  }

  template <typename T>
  bool matches(const Array3D<T>& a) const noexcept {
    return a.nx() == padded_nx() && a.ny() == padded_ny() && a.nz() == padded_nz() &&
           a.row_stride() == row_stride();
  }
};

}  // namespace vti
