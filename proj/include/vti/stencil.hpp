#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vti/array3d.hpp"
#include "vti/error.hpp"

namespace vti {

// Largest tolerated ratio between the widest and the narrowest gap inside a
// single z stencil before the weight solve is considered meaningless.
inline constexpr double kMaxNodeSpreadRatio = 1e6;

/// Weights of the symmetric x-y Laplacian, for the h^2-scaled operator
/// h^2 (d_xx + d_yy). `w[0]` multiplies the centre point, `w[l]` the four
/// neighbours at distance l.
struct XYWeights {
  int r_xy = 0;
  std::vector<double> w;
  double h = 0.0;

  /// 1D second-derivative weight at offset l for unit spacing.
  double axis_weight(int l) const { return l == 0 ? w[0] / 2.0 : w[static_cast<std::size_t>(std::abs(l))]; }
};

/// Per-plane weights of the (possibly nonuniform) z second derivative.
/// Row k applies to interior plane k over nodes z_coords[k .. k + 2 r_z];
/// the spacing is absorbed so the rows carry units of 1/m^2.
struct ZWeights {
  int r_z = 0;
  int n_z = 0;
  std::vector<double> w;  // n_z rows of 2 r_z + 1, row-major
  std::vector<double> z_coords;

  int row_length() const noexcept { return 2 * r_z + 1; }
  std::span<const double> row(int k) const {
    return {w.data() + static_cast<std::size_t>(k) * row_length(), static_cast<std::size_t>(row_length())};
  }
  /// Weight on node k + l, l in [-r_z, r_z].
  double at(int k, int l) const { return w[static_cast<std::size_t>(k) * row_length() + (l + r_z)]; }
};

/// Finite-difference weights for derivatives 0..max_order at `x0` on
/// arbitrary distinct nodes (Fornberg's recursion). Returns
/// weights[m][node].
inline std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> nodes,
                                                         int max_order) {
  const int n = static_cast<int>(nodes.size());
  std::vector<std::vector<double>> c(static_cast<std::size_t>(max_order + 1),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  if (n == 0) return c;
  double c1 = 1.0;
  double c4 = nodes[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        }
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      }
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

/// Maximal-order (order 2 r_xy) central weights for the h^2-scaled 2D
/// Laplacian.
inline XYWeights make_xy_weights(int r_xy, double h) {
  if (r_xy < 1) throw ParameterError("r_xy must be >= 1, got " + std::to_string(r_xy));
  if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("h must be positive");
  std::vector<double> nodes(static_cast<std::size_t>(2 * r_xy + 1));
  for (int l = -r_xy; l <= r_xy; ++l) nodes[static_cast<std::size_t>(l + r_xy)] = l;
  const auto c = fornberg_weights(0.0, nodes, 2);
  XYWeights out;
  out.r_xy = r_xy;
  out.h = h;
  out.w.resize(static_cast<std::size_t>(r_xy + 1));
  out.w[0] = 2.0 * c[2][static_cast<std::size_t>(r_xy)];
  for (int l = 1; l <= r_xy; ++l) {
    // Average the two mirror images so the row is symmetric to the last bit.
    out.w[static_cast<std::size_t>(l)] =
        0.5 * (c[2][static_cast<std::size_t>(r_xy + l)] + c[2][static_cast<std::size_t>(r_xy - l)]);
  }
  return out;
}

namespace detail {

inline void check_z_nodes(std::span<const double> z, int r_z) {
  if (r_z < 1) throw ParameterError("r_z must be >= 1, got " + std::to_string(r_z));
  if (z.size() < static_cast<std::size_t>(2 * r_z + 1)) {
    throw ParameterError("need at least 2*r_z+1 = " + std::to_string(2 * r_z + 1) + " z nodes, got " +
                         std::to_string(z.size()));
  }
  for (std::size_t k = 1; k < z.size(); ++k) {
    if (!(z[k] > z[k - 1]) || !std::isfinite(z[k])) {
      throw GeometryError("z_coords not strictly increasing at index " + std::to_string(k));
    }
  }
}

}  // namespace detail

/// Exact second-derivative weights on the 2 r_z + 1 nodes around every
/// interior plane. Always solved in double precision.
inline ZWeights make_z_weights(std::span<const double> z_coords, int r_z) {
  detail::check_z_nodes(z_coords, r_z);
  ZWeights out;
  out.r_z = r_z;
  out.n_z = static_cast<int>(z_coords.size()) - 2 * r_z;
  out.z_coords.assign(z_coords.begin(), z_coords.end());
  const int len = out.row_length();
  out.w.resize(static_cast<std::size_t>(out.n_z) * len);

  std::vector<double> local(static_cast<std::size_t>(len));
  for (int k = 0; k < out.n_z; ++k) {
    const double centre = z_coords[static_cast<std::size_t>(k + r_z)];
    double gmin = INFINITY, gmax = 0.0;
    for (int l = 0; l < len; ++l) {
      local[static_cast<std::size_t>(l)] = z_coords[static_cast<std::size_t>(k + l)] - centre;
      if (l > 0) {
        const double gap = local[static_cast<std::size_t>(l)] - local[static_cast<std::size_t>(l - 1)];
        gmin = std::min(gmin, gap);
        gmax = std::max(gmax, gap);
      }
    }
    if (gmax / gmin > kMaxNodeSpreadRatio) {
      throw GeometryError("z node spacing ratio " + std::to_string(gmax / gmin) + " at plane " +
                          std::to_string(k) + " exceeds " + std::to_string(kMaxNodeSpreadRatio));
    }
    const auto c = fornberg_weights(0.0, local, 2);
    std::copy(c[2].begin(), c[2].end(), out.w.begin() + static_cast<std::ptrdiff_t>(k) * len);
  }
  return out;
}

inline ZWeights make_z_weights(const std::vector<double>& z_coords, int r_z) {
  return make_z_weights(std::span<const double>(z_coords), r_z);
}

/// Wraps a user-supplied x-y row (e.g. dispersion-tuned weights).
inline XYWeights xy_weights_from_row(std::vector<double> row, int r_xy, double h) {
  if (r_xy < 1) throw ParameterError("r_xy must be >= 1");
  if (row.size() != static_cast<std::size_t>(r_xy + 1)) {
    throw ParameterError("x-y weight row must hold r_xy+1 = " + std::to_string(r_xy + 1) +
                         " values, got " + std::to_string(row.size()));
  }
  return XYWeights{r_xy, std::move(row), h};
}

inline ZWeights z_weights_from_rows(const std::vector<std::vector<double>>& rows,
                                    std::span<const double> z_coords, int r_z) {
  detail::check_z_nodes(z_coords, r_z);
  ZWeights out;
  out.r_z = r_z;
  out.n_z = static_cast<int>(z_coords.size()) - 2 * r_z;
  out.z_coords.assign(z_coords.begin(), z_coords.end());
  if (rows.size() != static_cast<std::size_t>(out.n_z)) {
    throw ParameterError("z weight override needs " + std::to_string(out.n_z) + " rows, got " +
                         std::to_string(rows.size()));
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != static_cast<std::size_t>(out.row_length())) {
      throw ParameterError("z weight row " + std::to_string(k) + " must hold 2*r_z+1 = " +
                           std::to_string(out.row_length()) + " values, got " +
                           std::to_string(rows[k].size()));
    }
    out.w.insert(out.w.end(), rows[k].begin(), rows[k].end());
  }
  return out;
}

// Single-point dot products, accumulated in long double. `(i, j, k)` are
// array indices; for z weights the row used is k - r_z, i.e. the array is
// expected to carry r_z halo planes.

template <typename T>
double apply_stencil_reference(const Array3D<T>& field, const XYWeights& wt, std::ptrdiff_t i,
                               std::ptrdiff_t j, std::ptrdiff_t k) {
  const int r = wt.r_xy;
  if (i - r < 0 || j - r < 0 || i + r >= field.nx() || j + r >= field.ny() || k < 0 || k >= field.nz()) {
    throw IndexError("x-y stencil at (" + std::to_string(i) + "," + std::to_string(j) + "," +
                     std::to_string(k) + ") leaves the array");
  }
  long double acc = static_cast<long double>(wt.w[0]) * field(i, j, k);
  for (int l = 1; l <= r; ++l) {
    const long double s = static_cast<long double>(field(i + l, j, k)) + field(i - l, j, k) +
                          field(i, j + l, k) + field(i, j - l, k);
    acc += static_cast<long double>(wt.w[static_cast<std::size_t>(l)]) * s;
  }
  return static_cast<double>(acc);
}

template <typename T>
double apply_stencil_reference(const Array3D<T>& field, const ZWeights& wt, std::ptrdiff_t i,
                               std::ptrdiff_t j, std::ptrdiff_t k) {
  const int r = wt.r_z;
  const std::ptrdiff_t row = k - r;
  if (i < 0 || j < 0 || i >= field.nx() || j >= field.ny() || row < 0 || row >= wt.n_z ||
      k + r >= field.nz()) {
    throw IndexError("z stencil at (" + std::to_string(i) + "," + std::to_string(j) + "," +
                     std::to_string(k) + ") leaves the array or the weight table");
  }
  long double acc = 0.0L;
  for (int l = -r; l <= r; ++l) {
    acc += static_cast<long double>(wt.at(static_cast<int>(row), l)) * field(i, j, k + l);
  }
  return static_cast<double>(acc);
}

}  // namespace vti
