#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vti/array3d.hpp"
#include "vti/error.hpp"
#include "vti/grid.hpp"
#include "vti/state.hpp"

namespace vti {

/// Gridded VTI earth model. All arrays live on the padded grid so kernels
/// share one index with the wavefields; halo values are zero and unused.
template <typename Real>
struct EarthModel {
  Grid grid;
  Array3D<Real> vz2, eps, delta;
  Array3D<Real> vx2, vn2;  // vz2 (1 + 2 eps), vz2 (1 + 2 delta)
  // Points where eps - delta > 0 (only counted when not in strict mode).
  std::size_t aniso_warnings = 0;
};

/// Build a model from interior-shaped arrays (x fastest, then y, then z).
/// With `strict_aniso` every point must satisfy eps - delta <= 0.
template <typename Real>
EarthModel<Real> build_model(const Grid& grid, std::span<const Real> vz2, std::span<const Real> eps,
                             std::span<const Real> delta, bool strict_aniso = false) {
  const std::size_t n = grid.interior_points();
  if (vz2.size() != n || eps.size() != n || delta.size() != n) {
    throw GeometryError("model arrays must hold nx*ny*nz = " + std::to_string(n) + " values (got " +
                        std::to_string(vz2.size()) + ", " + std::to_string(eps.size()) + ", " +
                        std::to_string(delta.size()) + ")");
  }
  EarthModel<Real> m;
  m.grid = grid;
  m.vz2 = grid.make_array<Real>();
  m.eps = grid.make_array<Real>();
  m.delta = grid.make_array<Real>();
  m.vx2 = grid.make_array<Real>();
  m.vn2 = grid.make_array<Real>();

  std::size_t idx = 0;
  for (int k = 0; k < grid.nz; ++k) {
    for (int j = 0; j < grid.ny; ++j) {
      for (int i = 0; i < grid.nx; ++i, ++idx) {
        const Real v = vz2[idx], e = eps[idx], d = delta[idx];
        if (!(v > Real(0)) || !std::isfinite(v)) {
          throw ModelError("vz2 must be positive and finite at (" + std::to_string(i) + "," +
                           std::to_string(j) + "," + std::to_string(k) + ")");
        }
        const Real fx = Real(1) + Real(2) * e;
        const Real fn = Real(1) + Real(2) * d;
        if (!(fx > Real(0)) || !(fn > Real(0))) {
          throw ModelError("1+2*eps and 1+2*delta must be positive at (" + std::to_string(i) + "," +
                           std::to_string(j) + "," + std::to_string(k) + ")");
        }
        if (e - d > Real(0)) {
          if (strict_aniso) {
            throw AnisotropyError("eps - delta > 0 at (" + std::to_string(i) + "," + std::to_string(j) +
                                  "," + std::to_string(k) + ")");
          }
          ++m.aniso_warnings;
        }
        const auto pi = grid.px(i), pj = grid.py(j), pk = grid.pz(k);
        m.vz2(pi, pj, pk) = v;
        m.eps(pi, pj, pk) = e;
        m.delta(pi, pj, pk) = d;
        m.vx2(pi, pj, pk) = v * fx;
        m.vn2(pi, pj, pk) = v * fn;
      }
    }
  }
  return m;
}

template <typename Real>
EarthModel<Real> build_model(const Grid& grid, const std::vector<Real>& vz2, const std::vector<Real>& eps,
                             const std::vector<Real>& delta, bool strict_aniso = false) {
  return build_model<Real>(grid, std::span<const Real>(vz2), std::span<const Real>(eps),
                           std::span<const Real>(delta), strict_aniso);
}

template <typename Real>
EarthModel<Real> constant_model(const Grid& grid, double vz, double eps, double delta,
                                bool strict_aniso = false) {
  const std::size_t n = grid.interior_points();
  const std::vector<Real> v(n, static_cast<Real>(vz * vz)), e(n, static_cast<Real>(eps)),
      d(n, static_cast<Real>(delta));
  return build_model<Real>(grid, v, e, d, strict_aniso);
}

/// Copy the interior of a padded model array back into x-fastest order.
template <typename Real>
std::vector<Real> interior_values(const Array3D<Real>& a, const Grid& g) {
  std::vector<Real> out;
  out.reserve(g.interior_points());
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) out.push_back(a(g.px(i), g.py(j), g.pz(k)));
  return out;
}

/// Exponential sponge taper exp(-(alpha (width - d))^2) on every face, d
/// being the distance in points from the outer interior edge. Stored as
/// one profile per axis; the per-point multiplier is their product.
struct DampingProfile {
  int width = 0;
  double alpha = 0.0;
  std::vector<double> gx, gy, gz;  // interior indices

  double g(int i, int j, int k) const {
    return gx[static_cast<std::size_t>(i)] * gy[static_cast<std::size_t>(j)] * gz[static_cast<std::size_t>(k)];
  }
  bool in_band(int i, int j, int k) const { return g(i, j, k) < 1.0; }
  bool enabled() const noexcept { return width > 0; }
};

inline constexpr int kDefaultDampingWidth = 20;
inline constexpr double kDefaultDampingAlpha = 0.015;

inline double taper_value(int d, int width, double alpha) {
  if (d >= width) return 1.0;
  const double a = alpha * (width - d);
  return std::exp(-a * a);
}

inline DampingProfile build_damping(const Grid& grid, int width = kDefaultDampingWidth,
                                    double alpha = kDefaultDampingAlpha) {
  if (width < 0) throw ParameterError("damping width must be >= 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ParameterError("damping alpha must be >= 0");
  if (width > 0 && (2 * width >= grid.nx || 2 * width >= grid.ny || 2 * width >= grid.nz)) {
    throw GeometryError("damping band of " + std::to_string(width) +
                        " points is not smaller than half of every interior extent");
  }
  DampingProfile p;
  p.width = width;
  p.alpha = alpha;
  auto axis = [&](int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = taper_value(std::min(i, n - 1 - i), width, alpha);
    return g;
  };
  p.gx = axis(grid.nx);
  p.gy = axis(grid.ny);
  p.gz = axis(grid.nz);
  return p;
}

/// Multiply every point inside the band by the taper. Rows that cross the
/// band only in x touch their first and last `width` points.
template <typename Real>
void apply_damping(Array3D<Real>& a, const Grid& grid, const DampingProfile& damp, int threads = 1) {
  if (!damp.enabled()) return;
  const int w = damp.width;
  std::vector<Real> gx(damp.gx.begin(), damp.gx.end());
#pragma omp parallel for num_threads(threads) schedule(static)
  for (int k = 0; k < grid.nz; ++k) {
    for (int j = 0; j < grid.ny; ++j) {
      const double gyz = damp.gy[static_cast<std::size_t>(j)] * damp.gz[static_cast<std::size_t>(k)];
      Real* r = a.row(grid.py(j), grid.pz(k)) + grid.pad_xy;
      if (gyz < 1.0) {
        for (int i = 0; i < grid.nx; ++i) r[i] *= static_cast<Real>(gyz * damp.gx[static_cast<std::size_t>(i)]);
      } else {
        for (int i = 0; i < w; ++i) r[i] *= gx[static_cast<std::size_t>(i)];
        for (int i = grid.nx - w; i < grid.nx; ++i) r[i] *= gx[static_cast<std::size_t>(i)];
      }
    }
  }
}

}  // namespace vti
