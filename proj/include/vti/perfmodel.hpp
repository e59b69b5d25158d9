#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "vti/error.hpp"

namespace vti::perf {

// Computational-intensity model of the VTI update.
//
// Flops per point: 5 per x-y radius step (four adds, one multiply) and 4 per
// z radius step (two multiplies, two adds).
//
// Pessimistic: every stencil operand comes from memory, 4 r_xy + 2 r_z
// values per point.
// Optimistic: only 7 values move per point: three model properties, a
// load/store pair for u^n and one for u^{n+1}.
struct CIEstimate {
  int r_xy = 0, r_z = 0;
  int bytes_per_value = 4;
  double flops_per_point = 0.0;
  double ci_pessimistic = 0.0;       // flops/byte
  double ci_optimistic = 0.0;        // flops/byte
  double ci_optimistic_approx = 0.0;  // the 0.3 (r_xy + r_z) shorthand, single precision only
};

inline constexpr int kOptimisticValuesPerPoint = 7;

inline CIEstimate ci_estimate(int r_xy, int r_z, int bytes_per_value = 4) {
  if (r_xy < 1 || r_z < 1) throw ParameterError("radii must be >= 1");
  if (bytes_per_value != 4 && bytes_per_value != 8) throw ParameterError("bytes_per_value must be 4 or 8");
  CIEstimate e;
  e.r_xy = r_xy;
  e.r_z = r_z;
  e.bytes_per_value = bytes_per_value;
  e.flops_per_point = 5.0 * r_xy + 4.0 * r_z;
  e.ci_pessimistic = e.flops_per_point / (bytes_per_value * (4.0 * r_xy + 2.0 * r_z));
  e.ci_optimistic = e.flops_per_point / (bytes_per_value * static_cast<double>(kOptimisticValuesPerPoint));
  e.ci_optimistic_approx = 0.3 * (r_xy + r_z) * 4.0 / bytes_per_value;
  return e;
}

/// Grid points per dimension needed to resolve M Fourier modes with a
/// stencil of radius R: c_p M^(1 + 1/(2R)).
inline double resolution_points(double modes, double radius, double c_p = 1.0) {
  if (!(modes >= 1.0)) throw ParameterError("modes must be >= 1");
  if (!(radius >= 1.0)) throw ParameterError("radius must be >= 1");
  if (!(c_p > 0.0)) throw ParameterError("c_p must be positive");
  if (std::isinf(radius)) return c_p * modes;
  return c_p * std::pow(modes, 1.0 + 1.0 / (2.0 * radius));
}

struct RooflineSummary {
  double achieved_flops = 0.0;       // flops/s
  double fraction_of_peak = 0.0;     // achieved / peak
  double ci = 0.0;                   // optimistic CI used for the roof
  double attainable_fraction = 0.0;  // min(1, CI * bw / peak)
};

inline RooflineSummary peak_fraction(double measured_points_per_sec, double flops_per_point, double peak_flops,
                                     double peak_bw, int bytes_per_value = 4) {
  if (measured_points_per_sec < 0.0 || !(flops_per_point > 0.0) || !(peak_flops > 0.0) || !(peak_bw > 0.0)) {
    throw ParameterError("roofline inputs must be positive");
  }
  RooflineSummary r;
  r.achieved_flops = measured_points_per_sec * flops_per_point;
  r.fraction_of_peak = r.achieved_flops / peak_flops;
  r.ci = flops_per_point / (bytes_per_value * static_cast<double>(kOptimisticValuesPerPoint));
  r.attainable_fraction = std::min(1.0, r.ci * peak_bw / peak_flops);
  return r;
}

}  // namespace vti::perf
