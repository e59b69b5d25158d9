#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "vti/model.hpp"

using namespace vti;

namespace {
Grid small_grid(int n = 8, int r_xy = 2, int r_z = 2) { return Grid::uniform(n, n, n, 10.0, 10.0, r_xy, r_z); }
}  // namespace

TEST(Grid, PaddingAndAlignment) {
  const Grid g = Grid::uniform(13, 7, 5, 2.0, 3.0, 4, 2);
  EXPECT_EQ(g.padded_nx(), 21);
  EXPECT_EQ(g.padded_ny(), 15);
  EXPECT_EQ(g.padded_nz(), 9);
  EXPECT_EQ(g.row_stride() % kRowAlignPoints, 0);
  EXPECT_GE(g.row_stride(), g.padded_nx());
  ASSERT_EQ(g.z_coords.size(), 9u);
  EXPECT_DOUBLE_EQ(g.z_coords[g.pz(0)], 0.0);
  EXPECT_DOUBLE_EQ(g.z_coords[g.pz(4)], 12.0);
  auto a = g.make_array<float>();
  EXPECT_TRUE(g.matches(a));
  EXPECT_EQ(reinterpret_cast<std::uintptr_t>(a.data()) % 64, 0u);
}

TEST(Grid, RejectsBadGeometry) {
  EXPECT_THROW(Grid::uniform(0, 4, 4, 1.0, 1.0, 1, 1), ParameterError);
  EXPECT_THROW(Grid::uniform(4, 4, 4, 0.0, 1.0, 1, 1), ParameterError);
  EXPECT_THROW(Grid::uniform(4, 4, 4, 1.0, -1.0, 1, 1), ParameterError);
  EXPECT_THROW(Grid::make(4, 4, 4, 1.0, {0, 1, 2, 3, 4}, 1, 1), GeometryError);
  EXPECT_THROW(Grid::make(4, 4, 2, 1.0, {0, 1, 1, 3}, 1, 1), GeometryError);
}

TEST(Model, IsotropicLimit) {
  const Grid g = small_grid();
  const auto m = constant_model<double>(g, 2000.0, 0.0, 0.0);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const auto pi = g.px(i), pj = g.py(j), pk = g.pz(k);
        EXPECT_EQ(m.vx2(pi, pj, pk), m.vz2(pi, pj, pk));
        EXPECT_EQ(m.vn2(pi, pj, pk), m.vz2(pi, pj, pk));
      }
  EXPECT_EQ(m.aniso_warnings, 0u);
}

TEST(Model, DerivedVelocities) {
  const Grid g = small_grid();
  const auto m = constant_model<double>(g, 3000.0, 0.24, 0.1);
  const auto c = g.pz(3);
  EXPECT_NEAR(m.vz2(4, 4, c), 9e6, 1e-6);
  EXPECT_NEAR(m.vx2(4, 4, c), 9e6 * 1.48, 1e-6);
  EXPECT_NEAR(m.vn2(4, 4, c), 9e6 * 1.2, 1e-6);
  // eps - delta = 0.14 > 0 everywhere: warned, not fatal.
  EXPECT_EQ(m.aniso_warnings, g.interior_points());
  EXPECT_THROW(constant_model<double>(g, 3000.0, 0.24, 0.1, true), AnisotropyError);
  EXPECT_NO_THROW(constant_model<double>(g, 3000.0, 0.1, 0.24, true));
  EXPECT_NO_THROW(constant_model<double>(g, 3000.0, 0.1, 0.1, true));
}

TEST(Model, HaloStaysZero) {
  const Grid g = small_grid();
  const auto m = vti::testing::smooth_random_model<float>(g, 5);
  EXPECT_TRUE(halo_is_zero(m.vz2, g));
  EXPECT_TRUE(halo_is_zero(m.vx2, g));
  EXPECT_TRUE(halo_is_zero(m.vn2, g));
}

TEST(Model, InteriorRoundTrip) {
  const Grid g = Grid::uniform(5, 4, 3, 1.0, 1.0, 1, 2);
  std::vector<float> v(g.interior_points()), e(v.size(), 0.0f), d(v.size(), 0.0f);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0f + static_cast<float>(i);
  const auto m = build_model<float>(g, v, e, d);
  EXPECT_EQ(interior_values(m.vz2, g), v);
  // x fastest.
  EXPECT_EQ(m.vz2(g.px(1), g.py(0), g.pz(0)), 2.0f);
  EXPECT_EQ(m.vz2(g.px(0), g.py(1), g.pz(0)), 6.0f);
  EXPECT_EQ(m.vz2(g.px(0), g.py(0), g.pz(1)), 21.0f);
}

TEST(Model, Errors) {
  const Grid g = small_grid(4, 1, 1);
  const std::size_t n = g.interior_points();
  std::vector<double> v(n, 1e6), e(n, 0.1), d(n, 0.2);
  EXPECT_THROW(build_model<double>(g, std::vector<double>(n - 1, 1e6), e, d), GeometryError);
  auto bad = v;
  bad[7] = 0.0;
  EXPECT_THROW(build_model<double>(g, bad, e, d), ModelError);
  bad[7] = -4.0;
  EXPECT_THROW(build_model<double>(g, bad, e, d), ModelError);
  bad[7] = NAN;
  EXPECT_THROW(build_model<double>(g, bad, e, d), ModelError);
  auto be = e;
  be[3] = -0.5;
  EXPECT_THROW(build_model<double>(g, v, be, d), ModelError);
  auto bd = d;
  bd[3] = -0.6;
  EXPECT_THROW(build_model<double>(g, v, e, bd), ModelError);
}

TEST(Damping, TaperValues) {
  // exp(-(0.015 * 20)^2) = exp(-0.09).
  EXPECT_NEAR(taper_value(0, 20, 0.015), 0.9139311852712282, 1e-15);
  EXPECT_NEAR(taper_value(19, 20, 0.015), std::exp(-0.015 * 0.015), 1e-15);
  EXPECT_EQ(taper_value(20, 20, 0.015), 1.0);
  EXPECT_EQ(taper_value(35, 20, 0.015), 1.0);
}

TEST(Damping, ProfileShape) {
  const Grid g = Grid::uniform(64, 60, 50, 10.0, 10.0, 2, 2);
  const auto d = build_damping(g);
  EXPECT_EQ(d.width, kDefaultDampingWidth);
  EXPECT_NEAR(d.g(0, 30, 25), 0.9139311852712282, 1e-15);
  EXPECT_NEAR(d.g(63, 30, 25), 0.9139311852712282, 1e-15);
  EXPECT_NEAR(d.g(0, 0, 0), std::pow(0.9139311852712282, 3), 1e-15);
  EXPECT_NEAR(d.g(0, 0, 25), 0.835270211411272, 1e-14);
  EXPECT_EQ(d.g(32, 30, 25), 1.0);
  EXPECT_FALSE(d.in_band(20, 20, 20));
  EXPECT_TRUE(d.in_band(19, 20, 20));
  EXPECT_TRUE(d.in_band(20, 20, 30));
  // Monotone toward the interior on every face.
  for (int i = 1; i < 20; ++i) {
    EXPECT_GT(d.gx[i], d.gx[i - 1]);
    EXPECT_GT(d.gx[63 - i], d.gx[64 - i]);
    EXPECT_GT(d.gz[i], d.gz[i - 1]);
  }
  for (double v : d.gx) {
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Damping, WidthZeroIsIdentity) {
  const Grid g = small_grid();
  const auto d = build_damping(g, 0);
  EXPECT_FALSE(d.enabled());
  auto a = g.make_array<float>();
  a.fill(2.0f);
  apply_damping(a, g, d);
  for (int k = 0; k < g.nz; ++k) EXPECT_EQ(a(g.px(1), g.py(1), g.pz(k)), 2.0f);
}

TEST(Damping, RejectsOversizedBand) {
  const Grid g = small_grid(40);
  EXPECT_NO_THROW(build_damping(g, 19));
  EXPECT_THROW(build_damping(g, 20), GeometryError);
  EXPECT_THROW(build_damping(g, -1), ParameterError);
  EXPECT_THROW(build_damping(g, 5, -0.1), ParameterError);
}

TEST(Damping, ApplyMatchesProfileAndLeavesHalo) {
  const Grid g = Grid::uniform(30, 26, 22, 5.0, 5.0, 3, 2);
  const auto d = build_damping(g, 6, 0.05);
  auto a = g.make_array<double>();
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) a(g.px(i), g.py(j), g.pz(k)) = 1.0 + i + 100.0 * j + 1e4 * k;
  apply_damping(a, g, d, 2);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const double orig = 1.0 + i + 100.0 * j + 1e4 * k;
        EXPECT_NEAR(a(g.px(i), g.py(j), g.pz(k)), orig * d.g(i, j, k), 1e-12 * orig);
      }
  EXPECT_TRUE(halo_is_zero(a, g));
}

TEST(Damping, NotIdempotent) {
  // Each application multiplies again; twice is the square of once.
  const Grid g = Grid::uniform(30, 30, 30, 5.0, 5.0, 2, 2);
  const auto d = build_damping(g, 8);
  auto a = g.make_array<double>();
  a.fill(1.0);
  zero_halo(a, g);
  apply_damping(a, g, d);
  const double once = a(g.px(0), g.py(15), g.pz(15));
  apply_damping(a, g, d);
  EXPECT_NEAR(a(g.px(0), g.py(15), g.pz(15)), once * once, 1e-15);
  EXPECT_EQ(a(g.px(15), g.py(15), g.pz(15)), 1.0);
}
