#include <gtest/gtest.h>

#include <algorithm>

#include "test_support.hpp"
#include "vti/bench.hpp"

using namespace vti;
using namespace vti::bench;

namespace {

Problem<float> small_problem(int n = 24) {
  const Grid g = Grid::uniform(n, n, n, 10.0, 10.0, 4, 4);
  return vti::testing::make_problem(constant_model<float>(g, 2000.0, 0.1, 0.1), 0);
}

SimConfig small_config(const Problem<float>& pb) {
  SimConfig c;
  c.dt = 0.9 * stability_dt(pb);
  c.source_pos = {pb.grid().nx / 2, pb.grid().ny / 2, pb.grid().nz / 2};
  return c;
}

}  // namespace

TEST(Median, OddAndEven) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
  EXPECT_EQ(median({}), 0.0);
}

TEST(Finalize, RateIdentities) {
  ThroughputReport r;
  r.nx = 10;
  r.ny = 20;
  r.nz = 30;
  r.n_steps = 7;
  r.flops_per_point = 92.0;
  r.rep_elapsed_sec = {0.5, 0.4, 0.45};
  finalize(r);
  EXPECT_EQ(r.elapsed_sec, 0.45);
  EXPECT_EQ(r.sweeps_per_sec, 7.0 / 0.45);
  EXPECT_EQ(r.points_per_sec, r.sweeps_per_sec * 6000.0);
  EXPECT_EQ(r.modeled_flops_per_sec, r.points_per_sec * 92.0);
  EXPECT_NEAR(r.noise, 0.1 / 0.45, 1e-15);
}

TEST(Measure, ReportsRatesAndSettings) {
  const auto pb = small_problem();
  auto cfg = small_config(pb);
  cfg.block_w = 8;
  cfg.block_h = 4;
  const auto r = measure(pb, cfg, 3, 1, 3);
  EXPECT_EQ(r.rep_elapsed_sec.size(), 3u);
  EXPECT_GT(r.points_per_sec, 0.0);
  EXPECT_EQ(r.points_per_sec, r.sweeps_per_sec * 13824.0);
  EXPECT_EQ(r.flops_per_point, 5.0 * 4 + 4.0 * 4);
  EXPECT_EQ(r.block_w, 8);
  EXPECT_EQ(r.kernel, "blocked");
  EXPECT_EQ(r.precision, "single");
  EXPECT_FALSE(r.timestamp.empty());
  EXPECT_THROW(measure(pb, cfg, 0), ParameterError);
  EXPECT_THROW(measure(pb, cfg, 1, 0, 0), ParameterError);
}

TEST(Measure, UnstableRunIsReported) {
  const auto pb = small_problem(16);
  auto cfg = small_config(pb);
  cfg.dt *= 3.0;
  EXPECT_THROW(measure(pb, cfg, 300, 0, 1), InstabilityError);
}

TEST(Autotune, CandidatesAlwaysIncludeDefault) {
  const auto c = candidate_blocks({8, 16}, {4});
  EXPECT_EQ(c.size(), 3u);
  EXPECT_EQ(c.back(), std::make_pair(28, 20));
  EXPECT_EQ(candidate_blocks({8, 16, 28, 32}, {8, 16, 20, 32}).size(), 16u);
  EXPECT_THROW(candidate_blocks({}, {4}), ParameterError);
}

TEST(Autotune, WinnerDominates) {
  const auto a = small_problem(20), b = small_problem(24);
  auto cfg = small_config(a);
  cfg.kernel = KernelKind::column;  // autotune forces the blocked kernel
  const auto res = autotune<float>({&a, &b}, cfg, {4, 28}, {20}, 2, 0, 2);
  ASSERT_EQ(res.candidates.size(), 2u);
  EXPECT_EQ(res.grids.size(), 2u);
  for (const auto& c : res.candidates) {
    EXPECT_EQ(c.points_per_sec.size(), 2u);
    EXPECT_GE(res.best().mean_points_per_sec, c.mean_points_per_sec);
  }
  EXPECT_GE(res.noise_band, 0.0);
}

TEST(Autotune, SingleCandidate) {
  const auto a = small_problem(16);
  const auto res = autotune<float>({&a}, small_config(a), {28}, {20}, 1, 0, 1);
  ASSERT_EQ(res.candidates.size(), 1u);
  EXPECT_EQ(res.winner, 0u);
  EXPECT_THROW(autotune<float>({}, small_config(a), {28}, {20}, 1), ParameterError);
}

TEST(Scaling, SingleThreadRowIsTheBaseline) {
  const auto pb = small_problem(20);
  const auto rep = scaling_report(pb, small_config(pb), {1, 2}, 2, 0, 1);
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_EQ(rep.rows[0].speedup, 1.0);
  EXPECT_EQ(rep.rows[0].efficiency, 1.0);
  for (const auto& r : rep.rows) {
    EXPECT_EQ(r.efficiency, r.speedup / r.threads);
    EXPECT_EQ(r.speedup, r.points_per_sec / rep.rows[0].points_per_sec);
    EXPECT_EQ(r.report.threads, r.threads);
    EXPECT_EQ(r.oversubscribed, r.threads > rep.hardware_threads);
  }
  EXPECT_EQ(rep.warnings.size(), static_cast<std::size_t>(std::count_if(
                                     rep.rows.begin(), rep.rows.end(), [](const auto& r) { return r.oversubscribed; })));
  EXPECT_THROW(scaling_report(pb, small_config(pb), {}, 1), ParameterError);
  EXPECT_THROW(scaling_report(pb, small_config(pb), {0}, 1), ParameterError);
}
