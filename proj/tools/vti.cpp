#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

void add_problem_options(CLI::App* app, vti::cli::SyntheticProblem& p, bool dims) {
  if (dims) {
    app->add_option("--nx", p.nx, "interior points in x")->check(CLI::PositiveNumber);
    app->add_option("--ny", p.ny, "interior points in y")->check(CLI::PositiveNumber);
    app->add_option("--nz", p.nz, "interior points in z")->check(CLI::PositiveNumber);
  }
  app->add_option("--dx", p.h, "x-y spacing (m)");
  app->add_option("--dz", p.dz, "z spacing (m)");
  app->add_option("--vz", p.vz, "vertical velocity (m/s)");
  app->add_option("--eps", p.eps, "Thomsen epsilon");
  app->add_option("--delta", p.delta, "Thomsen delta");
  app->add_option("--rxy", p.r_xy, "x-y stencil radius")->check(CLI::PositiveNumber);
  app->add_option("--rz", p.r_z, "z stencil radius")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  namespace cli = vti::cli;
  CLI::App app{"High-order VTI finite-difference propagator"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run a simulation from a JSON config");
  run->add_option("config", config_path, "run config file")->required();

  cli::BenchArgs bench;
  auto* b = app.add_subcommand("bench", "measure sweep throughput (optionally a thread-scaling table)");
  add_problem_options(b, bench.problem, true);
  b->add_option("--kernel", bench.kernel, "reference|blocked|column");
  b->add_option("--precision", bench.precision, "single|double");
  b->add_option("--placement", bench.placement, "none|compact|scatter");
  b->add_option("--threads", bench.threads)->check(CLI::PositiveNumber);
  b->add_option("--block-w", bench.block_w, "blocked kernel tile extent in z");
  b->add_option("--block-h", bench.block_h, "blocked kernel tile extent in y");
  b->add_option("--tile-x", bench.tile_x);
  b->add_option("--tile-y", bench.tile_y);
  b->add_option("--column-width", bench.column_width)->check(CLI::Range(1, 2));
  b->add_option("--steps", bench.steps)->check(CLI::PositiveNumber);
  b->add_option("--warmup", bench.warmup);
  b->add_option("--reps", bench.reps)->check(CLI::PositiveNumber);
  b->add_option("--scaling", bench.scaling, "comma-separated thread counts");
  b->add_option("--csv", bench.csv, "CSV export of the scaling table");
  b->add_option("--peak-flops", bench.peak_flops);
  b->add_option("--peak-bw", bench.peak_bw);
  b->add_option("-o,--out", bench.out, "write JSON here instead of stdout");

  cli::AutotuneArgs tune;
  auto* t = app.add_subcommand("autotune", "exhaustive blocked-kernel tile search");
  add_problem_options(t, tune.problem, false);
  t->add_option("--grids", tune.grids, "comma list of NXxNYxNZ");
  t->add_option("--w", tune.ws, "candidate extents in z");
  t->add_option("--h-block", tune.hs, "candidate extents in y");
  t->add_option("--precision", tune.precision);
  t->add_option("--placement", tune.placement);
  t->add_option("--threads", tune.threads)->check(CLI::PositiveNumber);
  t->add_option("--steps", tune.steps)->check(CLI::PositiveNumber);
  t->add_option("--warmup", tune.warmup);
  t->add_option("--reps", tune.reps)->check(CLI::PositiveNumber);
  t->add_option("-o,--out", tune.out);

  cli::PerfmodelArgs pm;
  auto* p = app.add_subcommand("perfmodel", "computational-intensity and resolution estimates");
  p->add_option("--rxy", pm.r_xy)->check(CLI::PositiveNumber);
  p->add_option("--rz", pm.r_z)->check(CLI::PositiveNumber);
  p->add_option("--precision", pm.precision);
  p->add_option("--modes", pm.modes, "Fourier modes to resolve");
  p->add_option("--cp", pm.c_p, "resolution prefactor");
  p->add_option("--peak-flops", pm.peak_flops);
  p->add_option("--peak-bw", pm.peak_bw);
  p->add_option("--measured", pm.measured_points_per_sec, "measured points/s");
  p->add_option("-o,--out", pm.out);

  cli::WeightsArgs wa;
  auto* w = app.add_subcommand("weights", "print stencil weights");
  w->add_option("--rxy", wa.r_xy);
  w->add_option("--dx", wa.h, "x-y spacing");
  w->add_option("--rz", wa.r_z);
  w->add_option("--dz", wa.dz);
  w->add_option("--nz", wa.nz);
  w->add_option("--z-coords", wa.z_coords_file, "text file of node depths");
  w->add_option("-o,--out", wa.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kValidation;
  }

  try {
    if (*run) return cli::cmd_run(config_path, std::cout, std::cerr);
    if (*b) return cli::cmd_bench(bench, std::cout, std::cerr);
    if (*t) return cli::cmd_autotune(tune, std::cout, std::cerr);
    if (*p) return cli::cmd_perfmodel(pm, std::cout, std::cerr);
    if (*w) return cli::cmd_weights(wa, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
