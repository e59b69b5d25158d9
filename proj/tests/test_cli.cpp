#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"

using namespace vti;
using namespace vti::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("vti_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
};

json run_doc() {
  return json::parse(R"({
    "grid": {"nx": 16, "ny": 16, "nz": 16, "h": 10.0, "dz": 10.0},
    "stencil": {"r_xy": 2, "r_z": 2},
    "model": {"vz": 2000.0, "eps": 0.1, "delta": 0.1},
    "dt": "auto",
    "steps": 6,
    "source": {"position": [8, 8, 8]},
    "damping": {"width": 3},
    "output": {"dir": "out"}
  })");
}

int run_file(const Scratch& s, const json& doc, std::string& out, std::string& err) {
  const auto path = s.dir / "run.json";
  std::ofstream(path) << doc.dump();
  std::ostringstream o, e;
  const int rc = cmd_run(path, o, e);
  out = o.str();
  err = e.str();
  return rc;
}

}  // namespace

TEST(CliPerfmodel, DefaultRadii) {
  std::ostringstream out, err;
  ASSERT_EQ(cmd_perfmodel(PerfmodelArgs{}, out, err), kOk);
  const auto j = json::parse(out.str());
  EXPECT_EQ(j["flops_per_point"], 92.0);
  EXPECT_DOUBLE_EQ(j["ci_optimistic"].get<double>(), 92.0 / 28.0);
  EXPECT_DOUBLE_EQ(j["ci_pessimistic"].get<double>(), 0.359375);
  EXPECT_NEAR(j["roofline"]["attainable_fraction"].get<double>(), 0.505, 1e-3);
  EXPECT_FALSE(j.contains("resolution"));

  PerfmodelArgs a;
  a.modes = 100.0;
  a.precision = "double";
  std::ostringstream o2;
  ASSERT_EQ(cmd_perfmodel(a, o2, err), kOk);
  const auto j2 = json::parse(o2.str());
  EXPECT_EQ(j2["bytes_per_value"], 8);
  EXPECT_NEAR(j2["resolution"]["points_r_z"].get<double>(), std::pow(100.0, 1.0 + 1.0 / 16.0), 1e-9);

  a.r_xy = 0;
  EXPECT_EQ(cmd_perfmodel(a, o2, err), kValidation);
}

TEST(CliWeights, PrintsTables) {
  WeightsArgs a;
  a.r_xy = 1;
  a.r_z = 1;
  a.dz = 2.0;
  a.nz = 3;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_weights(a, out, err), kOk);
  const auto j = json::parse(out.str());
  EXPECT_EQ(j["xy"]["w"], json({-4.0, 1.0}));
  EXPECT_EQ(j["z"]["n_z"], 3);
  EXPECT_EQ(j["z"]["rows"][0], json({0.25, -0.5, 0.25}));
  EXPECT_EQ(cmd_weights(WeightsArgs{}, out, err), kValidation);
}

TEST(CliRun, WritesSummary) {
  Scratch s;
  std::string out, err;
  ASSERT_EQ(run_file(s, run_doc(), out, err), kOk) << err;
  const auto j = json::parse(out);
  EXPECT_EQ(j["steps"], 6);
  EXPECT_TRUE(j["dt_auto"].get<bool>());
  EXPECT_NEAR(j["stability_margin"].get<double>(), 0.9, 1e-12);
  EXPECT_GT(j["final"]["p"]["max_abs"].get<double>(), 0.0);
  EXPECT_EQ(j["aniso_warnings"], 0);
  EXPECT_EQ(io::read_json(s.dir / "out" / "summary.json"), j);
}

TEST(CliRun, ZeroStepsIsValid) {
  Scratch s;
  auto d = run_doc();
  d["steps"] = 0;
  std::string out, err;
  ASSERT_EQ(run_file(s, d, out, err), kOk) << err;
  const auto j = json::parse(out);
  EXPECT_EQ(j["steps"], 0);
  EXPECT_EQ(j["final"]["p"]["l2"], 0.0);
}

TEST(CliRun, SnapshotsAndDoublePrecision) {
  Scratch s;
  auto d = run_doc();
  d["precision"] = "double";
  d["snapshots"] = {{"every", 3}, {"kind", "plane"}, {"axis", "z"}, {"index", 8}};
  std::string out, err;
  ASSERT_EQ(run_file(s, d, out, err), kOk) << err;
  EXPECT_TRUE(fs::exists(s.dir / "out" / "snapshots" / "p_000003.bin"));
  EXPECT_EQ(fs::file_size(s.dir / "out" / "snapshots" / "p_000006.bin"), 16u * 16u * 8u);
}

TEST(CliRun, ExitCodes) {
  Scratch s;
  std::string out, err;
  auto d = run_doc();
  d["kernel"] = {{"varaint", "column"}};
  EXPECT_EQ(run_file(s, d, out, err), kValidation);
  EXPECT_NE(err.find("kernel.varaint"), std::string::npos) << err;

  d = run_doc();
  d["model"]["vz"] = -1.0;
  EXPECT_EQ(run_file(s, d, out, err), kValidation);

  d = run_doc();
  d["dt"] = 1.0;
  EXPECT_EQ(run_file(s, d, out, err), kValidation);

  d = run_doc();
  d["dt"] = 0.01;
  d["allow_unstable_dt"] = true;
  d["steps"] = 400;
  d["check_every"] = 5;
  EXPECT_EQ(run_file(s, d, out, err), kInstability);

  std::ostringstream o, e;
  EXPECT_EQ(cmd_run(s.dir / "missing.json", o, e), kIo);
  std::ofstream(s.dir / "broken.json") << "{";
  EXPECT_EQ(cmd_run(s.dir / "broken.json", o, e), kIo);
}

TEST(CliBench, ThroughputAndScaling) {
  Scratch s;
  BenchArgs a;
  a.problem.nx = a.problem.ny = a.problem.nz = 20;
  a.problem.r_xy = 4;
  a.problem.r_z = 4;
  a.steps = 2;
  a.warmup = 0;
  a.reps = 1;
  a.peak_flops = 1e11;
  a.peak_bw = 1e10;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_bench(a, out, err), kOk) << err.str();
  auto j = json::parse(out.str());
  EXPECT_EQ(j["points_per_sec"].get<double>(), j["sweeps_per_sec"].get<double>() * 8000.0);
  EXPECT_TRUE(j.contains("roofline"));

  a.scaling = "1,2";
  a.csv = s.dir / "scaling.csv";
  std::ostringstream o2;
  ASSERT_EQ(cmd_bench(a, o2, err), kOk) << err.str();
  j = json::parse(o2.str());
  EXPECT_EQ(j["rows"].size(), 2u);
  std::ifstream csv(*a.csv);
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "threads,points_per_sec,speedup,efficiency,placement");

  a.scaling = "1,x";
  EXPECT_EQ(cmd_bench(a, o2, err), kValidation);
  a.scaling.clear();
  a.kernel = "nope";
  EXPECT_EQ(cmd_bench(a, o2, err), kValidation);
}

TEST(CliAutotune, SmallSweep) {
  AutotuneArgs a;
  a.problem.r_xy = 2;
  a.problem.r_z = 2;
  a.grids = "16x16x16";
  a.ws = "4,8";
  a.hs = "4";
  a.steps = 1;
  a.warmup = 0;
  a.reps = 1;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_autotune(a, out, err), kOk) << err.str();
  const auto j = json::parse(out.str());
  EXPECT_EQ(j["candidates"].size(), 3u);
  EXPECT_EQ(j["candidates"][2]["block"], json({28, 20}));
  a.grids = "16x16";
  EXPECT_EQ(cmd_autotune(a, out, err), kValidation);
}

TEST(CliParsing, Lists) {
  EXPECT_EQ(parse_int_list("1,2,4", "t"), (std::vector<int>{1, 2, 4}));
  EXPECT_THROW(parse_int_list("", "t"), ValidationError);
  EXPECT_EQ(parse_dims("64x32X16"), (std::array<int, 3>{64, 32, 16}));
  EXPECT_THROW(parse_dims("0x1x1"), ValidationError);
}
