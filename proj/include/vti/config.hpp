#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vti/error.hpp"
#include "vti/io.hpp"
#include "vti/model.hpp"
#include "vti/propagator.hpp"
#include "vti/stencil.hpp"
#include "vti/threading.hpp"

// Run configuration: a JSON document validated strictly. Unknown keys are
// errors; the grid (or a model sidecar), the stencil radii, the model, dt
// (a number or "auto"), steps and the source position are mandatory.
//
// {
//   "grid":     {"nx", "ny", "nz", "h", "dz" | "z_coords"},
//   "stencil":  {"r_xy", "r_z", "xy_weights_file"?, "z_weights_file"?},
//   "model":    {"vz", "eps", "delta"} | {"sidecar": path}, plus "strict_aniso"?,
//   "dt":       number | "auto",
//   "dt_fraction"?, "allow_unstable_dt"?,
//   "steps":    integer,
//   "source":   {"position": [i, j, k], "f"?, "t0"?, "amplitude"?, "normalize"?},
//   "damping"?: {"enabled"?, "width"?, "alpha"?},
//   "kernel"?:  {"variant"?, "block_w"?, "block_h"?, "column_width"?, "tile_x"?, "tile_y"?},
//   "threads"?, "placement"?, "precision"?, "check_every"?,
//   "snapshots"?: {"every", "fields"?, "kind"?, "axis"?, "index"?, "dir"?},
//   "output"?:  {"dir"?, "summary"?}
// }

namespace vti::config {

namespace fs = std::filesystem;
using nlohmann::json;

struct GridSpec {
  int nx = 0, ny = 0, nz = 0;
  double h = 0.0, dz = 0.0;
  std::vector<double> z_coords;
};

struct RunConfig {
  fs::path base_dir;
  std::optional<GridSpec> grid;
  int r_xy = 0, r_z = 0;
  std::optional<fs::path> xy_weights_file, z_weights_file;
  std::optional<fs::path> model_sidecar;
  double vz = 0.0, eps = 0.0, delta = 0.0;
  bool strict_aniso = false;
  bool dt_auto = false;
  double dt_fraction = kDefaultDtFraction;
  bool damping_enabled = true;
  int damping_width = kDefaultDampingWidth;
  double damping_alpha = kDefaultDampingAlpha;
  SimConfig sim;  // dt filled in once the problem is built when dt_auto
  io::SnapshotSpec snapshots;
  fs::path output_dir;
  fs::path summary_path;
};

namespace detail {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(path_.empty() ? "<root>" : path_, "must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, _] : j_.items()) {
      if (!ok.count(k)) throw ValidationError(join(k), "unknown key");
    }
  }
  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) const {
    if (!has(key)) throw ValidationError(join(key), "missing required key");
    return j_.at(key);
  }
  Reader sub(const char* key) const { return Reader(raw(key), join(key)); }

  template <typename T>
  T get(const char* key) const {
    try {
      return raw(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError(join(key), "wrong type");
    }
  }
  template <typename T>
  T get_or(const char* key, T fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
};

inline int positive_int(const Reader& r, const char* key) {
  const int v = r.get<int>(key);
  if (v < 1) throw ValidationError(r.join(key), "must be >= 1");
  return v;
}

inline double positive_double(const Reader& r, const char* key) {
  const double v = r.get<double>(key);
  if (!(v > 0.0)) throw ValidationError(r.join(key), "must be positive");
  return v;
}

}  // namespace detail

/// Parse and validate; relative paths resolve against `base_dir`.
inline RunConfig parse(const json& doc, const fs::path& base_dir) {
  using detail::Reader;
  const Reader root(doc, "");
  root.allow({"grid", "stencil", "model", "dt", "dt_fraction", "allow_unstable_dt", "steps", "source", "damping",
              "kernel", "threads", "placement", "precision", "check_every", "snapshots", "output"});
  RunConfig c;
  c.base_dir = base_dir;
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base_dir / p; };

  const Reader st = root.sub("stencil");
  st.allow({"r_xy", "r_z", "xy_weights_file", "z_weights_file"});
  c.r_xy = detail::positive_int(st, "r_xy");
  c.r_z = detail::positive_int(st, "r_z");
  if (st.has("xy_weights_file")) c.xy_weights_file = resolve(st.get<std::string>("xy_weights_file"));
  if (st.has("z_weights_file")) c.z_weights_file = resolve(st.get<std::string>("z_weights_file"));

  const Reader md = root.sub("model");
  md.allow({"vz", "eps", "delta", "sidecar", "strict_aniso"});
  c.strict_aniso = md.get_or<bool>("strict_aniso", false);
  if (md.has("sidecar")) {
    if (md.has("vz") || md.has("eps") || md.has("delta")) {
      throw ValidationError("model", "give either a sidecar or constant vz/eps/delta, not both");
    }
    c.model_sidecar = resolve(md.get<std::string>("sidecar"));
  } else {
    c.vz = detail::positive_double(md, "vz");
    c.eps = md.get<double>("eps");
    c.delta = md.get<double>("delta");
  }

  if (root.has("grid")) {
    if (c.model_sidecar) throw ValidationError("grid", "geometry comes from the model sidecar; remove this key");
    const Reader gr = root.sub("grid");
    gr.allow({"nx", "ny", "nz", "h", "dz", "z_coords"});
    GridSpec g;
    g.nx = detail::positive_int(gr, "nx");
    g.ny = detail::positive_int(gr, "ny");
    g.nz = detail::positive_int(gr, "nz");
    g.h = detail::positive_double(gr, "h");
    if (gr.has("z_coords")) {
      if (gr.has("dz")) throw ValidationError("grid", "give either dz or z_coords, not both");
      g.z_coords = gr.get<std::vector<double>>("z_coords");
    } else {
      g.dz = detail::positive_double(gr, "dz");
    }
    c.grid = g;
  } else if (!c.model_sidecar) {
    throw ValidationError("grid", "missing required key");
  }

  const json& dt = root.raw("dt");
  if (dt.is_string()) {
    if (dt.get<std::string>() != "auto") throw ValidationError("dt", "must be a number or \"auto\"");
    c.dt_auto = true;
  } else if (dt.is_number()) {
    c.sim.dt = dt.get<double>();
    if (!(c.sim.dt > 0.0)) throw ValidationError("dt", "must be positive");
  } else {
    throw ValidationError("dt", "must be a number or \"auto\"");
  }
  c.dt_fraction = root.get_or<double>("dt_fraction", kDefaultDtFraction);
  if (!(c.dt_fraction > 0.0)) throw ValidationError("dt_fraction", "must be positive");
  c.sim.allow_unstable_dt = root.get_or<bool>("allow_unstable_dt", false);
  c.sim.n_steps = root.get<long>("steps");
  if (c.sim.n_steps < 0) throw ValidationError("steps", "must be >= 0");

  const Reader src = root.sub("source");
  src.allow({"position", "f", "t0", "amplitude", "normalize"});
  const auto pos = src.get<std::vector<int>>("position");
  if (pos.size() != 3) throw ValidationError("source.position", "must be [i, j, k]");
  c.sim.source_pos = {pos[0], pos[1], pos[2]};
  c.sim.f = src.get_or<double>("f", kDefaultRickerFrequency);
  c.sim.t0 = src.get_or<double>("t0", 0.0);
  c.sim.amplitude = src.get_or<double>("amplitude", 1.0);
  c.sim.source_normalize = src.get_or<bool>("normalize", false);

  if (root.has("damping")) {
    const Reader d = root.sub("damping");
    d.allow({"enabled", "width", "alpha"});
    c.damping_enabled = d.get_or<bool>("enabled", true);
    c.damping_width = d.get_or<int>("width", kDefaultDampingWidth);
    c.damping_alpha = d.get_or<double>("alpha", kDefaultDampingAlpha);
    if (c.damping_width < 0) throw ValidationError("damping.width", "must be >= 0");
    if (c.damping_alpha < 0.0) throw ValidationError("damping.alpha", "must be >= 0");
  }

  if (root.has("kernel")) {
    const Reader k = root.sub("kernel");
    k.allow({"variant", "block_w", "block_h", "column_width", "tile_x", "tile_y"});
    try {
      c.sim.kernel = parse_kernel(k.get_or<std::string>("variant", "blocked"));
    } catch (const ParameterError& e) {
      throw ValidationError("kernel.variant", e.what());
    }
    c.sim.block_w = k.has("block_w") ? detail::positive_int(k, "block_w") : kDefaultBlockW;
    c.sim.block_h = k.has("block_h") ? detail::positive_int(k, "block_h") : kDefaultBlockH;
    c.sim.tile_x = k.has("tile_x") ? detail::positive_int(k, "tile_x") : 32;
    c.sim.tile_y = k.has("tile_y") ? detail::positive_int(k, "tile_y") : 8;
    c.sim.column_width = k.get_or<int>("column_width", 1);
    if (c.sim.column_width != 1 && c.sim.column_width != 2) {
      throw ValidationError("kernel.column_width", "must be 1 or 2");
    }
  }

  c.sim.threads = root.has("threads") ? detail::positive_int(root, "threads") : 1;
  try {
    c.sim.placement = parse_placement(root.get_or<std::string>("placement", "none"));
  } catch (const ParameterError& e) {
    throw ValidationError("placement", e.what());
  }
  try {
    c.sim.precision = parse_precision(root.get_or<std::string>("precision", "single"));
  } catch (const ParameterError& e) {
    throw ValidationError("precision", e.what());
  }
  c.sim.check_every = root.get_or<int>("check_every", 0);
  if (c.sim.check_every < 0) throw ValidationError("check_every", "must be >= 0");

  static const json kEmpty = json::object();
  const Reader out = root.has("output") ? root.sub("output") : Reader(kEmpty, "output");
  out.allow({"dir", "summary"});
  c.output_dir = resolve(out.get_or<std::string>("dir", "."));
  const fs::path summary(out.get_or<std::string>("summary", "summary.json"));
  c.summary_path = summary.is_absolute() ? summary : c.output_dir / summary;

  if (root.has("snapshots")) {
    const Reader s = root.sub("snapshots");
    s.allow({"every", "fields", "kind", "axis", "index", "dir"});
    c.snapshots.every = s.get<int>("every");
    if (c.snapshots.every < 0) throw ValidationError("snapshots.every", "must be >= 0");
    c.snapshots.fields = s.get_or<std::vector<std::string>>("fields", {"p"});
    const auto kind = s.get_or<std::string>("kind", "volume");
    if (kind == "volume") {
      c.snapshots.kind = io::SnapshotSpec::Kind::volume;
    } else if (kind == "plane") {
      c.snapshots.kind = io::SnapshotSpec::Kind::plane;
    } else {
      throw ValidationError("snapshots.kind", "must be volume or plane");
    }
    const auto axis = s.get_or<std::string>("axis", "z");
    if (axis.size() != 1) throw ValidationError("snapshots.axis", "must be x, y or z");
    c.snapshots.axis = axis[0];
    c.snapshots.index = s.get_or<int>("index", 0);
    const fs::path d(s.get_or<std::string>("dir", "snapshots"));
    c.snapshots.dir = d.is_absolute() ? d : c.output_dir / d;
  }
  return c;
}

inline RunConfig load(const fs::path& path) {
  const json doc = io::read_json(path);
  return parse(doc, path.parent_path());
}

/// VTI_THREADS and VTI_PLACEMENT take precedence over the document.
inline void apply_env_overrides(RunConfig& c) {
  if (const char* t = std::getenv("VTI_THREADS"); t && *t) {
    char* end = nullptr;
    const long v = std::strtol(t, &end, 10);
    if (*end != '\0' || v < 1) throw ValidationError("VTI_THREADS", "must be a positive integer");
    c.sim.threads = static_cast<int>(v);
  }
  if (const char* p = std::getenv("VTI_PLACEMENT"); p && *p) {
    try {
      c.sim.placement = parse_placement(p);
    } catch (const ParameterError& e) {
      throw ValidationError("VTI_PLACEMENT", e.what());
    }
  }
}

inline Grid make_grid(const RunConfig& c) {
  if (c.model_sidecar) return io::parse_model_sidecar(*c.model_sidecar).grid(c.r_xy, c.r_z);
  const GridSpec& g = *c.grid;
  if (!g.z_coords.empty()) return Grid::make(g.nx, g.ny, g.nz, g.h, g.z_coords, c.r_xy, c.r_z);
  return Grid::uniform(g.nx, g.ny, g.nz, g.h, g.dz, c.r_xy, c.r_z);
}

inline XYWeights load_xy_override(const fs::path& path, int r_xy, double h) {
  auto rows = io::read_weight_rows(path);
  if (rows.size() != 1) {
    throw ParameterError(path.string() + ": x-y weight file must hold exactly one row, found " +
                         std::to_string(rows.size()));
  }
  return xy_weights_from_row(std::move(rows[0]), r_xy, h);
}

/// Build model, weights and damping; resolves dt when it is "auto".
template <typename Real>
Problem<Real> build_problem(RunConfig& c) {
  const Grid grid = make_grid(c);
  EarthModel<Real> model = c.model_sidecar
                               ? io::load_model<Real>(io::parse_model_sidecar(*c.model_sidecar), grid, c.strict_aniso)
                               : constant_model<Real>(grid, c.vz, c.eps, c.delta, c.strict_aniso);
  XYWeights wxy = c.xy_weights_file ? load_xy_override(*c.xy_weights_file, c.r_xy, grid.h)
                                    : make_xy_weights(c.r_xy, grid.h);
  ZWeights wz = c.z_weights_file ? z_weights_from_rows(io::read_weight_rows(*c.z_weights_file), grid.z_coords, c.r_z)
                                 : make_z_weights(grid.z_coords, c.r_z);
  DampingProfile damp = build_damping(grid, c.damping_enabled ? c.damping_width : 0, c.damping_alpha);
  Problem<Real> pb(std::move(model), std::move(wxy), std::move(wz), std::move(damp));
  if (c.dt_auto) c.sim.dt = c.dt_fraction * stability_dt(pb);
  io::validate_snapshot_spec(c.snapshots, pb.grid());
  return pb;
}

}  // namespace vti::config
