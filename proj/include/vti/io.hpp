#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vti/error.hpp"
#include "vti/grid.hpp"
#include "vti/model.hpp"
#include "vti/state.hpp"

namespace vti::io {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

namespace detail {

template <typename T>
T byteswap_value(T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  std::reverse(b, b + sizeof(T));
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace detail

/// Raw little-endian values; the file must hold exactly `count` of them.
template <typename T>
std::vector<T> read_raw(const fs::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  in.seekg(0, std::ios::end);
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes != count * sizeof(T)) {
    throw IoError(path.string(), "expected " + std::to_string(count * sizeof(T)) + " bytes, found " +
                                     std::to_string(bytes));
  }
  in.seekg(0);
  std::vector<T> v(count);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw IoError(path.string(), "short read");
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& x : v) x = detail::byteswap_value(x);
  }
  return v;
}

template <typename T>
void write_raw(const fs::path& path, const std::vector<T>& v) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  if constexpr (std::endian::native == std::endian::big) {
    std::vector<T> tmp(v);
    for (auto& x : tmp) x = detail::byteswap_value(x);
    out.write(reinterpret_cast<const char*>(tmp.data()), static_cast<std::streamsize>(tmp.size() * sizeof(T)));
  } else {
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
  }
  if (!out) throw IoError(path.string(), "write failed");
}

inline json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path.string(), std::string("invalid JSON: ") + e.what());
  }
}

inline void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

/// Whitespace-separated decimal rows, one per line. Blank lines and lines
/// starting with '#' are skipped.
inline std::vector<std::vector<double>> read_weight_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open weight file");
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) {
        throw IoError(path.string(), "line " + std::to_string(lineno) + ": '" + tok + "' is not a number");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Sidecar describing a gridded model on disk:
///   {"nx", "ny", "nz", "h", "dz" | "z_coords", "field_order": [...], "files": [...]}
/// Field names are vz2 (or vz, squared on load), eps and delta; each file is
/// raw little-endian float32, x fastest then y then z. When z_coords is given
/// it must list nz + 2 r_z node depths (halo planes included).
struct ModelSidecar {
  int nx = 0, ny = 0, nz = 0;
  double h = 0.0;
  double dz = 0.0;
  std::vector<double> z_coords;
  std::vector<std::string> field_order;
  std::vector<fs::path> files;  // resolved against the sidecar directory

  Grid grid(int r_xy, int r_z) const {
    if (!z_coords.empty()) return Grid::make(nx, ny, nz, h, z_coords, r_xy, r_z);
    return Grid::uniform(nx, ny, nz, h, dz, r_xy, r_z);
  }
};

inline ModelSidecar parse_model_sidecar(const fs::path& path) {
  const json j = read_json(path);
  static const std::vector<std::string> known{"nx", "ny", "nz", "h", "dz", "z_coords", "field_order", "files"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ValidationError("model sidecar." + key, "unknown key");
    }
  }
  auto need = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw ValidationError(std::string("model sidecar.") + key, "missing");
    return j.at(key);
  };
  ModelSidecar s;
  try {
    s.nx = need("nx").get<int>();
    s.ny = need("ny").get<int>();
    s.nz = need("nz").get<int>();
    s.h = need("h").get<double>();
    if (j.contains("z_coords")) {
      s.z_coords = j.at("z_coords").get<std::vector<double>>();
    } else {
      s.dz = need("dz").get<double>();
    }
    s.field_order = need("field_order").get<std::vector<std::string>>();
    for (const auto& f : need("files").get<std::vector<std::string>>()) {
      const fs::path p(f);
      s.files.push_back(p.is_absolute() ? p : path.parent_path() / p);
    }
  } catch (const json::type_error& e) {
    throw ValidationError("model sidecar", e.what());
  }
  if (s.files.size() != s.field_order.size()) {
    throw ValidationError("model sidecar.files", "must list one file per field_order entry");
  }
  return s;
}

template <typename Real>
EarthModel<Real> load_model(const ModelSidecar& sc, const Grid& grid, bool strict_aniso) {
  const std::size_t n = grid.interior_points();
  std::vector<Real> vz2, eps, delta;
  auto convert = [](const std::vector<float>& in) { return std::vector<Real>(in.begin(), in.end()); };
  for (std::size_t f = 0; f < sc.field_order.size(); ++f) {
    const std::string& name = sc.field_order[f];
    const auto raw = read_raw<float>(sc.files[f], n);
    if (name == "vz2") {
      vz2 = convert(raw);
    } else if (name == "vz") {
      vz2.resize(n);
      for (std::size_t i = 0; i < n; ++i) vz2[i] = static_cast<Real>(static_cast<double>(raw[i]) * raw[i]);
    } else if (name == "eps") {
      eps = convert(raw);
    } else if (name == "delta") {
      delta = convert(raw);
    } else {
      throw ValidationError("model sidecar.field_order", "unknown field '" + name + "'");
    }
  }
  if (vz2.empty() || eps.empty() || delta.empty()) {
    throw ValidationError("model sidecar.field_order", "must provide vz2 (or vz), eps and delta");
  }
  return build_model<Real>(grid, vz2, eps, delta, strict_aniso);
}

/// What to dump while running: interior volumes or single planes.
struct SnapshotSpec {
  enum class Kind { volume, plane };
  int every = 0;  // 0 disables snapshots
  std::vector<std::string> fields{"p"};
  Kind kind = Kind::volume;
  char axis = 'z';  // plane normal
  int index = 0;    // interior index along axis
  fs::path dir;

  bool due(long step) const noexcept { return every > 0 && step % every == 0; }
};

/// Interior values of the current time level of `field`, x fastest; for a
/// plane the two remaining axes keep their natural order.
template <typename Real>
std::vector<Real> extract(const WaveState<Real>& s, const Grid& g, const SnapshotSpec& spec, const std::string& field,
                          std::vector<int>& dims) {
  const Array3D<Real>& a = field == "q" ? s.q_cur : s.p_cur;
  std::vector<Real> out;
  if (spec.kind == SnapshotSpec::Kind::volume) {
    dims = {g.nx, g.ny, g.nz};
    out = interior_values(a, g);
    return out;
  }
  switch (spec.axis) {
    case 'x':
      dims = {g.ny, g.nz};
      for (int k = 0; k < g.nz; ++k)
        for (int j = 0; j < g.ny; ++j) out.push_back(a(g.px(spec.index), g.py(j), g.pz(k)));
      break;
    case 'y':
      dims = {g.nx, g.nz};
      for (int k = 0; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i) out.push_back(a(g.px(i), g.py(spec.index), g.pz(k)));
      break;
    default:
      dims = {g.nx, g.ny};
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) out.push_back(a(g.px(i), g.py(j), g.pz(spec.index)));
      break;
  }
  return out;
}

inline void validate_snapshot_spec(const SnapshotSpec& spec, const Grid& g) {
  if (spec.every < 0) throw ValidationError("snapshots.every", "must be >= 0");
  for (const auto& f : spec.fields) {
    if (f != "p" && f != "q") throw ValidationError("snapshots.fields", "unknown field '" + f + "'");
  }
  if (spec.kind == SnapshotSpec::Kind::plane) {
    const int n = spec.axis == 'x' ? g.nx : spec.axis == 'y' ? g.ny : spec.axis == 'z' ? g.nz : -1;
    if (n < 0) throw ValidationError("snapshots.axis", "must be x, y or z");
    if (spec.index < 0 || spec.index >= n) throw ValidationError("snapshots.index", "outside the interior");
  }
}

inline std::string snapshot_stem(const std::string& field, long step) {
  std::ostringstream os;
  os << field << '_' << std::setw(6) << std::setfill('0') << step;
  return os.str();
}

/// Writes <dir>/<field>_<step>.bin (raw little-endian, run precision) plus a
/// JSON sidecar {step, time, field, dims, precision, kind[, axis, index]}.
template <typename Real>
void write_snapshot(const WaveState<Real>& s, const Grid& g, const SnapshotSpec& spec, double dt) {
  std::error_code ec;
  fs::create_directories(spec.dir, ec);
  if (ec) throw IoError(spec.dir.string(), "cannot create snapshot directory: " + ec.message());
  for (const auto& field : spec.fields) {
    std::vector<int> dims;
    const auto values = extract(s, g, spec, field, dims);
    const std::string stem = snapshot_stem(field, s.t_index);
    write_raw(spec.dir / (stem + ".bin"), values);
    json side{{"step", s.t_index},
              {"time", static_cast<double>(s.t_index) * dt},
              {"field", field},
              {"dims", dims},
              {"precision", sizeof(Real) == 4 ? "single" : "double"},
              {"kind", spec.kind == SnapshotSpec::Kind::volume ? "volume" : "plane"}};
    if (spec.kind == SnapshotSpec::Kind::plane) {
      side["axis"] = std::string(1, spec.axis);
      side["index"] = spec.index;
    }
    write_json(spec.dir / (stem + ".json"), side);
  }
}

}  // namespace vti::io
