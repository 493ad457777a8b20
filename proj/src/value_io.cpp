#include "reachguard/value_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "reachguard/errors.hpp"

namespace reachguard {

static_assert(std::endian::native == std::endian::little, "value files assume a little-endian host");

namespace {

constexpr char kMagic[5] = {'F', 'R', 'T', 'V', '1'};

template <class T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw Error(ErrorKind::kIo, "value file truncated in header");
  }
  return value;
}

void put_floats(std::ostream& out, const std::vector<float>& v) {
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(float)));
}

std::vector<float> get_floats(std::istream& in, std::size_t n) {
  std::vector<float> v(n);
  if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(float)))) {
    throw Error(ErrorKind::kIo, "value file truncated in data");
  }
  return v;
}

int nearest(const Axis& a, double value) {
  const double p = a.position(value);
  if (a.periodic) {
    const long r = std::lround(p);
    return static_cast<int>(((r % a.n) + a.n) % a.n);
  }
  return static_cast<int>(std::clamp<long>(std::lround(p), 0, a.n - 1));
}

}  // namespace

void write_value_function(std::ostream& out, const ValueFunction& vf) {
  if (vf.values.size() != vf.grid.size()) {
    throw Error(ErrorKind::kArgument, "write_value_function: values do not match the grid");
  }
  out.write(kMagic, sizeof(kMagic));
  put<std::uint8_t>(out, vf.grid_scaled_l ? 1 : 0);
  for (const Axis& a : vf.grid.axes) {
    put(out, a.lo);
    put(out, a.hi);
    put<std::int32_t>(out, a.n);
    put<std::uint8_t>(out, a.periodic ? 1 : 0);
  }
  put(out, vf.horizon);
  put(out, vf.key.v_start);
  for (double x : vf.key.endpoints.to_array()) put(out, x);
  put(out, vf.margins.position);
  put(out, vf.margins.speed);
  put(out, vf.margins.heading);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(vf.snapshots.size()));
  for (const auto& s : vf.snapshots) put(out, s.time);
  put_floats(out, vf.values);
  for (const auto& s : vf.snapshots) put_floats(out, s.values);
  if (!out) throw Error(ErrorKind::kIo, "write_value_function: stream write failed");
}

ValueFunction read_value_function(std::istream& in) {
  char magic[5] = {};
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorKind::kIo, "not a value file (bad magic)");
  }
  ValueFunction vf;
  vf.grid_scaled_l = get<std::uint8_t>(in) != 0;
  for (Axis& a : vf.grid.axes) {
    a.lo = get<double>(in);
    a.hi = get<double>(in);
    a.n = get<std::int32_t>(in);
    a.periodic = get<std::uint8_t>(in) != 0;
  }
  try {
    vf.grid.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::kIo, std::string("value file has an invalid grid: ") + e.what());
  }
  vf.horizon = get<double>(in);
  vf.key.v_start = get<double>(in);
  std::array<double, 8> ep{};
  for (double& x : ep) x = get<double>(in);
  vf.key.endpoints = ControlBoundsEndpoints::from_array(ep);
  vf.margins.position = get<double>(in);
  vf.margins.speed = get<double>(in);
  vf.margins.heading = get<double>(in);
  const auto count = get<std::uint32_t>(in);
  std::vector<double> times(count);
  for (double& t : times) t = get<double>(in);
  const std::size_t n = vf.grid.size();
  vf.values = get_floats(in, n);
  for (double t : times) vf.snapshots.push_back({t, get_floats(in, n)});
  vf.l_values = initial_value(vf.grid, vf.key.v_start, vf.margins, vf.grid_scaled_l);
  return vf;
}

void write_value_function(const std::filesystem::path& path, const ValueFunction& vf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  write_value_function(out, vf);
  out.close();
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

ValueFunction read_value_function(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return read_value_function(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void write_slice_csv(const std::filesystem::path& path, const ValueFunction& vf, double theta,
                     double v) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  const auto& ax = vf.grid.axes;
  const int it = nearest(ax[2], theta);
  const int iv = nearest(ax[3], v);
  out << std::setprecision(std::numeric_limits<float>::max_digits10);
  out << "x,y,value\n";
  for (int ix = 0; ix < ax[0].n; ++ix) {
    for (int iy = 0; iy < ax[1].n; ++iy) {
      out << ax[0].node(ix) << ',' << ax[1].node(iy) << ','
          << vf.values[vf.grid.index(ix, iy, it, iv)] << '\n';
    }
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

void write_mask_csv(const std::filesystem::path& path, const OccupancyGrid2D& grid) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "# " << grid.origin_x << ',' << grid.origin_y << ',' << grid.cell << ',' << grid.nx << ','
      << grid.ny << '\n';
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) out << (ix ? "," : "") << (grid.at(ix, iy) ? '1' : '0');
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

OccupancyGrid2D read_mask_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  auto bad = [&](const std::string& why) {
    return Error(ErrorKind::kIo, path.string() + ": malformed mask (" + why + ")");
  };
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw bad("missing header");
  std::istringstream hs(line.substr(2));
  double ox = 0, oy = 0, cell = 0;
  int nx = 0, ny = 0;
  char c1 = 0, c2 = 0, c3 = 0, c4 = 0;
  if (!(hs >> ox >> c1 >> oy >> c2 >> cell >> c3 >> nx >> c4 >> ny)) throw bad("header");
  OccupancyGrid2D g = OccupancyGrid2D::empty(ox, oy, cell, nx, ny);
  for (int iy = 0; iy < ny; ++iy) {
    if (!std::getline(in, line)) throw bad("too few rows");
    if (static_cast<int>(line.size()) != std::max(0, 2 * nx - 1)) throw bad("row length");
    for (int ix = 0; ix < nx; ++ix) {
      const char ch = line[2 * ix];
      if (ch != '0' && ch != '1') throw bad("cell value");
      g.set(ix, iy, ch == '1');
    }
  }
  return g;
}

}  // namespace reachguard
