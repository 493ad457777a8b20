#include "reachguard/family_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "reachguard/errors.hpp"
#include "reachguard/value_io.hpp"

namespace reachguard {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "reachguard-family-1";

const char* const kAxisKeys[kFamilyAxes] = {"v_start",    "min_start_u1", "min_start_u2",
                                            "max_start_u1", "max_start_u2", "min_end_u1",
                                            "min_end_u2", "max_end_u1",   "max_end_u2"};

json axis_json(const Axis& a) { return {a.lo, a.hi, a.n}; }

Axis axis_from(const json& j, bool periodic) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<int>(), periodic};
}

json manifest_json(const FrtFamily& f) {
  const auto& ax = f.grid.axes;
  const auto& o = f.options;
  json knots;
  for (int d = 0; d < kFamilyAxes; ++d) knots[kAxisKeys[d]] = f.lattice.knots[d];
  json entries = json::array();
  for (const auto& [idx, vf] : f.entries) {
    entries.push_back({{"index", idx}, {"file", family_entry_name(f.lattice, idx)}});
  }
  return {{"format", kFormat},
          {"grid", {{"x", axis_json(ax[0])}, {"y", axis_json(ax[1])}, {"theta", axis_json(ax[2])}, {"v", axis_json(ax[3])}}},
          {"horizon", f.horizon},
          {"solver",
           {{"dtau", o.dtau},
            {"order", o.order},
            {"scheme", o.scheme == NumericalHamiltonian::kGodunov ? "godunov" : "lax-friedrichs"},
            {"grid_scaled_l", o.grid_scaled_l},
            {"margins", {{"position", o.margins.position}, {"speed", o.margins.speed}, {"heading", o.margins.heading}}},
            {"caps", {{"steering_rate", o.caps.steering_rate}, {"acceleration", o.caps.acceleration}}}}},
          {"off_lattice_slack", f.off_lattice_slack},
          {"knots", knots},
          {"entries", entries}};
}

void write_manifest_file(const std::filesystem::path& dir, const json& j) {
  const auto path = dir / "manifest.json";
  const auto tmp = dir / "manifest.json.tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::kIo, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot replace " + path.string() + ": " + ec.message());
}

bool entry_matches(const ValueFunction& vf, const FrtKey& key, const GridSpec& grid, double horizon,
                   const SolverOptions& o) {
  return vf.key == key && vf.grid == grid && vf.horizon == horizon && vf.margins == o.margins &&
         vf.grid_scaled_l == o.grid_scaled_l;
}

}  // namespace

std::string family_entry_name(const FamilyLattice& lattice, const LatticeIndex& idx) {
  std::size_t flat = 0;
  for (int d = 0; d < kFamilyAxes; ++d) flat = flat * lattice.knots[d].size() + static_cast<std::size_t>(idx[d]);
  char buf[40];
  std::snprintf(buf, sizeof buf, "key_%08zu.frtv", flat);
  return buf;
}

PrecomputeReport precompute_to_directory(const FamilyLattice& lattice, const GridSpec& grid, double horizon,
                                         const SolverOptions& options, const std::filesystem::path& dir,
                                         ProgressFn progress) {
  lattice.validate();
  grid.validate();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());

  FrtFamily fam;
  fam.grid = grid;
  fam.horizon = horizon;
  fam.options = options;
  fam.lattice = lattice;
  fam.off_lattice_slack = default_off_lattice_slack(grid);

  const auto points = lattice.admissible_points();
  PrecomputeReport report;
  report.total = points.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const LatticeIndex idx = lattice.unravel(points[i]);
    const FrtKey key = lattice.key_at(idx);
    const auto file = dir / family_entry_name(lattice, idx);
    bool present = false;
    if (std::filesystem::exists(file)) {
      try {
        present = entry_matches(read_value_function(file), key, grid, horizon, options);
      } catch (const Error&) {
        present = false;
      }
    }
    if (present) {
      ++report.skipped;
    } else {
      const ValueFunction vf = [&] {
        try {
          return solve_frt(key, grid, horizon, options);
        } catch (const Error& e) {
          throw Error(e.kind(), "precompute: key " + describe_key(key) + ": " + e.what());
        }
      }();
      try {
        write_value_function(file, vf);
      } catch (const Error& e) {
        throw Error(ErrorKind::kIo, "precompute: key " + describe_key(key) + ": " + e.what());
      }
      ++report.solved;
    }
    // Only the index matters for the manifest; entries are loaded from disk on demand.
    fam.entries.emplace(idx, nullptr);
    write_manifest_file(dir, manifest_json(fam));
    if (progress) progress(i + 1, points.size(), key);
  }
  if (points.empty()) write_manifest_file(dir, manifest_json(fam));
  return report;
}

void write_family_manifest(const std::filesystem::path& dir, const FrtFamily& family) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  for (const auto& [idx, vf] : family.entries) {
    if (vf) write_value_function(dir / family_entry_name(family.lattice, idx), *vf);
  }
  write_manifest_file(dir, manifest_json(family));
}

FrtFamily load_family(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error(ErrorKind::kIo, "cannot open manifest " + manifest.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kIo, "malformed manifest " + manifest.string() + ": " + e.what());
  }
  FrtFamily f;
  try {
    if (j.at("format") != kFormat) throw Error(ErrorKind::kConfiguration, "unknown manifest format");
    const auto& g = j.at("grid");
    f.grid.axes[kDimX] = axis_from(g.at("x"), false);
    f.grid.axes[kDimY] = axis_from(g.at("y"), false);
    f.grid.axes[kDimTheta] = axis_from(g.at("theta"), true);
    f.grid.axes[kDimV] = axis_from(g.at("v"), false);
    f.horizon = j.at("horizon").get<double>();
    const auto& s = j.at("solver");
    f.options.dtau = s.at("dtau").get<double>();
    f.options.order = s.at("order").get<int>();
    f.options.scheme = s.at("scheme") == "godunov" ? NumericalHamiltonian::kGodunov
                                                   : NumericalHamiltonian::kLaxFriedrichs;
    f.options.grid_scaled_l = s.at("grid_scaled_l").get<bool>();
    f.options.margins = {s.at("margins").at("position").get<double>(), s.at("margins").at("speed").get<double>(),
                         s.at("margins").at("heading").get<double>()};
    f.options.caps = {s.at("caps").at("steering_rate").get<double>(), s.at("caps").at("acceleration").get<double>()};
    f.off_lattice_slack = j.at("off_lattice_slack").get<double>();
    for (int d = 0; d < kFamilyAxes; ++d) f.lattice.knots[d] = j.at("knots").at(kAxisKeys[d]).get<std::vector<double>>();
    f.lattice.validate();
    f.grid.validate();
    const auto dir = manifest.parent_path();
    for (const auto& e : j.at("entries")) {
      const LatticeIndex idx = e.at("index").get<LatticeIndex>();
      const auto file = dir / e.at("file").get<std::string>();
      auto vf = std::make_shared<ValueFunction>(read_value_function(file));
      if (!entry_matches(*vf, f.lattice.key_at(idx), f.grid, f.horizon, f.options)) {
        throw Error(ErrorKind::kConfiguration, "family entry " + file.string() + " does not match the manifest");
      }
      f.entries.emplace(idx, std::move(vf));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfiguration, "manifest " + manifest.string() + ": " + e.what());
  }
  return f;
}

}  // namespace reachguard
