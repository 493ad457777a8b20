#include "reachguard/tube_cache.hpp"

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstdio>
#include <sstream>
#include <system_error>

#include "reachguard/errors.hpp"
#include "reachguard/value_io.hpp"

namespace reachguard {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string file_name(const std::string& signature) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx.frtv", static_cast<unsigned long long>(fnv1a(signature)));
  return buf;
}

bool matches(const ValueFunction& vf, const FrtKey& key, const GridSpec& grid, double horizon,
             const SolverOptions& options) {
  return vf.key == key && vf.grid == grid && vf.horizon == horizon && vf.margins == options.margins &&
         vf.grid_scaled_l == options.grid_scaled_l;
}

}  // namespace

FrtKey quantize_key(const FrtKey& key, double q) {
  if (!(q > 0.0)) return key;
  FrtKey out;
  out.v_start = key.v_start;
  auto a = key.endpoints.to_array();
  for (int i = 0; i < 8; ++i) {
    // Lower bounds are the min_* entries: flat indices 0, 1, 4, 5.
    const bool lower = (i % 4) < 2;
    const double scaled = a[i] / q;
    // Guard against representation noise so exact multiples stay put.
    const double r = std::round(scaled);
    const double snapped = std::abs(scaled - r) < 1e-9 ? r : (lower ? std::floor(scaled) : std::ceil(scaled));
    a[i] = snapped * q;
  }
  out.endpoints = ControlBoundsEndpoints::from_array(a);
  return out;
}

const char* to_string(TubeOrigin origin) {
  switch (origin) {
    case TubeOrigin::kFamily: return "family";
    case TubeOrigin::kMemory: return "memory";
    case TubeOrigin::kDisk: return "disk";
    case TubeOrigin::kSolve: return "solve";
  }
  return "?";
}

std::string solve_signature(const FrtKey& key, const GridSpec& grid, double horizon,
                            const SolverOptions& options) {
  std::ostringstream os;
  os.precision(17);
  for (const auto& a : grid.axes) os << a.lo << ',' << a.hi << ',' << a.n << ',' << a.periodic << ';';
  os << "T=" << horizon << ";dtau=" << options.dtau << ";order=" << options.order
     << ";scheme=" << static_cast<int>(options.scheme) << ";scaled=" << options.grid_scaled_l
     << ";m=" << options.margins.position << ',' << options.margins.speed << ',' << options.margins.heading
     << ";caps=" << options.caps.steering_rate << ',' << options.caps.acceleration << ";v=" << key.v_start
     << ";b=";
  for (double x : key.endpoints.to_array()) os << x << ',';
  return os.str();
}

TubeCache::TubeCache(std::size_t capacity, std::filesystem::path dir, double quantum)
    : capacity_(std::max<std::size_t>(capacity, 1)), dir_(std::move(dir)), quantum_(quantum) {}

TubeCache TubeCache::from_environment(std::size_t capacity) {
  const char* env = std::getenv("REACHGUARD_CACHE_DIR");
  return TubeCache(capacity, env && *env ? std::filesystem::path(env) : std::filesystem::path());
}

std::size_t TubeCache::size() const {
  std::lock_guard lock(mutex_);
  return order_.size();
}

TubeLookup TubeCache::get(const FrtKey& key, const GridSpec& grid, double horizon,
                          const SolverOptions& options) {
  const FrtKey q = quantize_key(key, quantum_);
  const std::string sig = solve_signature(q, grid, horizon, options);
  {
    std::lock_guard lock(mutex_);
    if (auto it = index_.find(sig); it != index_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      ++hits_;
      return {it->second->second, TubeOrigin::kMemory, q};
    }
    ++misses_;
  }

  std::shared_ptr<const ValueFunction> vf;
  TubeOrigin origin = TubeOrigin::kSolve;
  const std::filesystem::path file = dir_.empty() ? std::filesystem::path() : dir_ / file_name(sig);
  if (!file.empty() && std::filesystem::exists(file)) {
    try {
      auto loaded = std::make_shared<ValueFunction>(read_value_function(file));
      if (matches(*loaded, q, grid, horizon, options)) {
        vf = std::move(loaded);
        origin = TubeOrigin::kDisk;
      }
    } catch (const Error& e) {
      warn(std::string("ignoring unreadable cache file ") + file.string() + ": " + e.what());
    }
  }
  if (!vf) {
    vf = std::make_shared<ValueFunction>(solve_frt(q, grid, horizon, options));
    if (!file.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(dir_, ec);
      try {
        // Write then rename so a concurrent reader never sees a partial file.
        const auto tmp = file.string() + ".tmp";
        write_value_function(tmp, *vf);
        std::filesystem::rename(tmp, file);
      } catch (const std::exception& e) {
        warn(std::string("could not write cache file ") + file.string() + ": " + e.what());
      }
    }
  }

  std::lock_guard lock(mutex_);
  if (auto it = index_.find(sig); it == index_.end()) {
    order_.emplace_front(sig, vf);
    index_[sig] = order_.begin();
    while (order_.size() > capacity_) {
      index_.erase(order_.back().first);
      order_.pop_back();
    }
  }
  return {vf, origin, q};
}

}  // namespace reachguard
