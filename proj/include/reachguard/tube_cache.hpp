#pragma once
// On-demand tube solves behind an in-memory LRU and an optional directory of value files.

#include <cstddef>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "reachguard/reachability.hpp"

namespace reachguard {

/// Rounds lower bounds down and upper bounds up to multiples of q. The widened box keeps the
/// tube conservative. v_start is left alone since moving the initial set is not.
FrtKey quantize_key(const FrtKey& key, double q = 0.01);

enum class TubeOrigin { kFamily, kMemory, kDisk, kSolve };
const char* to_string(TubeOrigin origin);

struct TubeLookup {
  std::shared_ptr<const ValueFunction> tube;
  TubeOrigin origin = TubeOrigin::kSolve;
  FrtKey key;  // the key actually solved (quantized)
};

class TubeCache {
 public:
  /// An empty dir disables the disk layer.
  explicit TubeCache(std::size_t capacity = 64, std::filesystem::path dir = {}, double quantum = 0.01);

  /// Reads REACHGUARD_CACHE_DIR for the disk layer.
  static TubeCache from_environment(std::size_t capacity = 64);

  TubeLookup get(const FrtKey& key, const GridSpec& grid, double horizon, const SolverOptions& options);

  std::size_t size() const;
  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }
  const std::filesystem::path& directory() const { return dir_; }

 private:
  using Entry = std::pair<std::string, std::shared_ptr<const ValueFunction>>;

  std::size_t capacity_;
  std::filesystem::path dir_;
  double quantum_;
  mutable std::mutex mutex_;
  std::list<Entry> order_;  // most recent first
  std::unordered_map<std::string, std::list<Entry>::iterator> index_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

/// Text identifying a solve: grid, horizon, solver settings and key, at full precision.
std::string solve_signature(const FrtKey& key, const GridSpec& grid, double horizon,
                            const SolverOptions& options);

}  // namespace reachguard
