#pragma once
// A family on disk: one value file per lattice point plus a JSON manifest.

#include <cstddef>
#include <filesystem>

#include "reachguard/family.hpp"

namespace reachguard {

struct PrecomputeReport {
  std::size_t solved = 0;
  std::size_t skipped = 0;  // already present with a matching key
  std::size_t total = 0;
};

/// File name of a lattice point inside a family directory.
std::string family_entry_name(const FamilyLattice& lattice, const LatticeIndex& idx);

/// Solves every admissible point whose file is missing or stale, writing the manifest after
/// each solve so an interrupted run resumes where it stopped. Write failures name the key.
PrecomputeReport precompute_to_directory(const FamilyLattice& lattice, const GridSpec& grid, double horizon,
                                         const SolverOptions& options, const std::filesystem::path& dir,
                                         ProgressFn progress = {});

/// Writes manifest.json for the entries present in `family`.
void write_family_manifest(const std::filesystem::path& dir, const FrtFamily& family);

/// Loads the manifest and every listed value file. Throws kIo on unreadable files and
/// kConfiguration when a file's key or grid disagrees with the manifest.
FrtFamily load_family(const std::filesystem::path& manifest);

}  // namespace reachguard
