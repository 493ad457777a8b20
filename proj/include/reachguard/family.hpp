#pragma once

// A lattice of tube solves indexed by start speed and the eight bound endpoints.
// Each lattice point is an independent solve: the parameters have zero dynamics.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "reachguard/reachability.hpp"

namespace reachguard {

/// Axis 0 is v_start; axes 1..8 follow ControlBoundsEndpoints::to_array().
inline constexpr int kFamilyAxes = 9;

using LatticeIndex = std::array<int, kFamilyAxes>;

struct FamilyLattice {
  std::array<std::vector<double>, kFamilyAxes> knots;

  /// Every axis a single knot at the key's value.
  static FamilyLattice single(const FrtKey& key);

  /// Throws kConfiguration unless every knot vector is non-empty, finite and strictly increasing.
  void validate() const;

  std::size_t size() const;
  /// Row-major enumeration of all lattice points (axis 8 fastest).
  LatticeIndex unravel(std::size_t flat) const;
  FrtKey key_at(const LatticeIndex& idx) const;
  /// False when a lower bound exceeds its upper bound. Such points are never solved: a snapped
  /// query from a valid key never lands on one.
  bool admissible(const LatticeIndex& idx) const;
  /// Flat indices of the admissible points, in enumeration order.
  std::vector<std::size_t> admissible_points() const;
};

/// True for the endpoint axes that hold lower bounds (snapped down).
bool is_lower_bound_axis(int axis);

struct FrtFamily {
  GridSpec grid;
  double horizon = 3.0;
  SolverOptions options;
  FamilyLattice lattice;
  std::map<LatticeIndex, std::shared_ptr<const ValueFunction>> entries;
  // Subtracted from off-lattice answers. The discrete solver is not exactly additive over
  // unions of initial sets, so conservative answers need a little room.
  double off_lattice_slack = 0.0;
};

/// Default slack: half the largest grid spacing.
double default_off_lattice_slack(const GridSpec& grid);

/// Called after each finished solve with (done, total, key).
using ProgressFn = std::function<void(std::size_t, std::size_t, const FrtKey&)>;

/// Solves every admissible lattice point. Keys are solved in parallel with options.jobs workers,
/// each solve single-threaded. Solver errors are rethrown with the offending key.
FrtFamily family_precompute(const FamilyLattice& lattice, const GridSpec& grid, double horizon,
                            const SolverOptions& options = {}, ProgressFn progress = {});

/// Where a query lands on the lattice.
struct LatticeSnap {
  std::array<int, 2> v_index{};  // equal when v_start sits on a knot
  LatticeIndex bounds{};         // axis 0 unused
  bool exact = false;            // every component on a knot
};

/// Throws kOutOfRange if any component lies outside its knot range.
LatticeSnap snap_key(const FamilyLattice& lattice, const FrtKey& key);

/// On-lattice keys return the stored entry. Otherwise lower bounds snap down, upper bounds up,
/// an off-knot v_start takes the pointwise minimum of its two bracketing entries, and the
/// result is lowered by off_lattice_slack. Throws kOutOfRange outside the lattice or when a
/// needed entry is absent.
std::shared_ptr<const ValueFunction> family_query(const FrtFamily& family, const FrtKey& key);

/// Human-readable key, e.g. "v=5 u1[-0.3,0.3|-0.3,0.3] u2[-1,1|-1,1]".
std::string describe_key(const FrtKey& key);

}  // namespace reachguard
