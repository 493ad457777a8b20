#include "reachguard/family.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "reachguard/errors.hpp"
#include "reachguard/parallel.hpp"

namespace reachguard {

namespace {

bool on_knot(double value, double knot) {
  return std::abs(value - knot) <= 1e-9 * std::max(1.0, std::abs(knot));
}

const char* axis_label(int axis) {
  static const char* names[kFamilyAxes] = {
      "v_start",     "min_start.u1", "min_start.u2", "max_start.u1", "max_start.u2",
      "min_end.u1",  "min_end.u2",   "max_end.u1",   "max_end.u2"};
  return names[axis];
}

}  // namespace

bool is_lower_bound_axis(int axis) { return axis == 1 || axis == 2 || axis == 5 || axis == 6; }

FamilyLattice FamilyLattice::single(const FrtKey& key) {
  FamilyLattice l;
  l.knots[0] = {key.v_start};
  const auto a = key.endpoints.to_array();
  for (int i = 0; i < 8; ++i) l.knots[i + 1] = {a[i]};
  return l;
}

void FamilyLattice::validate() const {
  for (int d = 0; d < kFamilyAxes; ++d) {
    const auto& k = knots[d];
    if (k.empty()) {
      throw Error(ErrorKind::kConfiguration, std::string("lattice axis ") + axis_label(d) + " has no knots");
    }
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (!std::isfinite(k[i]) || (i > 0 && !(k[i] > k[i - 1]))) {
        throw Error(ErrorKind::kConfiguration, std::string("lattice axis ") + axis_label(d) +
                                                   " must be finite and strictly increasing");
      }
    }
  }
}

std::size_t FamilyLattice::size() const {
  std::size_t n = 1;
  for (const auto& k : knots) n *= k.size();
  return n;
}

LatticeIndex FamilyLattice::unravel(std::size_t flat) const {
  LatticeIndex idx{};
  for (int d = kFamilyAxes - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(flat % knots[d].size());
    flat /= knots[d].size();
  }
  return idx;
}

FrtKey FamilyLattice::key_at(const LatticeIndex& idx) const {
  std::array<double, 8> a{};
  for (int i = 0; i < 8; ++i) a[i] = knots[i + 1].at(idx[i + 1]);
  return {knots[0].at(idx[0]), ControlBoundsEndpoints::from_array(a)};
}

bool FamilyLattice::admissible(const LatticeIndex& idx) const {
  const auto a = key_at(idx).endpoints.to_array();
  // min_start vs max_start, min_end vs max_end, per control.
  for (int i : {0, 1, 4, 5}) {
    if (a[i] > a[i + 2]) return false;
  }
  return true;
}

std::vector<std::size_t> FamilyLattice::admissible_points() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (admissible(unravel(i))) out.push_back(i);
  }
  return out;
}

double default_off_lattice_slack(const GridSpec& grid) { return 0.5 * grid.max_spacing(); }

std::string describe_key(const FrtKey& key) {
  const auto& e = key.endpoints;
  std::ostringstream s;
  s << "v=" << key.v_start << " u1[" << e.min_start[0] << "," << e.max_start[0] << "|"
    << e.min_end[0] << "," << e.max_end[0] << "] u2[" << e.min_start[1] << "," << e.max_start[1]
    << "|" << e.min_end[1] << "," << e.max_end[1] << "]";
  return s.str();
}

FrtFamily family_precompute(const FamilyLattice& lattice, const GridSpec& grid, double horizon,
                            const SolverOptions& options, ProgressFn progress) {
  lattice.validate();
  grid.validate();
  FrtFamily fam;
  fam.grid = grid;
  fam.horizon = horizon;
  fam.options = options;
  fam.lattice = lattice;
  fam.off_lattice_slack = default_off_lattice_slack(grid);

  const std::vector<std::size_t> points = lattice.admissible_points();
  const std::size_t total = points.size();
  if (total == 0) throw Error(ErrorKind::kConfiguration, "family_precompute: no admissible lattice point");
  const int workers = static_cast<int>(std::min<std::size_t>(resolve_jobs(options.jobs), total));
  SolverOptions inner = options;
  inner.jobs = std::max(1, resolve_jobs(options.jobs) / workers);

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next++;
      if (i >= total) return;
      {
        std::lock_guard lock(mu);
        if (failure) return;
      }
      const LatticeIndex idx = lattice.unravel(points[i]);
      const FrtKey key = lattice.key_at(idx);
      try {
        auto vf = std::make_shared<const ValueFunction>(solve_frt(key, grid, horizon, inner));
        std::lock_guard lock(mu);
        fam.entries.emplace(idx, std::move(vf));
        if (progress) progress(++done, total, key);
      } catch (const Error& e) {
        std::lock_guard lock(mu);
        if (!failure) {
          failure = std::make_exception_ptr(
              Error(e.kind(), "family_precompute: key " + describe_key(key) + ": " + e.what()));
        }
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
  return fam;
}

LatticeSnap snap_key(const FamilyLattice& lattice, const FrtKey& key) {
  LatticeSnap snap;
  snap.exact = true;
  auto out_of_range = [](int axis, double value) {
    std::ostringstream msg;
    msg << "family_query: " << axis_label(axis) << " = " << value << " lies outside the lattice";
    return Error(ErrorKind::kOutOfRange, msg.str());
  };

  const auto& vk = lattice.knots[0];
  const double v = key.v_start;
  if (!(v >= vk.front() - 1e-9 && v <= vk.back() + 1e-9)) throw out_of_range(0, v);
  auto hi = std::lower_bound(vk.begin(), vk.end(), v);
  if (hi != vk.end() && on_knot(v, *hi)) {
    snap.v_index = {static_cast<int>(hi - vk.begin()), static_cast<int>(hi - vk.begin())};
  } else if (hi != vk.begin() && on_knot(v, *(hi - 1))) {
    snap.v_index = {static_cast<int>(hi - vk.begin()) - 1, static_cast<int>(hi - vk.begin()) - 1};
  } else {
    snap.v_index = {static_cast<int>(hi - vk.begin()) - 1, static_cast<int>(hi - vk.begin())};
    snap.exact = false;
  }

  const auto a = key.endpoints.to_array();
  for (int d = 1; d < kFamilyAxes; ++d) {
    const auto& k = lattice.knots[d];
    const double x = a[d - 1];
    int pick = -1;
    for (int i = 0; i < static_cast<int>(k.size()); ++i) {
      if (on_knot(x, k[i])) {
        pick = i;
        break;
      }
    }
    if (pick < 0) {
      snap.exact = false;
      if (is_lower_bound_axis(d)) {
        auto it = std::upper_bound(k.begin(), k.end(), x);
        if (it == k.begin()) throw out_of_range(d, x);
        pick = static_cast<int>(it - k.begin()) - 1;
      } else {
        auto it = std::lower_bound(k.begin(), k.end(), x);
        if (it == k.end()) throw out_of_range(d, x);
        pick = static_cast<int>(it - k.begin());
      }
    }
    snap.bounds[d] = pick;
  }
  return snap;
}

std::shared_ptr<const ValueFunction> family_query(const FrtFamily& family, const FrtKey& key) {
  const LatticeSnap snap = snap_key(family.lattice, key);
  auto fetch = [&](int iv) {
    LatticeIndex idx = snap.bounds;
    idx[0] = iv;
    const auto it = family.entries.find(idx);
    if (it == family.entries.end()) {
      throw Error(ErrorKind::kOutOfRange,
                  "family_query: no entry for " + describe_key(family.lattice.key_at(idx)));
    }
    return it->second;
  };
  const auto first = fetch(snap.v_index[0]);
  if (snap.exact) return first;
  const auto second = snap.v_index[1] == snap.v_index[0] ? first : fetch(snap.v_index[1]);

  auto out = std::make_shared<ValueFunction>();
  out->grid = family.grid;
  out->horizon = family.horizon;
  out->key = key;
  out->margins = first->margins;
  const float slack = static_cast<float>(family.off_lattice_slack);
  auto merge = [](const std::vector<float>& a, const std::vector<float>& b, float shift) {
    std::vector<float> r(a.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::min(a[i], b[i]) - shift;
    return r;
  };
  out->values = merge(first->values, second->values, slack);
  out->l_values = merge(first->l_values, second->l_values, 0.0f);
  const std::size_t ns = std::min(first->snapshots.size(), second->snapshots.size());
  for (std::size_t s = 0; s < ns; ++s) {
    out->snapshots.push_back({first->snapshots[s].time,
                              merge(first->snapshots[s].values, second->snapshots[s].values, slack)});
  }
  return out;
}

}  // namespace reachguard
