#pragma once

#include <optional>
#include <string>
#include <vector>

#include "monoflow/integrator.hpp"

namespace monoflow {

enum class IntervalKind { Increasing, Decreasing };

constexpr std::string_view to_string(IntervalKind k) { return k == IntervalKind::Increasing ? "Increasing" : "Decreasing"; }

/// [a, b] with x(a) < x(b) (Increasing) or x(a) > x(b) (Decreasing).
/// For discrete orbits a and b are integer indices stored as doubles.
struct MonotoneInterval {
  double a = 0.0;
  double b = 0.0;
  std::size_t ia = 0;  // sample indices of a and b
  std::size_t ib = 0;
  IntervalKind kind = IntervalKind::Increasing;
  OrderRelation strength = OrderRelation::Strict;
  bool steeply = false;
};

enum class OscillationStatus { NoIntervals, IncreasingOnly, DecreasingOnly, Oscillating };

constexpr std::string_view to_string(OscillationStatus s) {
  switch (s) {
    case OscillationStatus::NoIntervals: return "NoIntervals";
    case OscillationStatus::IncreasingOnly: return "IncreasingOnly";
    case OscillationStatus::DecreasingOnly: return "DecreasingOnly";
    case OscillationStatus::Oscillating: return "Oscillating";
  }
  return "NoIntervals";
}

struct OscillationVerdict {
  OscillationStatus status = OscillationStatus::NoIntervals;
  std::optional<MonotoneInterval> increasing;
  std::optional<MonotoneInterval> decreasing;
  bool disjoint = false;
  std::size_t increasing_count = 0;
  std::size_t decreasing_count = 0;
  std::size_t pairs_examined = 0;
};

/// Orbit z, Tz, T^2 z, ... of a map T, indexed from first_index.
struct DiscreteOrbit {
  long first_index = 0;
  std::vector<Vector> states;
  std::string map_meta;
};

constexpr std::size_t kDefaultMaxPairs = 4'000'000;

/// Calls visit(i, j) for every sample pair i < j when m^2 <= max_pairs,
/// otherwise for a stratified subsample: every k-th partner in each row,
/// with the row's starting offset cycling through 0..k-1 so that every
/// time gap is represented.
template <class Visit>
void for_each_sample_pair(std::size_t m, std::size_t max_pairs, Visit&& visit) {
  if (m < 2) return;
  if (m * m <= max_pairs) {
    for (std::size_t i = 0; i + 1 < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) visit(i, j);
    return;
  }
  const std::size_t total = m * (m - 1) / 2;
  const std::size_t budget = max_pairs > m ? max_pairs - m : 1;
  const std::size_t stride = std::max<std::size_t>(1, (total + budget - 1) / budget);
  for (std::size_t i = 0; i + 1 < m; ++i)
    for (std::size_t j = i + 1 + i % stride; j < m; j += stride) visit(i, j);
}

namespace detail {

// Classifies sample pairs into intervals and hands them to `sink`.
template <class Sink>
std::size_t scan_pairs(const std::vector<double>& times, const std::vector<Vector>& states, const Cone& cone, double tol,
                       std::size_t max_pairs, Sink&& sink) {
  const std::size_t m = states.size();
  const int n = cone.dimension();
  for (const auto& s : states) {
    if (s.size() != n) throw Error(ErrorCode::DimensionMismatch, "sample dimension differs from cone dimension");
  }
  std::vector<double> d(static_cast<std::size_t>(n));
  std::size_t examined = 0;
  for_each_sample_pair(m, max_pairs, [&](std::size_t i, std::size_t j) {
    ++examined;
    const double* xi = states[i].data();
    const double* xj = states[j].data();
    for (int k = 0; k < n; ++k) d[static_cast<std::size_t>(k)] = xj[k] - xi[k];
    const auto st = difference_stats(cone, d.data());
    const auto fwd = relation_from_stats(st, tol);
    if (is_strict(fwd)) {
      sink(MonotoneInterval{times[i], times[j], i, j, IntervalKind::Increasing, fwd, false});
      return;
    }
    const auto rev = reverse_relation_from_stats(st, tol);
    if (is_strict(rev)) sink(MonotoneInterval{times[i], times[j], i, j, IntervalKind::Decreasing, rev, false});
  });
  return examined;
}

inline OscillationVerdict verdict_from_samples(const std::vector<double>& times, const std::vector<Vector>& states, const Cone& cone,
                                               double tol, std::size_t max_pairs) {
  OscillationVerdict v;
  // Earliest-ending and latest-starting interval of each kind decide
  // whether some increasing/decreasing pair is disjoint.
  std::optional<MonotoneInterval> inc_min_b, inc_max_a, dec_min_b, dec_max_a;
  std::optional<MonotoneInterval> inc_first, dec_first;
  v.pairs_examined = scan_pairs(times, states, cone, tol, max_pairs, [&](const MonotoneInterval& iv) {
    auto& min_b = iv.kind == IntervalKind::Increasing ? inc_min_b : dec_min_b;
    auto& max_a = iv.kind == IntervalKind::Increasing ? inc_max_a : dec_max_a;
    auto& first = iv.kind == IntervalKind::Increasing ? inc_first : dec_first;
    (iv.kind == IntervalKind::Increasing ? v.increasing_count : v.decreasing_count)++;
    if (!first) first = iv;
    if (!min_b || iv.b < min_b->b) min_b = iv;
    if (!max_a || iv.a > max_a->a) max_a = iv;
  });

  if (v.increasing_count > 0 && v.decreasing_count > 0) {
    v.status = OscillationStatus::Oscillating;
    if (inc_min_b->b <= dec_max_a->a) {
      v.increasing = inc_min_b;
      v.decreasing = dec_max_a;
      v.disjoint = true;
    } else if (dec_min_b->b <= inc_max_a->a) {
      v.increasing = inc_max_a;
      v.decreasing = dec_min_b;
      v.disjoint = true;
    } else {
      v.increasing = inc_first;
      v.decreasing = dec_first;
    }
  } else if (v.increasing_count > 0) {
    v.status = OscillationStatus::IncreasingOnly;
    v.increasing = inc_first;
  } else if (v.decreasing_count > 0) {
    v.status = OscillationStatus::DecreasingOnly;
    v.decreasing = dec_first;
  }
  return v;
}

}  // namespace detail

/// Every increasing and decreasing interval between sample points, sorted
/// by a then b.
inline std::vector<MonotoneInterval> scan_monotone_intervals(const Trajectory& traj, const Cone& cone, double tol = 1e-6,
                                                             std::size_t max_pairs = kDefaultMaxPairs) {
  std::vector<MonotoneInterval> out;
  detail::scan_pairs(traj.times, traj.states, cone, tol, max_pairs, [&](const MonotoneInterval& iv) { out.push_back(iv); });
  return out;
}

/// Shrinks an increasing interval [a, b] to [t0, b], t0 the last sample in
/// [a, b] with x(t0) <= x(a); no later sample in the result lies below
/// x(t0), so the result is steeply increasing on the sample grid.
inline MonotoneInterval steepen(const Trajectory& traj, const Cone& cone, const MonotoneInterval& interval, double tol = 1e-6) {
  if (interval.kind != IntervalKind::Increasing) throw Error(ErrorCode::InvalidArgument, "only increasing intervals can be steepened");
  if (interval.ib >= traj.size() || interval.ia >= interval.ib || traj.times[interval.ia] != interval.a ||
      traj.times[interval.ib] != interval.b) {
    throw Error(ErrorCode::InvalidArgument, "interval does not match the trajectory samples");
  }
  const Vector& xa = traj.states[interval.ia];
  std::size_t t0 = interval.ia;
  for (std::size_t s = interval.ia; s <= interval.ib; ++s) {
    if (is_ordered(order_relation(cone, traj.states[s], xa, tol))) t0 = s;
  }
  if (t0 == interval.ib) {
    throw Error(ErrorCode::DegenerateInterval, "no strict increase survives steepening on the sample grid");
  }
  MonotoneInterval out = interval;
  out.ia = t0;
  out.a = traj.times[t0];
  out.strength = order_relation(cone, traj.states[t0], traj.states[interval.ib], tol);
  out.steeply = true;
  return out;
}

/// True when no sample in (a, b] lies at or below x(a).
inline bool is_steeply_increasing(const Trajectory& traj, const Cone& cone, const MonotoneInterval& iv, double tol) {
  for (std::size_t s = iv.ia + 1; s <= iv.ib; ++s) {
    if (is_ordered(order_relation(cone, traj.states[s], traj.states[iv.ia], tol))) return false;
  }
  return true;
}

/// Increasing and decreasing intervals on one trajectory, preferring a
/// disjoint witness pair when both kinds occur.
inline OscillationVerdict non_oscillation_verdict(const Trajectory& traj, const Cone& cone, double tol = 1e-6,
                                                  std::size_t max_pairs = kDefaultMaxPairs) {
  return detail::verdict_from_samples(traj.times, traj.states, cone, tol, max_pairs);
}

/// Integer-segment version for orbits of a map.
inline OscillationVerdict discrete_scan(const DiscreteOrbit& orbit, const Cone& cone, double tol = 1e-6,
                                        std::size_t max_pairs = kDefaultMaxPairs) {
  if (orbit.states.size() < 2) throw Error(ErrorCode::InvalidArgument, "orbit needs at least two states");
  std::vector<double> idx(orbit.states.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = static_cast<double>(orbit.first_index + static_cast<long>(k));
  return detail::verdict_from_samples(idx, orbit.states, cone, tol, max_pairs);
}

/// z, Mz, ..., M^steps z for the linear map x -> M x.
inline DiscreteOrbit linear_map_orbit(const Matrix& m, const Vector& z, int steps) {
  DiscreteOrbit orbit;
  orbit.map_meta = "linear map";
  orbit.states.reserve(static_cast<std::size_t>(steps) + 1);
  Vector x = z;
  orbit.states.push_back(x);
  for (int k = 0; k < steps; ++k) {
    x = m * x;
    orbit.states.push_back(x);
  }
  return orbit;
}

}  // namespace monoflow
