#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "monoflow/integrator.hpp"

namespace monoflow {

enum class LimitDirection { Omega, Alpha };

constexpr std::string_view to_string(LimitDirection d) { return d == LimitDirection::Omega ? "omega" : "alpha"; }

struct LimitSetOptions {
  int samples_per_window = 1000;
  double gap_threshold = 1e-3;  // Hausdorff gap above this marks the estimate unconverged
  IntegratorOptions integrator{Method::DP54, 1e-3, 1e-10, 1e-12};
};

struct LimitSetEstimate {
  std::vector<Vector> points;  // last window, time-ordered along the flow direction used
  LimitDirection direction = LimitDirection::Omega;
  Vector seed_state;
  double transient_time = 0.0;
  double sample_window = 0.0;
  double hausdorff_gap = 0.0;  // between the last two windows, as sampled curves
  std::vector<double> window_gaps;
  bool converged = false;
};

/// Symmetric Hausdorff distance between two finite point sets.
inline double hausdorff_distance(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  auto directed = [](const std::vector<Vector>& p, const std::vector<Vector>& q) {
    double worst = 0.0;
    for (const auto& x : p) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : q) best = std::min(best, (x - y).squaredNorm());
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  return std::max(directed(a, b), directed(b, a));
}

/// Hausdorff distance between the polylines through two time-ordered
/// samplings.
inline double polyline_hausdorff(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  auto to_segment = [](const Vector& x, const Vector& p, const Vector& q) {
    const Vector d = q - p;
    const double len2 = d.squaredNorm();
    const double s = len2 > 0.0 ? std::clamp((x - p).dot(d) / len2, 0.0, 1.0) : 0.0;
    return (x - p - s * d).squaredNorm();
  };
  auto directed = [&](const std::vector<Vector>& p, const std::vector<Vector>& q) {
    double worst = 0.0;
    for (const auto& x : p) {
      double best = (x - q.front()).squaredNorm();
      for (std::size_t k = 0; k + 1 < q.size(); ++k) best = std::min(best, to_segment(x, q[k], q[k + 1]));
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  return std::max(directed(a, b), directed(b, a));
}

/// Integrates through the transient (backward for Alpha), then samples
/// `refine` consecutive windows of equal length at uniform spacing.
inline LimitSetEstimate estimate_limit_set(const SystemDef& sys, const Vector& x0, LimitDirection direction, double transient,
                                           double window, int refine = 2, const LimitSetOptions& opts = {}) {
  if (!(transient > 0.0) || !(window > 0.0)) throw Error(ErrorCode::InvalidArgument, "transient and window must be positive");
  if (refine < 2) throw Error(ErrorCode::InvalidArgument, "refine must be at least 2");
  if (opts.samples_per_window < 2) throw Error(ErrorCode::InvalidArgument, "samples_per_window must be at least 2");
  if (x0.size() != sys.dimension) throw Error(ErrorCode::DimensionMismatch, "x0 dimension differs from system dimension");

  const double sign = direction == LimitDirection::Omega ? 1.0 : -1.0;
  auto advance = [&](const Vector& x, double dt) {
    try {
      return flow_to(sys, x, sign * dt, opts.integrator);
    } catch (const Error& e) {
      if (direction == LimitDirection::Alpha && (e.code() == ErrorCode::BlowUp || e.code() == ErrorCode::StepFailure)) {
        throw Error(ErrorCode::AlphaUnbounded, "backward orbit leaves the norm cap: " + e.detail(), e.value());
      }
      throw;
    }
  };

  LimitSetEstimate est;
  est.direction = direction;
  est.seed_state = x0;
  est.transient_time = transient;
  est.sample_window = window;

  Vector x = advance(x0, transient);
  const double dt = window / opts.samples_per_window;
  std::vector<Vector> previous;
  for (int w = 0; w < refine; ++w) {
    std::vector<Vector> current;
    current.reserve(static_cast<std::size_t>(opts.samples_per_window));
    for (int k = 0; k < opts.samples_per_window; ++k) {
      current.push_back(x);
      x = advance(x, dt);
    }
    if (!previous.empty()) est.window_gaps.push_back(polyline_hausdorff(previous, current));
    previous = std::move(current);
  }
  est.points = std::move(previous);
  est.hausdorff_gap = est.window_gaps.back();
  est.converged = est.hausdorff_gap <= opts.gap_threshold;
  return est;
}

struct OrderedPair {
  std::size_t i = 0;
  std::size_t j = 0;
  OrderRelation relation = OrderRelation::Incomparable;  // of the larger point relative to the smaller
  double min_slack = 0.0;  // max over both orientations of the minimum defining slack
};

struct NonOrderingReport {
  bool ok = true;         // no pair related by << beyond the margin
  bool strict_ok = true;  // no pair related by <
  std::size_t interior_pairs = 0;
  std::size_t strict_pairs = 0;
  std::size_t pairs_checked = 0;
  std::optional<OrderedPair> worst_pair;  // pair with the largest minimum slack
};

/// All-pairs check that the points are mutually unordered. Pairs closer
/// than `min_separation` are the same sample point and are skipped.
inline NonOrderingReport non_ordering_check(const std::vector<Vector>& points, const Cone& cone, double margin,
                                            double min_separation = 1e-9) {
  NonOrderingReport rep;
  const int n = cone.dimension();
  std::vector<double> d(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != n) throw Error(ErrorCode::DimensionMismatch, "point dimension differs from cone dimension");
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      for (int k = 0; k < n; ++k) d[static_cast<std::size_t>(k)] = points[j](k) - points[i](k);
      const auto st = difference_stats(cone, d.data());
      if (st.norm < min_separation) continue;
      ++rep.pairs_checked;
      const bool forward = st.min_slack >= -st.max_slack;
      const double slack = forward ? st.min_slack : -st.max_slack;
      OrderRelation rel = forward ? relation_from_stats(st, margin) : reverse_relation_from_stats(st, margin);
      if (rel == OrderRelation::Equal) rel = OrderRelation::Incomparable;  // norm <= margin: not distinguishable
      if (rel == OrderRelation::StrictInterior) {
        ++rep.interior_pairs;
        rep.ok = false;
      }
      if (is_strict(rel)) {
        ++rep.strict_pairs;
        rep.strict_ok = false;
      }
      if (!rep.worst_pair || slack > rep.worst_pair->min_slack) {
        rep.worst_pair = OrderedPair{forward ? i : j, forward ? j : i, rel, slack};
      }
    }
  }
  return rep;
}

/// x - (x . v) v
inline Vector theta(const Vector& x, const Vector& v) { return x - x.dot(v) * v; }

/// Unit interior direction: the orthant's sign vector, otherwise the
/// cone's interior certificate, normalized.
inline Vector default_interior_direction(const Cone& cone) {
  Vector v(cone.dimension());
  if (cone.kind() == ConeKind::Orthant) {
    for (int i = 0; i < cone.dimension(); ++i) v(i) = cone.signs()[static_cast<std::size_t>(i)];
  } else {
    v = cone.interior_point();
  }
  return v / v.norm();
}

struct ProjectionReport {
  Vector v;
  Matrix basis;  // N x (N-1), orthonormal columns spanning v-perp
  std::vector<Vector> projected;  // coordinates in `basis`
  double injectivity_margin = std::numeric_limits<double>::infinity();
  std::size_t pairs_used = 0;
};

/// Orthonormal basis of the complement of unit v, from a Householder QR.
inline Matrix complement_basis(const Vector& v) {
  const auto n = v.size();
  Eigen::HouseholderQR<Matrix> qr(Matrix(v.reshaped(n, 1)));
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  return q.rightCols(n - 1);
}

/// Theta-projection onto the hyperplane normal to v, and the smallest ratio
/// |Theta(p) - Theta(q)| / |p - q| over sample pairs.
inline ProjectionReport project_and_check(const std::vector<Vector>& points, const Cone& cone, std::optional<Vector> v = std::nullopt) {
  if (points.size() < 2) throw Error(ErrorCode::InvalidArgument, "projection check needs at least two points");
  ProjectionReport rep;
  const int n = cone.dimension();
  if (v) {
    if (v->size() != n) throw Error(ErrorCode::DimensionMismatch, "v dimension differs from cone dimension");
    if (!(v->norm() > 0.0)) throw Error(ErrorCode::VNotInterior, "v is zero");
    rep.v = *v / v->norm();
  } else {
    rep.v = default_interior_direction(cone);
  }
  if (!(cone.min_slack(rep.v) > 0.0)) throw Error(ErrorCode::VNotInterior, "v is not in the interior of the cone");
  rep.basis = complement_basis(rep.v);
  rep.projected.reserve(points.size());
  for (const auto& p : points) {
    if (p.size() != n) throw Error(ErrorCode::DimensionMismatch, "point dimension differs from cone dimension");
    rep.projected.push_back(rep.basis.transpose() * p);
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double dist = (points[i] - points[j]).norm();
      if (dist < 1e-9) continue;
      ++rep.pairs_used;
      rep.injectivity_margin = std::min(rep.injectivity_margin, (rep.projected[i] - rep.projected[j]).norm() / dist);
    }
  }
  return rep;
}

struct EquilibriumSearch {
  std::optional<Vector> point;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

/// Damped Newton on F(x) = 0 from `seed`, at most max_iter steps.
inline EquilibriumSearch newton_equilibrium(const SystemDef& sys, const Vector& seed, int max_iter = 50, double tol = 1e-9) {
  EquilibriumSearch out;
  Vector x = seed;
  Vector f;
  try {
    f = eval_field(sys, x);
  } catch (const Error&) {
    return out;
  }
  double res = f.norm();
  for (int it = 0; it < max_iter && res >= tol; ++it) {
    out.iterations = it + 1;
    const Matrix j = jacobian(sys, x);
    Eigen::FullPivLU<Matrix> lu(j);
    if (!lu.isInvertible()) break;
    const Vector step = lu.solve(f);
    double lambda = 1.0;
    bool improved = false;
    for (int k = 0; k < 30; ++k, lambda *= 0.5) {
      const Vector trial = x - lambda * step;
      try {
        const Vector ft = eval_field(sys, trial);
        if (ft.allFinite() && ft.norm() < res) {
          x = trial;
          f = ft;
          res = ft.norm();
          improved = true;
          break;
        }
      } catch (const Error&) {
      }
    }
    if (!improved) break;
  }
  out.residual = res;
  if (res < tol) out.point = x;
  return out;
}

enum class LimitVerdict { Equilibrium, PeriodicOrbit, ContainsEquilibrium, Inconclusive };

constexpr std::string_view to_string(LimitVerdict v) {
  switch (v) {
    case LimitVerdict::Equilibrium: return "Equilibrium";
    case LimitVerdict::PeriodicOrbit: return "PeriodicOrbit";
    case LimitVerdict::ContainsEquilibrium: return "ContainsEquilibrium";
    case LimitVerdict::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

struct ClassifyOptions {
  int seeds = 8;
  int newton_iterations = 50;
  double equilibrium_residual = 1e-9;
  double point_diameter = 1e-6;
  double recurrence_factor = 1e-4;  // times the cloud diameter
  int max_returns = 12;
  double max_return_time = 500.0;
  double bisection_time_tol = 1e-10;
  int recheck_points = 5;
  IntegratorOptions integrator{Method::DP54, 1e-3, 1e-11, 1e-13};
};

struct LimitSetClass {
  LimitVerdict verdict = LimitVerdict::Inconclusive;
  std::optional<Vector> equilibrium;
  std::optional<double> period;
  std::optional<Vector> section_point;  // point on the cycle where the period was measured
  double recurrence_error = std::numeric_limits<double>::quiet_NaN();
  double equilibrium_residual = std::numeric_limits<double>::infinity();
  double equilibrium_distance = std::numeric_limits<double>::infinity();  // from the nearest found equilibrium to the cloud
  double diameter = 0.0;
  double neighborhood = 0.0;  // an equilibrium closer than this to the cloud lies in it
  std::vector<std::string> notes;
};

inline double cloud_diameter(const std::vector<Vector>& pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).squaredNorm());
  return std::sqrt(d);
}

inline double distance_to_cloud(const Vector& x, const std::vector<Vector>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) best = std::min(best, (x - p).squaredNorm());
  return std::sqrt(best);
}

namespace detail {

struct SectionCrossing {
  double time;
  Vector point;
};

// Upward crossings of n.(x - c) = 0 along the forward orbit of x0,
// each located by bisection on the step that brackets it.
inline std::vector<SectionCrossing> section_crossings(const SystemDef& sys, const Vector& x0, const Vector& c, const Vector& normal,
                                                      int count, double max_time, double time_tol, const IntegratorOptions& io) {
  std::vector<SectionCrossing> out;
  auto g = [&](const Vector& x) { return normal.dot(x - c); };
  double t_prev = 0.0;
  Vector x_prev = x0;
  double g_prev = g(x0);
  auto rhs = [&](const Vector& x) -> Vector { return eval_field(sys, x); };
  integrate_observe(rhs, x0, max_time, io, [&](double t, const Vector& x) {
    if (t == 0.0) return true;
    const double gx = g(x);
    if (g_prev < 0.0 && gx >= 0.0) {
      double lo = 0.0, hi = t - t_prev;
      Vector at_hi = x;
      while (hi - lo > time_tol) {
        const double mid = 0.5 * (lo + hi);
        const Vector xm = flow_to(sys, x_prev, mid, io);
        if (g(xm) < 0.0) {
          lo = mid;
        } else {
          hi = mid;
          at_hi = xm;
        }
      }
      out.push_back(SectionCrossing{t_prev + hi, at_hi});
    }
    t_prev = t;
    x_prev = x;
    g_prev = gx;
    return static_cast<int>(out.size()) < count;
  });
  return out;
}

}  // namespace detail

/// Poincare-Bendixson classification of a sampled limit set: equilibria
/// near the cloud first, then a first-return period on a section through
/// the barycenter normal to the flow at the cloud point nearest it.
inline LimitSetClass classify_limit_set(const SystemDef& sys, const LimitSetEstimate& est, const Cone& cone,
                                        const ClassifyOptions& opts = {}) {
  (void)cone;
  const auto& pts = est.points;
  if (pts.empty()) throw Error(ErrorCode::InvalidArgument, "empty limit-set estimate");
  LimitSetClass out;
  out.diameter = cloud_diameter(pts);
  double spacing = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) spacing = std::max(spacing, (pts[k] - pts[k - 1]).norm());
  out.neighborhood = std::max(2.0 * spacing, opts.point_diameter);

  // Seeds spread evenly through the time-ordered cloud.
  const int seeds = std::max(1, std::min<int>(opts.seeds, static_cast<int>(pts.size())));
  for (int s = 0; s < seeds; ++s) {
    const std::size_t idx = static_cast<std::size_t>(s) * pts.size() / static_cast<std::size_t>(seeds);
    const auto eq = newton_equilibrium(sys, pts[idx], opts.newton_iterations, opts.equilibrium_residual);
    if (!eq.point) continue;
    const double dist = distance_to_cloud(*eq.point, pts);
    if (dist < out.equilibrium_distance) {
      out.equilibrium_distance = dist;
      out.equilibrium_residual = eq.residual;
      out.equilibrium = eq.point;
    }
  }
  if (out.equilibrium && out.equilibrium_distance <= out.neighborhood) {
    out.verdict = out.diameter < opts.point_diameter ? LimitVerdict::Equilibrium : LimitVerdict::ContainsEquilibrium;
    return out;
  }
  if (out.diameter < opts.point_diameter) {
    out.notes.push_back("cloud collapsed to a point but Newton found no equilibrium there");
    out.equilibrium.reset();
    return out;
  }

  Vector c = Vector::Zero(sys.dimension);
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  std::size_t nearest = 0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    if ((pts[k] - c).squaredNorm() < (pts[nearest] - c).squaredNorm()) nearest = k;
  }
  Vector normal = eval_field(sys, pts[nearest]);
  if (!(normal.norm() > 0.0)) {
    out.notes.push_back("zero flow at the section anchor");
    return out;
  }
  normal /= normal.norm();

  const auto crossings = detail::section_crossings(sys, pts[nearest], c, normal, opts.max_returns + 1, opts.max_return_time,
                                                   opts.bisection_time_tol, opts.integrator);
  if (crossings.size() < 2) {
    out.notes.push_back("fewer than two section crossings within the return-time budget");
    return out;
  }
  const double threshold = opts.recurrence_factor * out.diameter;
  const auto& first = crossings.front();
  for (std::size_t k = 1; k < crossings.size(); ++k) {
    const double err = (crossings[k].point - first.point).norm();
    if (std::isnan(out.recurrence_error) || err < out.recurrence_error) out.recurrence_error = err;
    if (err < threshold) {
      out.period = crossings[k].time - first.time;
      out.section_point = first.point;
      out.recurrence_error = err;
      break;
    }
  }
  if (!out.period) {
    out.notes.push_back("no first return within the recurrence threshold");
    return out;
  }
  if (sys.dimension != 3) {
    out.notes.push_back("closed orbit found; the periodic-orbit verdict is only issued in dimension 3");
    return out;
  }
  // Every cloud point should return after one period.
  const int checks = std::max(1, opts.recheck_points);
  for (int s = 0; s < checks; ++s) {
    const Vector& p = pts[static_cast<std::size_t>(s) * pts.size() / static_cast<std::size_t>(checks)];
    const double err = (flow_to(sys, p, *out.period, opts.integrator) - p).norm();
    if (!(err < threshold)) {
      out.notes.push_back("a cloud point fails to return after the measured period");
      return out;
    }
  }
  out.verdict = LimitVerdict::PeriodicOrbit;
  return out;
}

enum class SpectrumSite { EquilibriumPoint, Cycle };

struct SpectrumReport {
  SpectrumSite at = SpectrumSite::EquilibriumPoint;
  Vector point;
  std::optional<double> period;
  std::vector<std::complex<double>> values;  // eigenvalues or Floquet multipliers
  bool hyperbolic = false;
  double margin = 0.0;
  std::optional<std::size_t> trivial_index;
  std::optional<double> liouville_error;  // |det M - exp(int tr J)| / exp(int tr J)
  std::vector<std::string> notes;
};

inline std::vector<std::complex<double>> eigenvalues_of(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::EigenFailure, "eigenvalue iteration did not converge");
  std::vector<std::complex<double>> out(es.eigenvalues().begin(), es.eigenvalues().end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
  });
  return out;
}

/// Linearization spectrum at an equilibrium; hyperbolic iff min |Re| > 1e-6.
inline SpectrumReport spectrum_at_equilibrium(const SystemDef& sys, const Vector& x, double residual_tol = 1e-9) {
  const double res = eval_field(sys, x).norm();
  if (!(res < residual_tol)) throw Error(ErrorCode::NotEquilibrium, "|F(x)| = " + format_double(res), res);
  SpectrumReport rep;
  rep.at = SpectrumSite::EquilibriumPoint;
  rep.point = x;
  rep.values = eigenvalues_of(jacobian(sys, x));
  rep.margin = std::numeric_limits<double>::infinity();
  for (const auto& l : rep.values) rep.margin = std::min(rep.margin, std::abs(l.real()));
  rep.hyperbolic = rep.margin > 1e-6;
  return rep;
}

struct MonodromyResult {
  Matrix monodromy;
  double trace_integral = 0.0;
  Vector end_point;
};

/// Solution of X' = J(phi_t(p)) X, X(0) = I over [0, period], with the
/// integral of trace J carried along.
inline MonodromyResult monodromy(const SystemDef& sys, const Vector& p, double period, const IntegratorOptions& io) {
  const auto n = static_cast<Eigen::Index>(sys.dimension);
  Vector y(n + n * n + 1);
  y.head(n) = p;
  y.segment(n, n * n) = Matrix::Identity(n, n).reshaped();
  y(n + n * n) = 0.0;
  auto rhs = [&](const Vector& s) -> Vector {
    Vector ds(s.size());
    const Vector x = s.head(n);
    const Matrix j = jacobian(sys, x);
    ds.head(n) = eval_field(sys, x);
    ds.segment(n, n * n) = (j * s.segment(n, n * n).reshaped(n, n)).reshaped();
    ds(n + n * n) = j.trace();
    return ds;
  };
  Vector last = y;
  integrate_observe(rhs, y, period, io, [&](double, const Vector& s) {
    last = s;
    return true;
  });
  MonodromyResult out;
  out.end_point = last.head(n);
  out.monodromy = last.segment(n, n * n).reshaped(n, n);
  out.trace_integral = last(n + n * n);
  return out;
}

/// Floquet multipliers of the cycle through p. The multiplier closest to
/// 1 is the trivial one; the cycle is hyperbolic iff every other one has
/// | |mu| - 1 | > 1e-3.
inline SpectrumReport floquet_multipliers(const SystemDef& sys, const Vector& p, double period,
                                          const IntegratorOptions& io = {Method::DP54, 1e-3, 1e-12, 1e-14}) {
  if (p.size() != sys.dimension) throw Error(ErrorCode::DimensionMismatch, "point dimension differs from system dimension");
  if (!(period > 0.0)) throw Error(ErrorCode::InvalidArgument, "period must be positive");
  const auto mono = monodromy(sys, p, period, io);
  const double ret = (mono.end_point - p).norm();
  if (!(ret < 1e-4)) throw Error(ErrorCode::NotPeriodic, "|phi_T(p) - p| = " + format_double(ret), ret);

  SpectrumReport rep;
  rep.at = SpectrumSite::Cycle;
  rep.point = p;
  rep.period = period;
  rep.values = eigenvalues_of(mono.monodromy);
  const double expected_det = std::exp(mono.trace_integral);
  rep.liouville_error = std::abs(mono.monodromy.determinant() - expected_det) / expected_det;

  std::size_t triv = 0;
  for (std::size_t k = 1; k < rep.values.size(); ++k) {
    if (std::abs(rep.values[k] - 1.0) < std::abs(rep.values[triv] - 1.0)) triv = k;
  }
  rep.trivial_index = triv;
  rep.margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rep.values.size(); ++k) {
    if (k != triv) rep.margin = std::min(rep.margin, std::abs(std::abs(rep.values[k]) - 1.0));
  }
  if (std::abs(rep.values[triv] - 1.0) > 1e-3) {
    rep.hyperbolic = false;
    rep.notes.push_back("no multiplier within 1e-3 of 1; the trivial multiplier is not identified");
  } else {
    rep.hyperbolic = rep.margin > 1e-3;
  }
  return rep;
}

}  // namespace monoflow
