#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "monoflow/system.hpp"

namespace monoflow {

enum class Method { RK4, DP54 };
enum class Direction { Forward, Backward };

constexpr std::string_view to_string(Method m) { return m == Method::RK4 ? "RK4" : "DP54"; }
constexpr std::string_view to_string(Direction d) { return d == Direction::Forward ? "Forward" : "Backward"; }

struct IntegratorOptions {
  Method method = Method::DP54;
  double step = 1e-3;  // RK4 step; the last step is not shortened, the grid is uniform
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double max_step = std::numeric_limits<double>::infinity();  // DP54 only
  double norm_cap = 1e9;
  long max_steps = 50'000'000;
};

/// Time-ordered samples of a flow. For Backward trajectories, states[k]
/// holds phi_{-times[k]}(x0).
struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  Direction direction = Direction::Forward;
  Method method = Method::DP54;
  IntegratorOptions options;

  std::size_t size() const noexcept { return times.size(); }
  int dimension() const { return states.empty() ? 0 : static_cast<int>(states.front().size()); }
  const Vector& final_state() const { return states.back(); }
};

namespace detail {

inline bool finite_within(const Vector& x, double cap) {
  return x.allFinite() && x.norm() <= cap;
}

// Dormand-Prince 5(4) tableau.
struct DP54Tableau {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b - bhat
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

/// Integrates the autonomous system x' = rhs(x) from t = 0 to t_end,
/// calling observer(t, x) at t = 0 and after every accepted step; the
/// observer returns false to stop early. Returns the last time reached.
///
/// Throws BlowUp (value = time reached) when |x| exceeds opts.norm_cap or
/// turns non-finite, StepFailure when the adaptive step underflows.
template <class Rhs, class Observer>
double integrate_observe(Rhs&& rhs, Vector x, double t_end, const IntegratorOptions& opts, Observer&& observer) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw Error(ErrorCode::InvalidArgument, "t_end must be positive and finite");
  if (!detail::finite_within(x, opts.norm_cap)) throw Error(ErrorCode::BlowUp, "initial state exceeds norm cap", 0.0);
  double t = 0.0;
  if (!observer(t, x)) return t;

  if (opts.method == Method::RK4) {
    if (!(opts.step > 0.0)) throw Error(ErrorCode::InvalidArgument, "RK4 step must be positive");
    const long n = std::max(1L, static_cast<long>(std::ceil(t_end / opts.step - 1e-9)));
    const double h = t_end / static_cast<double>(n);
    for (long k = 1; k <= n; ++k) {
      const Vector k1 = rhs(x);
      const Vector k2 = rhs(Vector(x + 0.5 * h * k1));
      const Vector k3 = rhs(Vector(x + 0.5 * h * k2));
      const Vector k4 = rhs(Vector(x + h * k3));
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t = (k == n) ? t_end : static_cast<double>(k) * h;
      if (!detail::finite_within(x, opts.norm_cap)) throw Error(ErrorCode::BlowUp, "norm cap exceeded", t);
      if (!observer(t, x)) return t;
    }
    return t;
  }

  using T = detail::DP54Tableau;
  auto err_norm = [&](const Vector& y0, const Vector& y1, const Vector& e) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      const double sc = opts.abs_tol + opts.rel_tol * std::max(std::abs(y0(i)), std::abs(y1(i)));
      const double r = e(i) / sc;
      acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(e.size()));
  };

  Vector k1 = rhs(x);
  // Initial step (Hairer, Norsett & Wanner II.4).
  double h;
  {
    const double d0 = err_norm(x, x, x);
    const double d1 = err_norm(x, x, k1);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min({h0, t_end, opts.max_step});
    const Vector k2 = rhs(Vector(x + h0 * k1));
    const double d2 = err_norm(x, x, Vector(k2 - k1)) / h0;
    const double h1 = (std::max(d1, d2) <= 1e-15) ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / std::max(d1, d2), 0.2);
    h = std::min({100.0 * h0, h1, t_end, opts.max_step});
  }

  long steps = 0;
  bool last_rejected = false;
  while (t < t_end) {
    if (++steps > opts.max_steps) throw Error(ErrorCode::StepFailure, "step budget exhausted", t);
    bool final_step = false;
    if (t + h >= t_end) {
      h = t_end - t;
      final_step = true;
    }
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      throw Error(ErrorCode::StepFailure, "adaptive step underflow", t);
    }
    const Vector k2 = rhs(Vector(x + h * (T::a21 * k1)));
    const Vector k3 = rhs(Vector(x + h * (T::a31 * k1 + T::a32 * k2)));
    const Vector k4 = rhs(Vector(x + h * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3)));
    const Vector k5 = rhs(Vector(x + h * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4)));
    const Vector k6 = rhs(Vector(x + h * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5)));
    Vector y = x + h * (T::b1 * k1 + T::b3 * k3 + T::b4 * k4 + T::b5 * k5 + T::b6 * k6);
    const Vector k7 = y.allFinite() ? rhs(y) : y;
    const Vector e = h * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);
    const double err = err_norm(x, y, e);

    if (!std::isfinite(err)) {
      h *= 0.2;
      last_rejected = true;
      continue;
    }
    if (err <= 1.0) {
      t = final_step ? t_end : t + h;
      x = std::move(y);
      k1 = k7;
      if (!detail::finite_within(x, opts.norm_cap)) throw Error(ErrorCode::BlowUp, "norm cap exceeded", t);
      if (!observer(t, x)) return t;
      double fac = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
      h = std::min(h * fac, opts.max_step);
      last_rejected = false;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      last_rejected = true;
    }
  }
  return t;
}

/// Sampled trajectory of the flow of `sys` from x0 over [0, t_end].
/// Backward integrates the negated field.
inline Trajectory integrate(const SystemDef& sys, const Vector& x0, double t_end, Direction direction = Direction::Forward,
                            const IntegratorOptions& opts = {}) {
  if (x0.size() != sys.dimension) throw Error(ErrorCode::DimensionMismatch, "x0 dimension differs from system dimension");
  Trajectory traj;
  traj.direction = direction;
  traj.method = opts.method;
  traj.options = opts;
  const double sign = direction == Direction::Forward ? 1.0 : -1.0;
  auto rhs = [&](const Vector& x) -> Vector { return sign * eval_field(sys, x); };
  integrate_observe(rhs, x0, t_end, opts, [&](double t, const Vector& x) {
    traj.times.push_back(t);
    traj.states.push_back(x);
    return true;
  });
  return traj;
}

/// phi_t(x), with negative t meaning backward time.
inline Vector flow_to(const SystemDef& sys, const Vector& x, double t, const IntegratorOptions& opts = {}) {
  if (t == 0.0) return x;
  const double sign = t > 0 ? 1.0 : -1.0;
  auto rhs = [&](const Vector& y) -> Vector { return sign * eval_field(sys, y); };
  Vector out = x;
  integrate_observe(rhs, x, std::abs(t), opts, [&](double, const Vector& y) {
    out = y;
    return true;
  });
  return out;
}

/// Complete orbit sampled on [-t_back, t_fwd]; times ascend through 0.
inline Trajectory join_orbit(const Trajectory& backward, const Trajectory& forward) {
  Trajectory out;
  out.direction = Direction::Forward;
  out.method = forward.method;
  out.options = forward.options;
  for (std::size_t k = backward.size(); k-- > 1;) {
    out.times.push_back(-backward.times[k]);
    out.states.push_back(backward.states[k]);
  }
  out.times.insert(out.times.end(), forward.times.begin(), forward.times.end());
  out.states.insert(out.states.end(), forward.states.begin(), forward.states.end());
  return out;
}

/// Same samples in reverse time order (t -> -t).
inline Trajectory reversed(const Trajectory& traj) {
  Trajectory out = traj;
  std::reverse(out.states.begin(), out.states.end());
  out.times.clear();
  for (auto it = traj.times.rbegin(); it != traj.times.rend(); ++it) out.times.push_back(-*it);
  out.direction = traj.direction == Direction::Forward ? Direction::Backward : Direction::Forward;
  return out;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// CSV with header "t,x1,...,xN", 17 significant digits, LF endings.
inline void write_csv(std::ostream& os, const Trajectory& traj) {
  os << 't';
  for (int i = 1; i <= traj.dimension(); ++i) os << ",x" << i;
  os << '\n';
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_double(traj.times[k]);
    for (Eigen::Index i = 0; i < traj.states[k].size(); ++i) os << ',' << format_double(traj.states[k](i));
    os << '\n';
  }
}

}  // namespace monoflow
