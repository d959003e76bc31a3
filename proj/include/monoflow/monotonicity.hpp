#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "monoflow/integrator.hpp"
#include "monoflow/rng.hpp"

namespace monoflow {

enum class CertificateKind {
  CooperativeImmediate,
  CompetitiveImmediate,
  EventuallyCooperative,
  EventuallyCompetitive,
  NotDetected,
};

constexpr std::string_view to_string(CertificateKind k) {
  switch (k) {
    case CertificateKind::CooperativeImmediate: return "CooperativeImmediate";
    case CertificateKind::CompetitiveImmediate: return "CompetitiveImmediate";
    case CertificateKind::EventuallyCooperative: return "EventuallyCooperative";
    case CertificateKind::EventuallyCompetitive: return "EventuallyCompetitive";
    case CertificateKind::NotDetected: return "NotDetected";
  }
  return "NotDetected";
}

constexpr bool is_cooperative(CertificateKind k) {
  return k == CertificateKind::CooperativeImmediate || k == CertificateKind::EventuallyCooperative;
}
constexpr bool is_competitive(CertificateKind k) {
  return k == CertificateKind::CompetitiveImmediate || k == CertificateKind::EventuallyCompetitive;
}

/// Evidence that the flow preserves the cone order after a transient t*
/// (forward for cooperative kinds, backward for competitive ones).
/// Sampled certificates are evidence, not proof; `pairs` records how many
/// ordered pairs backed the estimate.
struct MonotonicityCertificate {
  CertificateKind kind = CertificateKind::NotDetected;
  std::optional<double> tstar;
  bool strong = false;
  std::optional<double> tau_star;
  std::string evidence;
  int pairs = 0;
  int dropped = 0;
  int violations = 0;
};

/// True when every off-diagonal entry is >= 0.
inline bool is_metzler(const Matrix& a) {
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (i != j && a(i, j) < 0.0) return false;
  return true;
}

/// D A D with D = diag(signs): conjugation taking the orthant order to the
/// standard one.
inline Matrix sign_conjugate(const Matrix& a, const std::vector<int>& signs) {
  Matrix out = a;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out(i, j) = a(i, j) * signs[static_cast<std::size_t>(i)] * signs[static_cast<std::size_t>(j)];
  return out;
}

struct PerronFrobeniusCheck {
  bool holds = false;
  double eigenvalue = 0.0;
  std::string reason;
};

/// Strict dominance of a simple real eigenvalue whose right and left
/// eigenvectors are entrywise positive after sign normalization.
inline PerronFrobeniusCheck perron_frobenius_property(const Matrix& m) {
  PerronFrobeniusCheck out;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  Eigen::EigenSolver<Matrix> right(m);
  if (right.info() != Eigen::Success) throw Error(ErrorCode::EigenFailure, "eigensolver did not converge");
  const auto& ev = right.eigenvalues();
  Eigen::Index k = 0;
  for (Eigen::Index i = 1; i < ev.size(); ++i)
    if (ev(i).real() > ev(k).real()) k = i;
  const double lambda = ev(k).real();
  out.eigenvalue = lambda;
  if (std::abs(ev(k).imag()) > 1e-10 * scale) {
    out.reason = "dominant eigenvalue is not real";
    return out;
  }
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (i != k && ev(i).real() >= lambda - 1e-9 * scale) {
      out.reason = "dominant eigenvalue is not strictly dominant or not simple";
      return out;
    }
  }
  auto positive_after_normalization = [](Vector v) {
    if (v.sum() < 0) v = -v;
    const double tol = 1e-12 * v.cwiseAbs().maxCoeff();
    return (v.array() > tol).all();
  };
  if (!positive_after_normalization(right.eigenvectors().col(k).real())) {
    out.reason = "right eigenvector is not positive";
    return out;
  }
  Eigen::EigenSolver<Matrix> left(m.transpose());
  if (left.info() != Eigen::Success) throw Error(ErrorCode::EigenFailure, "eigensolver did not converge");
  Eigen::Index kl = 0;
  for (Eigen::Index i = 1; i < left.eigenvalues().size(); ++i)
    if (std::abs(left.eigenvalues()(i) - ev(k)) < std::abs(left.eigenvalues()(kl) - ev(k))) kl = i;
  if (!positive_after_normalization(left.eigenvectors().col(kl).real())) {
    out.reason = "left eigenvector is not positive";
    return out;
  }
  out.holds = true;
  return out;
}

/// First grid time t_k = k*horizon/grid after which exp(t M) stays entrywise
/// positive through the horizon; nullopt if it is not positive at the horizon.
/// The exponential is taken of t(M - lambda I) so large horizons do not overflow.
inline std::optional<double> exp_positivity_threshold(const Matrix& m, double lambda, double horizon, int grid) {
  const Matrix shifted = m - lambda * Matrix::Identity(m.rows(), m.cols());
  std::optional<double> threshold;
  for (int k = grid; k >= 1; --k) {
    const double t = horizon * static_cast<double>(k) / static_cast<double>(grid);
    const Matrix e = (t * shifted).exp();
    if (!(e.array() > 0.0).all()) break;
    threshold = t;
  }
  return threshold;
}

/// Exact certification for x' = A x under an orthant order.
inline MonotonicityCertificate certify_linear(const Matrix& a, const Cone& cone, double horizon = 50.0, int grid = 1024) {
  if (cone.kind() != ConeKind::Orthant) throw Error(ErrorCode::UnsupportedCone, "certify_linear handles orthant cones only");
  if (a.rows() != a.cols() || a.rows() != cone.dimension()) throw Error(ErrorCode::DimensionMismatch, "A must be NxN with N the cone dimension");
  if (!(horizon > 0.0) || grid < 1) throw Error(ErrorCode::InvalidArgument, "horizon and grid must be positive");

  const Matrix m = sign_conjugate(a, cone.signs());
  MonotonicityCertificate cert;
  if (is_metzler(m)) {
    cert.kind = CertificateKind::CooperativeImmediate;
    cert.tstar = 0.0;
    cert.evidence = "off-diagonal entries of the conjugated matrix are nonnegative (Metzler)";
    return cert;
  }
  const Matrix neg = -m;
  if (is_metzler(neg)) {
    cert.kind = CertificateKind::CompetitiveImmediate;
    cert.tstar = 0.0;
    cert.evidence = "off-diagonal entries of the conjugated matrix are nonpositive (-A Metzler)";
    return cert;
  }

  std::ostringstream ev;
  for (const auto& [mat, kind] : {std::pair{m, CertificateKind::EventuallyCooperative},
                                  std::pair{neg, CertificateKind::EventuallyCompetitive}}) {
    const auto pf = perron_frobenius_property(mat);
    if (!pf.holds) {
      ev << (kind == CertificateKind::EventuallyCooperative ? "A: " : "-A: ") << pf.reason << "; ";
      continue;
    }
    const auto t = exp_positivity_threshold(mat, pf.eigenvalue, horizon, grid);
    if (!t) {
      ev << "Perron-Frobenius property holds but exp(tA) is not positive by the horizon; ";
      continue;
    }
    cert.kind = kind;
    cert.tstar = *t;
    ev << "Perron-Frobenius property holds (lambda = " << pf.eigenvalue << "); exp(t"
       << (kind == CertificateKind::EventuallyCooperative ? "A" : "(-A)") << ") entrywise positive on the grid from t = " << *t
       << " to " << horizon << " (" << grid << " points)";
    cert.evidence = ev.str();
    return cert;
  }
  cert.evidence = ev.str();
  return cert;
}

/// Sufficient (Kamke) condition sampled over the system's box: every
/// off-diagonal Jacobian entry of the conjugated field has one sign.
inline MonotonicityCertificate certify_jacobian_signs(const SystemDef& sys, int samples, std::uint64_t seed, double tol = 1e-12) {
  if (sys.cone.kind() != ConeKind::Orthant) throw Error(ErrorCode::UnsupportedCone, "Jacobian sign scan handles orthant cones only");
  bool coop = true, comp = true;
  const int n = sys.dimension;
  for (int s = 0; s < samples && (coop || comp); ++s) {
    Rng rng = Rng::stream(seed, "monotonicity.jacobian", static_cast<std::uint64_t>(s));
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.uniform(sys.box.lo(i), sys.box.hi(i));
    const Matrix j = sign_conjugate(jacobian(sys, x), sys.cone.signs());
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        if (r == c) continue;
        if (j(r, c) < -tol) coop = false;
        if (j(r, c) > tol) comp = false;
      }
  }
  MonotonicityCertificate cert;
  cert.pairs = samples;
  std::ostringstream ev;
  ev << "Jacobian sign scan over " << samples << " box points: ";
  if (coop) {
    cert.kind = CertificateKind::CooperativeImmediate;
    cert.tstar = 0.0;
    ev << "off-diagonals >= 0";
  } else if (comp) {
    cert.kind = CertificateKind::CompetitiveImmediate;
    cert.tstar = 0.0;
    ev << "off-diagonals <= 0";
  } else {
    ev << "mixed off-diagonal signs";
  }
  cert.evidence = ev.str();
  return cert;
}

struct SamplingOptions {
  int pairs = 200;
  double horizon = 10.0;
  std::uint64_t seed = 0;
  double tol = 1e-9;           // order tolerance on sampled differences
  int grid = 1024;             // t* resolution is horizon / grid
  double min_separation = 1e-3;  // |y - x| range
  double max_separation = 1.0;
  double persist_fraction = 0.1;  // violations in the last 10% of the horizon count as persistent
  IntegratorOptions integrator{};
};

namespace detail {

struct PairSample {
  Vector x;
  Vector d;  // y - x, in the cone
};

inline PairSample draw_ordered_pair(const SystemDef& sys, Rng& rng, std::uint64_t index, double dmin, double dmax) {
  const int n = sys.dimension;
  PairSample p;
  p.x.resize(n);
  for (int i = 0; i < n; ++i) p.x(i) = rng.uniform(sys.box.lo(i), sys.box.hi(i));
  const auto rays = sys.cone.extreme_directions();
  Vector d = Vector::Zero(n);
  if (index % 4 == 3) {
    // boundary pair: x < y but not x << y
    d = rays[static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(rays.size()) - 1))];
  } else {
    for (const auto& r : rays) d += rng.uniform(0.05, 1.0) * r;
  }
  const double len = std::exp(rng.uniform(std::log(dmin), std::log(dmax)));
  p.d = d.normalized() * len;
  return p;
}

struct PairOutcome {
  bool dropped = false;
  bool ever_failed = false;
  double last_fail = -1.0;      // last sample time with the order broken
  double last_not_strong = -1.0;  // last sample time without <<
  double worst_margin = std::numeric_limits<double>::infinity();  // min slack for t >= from
  bool violated_after = false;  // order broken at some t >= from
};

/// Integrates (x, d) with d' = F(x + d) - F(x), so y = x + d, and tracks the
/// order relation of d along the common time grid.
inline PairOutcome track_pair(const SystemDef& sys, const PairSample& p, Direction dir, double horizon, double tol, double from,
                              IntegratorOptions opts) {
  const int n = sys.dimension;
  const double sign = dir == Direction::Forward ? 1.0 : -1.0;
  auto rhs = [&](const Vector& z) -> Vector {
    Vector out(2 * n);
    const Vector x = z.head(n);
    const Vector fx = eval_field(sys, x);
    out.head(n) = sign * fx;
    out.tail(n) = sign * (eval_field(sys, Vector(x + z.tail(n))) - fx);
    return out;
  };
  Vector z(2 * n);
  z << p.x, p.d;
  PairOutcome o;
  const Vector zero = Vector::Zero(n);
  try {
    integrate_observe(rhs, z, horizon, opts, [&](double t, const Vector& s) {
      const Vector d = s.tail(n);
      const double slack = sys.cone.min_slack(d);
      // broken: some defining inequality fails by more than tol
      const bool broken = slack < -tol;
      if (broken) {
        o.ever_failed = true;
        o.last_fail = t;
      }
      if (order_relation(sys.cone, zero, d, tol) != OrderRelation::StrictInterior) o.last_not_strong = t;
      if (t >= from) {
        o.worst_margin = std::min(o.worst_margin, slack);
        if (broken) o.violated_after = true;
      }
      return true;
    });
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BlowUp && e.code() != ErrorCode::DomainError && e.code() != ErrorCode::StepFailure) throw;
    o.dropped = true;
  }
  return o;
}

// Smallest grid point after the last bad sample.
inline double clear_grid_point(double last_bad, double cell) {
  if (last_bad < 0.0) return 0.0;
  return (std::floor(last_bad / cell) + 1.0) * cell;
}

}  // namespace detail

/// Sampling-based estimate of t* (and tau* for the strong variant).
///
/// Ordered pairs x <= y are drawn in the system's box and followed forward
/// and backward; a direction qualifies when no pair is still out of order
/// in the last `persist_fraction` of the horizon. Drops (blow-up) beyond
/// half the pairs make a direction unusable.
inline MonotonicityCertificate estimate_tstar_empirical(const SystemDef& sys, const SamplingOptions& o = {}) {
  if (o.pairs < 1 || !(o.horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "pairs and horizon must be positive");
  const double cell = o.horizon / o.grid;
  IntegratorOptions iopts = o.integrator;
  iopts.method = Method::DP54;
  iopts.max_step = std::min(iopts.max_step, cell);

  struct DirStats {
    int used = 0, dropped = 0, failing = 0, persistent = 0;
    double tstar = 0.0, tau = 0.0;
    bool strong = true;
  };
  auto run = [&](Direction dir) {
    DirStats s;
    for (int k = 0; k < o.pairs; ++k) {
      Rng rng = Rng::stream(o.seed, "monotonicity.pairs", static_cast<std::uint64_t>(k));
      const auto p = detail::draw_ordered_pair(sys, rng, static_cast<std::uint64_t>(k), o.min_separation, o.max_separation);
      const auto out = detail::track_pair(sys, p, dir, o.horizon, o.tol, o.horizon, iopts);
      if (out.dropped) {
        ++s.dropped;
        continue;
      }
      ++s.used;
      if (out.ever_failed) ++s.failing;
      if (out.last_fail >= (1.0 - o.persist_fraction) * o.horizon) ++s.persistent;
      s.tstar = std::max(s.tstar, detail::clear_grid_point(out.last_fail, cell));
      if (out.last_not_strong >= (1.0 - o.persist_fraction) * o.horizon) {
        s.strong = false;
      } else {
        s.tau = std::max(s.tau, detail::clear_grid_point(out.last_not_strong, cell));
      }
    }
    return s;
  };
  const DirStats fwd = run(Direction::Forward);
  const DirStats bwd = run(Direction::Backward);

  auto usable = [&](const DirStats& s) { return 2 * s.dropped <= o.pairs && s.used > 0; };
  auto qualified = [&](const DirStats& s) { return usable(s) && s.persistent == 0; };

  std::ostringstream ev;
  auto describe = [&](const char* name, const DirStats& s) {
    ev << name << ": " << s.used << " pairs used, " << s.dropped << " dropped, " << s.failing << " with order violations, "
       << s.persistent << " persistent";
  };
  ev << "sampled " << o.pairs << " ordered pairs over horizon " << o.horizon << " (seed " << o.seed << "); ";
  describe("forward", fwd);
  ev << "; ";
  describe("backward", bwd);

  MonotonicityCertificate cert;
  const bool fq = qualified(fwd), bq = qualified(bwd);
  if (!fq && !bq) {
    if (!usable(fwd) || !usable(bwd)) {
      throw Error(ErrorCode::SamplingFailure, "more than half of the sampled pairs blew up: " + ev.str());
    }
    cert.kind = CertificateKind::NotDetected;
    cert.pairs = o.pairs;
    cert.evidence = ev.str();
    return cert;
  }
  const bool forward = fq && (!bq || fwd.failing <= bwd.failing);
  const DirStats& s = forward ? fwd : bwd;
  cert.kind = forward ? CertificateKind::EventuallyCooperative : CertificateKind::EventuallyCompetitive;
  cert.tstar = s.tstar;
  cert.strong = s.strong;
  if (s.strong) cert.tau_star = s.tau;
  cert.pairs = s.used;
  cert.dropped = s.dropped;
  cert.evidence = ev.str();
  return cert;
}

struct OrderPreservationReport {
  int violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  int trials = 0;
  int dropped = 0;
};

/// Re-tests a certificate on fresh pairs: counts pairs whose order breaks at
/// some sample time in [t*, horizon] (forward for cooperative kinds,
/// backward for competitive) and records the most negative slack there.
inline OrderPreservationReport verify_order_preservation(const SystemDef& sys, const MonotonicityCertificate& cert,
                                                         const SamplingOptions& o = {}) {
  if (cert.kind == CertificateKind::NotDetected) throw Error(ErrorCode::InvalidArgument, "nothing to verify for NotDetected");
  if (o.pairs < 1 || !(o.horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "trials and horizon must be positive");
  const Direction dir = is_cooperative(cert.kind) ? Direction::Forward : Direction::Backward;
  const double from = cert.tstar.value_or(0.0);
  IntegratorOptions iopts = o.integrator;
  iopts.method = Method::DP54;
  iopts.max_step = std::min(iopts.max_step, o.horizon / o.grid);

  OrderPreservationReport rep;
  for (int k = 0; k < o.pairs; ++k) {
    Rng rng = Rng::stream(o.seed, "monotonicity.verify", static_cast<std::uint64_t>(k));
    const auto p = detail::draw_ordered_pair(sys, rng, static_cast<std::uint64_t>(k), o.min_separation, o.max_separation);
    const auto out = detail::track_pair(sys, p, dir, o.horizon, o.tol, from, iopts);
    if (out.dropped) {
      ++rep.dropped;
      continue;
    }
    ++rep.trials;
    if (out.violated_after) ++rep.violations;
    rep.worst_margin = std::min(rep.worst_margin, out.worst_margin);
  }
  if (2 * rep.dropped > o.pairs) throw Error(ErrorCode::SamplingFailure, "more than half of the verification pairs blew up");
  return rep;
}

}  // namespace monoflow
