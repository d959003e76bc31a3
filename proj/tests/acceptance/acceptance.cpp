// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "monoflow/monoflow.hpp"
#include "support/cli_runner.hpp"
#include "support/oracles.hpp"

using namespace monoflow;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

SystemDef config(const std::string& name) { return load_system(std::string(MONOFLOW_CONFIG_DIR) + "/" + name + ".json"); }

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
  std::fflush(stdout);
}

// Shared between criteria 1 and 2.
struct WitnessSample {
  WitnessProblem problem;
  WitnessResult result;
};
std::vector<WitnessSample> witness_cases;

Rational random_rational(Rng& rng, long long max_den, long long max_value) {
  const long long q = rng.integer(1, max_den);
  return Rational(rng.integer(1, max_value * q), q);
}

Outcome witness_soundness() {
  Rng rng = Rng::stream(2024, "acceptance.witness");
  const auto t0 = Clock::now();
  int bad = 0;
  std::string first_bad;
  std::size_t max_steps = 0;
  for (int k = 0; k < 10000; ++k) {
    WitnessProblem p;
    p.A = random_rational(rng, 1000, 100);
    p.B = random_rational(rng, 1000, 100);
    const long long r = rng.integer(1, 1000);
    p.E = p.A * Rational(rng.integer(1, r), r);
    const auto res = construct_witness(p);
    const auto chk = check_witness(p, res);
    // Iteration bound re-derived here: D0 = pE + F with F in (0, E].
    bool bound_ok = true;
    if (!res.trace.empty()) {
      const Rational d0 = p.A - (p.B - Rational(floor_rational(p.B / p.A)) * p.A);
      const BigInt pp = ceil_rational(d0 / p.E) - 1;
      bound_ok = BigInt(res.trace.size()) <= pp + 1;
    }
    const Rational off = Rational(res.l_star) * p.B - Rational(res.n_star) * p.A;
    if (!chk.ok() || !bound_ok || off < 0 || off > p.E) {
      if (bad++ == 0) first_bad = rational_to_string(p.A) + " " + rational_to_string(p.B) + " " + rational_to_string(p.E);
    }
    max_steps = std::max(max_steps, res.trace.size());
    witness_cases.push_back({p, res});
  }
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << witness_cases.size() << " triples, " << bad << " invalid, max iterations " << max_steps << ", " << secs << " s (limit 10 s)";
  if (bad) os << "; first invalid: " << first_bad;
  return {bad == 0 && secs < 10.0, os.str()};
}

Outcome witness_oracle() {
  int missing = 0;
  for (const auto& c : witness_cases) {
    const auto bf = brute_force_witness(c.problem, c.result.l_star);
    if (!bf) {
      ++missing;
      continue;
    }
    const Rational off = Rational(bf->first) * c.problem.B - Rational(bf->second) * c.problem.A;
    if (bf->first > c.result.l_star || off < 0 || off > c.problem.E) ++missing;
  }
  std::ostringstream os;
  os << witness_cases.size() - static_cast<std::size_t>(missing) << "/" << witness_cases.size() << " instances with a brute-force hit l <= l*";
  return {!witness_cases.empty() && missing == 0, os.str()};
}

// Corpus for the non-oscillation suite.
struct Instance {
  std::string name;
  SystemDef sys;
  MonotonicityCertificate cert;
  bool linear = false;
};

SystemDef linear_system(const std::string& name, const Matrix& a, const Cone& cone) {
  SystemDef s;
  s.name = name;
  s.dimension = static_cast<int>(a.rows());
  s.field = LinearField{a};
  s.cone = cone;
  s.box = {Vector::Constant(s.dimension, -1.0), Vector::Constant(s.dimension, 1.0)};
  return s;
}

// Spectral radius scaled to 0.9 keeps e^{+-20 A} well inside the norm cap.
Matrix bounded_metzler(Rng& rng, int n) {
  const Matrix a = oracle::random_metzler(rng, n);
  const double rho = a.eigenvalues().cwiseAbs().maxCoeff();
  return a * (0.9 / rho);
}

std::vector<Instance> oscillation_corpus() {
  std::vector<Instance> out;
  Rng rng = Rng::stream(7, "acceptance.corpus");
  auto add_linear = [&](const std::string& name, const Matrix& a, const Cone& cone) {
    Instance in{name, linear_system(name, a, cone), certify_linear(a, cone), true};
    out.push_back(std::move(in));
  };
  for (int n : {2, 3, 3, 4}) add_linear("metzler-" + std::to_string(out.size()), bounded_metzler(rng, n), Cone::positive_orthant(n));
  {
    const std::vector<int> s3{1, -1, 1}, s4{-1, 1, 1, -1};
    add_linear("conjugated-3", sign_conjugate(bounded_metzler(rng, 3), s3), Cone::orthant(s3));
    add_linear("conjugated-4", sign_conjugate(bounded_metzler(rng, 4), s4), Cone::orthant(s4));
  }
  add_linear("negated-metzler-3", -bounded_metzler(rng, 3), Cone::positive_orthant(3));
  {
    const std::vector<int> s{1, -1, -1};
    add_linear("negated-conjugated-3", -sign_conjugate(bounded_metzler(rng, 3), s), Cone::orthant(s));
  }
  for (int n : {3, 4}) {
    auto syn = oracle::synthesize_eventually_positive(rng, n);
    const double rho = syn.lambda.cwiseAbs().maxCoeff();
    add_linear("eventually-positive-" + std::to_string(n), syn.a * (0.9 / rho), Cone::positive_orthant(n));
  }
  for (const char* name : {"lv_competitive", "repressilator", "goodwin"}) {
    const auto sys = config(name);
    out.push_back({name, sys, certify_jacobian_signs(sys, 2000, 11), false});
  }
  return out;
}

Vector random_start(const Instance& in, Rng& rng) {
  Vector x(in.sys.dimension);
  for (int i = 0; i < in.sys.dimension; ++i) x(i) = rng.uniform(in.sys.box.lo(i), in.sys.box.hi(i));
  return x;
}

Outcome non_oscillation_suite() {
  const auto t0 = Clock::now();
  const double horizon = 20.0;
  const int samples = 500;
  const auto corpus = oscillation_corpus();
  int certified = 0, disjoint = 0, trajectories = 0, forward_only = 0;
  std::string uncertified, first_bad;
  for (const auto& in : corpus) {
    if (in.cert.kind == CertificateKind::NotDetected) {
      uncertified += (uncertified.empty() ? "" : ",") + in.name;
      continue;
    }
    ++certified;
    Rng rng = Rng::stream(99, "acceptance.oscillation." + in.name);
    IntegratorOptions io;
    io.max_step = horizon / samples;
    for (int k = 0; k < 100; ++k) {
      const Vector x0 = random_start(in, rng);
      const Trajectory fwd = integrate(in.sys, x0, horizon, Direction::Forward, io);
      Trajectory traj = fwd;
      try {
        traj = join_orbit(integrate(in.sys, x0, horizon, Direction::Backward, io), fwd);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::BlowUp && e.code() != ErrorCode::StepFailure) throw;
        ++forward_only;
      }
      ++trajectories;
      const auto v = non_oscillation_verdict(traj, in.sys.cone, 1e-6);
      if (v.status == OscillationStatus::Oscillating && v.disjoint) {
        if (disjoint++ == 0) first_bad = in.name + " trial " + std::to_string(k);
      }
    }
  }
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << certified << " certified systems, " << trajectories << " trajectories (" << forward_only
     << " forward-only after backward blow-up), " << disjoint << " disjoint oscillations, " << secs << " s (limit 300 s)";
  if (!uncertified.empty()) os << "; not certified: " << uncertified;
  if (disjoint) os << "; first: " << first_bad;
  return {certified >= 10 && trajectories >= 100 * certified && disjoint == 0 && secs < 300.0, os.str()};
}

Outcome discrete_suite() {
  Rng rng = Rng::stream(5, "acceptance.discrete");
  int oscillating = 0, maps = 0;
  for (int k = 0; k < 50; ++k) {
    const int n = 2 + k % 3;
    const Matrix p = oracle::random_positive(rng, n);
    const Matrix q_inv = oracle::random_positive(rng, n).inverse();  // inverse-positive map
    for (const Matrix* m : std::array<const Matrix*, 2>{&p, &q_inv}) {
      Vector z(n);
      for (int i = 0; i < n; ++i) z(i) = rng.normal();
      const auto v = discrete_scan(linear_map_orbit(*m, z, 64), Cone::positive_orthant(n), 1e-6);
      ++maps;
      if (v.status == OscillationStatus::Oscillating) ++oscillating;
    }
  }
  Matrix rot(2, 2);
  rot << 0, -1, 1, 0;
  const auto rv = discrete_scan(linear_map_orbit(rot, vec({1, 0}), 64), Cone::positive_orthant(2), 1e-6);
  const bool rot_ok = rv.status == OscillationStatus::Oscillating;
  std::ostringstream os;
  os << oscillating << "/" << maps << " positive or inverse-positive maps oscillating; rotation map: " << to_string(rv.status);
  return {oscillating == 0 && rot_ok, os.str()};
}

struct CycleRecord {
  std::string name;
  SystemDef sys;
  LimitSetEstimate est;
  LimitSetClass cls;
};
std::vector<CycleRecord> cycles;

Outcome non_ordering_suite() {
  int periodic = 0, passing = 0;
  std::ostringstream os;
  for (const char* name : {"repressilator", "repressilator_asym", "goodwin"}) {
    const auto sys = config(name);
    const auto cert = certify_jacobian_signs(sys, 2000, 11);
    if (!is_competitive(cert.kind)) {
      os << name << " not competitive; ";
      continue;
    }
    auto est = estimate_limit_set(sys, vec({0.3, 0.2, 0.1}), LimitDirection::Omega, 200, 20, 2);
    const auto cls = classify_limit_set(sys, est, sys.cone);
    os << name << " " << to_string(cls.verdict);
    if (cls.verdict != LimitVerdict::PeriodicOrbit) {
      os << "; ";
      continue;
    }
    ++periodic;
    const auto no = non_ordering_check(est.points, sys.cone, 1e-6);
    os << " T=" << *cls.period << " <<:" << (no.ok ? "ok" : "ordered") << " <:" << (no.strict_ok ? "ok" : "ordered") << "; ";
    if (no.ok && no.strict_ok) ++passing;
    cycles.push_back({name, sys, std::move(est), cls});
  }
  os << passing << "/" << periodic << " cycles unordered";
  return {periodic >= 3 && passing == periodic, os.str()};
}

Outcome projection_suite() {
  double worst_margin = std::numeric_limits<double>::infinity();
  for (const auto& c : cycles) worst_margin = std::min(worst_margin, project_and_check(c.est.points, c.sys.cone).injectivity_margin);
  const Vector v = vec({1, 1, 1}) / std::sqrt(3.0);
  double idem = 0.0;
  Rng rng = Rng::stream(8, "acceptance.theta");
  for (int k = 0; k < 10000; ++k) {
    Vector x(3);
    for (int i = 0; i < 3; ++i) x(i) = rng.uniform(-100, 100);
    const Vector once = theta(x, v);
    idem = std::max(idem, (theta(once, v) - once).norm() / std::max(1.0, x.norm()));
  }
  const double diag = theta(vec({1, 1, 1}), v).norm();
  std::ostringstream os;
  os << "min injectivity margin " << worst_margin << " over " << cycles.size() << " limit sets, idempotence error " << idem
     << ", |Theta(1,1,1)| = " << diag;
  return {!cycles.empty() && worst_margin > 0.0 && idem <= 1e-12 && diag <= 8 * std::numeric_limits<double>::epsilon(), os.str()};
}

// Newton from cloud points; a residual-1e-9 root closer to the cloud than the
// classifier's neighborhood counts as an equilibrium inside it.
bool equilibrium_in_cloud(const SystemDef& sys, const LimitSetEstimate& est, double neighborhood) {
  for (std::size_t k = 0; k < est.points.size(); k += 25) {
    const auto eq = newton_equilibrium(sys, est.points[k]);
    if (eq.point && eq.residual <= 1e-9 && distance_to_cloud(*eq.point, est.points) <= neighborhood) return true;
  }
  return false;
}

Outcome poincare_bendixson_suite() {
  std::ostringstream os;
  bool ok = true;
  const auto cyc = config("planar_cycle_3d");
  const auto est = estimate_limit_set(cyc, vec({0.3, 0.2, 0.1}), LimitDirection::Omega, 200, 20, 2);
  const auto cls = classify_limit_set(cyc, est, cyc.cone);
  const bool cyc_ok = cls.verdict == LimitVerdict::PeriodicOrbit && cls.period && std::abs(*cls.period - 2 * pi) <= 1e-3;
  ok = ok && cyc_ok;
  os << "planar-cycle-3d " << to_string(cls.verdict);
  if (cls.period) os << " |T-2pi|=" << std::abs(*cls.period - 2 * pi);
  const auto sink = config("sink");
  const auto sest = estimate_limit_set(sink, vec({1, 1}), LimitDirection::Omega, 50, 5, 2);
  const auto scls = classify_limit_set(sink, sest, sink.cone);
  ok = ok && scls.verdict == LimitVerdict::Equilibrium;
  os << "; sink " << to_string(scls.verdict);
  // Every classified instance, including the heteroclinic competitive LV.
  int checked = 0, misclassified = 0;
  std::vector<CycleRecord> all = cycles;
  all.push_back({"planar_cycle_3d", cyc, est, cls});
  all.push_back({"sink", sink, sest, scls});
  for (const char* name : {"lv_competitive", "planar_cycle"}) {
    const auto sys = config(name);
    Vector x0 = Vector::Constant(sys.dimension, 0.1);
    x0(0) = 0.3;
    auto e = estimate_limit_set(sys, x0, LimitDirection::Omega, 200, 20, 2);
    auto c = classify_limit_set(sys, e, sys.cone);
    all.push_back({name, sys, std::move(e), c});
  }
  for (const auto& r : all) {
    ++checked;
    if (r.cls.verdict == LimitVerdict::PeriodicOrbit && equilibrium_in_cloud(r.sys, r.est, r.cls.neighborhood)) ++misclassified;
  }
  ok = ok && misclassified == 0;
  os << "; " << misclassified << "/" << checked << " clouds with an equilibrium classified PeriodicOrbit";
  return {ok, os.str()};
}

double relative_match(const std::vector<std::complex<double>>& got, std::vector<double> want) {
  std::vector<double> g;
  for (const auto& z : got) g.push_back(std::abs(z.imag()) < 1e-8 ? z.real() : std::abs(z));
  if (g.size() != want.size()) return std::numeric_limits<double>::infinity();
  std::sort(g.rbegin(), g.rend());
  std::sort(want.rbegin(), want.rend());
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) worst = std::max(worst, std::abs(g[k] - want[k]) / std::abs(want[k]));
  return worst;
}

Outcome floquet_suite() {
  const auto p2 = floquet_multipliers(config("planar_cycle"), vec({1, 0}), 2 * pi);
  const auto p3 = floquet_multipliers(config("planar_cycle_3d"), vec({1, 0, 0}), 2 * pi);
  const double e2 = relative_match(p2.values, {1.0, std::exp(-4 * pi)});
  const double e3 = relative_match(p3.values, {1.0, std::exp(-4 * pi), std::exp(-2 * pi)});
  double liouville = std::max(p2.liouville_error.value_or(1.0), p3.liouville_error.value_or(1.0));
  int monodromies = 2;
  for (const auto& c : cycles) {
    const auto rep = floquet_multipliers(c.sys, *c.cls.section_point, *c.cls.period);
    liouville = std::max(liouville, rep.liouville_error.value_or(1.0));
    ++monodromies;
  }
  std::ostringstream os;
  os << "relative multiplier error 2D " << e2 << ", 3D " << e3 << " (limit 1e-3); max Liouville error " << liouville << " over "
     << monodromies << " monodromies (limit 1e-4)";
  return {e2 <= 1e-3 && e3 <= 1e-3 && liouville <= 1e-4, os.str()};
}

Outcome linear_certification_suite() {
  Rng rng = Rng::stream(13, "acceptance.linear");
  int metzler_ok = 0, negated_ok = 0, synth_ok = 0;
  const double horizon = 50.0;
  const int grid = 1024;
  for (int k = 0; k < 50; ++k) {
    const int n = 2 + k % 4;
    const Matrix a = oracle::random_metzler(rng, n);
    if (certify_linear(a, Cone::positive_orthant(n), horizon, grid).kind == CertificateKind::CooperativeImmediate) ++metzler_ok;
    if (certify_linear(-a, Cone::positive_orthant(n), horizon, grid).kind == CertificateKind::CompetitiveImmediate) ++negated_ok;
  }
  const double dt = horizon / grid;
  for (int k = 0; k < 20; ++k) {
    const int n = 3 + k % 3;
    const auto s = oracle::synthesize_eventually_positive(rng, n);
    const auto c = certify_linear(s.a, Cone::positive_orthant(n), horizon, grid);
    if (c.kind != CertificateKind::EventuallyCooperative || !c.tstar) continue;
    bool concur = true;
    for (int g = 1; g <= grid && concur; ++g) {
      const double t = dt * g;
      if (t + 1e-12 < *c.tstar) continue;
      concur = (oracle::scaled_exp(s, t).array() > 0).all();
    }
    if (concur) ++synth_ok;
  }
  std::ostringstream os;
  os << "Metzler CooperativeImmediate " << metzler_ok << "/50, negated CompetitiveImmediate " << negated_ok
     << "/50, synthesized EventuallyCooperative with oracle concurrence " << synth_ok << "/20";
  return {metzler_ok == 50 && negated_ok == 50 && synth_ok == 20, os.str()};
}

Outcome determinism_suite() {
  const fs::path dir = clirun::scratch_dir("acceptance");
  const std::string cfg = MONOFLOW_CONFIG_DIR;
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"witness", "witness --A 1 --B 0.55 --E 0.05 --oracle"},
      {"certify", "certify --system '" + cfg + "/lv_competitive.json' --pairs 50 --verify-trials 20"},
      {"oscillation", "oscillation --system '" + cfg + "/lv_competitive.json' --trials 5"},
      {"limitset", "limitset --system '" + cfg + "/repressilator.json' --x0 0.3,0.2,0.1 --emit-plot-data"},
      {"floquet", "floquet --system '" + cfg + "/planar_cycle.json' --x0 1,0 --period 6.283185307179586"},
      {"simulate", "simulate --system '" + cfg + "/goodwin.json' --t-end 30"},
  };
  int identical = 0;
  std::string differing;
  for (const auto& [sub, args] : runs) {
    bool same = true;
    for (const char* tag : {"a", "b"}) {
      const auto r = clirun::run("--seed 42 --out '" + (dir / (sub + tag)).string() + "' " + args, dir);
      if (r.exit_code != 0) same = false;
    }
    for (const auto& entry : fs::directory_iterator(dir / (sub + "a"))) {
      const auto name = entry.path().filename();
      if (name == "manifest.json") continue;  // records its own --out path
      if (!fs::exists(dir / (sub + "b") / name) || clirun::slurp(entry.path()) != clirun::slurp(dir / (sub + "b") / name)) same = false;
    }
    if (same) {
      ++identical;
    } else {
      differing += (differing.empty() ? "" : ",") + sub;
    }
  }
  fs::remove_all(dir);
  std::ostringstream os;
  os << identical << "/" << runs.size() << " subcommands with byte-identical reports across two runs";
  if (!differing.empty()) os << "; differing: " << differing;
  return {identical == static_cast<int>(runs.size()), os.str()};
}

}  // namespace

int main() {
  report(1, "witness soundness", witness_soundness);
  report(2, "witness-oracle agreement", witness_oracle);
  report(3, "non-oscillation of certified flows", non_oscillation_suite);
  report(4, "discrete non-oscillation", discrete_suite);
  report(5, "non-ordering of competitive cycles", non_ordering_suite);
  report(6, "Theta projection", projection_suite);
  report(7, "Poincare-Bendixson classification", poincare_bendixson_suite);
  report(8, "Floquet multipliers and Liouville", floquet_suite);
  report(9, "linear eventual positivity", linear_certification_suite);
  report(10, "CLI determinism", determinism_suite);
  return failures == 0 ? 0 : 1;
}
