// monoflow: command-line front end to the library.
//
// Exit status: 0 success, 1 domain error (JSON on stderr), 2 usage error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <nlohmann/json.hpp>

#include "monoflow/monoflow.hpp"
#include "monoflow/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace monoflow;

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::uint64_t seed = 0;
  std::string out = "monoflow-out";
  double tol_order = 1e-6;
  bool json_stdout = false;
  bool plot_data = false;
};

struct Run {
  std::string subcommand;
  std::vector<std::string> argv;
  json inputs = json::object();
  json tolerances = json::object();
  json report = json::object();
};

Vector parse_csv_vector(const std::string& text, const char* what) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(item, &used));
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string("--") + what + ": not a comma-separated list of numbers: '" + text + "'");
    }
  }
  if (vals.empty()) throw UsageError(std::string("--") + what + " is empty");
  Vector v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) v(static_cast<Eigen::Index>(i)) = vals[i];
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SystemDef system_input(Run& run, const std::string& path) {
  const std::string text = read_file(path);
  run.inputs["system"] = {{"path", path}, {"fnv1a", std::to_string(fnv1a(text))}};
  return parse_system_text(text);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + p.string() + "'");
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_points_csv(const fs::path& p, const std::vector<Vector>& pts) {
  std::ostringstream os;
  const auto n = pts.empty() ? 0 : pts.front().size();
  for (Eigen::Index i = 0; i < n; ++i) os << (i ? "," : "") << 'x' << (i + 1);
  os << '\n';
  for (const auto& x : pts) {
    for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? "," : "") << format_double(x(i));
    os << '\n';
  }
  write_text(p, os.str());
}

void write_trajectory_csv(const fs::path& p, const Trajectory& traj) {
  std::ostringstream os;
  write_csv(os, traj);
  write_text(p, os.str());
}

Vector box_center(const SystemDef& sys) { return 0.5 * (sys.box.lo + sys.box.hi); }

Vector random_box_point(const SystemDef& sys, std::uint64_t seed, std::string_view stream, std::uint64_t k) {
  Rng rng = Rng::stream(seed, stream, k);
  Vector x(sys.dimension);
  for (int i = 0; i < sys.dimension; ++i) x(i) = rng.uniform(sys.box.lo(i), sys.box.hi(i));
  return x;
}

Vector require_dim(const Vector& v, int n, const char* what) {
  if (v.size() != n) throw UsageError(std::string("--") + what + " needs " + std::to_string(n) + " components");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monotone-flow analysis: cone orders, eventual monotonicity, non-oscillation, limit sets"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--tol-order", g.tol_order, "Order tolerance on sampled differences")->check(CLI::NonNegativeNumber);
  app.add_flag("--json", g.json_stdout, "Print the JSON report on stdout");
  app.add_flag("--emit-plot-data", g.plot_data, "Write extra CSVs for plotting");

  // order
  auto* order = app.add_subcommand("order", "Order relation of two points");
  std::string order_cone, order_system, order_x, order_y;
  auto* order_cone_opt = order->add_option("--cone", order_cone, "Cone JSON fragment (inline or file)");
  order->add_option("--system", order_system, "Take the cone from a system file")->check(CLI::ExistingFile)->excludes(order_cone_opt);
  order->add_option("--x", order_x, "First point, comma-separated")->required();
  order->add_option("--y", order_y, "Second point, comma-separated")->required();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Integrate a trajectory");
  std::string sim_system, sim_x0, sim_method = "dp54";
  double sim_t = 10.0, sim_step = 1e-3, sim_rtol = 1e-9, sim_atol = 1e-12, sim_cap = 1e9;
  bool sim_backward = false;
  simulate->add_option("--system", sim_system)->required()->check(CLI::ExistingFile);
  simulate->add_option("--x0", sim_x0, "Initial state (default: box center)");
  simulate->add_option("--t-end", sim_t)->check(CLI::PositiveNumber);
  simulate->add_flag("--backward", sim_backward);
  simulate->add_option("--method", sim_method)->check(CLI::IsMember({"rk4", "dp54"}));
  simulate->add_option("--step", sim_step)->check(CLI::PositiveNumber);
  simulate->add_option("--rtol", sim_rtol)->check(CLI::PositiveNumber);
  simulate->add_option("--atol", sim_atol)->check(CLI::PositiveNumber);
  simulate->add_option("--norm-cap", sim_cap)->check(CLI::PositiveNumber);

  // certify
  auto* certify = app.add_subcommand("certify", "Certify eventual cooperativity/competitivity");
  std::string cert_system;
  int cert_pairs = 200, cert_grid = 1024, cert_jac = 10000, cert_verify = 0;
  double cert_horizon = 10.0, cert_lin_horizon = 50.0;
  certify->add_option("--system", cert_system)->required()->check(CLI::ExistingFile);
  certify->add_option("--pairs", cert_pairs)->check(CLI::PositiveNumber);
  certify->add_option("--horizon", cert_horizon, "Sampling horizon")->check(CLI::PositiveNumber);
  certify->add_option("--linear-horizon", cert_lin_horizon, "exp(tA) scan horizon")->check(CLI::PositiveNumber);
  certify->add_option("--grid", cert_grid)->check(CLI::PositiveNumber);
  certify->add_option("--jacobian-samples", cert_jac)->check(CLI::NonNegativeNumber);
  certify->add_option("--verify-trials", cert_verify, "Re-test the certificate on fresh pairs")->check(CLI::NonNegativeNumber);

  // oscillation
  auto* osc = app.add_subcommand("oscillation", "Non-oscillation verdicts on trajectories or map orbits");
  std::string osc_system, osc_x0;
  int osc_trials = 10, osc_samples = 500, osc_map_steps = 0;
  double osc_fwd = 20.0, osc_bwd = 20.0;
  std::size_t osc_max_pairs = kDefaultMaxPairs;
  osc->add_option("--system", osc_system)->required()->check(CLI::ExistingFile);
  osc->add_option("--x0", osc_x0, "Single initial state (default: --trials random box points)");
  osc->add_option("--trials", osc_trials)->check(CLI::PositiveNumber);
  osc->add_option("--horizon", osc_fwd, "Forward horizon")->check(CLI::PositiveNumber);
  osc->add_option("--backward-horizon", osc_bwd, "Backward horizon, 0 for forward only")->check(CLI::NonNegativeNumber);
  osc->add_option("--samples", osc_samples, "Minimum samples per direction")->check(CLI::PositiveNumber);
  osc->add_option("--max-pairs", osc_max_pairs)->check(CLI::PositiveNumber);
  osc->add_option("--map-steps", osc_map_steps, "Scan orbits of the linear map x -> Mx instead (linear family only)")
      ->check(CLI::NonNegativeNumber);

  // witness
  auto* wit = app.add_subcommand("witness", "Index witness (l*, n*) for interval lengths A, B, E");
  std::string wA, wB, wE;
  bool w_float = false, w_oracle = false;
  double w_eps = 1e-12;
  long long w_lmax = 1'000'000;
  wit->add_option("--A", wA)->required();
  wit->add_option("--B", wB)->required();
  wit->add_option("--E", wE)->required();
  wit->add_flag("--float", w_float, "Floating-point mode");
  wit->add_option("--eps", w_eps, "Float-mode boundary tolerance")->check(CLI::NonNegativeNumber);
  wit->add_flag("--oracle", w_oracle, "Also run the brute-force search");
  wit->add_option("--lmax", w_lmax)->check(CLI::PositiveNumber);

  // limitset
  auto* lim = app.add_subcommand("limitset", "Estimate and classify a limit set");
  std::string lim_system, lim_x0, lim_dir = "omega";
  double lim_transient = 200.0, lim_window = 20.0, lim_margin = 1e-6;
  int lim_refine = 2, lim_samples = 1000;
  lim->add_option("--system", lim_system)->required()->check(CLI::ExistingFile);
  lim->add_option("--x0", lim_x0)->required();
  lim->add_option("--direction", lim_dir)->check(CLI::IsMember({"omega", "alpha"}));
  lim->add_option("--transient", lim_transient)->check(CLI::PositiveNumber);
  lim->add_option("--window", lim_window)->check(CLI::PositiveNumber);
  lim->add_option("--refine", lim_refine)->check(CLI::Range(2, 64));
  lim->add_option("--samples", lim_samples, "Samples per window")->check(CLI::Range(2, 20000));
  lim->add_option("--margin", lim_margin, "Non-ordering margin")->check(CLI::NonNegativeNumber);

  // floquet
  auto* flo = app.add_subcommand("floquet", "Floquet multipliers of a cycle");
  std::string flo_system, flo_x0;
  double flo_period = 0.0;
  flo->add_option("--system", flo_system)->required()->check(CLI::ExistingFile);
  flo->add_option("--x0", flo_x0, "Point on the cycle")->required();
  flo->add_option("--period", flo_period)->required()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  Run run;
  run.subcommand = app.get_subcommands().front()->get_name();
  for (int i = 1; i < argc; ++i) run.argv.emplace_back(argv[i]);
  run.tolerances["order"] = g.tol_order;
  const fs::path out_dir(g.out);
  std::string summary;

  try {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) throw UsageError("cannot create output directory '" + g.out + "'");

    if (run.subcommand == "order") {
      Cone cone = Cone::positive_orthant(1);
      if (!order_system.empty()) {
        cone = system_input(run, order_system).cone;
      } else if (!order_cone.empty()) {
        const std::string text = fs::is_regular_file(order_cone) ? read_file(order_cone) : order_cone;
        try {
          cone = parse_cone(json::parse(text));
        } catch (const json::parse_error& e) {
          throw UsageError(std::string("--cone: invalid JSON: ") + e.what());
        }
      } else {
        throw UsageError("order needs --cone or --system");
      }
      const Vector x = parse_csv_vector(order_x, "x"), y = parse_csv_vector(order_y, "y");
      const auto fwd = order_relation(cone, x, y, g.tol_order);
      const auto back = order_relation(cone, y, x, g.tol_order);
      run.inputs["cone"] = cone_to_json(cone);
      run.inputs["x"] = report::vector_json(x);
      run.inputs["y"] = report::vector_json(y);
      const Vector d = y - x;
      run.report = {{"relation", std::string(to_string(fwd))},
                    {"reverse_relation", std::string(to_string(back))},
                    {"min_slack", cone.min_slack(d)}};
      summary = std::string(to_string(fwd));

    } else if (run.subcommand == "simulate") {
      const SystemDef sys = system_input(run, sim_system);
      const Vector x0 = sim_x0.empty() ? box_center(sys) : require_dim(parse_csv_vector(sim_x0, "x0"), sys.dimension, "x0");
      IntegratorOptions io;
      io.method = sim_method == "rk4" ? Method::RK4 : Method::DP54;
      io.step = sim_step;
      io.rel_tol = sim_rtol;
      io.abs_tol = sim_atol;
      io.norm_cap = sim_cap;
      run.tolerances["integrator"] = {{"method", sim_method}, {"step", sim_step}, {"rtol", sim_rtol}, {"atol", sim_atol}, {"norm_cap", sim_cap}};
      run.inputs["x0"] = report::vector_json(x0);
      run.inputs["t_end"] = sim_t;
      const auto traj = integrate(sys, x0, sim_t, sim_backward ? Direction::Backward : Direction::Forward, io);
      write_trajectory_csv(out_dir / "trajectory.csv", traj);
      run.report = {{"direction", std::string(to_string(traj.direction))},
                    {"method", std::string(to_string(traj.method))},
                    {"samples", traj.size()},
                    {"t_reached", traj.times.back()},
                    {"final_state", report::vector_json(traj.final_state())},
                    {"csv", "trajectory.csv"}};
      summary = std::to_string(traj.size()) + " samples";

    } else if (run.subcommand == "certify") {
      const SystemDef sys = system_input(run, cert_system);
      MonotonicityCertificate cert;
      std::string method;
      const auto* lin = std::get_if<LinearField>(&sys.field);
      if (lin && sys.cone.kind() == ConeKind::Orthant) {
        method = "linear";
        cert = certify_linear(lin->matrix, sys.cone, cert_lin_horizon, cert_grid);
        run.tolerances["linear"] = {{"horizon", cert_lin_horizon}, {"grid", cert_grid}};
      } else {
        if (sys.cone.kind() == ConeKind::Orthant && cert_jac > 0) {
          cert = certify_jacobian_signs(sys, cert_jac, g.seed);
          method = "jacobian_signs";
          run.tolerances["jacobian_signs"] = {{"samples", cert_jac}, {"tol", 1e-12}};
        }
        if (cert.kind == CertificateKind::NotDetected) {
          SamplingOptions so;
          so.pairs = cert_pairs;
          so.horizon = cert_horizon;
          so.grid = cert_grid;
          so.seed = g.seed;
          cert = estimate_tstar_empirical(sys, so);
          method = "empirical";
          run.tolerances["empirical"] = {{"pairs", so.pairs}, {"horizon", so.horizon}, {"grid", so.grid}, {"tol", so.tol},
                                         {"min_separation", so.min_separation}, {"max_separation", so.max_separation},
                                         {"rtol", so.integrator.rel_tol}, {"atol", so.integrator.abs_tol}};
        }
      }
      run.report = report::certificate(cert);
      run.report["method"] = method;
      if (cert_verify > 0 && cert.kind != CertificateKind::NotDetected) {
        SamplingOptions vo;
        vo.pairs = cert_verify;
        vo.horizon = cert_horizon;
        vo.grid = cert_grid;
        vo.seed = g.seed;
        const auto rep = verify_order_preservation(sys, cert, vo);
        run.report["verification"] = {{"trials", rep.trials},
                                      {"violations", rep.violations},
                                      {"dropped", rep.dropped},
                                      {"worst_margin", report::number_or_null(rep.worst_margin)}};
      }
      summary = std::string(to_string(cert.kind));

    } else if (run.subcommand == "oscillation") {
      const SystemDef sys = system_input(run, osc_system);
      run.tolerances["max_pairs"] = osc_max_pairs;
      json trials = json::array();
      std::size_t oscillating = 0, disjoint = 0;
      json plot_rows = json::array();
      auto record = [&](std::size_t k, const OscillationVerdict& v, const json& extra) {
        json t = report::verdict(v);
        t["trial"] = k;
        for (auto it = extra.begin(); it != extra.end(); ++it) t[it.key()] = it.value();
        if (v.status == OscillationStatus::Oscillating) ++oscillating;
        if (v.status == OscillationStatus::Oscillating && v.disjoint) ++disjoint;
        trials.push_back(std::move(t));
      };

      const int n_trials = osc_x0.empty() ? osc_trials : 1;
      if (osc_map_steps > 0) {
        const auto* lin = std::get_if<LinearField>(&sys.field);
        if (!lin) throw UsageError("--map-steps needs a linear-family system");
        run.inputs["map_steps"] = osc_map_steps;
        for (int k = 0; k < n_trials; ++k) {
          const Vector z = osc_x0.empty() ? random_box_point(sys, g.seed, "cli.oscillation", static_cast<std::uint64_t>(k))
                                          : require_dim(parse_csv_vector(osc_x0, "x0"), sys.dimension, "x0");
          const auto orbit = linear_map_orbit(lin->matrix, z, osc_map_steps);
          record(static_cast<std::size_t>(k), discrete_scan(orbit, sys.cone, g.tol_order, osc_max_pairs), {{"x0", report::vector_json(z)}});
        }
      } else {
        IntegratorOptions io;
        run.tolerances["integrator"] = {{"method", "DP54"}, {"rtol", io.rel_tol}, {"atol", io.abs_tol}, {"norm_cap", io.norm_cap}};
        run.inputs["horizon"] = osc_fwd;
        run.inputs["backward_horizon"] = osc_bwd;
        for (int k = 0; k < n_trials; ++k) {
          const Vector x0 = osc_x0.empty() ? random_box_point(sys, g.seed, "cli.oscillation", static_cast<std::uint64_t>(k))
                                           : require_dim(parse_csv_vector(osc_x0, "x0"), sys.dimension, "x0");
          IntegratorOptions fio = io;
          fio.max_step = osc_fwd / osc_samples;
          const Trajectory fwd = integrate(sys, x0, osc_fwd, Direction::Forward, fio);
          Trajectory traj = fwd;
          std::string coverage = "forward-only";
          if (osc_bwd > 0.0) {
            IntegratorOptions bio = io;
            bio.max_step = osc_bwd / osc_samples;
            try {
              traj = join_orbit(integrate(sys, x0, osc_bwd, Direction::Backward, bio), fwd);
              coverage = "complete";
            } catch (const Error& e) {
              if (e.code() != ErrorCode::BlowUp && e.code() != ErrorCode::StepFailure) throw;
            }
          }
          const auto v = non_oscillation_verdict(traj, sys.cone, g.tol_order, osc_max_pairs);
          json extra = {{"x0", report::vector_json(x0)}, {"coverage", coverage}, {"samples", traj.size()}};
          if (v.status == OscillationStatus::Oscillating && v.disjoint) {
            const std::string name = "counterexample_" + std::to_string(k) + ".csv";
            write_trajectory_csv(out_dir / name, traj);
            extra["counterexample_csv"] = name;
          }
          if (g.plot_data) {
            for (const auto& iv : {v.increasing, v.decreasing}) {
              if (iv) plot_rows.push_back({k, std::string(to_string(iv->kind)), iv->a, iv->b});
            }
          }
          record(static_cast<std::size_t>(k), v, extra);
        }
      }
      if (g.plot_data) {
        std::ostringstream os;
        os << "trial,kind,a,b\n";
        for (const auto& r : plot_rows) {
          os << r[0].get<int>() << ',' << r[1].get<std::string>() << ',' << format_double(r[2].get<double>()) << ','
             << format_double(r[3].get<double>()) << '\n';
        }
        write_text(out_dir / "intervals.csv", os.str());
      }
      run.report = {{"trials", trials}, {"oscillating", oscillating}, {"oscillating_disjoint", disjoint}};
      summary = std::to_string(oscillating) + " of " + std::to_string(trials.size()) + " trials oscillating";

    } else if (run.subcommand == "witness") {
      WitnessProblem prob;
      try {
        prob.A = parse_rational(wA);
        prob.B = parse_rational(wB);
        prob.E = parse_rational(wE);
      } catch (const Error& e) {
        throw UsageError(e.detail());
      }
      prob.arithmetic = w_float ? Arithmetic::Float : Arithmetic::Rational;
      prob.epsilon = w_eps;
      run.inputs["A"] = rational_to_string(prob.A);
      run.inputs["B"] = rational_to_string(prob.B);
      run.inputs["E"] = rational_to_string(prob.E);
      run.inputs["arithmetic"] = w_float ? "float" : "rational";
      if (w_float) run.tolerances["epsilon"] = w_eps;
      const auto res = construct_witness(prob);
      run.report = report::witness(res);
      if (!w_float) {
        const auto chk = check_witness(prob, res);
        run.report["checks"] = {{"landing", chk.landing_ok}, {"recursion", chk.recursion_ok}, {"decrement", chk.decrement_ok},
                                {"selection", chk.selection_ok}, {"products", chk.products_ok}, {"termination", chk.termination_ok}};
      }
      if (w_oracle) {
        run.tolerances["lmax"] = w_lmax;
        const auto bf = brute_force_witness(prob, BigInt(w_lmax));
        run.report["oracle"] = bf ? json{{"l", bf->first.str()}, {"n", bf->second.str()}} : json(nullptr);
      }
      summary = "l* = " + res.l_star.str() + ", n* = " + res.n_star.str();

    } else if (run.subcommand == "limitset") {
      const SystemDef sys = system_input(run, lim_system);
      const Vector x0 = require_dim(parse_csv_vector(lim_x0, "x0"), sys.dimension, "x0");
      LimitSetOptions lo;
      lo.samples_per_window = lim_samples;
      ClassifyOptions co;
      run.inputs["x0"] = report::vector_json(x0);
      run.inputs["direction"] = lim_dir;
      run.inputs["transient"] = lim_transient;
      run.inputs["window"] = lim_window;
      run.inputs["refine"] = lim_refine;
      run.tolerances["limit_set"] = {{"samples_per_window", lo.samples_per_window}, {"gap_threshold", lo.gap_threshold},
                                     {"rtol", lo.integrator.rel_tol}, {"atol", lo.integrator.abs_tol}};
      run.tolerances["classify"] = {{"equilibrium_residual", co.equilibrium_residual}, {"point_diameter", co.point_diameter},
                                    {"recurrence_factor", co.recurrence_factor}, {"newton_iterations", co.newton_iterations},
                                    {"seeds", co.seeds}, {"bisection_time_tol", co.bisection_time_tol}};
      run.tolerances["non_ordering_margin"] = lim_margin;

      const auto est = estimate_limit_set(sys, x0, lim_dir == "omega" ? LimitDirection::Omega : LimitDirection::Alpha,
                                          lim_transient, lim_window, lim_refine, lo);
      write_points_csv(out_dir / "points.csv", est.points);
      const auto cls = classify_limit_set(sys, est, sys.cone, co);
      run.report = report::classification(cls);
      run.report["hausdorff_gap"] = est.hausdorff_gap;
      run.report["converged"] = est.converged;
      run.report["points"] = est.points.size();
      run.report["points_csv"] = "points.csv";
      run.report["non_ordering"] = report::non_ordering(non_ordering_check(est.points, sys.cone, lim_margin));
      run.report["injectivity_margin"] = nullptr;
      if (est.points.size() >= 2 && sys.dimension >= 2) {
        const auto pr = project_and_check(est.points, sys.cone);
        run.report["injectivity_margin"] = report::number_or_null(pr.injectivity_margin);
        run.report["v"] = report::vector_json(pr.v);
        if (g.plot_data) write_points_csv(out_dir / "projected.csv", pr.projected);
      }
      json spectra = json::array();
      if (cls.equilibrium && cls.equilibrium_residual < 1e-9) {
        spectra.push_back(report::spectrum(spectrum_at_equilibrium(sys, *cls.equilibrium)));
      }
      if (cls.period && cls.section_point) {
        try {
          spectra.push_back(report::spectrum(floquet_multipliers(sys, *cls.section_point, *cls.period)));
        } catch (const Error& e) {
          spectra.push_back(report::error(e));
        }
      }
      run.report["spectra"] = spectra;
      summary = std::string(to_string(cls.verdict));

    } else if (run.subcommand == "floquet") {
      const SystemDef sys = system_input(run, flo_system);
      const Vector p = require_dim(parse_csv_vector(flo_x0, "x0"), sys.dimension, "x0");
      run.inputs["x0"] = report::vector_json(p);
      run.inputs["period"] = flo_period;
      run.tolerances["integrator"] = {{"method", "DP54"}, {"rtol", 1e-12}, {"atol", 1e-14}};
      run.tolerances["return"] = 1e-4;
      run.tolerances["hyperbolic_margin"] = 1e-3;
      const auto rep = floquet_multipliers(sys, p, flo_period);
      run.report = report::spectrum(rep);
      summary = rep.hyperbolic ? "hyperbolic" : "not hyperbolic";
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << report::error(e).dump() << "\n";
    return 1;
  }

  const json manifest = {{"tool", "monoflow"},
                         {"version", kVersion},
                         {"subcommand", run.subcommand},
                         {"argv", run.argv},
                         {"seed", g.seed},
                         {"inputs", run.inputs},
                         {"tolerances", run.tolerances},
                         {"libraries",
                          {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                         std::to_string(EIGEN_MINOR_VERSION)},
                           {"boost", BOOST_LIB_VERSION},
                           {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                                 "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
  try {
    write_text(out_dir / "manifest.json", dump(manifest));
    write_text(out_dir / (run.subcommand + ".json"), dump(run.report));
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }
  if (g.json_stdout) {
    std::cout << dump(run.report);
  } else {
    std::cout << run.subcommand << ": " << summary << " (report: " << (out_dir / (run.subcommand + ".json")).string() << ")\n";
  }
  return 0;
}
