#pragma once

#include <cmath>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "monoflow/limit_set.hpp"
#include "monoflow/monotonicity.hpp"
#include "monoflow/oscillation.hpp"
#include "monoflow/witness.hpp"

// JSON shapes of the reports written by the command-line tool.
namespace monoflow::report {

using nlohmann::json;

inline json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_or_null(v(i)));
  return out;
}

inline json certificate(const MonotonicityCertificate& c) {
  return {{"kind", std::string(to_string(c.kind))},
          {"tstar", number_or_null(c.tstar)},
          {"strong", c.strong},
          {"tau_star", number_or_null(c.tau_star)},
          {"pairs", c.pairs},
          {"violations", c.violations},
          {"dropped", c.dropped},
          {"evidence", c.evidence}};
}

inline json interval(const std::optional<MonotoneInterval>& iv) {
  if (!iv) return nullptr;
  return {{"a", iv->a}, {"b", iv->b}, {"strength", std::string(to_string(iv->strength))}};
}

inline json verdict(const OscillationVerdict& v) {
  return {{"status", std::string(to_string(v.status))},
          {"increasing", interval(v.increasing)},
          {"decreasing", interval(v.decreasing)},
          {"disjoint", v.disjoint},
          {"increasing_count", v.increasing_count},
          {"decreasing_count", v.decreasing_count},
          {"pairs_examined", v.pairs_examined}};
}

inline json witness(const WitnessResult& r) {
  json trace = json::array();
  for (const auto& s : r.trace) {
    trace.push_back({{"i", s.i}, {"D", rational_to_string(s.D)}, {"n", s.n.str()}, {"l", s.l.str()}, {"h", s.h.str()}});
  }
  return {{"l_star", r.l_star.str()},
          {"n_star", r.n_star.str()},
          {"landing_offset", rational_to_string(r.landing_offset)},
          {"case", std::string(to_string(r.which))},
          {"k0", r.k0.str()},
          {"R0", rational_to_string(r.R0)},
          {"p", r.p.str()},
          {"F", rational_to_string(r.F)},
          {"iterations", r.trace.size()},
          {"trace", trace}};
}

inline json non_ordering(const NonOrderingReport& r) {
  json worst = nullptr;
  if (r.worst_pair) {
    worst = {{"i", r.worst_pair->i},
             {"j", r.worst_pair->j},
             {"relation", std::string(to_string(r.worst_pair->relation))},
             {"min_slack", r.worst_pair->min_slack}};
  }
  return {{"ok", r.ok},
          {"strict_ok", r.strict_ok},
          {"interior_pairs", r.interior_pairs},
          {"strict_pairs", r.strict_pairs},
          {"pairs_checked", r.pairs_checked},
          {"worst_pair", worst}};
}

inline json complex_list(const std::vector<std::complex<double>>& values) {
  json out = json::array();
  for (const auto& z : values) out.push_back({z.real(), z.imag()});
  return out;
}

inline json spectrum(const SpectrumReport& s) {
  json out = {{"at", s.at == SpectrumSite::EquilibriumPoint ? "equilibrium" : "cycle"},
              {"point", vector_json(s.point)},
              {"values", complex_list(s.values)},
              {"hyperbolic", s.hyperbolic},
              {"margin", number_or_null(s.margin)}};
  out["period"] = number_or_null(s.period);
  out["trivial_index"] = s.trivial_index ? json(*s.trivial_index) : json(nullptr);
  out["liouville_error"] = number_or_null(s.liouville_error);
  out["notes"] = s.notes;
  return out;
}

inline json classification(const LimitSetClass& c) {
  return {{"verdict", std::string(to_string(c.verdict))},
          {"period", number_or_null(c.period)},
          {"equilibrium", c.equilibrium ? vector_json(*c.equilibrium) : json(nullptr)},
          {"recurrence_error", number_or_null(c.recurrence_error)},
          {"equilibrium_residual", number_or_null(c.equilibrium_residual)},
          {"equilibrium_distance", number_or_null(c.equilibrium_distance)},
          {"diameter", c.diameter},
          {"neighborhood", c.neighborhood},
          {"notes", c.notes}};
}

inline json error(const Error& e) {
  json out = {{"error", std::string(to_string(e.code()))}, {"message", e.detail()}};
  out["value"] = number_or_null(e.value());
  return out;
}

}  // namespace monoflow::report
