#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "monoflow/cone.hpp"
#include "monoflow/expr.hpp"

namespace monoflow {

struct ExpressionField {
  std::vector<ExprTree> components;
};

struct LinearField {
  Matrix matrix;
};

/// f_i(x) = x_i (r_i + sum_j A_ij x_j)
struct LotkaVolterraField {
  Vector r;
  Matrix A;
};

using FieldDef = std::variant<ExpressionField, LinearField, LotkaVolterraField>;

/// Axis-aligned box used to draw initial conditions.
struct SamplingBox {
  Vector lo;
  Vector hi;
};

struct SystemDef {
  int dimension = 0;
  FieldDef field;
  Cone cone = Cone::positive_orthant(1);
  std::optional<double> declared_tstar;
  SamplingBox box;
  std::string name;
};

namespace detail {

inline Matrix json_matrix(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::ParseError, std::string(what) + " must be a nonempty array of rows");
  const auto rows = j.size();
  if (!j[0].is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " rows must be arrays");
  const auto cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw Error(ErrorCode::DimensionMismatch, std::string(what) + " rows have unequal lengths");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw Error(ErrorCode::ParseError, std::string(what) + " entries must be numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

inline Vector json_vector(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::ParseError, std::string(what) + " entries must be numbers");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

}  // namespace detail

/// Parses the cone fragment {"type":"orthant","signs":[...]} or
/// {"type":"polyhedral","normals":[[...],...]}.
inline Cone parse_cone(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    throw Error(ErrorCode::InvalidCone, "cone must be an object with a \"type\"");
  }
  const auto type = j["type"].get<std::string>();
  ConeSpec spec;
  if (type == "orthant") {
    if (!j.contains("signs") || !j["signs"].is_array()) throw Error(ErrorCode::InvalidCone, "orthant cone needs \"signs\"");
    spec.kind = ConeKind::Orthant;
    for (const auto& s : j["signs"]) {
      if (!s.is_number_integer()) throw Error(ErrorCode::InvalidCone, "orthant signs must be integers");
      spec.signs.push_back(s.get<int>());
    }
  } else if (type == "polyhedral") {
    if (!j.contains("normals") || !j["normals"].is_array()) throw Error(ErrorCode::InvalidCone, "polyhedral cone needs \"normals\"");
    spec.kind = ConeKind::Polyhedral;
    for (const auto& row : j["normals"]) {
      if (!row.is_array()) throw Error(ErrorCode::InvalidCone, "normals must be arrays");
      std::vector<double> r;
      for (const auto& v : row) {
        if (!v.is_number()) throw Error(ErrorCode::InvalidCone, "normal entries must be numbers");
        r.push_back(v.get<double>());
      }
      spec.normals.push_back(std::move(r));
    }
  } else if (type == "generators") {
    throw Error(ErrorCode::InvalidCone, "generator (V-form) cones are not accepted; give half-space normals");
  } else {
    throw Error(ErrorCode::InvalidCone, "unknown cone type '" + type + "'");
  }
  return validate_cone(spec);
}

inline nlohmann::json cone_to_json(const Cone& c) {
  if (c.kind() == ConeKind::Orthant) return {{"type", "orthant"}, {"signs", c.signs()}};
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < c.normals().rows(); ++i) {
    std::vector<double> r;
    for (Eigen::Index k = 0; k < c.normals().cols(); ++k) r.push_back(c.normals()(i, k));
    rows.push_back(r);
  }
  return {{"type", "polyhedral"}, {"normals", rows}};
}

/// Builds a SystemDef from the system JSON schema.
inline SystemDef parse_system(const nlohmann::json& j) {
  using detail::json_matrix;
  using detail::json_vector;
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "system config must be a JSON object");

  std::optional<int> declared_dim;
  if (j.contains("dimension")) {
    if (!j["dimension"].is_number_integer() || j["dimension"].get<int>() < 1) {
      throw Error(ErrorCode::ParseError, "\"dimension\" must be a positive integer");
    }
    declared_dim = j["dimension"].get<int>();
  }

  SystemDef sys;
  if (j.contains("name") && j["name"].is_string()) sys.name = j["name"].get<std::string>();

  if (j.contains("field")) {
    if (j.contains("family")) throw Error(ErrorCode::ParseError, "give either \"field\" or \"family\", not both");
    const auto& f = j["field"];
    if (!f.is_array() || f.empty()) throw Error(ErrorCode::ParseError, "\"field\" must be a nonempty array of strings");
    const int n = declared_dim.value_or(static_cast<int>(f.size()));
    if (static_cast<int>(f.size()) != n) throw Error(ErrorCode::DimensionMismatch, "\"field\" length differs from \"dimension\"");
    ExpressionField ef;
    for (const auto& s : f) {
      if (!s.is_string()) throw Error(ErrorCode::ParseError, "\"field\" entries must be strings");
      ef.components.push_back(parse_expression(s.get<std::string>(), n));
    }
    sys.dimension = n;
    sys.field = std::move(ef);
  } else if (j.contains("family")) {
    if (!j["family"].is_string()) throw Error(ErrorCode::ParseError, "\"family\" must be a string");
    const auto family = j["family"].get<std::string>();
    if (family == "linear") {
      if (!j.contains("matrix")) throw Error(ErrorCode::ParseError, "linear family needs \"matrix\"");
      Matrix m = json_matrix(j["matrix"], "matrix");
      if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix must be square");
      sys.dimension = static_cast<int>(m.rows());
      sys.field = LinearField{std::move(m)};
    } else if (family == "lotka_volterra") {
      if (!j.contains("r") || !j.contains("A")) throw Error(ErrorCode::ParseError, "lotka_volterra family needs \"r\" and \"A\"");
      Vector r = json_vector(j["r"], "r");
      Matrix a = json_matrix(j["A"], "A");
      if (a.rows() != a.cols() || a.rows() != r.size()) throw Error(ErrorCode::DimensionMismatch, "A must be NxN with N = len(r)");
      sys.dimension = static_cast<int>(r.size());
      sys.field = LotkaVolterraField{std::move(r), std::move(a)};
    } else {
      throw Error(ErrorCode::ParseError, "unknown family '" + family + "'");
    }
    if (declared_dim && *declared_dim != sys.dimension) throw Error(ErrorCode::DimensionMismatch, "family size differs from \"dimension\"");
  } else {
    throw Error(ErrorCode::ParseError, "system needs \"field\" or \"family\"");
  }

  const int n = sys.dimension;
  sys.cone = j.contains("cone") ? parse_cone(j["cone"]) : Cone::positive_orthant(n);
  if (sys.cone.dimension() != n) throw Error(ErrorCode::DimensionMismatch, "cone dimension differs from system dimension");

  if (j.contains("tstar")) {
    if (!j["tstar"].is_number() || j["tstar"].get<double>() < 0.0) throw Error(ErrorCode::ParseError, "\"tstar\" must be a number >= 0");
    sys.declared_tstar = j["tstar"].get<double>();
  }

  if (j.contains("box")) {
    const auto& b = j["box"];
    if (!b.is_object() || !b.contains("lo") || !b.contains("hi")) throw Error(ErrorCode::ParseError, "\"box\" needs \"lo\" and \"hi\"");
    sys.box.lo = json_vector(b["lo"], "box.lo");
    sys.box.hi = json_vector(b["hi"], "box.hi");
    if (sys.box.lo.size() != n || sys.box.hi.size() != n) throw Error(ErrorCode::DimensionMismatch, "box dimension differs from system dimension");
    if ((sys.box.hi.array() < sys.box.lo.array()).any()) throw Error(ErrorCode::ParseError, "box.hi must be >= box.lo");
  } else if (std::holds_alternative<LotkaVolterraField>(sys.field)) {
    sys.box.lo = Vector::Constant(n, 0.1);
    sys.box.hi = Vector::Constant(n, 1.5);
  } else {
    sys.box.lo = Vector::Constant(n, -1.0);
    sys.box.hi = Vector::Constant(n, 1.0);
  }
  return sys;
}

inline SystemDef parse_system_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what(), static_cast<double>(e.byte));
  }
  return parse_system(j);
}

inline SystemDef load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open system file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_system_text(ss.str());
}

/// F(x). DomainError from an expression reports the offending component in value().
inline Vector eval_field(const SystemDef& sys, const Vector& x) {
  if (x.size() != sys.dimension) throw Error(ErrorCode::DimensionMismatch, "state dimension differs from system dimension");
  return std::visit(
      [&](const auto& f) -> Vector {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, LinearField>) {
          return f.matrix * x;
        } else if constexpr (std::is_same_v<T, LotkaVolterraField>) {
          return (x.array() * (f.r + f.A * x).array()).matrix();
        } else {
          Vector out(x.size());
          const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
          for (std::size_t i = 0; i < f.components.size(); ++i) {
            try {
              out(static_cast<Eigen::Index>(i)) = f.components[i].eval(xs);
            } catch (const Error& e) {
              throw Error(ErrorCode::DomainError, "component " + std::to_string(i + 1) + ": " + e.detail(),
                          static_cast<double>(i + 1));
            }
          }
          return out;
        }
      },
      sys.field);
}

/// Jacobian of F: exact for the linear and Lotka-Volterra families,
/// central differences with step max(1e-6, 1e-6 |x_i|) for expressions.
inline Matrix jacobian(const SystemDef& sys, const Vector& x) {
  if (x.size() != sys.dimension) throw Error(ErrorCode::DimensionMismatch, "state dimension differs from system dimension");
  if (const auto* lin = std::get_if<LinearField>(&sys.field)) return lin->matrix;
  if (const auto* lv = std::get_if<LotkaVolterraField>(&sys.field)) {
    Matrix j = x.asDiagonal() * lv->A;
    j.diagonal() += lv->r + lv->A * x;
    return j;
  }
  const auto n = x.size();
  Matrix j(n, n);
  Vector xp = x;
  for (Eigen::Index c = 0; c < n; ++c) {
    const double h = std::max(1e-6, 1e-6 * std::abs(x(c)));
    xp(c) = x(c) + h;
    const Vector fp = eval_field(sys, xp);
    xp(c) = x(c) - h;
    const Vector fm = eval_field(sys, xp);
    xp(c) = x(c);
    j.col(c) = (fp - fm) / (2.0 * h);
  }
  return j;
}

}  // namespace monoflow
