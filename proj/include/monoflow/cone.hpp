#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "monoflow/error.hpp"
#include "monoflow/rng.hpp"

namespace monoflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class ConeKind { Orthant, Polyhedral };

/// Relation of y relative to x under the cone order, reported forward only:
/// StrictInterior is x << y, Strict is x < y without <<.
enum class OrderRelation { Equal, StrictInterior, Strict, Incomparable };

constexpr std::string_view to_string(OrderRelation r) {
  switch (r) {
    case OrderRelation::Equal: return "Equal";
    case OrderRelation::StrictInterior: return "StrictInterior";
    case OrderRelation::Strict: return "Strict";
    case OrderRelation::Incomparable: return "Incomparable";
  }
  return "Incomparable";
}

/// x <= y holds (Equal, Strict or StrictInterior).
constexpr bool is_ordered(OrderRelation r) { return r != OrderRelation::Incomparable; }

/// x < y holds (Strict or StrictInterior).
constexpr bool is_strict(OrderRelation r) {
  return r == OrderRelation::Strict || r == OrderRelation::StrictInterior;
}

/// Unvalidated cone description, as read from a config.
struct ConeSpec {
  ConeKind kind = ConeKind::Orthant;
  std::vector<int> signs;                  // Orthant
  std::vector<std::vector<double>> normals;  // Polyhedral, one row per half-space
};

/// Solid pointed convex cone in H-form: C = { d : <h_j, d> >= 0 for all j }.
/// An orthant is the special case h_j = sign_j * e_j.
class Cone {
 public:
  /// Positive orthant of R^n.
  static Cone positive_orthant(int n) { return orthant(std::vector<int>(static_cast<std::size_t>(n), 1)); }

  static Cone orthant(std::vector<int> signs) {
    if (signs.empty()) throw Error(ErrorCode::DimensionMismatch, "orthant needs at least one sign");
    for (int s : signs) {
      if (s != 1 && s != -1) throw Error(ErrorCode::InvalidCone, "orthant signs must be +1 or -1");
    }
    Cone c;
    c.kind_ = ConeKind::Orthant;
    const auto n = static_cast<Eigen::Index>(signs.size());
    c.normals_ = Matrix::Zero(n, n);
    c.interior_ = Vector(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      c.normals_(i, i) = signs[static_cast<std::size_t>(i)];
      c.interior_(i) = signs[static_cast<std::size_t>(i)];
    }
    c.interior_ /= std::sqrt(static_cast<double>(n));
    c.signs_ = std::move(signs);
    return c;
  }

  static Cone polyhedral(const Matrix& normals) {
    const auto n = normals.cols();
    if (n < 1) throw Error(ErrorCode::DimensionMismatch, "polyhedral cone needs dimension >= 1");
    if (normals.rows() < n) {
      throw Error(ErrorCode::NotPointed, "fewer normals than the dimension cannot give a pointed cone");
    }
    if (!normals.allFinite()) throw Error(ErrorCode::InvalidCone, "normals must be finite");

    Eigen::FullPivLU<Matrix> lu(normals);
    lu.setThreshold(1e-12);
    if (lu.rank() < n) throw Error(ErrorCode::NotPointed, "normals do not span the space, so C and -C share a line");

    Cone c;
    c.kind_ = ConeKind::Polyhedral;
    c.normals_ = normals;
    const auto [point, slack] = c.maximize_min_slack();
    if (!(slack > 1e-9)) throw Error(ErrorCode::NonSolidCone, "no strictly interior point found");
    c.interior_ = point;
    return c;
  }

  ConeKind kind() const noexcept { return kind_; }
  int dimension() const noexcept { return static_cast<int>(normals_.cols()); }
  const std::vector<int>& signs() const noexcept { return signs_; }
  /// Rows are the defining half-space normals.
  const Matrix& normals() const noexcept { return normals_; }
  /// Unit vector in Int C certifying solidity.
  const Vector& interior_point() const noexcept { return interior_; }

  /// Values of the defining inequalities at d; d is in C iff all are >= 0.
  Vector slacks(const Vector& d) const {
    check_dim(d);
    if (kind_ == ConeKind::Orthant) {
      Vector s(d.size());
      for (Eigen::Index i = 0; i < d.size(); ++i) s(i) = signs_[static_cast<std::size_t>(i)] > 0 ? d(i) : -d(i);
      return s;
    }
    return normals_ * d;
  }

  double min_slack(const Vector& d) const { return slacks(d).minCoeff(); }

  bool contains(const Vector& d, double tol = 0.0) const { return min_slack(d) >= -tol; }

  /// Extreme rays of C, each normalized to unit length.
  std::vector<Vector> extreme_directions() const {
    const auto n = normals_.cols();
    std::vector<Vector> rays;
    if (kind_ == ConeKind::Orthant) {
      for (Eigen::Index i = 0; i < n; ++i) {
        Vector e = Vector::Zero(n);
        e(i) = signs_[static_cast<std::size_t>(i)];
        rays.push_back(e);
      }
      return rays;
    }
    if (n == 1) {
      rays.push_back(interior_.normalized());
      return rays;
    }
    // Each extreme ray is the intersection of n-1 independent active facets.
    const auto m = normals_.rows();
    std::vector<int> pick(static_cast<std::size_t>(n - 1));
    for (int i = 0; i < n - 1; ++i) pick[static_cast<std::size_t>(i)] = i;
    while (true) {
      Matrix sub(n - 1, n);
      for (Eigen::Index r = 0; r < n - 1; ++r) sub.row(r) = normals_.row(pick[static_cast<std::size_t>(r)]);
      Eigen::FullPivLU<Matrix> lu(sub);
      lu.setThreshold(1e-12);
      if (lu.rank() == n - 1) {
        Vector ray = lu.kernel().col(0).normalized();
        const double scale = normals_.rowwise().norm().maxCoeff();
        for (int sgn : {1, -1}) {
          Vector cand = sgn * ray;
          if ((normals_ * cand).minCoeff() >= -1e-10 * scale) {
            const bool dup = std::any_of(rays.begin(), rays.end(),
                                         [&](const Vector& r) { return (r - cand).norm() < 1e-9; });
            if (!dup) rays.push_back(cand);
          }
        }
      }
      // next combination
      int k = static_cast<int>(n) - 2;
      while (k >= 0 && pick[static_cast<std::size_t>(k)] == m - (n - 1) + k) --k;
      if (k < 0) break;
      ++pick[static_cast<std::size_t>(k)];
      for (int j = k + 1; j < n - 1; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
    return rays;
  }

 private:
  Cone() = default;

  void check_dim(const Vector& d) const {
    if (d.size() != normals_.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "vector dimension does not match cone dimension");
    }
  }

  // Max over the unit sphere of min_j <h_j, x>/|h_j|: candidate directions
  // followed by ascent along the currently binding normal.
  std::pair<Vector, double> maximize_min_slack() const {
    const auto n = normals_.cols();
    const auto m = normals_.rows();
    Matrix unit = normals_;
    for (Eigen::Index j = 0; j < m; ++j) {
      const double len = unit.row(j).norm();
      if (len == 0.0) return {Vector::Zero(n), -1.0};
      unit.row(j) /= len;
    }
    auto score = [&](const Vector& x) { return (unit * x).minCoeff(); };

    std::vector<Vector> candidates;
    candidates.push_back(unit.colwise().sum().transpose());
    for (Eigen::Index j = 0; j < m; ++j) candidates.push_back(unit.row(j).transpose());
    Rng rng = Rng::stream(0, "cone.solidity");
    for (int k = 0; k < 64; ++k) {
      Vector v(n);
      for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
      candidates.push_back(v);
    }
    Vector best = Vector::Zero(n);
    double best_score = -std::numeric_limits<double>::infinity();
    for (auto& c : candidates) {
      if (c.norm() == 0.0) continue;
      c.normalize();
      const double s = score(c);
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }

    double step = 0.5;
    for (int it = 0; it < 2000 && step > 1e-12; ++it) {
      Eigen::Index j = 0;
      (unit * best).minCoeff(&j);
      Vector trial = (best + step * unit.row(j).transpose());
      if (trial.norm() == 0.0) {
        step *= 0.5;
        continue;
      }
      trial.normalize();
      const double s = score(trial);
      if (s > best_score) {
        best = trial;
        best_score = s;
      } else {
        step *= 0.5;
      }
    }
    return {best, best_score};
  }

  ConeKind kind_ = ConeKind::Orthant;
  std::vector<int> signs_;
  Matrix normals_;
  Vector interior_;
};

/// Builds and verifies a cone from its description.
inline Cone validate_cone(const ConeSpec& spec) {
  if (spec.kind == ConeKind::Orthant) return Cone::orthant(spec.signs);
  if (spec.normals.empty()) throw Error(ErrorCode::DimensionMismatch, "polyhedral cone without normals");
  const auto n = spec.normals.front().size();
  Matrix h(static_cast<Eigen::Index>(spec.normals.size()), static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < spec.normals.size(); ++j) {
    if (spec.normals[j].size() != n) throw Error(ErrorCode::DimensionMismatch, "normals have unequal lengths");
    for (std::size_t i = 0; i < n; ++i) h(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = spec.normals[j][i];
  }
  return Cone::polyhedral(h);
}

/// Summary of the defining inequalities at a difference vector d.
struct DifferenceStats {
  double min_slack = 0.0;
  double max_slack = 0.0;
  double norm = 0.0;
  double max_abs = 0.0;
};

/// One pass over d (length = cone dimension) without allocation.
inline DifferenceStats difference_stats(const Cone& cone, const double* d) {
  const auto n = cone.dimension();
  DifferenceStats st;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    sq += d[i] * d[i];
    st.max_abs = std::max(st.max_abs, std::abs(d[i]));
  }
  st.norm = std::sqrt(sq);
  st.min_slack = std::numeric_limits<double>::infinity();
  st.max_slack = -std::numeric_limits<double>::infinity();
  if (cone.kind() == ConeKind::Orthant) {
    const auto& sg = cone.signs();
    for (int i = 0; i < n; ++i) {
      const double s = sg[static_cast<std::size_t>(i)] > 0 ? d[i] : -d[i];
      st.min_slack = std::min(st.min_slack, s);
      st.max_slack = std::max(st.max_slack, s);
    }
  } else {
    const Matrix& h = cone.normals();
    for (Eigen::Index j = 0; j < h.rows(); ++j) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += h(j, i) * d[i];
      st.min_slack = std::min(st.min_slack, s);
      st.max_slack = std::max(st.max_slack, s);
    }
  }
  return st;
}

/// Relation of x + d relative to x.
inline OrderRelation relation_from_stats(const DifferenceStats& st, double tol) {
  if (st.norm <= tol) return OrderRelation::Equal;
  if (st.min_slack > tol) return OrderRelation::StrictInterior;
  if (st.min_slack >= -tol && st.max_abs > tol) return OrderRelation::Strict;
  return OrderRelation::Incomparable;
}

/// Relation of x - d relative to x (the same stats read for -d).
inline OrderRelation reverse_relation_from_stats(const DifferenceStats& st, double tol) {
  if (st.norm <= tol) return OrderRelation::Equal;
  if (-st.max_slack > tol) return OrderRelation::StrictInterior;
  if (-st.max_slack >= -tol && st.max_abs > tol) return OrderRelation::Strict;
  return OrderRelation::Incomparable;
}

/// Classifies d = y - x under the order induced by `cone`.
inline OrderRelation order_relation(const Cone& cone, const Vector& x, const Vector& y, double tol = 0.0) {
  if (x.size() != y.size() || x.size() != cone.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "order_relation operands must match the cone dimension");
  }
  const Vector d = y - x;
  return relation_from_stats(difference_stats(cone, d.data()), tol);
}

}  // namespace monoflow
