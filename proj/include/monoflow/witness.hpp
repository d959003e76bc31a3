#pragma once

#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "monoflow/error.hpp"

namespace monoflow {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class Arithmetic { Rational, Float };

/// Interval lengths |I| = A (increasing), |J| = B (decreasing) and the
/// steeply increasing sub-length E, with t0 translated to 0.
struct WitnessProblem {
  Rational A;
  Rational B;
  Rational E;
  Arithmetic arithmetic = Arithmetic::Rational;
  double epsilon = 0.0;  // Float mode only
};

enum class WitnessCase { MultipleOrSmallRemainder, CaseI, CaseII };

constexpr std::string_view to_string(WitnessCase c) {
  switch (c) {
    case WitnessCase::MultipleOrSmallRemainder: return "MultipleOrSmallRemainder";
    case WitnessCase::CaseI: return "CaseI";
    case WitnessCase::CaseII: return "CaseII";
  }
  return "CaseI";
}

struct WitnessStep {
  long i = 0;
  Rational D;
  BigInt n;
  BigInt l;
  BigInt h;
};

struct WitnessResult {
  BigInt l_star;
  BigInt n_star;
  Rational landing_offset;  // l* B - n* A
  std::vector<WitnessStep> trace;
  BigInt k0;
  Rational R0;
  BigInt p;
  Rational F;
  WitnessCase which = WitnessCase::MultipleOrSmallRemainder;
};

constexpr long kWitnessIterationCap = 1'000'000;

inline BigInt floor_rational(const Rational& q) {
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  BigInt f = num / den;
  if (num % den != 0 && num < 0) f -= 1;
  return f;
}

inline BigInt ceil_rational(const Rational& q) { return -floor_rational(-q); }

/// "p/q", an integer, or a decimal with optional exponent, converted exactly.
inline Rational parse_rational(const std::string& text) {
  auto bad = [&] { return Error(ErrorCode::InvalidArgument, "not a rational number: '" + text + "'"); };
  std::string s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t lead = 0;
  while (lead < s.size() && std::isspace(static_cast<unsigned char>(s[lead]))) ++lead;
  s = s.substr(lead);
  if (s.empty()) throw bad();

  if (auto slash = s.find('/'); slash != std::string::npos) {
    const Rational num = parse_rational(s.substr(0, slash));
    const Rational den = parse_rational(s.substr(slash + 1));
    if (den == 0) throw Error(ErrorCode::InvalidArgument, "zero denominator in '" + text + "'");
    return num / den;
  }

  std::size_t pos = 0;
  bool negative = false;
  if (s[pos] == '+' || s[pos] == '-') negative = s[pos++] == '-';
  BigInt digits = 0;
  long scale = 0;
  bool any = false, dot = false;
  for (; pos < s.size(); ++pos) {
    const char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = digits * 10 + (c - '0');
      any = true;
      if (dot) ++scale;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      break;
    }
  }
  if (!any) throw bad();
  long exponent = 0;
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E') throw bad();
    ++pos;
    std::size_t used = 0;
    try {
      exponent = std::stol(s.substr(pos), &used);
    } catch (const std::exception&) {
      throw bad();
    }
    if (pos + used != s.size() || std::abs(exponent) > 10000) throw bad();
  }
  const long shift = exponent - scale;
  Rational value(digits);
  const BigInt ten_pow = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::abs(shift)));
  if (shift >= 0) {
    value *= ten_pow;
  } else {
    value /= ten_pow;
  }
  return negative ? -value : value;
}

inline std::string rational_to_string(const Rational& q) {
  if (boost::multiprecision::denominator(q) == 1) return boost::multiprecision::numerator(q).str();
  return boost::multiprecision::numerator(q).str() + "/" + boost::multiprecision::denominator(q).str();
}

namespace detail {

inline void validate_witness_problem(const WitnessProblem& p) {
  if (!(p.A > 0)) throw Error(ErrorCode::InvalidProblem, "A must be positive");
  if (!(p.B > 0)) throw Error(ErrorCode::InvalidProblem, "B must be positive");
  if (!(p.E > 0) || p.E > p.A) throw Error(ErrorCode::InvalidProblem, "E must satisfy 0 < E <= A");
  if (p.arithmetic == Arithmetic::Float && !(p.epsilon >= 0.0 && std::isfinite(p.epsilon))) {
    throw Error(ErrorCode::InvalidProblem, "Float mode needs a finite epsilon >= 0");
  }
}

// Exact in Rational mode. In Float mode values are doubles and every
// branch comparison closer than epsilon to its boundary is refused.
class WitnessArith {
 public:
  explicit WitnessArith(const WitnessProblem& p) : float_(p.arithmetic == Arithmetic::Float), eps_(p.epsilon) {}

  Rational value(const Rational& q) const {
    if (!float_) return q;
    return Rational(static_cast<double>(q));
  }

  Rational sub(const Rational& x, const Rational& y) const { return round(x - y); }
  Rational mul(const BigInt& n, const Rational& x) const { return round(Rational(n) * x); }

  // x <= y, refusing near-ties in Float mode.
  bool le(const Rational& x, const Rational& y, const char* what) const {
    if (float_) {
      const double dx = static_cast<double>(x), dy = static_cast<double>(y);
      if (std::abs(dx - dy) <= eps_) throw Error(ErrorCode::ToleranceAmbiguity, std::string(what) + " is within epsilon of its boundary");
      return dx <= dy;
    }
    return x <= y;
  }

  bool is_float() const { return float_; }

 private:
  Rational round(const Rational& q) const { return float_ ? Rational(static_cast<double>(q)) : q; }

  bool float_;
  double eps_;
};

}  // namespace detail

/// Indices (l*, n*) with l* B - n* A in [0, E], by the interval
/// translation argument: B = k0 A + R0; if R0 <= E done, else iterate on
/// D_{i+1} = n_i D_i - A with n_i minimal such that n_i D_i >= A - E.
inline WitnessResult construct_witness(const WitnessProblem& prob) {
  detail::validate_witness_problem(prob);
  const detail::WitnessArith ar(prob);
  const Rational A = ar.value(prob.A), B = ar.value(prob.B), E = ar.value(prob.E);

  WitnessResult r;
  if (ar.is_float()) {
    const double q = static_cast<double>(B) / static_cast<double>(A);
    const double k = std::floor(q);
    if (std::abs(q - k) * static_cast<double>(A) <= prob.epsilon || std::abs(q - (k + 1.0)) * static_cast<double>(A) <= prob.epsilon) {
      throw Error(ErrorCode::ToleranceAmbiguity, "B / A is within epsilon of an integer");
    }
    r.k0 = BigInt(static_cast<long long>(k));
  } else {
    r.k0 = floor_rational(B / A);
  }
  r.R0 = ar.sub(B, ar.mul(r.k0, A));

  if (ar.le(r.R0, E, "R0 <= E")) {
    r.which = WitnessCase::MultipleOrSmallRemainder;
    r.l_star = 1;
    r.n_star = r.k0;
    r.landing_offset = r.R0;
    r.p = 0;
    r.F = 0;
    return r;
  }

  const Rational A_minus_E = ar.sub(A, E);
  Rational D = ar.sub(A, r.R0);
  {
    // D0 = pE + F with F in (0, E]
    r.p = ceil_rational(D / E) - 1;
    r.F = D - Rational(r.p) * E;
  }

  BigInt l = 1;
  BigInt h = r.k0 + 1;  // h_{-1}, so that h_0 = n_0 (k0 + 1) - 1
  for (long i = 0;; ++i) {
    if (i >= kWitnessIterationCap) throw Error(ErrorCode::IterationCap, "witness recursion exceeded the iteration cap");
    BigInt n;
    if (ar.is_float()) {
      n = BigInt(static_cast<long long>(std::ceil(static_cast<double>(A_minus_E) / static_cast<double>(D))));
      if (n < 1) n = 1;
      while (!ar.le(A_minus_E, ar.mul(n, D), "n_i D_i >= A - E")) n += 1;
      while (n > 1 && ar.le(A_minus_E, ar.mul(n - 1, D), "(n_i - 1) D_i < A - E")) n -= 1;
    } else {
      n = ceil_rational(A_minus_E / D);
      if (n < 1) n = 1;
    }
    l *= n;
    h = n * h - 1;
    r.trace.push_back(WitnessStep{i, D, n, l, h});
    const Rational nD = ar.mul(n, D);
    if (ar.le(nD, A, "n_i D_i <= A")) {
      r.which = i == 0 ? WitnessCase::CaseI : WitnessCase::CaseII;
      r.l_star = l;
      r.n_star = h;
      r.landing_offset = ar.sub(A, nD);
      return r;
    }
    D = ar.sub(nD, A);
  }
}

/// Smallest l in [1, l_max] with l B mod A in [0, E], and n = floor(l B / A).
inline std::optional<std::pair<BigInt, BigInt>> brute_force_witness(const WitnessProblem& prob, const BigInt& l_max) {
  detail::validate_witness_problem(prob);
  if (l_max < 1) throw Error(ErrorCode::InvalidProblem, "l_max must be positive");
  if (prob.arithmetic == Arithmetic::Float) {
    const double A = static_cast<double>(prob.A), B = static_cast<double>(prob.B), E = static_cast<double>(prob.E);
    for (BigInt l = 1; l <= l_max; ++l) {
      const double lb = static_cast<double>(l) * B;
      const double n = std::floor(lb / A);
      const double off = lb - n * A;
      if (off >= 0.0 && off <= E) return std::pair{l, BigInt(static_cast<long long>(n))};
    }
    return std::nullopt;
  }
  // Common denominator: A = a/d, B = b/d, E = e/d; then work with integer
  // residues r_l = l b mod a.
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  const BigInt d = denominator(prob.A) * denominator(prob.B) * denominator(prob.E);
  const BigInt a = numerator(Rational(prob.A * d)), b = numerator(Rational(prob.B * d)), e = numerator(Rational(prob.E * d));
  const BigInt step_n = b / a, step_r = b % a;
  BigInt res = 0, n = 0;
  for (BigInt l = 1; l <= l_max; ++l) {
    res += step_r;
    n += step_n;
    if (res >= a) {
      res -= a;
      n += 1;
    }
    if (res <= e) return std::pair{l, n};
  }
  return std::nullopt;
}

struct TraceCheck {
  bool recursion_ok = true;   // D_{i+1} = n_i D_i - A
  bool decrement_ok = true;   // 0 < D_{i+1} < D_i - E
  bool selection_ok = true;   // (n_i - 1) D_i < A - E <= n_i D_i
  bool products_ok = true;    // l_i = prod n_j, h_{i+1} = n_{i+1} h_i - 1
  bool landing_ok = true;     // l* B - n* A in [0, E]
  bool termination_ok = true; // steps <= p + 1
  bool ok() const { return recursion_ok && decrement_ok && selection_ok && products_ok && landing_ok && termination_ok; }
};

/// Re-derives every invariant of a Rational-mode result from (A, B, E).
inline TraceCheck check_witness(const WitnessProblem& prob, const WitnessResult& r) {
  TraceCheck c;
  const Rational &A = prob.A, &B = prob.B, &E = prob.E;
  const Rational off = Rational(r.l_star) * B - Rational(r.n_star) * A;
  c.landing_ok = off >= 0 && off <= E && off == r.landing_offset;
  if (r.trace.empty()) return c;
  c.termination_ok = BigInt(r.trace.size()) <= r.p + 1 && r.F > 0 && r.F <= E && Rational(r.p) * E + r.F == r.trace.front().D;
  BigInt l = 1;
  BigInt h = floor_rational(B / A) + 1;
  for (std::size_t k = 0; k < r.trace.size(); ++k) {
    const auto& s = r.trace[k];
    const Rational nD = Rational(s.n) * s.D;
    if (!(Rational(s.n - 1) * s.D < A - E && A - E <= nD)) c.selection_ok = false;
    l *= s.n;
    h = s.n * h - 1;
    if (l != s.l || h != s.h) c.products_ok = false;
    if (k + 1 < r.trace.size()) {
      const Rational& next = r.trace[k + 1].D;
      if (next != nD - A) c.recursion_ok = false;
      if (!(next > 0 && next < s.D - E)) c.decrement_ok = false;
    }
  }
  if (l != r.l_star || h != r.n_star) c.products_ok = false;
  return c;
}

}  // namespace monoflow
