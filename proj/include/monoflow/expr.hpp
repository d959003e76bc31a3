#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "monoflow/error.hpp"

namespace monoflow {

enum class NodeKind { Constant, Variable, Unary, Binary };
enum class UnaryOp { Neg, Sin, Cos, Exp, Log, Tanh, Sqrt, Abs };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

/// Parsed scalar expression over x1..xN, stored as a flat node arena.
///
/// Grammar (lowest to highest precedence):
///   sum     := product (('+' | '-') product)*
///   product := unary (('*' | '/') unary)*
///   unary   := '-' unary | power
///   power   := atom ('^' unary)?            right-associative
///   atom    := number | xK | func '(' sum ')' | '(' sum ')'
class ExprTree {
 public:
  struct Node {
    NodeKind kind = NodeKind::Constant;
    double value = 0.0;  // Constant
    int var = 0;         // Variable, zero-based
    UnaryOp uop = UnaryOp::Neg;
    BinaryOp bop = BinaryOp::Add;
    int lhs = -1;  // Unary operand or Binary left
    int rhs = -1;  // Binary right
  };

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  int root() const noexcept { return root_; }

  /// Evaluates at x; throws DomainError on division by zero, log of a
  /// nonpositive number, sqrt of a negative number or a NaN result.
  double eval(std::span<const double> x) const { return eval_node(root_, x); }

  /// Fully parenthesized rendering that parses back to an identical tree.
  std::string to_string() const {
    std::string out;
    print_node(root_, out);
    return out;
  }

  /// Largest referenced variable index (zero-based), or -1 for none.
  int max_variable() const {
    int m = -1;
    for (const auto& n : nodes_) {
      if (n.kind == NodeKind::Variable) m = std::max(m, n.var);
    }
    return m;
  }

  friend bool operator==(const ExprTree& a, const ExprTree& b) {
    return same_subtree(a, a.root_, b, b.root_);
  }

 private:
  friend class ExprParser;

  int add(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  static bool same_subtree(const ExprTree& a, int i, const ExprTree& b, int j) {
    const Node& p = a.nodes_[static_cast<std::size_t>(i)];
    const Node& q = b.nodes_[static_cast<std::size_t>(j)];
    if (p.kind != q.kind) return false;
    switch (p.kind) {
      case NodeKind::Constant: return p.value == q.value;
      case NodeKind::Variable: return p.var == q.var;
      case NodeKind::Unary: return p.uop == q.uop && same_subtree(a, p.lhs, b, q.lhs);
      case NodeKind::Binary:
        return p.bop == q.bop && same_subtree(a, p.lhs, b, q.lhs) && same_subtree(a, p.rhs, b, q.rhs);
    }
    return false;
  }

  static constexpr std::string_view unary_name(UnaryOp op) {
    switch (op) {
      case UnaryOp::Neg: return "-";
      case UnaryOp::Sin: return "sin";
      case UnaryOp::Cos: return "cos";
      case UnaryOp::Exp: return "exp";
      case UnaryOp::Log: return "log";
      case UnaryOp::Tanh: return "tanh";
      case UnaryOp::Sqrt: return "sqrt";
      case UnaryOp::Abs: return "abs";
    }
    return "?";
  }

  void print_node(int i, std::string& out) const {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    switch (n.kind) {
      case NodeKind::Constant: {
        std::array<char, 32> buf{};
        auto res = std::to_chars(buf.data(), buf.data() + buf.size(), n.value);
        out.append(buf.data(), res.ptr);
        break;
      }
      case NodeKind::Variable:
        out += 'x';
        out += std::to_string(n.var + 1);
        break;
      case NodeKind::Unary:
        if (n.uop == UnaryOp::Neg) {
          out += "(-";
          print_node(n.lhs, out);
          out += ')';
        } else {
          out += unary_name(n.uop);
          out += '(';
          print_node(n.lhs, out);
          out += ')';
        }
        break;
      case NodeKind::Binary: {
        static constexpr std::array<char, 5> sym{'+', '-', '*', '/', '^'};
        out += '(';
        print_node(n.lhs, out);
        out += sym[static_cast<std::size_t>(n.bop)];
        print_node(n.rhs, out);
        out += ')';
        break;
      }
    }
  }

  double eval_node(int i, std::span<const double> x) const {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    switch (n.kind) {
      case NodeKind::Constant: return n.value;
      case NodeKind::Variable: return x[static_cast<std::size_t>(n.var)];
      case NodeKind::Unary: {
        const double a = eval_node(n.lhs, x);
        switch (n.uop) {
          case UnaryOp::Neg: return -a;
          case UnaryOp::Sin: return std::sin(a);
          case UnaryOp::Cos: return std::cos(a);
          case UnaryOp::Exp: return std::exp(a);
          case UnaryOp::Tanh: return std::tanh(a);
          case UnaryOp::Abs: return std::abs(a);
          case UnaryOp::Log:
            if (!(a > 0.0)) throw Error(ErrorCode::DomainError, "log of nonpositive argument");
            return std::log(a);
          case UnaryOp::Sqrt:
            if (a < 0.0 || std::isnan(a)) throw Error(ErrorCode::DomainError, "sqrt of negative argument");
            return std::sqrt(a);
        }
        return a;
      }
      case NodeKind::Binary: {
        const double a = eval_node(n.lhs, x);
        const double b = eval_node(n.rhs, x);
        double r = 0.0;
        switch (n.bop) {
          case BinaryOp::Add: r = a + b; break;
          case BinaryOp::Sub: r = a - b; break;
          case BinaryOp::Mul: r = a * b; break;
          case BinaryOp::Div:
            if (b == 0.0) throw Error(ErrorCode::DomainError, "division by zero");
            r = a / b;
            break;
          case BinaryOp::Pow:
            if (a == 0.0 && b < 0.0) throw Error(ErrorCode::DomainError, "zero raised to a negative power");
            r = std::pow(a, b);
            break;
        }
        if (std::isnan(r) && !std::isnan(a) && !std::isnan(b)) {
          throw Error(ErrorCode::DomainError, "operation produced NaN");
        }
        return r;
      }
    }
    return 0.0;
  }

  std::vector<Node> nodes_;
  int root_ = -1;
};

class ExprParser {
 public:
  ExprParser(std::string_view text, int dimension) : text_(text), dimension_(dimension) {}

  ExprTree parse() {
    skip_ws();
    if (pos_ >= text_.size()) fail("empty expression");
    tree_.root_ = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return std::move(tree_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError, msg + " at position " + std::to_string(pos_), static_cast<double>(pos_));
  }

  void skip_ws() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' || text_[pos_] == '\r')) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  int binary(BinaryOp op, int l, int r) {
    ExprTree::Node n;
    n.kind = NodeKind::Binary;
    n.bop = op;
    n.lhs = l;
    n.rhs = r;
    return tree_.add(n);
  }

  int unary(UnaryOp op, int a) {
    ExprTree::Node n;
    n.kind = NodeKind::Unary;
    n.uop = op;
    n.lhs = a;
    return tree_.add(n);
  }

  int parse_sum() {
    int lhs = parse_product();
    while (true) {
      if (accept('+')) {
        lhs = binary(BinaryOp::Add, lhs, parse_product());
      } else if (accept('-')) {
        lhs = binary(BinaryOp::Sub, lhs, parse_product());
      } else {
        return lhs;
      }
    }
  }

  int parse_product() {
    int lhs = parse_unary();
    while (true) {
      if (accept('*')) {
        lhs = binary(BinaryOp::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = binary(BinaryOp::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (accept('-')) return unary(UnaryOp::Neg, parse_unary());
    return parse_power();
  }

  int parse_power() {
    int base = parse_atom();
    if (accept('^')) return binary(BinaryOp::Pow, base, parse_unary());
    return base;
  }

  int parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      int inner = parse_sum();
      expect(')');
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  int parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t n = digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      n += digits();
    }
    if (n == 0) fail("malformed number");
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (digits() == 0) pos_ = save;
    }
    double v = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
      pos_ = start;
      fail("number out of range");
    }
    ExprTree::Node node;
    node.kind = NodeKind::Constant;
    node.value = v;
    return tree_.add(node);
  }

  int parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view id = text_.substr(start, pos_ - start);

    if (id.size() >= 2 && id[0] == 'x' &&
        id.find_first_not_of("0123456789", 1) == std::string_view::npos) {
      int k = 0;
      auto res = std::from_chars(id.data() + 1, id.data() + id.size(), k);
      if (res.ec != std::errc() || k < 1 || k > dimension_) {
        throw Error(ErrorCode::UnknownVariable,
                    "variable '" + std::string(id) + "' outside x1..x" + std::to_string(dimension_),
                    static_cast<double>(start));
      }
      ExprTree::Node node;
      node.kind = NodeKind::Variable;
      node.var = k - 1;
      return tree_.add(node);
    }

    static constexpr std::array<std::pair<std::string_view, UnaryOp>, 7> funcs{{
        {"sin", UnaryOp::Sin}, {"cos", UnaryOp::Cos}, {"exp", UnaryOp::Exp}, {"log", UnaryOp::Log},
        {"tanh", UnaryOp::Tanh}, {"sqrt", UnaryOp::Sqrt}, {"abs", UnaryOp::Abs},
    }};
    for (const auto& [name, op] : funcs) {
      if (id == name) {
        expect('(');
        int arg = parse_sum();
        expect(')');
        return unary(op, arg);
      }
    }
    pos_ = start;
    if (id[0] == 'x') {
      throw Error(ErrorCode::UnknownVariable, "unknown variable '" + std::string(id) + "'", static_cast<double>(start));
    }
    fail("unknown identifier '" + std::string(id) + "'");
  }

  std::string_view text_;
  int dimension_;
  std::size_t pos_ = 0;
  ExprTree tree_;
};

/// Parses one component of a vector field over variables x1..x`dimension`.
inline ExprTree parse_expression(std::string_view text, int dimension) {
  return ExprParser(text, dimension).parse();
}

}  // namespace monoflow
