#pragma once

#include <cctype>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "crweyl/jet.hpp"

namespace crweyl {

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line, int col)
      : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + msg),
        line(line),
        col(col) {}
  int line;
  int col;
};

// Coordinate expressions over a fixed coordinate list. Immutable after
// parsing; evaluation is pure, so expressions may be shared freely.
//
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ('^' factor)?
//   atom   := number | ident | ident '(' expr (',' expr)* ')'
//           | '(' expr ')' | '-' atom
// Functions: sin cos tan exp log sqrt abs (unary), atan2 (binary).
class Expression {
 public:
  enum class Op {
    kNumber, kCoord,
    kAdd, kSub, kMul, kDiv, kPow,
    kNeg,
    kSin, kCos, kTan, kExp, kLog, kSqrt, kAbs,
    kAtan2,
  };

  struct Node {
    Op op;
    double number = 0.0;
    int coord = -1;
    std::shared_ptr<const Node> a, b;
  };
  using NodePtr = std::shared_ptr<const Node>;

  Expression() = default;
  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  static Expression number(double v) {
    return Expression(make(Op::kNumber, v, -1, nullptr, nullptr));
  }
  static Expression coordinate(int index) {
    return Expression(make(Op::kCoord, 0.0, index, nullptr, nullptr));
  }

  bool empty() const { return root_ == nullptr; }
  const NodePtr& root() const { return root_; }

  // AST composition. Trivial identities (x+0, x*1, x*0) are collapsed so
  // that assembled catalog formulas stay readable when printed.
  friend Expression operator+(const Expression& a, const Expression& b) {
    if (is_zero(a)) return b;
    if (is_zero(b)) return a;
    return Expression(make(Op::kAdd, 0, -1, a.root_, b.root_));
  }
  friend Expression operator-(const Expression& a, const Expression& b) {
    if (is_zero(b)) return a;
    return Expression(make(Op::kSub, 0, -1, a.root_, b.root_));
  }
  friend Expression operator*(const Expression& a, const Expression& b) {
    if (is_zero(a) || is_zero(b)) return number(0.0);
    if (is_one(a)) return b;
    if (is_one(b)) return a;
    return Expression(make(Op::kMul, 0, -1, a.root_, b.root_));
  }
  friend Expression operator/(const Expression& a, const Expression& b) {
    if (is_zero(a)) return number(0.0);
    if (is_one(b)) return a;
    return Expression(make(Op::kDiv, 0, -1, a.root_, b.root_));
  }
  friend Expression operator-(const Expression& a) {
    return Expression(make(Op::kNeg, 0, -1, a.root_, nullptr));
  }

  static Expression apply(Op op, const Expression& a) {
    return Expression(make(op, 0, -1, a.root_, nullptr));
  }
  static Expression pow(const Expression& a, const Expression& b) {
    return Expression(make(Op::kPow, 0, -1, a.root_, b.root_));
  }

  // Value together with derivatives up to `order` at p.
  Jet evaluate_jet(const Eigen::VectorXd& p, int order = 3) const {
    if (!root_) throw std::logic_error("evaluation of an empty expression");
    return eval(*root_, p, order);
  }

  double evaluate(const Eigen::VectorXd& p) const {
    return evaluate_jet(p, 0).value();
  }

  std::string pretty() const { return root_ ? print(*root_, 0) : ""; }

  // Composition: every coordinate symbol i is replaced by repl[i].
  Expression substitute(const std::vector<Expression>& repl) const {
    if (!root_) return {};
    return Expression(subst(*root_, repl));
  }

  static bool equal(const Expression& a, const Expression& b) {
    return node_equal(a.root_.get(), b.root_.get());
  }

 private:
  static NodePtr make(Op op, double num, int coord, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->number = num;
    n->coord = coord;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  static bool is_zero(const Expression& e) {
    return e.root_ && e.root_->op == Op::kNumber && e.root_->number == 0.0;
  }
  static bool is_one(const Expression& e) {
    return e.root_ && e.root_->op == Op::kNumber && e.root_->number == 1.0;
  }

  static Jet eval(const Node& n, const Eigen::VectorXd& p, int order) {
    const int dim = static_cast<int>(p.size());
    try {
      switch (n.op) {
        case Op::kNumber: return Jet::constant(n.number, dim, order);
        case Op::kCoord:
          if (n.coord >= dim)
            throw EvalError("coordinate index out of range");
          return Jet::coordinate(p(n.coord), n.coord, dim, order);
        case Op::kAdd: return eval(*n.a, p, order) + eval(*n.b, p, order);
        case Op::kSub: return eval(*n.a, p, order) - eval(*n.b, p, order);
        case Op::kMul: return eval(*n.a, p, order) * eval(*n.b, p, order);
        case Op::kDiv: return eval(*n.a, p, order) / eval(*n.b, p, order);
        case Op::kPow: {
          Jet base = eval(*n.a, p, order);
          if (n.b->op == Op::kNumber) {
            double e = n.b->number;
            if (e == std::floor(e) && std::abs(e) < 1e15)
              return jet_pow_int(base, static_cast<long long>(e));
            return jet_pow_real(base, e);
          }
          Jet expo = eval(*n.b, p, order);
          if (base.value() <= 0.0)
            throw EvalError("real power of a non-positive base");
          return jet_exp(expo * jet_log(base));
        }
        case Op::kNeg: return -eval(*n.a, p, order);
        case Op::kSin: return jet_sin(eval(*n.a, p, order));
        case Op::kCos: return jet_cos(eval(*n.a, p, order));
        case Op::kTan: return jet_tan(eval(*n.a, p, order));
        case Op::kExp: return jet_exp(eval(*n.a, p, order));
        case Op::kLog: return jet_log(eval(*n.a, p, order));
        case Op::kSqrt: return jet_sqrt(eval(*n.a, p, order));
        case Op::kAbs: return jet_abs(eval(*n.a, p, order));
        case Op::kAtan2:
          return jet_atan2(eval(*n.a, p, order), eval(*n.b, p, order));
      }
    } catch (const EvalError& err) {
      // Tag the innermost failing subexpression once.
      std::string what = err.what();
      if (what.find(" in '") == std::string::npos)
        throw EvalError(what + " in '" + print(n, 0) + "'");
      throw;
    }
    throw std::logic_error("unreachable");
  }

  // Precedence levels for printing: 0 add, 1 mul, 2 unary minus, 3 pow-base,
  // 4 atom. Children are parenthesized whenever re-parsing would otherwise
  // bind them differently.
  static std::string print(const Node& n, int parent_level) {
    auto paren = [&](const std::string& s, int level) {
      return level < parent_level ? "(" + s + ")" : s;
    };
    switch (n.op) {
      case Op::kNumber: {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", n.number);
        std::string s = buf;
        return (n.number < 0) ? paren(s, 2) : s;
      }
      case Op::kCoord: return "@" + std::to_string(n.coord);
      case Op::kAdd: return paren(print(*n.a, 0) + " + " + print(*n.b, 1), 0);
      case Op::kSub: return paren(print(*n.a, 0) + " - " + print(*n.b, 1), 0);
      case Op::kMul: return paren(print(*n.a, 1) + "*" + print(*n.b, 2), 1);
      case Op::kDiv: return paren(print(*n.a, 1) + "/" + print(*n.b, 2), 1);
      // '^' binds its base as an atom and its exponent as a factor.
      case Op::kPow: return paren(print(*n.a, 4) + "^" + print(*n.b, 3), 3);
      case Op::kNeg: return paren("-" + print(*n.a, 4), 2);
      case Op::kSin: return "sin(" + print(*n.a, 0) + ")";
      case Op::kCos: return "cos(" + print(*n.a, 0) + ")";
      case Op::kTan: return "tan(" + print(*n.a, 0) + ")";
      case Op::kExp: return "exp(" + print(*n.a, 0) + ")";
      case Op::kLog: return "log(" + print(*n.a, 0) + ")";
      case Op::kSqrt: return "sqrt(" + print(*n.a, 0) + ")";
      case Op::kAbs: return "abs(" + print(*n.a, 0) + ")";
      case Op::kAtan2:
        return "atan2(" + print(*n.a, 0) + ", " + print(*n.b, 0) + ")";
    }
    return {};
  }

  static NodePtr subst(const Node& n, const std::vector<Expression>& repl) {
    if (n.op == Op::kCoord) {
      const Expression& r = repl.at(static_cast<size_t>(n.coord));
      if (!r.root()) throw std::logic_error("substitute: empty replacement");
      return r.root();
    }
    if (!n.a && !n.b)
      return make(n.op, n.number, n.coord, nullptr, nullptr);
    return make(n.op, n.number, n.coord, n.a ? subst(*n.a, repl) : nullptr,
                n.b ? subst(*n.b, repl) : nullptr);
  }

  static bool node_equal(const Node* a, const Node* b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->op != b->op || a->number != b->number || a->coord != b->coord)
      return false;
    return node_equal(a->a.get(), b->a.get()) &&
           node_equal(a->b.get(), b->b.get());
  }

  NodePtr root_;

  friend class Parser;
};

namespace detail {

class Parser {
 public:
  Parser(std::string_view src, const std::vector<std::string>& coords)
      : src_(src), coords_(coords) {}

  Expression parse() {
    Expression::NodePtr e = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) fail("unexpected trailing input");
    return Expression(e);
  }

 private:
  using Node = Expression::Node;
  using Op = Expression::Op;

  Expression::NodePtr parse_expr() {
    auto e = parse_term();
    for (;;) {
      skip_ws();
      if (match('+')) {
        auto r = parse_term();
        e = mk(Op::kAdd, e, r);
      } else if (match('-')) {
        auto r = parse_term();
        e = mk(Op::kSub, e, r);
      } else {
        return e;
      }
    }
  }

  Expression::NodePtr parse_term() {
    auto e = parse_factor();
    for (;;) {
      skip_ws();
      if (match('*')) {
        auto r = parse_factor();
        e = mk(Op::kMul, e, r);
      } else if (match('/')) {
        auto r = parse_factor();
        e = mk(Op::kDiv, e, r);
      } else {
        return e;
      }
    }
  }

  Expression::NodePtr parse_factor() {
    auto base = parse_atom();
    skip_ws();
    if (match('^')) {
      auto expo = parse_factor();  // right-associative
      return mk(Op::kPow, base, expo);
    }
    return base;
  }

  Expression::NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    char c = src_[pos_];
    if (c == '-') {
      advance();
      auto a = parse_atom();
      return mk(Op::kNeg, a, nullptr);
    }
    if (c == '(') {
      advance();
      auto e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_ident();
    fail(std::string("unexpected character '") + c + "'");
    return nullptr;
  }

  Expression::NodePtr parse_number() {
    size_t start = pos_;
    while (pos_ < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_])))
      advance();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      advance();
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      size_t mark = pos_;
      int mark_line = line_, mark_col = col_;
      advance();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
        advance();
      if (pos_ < src_.size() &&
          std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_])))
          advance();
      } else {
        // 'e' was an identifier start, not an exponent
        pos_ = mark;
        line_ = mark_line;
        col_ = mark_col;
      }
    }
    double v = std::strtod(std::string(src_.substr(start, pos_ - start)).c_str(),
                           nullptr);
    auto n = std::make_shared<Node>();
    n->op = Op::kNumber;
    n->number = v;
    return n;
  }

  Expression::NodePtr parse_ident() {
    int line = line_, col = col_;
    size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
            src_[pos_] == '_'))
      advance();
    std::string name(src_.substr(start, pos_ - start));
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      advance();
      std::vector<Expression::NodePtr> args;
      args.push_back(parse_expr());
      skip_ws();
      while (match(',')) args.push_back(parse_expr());
      expect(')');
      return make_call(name, args, line, col);
    }
    for (size_t i = 0; i < coords_.size(); ++i) {
      if (coords_[i] == name) {
        auto n = std::make_shared<Node>();
        n->op = Op::kCoord;
        n->coord = static_cast<int>(i);
        return n;
      }
    }
    throw ParseError("unknown identifier '" + name + "'", line, col);
  }

  Expression::NodePtr make_call(const std::string& name,
                                const std::vector<Expression::NodePtr>& args,
                                int line, int col) {
    struct Fn { const char* name; Op op; size_t arity; };
    static const Fn table[] = {
        {"sin", Op::kSin, 1},  {"cos", Op::kCos, 1},   {"tan", Op::kTan, 1},
        {"exp", Op::kExp, 1},  {"log", Op::kLog, 1},   {"sqrt", Op::kSqrt, 1},
        {"abs", Op::kAbs, 1},  {"atan2", Op::kAtan2, 2},
    };
    for (const auto& f : table) {
      if (name == f.name) {
        if (args.size() != f.arity)
          throw ParseError("function '" + name + "' expects " +
                               std::to_string(f.arity) + " argument(s)",
                           line, col);
        return mk(f.op, args[0], args.size() > 1 ? args[1] : nullptr);
      }
    }
    throw ParseError("unknown identifier '" + name + "'", line, col);
  }

  static Expression::NodePtr mk(Op op, Expression::NodePtr a,
                                Expression::NodePtr b) {
    auto n = std::make_shared<Node>();
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }

  void skip_ws() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_])))
      advance();
  }

  bool match(char c) {
    if (pos_ < src_.size() && src_[pos_] == c) {
      advance();
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_ws();
    if (!match(c)) fail(std::string("expected '") + c + "'");
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_, col_);
  }

  std::string_view src_;
  const std::vector<std::string>& coords_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace detail

inline Expression parse(std::string_view source,
                        const std::vector<std::string>& coords) {
  return detail::Parser(source, coords).parse();
}

// Pretty-printing uses "@i" placeholders for coordinates; this resolves them
// against a coordinate list so printed expressions re-parse.
inline std::string pretty(const Expression& e,
                          const std::vector<std::string>& coords) {
  std::string s = e.pretty();
  std::string out;
  for (size_t i = 0; i < s.size();) {
    if (s[i] == '@') {
      size_t j = i + 1;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])))
        ++j;
      out += coords.at(std::stoul(s.substr(i + 1, j - i - 1)));
      i = j;
    } else {
      out += s[i++];
    }
  }
  return out;
}

}  // namespace crweyl
