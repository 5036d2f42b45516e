// Copyright 2026 The hsurf Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hsurf/fieldspec.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hsurf/error.hpp"

namespace hsurf {
namespace detail {

enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call };

struct ExprNode {
  Op op = Op::Const;
  double value = 0.0;
  Var var = Var::X1;
  Func func = Func::Sin;
  std::shared_ptr<const ExprNode> lhs;
  std::shared_ptr<const ExprNode> rhs;
};

}  // namespace detail

using detail::ExprNode;
using detail::Op;
using NodePtr = std::shared_ptr<const ExprNode>;

namespace {

NodePtr make_const(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

NodePtr make_var(Var v) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Var;
  n->var = v;
  return n;
}

bool is_const(const NodePtr& n, double v) {
  return n->op == Op::Const && n->value == v;
}

std::optional<double> const_of(const NodePtr& n) {
  if (n->op == Op::Const) return n->value;
  return std::nullopt;
}

NodePtr raw(Op op, NodePtr a, NodePtr b = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

double apply_func(Func f, double x) {
  switch (f) {
    case Func::Sin: return std::sin(x);
    case Func::Cos: return std::cos(x);
    case Func::Exp: return std::exp(x);
    case Func::Sqrt: return std::sqrt(x);
    case Func::Log: return std::log(x);
    case Func::Atan: return std::atan(x);
  }
  return 0.0;
}

const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Exp: return "exp";
    case Func::Sqrt: return "sqrt";
    case Func::Log: return "log";
    case Func::Atan: return "atan";
  }
  return "?";
}

NodePtr make_neg(NodePtr a) {
  if (auto c = const_of(a)) return make_const(-*c);
  if (a->op == Op::Neg) return a->lhs;
  return raw(Op::Neg, std::move(a));
}

NodePtr make_add(NodePtr a, NodePtr b) {
  auto ca = const_of(a), cb = const_of(b);
  if (ca && cb) return make_const(*ca + *cb);
  if (ca && *ca == 0.0) return b;
  if (cb && *cb == 0.0) return a;
  if (b->op == Op::Neg) return raw(Op::Sub, std::move(a), b->lhs);
  return raw(Op::Add, std::move(a), std::move(b));
}

NodePtr make_sub(NodePtr a, NodePtr b) {
  auto ca = const_of(a), cb = const_of(b);
  if (ca && cb) return make_const(*ca - *cb);
  if (cb && *cb == 0.0) return a;
  if (ca && *ca == 0.0) return make_neg(std::move(b));
  if (b->op == Op::Neg) return raw(Op::Add, std::move(a), b->lhs);
  return raw(Op::Sub, std::move(a), std::move(b));
}

NodePtr make_mul(NodePtr a, NodePtr b) {
  auto ca = const_of(a), cb = const_of(b);
  if (ca && cb) return make_const(*ca * *cb);
  if ((ca && *ca == 0.0) || (cb && *cb == 0.0)) return make_const(0.0);
  if (ca && *ca == 1.0) return b;
  if (cb && *cb == 1.0) return a;
  if (ca && *ca == -1.0) return make_neg(std::move(b));
  if (cb && *cb == -1.0) return make_neg(std::move(a));
  // Keep numeric factors in front.
  if (cb && !ca) return make_mul(std::move(b), std::move(a));
  if (ca && b->op == Op::Mul && b->lhs->op == Op::Const) {
    return make_mul(make_const(*ca * b->lhs->value), b->rhs);
  }
  if (a->op == Op::Neg) return make_neg(make_mul(a->lhs, std::move(b)));
  if (b->op == Op::Neg) return make_neg(make_mul(std::move(a), b->lhs));
  return raw(Op::Mul, std::move(a), std::move(b));
}

NodePtr make_div(NodePtr a, NodePtr b) {
  auto ca = const_of(a), cb = const_of(b);
  if (ca && cb && *cb != 0.0) return make_const(*ca / *cb);
  if (ca && *ca == 0.0 && !(cb && *cb == 0.0)) return make_const(0.0);
  if (cb && *cb == 1.0) return a;
  return raw(Op::Div, std::move(a), std::move(b));
}

NodePtr make_pow(NodePtr a, NodePtr b) {
  auto ca = const_of(a), cb = const_of(b);
  if (cb && *cb == 0.0) return make_const(1.0);
  if (cb && *cb == 1.0) return a;
  if (ca && cb) {
    const double v = std::pow(*ca, *cb);
    if (std::isfinite(v)) return make_const(v);
  }
  return raw(Op::Pow, std::move(a), std::move(b));
}

NodePtr make_call(Func f, NodePtr a) {
  if (auto c = const_of(a)) {
    const double v = apply_func(f, *c);
    if (std::isfinite(v) && !(f == Func::Sqrt && *c < 0.0) &&
        !(f == Func::Log && *c <= 0.0)) {
      return make_const(v);
    }
  }
  auto n = std::make_shared<ExprNode>();
  n->op = Op::Call;
  n->func = f;
  n->lhs = std::move(a);
  return n;
}

// ---------------------------------------------------------------- evaluation

[[noreturn]] void domain_failure(const char* what, const Point3& p) {
  std::ostringstream os;
  os.precision(17);
  os << "domain error: " << what << " at (" << p.x1 << ", " << p.x2 << ", " << p.x3
     << ")";
  throw DomainError(os.str());
}

double eval(const ExprNode& n, const Point3& p) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var:
      return n.var == Var::X1 ? p.x1 : (n.var == Var::X2 ? p.x2 : p.x3);
    case Op::Neg: return -eval(*n.lhs, p);
    case Op::Add: return eval(*n.lhs, p) + eval(*n.rhs, p);
    case Op::Sub: return eval(*n.lhs, p) - eval(*n.rhs, p);
    case Op::Mul: return eval(*n.lhs, p) * eval(*n.rhs, p);
    case Op::Div: {
      const double den = eval(*n.rhs, p);
      if (den == 0.0) domain_failure("division by zero", p);
      return eval(*n.lhs, p) / den;
    }
    case Op::Pow: {
      const double base = eval(*n.lhs, p);
      const double ex = eval(*n.rhs, p);
      const double v = std::pow(base, ex);
      if (!std::isfinite(v)) domain_failure("power outside its domain", p);
      return v;
    }
    case Op::Call: {
      const double x = eval(*n.lhs, p);
      if (n.func == Func::Sqrt && x < 0.0) domain_failure("sqrt of negative", p);
      if (n.func == Func::Log && x <= 0.0) domain_failure("log of non-positive", p);
      const double v = apply_func(n.func, x);
      if (!std::isfinite(v)) domain_failure("non-finite function value", p);
      return v;
    }
  }
  return 0.0;
}

bool depends(const ExprNode& n, Var v) {
  switch (n.op) {
    case Op::Const: return false;
    case Op::Var: return n.var == v;
    case Op::Neg:
    case Op::Call: return depends(*n.lhs, v);
    default: return depends(*n.lhs, v) || depends(*n.rhs, v);
  }
}

// ------------------------------------------------------------------ printing

int precedence(const ExprNode& n) {
  switch (n.op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    case Op::Neg: return 3;
    case Op::Pow: return 4;
    case Op::Const: return n.value < 0.0 || std::signbit(n.value) ? 3 : 5;
    default: return 5;
  }
}

std::string number_text(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string print(const ExprNode& n, int min_prec);

std::string wrap(const ExprNode& n, int min_prec) {
  std::string s = print(n, 0);
  if (precedence(n) < min_prec) return "(" + s + ")";
  return s;
}

std::string print(const ExprNode& n, int) {
  switch (n.op) {
    case Op::Const: return number_text(n.value);
    case Op::Var: return var_name(n.var);
    case Op::Neg: return "-" + wrap(*n.lhs, 3);
    case Op::Add: return wrap(*n.lhs, 1) + " + " + wrap(*n.rhs, 2);
    case Op::Sub: return wrap(*n.lhs, 1) + " - " + wrap(*n.rhs, 2);
    case Op::Mul: return wrap(*n.lhs, 2) + "*" + wrap(*n.rhs, 3);
    case Op::Div: return wrap(*n.lhs, 2) + "/" + wrap(*n.rhs, 3);
    case Op::Pow: return wrap(*n.lhs, 5) + "^" + wrap(*n.rhs, 3);
    case Op::Call: return std::string(func_name(n.func)) + "(" + print(*n.lhs, 0) + ")";
  }
  return {};
}

// ------------------------------------------------------------------- parsing

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    NodePtr e = expression();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("syntax error: " + what, pos_);
  }

  void skip_ws() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
            src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_add(lhs, term());
      } else if (accept('-')) {
        lhs = make_sub(lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_mul(lhs, unary());
      } else if (accept('/')) {
        lhs = make_div(lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_neg(unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make_pow(base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("expected operand, found end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expression();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') return identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    double v = 0.0;
    auto res = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), v);
    if (res.ec != std::errc()) fail("malformed number");
    pos_ = static_cast<std::size_t>(res.ptr - src_.data());
    if (pos_ == start) fail("malformed number");
    return make_const(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           ((src_[pos_] >= 'a' && src_[pos_] <= 'z') ||
            (src_[pos_] >= 'A' && src_[pos_] <= 'Z') ||
            (src_[pos_] >= '0' && src_[pos_] <= '9') || src_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "x1") return make_var(Var::X1);
    if (name == "x2") return make_var(Var::X2);
    if (name == "x3") return make_var(Var::X3);
    if (name == "pi") return make_const(std::numbers::pi);
    static constexpr std::pair<std::string_view, Func> kFuncs[] = {
        {"sin", Func::Sin},   {"cos", Func::Cos}, {"exp", Func::Exp},
        {"sqrt", Func::Sqrt}, {"log", Func::Log}, {"atan", Func::Atan}};
    for (const auto& [fname, f] : kFuncs) {
      if (name == fname) {
        if (!accept('(')) fail("expected '(' after " + std::string(name));
        NodePtr arg = expression();
        if (!accept(')')) fail("expected ')'");
        return make_call(f, arg);
      }
    }
    pos_ = start;
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

// ------------------------------------------------------------ differentiation

NodePtr diff(const NodePtr& n, Var v) {
  if (!depends(*n, v)) return make_const(0.0);
  switch (n->op) {
    case Op::Const: return make_const(0.0);
    case Op::Var: return make_const(n->var == v ? 1.0 : 0.0);
    case Op::Neg: return make_neg(diff(n->lhs, v));
    case Op::Add: return make_add(diff(n->lhs, v), diff(n->rhs, v));
    case Op::Sub: return make_sub(diff(n->lhs, v), diff(n->rhs, v));
    case Op::Mul:
      return make_add(make_mul(diff(n->lhs, v), n->rhs),
                      make_mul(n->lhs, diff(n->rhs, v)));
    case Op::Div:
      if (!depends(*n->rhs, v)) return make_div(diff(n->lhs, v), n->rhs);
      return make_div(make_sub(make_mul(diff(n->lhs, v), n->rhs),
                               make_mul(n->lhs, diff(n->rhs, v))),
                      make_pow(n->rhs, make_const(2.0)));
    case Op::Pow: {
      if (!depends(*n->rhs, v)) {
        // d(a^c) = c a^(c-1) a'
        NodePtr reduced = n->rhs->op == Op::Const ? make_const(n->rhs->value - 1.0)
                                                  : make_sub(n->rhs, make_const(1.0));
        return make_mul(make_mul(n->rhs, make_pow(n->lhs, reduced)), diff(n->lhs, v));
      }
      // d(a^b) = a^b (b' log a + b a'/a)
      return make_mul(n, make_add(make_mul(diff(n->rhs, v), make_call(Func::Log, n->lhs)),
                                  make_div(make_mul(n->rhs, diff(n->lhs, v)), n->lhs)));
    }
    case Op::Call: {
      const NodePtr& a = n->lhs;
      NodePtr da = diff(a, v);
      switch (n->func) {
        case Func::Sin: return make_mul(make_call(Func::Cos, a), da);
        case Func::Cos: return make_neg(make_mul(make_call(Func::Sin, a), da));
        case Func::Exp: return make_mul(n, da);
        case Func::Sqrt: return make_div(da, make_mul(make_const(2.0), n));
        case Func::Log: return make_div(da, a);
        case Func::Atan:
          return make_div(da, make_add(make_const(1.0), make_pow(a, make_const(2.0))));
      }
    }
  }
  return make_const(0.0);
}

NodePtr subst(const NodePtr& n, Var v, const NodePtr& e) {
  switch (n->op) {
    case Op::Const: return n;
    case Op::Var: return n->var == v ? e : n;
    case Op::Neg: return make_neg(subst(n->lhs, v, e));
    case Op::Add: return make_add(subst(n->lhs, v, e), subst(n->rhs, v, e));
    case Op::Sub: return make_sub(subst(n->lhs, v, e), subst(n->rhs, v, e));
    case Op::Mul: return make_mul(subst(n->lhs, v, e), subst(n->rhs, v, e));
    case Op::Div: return make_div(subst(n->lhs, v, e), subst(n->rhs, v, e));
    case Op::Pow: return make_pow(subst(n->lhs, v, e), subst(n->rhs, v, e));
    case Op::Call: return make_call(n->func, subst(n->lhs, v, e));
  }
  return n;
}

}  // namespace

const char* var_name(Var v) {
  switch (v) {
    case Var::X1: return "x1";
    case Var::X2: return "x2";
    case Var::X3: return "x3";
  }
  return "?";
}

FieldExpr::FieldExpr() : root_(make_const(0.0)) {}
FieldExpr::FieldExpr(std::shared_ptr<const detail::ExprNode> root) : root_(std::move(root)) {}

FieldExpr FieldExpr::constant(double value) { return FieldExpr(make_const(value)); }
FieldExpr FieldExpr::variable(Var v) { return FieldExpr(make_var(v)); }

double FieldExpr::evaluate(const Point3& p) const { return eval(*root_, p); }

bool FieldExpr::depends_on(Var v) const { return depends(*root_, v); }

std::optional<double> FieldExpr::constant_value() const { return const_of(root_); }

bool FieldExpr::is_zero() const { return is_const(root_, 0.0); }

std::string FieldExpr::to_string() const { return print(*root_, 0); }

FieldExpr operator+(const FieldExpr& a, const FieldExpr& b) {
  return FieldExpr(make_add(a.root_, b.root_));
}
FieldExpr operator-(const FieldExpr& a, const FieldExpr& b) {
  return FieldExpr(make_sub(a.root_, b.root_));
}
FieldExpr operator*(const FieldExpr& a, const FieldExpr& b) {
  return FieldExpr(make_mul(a.root_, b.root_));
}
FieldExpr operator/(const FieldExpr& a, const FieldExpr& b) {
  return FieldExpr(make_div(a.root_, b.root_));
}
FieldExpr operator-(const FieldExpr& a) { return FieldExpr(make_neg(a.root_)); }

namespace {
const NodePtr& root_of(const FieldExpr& f) { return f.shared_node(); }
}  // namespace

FieldExpr pow(const FieldExpr& base, const FieldExpr& exponent) {
  return FieldExpr(make_pow(root_of(base), root_of(exponent)));
}

FieldExpr apply(Func f, const FieldExpr& arg) { return FieldExpr(make_call(f, root_of(arg))); }

FieldExpr parse_field(std::string_view src) { return FieldExpr(Parser(src).parse()); }

FieldExpr differentiate(const FieldExpr& f, Var v) {
  return FieldExpr(diff(root_of(f), v));
}

FieldExpr substitute(const FieldExpr& f, Var v, const FieldExpr& e) {
  return FieldExpr(subst(root_of(f), v, root_of(e)));
}

}  // namespace hsurf
