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

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace hsurf {

enum class Var { X1 = 0, X2 = 1, X3 = 2 };

struct Point3 {
  double x1 = 0.0;
  double x2 = 0.0;
  double x3 = 0.0;
};

enum class Func { Sin, Cos, Exp, Sqrt, Log, Atan };

namespace detail {
struct ExprNode;
}

// Immutable closed-form scalar field over (x1, x2, x3). Copies share the
// expression tree; evaluation is pure and safe to call concurrently.
class FieldExpr {
 public:
  FieldExpr();  // the constant 0

  static FieldExpr constant(double value);
  static FieldExpr variable(Var v);

  // Throws DomainError (with the point in the message) for sqrt/log outside
  // their domain, division by zero, or any non-finite intermediate.
  double evaluate(const Point3& p) const;
  double operator()(double x1, double x2 = 0.0, double x3 = 0.0) const {
    return evaluate({x1, x2, x3});
  }

  bool depends_on(Var v) const;
  std::optional<double> constant_value() const;
  bool is_zero() const;

  // Fully parenthesized where needed; parse(to_string()) evaluates identically.
  std::string to_string() const;

  const detail::ExprNode& node() const { return *root_; }
  const std::shared_ptr<const detail::ExprNode>& shared_node() const { return root_; }

  explicit FieldExpr(std::shared_ptr<const detail::ExprNode> root);

  friend FieldExpr operator+(const FieldExpr& a, const FieldExpr& b);
  friend FieldExpr operator-(const FieldExpr& a, const FieldExpr& b);
  friend FieldExpr operator*(const FieldExpr& a, const FieldExpr& b);
  friend FieldExpr operator/(const FieldExpr& a, const FieldExpr& b);
  friend FieldExpr operator-(const FieldExpr& a);

 private:
  std::shared_ptr<const detail::ExprNode> root_;
};

FieldExpr pow(const FieldExpr& base, const FieldExpr& exponent);
FieldExpr apply(Func f, const FieldExpr& arg);

// Grammar: + - * / ^ (right associative), unary minus, parentheses, numbers,
// variables x1 x2 x3, the constant pi, and sin cos exp sqrt log atan.
// Throws ParseError carrying the byte offset of the first problem.
FieldExpr parse_field(std::string_view src);

// Symbolic partial derivative, lightly simplified.
FieldExpr differentiate(const FieldExpr& f, Var v);

// Replaces variable v by the expression e.
FieldExpr substitute(const FieldExpr& f, Var v, const FieldExpr& e);

const char* var_name(Var v);

}  // namespace hsurf
