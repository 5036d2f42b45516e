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

#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hsurf/error.hpp"
#include "hsurf/fieldspec.hpp"

using namespace hsurf;

namespace {

const std::vector<std::string> kFields = {
    "0.2",
    "x1^2 + x2",
    "sin(x1*x2) + cos(x3)",
    "exp(0.3*x1 - x2^2) / (2 + x3^2)",
    "sqrt(1 + x1^2 + x2^2)",
    "log(3 + x1) * atan(x2 - x3)",
    "-x1^3 + 2.5*x1*x2*x3 - 1/(4 + x2)",
    "(x1 - 0.1)^2 / sqrt(25 - (x1 - 0.1)^2 - (x2 - 0.5)^2)",
    "2^x1 + (x2 + 2)^0.5",
};

double central(const FieldExpr& f, Var v, Point3 p, double h) {
  Point3 a = p, b = p;
  double* ca = v == Var::X1 ? &a.x1 : v == Var::X2 ? &a.x2 : &a.x3;
  double* cb = v == Var::X1 ? &b.x1 : v == Var::X2 ? &b.x2 : &b.x3;
  *ca += h;
  *cb -= h;
  return (f.evaluate(a) - f.evaluate(b)) / (2.0 * h);
}

}  // namespace

TEST_CASE("constants and simple arithmetic") {
  const FieldExpr c = parse_field("0.2");
  CHECK(c.constant_value().value() == 0.2);
  CHECK(c(1.0, -3.0, 7.0) == 0.2);
  CHECK(parse_field("x1^2 + x2")(1.0, 2.0) == 3.0);
  CHECK(parse_field("2^3^2")(0.0) == 512.0);
  CHECK(parse_field("-2^2")(0.0) == -4.0);
  CHECK(parse_field("pi")(0.0) == doctest::Approx(M_PI));
  CHECK(parse_field("1e-3*x1")(2.0) == doctest::Approx(2e-3));
}

TEST_CASE("syntax errors carry their offset") {
  try {
    parse_field("x1 + ");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 5);
  }
  try {
    parse_field("x1 + foo(x2)");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 5);
  }
  CHECK_THROWS_AS(parse_field("(x1"), ParseError);
  CHECK_THROWS_AS(parse_field("x1 x2"), ParseError);
  CHECK_THROWS_AS(parse_field(""), ParseError);
  CHECK_THROWS_AS(parse_field("x4"), ParseError);
}

TEST_CASE("domain errors report the point") {
  const FieldExpr f = parse_field("sqrt(x1)");
  CHECK(f(4.0) == 2.0);
  try {
    f(-1.0);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("-1") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_field("1/x1")(0.0), DomainError);
  CHECK_THROWS_AS(parse_field("log(x1)")(0.0), DomainError);
  CHECK(parse_field("exp(x3)")(0.0, 0.0, 0.0) == 1.0);
}

TEST_CASE("symbolic derivatives of table rules print simply") {
  CHECK(differentiate(parse_field("sin(x3)"), Var::X3).to_string() == "cos(x3)");
  CHECK(differentiate(parse_field("x1^2 + x2"), Var::X1).to_string() == "2*x1");
  const FieldExpr d = differentiate(parse_field("0.2"), Var::X2);
  CHECK(d.is_zero());
  CHECK(d.to_string() == "0");
}

TEST_CASE("derivatives match central differences across a step sweep") {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (const auto& src : kFields) {
    CAPTURE(src);
    const FieldExpr f = parse_field(src);
    for (Var v : {Var::X1, Var::X2, Var::X3}) {
      const FieldExpr df = differentiate(f, v);
      for (int k = 0; k < 100; ++k) {
        const Point3 p{u(rng), u(rng), u(rng)};
        const double exact = df.evaluate(p);
        double best = std::numeric_limits<double>::infinity();
        for (double h : {1e-4, 1e-5, 1e-6}) {
          const double fd = central(f, v, p, h);
          best = std::min(best, std::abs(fd - exact) / std::max(1.0, std::abs(exact)));
        }
        CHECK(best <= 1e-6);
      }
    }
  }
}

TEST_CASE("mixed partials commute") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (const auto& src : kFields) {
    const FieldExpr f = parse_field(src);
    for (Var a : {Var::X1, Var::X2, Var::X3}) {
      for (Var b : {Var::X1, Var::X2, Var::X3}) {
        const FieldExpr ab = differentiate(differentiate(f, a), b);
        const FieldExpr ba = differentiate(differentiate(f, b), a);
        for (int k = 0; k < 20; ++k) {
          const Point3 p{u(rng), u(rng), u(rng)};
          const double x = ab.evaluate(p), y = ba.evaluate(p);
          CHECK(std::abs(x - y) <= 1e-10 * std::max(1.0, std::abs(x)));
        }
      }
    }
  }
}

TEST_CASE("printing then reparsing preserves evaluation") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (const auto& src : kFields) {
    const FieldExpr f = parse_field(src);
    const std::string printed = f.to_string();
    CAPTURE(printed);
    const FieldExpr g = parse_field(printed);
    CHECK(g.to_string() == printed);
    for (int k = 0; k < 50; ++k) {
      const Point3 p{u(rng), u(rng), u(rng)};
      CHECK(g.evaluate(p) == f.evaluate(p));
    }
    for (Var v : {Var::X1, Var::X2, Var::X3}) {
      const FieldExpr d = differentiate(f, v);
      const FieldExpr d2 = parse_field(d.to_string());
      const Point3 p{0.3, -0.2, 0.1};
      CHECK(d2.evaluate(p) == doctest::Approx(d.evaluate(p)).epsilon(1e-14));
    }
  }
}

TEST_CASE("dependency queries and substitution") {
  const FieldExpr f = parse_field("x1*x2 + sin(x3)");
  CHECK(f.depends_on(Var::X1));
  CHECK(f.depends_on(Var::X3));
  CHECK_FALSE(parse_field("x1 + 0*x3").depends_on(Var::X3));
  const FieldExpr g = substitute(f, Var::X2, parse_field("x1^2"));
  CHECK_FALSE(g.depends_on(Var::X2));
  CHECK(g(2.0, 100.0, 0.0) == doctest::Approx(8.0));
}
