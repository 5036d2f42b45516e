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

#include "hsurf/error.hpp"
#include "hsurf/solver.hpp"
#include "hsurf/surface.hpp"

using namespace hsurf;

namespace {

FieldExpr F(const char* s) { return parse_field(s); }

DomainSpec centred_square() { return make_domain(F("-0.5"), F("0.5"), F("0"), -0.5, 0.5, 2.0); }
DomainSpec cap() { return make_domain(F("0"), F("0.09 - x1^2"), F("0"), -0.3, 0.3, 0.4); }

const char* kCapExact = "-sqrt(25 - (x1 - 0.1)^2 - (x2 - 0.5)^2)";

std::vector<double> sample(const Mesh& mesh, const FieldExpr& f) {
  std::vector<double> z(mesh.size());
  for (std::size_t i = 0; i < mesh.size(); ++i) z[i] = f(mesh.nodes[i].x(), mesh.nodes[i].y());
  return z;
}

// Outward-sloping unit normal of the lower sphere about (0.1, 0.5, 0), radius 5.
Vec3 sphere_normal(const Vec3& x) { return -(x - Vec3(0.1, 0.5, 0.0)) / 5.0; }

int nearest(const Mesh& mesh, const Vec2& p) {
  int best = 0;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    if ((mesh.nodes[i] - p).norm() < (mesh.nodes[static_cast<std::size_t>(best)] - p).norm()) {
      best = static_cast<int>(i);
    }
  }
  return best;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("flat lift") {
  const DomainSpec d = centred_square();
  const Mesh mesh = generate_band_mesh(d, 6, 6);
  const SurfaceGeometry s = lift_graph(mesh, std::vector<double>(mesh.size(), 0.0), d);
  for (const Vec3& N : s.normal) CHECK((N - Vec3::UnitZ()).norm() == 0.0);
  for (double w : s.element_w) CHECK(w == 1.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s.H_disc[i] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.K_disc[i] == doctest::Approx(0.0).epsilon(1e-12));
  }
  double total = 0.0;
  for (double a : s.node_area) total += a;
  CHECK(total == doctest::Approx(1.0));
  REQUIRE(s.frames.size() == 5);
  for (const TraceFrame& f : s.frames) {
    CHECK((f.tau - Vec3::UnitX()).norm() < 1e-14);
    CHECK((f.eta - Vec3::UnitY()).norm() < 1e-14);
  }
}

TEST_CASE("tilted plane") {
  const DomainSpec d = centred_square();
  const Mesh mesh = generate_band_mesh(d, 5, 4);
  const SurfaceGeometry s = lift_graph(mesh, sample(mesh, F("x1")), d);
  const Vec3 expected = Vec3(-1.0, 0.0, 1.0) / std::sqrt(2.0);
  for (const Vec3& N : s.normal) CHECK((N - expected).norm() < 1e-14);
  for (double w : s.element_w) CHECK(w == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(std::abs(s.H_disc[i]) < 1e-10);
    CHECK(std::abs(s.K_disc[i]) < 1e-10);
  }
}

TEST_CASE("spherical cap normals and curvatures") {
  const DomainSpec d = cap();
  const Mesh mesh = generate_band_mesh(d, 64, 16);
  CHECK(mesh.h_max <= 1.0 / 64.0);
  const SurfaceGeometry s = lift_graph(mesh, sample(mesh, F(kCapExact)), d);
  double nerr = 0.0, corner_err = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double e = (s.normal[i] - sphere_normal(s.position[i])).norm();
    if (mesh.node_tags[i] == NodeTag::Corner) {
      corner_err = std::max(corner_err, e);
    } else {
      nerr = std::max(nerr, e);
    }
    CHECK(s.H_disc[i] == doctest::Approx(0.2).epsilon(5e-2));
    CHECK(s.K_disc[i] == doctest::Approx(0.04).epsilon(5e-2));
  }
  CHECK(nerr <= 1e-3);
  // The corner node only sees a fan of thin one-sided elements.
  CHECK(corner_err <= 2e-3);
}

TEST_CASE("saddle curvatures at the origin") {
  const DomainSpec d = centred_square();
  const Mesh mesh = generate_band_mesh(d, 64, 64);
  const SurfaceGeometry s = lift_graph(mesh, sample(mesh, F("x1 * x2")), d);
  const std::size_t o = static_cast<std::size_t>(nearest(mesh, Vec2::Zero()));
  REQUIRE(mesh.nodes[o].norm() < 1e-12);
  CHECK(std::abs(s.H_disc[o]) <= 5e-2);
  CHECK(s.K_disc[o] == doctest::Approx(-1.0).epsilon(5e-2));
}

TEST_CASE("rank-deficient neighbourhoods fall back to a wider ring") {
  const DomainSpec d = centred_square();
  const Mesh mesh = generate_band_mesh(d, 1, 1);
  const SurfaceGeometry s = lift_graph(mesh, sample(mesh, F("x1^2")), d);
  // Four nodes cannot support a five-parameter fit at any depth.
  for (const QuadricFit& f : s.fits) {
    CHECK(f.ring == 3);
    CHECK(std::isinf(f.condition));
    CHECK(std::isfinite(f.r));
  }
  const Mesh wide = generate_band_mesh(d, 8, 8);
  const SurfaceGeometry w = lift_graph(wide, sample(wide, F("x1^2")), d);
  for (const QuadricFit& f : w.fits) {
    CHECK(f.samples >= 5);
    if (f.ring == 2) CHECK(f.r == doctest::Approx(2.0));
  }
}

TEST_CASE("degenerate lifted element is rejected") {
  const DomainSpec d = centred_square();
  Mesh mesh = generate_band_mesh(d, 2, 2);
  mesh.nodes[4] = mesh.nodes[0];
  CHECK_THROWS_AS(lift_graph(mesh, std::vector<double>(mesh.size(), 0.0), d), MeshError);
}

TEST_CASE("contact residual examples") {
  const DomainSpec d = centred_square();
  const Mesh mesh = generate_band_mesh(d, 8, 8);
  const SurfaceGeometry flat = lift_graph(mesh, std::vector<double>(mesh.size(), 3.0), d);
  CHECK(max_abs(contact_residual(flat, F("0"))) == 0.0);
  for (double r : contact_residual(flat, F("0.5"))) CHECK(r == 0.5);

  std::vector<double> errs;
  for (int n : {16, 32, 64}) {
    const DomainSpec c = cap();
    const Mesh m = generate_band_mesh(c, n, n / 2);
    const SurfaceGeometry s = lift_graph(m, sample(m, F(kCapExact)), c);
    errs.push_back(max_abs(contact_residual(s, F("0.1"))));
  }
  CHECK(errs[0] / errs[1] >= 1.5);
  CHECK(errs[1] / errs[2] >= 1.5);
}

TEST_CASE("normal equation residual") {
  const DomainSpec d = centred_square();
  const Mesh mesh = generate_band_mesh(d, 8, 8);
  const SurfaceGeometry flat = lift_graph(mesh, std::vector<double>(mesh.size(), 0.0), d);
  CHECK(max_abs(normal_equation_residual(flat, F("0"))) < 1e-14);
  CHECK(max_abs(normal_equation_residual(flat, F("0.3 * x1"))) > 0.1);

  // Spherical cap over a uniform grid, where the cotangent Laplacian is
  // pointwise consistent.
  std::vector<double> res;
  for (int n : {64, 128}) {
    const Mesh m = generate_band_mesh(d, n, n, DiagonalRule::Uniform);
    const SurfaceGeometry s = lift_graph(m, sample(m, F(kCapExact)), d);
    res.push_back(max_abs(normal_equation_residual(s, F("0.2"))));
  }
  CHECK(res[0] <= 0.1 * 0.04);
  CHECK(res[1] < res[0]);
}

TEST_CASE("free-trace identity residual") {
  const DomainSpec d = centred_square();
  const Mesh mesh = generate_band_mesh(d, 8, 8);
  const SurfaceGeometry flat = lift_graph(mesh, std::vector<double>(mesh.size(), 0.0), d);
  CHECK(n3_boundary_residual(flat, QField::zero(), d).max_abs == 0.0);

  const DomainSpec curved = make_domain(F("0.5 * x1^2"), F("0.6"), F("0"), -0.5, 0.5, 2.0);
  const Mesh cm = generate_band_mesh(curved, 8, 8);
  const SurfaceGeometry cs = lift_graph(cm, std::vector<double>(cm.size(), 0.0), curved);
  for (const TraceFrame& f : cs.frames) CHECK(f.wall.kappa != 0.0);
  CHECK(n3_boundary_residual(cs, QField::zero(), curved).max_abs < 1e-14);

  const DomainSpec c = cap();
  const QField Q = build_q_field(F("0.2"), F("0.1"), c.support.g());
  std::vector<double> res;
  for (int n : {16, 32, 64}) {
    const Mesh m = generate_band_mesh(c, n, n / 2);
    const SurfaceGeometry s = lift_graph(m, sample(m, F(kCapExact)), c);
    const BoundaryResidual r = n3_boundary_residual(s, Q, c);
    MESSAGE("n=" << n << " max=" << r.max_abs << " alt=" << r.max_abs_alternate
                 << " reversed=" << r.reversed);
    res.push_back(r.max_abs);
  }
  CHECK(res[0] / res[1] > 1.5);
  CHECK(res[1] / res[2] > 1.5);
}

TEST_CASE("surface invariants on a solved cap") {
  const DomainSpec c = cap();
  const Mesh m = generate_band_mesh(c, 24, 12);
  const Discretization disc(m);
  const ProblemData data = make_problem(F("0.2"), F("0.1"), F(kCapExact));
  const Solution sol = newton_solve(disc, data);
  REQUIRE(sol.converged);
  const SurfaceGeometry s = lift_graph(m, sol.zeta, c);
  double gmax = 0.0;
  for (const Vec2& g : s.gradient) gmax = std::max(gmax, g.norm());
  const QField Q = build_q_field(F("0.2"), F("0.1"), c.support.g());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Vec3& N = s.normal[i];
    CHECK(N.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(N.z() > 0.0);
    CHECK(N.z() >= 1.0 / std::sqrt(1.0 + gmax * gmax) - 1e-12);
    if (s.fits[i].condition < 1e6) CHECK(4 * s.H_disc[i] * s.H_disc[i] - 2 * s.K_disc[i] >= -1e-12);
  }
  double qsup = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) qsup = std::max(qsup, Q.value(s.position[i]).norm());
  for (const TraceFrame& f : s.frames) {
    const Vec3& N = s.normal[static_cast<std::size_t>(f.node)];
    CHECK(f.tau.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.eta.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(f.tau.dot(f.eta)) < 1e-8);
    CHECK(std::abs(f.tau.dot(N)) < 1e-8);
    CHECK(std::abs(f.eta.dot(N)) < 1e-8);
    CHECK(f.eta.y() > 0.0);
    CHECK(std::abs(N.dot(f.wall.n)) <= qsup);
  }
}

TEST_CASE("cotangent weights on a flat right triangle pair") {
  const DomainSpec d = centred_square();
  const Mesh mesh = generate_band_mesh(d, 1, 1, DiagonalRule::Uniform);
  const SurfaceGeometry s = lift_graph(mesh, std::vector<double>(mesh.size(), 0.0), d);
  const CotangentLaplacian L = cotangent_laplacian(s);
  for (const auto& row : L.rows) {
    double sum = 0.0;
    for (const auto& e : row) {
      sum += e.second;
      CHECK(e.second >= -1e-15);
    }
    CHECK(sum == doctest::Approx(1.0));
  }
}
