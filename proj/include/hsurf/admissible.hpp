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

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "hsurf/fieldspec.hpp"
#include "hsurf/geometry.hpp"

namespace hsurf {

// Q = (0, q2, 0) with q2(p1, p2) = 2 * int_{g(p1)}^{p2} H(p1, t) dt
//                                 - psi(p1, g(p1)) * sqrt(1 + g'(p1)^2),
// so that div Q = 2H and Q . n = psi along the support graph.
class QField {
 public:
  // Throws DomainError if H depends on x3.
  QField(FieldExpr H, FieldExpr psi, FieldExpr g);
  static QField zero();

  double q2(double x1, double x2) const;
  Vec3 value(const Vec3& p) const { return {0.0, q2(p.x(), p.y()), 0.0}; }
  // J(i, j) = dQ_i / dx_j.
  Eigen::Matrix3d jacobian(const Vec3& p) const;
  double divergence(double x1, double x2) const;
  // Q . n at the support point above x1.
  double normal_trace(const SupportArc& arc, double x1) const;

  bool closed_form() const { return q2_expr_.has_value(); }
  const std::optional<FieldExpr>& q2_expr() const { return q2_expr_; }
  const FieldExpr& H() const { return H_; }
  const FieldExpr& psi() const { return psi_; }
  const FieldExpr& g() const { return g_; }
  bool is_zero() const;

 private:
  FieldExpr H_, psi_, g_, dg_;
  FieldExpr dH1_;
  FieldExpr trace_term_, dtrace_term_;  // psi(x1, g) sqrt(1+g'^2) and its x1-derivative
  std::optional<FieldExpr> q2_expr_, dq2_dx1_;
};

QField build_q_field(const FieldExpr& H, const FieldExpr& psi, const FieldExpr& g);

// 16-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes, weights;
};
const GaussRule& gauss_legendre_16();

struct GateEntry {
  std::string key;       // machine key, e.g. "4_8"
  std::string label;     // human label, e.g. "(4.8)"
  std::string relation;  // "<", "<=", ">=", "in"
  double bound = 0.0;
  double value = 0.0;     // sampled value
  double inflated = 0.0;  // value used for the verdict
  double margin = 0.0;    // signed, positive when satisfied
  bool pass = false;
  std::string detail;
};

struct GateReport {
  std::vector<GateEntry> entries;
  std::vector<std::string> notes;
  bool pass() const;
  const GateEntry* find(const std::string& key) const;
  std::vector<std::string> failures() const;
};

struct Suprema {
  double h0 = 0.0;    // sup over B_R of |H|
  double psi0 = 0.0;  // sup over the support arc of |psi|
  double g0 = 0.0;    // sup over [-R, R] of |g'|
  double q_sup = 0.0; // sup over B_R of |Q|
  bool h0_exact = false, psi0_exact = false, g0_exact = false;
};

inline constexpr double kSupInflation = 1.05;

// 4 R h0 + psi0 sqrt(1 + g0^2).
double smallness_value(double R, double h0, double psi0, double g0);

// Points of the open disc of radius R: a Cartesian grid of at least
// min_points interior samples plus a ring just inside the circle.
std::vector<Vec2> disc_samples(double R, int min_points = 4096);

Suprema sample_suprema(const QField& Q, const FieldExpr& H, const DomainSpec& domain,
                       int min_points = 4096);

GateReport check_field_conditions(const QField& Q, const FieldExpr& H,
                                  const DomainSpec& domain, int min_points = 4096);

// (i)/(ii) admissibility of the domain plus the corner-angle range.
GateReport check_geometry_conditions(const DomainSpec& domain, int samples = 2048);

GateReport merge(GateReport a, const GateReport& b);

}  // namespace hsurf
