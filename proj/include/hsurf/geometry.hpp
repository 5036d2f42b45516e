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
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "hsurf/fieldspec.hpp"

namespace hsurf {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

// Wall frame at a point of the support curve x2 = g(x1).
struct ArcFrame {
  double x1 = 0.0;
  Vec2 point = Vec2::Zero();
  Vec3 t = Vec3::Zero();   // unit tangent (sigma', 0), oriented with increasing x1
  Vec3 n = Vec3::Zero();   // t ^ e3, horizontal, exterior to G
  Vec2 nu = Vec2::Zero();  // planar part of n
  double kappa = 0.0;      // -(sigma'', 0) . n
};

// Support arc Sigma = graph of g over [a, b], with an arclength table.
class SupportArc {
 public:
  SupportArc(FieldExpr g, double a, double b, std::vector<double> x_table,
             std::vector<double> s_table);

  const FieldExpr& g() const { return g_; }
  const FieldExpr& dg() const { return dg_; }
  const FieldExpr& ddg() const { return ddg_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double length() const { return s_.back(); }
  std::span<const double> x_table() const { return x_; }
  std::span<const double> s_table() const { return s_; }

  double s_at(double x1) const;
  double x_at(double s) const;
  Vec2 point(double x1) const;
  ArcFrame frame(double x1) const;
  // d sigma / ds at arclength s.
  Vec2 sigma_prime(double s) const;

 private:
  FieldExpr g_, dg_, ddg_;
  double a_, b_;
  std::vector<double> x_, s_;
};

// Throws GeometryError when the adaptive Simpson quadrature of sqrt(1+g'^2)
// fails to converge.
SupportArc build_support_arc(const FieldExpr& g, double a, double b, int n_samples);

// Upper boundary x2 = u(x1) of the band and the Dirichlet height gamma.
// When u(a) > g(a) (resp. u(b) > g(b)) the fixed arc also contains the
// vertical segment joining the two graphs at x1 = a (resp. b).
struct FixedArc {
  FieldExpr u;
  FieldExpr gamma;
};

struct DomainSpec {
  SupportArc support;
  FixedArc fixed;
  Vec2 corner1 = Vec2::Zero();
  Vec2 corner2 = Vec2::Zero();
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double R = 0.0;

  bool has_left_side() const;
  bool has_right_side() const;
};

// Validates the band (u >= g at the ends, u > g inside) and computes corners
// and interior angles. Throws GeometryError on a degenerate band.
DomainSpec make_domain(const FieldExpr& g, const FieldExpr& u, const FieldExpr& gamma,
                       double a, double b, double R, int arc_samples = 1025);

// Interior angles at pi_1 = (a, g(a)) and pi_2 = (b, g(b)) measured inside G.
std::pair<double, double> corner_angles(const DomainSpec& domain);

enum class BoundaryPart { Support, Fixed, LeftSide, RightSide };

struct BoundarySample {
  Vec2 p = Vec2::Zero();
  Vec2 nu = Vec2::Zero();  // exterior unit normal
  double kappa = 0.0;      // curvature, positive where G is locally convex
  BoundaryPart part = BoundaryPart::Support;
};

// Samples the closed boundary counter-clockwise starting at pi_1, spacing
// proportional to length. Corners appear once per adjacent part.
std::vector<BoundarySample> sample_boundary(const DomainSpec& domain, int count);

struct AdmissibilityReport {
  int samples = 0;
  // (i) boundary inside the open disc B_R
  double max_norm = 0.0;
  double disc_margin = 0.0;  // R - max_norm
  bool disc_pass = false;
  // (ii) 1/R-convexity; required_R is the smallest radius for which every
  // sample lies in the disc of that radius tangent at each sample point.
  double required_R = 0.0;
  double convexity_margin = 0.0;  // R - required_R
  Vec2 worst_point = Vec2::Zero();
  bool convexity_pass = false;
  // Feasible radius window (lower bound; the window is unbounded above).
  double feasible_R_min = 0.0;

  bool pass() const { return disc_pass && convexity_pass; }
};

AdmissibilityReport check_r_admissible(const DomainSpec& domain, int samples = 2048);

// CSV with header s,x1,x2,kappa,nu1,nu2 over the sampled closed boundary.
void write_boundary_csv(std::ostream& os, const DomainSpec& domain, int samples = 2048);

}  // namespace hsurf
