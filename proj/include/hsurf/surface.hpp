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
#include <span>
#include <vector>

#include "hsurf/admissible.hpp"
#include "hsurf/geometry.hpp"
#include "hsurf/mesh.hpp"

namespace hsurf {

// Local quadric zeta(x) - zeta_i = p dx + q dy + (r dx^2 + 2 s dx dy + t dy^2) / 2
// fitted over the 2-ring (3-ring when rank deficient).
struct QuadricFit {
  double p = 0.0, q = 0.0, r = 0.0, s = 0.0, t = 0.0;
  int ring = 2;
  int samples = 0;
  double condition = 1.0;  // ratio of extreme diagonal entries of R in the QR
};

// Free-trace frame at a FREE node. tau follows the support arc in the
// direction of increasing x1, eta = N ^ tau is the inward conormal and
// N = tau ^ eta.
struct TraceFrame {
  int node = -1;
  Vec3 tau = Vec3::Zero();
  Vec3 eta = Vec3::Zero();
  ArcFrame wall;
  double ds = 0.0;  // trapezoid weight of the free trace (3D length)
};

struct SurfaceGeometry {
  const Mesh* mesh = nullptr;
  std::vector<Vec3> position;
  std::vector<Vec2> gradient;     // area-weighted average of element gradients
  std::vector<Vec3> normal;       // (-grad zeta, 1) / W at nodes
  std::vector<double> element_w;  // sqrt(1 + |grad zeta|^2) per element
  std::vector<double> node_area;  // one third of the adjacent lifted areas
  std::vector<QuadricFit> fits;
  std::vector<double> H_disc, K_disc;
  std::vector<TraceFrame> frames;  // free nodes in chain order
  std::vector<int> frame_of;       // node -> index into frames or -1
  std::vector<std::vector<int>> neighbors;

  std::size_t size() const { return position.size(); }
  // Derivative of the unit normal along the surface direction with planar
  // part d, from the quadric fit at node i.
  Vec3 normal_derivative(int i, const Vec2& d) const;
};

// Throws MeshError on a zero-area lifted element.
SurfaceGeometry lift_graph(const Mesh& mesh, std::span<const double> zeta,
                           const DomainSpec& domain);

// Fills fits, H_disc and K_disc.
void curvatures(SurfaceGeometry& surface);

// psi + N . (nu, 0) at each free node, in chain order.
std::vector<double> contact_residual(const SurfaceGeometry& surface, const FieldExpr& psi);

// |Delta_M N + 2 (2H^2 - K - grad H . N) N + 2 grad H| at interior nodes whose
// neighbours are all interior; zero elsewhere.
std::vector<double> normal_equation_residual(const SurfaceGeometry& surface, const FieldExpr& H);

struct BoundaryResidual {
  std::vector<double> residual;  // chosen orientation, chain order
  std::vector<double> alternate; // tau reversed in Q ^ tau
  bool reversed = false;         // true when the alternate is smaller
  double max_abs = 0.0;
  double max_abs_alternate = 0.0;
};

// Free-trace density
//   rho = (d_eta N).Q / (1 + Q.N) + [DQ (Q + N)].[eta + Q ^ tau] / (1 + Q.N)^2
//       + kappa [(eta + Q ^ tau).n] [(Q + N).t]^2 / (1 + Q.N)^2
// with Q, DQ evaluated at the lifted point. reverse_tau flips tau in Q ^ tau.
double boundary_density(const SurfaceGeometry& surface, const QField& Q, const TraceFrame& f,
                        bool reverse_tau = false);

// d_eta N3 - rho N3 at the free nodes.
BoundaryResidual n3_boundary_residual(const SurfaceGeometry& surface, const QField& Q,
                                      const DomainSpec& domain);

// Cotangent weights w_ij = (cot a + cot b) / 2 on the lifted mesh, as a
// symmetric stiffness matrix with rows summing to zero.
struct CotangentLaplacian {
  std::vector<std::vector<std::pair<int, double>>> rows;
};
CotangentLaplacian cotangent_laplacian(const SurfaceGeometry& surface);

}  // namespace hsurf
