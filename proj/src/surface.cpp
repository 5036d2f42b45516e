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

#include "hsurf/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hsurf/error.hpp"
#include "hsurf/parallel.hpp"

namespace hsurf {
namespace {

std::vector<int> ring_of(const SurfaceGeometry& s, int node, int depth) {
  std::vector<int> seen{node};
  std::vector<int> frontier{node};
  for (int d = 0; d < depth; ++d) {
    std::vector<int> next;
    for (int v : frontier) {
      for (int w : s.neighbors[static_cast<std::size_t>(v)]) {
        if (std::find(seen.begin(), seen.end(), w) == seen.end()) {
          seen.push_back(w);
          next.push_back(w);
        }
      }
    }
    frontier.swap(next);
  }
  return seen;
}

// With force set, a rank-deficient system gets the minimum-norm solution and
// an infinite condition number.
bool fit_quadric(const SurfaceGeometry& s, int node, int depth, QuadricFit& out, bool force) {
  const std::vector<int> ring = ring_of(s, node, depth);
  const Vec3& c = s.position[static_cast<std::size_t>(node)];
  const int m = static_cast<int>(ring.size()) - 1;
  if (m < 5 && !force) return false;
  double scale = 0.0;
  for (int v : ring) {
    scale = std::max(scale, (s.position[static_cast<std::size_t>(v)].head<2>() - c.head<2>()).norm());
  }
  Eigen::MatrixXd A(m, 5);
  Eigen::VectorXd b(m);
  int row = 0;
  for (int v : ring) {
    if (v == node) continue;
    const Vec3& p = s.position[static_cast<std::size_t>(v)];
    const double dx = (p.x() - c.x()) / scale;
    const double dy = (p.y() - c.y()) / scale;
    A.row(row) << dx, dy, 0.5 * dx * dx, dx * dy, 0.5 * dy * dy;
    b(row) = (p.z() - c.z()) / scale;
    ++row;
  }
  Eigen::VectorXd x;
  double condition = std::numeric_limits<double>::infinity();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  qr.setThreshold(1e-10);
  if (m >= 5 && qr.rank() == 5) {
    x = qr.solve(b);
    const auto R = qr.matrixR().topLeftCorner(5, 5).diagonal().cwiseAbs();
    condition = R.maxCoeff() / R.minCoeff();
  } else if (force) {
    x = A.completeOrthogonalDecomposition().solve(b);
  } else {
    return false;
  }
  out.p = x(0);
  out.q = x(1);
  out.r = x(2) / scale;
  out.s = x(3) / scale;
  out.t = x(4) / scale;
  out.ring = depth;
  out.samples = m;
  out.condition = condition;
  return true;
}

Vec3 unit_or_throw(const Vec3& v, const char* what) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw MeshError(std::string("degenerate ") + what);
  return v / n;
}

}  // namespace

Vec3 SurfaceGeometry::normal_derivative(int i, const Vec2& d) const {
  const QuadricFit& f = fits[static_cast<std::size_t>(i)];
  const Vec2 z(f.p, f.q);
  const Vec2 dz(f.r * d.x() + f.s * d.y(), f.s * d.x() + f.t * d.y());
  const double w2 = 1.0 + z.squaredNorm();
  const double w = std::sqrt(w2);
  const Vec3 N(-z.x() / w, -z.y() / w, 1.0 / w);
  return Vec3(-dz.x(), -dz.y(), 0.0) / w - N * (z.dot(dz) / w2);
}

SurfaceGeometry lift_graph(const Mesh& mesh, std::span<const double> zeta,
                           const DomainSpec& domain) {
  if (zeta.size() != mesh.size()) throw MeshError("height field size mismatch");
  SurfaceGeometry s;
  s.mesh = &mesh;
  const std::size_t N = mesh.size();
  s.position.resize(N);
  for (std::size_t i = 0; i < N; ++i) s.position[i] = Vec3(mesh.nodes[i].x(), mesh.nodes[i].y(), zeta[i]);
  s.neighbors = node_neighbors(mesh);

  std::vector<double> weight(N, 0.0);
  s.gradient.assign(N, Vec2::Zero());
  s.node_area.assign(N, 0.0);
  s.element_w.resize(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    const Vec3& a = s.position[static_cast<std::size_t>(tri[0])];
    const Vec3& b = s.position[static_cast<std::size_t>(tri[1])];
    const Vec3& c = s.position[static_cast<std::size_t>(tri[2])];
    const Vec3 cr = (b - a).cross(c - a);
    if (!(cr.z() > 0.0)) throw MeshError("degenerate element " + std::to_string(t));
    // Graph gradient from the lifted normal: cr is parallel to (-zx, -zy, 1).
    const Vec2 g(-cr.x() / cr.z(), -cr.y() / cr.z());
    const double planar = 0.5 * cr.z();
    s.element_w[t] = std::sqrt(1.0 + g.squaredNorm());
    const double lifted = 0.5 * cr.norm();
    for (int v : tri) {
      s.gradient[static_cast<std::size_t>(v)] += planar * g;
      weight[static_cast<std::size_t>(v)] += planar;
      s.node_area[static_cast<std::size_t>(v)] += lifted / 3.0;
    }
  }
  s.normal.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    s.gradient[i] /= weight[i];
    s.normal[i] = Vec3(-s.gradient[i].x(), -s.gradient[i].y(), 1.0).normalized();
  }

  s.frame_of.assign(N, -1);
  const auto& chain = mesh.free_chain;
  for (std::size_t k = 1; k + 1 < chain.size(); ++k) {
    const int v = chain[k];
    if (!mesh.free_node(v)) continue;
    const Vec3& prev = s.position[static_cast<std::size_t>(chain[k - 1])];
    const Vec3& here = s.position[static_cast<std::size_t>(v)];
    const Vec3& next = s.position[static_cast<std::size_t>(chain[k + 1])];
    TraceFrame f;
    f.node = v;
    const Vec3& Nv = s.normal[static_cast<std::size_t>(v)];
    const Vec3 d = next - prev;
    f.tau = unit_or_throw(d - Nv * Nv.dot(d), "free-trace tangent");
    f.eta = Nv.cross(f.tau);
    f.wall = domain.support.frame(here.x());
    f.ds = 0.5 * ((next - here).norm() + (here - prev).norm());
    s.frame_of[static_cast<std::size_t>(v)] = static_cast<int>(s.frames.size());
    s.frames.push_back(f);
  }
  curvatures(s);
  return s;
}

void curvatures(SurfaceGeometry& s) {
  const std::size_t N = s.size();
  s.fits.assign(N, QuadricFit{});
  s.H_disc.assign(N, 0.0);
  s.K_disc.assign(N, 0.0);
  parallel_for(N, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      QuadricFit f;
      const int node = static_cast<int>(i);
      if (!fit_quadric(s, node, 2, f, false)) fit_quadric(s, node, 3, f, true);
      s.fits[i] = f;
      const double w2 = 1.0 + f.p * f.p + f.q * f.q;
      s.H_disc[i] = 0.5 * ((1.0 + f.q * f.q) * f.r - 2.0 * f.p * f.q * f.s + (1.0 + f.p * f.p) * f.t) /
                    (w2 * std::sqrt(w2));
      s.K_disc[i] = (f.r * f.t - f.s * f.s) / (w2 * w2);
    }
  });
}

std::vector<double> contact_residual(const SurfaceGeometry& s, const FieldExpr& psi) {
  std::vector<double> out;
  out.reserve(s.frames.size());
  for (const TraceFrame& f : s.frames) {
    const Vec3& p = s.position[static_cast<std::size_t>(f.node)];
    const Vec3& N = s.normal[static_cast<std::size_t>(f.node)];
    out.push_back(psi(p.x(), p.y()) + N.head<2>().dot(f.wall.nu));
  }
  return out;
}

CotangentLaplacian cotangent_laplacian(const SurfaceGeometry& s) {
  const Mesh& mesh = *s.mesh;
  CotangentLaplacian L;
  L.rows.assign(s.size(), {});
  auto add = [&](int i, int j, double w) {
    auto& row = L.rows[static_cast<std::size_t>(i)];
    for (auto& e : row) {
      if (e.first == j) {
        e.second += w;
        return;
      }
    }
    row.emplace_back(j, w);
  };
  for (const Triangle& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const int o = tri[static_cast<std::size_t>(k)];
      const int i = tri[static_cast<std::size_t>((k + 1) % 3)];
      const int j = tri[static_cast<std::size_t>((k + 2) % 3)];
      const Vec3 e1 = s.position[static_cast<std::size_t>(i)] - s.position[static_cast<std::size_t>(o)];
      const Vec3 e2 = s.position[static_cast<std::size_t>(j)] - s.position[static_cast<std::size_t>(o)];
      const double cot = e1.dot(e2) / e1.cross(e2).norm();
      add(i, j, 0.5 * cot);
      add(j, i, 0.5 * cot);
    }
  }
  for (auto& row : L.rows) std::sort(row.begin(), row.end());
  return L;
}

std::vector<double> normal_equation_residual(const SurfaceGeometry& s, const FieldExpr& H) {
  const Mesh& mesh = *s.mesh;
  const CotangentLaplacian L = cotangent_laplacian(s);
  std::vector<double> out(s.size(), 0.0);
  const FieldExpr H1 = differentiate(H, Var::X1);
  const FieldExpr H2 = differentiate(H, Var::X2);
  const FieldExpr H3 = differentiate(H, Var::X3);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (mesh.node_tags[i] != NodeTag::Interior) continue;
    const auto& nb = s.neighbors[i];
    if (std::any_of(nb.begin(), nb.end(), [&](int j) {
          return mesh.node_tags[static_cast<std::size_t>(j)] != NodeTag::Interior;
        })) {
      continue;
    }
    Vec3 lap = Vec3::Zero();
    for (const auto& [j, w] : L.rows[i]) lap += w * (s.normal[static_cast<std::size_t>(j)] - s.normal[i]);
    lap /= s.node_area[i];
    const Vec3& x = s.position[i];
    const Vec3 gH(H1(x.x(), x.y(), x.z()), H2(x.x(), x.y(), x.z()), H3(x.x(), x.y(), x.z()));
    const double h = H(x.x(), x.y(), x.z());
    const Vec3& N = s.normal[i];
    const Vec3 r = lap + 2.0 * (2.0 * h * h - s.K_disc[i] - gH.dot(N)) * N + 2.0 * gH;
    out[i] = r.norm();
  }
  return out;
}

double boundary_density(const SurfaceGeometry& s, const QField& Q, const TraceFrame& f,
                        bool reverse_tau) {
  const Vec3& x = s.position[static_cast<std::size_t>(f.node)];
  const Vec3& N = s.normal[static_cast<std::size_t>(f.node)];
  const Vec3 q = Q.value(x);
  const Eigen::Matrix3d DQ = Q.jacobian(x);
  const Vec3 tau = reverse_tau ? Vec3(-f.tau) : f.tau;
  const Vec3 dN = s.normal_derivative(f.node, f.eta.head<2>());
  const double denom = 1.0 + q.dot(N);
  const Vec3 v = f.eta + q.cross(tau);
  const double qt = (q + N).dot(f.wall.t);
  return dN.dot(q) / denom + (DQ * (q + N)).dot(v) / (denom * denom) +
         f.wall.kappa * v.dot(f.wall.n) * qt * qt / (denom * denom);
}

BoundaryResidual n3_boundary_residual(const SurfaceGeometry& s, const QField& Q,
                                      const DomainSpec& domain) {
  (void)domain;
  BoundaryResidual out;
  for (const TraceFrame& f : s.frames) {
    const double N3 = s.normal[static_cast<std::size_t>(f.node)].z();
    const double dN3 = s.normal_derivative(f.node, f.eta.head<2>()).z();
    out.residual.push_back(dN3 - boundary_density(s, Q, f, false) * N3);
    out.alternate.push_back(dN3 - boundary_density(s, Q, f, true) * N3);
  }
  for (double r : out.residual) out.max_abs = std::max(out.max_abs, std::abs(r));
  for (double r : out.alternate) out.max_abs_alternate = std::max(out.max_abs_alternate, std::abs(r));
  if (out.max_abs_alternate < out.max_abs) {
    out.reversed = true;
    std::swap(out.residual, out.alternate);
    std::swap(out.max_abs, out.max_abs_alternate);
  }
  return out;
}

}  // namespace hsurf
