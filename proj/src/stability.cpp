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

#include "hsurf/stability.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "hsurf/error.hpp"
#include "hsurf/kernels.hpp"

namespace hsurf {
namespace {

CsrMatrix diagonal_matrix(std::span<const double> d) {
  std::vector<std::pair<std::int32_t, std::int32_t>> e;
  e.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) e.emplace_back(static_cast<int>(i), static_cast<int>(i));
  CsrMatrix m = CsrMatrix::from_pattern(d.size(), std::move(e));
  for (std::size_t i = 0; i < d.size(); ++i) m.add(static_cast<int>(i), static_cast<int>(i), d[i]);
  return m;
}

double rayleigh_scale(const StabilityForm& f) {
  const std::vector<double> a = f.a.diagonal();
  const std::vector<double> m = f.m.diagonal();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i]) / m[i]);
  return s;
}

}  // namespace

std::vector<double> stability_coefficient(const SurfaceGeometry& s, const FieldExpr& H) {
  const FieldExpr H1 = differentiate(H, Var::X1);
  const FieldExpr H2 = differentiate(H, Var::X2);
  const FieldExpr H3 = differentiate(H, Var::X3);
  std::vector<double> q(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Vec3& x = s.position[i];
    const Vec3 gH(H1(x.x(), x.y(), x.z()), H2(x.x(), x.y(), x.z()), H3(x.x(), x.y(), x.z()));
    const double h = H(x.x(), x.y(), x.z());
    q[i] = 2.0 * h * h - s.K_disc[i] - gH.dot(s.normal[i]);
  }
  return q;
}

std::vector<double> free_boundary_coefficient(const SurfaceGeometry& s, const QField& Q,
                                              const DomainSpec& domain, bool reverse_tau) {
  (void)domain;
  std::vector<double> rho;
  rho.reserve(s.frames.size());
  for (const TraceFrame& f : s.frames) rho.push_back(boundary_density(s, Q, f, reverse_tau));
  return rho;
}

StabilityForm assemble_stability_forms(const SurfaceGeometry& s, std::span<const double> q_tilde,
                                       std::span<const double> rho) {
  const Mesh& mesh = *s.mesh;
  const std::size_t N = s.size();
  if (q_tilde.size() != N || rho.size() != s.frames.size()) {
    throw SolverError(SolverError::Kind::Mismatch, "stability coefficient size mismatch");
  }
  std::vector<std::pair<std::int32_t, std::int32_t>> entries;
  entries.reserve(mesh.triangles.size() * 9);
  for (const Triangle& t : mesh.triangles) {
    for (int i : t) {
      for (int j : t) entries.emplace_back(i, j);
    }
  }
  StabilityForm form;
  form.a_full = CsrMatrix::from_pattern(N, std::move(entries));
  const CotangentLaplacian L = cotangent_laplacian(s);
  for (std::size_t i = 0; i < N; ++i) {
    const int r = static_cast<int>(i);
    for (const auto& [j, w] : L.rows[i]) {
      form.a_full.add(r, j, -w);
      form.a_full.add(r, r, w);
    }
    form.a_full.add(r, r, -2.0 * q_tilde[i] * s.node_area[i]);
  }
  std::vector<double> boundary(N, 0.0);
  for (std::size_t k = 0; k < s.frames.size(); ++k) {
    const TraceFrame& f = s.frames[k];
    boundary[static_cast<std::size_t>(f.node)] = rho[k] * f.ds;
    form.a_full.add(f.node, f.node, rho[k] * f.ds);
  }
  form.m_full = diagonal_matrix(s.node_area);

  std::vector<bool> kept(N, false);
  form.dof_of.assign(N, -1);
  double qmax = 0.0, bmax = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    if (mesh.fixed(static_cast<int>(i))) continue;
    kept[i] = true;
    form.dof_of[i] = static_cast<int>(form.dofs.size());
    form.dofs.push_back(static_cast<int>(i));
    qmax = std::max(qmax, std::abs(q_tilde[i]));
    bmax = std::max(bmax, std::abs(boundary[i]) / s.node_area[i]);
  }
  form.a = form.a_full.submatrix(kept);
  form.m = form.m_full.submatrix(kept);
  // The cotangent stiffness is positive semidefinite and the mass is lumped,
  // so the zero-order terms bound the spectrum from below.
  form.shift_bound = -2.0 * qmax - bmax;
  return form;
}

StabilityForm make_form(CsrMatrix a, CsrMatrix m, double shift_bound) {
  StabilityForm f;
  f.a = std::move(a);
  f.m = std::move(m);
  f.shift_bound = shift_bound;
  return f;
}

StabilityReport min_eigenvalue(const StabilityForm& form, const EigenOptions& opts) {
  StabilityReport rep;
  const std::size_t n = form.a.rows();
  if (n == 0) {
    rep.lambda_min = std::numeric_limits<double>::infinity();
    rep.stable = true;
    return rep;
  }
  rep.rayleigh_scale = rayleigh_scale(form);
  rep.tolerance = opts.tol_stab * rep.rayleigh_scale;
  rep.shift = form.shift_bound -
              std::max(1e-2 * std::abs(form.shift_bound), 1e-6 * std::max(rep.rayleigh_scale, 1e-300));

  // S = a - shift * m shares the pattern of a (m is diagonal).
  CsrMatrix S = form.a;
  const std::vector<double> mdiag = form.m.diagonal();
  for (std::size_t i = 0; i < n; ++i) S.add(static_cast<int>(i), static_cast<int>(i), -rep.shift * mdiag[i]);

  const Eigen::Index k = std::min<Eigen::Index>(opts.block, static_cast<Eigen::Index>(n));
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd X(N, k), Y = Eigen::MatrixXd::Zero(N, k), AY(N, k), MY(N, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index i = 0; i < N; ++i) {
      X(i, c) = c == 0 ? 1.0 : std::cos(static_cast<double>(c) * M_PI * (static_cast<double>(i) + 0.5) / static_cast<double>(N));
    }
  }
  const Eigen::Map<const Eigen::VectorXd> md(mdiag.data(), N);
  CgOptions cg;
  cg.rel_tol = 1e-13;
  std::vector<double> rhs(n);
  for (int it = 1; it <= opts.max_iter; ++it) {
    for (Eigen::Index c = 0; c < k; ++c) {
      for (Eigen::Index i = 0; i < N; ++i) rhs[static_cast<std::size_t>(i)] = md(i) * X(i, c);
      conjugate_gradient(S, rhs, std::span<double>(Y.col(c).data(), n), cg);
      form.a.multiply(std::span<const double>(Y.col(c).data(), n), std::span<double>(AY.col(c).data(), n));
    }
    MY = md.asDiagonal() * Y;
    const Eigen::MatrixXd Ka = Y.transpose() * AY;
    const Eigen::MatrixXd Mb = Y.transpose() * MY;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(0.5 * (Ka + Ka.transpose()),
                                                                   0.5 * (Mb + Mb.transpose()));
    if (ritz.info() != Eigen::Success) {
      throw SolverError(SolverError::Kind::Stagnation, "Rayleigh-Ritz step failed");
    }
    X = Y * ritz.eigenvectors();
    // Warm start the next solves from the current Ritz vectors.
    Y = X;
    const double theta = ritz.eigenvalues()(0);
    rep.iterations = it;
    // Ritz residual in the m^{-1} norm; the eigenvalue error is of order
    // its square over the spectral gap.
    const Eigen::VectorXd x0 = X.col(0);
    Eigen::VectorXd ax(N);
    form.a.multiply(std::span<const double>(x0.data(), n), std::span<double>(ax.data(), n));
    const Eigen::VectorXd res = ax - theta * md.asDiagonal() * x0;
    const double rnorm = std::sqrt(res.dot(md.cwiseInverse().asDiagonal() * res) /
                                   x0.dot(md.asDiagonal() * x0));
    if (rnorm <= std::sqrt(opts.tol) * 1e-2 * std::max(std::abs(theta), theta - rep.shift)) {
      rep.lambda_min = theta;
      Eigen::VectorXd v = X.col(0);
      v /= std::sqrt(v.dot(md.asDiagonal() * v));
      if (v.sum() < 0.0) v = -v;
      if (form.dofs.empty()) {
        rep.eigenfunction.assign(v.data(), v.data() + N);
      } else {
        rep.eigenfunction.assign(form.dof_of.size(), 0.0);
        for (std::size_t d = 0; d < n; ++d) {
          rep.eigenfunction[static_cast<std::size_t>(form.dofs[d])] = v(static_cast<Eigen::Index>(d));
        }
      }
      rep.stable = rep.lambda_min >= -rep.tolerance;
      return rep;
    }
  }
  throw SolverError(SolverError::Kind::Stagnation,
                    "eigenvalue iteration stagnated after " + std::to_string(opts.max_iter) + " steps");
}

FdHessianCheck fd_hessian_check(const Discretization& disc, const ProblemData& data,
                                std::span<const double> zeta, const SurfaceGeometry& surface,
                                const StabilityForm& form,
                                const std::vector<std::vector<double>>& directions) {
  const Mesh& mesh = disc.mesh();
  const std::size_t N = mesh.size();
  const std::vector<double> mass = form.m_full.diagonal();
  const double J0 = discrete_energy(disc, data, zeta);
  FdHessianCheck out;
  std::vector<double> plus(N), minus(N), phi(N);
  for (const auto& dir : directions) {
    if (dir.size() != N) throw SolverError(SolverError::Kind::Mismatch, "direction size mismatch");
    double m2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      if (mesh.fixed(static_cast<int>(i)) && dir[i] != 0.0) {
        throw SolverError(SolverError::Kind::Mismatch, "direction does not vanish on fixed nodes");
      }
      m2 += mass[i] * dir[i] * dir[i];
    }
    if (!(m2 > 0.0)) throw SolverError(SolverError::Kind::Mismatch, "zero direction");
    const double scale = 1.0 / std::sqrt(m2);
    // Steps are measured in slope units so the perturbation stays in the
    // quadratic regime on small domains.
    double slope = 0.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      slope = std::max(slope, scale * disc.gradient(t, dir).norm());
    }
    const double unit = 1.0 / std::max(1.0, slope);
    auto second_difference = [&](double step) {
      const double eps = step * unit;
      for (std::size_t i = 0; i < N; ++i) {
        plus[i] = zeta[i] + eps * scale * dir[i];
        minus[i] = zeta[i] - eps * scale * dir[i];
      }
      return (discrete_energy(disc, data, plus) + discrete_energy(disc, data, minus) - 2.0 * J0) /
             (eps * eps);
    };
    const double d1 = second_difference(1e-3);
    const double d2 = second_difference(5e-4);
    const double fd = (4.0 * d2 - d1) / 3.0;
    for (std::size_t i = 0; i < N; ++i) phi[i] = scale * dir[i] * surface.normal[i].z();
    const std::vector<double> aphi = form.a_full.multiply(phi);
    const double val = kernels::dot(phi, aphi);
    const double rel = std::abs(fd - val) / std::max(std::abs(val), std::abs(fd));
    out.fd_value.push_back(fd);
    out.form_value.push_back(val);
    out.rel_error.push_back(rel);
    out.max_rel_error = std::max(out.max_rel_error, rel);
  }
  return out;
}

std::vector<std::vector<double>> interior_bump_directions(const Mesh& mesh, int count,
                                                          std::uint64_t seed) {
  std::vector<int> interior, boundary;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    (mesh.node_tags[i] == NodeTag::Interior ? interior : boundary).push_back(static_cast<int>(i));
  }
  std::vector<std::vector<double>> out;
  if (interior.empty()) return out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, interior.size() - 1);
  for (int attempt = 0; static_cast<int>(out.size()) < count && attempt < 100 * count; ++attempt) {
    const Vec2 c = mesh.nodes[static_cast<std::size_t>(interior[pick(rng)])];
    double r = std::numeric_limits<double>::infinity();
    for (int b : boundary) r = std::min(r, (mesh.nodes[static_cast<std::size_t>(b)] - c).norm());
    r *= 0.9;
    std::vector<double> d(mesh.size(), 0.0);
    int support = 0;
    for (int i : interior) {
      const double t = (mesh.nodes[static_cast<std::size_t>(i)] - c).squaredNorm() / (r * r);
      if (t < 1.0) {
        d[static_cast<std::size_t>(i)] = (1.0 - t) * (1.0 - t) * (1.0 - t);
        ++support;
      }
    }
    if (support >= 7) out.push_back(std::move(d));
  }
  return out;
}

std::vector<double> free_trace_direction(const Mesh& mesh) {
  std::vector<double> d(mesh.size(), 0.0);
  const double a = mesh.nodes[static_cast<std::size_t>(mesh.corner1)].x();
  const double b = mesh.nodes[static_cast<std::size_t>(mesh.corner2)].x();
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    if (mesh.free_node(static_cast<int>(i))) {
      const double x = mesh.nodes[i].x();
      d[i] = 4.0 * (x - a) * (b - x) / ((b - a) * (b - a));
    }
  }
  return d;
}

}  // namespace hsurf
