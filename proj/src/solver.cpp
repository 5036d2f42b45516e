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

#include "hsurf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "hsurf/error.hpp"
#include "hsurf/kernels.hpp"
#include "hsurf/parallel.hpp"

namespace hsurf {
namespace {

void check_size(const Discretization& disc, std::span<const double> v, const char* what) {
  if (v.size() != disc.size()) {
    throw SolverError(SolverError::Kind::Mismatch,
                      std::string(what) + " has " + std::to_string(v.size()) +
                          " entries but the mesh has " + std::to_string(disc.size()) + " nodes");
  }
}

struct FluxArrays {
  std::vector<double> zx, zy, hx, hy, d11, d12, d22, w;
};

FluxArrays element_flux(const Discretization& disc, std::span<const double> zeta) {
  const std::size_t T = disc.mesh().triangles.size();
  FluxArrays f;
  for (auto* v : {&f.zx, &f.zy, &f.hx, &f.hy, &f.d11, &f.d12, &f.d22, &f.w}) v->resize(T);
  parallel_for(T, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const Vec2 z = disc.gradient(t, zeta);
      f.zx[t] = z.x();
      f.zy[t] = z.y();
    }
    kernels::FluxBatch batch{end - begin,       f.zx.data() + begin, f.zy.data() + begin,
                             f.hx.data() + begin, f.hy.data() + begin, f.d11.data() + begin,
                             f.d12.data() + begin, f.d22.data() + begin, f.w.data() + begin};
    kernels::flux(batch);
  });
  return f;
}

double free_norm(const Discretization& disc, std::span<const double> r) {
  double s = 0.0;
  const auto& fixed = disc.fixed_mask();
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!fixed[i]) s += r[i] * r[i];
  }
  return std::sqrt(s);
}

double rounding_floor(const CsrMatrix& J, std::span<const double> zeta) {
  double row = 0.0;
  const auto rp = J.row_ptr();
  const auto v = J.values();
  for (std::size_t r = 0; r < J.rows(); ++r) {
    double s = 0.0;
    for (auto k = rp[r]; k < rp[r + 1]; ++k) s += std::abs(v[static_cast<std::size_t>(k)]);
    row = std::max(row, s);
  }
  double zmax = 0.0;
  for (double z : zeta) zmax = std::max(zmax, std::abs(z));
  return 8.0 * std::numeric_limits<double>::epsilon() *
         std::sqrt(static_cast<double>(zeta.size())) * row * std::max(zmax, 1.0);
}

}  // namespace

FluxValue hflux(const Vec2& z) {
  const double s = 1.0 + z.squaredNorm();
  const double w = std::sqrt(s);
  const double inv_w3 = 1.0 / (s * w);
  FluxValue out;
  out.h = z / w;
  out.dh(0, 0) = (1.0 + z.y() * z.y()) * inv_w3;
  out.dh(1, 1) = (1.0 + z.x() * z.x()) * inv_w3;
  out.dh(0, 1) = out.dh(1, 0) = -(z.x() * z.y()) * inv_w3;
  return out;
}

double ProblemData::antiderivative(double x1, double x2, double z) const {
  if (H_constant) return 2.0 * H_value * z;
  if (H_height_free) return 2.0 * H(x1, x2, 0.0) * z;
  const GaussRule& rule = gauss_legendre_16();
  double s = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    s += rule.weights[k] * H(x1, x2, 0.5 * z * (1.0 + rule.nodes[k]));
  }
  return z * s;
}

ProblemData make_problem(const FieldExpr& H, const FieldExpr& psi, const FieldExpr& gamma) {
  ProblemData d;
  d.H = H;
  d.psi = psi;
  d.gamma = gamma;
  d.dH3 = differentiate(H, Var::X3);
  d.H_height_free = !H.depends_on(Var::X3);
  if (auto c = H.constant_value()) {
    d.H_constant = true;
    d.H_value = *c;
  }
  return d;
}

Discretization::Discretization(const Mesh& mesh) : mesh_(mesh) {
  const std::size_t T = mesh.triangles.size();
  const std::size_t N = mesh.size();
  area_.resize(T);
  grad_.resize(T);
  std::vector<std::pair<std::int32_t, std::int32_t>> pattern;
  pattern.reserve(9 * T);
  for (std::size_t t = 0; t < T; ++t) {
    const Triangle& tri = mesh.triangles[t];
    const double A = mesh.signed_area(static_cast<int>(t));
    if (!(A > 0.0)) throw MeshError("degenerate element " + std::to_string(t));
    area_[t] = A;
    for (int k = 0; k < 3; ++k) {
      const Vec2& p1 = mesh.nodes[static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 1) % 3)])];
      const Vec2& p2 = mesh.nodes[static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 2) % 3)])];
      grad_[t][static_cast<std::size_t>(k)] = Vec2(p1.y() - p2.y(), p2.x() - p1.x()) / (2.0 * A);
    }
    for (int a : tri) {
      for (int b : tri) pattern.emplace_back(a, b);
    }
  }
  pattern_ = CsrMatrix::from_pattern(N, std::move(pattern));
  slots_.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    const Triangle& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        slots_[t][static_cast<std::size_t>(3 * a + b)] = static_cast<std::int32_t>(
            pattern_.find(tri[static_cast<std::size_t>(a)], tri[static_cast<std::size_t>(b)]));
      }
    }
  }
  fixed_.resize(N);
  for (std::size_t i = 0; i < N; ++i) fixed_[i] = mesh.fixed(static_cast<int>(i));
  slot_fixed_.assign(pattern_.nonzeros(), 0);
  const auto rp = pattern_.row_ptr();
  const auto cols = pattern_.cols();
  for (std::size_t r = 0; r < N; ++r) {
    for (std::int32_t k = rp[r]; k < rp[r + 1]; ++k) {
      const std::size_t c = static_cast<std::size_t>(cols[static_cast<std::size_t>(k)]);
      if (fixed_[r] || fixed_[c]) slot_fixed_[static_cast<std::size_t>(k)] = 1;
      if (fixed_[r] && c == r) fixed_diag_.push_back(k);
    }
  }

  trace_w_.assign(N, 0.0);
  const auto& chain = mesh.free_chain;
  for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
    const int p = chain[k];
    const int q = chain[k + 1];
    const double len = (mesh.nodes[static_cast<std::size_t>(q)] - mesh.nodes[static_cast<std::size_t>(p)]).norm();
    if (mesh.free_node(p)) trace_w_[static_cast<std::size_t>(p)] += 0.5 * len;
    if (mesh.free_node(q)) trace_w_[static_cast<std::size_t>(q)] += 0.5 * len;
  }
}

Vec2 Discretization::gradient(std::size_t t, std::span<const double> nodal) const {
  const Triangle& tri = mesh_.triangles[t];
  const double z0 = nodal[static_cast<std::size_t>(tri[0])];
  return grad_[t][1] * (nodal[static_cast<std::size_t>(tri[1])] - z0) +
         grad_[t][2] * (nodal[static_cast<std::size_t>(tri[2])] - z0);
}

void Discretization::eliminate(CsrMatrix& A) const {
  auto vals = A.values();
  for (std::size_t k = 0; k < vals.size(); ++k) {
    if (slot_fixed_[k]) vals[k] = 0.0;
  }
  for (std::int32_t k : fixed_diag_) vals[static_cast<std::size_t>(k)] = 1.0;
}

AssembledSystem assemble_system(const Discretization& disc, const ProblemData& data,
                                std::span<const double> zeta, bool with_jacobian,
                                bool eliminate) {
  check_size(disc, zeta, "zeta");
  const Mesh& mesh = disc.mesh();
  const std::size_t T = mesh.triangles.size();
  const FluxArrays f = element_flux(disc, zeta);

  std::vector<std::array<double, 3>> local_r(T);
  std::vector<std::array<double, 9>> local_k(with_jacobian ? T : 0);
  parallel_for(T, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      const Triangle& tri = mesh.triangles[t];
      const double A = disc.areas()[t];
      const auto& gr = disc.grads(t);
      double Hq[3], dHq[3];
      for (int k = 0; k < 3; ++k) {
        const std::size_t p = static_cast<std::size_t>(tri[static_cast<std::size_t>(k)]);
        const std::size_t q = static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 1) % 3)]);
        const Vec2 x = 0.5 * (mesh.nodes[p] + mesh.nodes[q]);
        const double z = 0.5 * (zeta[p] + zeta[q]);
        Hq[k] = data.eval_H(x.x(), x.y(), z);
        dHq[k] = with_jacobian ? data.eval_dH3(x.x(), x.y(), z) : 0.0;
      }
      // Midpoint k joins local nodes k and k+1, where each hat equals 1/2.
      for (int a = 0; a < 3; ++a) {
        const Vec2& g = gr[static_cast<std::size_t>(a)];
        const double flux = f.hx[t] * g.x() + f.hy[t] * g.y();
        const double src = Hq[a] + Hq[(a + 2) % 3];
        local_r[t][static_cast<std::size_t>(a)] = A * flux + A / 3.0 * src;
      }
      if (!with_jacobian) continue;
      for (int a = 0; a < 3; ++a) {
        const Vec2& ga = gr[static_cast<std::size_t>(a)];
        const Vec2 dga(f.d11[t] * ga.x() + f.d12[t] * ga.y(), f.d12[t] * ga.x() + f.d22[t] * ga.y());
        for (int b = 0; b < 3; ++b) {
          const Vec2& gb = gr[static_cast<std::size_t>(b)];
          double mass = 0.0;
          for (int k = 0; k < 3; ++k) {
            const double pa = (a == k || a == (k + 1) % 3) ? 0.5 : 0.0;
            const double pb = (b == k || b == (k + 1) % 3) ? 0.5 : 0.0;
            mass += 2.0 * dHq[k] * pa * pb;
          }
          local_k[t][static_cast<std::size_t>(3 * a + b)] = A * dga.dot(gb) + A / 3.0 * mass;
        }
      }
    }
  });

  AssembledSystem sys;
  sys.residual.assign(disc.size(), 0.0);
  if (with_jacobian) sys.jacobian = disc.empty_matrix();
  auto vals = sys.jacobian.values();
  for (std::size_t t = 0; t < T; ++t) {
    const Triangle& tri = mesh.triangles[t];
    for (int a = 0; a < 3; ++a) {
      sys.residual[static_cast<std::size_t>(tri[static_cast<std::size_t>(a)])] += local_r[t][static_cast<std::size_t>(a)];
    }
    if (!with_jacobian) continue;
    const auto& sl = disc.slots(t);
    for (std::size_t k = 0; k < 9; ++k) vals[static_cast<std::size_t>(sl[k])] += local_k[t][k];
  }
  const auto& w = disc.trace_weights();
  for (std::size_t i = 0; i < disc.size(); ++i) {
    if (w[i] > 0.0) sys.residual[i] -= w[i] * data.psi(mesh.nodes[i].x(), mesh.nodes[i].y());
  }
  const auto& fixed = disc.fixed_mask();
  for (std::size_t i = 0; i < disc.size(); ++i) {
    if (fixed[i]) sys.residual[i] = 0.0;
  }
  if (with_jacobian && eliminate) disc.eliminate(sys.jacobian);
  sys.norm = norm2(sys.residual);
  return sys;
}

AssembledSystem assemble_system(const Mesh& mesh, std::span<const double> zeta,
                                const FieldExpr& H, const FieldExpr& psi,
                                const FieldExpr& gamma) {
  const Discretization disc(mesh);
  return assemble_system(disc, make_problem(H, psi, gamma), zeta);
}

double discrete_energy(const Discretization& disc, const ProblemData& data,
                       std::span<const double> zeta) {
  check_size(disc, zeta, "zeta");
  const Mesh& mesh = disc.mesh();
  const FluxArrays f = element_flux(disc, zeta);
  double area_part = 0.0, source_part = 0.0, trace_part = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    const double A = disc.areas()[t];
    area_part += A * f.w[t];
    double s = 0.0;
    for (int k = 0; k < 3; ++k) {
      const std::size_t p = static_cast<std::size_t>(tri[static_cast<std::size_t>(k)]);
      const std::size_t q = static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 1) % 3)]);
      const Vec2 x = 0.5 * (mesh.nodes[p] + mesh.nodes[q]);
      s += data.antiderivative(x.x(), x.y(), 0.5 * (zeta[p] + zeta[q]));
    }
    source_part += A / 3.0 * s;
  }
  const auto& w = disc.trace_weights();
  for (std::size_t i = 0; i < disc.size(); ++i) {
    if (w[i] > 0.0) trace_part += w[i] * data.psi(mesh.nodes[i].x(), mesh.nodes[i].y()) * zeta[i];
  }
  return area_part + source_part - trace_part;
}

double first_variation(const Discretization& disc, const ProblemData& data,
                       std::span<const double> zeta, std::span<const double> direction) {
  check_size(disc, direction, "direction");
  const auto& fixed = disc.fixed_mask();
  for (std::size_t i = 0; i < direction.size(); ++i) {
    if (fixed[i] && direction[i] != 0.0) {
      throw SolverError(SolverError::Kind::Mismatch, "direction does not vanish on fixed nodes");
    }
  }
  const AssembledSystem sys = assemble_system(disc, data, zeta, false);
  return kernels::dot(sys.residual, direction);
}

std::vector<double> dirichlet_values(const Mesh& mesh, const FieldExpr& gamma) {
  std::vector<double> v(mesh.size(), 0.0);
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    if (mesh.fixed(static_cast<int>(i))) v[i] = gamma(mesh.nodes[i].x(), mesh.nodes[i].y());
  }
  return v;
}

namespace {

// zeta += delta where delta carries the Dirichlet defect on fixed nodes and
// solves the linearized problem on the free ones.
CgResult lift_step(const Discretization& disc, const ProblemData& data, std::vector<double>& zeta,
                   const std::vector<double>& target, const CgOptions& cg, double* rhs_norm) {
  AssembledSystem sys = assemble_system(disc, data, zeta, true, false);
  const auto& fixed = disc.fixed_mask();
  std::vector<double> d(disc.size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (fixed[i]) d[i] = target[i] - zeta[i];
  }
  const std::vector<double> Jd = sys.jacobian.multiply(d);
  std::vector<double> rhs(disc.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = fixed[i] ? d[i] : -sys.residual[i] - Jd[i];
  if (rhs_norm) *rhs_norm = free_norm(disc, rhs);
  disc.eliminate(sys.jacobian);
  std::vector<double> delta = d;
  const CgResult res = conjugate_gradient(sys.jacobian, rhs, delta, cg);
  for (std::size_t i = 0; i < zeta.size(); ++i) zeta[i] = fixed[i] ? target[i] : zeta[i] + delta[i];
  return res;
}

}  // namespace

std::vector<double> harmonic_extension(const Discretization& disc, const FieldExpr& gamma) {
  const ProblemData laplace = make_problem(FieldExpr(), FieldExpr(), gamma);
  std::vector<double> zeta(disc.size(), 0.0);
  lift_step(disc, laplace, zeta, dirichlet_values(disc.mesh(), gamma), CgOptions{}, nullptr);
  return zeta;
}

Solution newton_solve(const Discretization& disc, const ProblemData& data,
                      std::vector<double> zeta0, const NewtonOptions& opts) {
  check_size(disc, zeta0, "initial guess");
  Solution sol;
  sol.zeta = std::move(zeta0);
  const std::vector<double> target = dirichlet_values(disc.mesh(), data.gamma);
  const auto& fixed = disc.fixed_mask();

  bool consistent = true;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (fixed[i] && sol.zeta[i] != target[i]) consistent = false;
  }
  int iter = 0;
  if (!consistent) {
    double rhs_norm = 0.0;
    const CgResult cg = lift_step(disc, data, sol.zeta, target, opts.cg, &rhs_norm);
    sol.reference_residual = rhs_norm;
    sol.history.push_back({0, rhs_norm, 0.0, 0});
    ++iter;
    const double r = assemble_system(disc, data, sol.zeta, false).norm;
    sol.history.push_back({iter, r, 1.0, cg.iterations});
  }

  AssembledSystem sys = assemble_system(disc, data, sol.zeta);
  if (consistent) {
    sol.reference_residual = sys.norm;
    sol.history.push_back({0, sys.norm, 0.0, 0});
  }
  const double target_norm = std::max(opts.tol * sol.reference_residual, opts.abs_tol);
  while (true) {
    const double r = sys.norm;
    sol.final_residual = r;
    if (r <= target_norm) {
      sol.converged = true;
      break;
    }
    if (iter >= opts.max_iter) break;
    std::vector<double> rhs(sys.residual.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -sys.residual[i];
    std::vector<double> delta(rhs.size(), 0.0);
    const CgResult cg = conjugate_gradient(sys.jacobian, rhs, delta, opts.cg);
    sol.roundoff_floor = rounding_floor(sys.jacobian, sol.zeta);

    double t = 1.0;
    std::vector<double> trial(sol.zeta.size());
    bool accepted = false;
    double r_trial = 0.0;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = sol.zeta[i] + t * delta[i];
      r_trial = assemble_system(disc, data, trial, false).norm;
      if (std::isfinite(r_trial) && r_trial <= (1.0 - opts.armijo * t) * r) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted && r <= sol.roundoff_floor) {
      sol.converged = true;
      sol.roundoff_limited = true;
      break;
    }
    if (!accepted) {
      throw SolverError(SolverError::Kind::LineSearch,
                        "line search failed at iteration " + std::to_string(iter + 1) +
                            " with residual " + std::to_string(r));
    }
    sol.zeta.swap(trial);
    ++iter;
    sol.history.push_back({iter, r_trial, t, cg.iterations});
    sys = assemble_system(disc, data, sol.zeta);
  }
  sol.iterations = iter;
  return sol;
}

Solution newton_solve(const Discretization& disc, const ProblemData& data, InitialGuess guess,
                      const NewtonOptions& opts) {
  std::vector<double> zeta0 = guess == InitialGuess::Harmonic
                                  ? harmonic_extension(disc, data.gamma)
                                  : std::vector<double>(disc.size(), 0.0);
  return newton_solve(disc, data, std::move(zeta0), opts);
}

FunctionalValues evaluate_functionals(const Discretization& disc, const ProblemData& data,
                                      std::span<const double> zeta, const QField& Q) {
  check_size(disc, zeta, "zeta");
  const Mesh& mesh = disc.mesh();
  const FluxArrays f = element_flux(disc, zeta);
  FunctionalValues out;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    const double A = disc.areas()[t];
    const Vec2 c = (mesh.nodes[static_cast<std::size_t>(tri[0])] + mesh.nodes[static_cast<std::size_t>(tri[1])] +
                    mesh.nodes[static_cast<std::size_t>(tri[2])]) / 3.0;
    out.area += A * f.w[t];
    // Q . (-grad zeta, 1) with Q = (0, q2, 0).
    out.aq += A * (f.w[t] - Q.q2(c.x(), c.y()) * f.zy[t]);
    out.max_flux = std::max(out.max_flux, std::hypot(f.hx[t], f.hy[t]));
  }
  out.j_energy = discrete_energy(disc, data, zeta);
  return out;
}

void write_history_csv(std::ostream& os, const Solution& sol) {
  os.precision(17);
  os << "iter,residual,damping\n";
  for (const auto& s : sol.history) os << s.iter << ',' << s.residual << ',' << s.damping << '\n';
}

}  // namespace hsurf
