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

#include <cstdint>
#include <span>
#include <vector>

#include "hsurf/admissible.hpp"
#include "hsurf/solver.hpp"
#include "hsurf/sparse.hpp"
#include "hsurf/surface.hpp"

namespace hsurf {

// q~ = 2 H(x)^2 - K - grad H . N per node.
std::vector<double> stability_coefficient(const SurfaceGeometry& surface, const FieldExpr& H);

// rho per free node, in chain order (see boundary_density).
std::vector<double> free_boundary_coefficient(const SurfaceGeometry& surface, const QField& Q,
                                              const DomainSpec& domain, bool reverse_tau = false);

// a(phi, phi) = int |grad_M phi|^2 - 2 int q~ phi^2 + int_trace rho phi^2 ds
// and m(phi, phi) = int phi^2, restricted to the interior and free nodes.
struct StabilityForm {
  CsrMatrix a_full, m_full;  // node-indexed, before restriction
  CsrMatrix a, m;            // restricted to dofs
  std::vector<int> dofs;     // dof -> node
  std::vector<int> dof_of;   // node -> dof or -1
  double shift_bound = 0.0;  // lower bound for every generalized eigenvalue
};

// Dofs are the Interior and Free nodes; Dirichlet and corner nodes are
// removed. q_tilde is per node, rho per free frame.
StabilityForm assemble_stability_forms(const SurfaceGeometry& surface,
                                       std::span<const double> q_tilde,
                                       std::span<const double> rho);

// Wraps explicit matrices; shift_bound must not exceed the smallest eigenvalue.
StabilityForm make_form(CsrMatrix a, CsrMatrix m, double shift_bound);

struct EigenOptions {
  double tol = 1e-8;       // relative eigenvalue change between iterations
  int max_iter = 500;
  double tol_stab = 1e-6;  // times the Rayleigh scale
  int block = 4;
};

struct StabilityReport {
  double lambda_min = 0.0;
  std::vector<double> eigenfunction;  // node-indexed when the form has a node map
  double rayleigh_scale = 0.0;        // max_i a_ii / m_ii
  double tolerance = 0.0;             // tol_stab * rayleigh_scale
  double shift = 0.0;
  int iterations = 0;
  bool stable = false;
  std::vector<double> fd_check;       // relative errors, filled by the caller
};

// Smallest generalized eigenvalue of (a, m) by shifted block inverse
// iteration with Rayleigh-Ritz. Throws SolverError(Stagnation).
StabilityReport min_eigenvalue(const StabilityForm& form, const EigenOptions& opts = {});

struct FdHessianCheck {
  std::vector<double> fd_value;    // Richardson-extrapolated second difference of J
  std::vector<double> form_value;  // a(phi, phi) with phi = delta N3
  std::vector<double> rel_error;
  double max_rel_error = 0.0;
};

// Directions must vanish on fixed nodes (SolverError(Mismatch) otherwise) and
// are rescaled to unit lumped mass. The steps 1e-3 and 5e-4 are divided by
// max(1, max |grad delta|) before perturbing.
FdHessianCheck fd_hessian_check(const Discretization& disc, const ProblemData& data,
                                std::span<const double> zeta, const SurfaceGeometry& surface,
                                const StabilityForm& form,
                                const std::vector<std::vector<double>>& directions);

// Smooth bumps centred on random interior nodes, supported away from every
// boundary node.
std::vector<std::vector<double>> interior_bump_directions(const Mesh& mesh, int count,
                                                          std::uint64_t seed);
// Parabolic profile on the free nodes only.
std::vector<double> free_trace_direction(const Mesh& mesh);

}  // namespace hsurf
