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
#include <array>
#include <span>
#include <vector>

#include "hsurf/admissible.hpp"
#include "hsurf/fieldspec.hpp"
#include "hsurf/mesh.hpp"
#include "hsurf/sparse.hpp"

namespace hsurf {

struct FluxValue {
  Vec2 h = Vec2::Zero();
  Eigen::Matrix2d dh = Eigen::Matrix2d::Identity();
};

// h(z) = z / sqrt(1+|z|^2) and Dh(z) = (1+|z|^2)^{-3/2} [(1+|z|^2) I - z z^T].
FluxValue hflux(const Vec2& z);

struct ProblemData {
  FieldExpr H;      // H(x1, x2, x3)
  FieldExpr psi;    // contact data, evaluated at support nodes (x1, x2)
  FieldExpr gamma;  // Dirichlet height
  FieldExpr dH3;    // dH/dx3
  bool H_constant = false;
  double H_value = 0.0;        // when H_constant
  bool H_height_free = false;  // H independent of x3

  double eval_H(double x1, double x2, double z) const {
    return H_constant ? H_value : H(x1, x2, z);
  }
  double eval_dH3(double x1, double x2, double z) const {
    return H_height_free ? 0.0 : dH3(x1, x2, z);
  }
  // int_0^z 2 H(x1, x2, t) dt
  double antiderivative(double x1, double x2, double z) const;
};

ProblemData make_problem(const FieldExpr& H, const FieldExpr& psi, const FieldExpr& gamma);

// Per-mesh data reused across assemblies. Keeps a reference to the mesh.
class Discretization {
 public:
  explicit Discretization(const Mesh& mesh);

  const Mesh& mesh() const { return mesh_; }
  std::size_t size() const { return mesh_.size(); }
  const std::vector<double>& areas() const { return area_; }
  // Gradients of the three hat functions on triangle t.
  const std::array<Vec2, 3>& grads(std::size_t t) const { return grad_[t]; }
  // Trapezoid weights of the free-trace integral; zero off the free nodes.
  const std::vector<double>& trace_weights() const { return trace_w_; }
  const std::vector<bool>& fixed_mask() const { return fixed_; }
  CsrMatrix empty_matrix() const { return pattern_; }
  // CSR value slots of the 3x3 element block of triangle t, row-major.
  const std::array<std::int32_t, 9>& slots(std::size_t t) const { return slots_[t]; }
  // Replaces fixed rows and columns by the identity.
  void eliminate(CsrMatrix& A) const;

  Vec2 gradient(std::size_t t, std::span<const double> nodal) const;

 private:
  const Mesh& mesh_;
  std::vector<double> area_;
  std::vector<std::array<Vec2, 3>> grad_;
  std::vector<double> trace_w_;
  std::vector<bool> fixed_;
  CsrMatrix pattern_;
  std::vector<std::array<std::int32_t, 9>> slots_;
  std::vector<char> slot_fixed_;
  std::vector<std::int32_t> fixed_diag_;
};

struct AssembledSystem {
  std::vector<double> residual;  // zero at fixed nodes
  CsrMatrix jacobian;            // empty when not requested
  double norm = 0.0;             // |residual| over free nodes
};

// Discrete weak form
//   R_i = int h(grad zeta).grad phi_i + int 2 H(x, zeta) phi_i - int_Sigma psi phi_i
// with edge-midpoint quadrature for H and the trapezoid rule on the free
// trace. With eliminate, fixed rows and columns of the Jacobian are replaced
// by the identity.
AssembledSystem assemble_system(const Discretization& disc, const ProblemData& data,
                                std::span<const double> zeta, bool with_jacobian = true,
                                bool eliminate = true);
AssembledSystem assemble_system(const Mesh& mesh, std::span<const double> zeta,
                                const FieldExpr& H, const FieldExpr& psi,
                                const FieldExpr& gamma);

// Discrete energy whose gradient is the residual above.
double discrete_energy(const Discretization& disc, const ProblemData& data,
                       std::span<const double> zeta);

// Directional derivative of the discrete energy.
double first_variation(const Discretization& disc, const ProblemData& data,
                       std::span<const double> zeta, std::span<const double> direction);

std::vector<double> dirichlet_values(const Mesh& mesh, const FieldExpr& gamma);

// Discrete harmonic function with the Dirichlet data and zero Neumann data.
std::vector<double> harmonic_extension(const Discretization& disc, const FieldExpr& gamma);

struct NewtonOptions {
  double tol = 1e-10;      // relative to the first residual
  double abs_tol = 1e-14;  // absolute floor
  int max_iter = 25;
  int max_halvings = 30;
  double armijo = 1e-4;
  CgOptions cg{};
};

enum class InitialGuess { Harmonic, Zero };

struct NewtonStep {
  int iter = 0;
  double residual = 0.0;
  double damping = 0.0;
  int cg_iterations = 0;
};

struct Solution {
  std::vector<double> zeta;
  std::vector<NewtonStep> history;
  bool converged = false;
  double reference_residual = 0.0;
  double final_residual = 0.0;
  int iterations = 0;
  // Set when the relative target lies below the rounding floor
  // 8 eps sqrt(N) |J|_inf |zeta|_inf and the iteration stopped there.
  bool roundoff_limited = false;
  double roundoff_floor = 0.0;
};

// Damped Newton with Armijo backtracking on the residual norm. A start
// vector that violates the Dirichlet data is first lifted by one full step.
Solution newton_solve(const Discretization& disc, const ProblemData& data,
                      std::vector<double> zeta0, const NewtonOptions& opts = {});
Solution newton_solve(const Discretization& disc, const ProblemData& data,
                      InitialGuess guess = InitialGuess::Harmonic,
                      const NewtonOptions& opts = {});

struct FunctionalValues {
  double area = 0.0;
  double aq = 0.0;
  double j_energy = 0.0;
  double max_flux = 0.0;  // max |h(grad zeta)| over elements
};

FunctionalValues evaluate_functionals(const Discretization& disc, const ProblemData& data,
                                      std::span<const double> zeta, const QField& Q);

void write_history_csv(std::ostream& os, const Solution& sol);

}  // namespace hsurf
