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

#include "hsurf/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "hsurf/error.hpp"
#include "hsurf/geometry.hpp"
#include "hsurf/mesh.hpp"
#include "hsurf/surface.hpp"

namespace hsurf {
namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

class Output {
 public:
  Output(std::string dir, RunReport& rep) : dir_(std::move(dir)), rep_(rep) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }
  bool enabled() const { return !dir_.empty(); }
  template <class F>
  void write(const std::string& name, F&& body) {
    if (!enabled()) return;
    const auto path = std::filesystem::path(dir_) / name;
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path.string());
    os.precision(17);
    body(os);
    rep_.files.push_back(path.string());
  }

 private:
  std::string dir_;
  RunReport& rep_;
};

void write_trace_csv(std::ostream& os, const SurfaceGeometry& s, const std::vector<double>& v) {
  os << "x1,x2,value\n";
  for (std::size_t k = 0; k < s.frames.size(); ++k) {
    const Vec3& x = s.position[static_cast<std::size_t>(s.frames[k].node)];
    os << x.x() << ',' << x.y() << ',' << v[k] << '\n';
  }
}

void fail(RunReport& rep, const std::string& stage, const std::string& message, int code) {
  rep.error_stage = stage;
  rep.error_message = message;
  rep.exit_code = code;
  rep.verdict = "FAIL";
}

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Gate: return "gate";
    case Mode::Solve: return "solve";
    case Mode::Full: return "full";
  }
  return "?";
}

RunReport run_pipeline(const PipelineConfig& cfg, const RunOptions& opt) {
  RunReport rep;
  rep.mode = opt.mode;
  rep.timestamp = opt.timestamp.empty() ? utc_now() : opt.timestamp;
  rep.forced = opt.force;

  std::optional<DomainSpec> domain;
  FieldExpr H, psi, gamma, g;
  try {
    g = parse_field(cfg.g);
    H = parse_field(cfg.H);
    psi = parse_field(cfg.psi);
    gamma = parse_field(cfg.gamma);
    domain = make_domain(g, parse_field(cfg.u), gamma, cfg.a, cfg.b, cfg.R);
  } catch (const Error& e) {
    fail(rep, "geometry", e.what(), kExitUsage);
    return rep;
  }

  std::string out_dir = opt.out_dir.empty() ? cfg.out_dir : opt.out_dir;
  if (!out_dir.empty() && opt.out_dir.empty() && std::filesystem::path(out_dir).is_relative()) {
    out_dir = (cfg.base_dir / out_dir).string();
  }
  rep.out_dir = out_dir;
  std::optional<Output> out;
  try {
    out.emplace(out_dir, rep);
  } catch (const std::exception& e) {
    fail(rep, "output", e.what(), kExitUsage);
    return rep;
  }

  // Gates.
  std::optional<QField> Q;
  try {
    Q = build_q_field(H, psi, g);
    rep.gates = check_field_conditions(*Q, H, *domain);
  } catch (const DomainError& e) {
    rep.gates.entries.push_back(
        GateEntry{"q_field", "Q construction", "exists", 0.0, 0.0, 0.0, -1.0, false, e.what()});
  }
  rep.gates = merge(rep.gates, check_geometry_conditions(*domain));
  rep.gates_pass = rep.gates.pass();
  rep.exit_code = rep.gates_pass ? kExitPass : kExitGate;
  if (opt.mode == Mode::Gate || (!rep.gates_pass && !opt.force)) {
    if (rep.gates_pass) {
      rep.verdict = "PASS";
    } else {
      std::string labels;
      for (const auto& l : rep.gates.failures()) labels += (labels.empty() ? "" : ", ") + l;
      fail(rep, "gate", "violated " + labels, kExitGate);
    }
    return rep;
  }
  if (!rep.gates_pass) rep.warnings.push_back("gate failures overridden by --force; verdict cannot pass");

  // Mesh.
  Mesh mesh;
  try {
    if (!cfg.mesh_file.empty()) {
      const auto path = std::filesystem::path(cfg.mesh_file).is_relative() ? cfg.base_dir / cfg.mesh_file
                                                                          : std::filesystem::path(cfg.mesh_file);
      std::ifstream in(path);
      if (!in) throw ConfigError("cannot open mesh " + path.string());
      mesh = read_mesh(in);
      if (opt.refine > 0) rep.warnings.push_back("--refine ignored for a mesh file");
    } else {
      rep.n = cfg.n << opt.refine;
      rep.m = cfg.m << opt.refine;
      mesh = generate_band_mesh(*domain, rep.n, rep.m, cfg.diagonal);
    }
    rep.nodes = mesh.size();
    rep.h_max = mesh.h_max;
    out->write("mesh.txt", [&](std::ostream& os) { write_mesh(os, mesh); });
    out->write("boundary.csv", [&](std::ostream& os) { write_boundary_csv(os, *domain); });
  } catch (const Error& e) {
    fail(rep, "mesh", e.what(), kExitUsage);
    return rep;
  }

  // Solve.
  const Discretization disc(mesh);
  const ProblemData data = make_problem(H, psi, gamma);
  try {
    NewtonOptions no;
    no.tol = cfg.tol;
    no.max_iter = cfg.max_iter;
    rep.solution = newton_solve(disc, data, cfg.guess, no);
  } catch (const Error& e) {
    fail(rep, "solve", e.what(), kExitSolver);
    return rep;
  }
  const Solution& sol = *rep.solution;
  out->write("history.csv", [&](std::ostream& os) { write_history_csv(os, sol); });
  out->write("solution.csv", [&](std::ostream& os) { write_nodal_csv(os, mesh, sol.zeta, "zeta"); });
  if (!sol.converged) {
    fail(rep, "solve", "Newton iteration did not converge", kExitSolver);
    return rep;
  }
  if (sol.roundoff_limited) rep.warnings.push_back("Newton stopped at the rounding floor");

  // Lift and diagnostics.
  std::optional<SurfaceGeometry> surface;
  try {
    rep.functionals = evaluate_functionals(disc, data, sol.zeta, Q ? *Q : QField::zero());
    surface = lift_graph(mesh, sol.zeta, *domain);
    Diagnostics d;
    const auto contact = contact_residual(*surface, psi);
    const auto normal = normal_equation_residual(*surface, H);
    d.contact_max = max_abs(contact);
    d.normal_max = max_abs(normal);
    out->write("surface.obj", [&](std::ostream& os) { write_obj(os, mesh, sol.zeta); });
    out->write("contact_residual.csv", [&](std::ostream& os) { write_trace_csv(os, *surface, contact); });
    out->write("normal_residual.csv",
               [&](std::ostream& os) { write_nodal_csv(os, mesh, normal, "value"); });
    if (Q) {
      const BoundaryResidual n3 = n3_boundary_residual(*surface, *Q, *domain);
      d.n3_max = n3.max_abs;
      d.n3_reversed = n3.reversed;
      d.n3_available = true;
      out->write("n3_residual.csv", [&](std::ostream& os) { write_trace_csv(os, *surface, n3.residual); });
    }
    rep.diagnostics = d;
  } catch (const Error& e) {
    fail(rep, "lift", e.what(), kExitSolver);
    return rep;
  }

  if (opt.mode == Mode::Full) {
    try {
      const std::vector<double> qt = stability_coefficient(*surface, H);
      const std::vector<double> rho = Q ? free_boundary_coefficient(*surface, *Q, *domain, rep.diagnostics->n3_reversed)
                                        : std::vector<double>(surface->frames.size(), 0.0);
      const StabilityForm form = assemble_stability_forms(*surface, qt, rho);
      EigenOptions eo;
      eo.tol_stab = cfg.tol_stab;
      rep.stability = min_eigenvalue(form, eo);
      if (cfg.fd_directions > 0) {
        const auto dirs = interior_bump_directions(mesh, cfg.fd_directions, cfg.seed);
        if (!dirs.empty()) rep.fd_interior = fd_hessian_check(disc, data, sol.zeta, *surface, form, dirs);
        if (!surface->frames.empty()) {
          rep.fd_trace = fd_hessian_check(disc, data, sol.zeta, *surface, form, {free_trace_direction(mesh)});
        }
        for (const auto* fd : {&rep.fd_interior, &rep.fd_trace}) {
          if (*fd) rep.stability->fd_check.insert(rep.stability->fd_check.end(), (*fd)->rel_error.begin(),
                                                  (*fd)->rel_error.end());
        }
      }
      out->write("eigenfunction.csv", [&](std::ostream& os) {
        write_nodal_csv(os, mesh, rep.stability->eigenfunction, "phi");
      });
    } catch (const Error& e) {
      fail(rep, "stability", e.what(), kExitUnstable);
      return rep;
    }
    if (!rep.stability->stable) {
      fail(rep, "stability", "lambda_min below -tol_stab", kExitUnstable);
      return rep;
    }
  }

  if (rep.gates_pass) {
    rep.verdict = "PASS";
    rep.exit_code = kExitPass;
  } else {
    rep.verdict = "FAIL";
    rep.exit_code = kExitGate;
    rep.error_stage = "gate";
    std::string labels;
    for (const auto& l : rep.gates.failures()) labels += (labels.empty() ? "" : ", ") + l;
    rep.error_message = "violated " + labels + " (overridden)";
  }
  return rep;
}

std::vector<std::pair<std::string, std::string>> RunReport::machine() const {
  std::vector<std::pair<std::string, std::string>> kv;
  auto put = [&](std::string k, std::string v) { kv.emplace_back(std::move(k), std::move(v)); };
  auto flag = [](bool b) { return std::string(b ? "1" : "0"); };
  put("run.mode", mode_name(mode));
  put("run.timestamp", timestamp);
  put("run.forced", flag(forced));
  for (const GateEntry& e : gates.entries) {
    const std::string p = "gate." + e.key + ".";
    put(p + "label", e.label);
    put(p + "value", num(e.value));
    put(p + "inflated", num(e.inflated));
    put(p + "bound", num(e.bound));
    put(p + "margin", num(e.margin));
    put(p + "pass", flag(e.pass));
  }
  put("gate.pass", flag(gates_pass));
  if (nodes > 0) {
    put("mesh.n", std::to_string(n));
    put("mesh.m", std::to_string(m));
    put("mesh.nodes", std::to_string(nodes));
    put("mesh.h_max", num(h_max));
  }
  if (solution) {
    put("solver.converged", flag(solution->converged));
    put("solver.iterations", std::to_string(solution->iterations));
    put("solver.reference_residual", num(solution->reference_residual));
    put("solver.final_residual", num(solution->final_residual));
    put("solver.roundoff_limited", flag(solution->roundoff_limited));
  }
  if (functionals) {
    put("functional.area", num(functionals->area));
    put("functional.aq", num(functionals->aq));
    put("functional.j", num(functionals->j_energy));
    put("functional.max_flux", num(functionals->max_flux));
  }
  if (diagnostics) {
    put("diag.0_15.contact_max", num(diagnostics->contact_max));
    put("diag.0_13.normal_max", num(diagnostics->normal_max));
    if (diagnostics->n3_available) {
      put("diag.4_1.n3_max", num(diagnostics->n3_max));
      put("diag.4_1.tau_reversed", flag(diagnostics->n3_reversed));
    }
  }
  if (stability) {
    put("stability.lambda_min", num(stability->lambda_min));
    put("stability.tolerance", num(stability->tolerance));
    put("stability.rayleigh_scale", num(stability->rayleigh_scale));
    put("stability.iterations", std::to_string(stability->iterations));
    put("stability.stable", flag(stability->stable));
  }
  if (fd_interior) put("stability.fd_interior_max_rel", num(fd_interior->max_rel_error));
  if (fd_trace) put("stability.fd_trace_max_rel", num(fd_trace->max_rel_error));
  if (!error_stage.empty()) {
    put("error.stage", error_stage);
    put("error.message", error_message);
  }
  put("verdict", verdict);
  put("exit_code", std::to_string(exit_code));
  return kv;
}

void write_report(std::ostream& os, const RunReport& r) {
  os << "hsurf " << mode_name(r.mode) << " run at " << r.timestamp << '\n';
  os << "gates:\n";
  for (const GateEntry& e : r.gates.entries) {
    os << "  " << (e.pass ? "ok  " : "FAIL") << ' ' << e.label << "  " << e.detail << ": "
       << short_num(e.inflated) << ' '
       << (e.relation == "in" ? "in (0, " + short_num(e.bound) + "]" : e.relation + " " + short_num(e.bound))
       << "  (margin " << short_num(e.margin) << ")\n";
  }
  for (const auto& n : r.gates.notes) os << "  note: " << n << '\n';
  if (r.nodes > 0) os << "mesh: " << r.nodes << " nodes, h_max " << short_num(r.h_max) << '\n';
  if (r.solution) {
    os << "solver: " << (r.solution->converged ? "converged" : "not converged") << " in "
       << r.solution->iterations << " iterations, residual " << short_num(r.solution->final_residual)
       << " (reference " << short_num(r.solution->reference_residual) << ")\n";
  }
  if (r.functionals) {
    os << "functionals: area " << short_num(r.functionals->area) << ", A_Q "
       << short_num(r.functionals->aq) << ", J " << short_num(r.functionals->j_energy) << '\n';
  }
  if (r.diagnostics) {
    os << "residuals: contact (0.15) " << short_num(r.diagnostics->contact_max) << ", normal (0.13) "
       << short_num(r.diagnostics->normal_max);
    if (r.diagnostics->n3_available) {
      os << ", N3 (4.1) " << short_num(r.diagnostics->n3_max)
         << (r.diagnostics->n3_reversed ? " [tau reversed]" : "");
    }
    os << '\n';
  }
  if (r.stability) {
    os << "stability: lambda_min " << short_num(r.stability->lambda_min) << " against -"
       << short_num(r.stability->tolerance) << (r.stability->stable ? ", stable" : ", NOT stable") << '\n';
  }
  if (r.fd_interior || r.fd_trace) {
    os << "second variation check:";
    if (r.fd_interior) os << " interior max rel " << short_num(r.fd_interior->max_rel_error);
    if (r.fd_trace) os << ", free trace rel " << short_num(r.fd_trace->max_rel_error);
    os << '\n';
  }
  for (const auto& w : r.warnings) os << "warning: " << w << '\n';
  if (!r.error_stage.empty()) os << "stopped at " << r.error_stage << ": " << r.error_message << '\n';
  os << "verdict: " << r.verdict << '\n';
  os << "--- machine ---\n";
  for (const auto& [k, v] : r.machine()) os << k << '=' << v << '\n';
  os << "--- end ---\n";
}

}  // namespace hsurf
