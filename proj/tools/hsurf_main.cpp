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

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "hsurf/config.hpp"
#include "hsurf/error.hpp"
#include "hsurf/geometry.hpp"
#include "hsurf/mesh.hpp"
#include "hsurf/pipeline.hpp"

namespace {

int export_mesh(const hsurf::PipelineConfig& cfg, int refine, const std::string& out) {
  const hsurf::DomainSpec domain =
      hsurf::make_domain(hsurf::parse_field(cfg.g), hsurf::parse_field(cfg.u),
                         hsurf::parse_field(cfg.gamma), cfg.a, cfg.b, cfg.R);
  const hsurf::Mesh mesh = hsurf::generate_band_mesh(domain, cfg.n << refine, cfg.m << refine, cfg.diagonal);
  if (out.empty() || out == "-") {
    hsurf::write_mesh(std::cout, mesh);
    return 0;
  }
  std::filesystem::create_directories(out);
  std::ofstream os(std::filesystem::path(out) / "mesh.txt");
  os.precision(17);
  hsurf::write_mesh(os, mesh);
  std::ofstream bs(std::filesystem::path(out) / "boundary.csv");
  hsurf::write_boundary_csv(bs, domain);
  std::cout << "wrote " << mesh.size() << " nodes, " << mesh.triangles.size() << " triangles to " << out
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prescribed mean curvature graphs with a partially free boundary"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int refine = 0;
  bool force = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--refine", refine, "double n and m this many times")->check(CLI::Range(0, 10));
  };

  CLI::App* gate = app.add_subcommand("gate", "check the existence hypotheses only");
  CLI::App* solve = app.add_subcommand("solve", "gates, mesh, Newton solve and residual diagnostics");
  CLI::App* full = app.add_subcommand("full", "solve plus the stability certificate");
  for (CLI::App* sub : {gate, solve, full}) add_common(sub);
  for (CLI::App* sub : {solve, full}) sub->add_flag("--force", force, "continue past failed gates");
  CLI::App* mesh = app.add_subcommand("mesh", "mesh utilities");
  mesh->require_subcommand(1);
  CLI::App* mesh_export = mesh->add_subcommand("export", "write the band mesh");
  add_common(mesh_export);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : hsurf::kExitUsage;
  }

  hsurf::PipelineConfig cfg;
  try {
    cfg = hsurf::load_config(config_path);
  } catch (const hsurf::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return hsurf::kExitUsage;
  }

  if (mesh_export->parsed()) {
    try {
      return export_mesh(cfg, refine, out_dir);
    } catch (const hsurf::Error& e) {
      std::cerr << "mesh export failed: " << e.what() << '\n';
      return hsurf::kExitUsage;
    }
  }

  hsurf::RunOptions opt;
  opt.mode = gate->parsed() ? hsurf::Mode::Gate : solve->parsed() ? hsurf::Mode::Solve : hsurf::Mode::Full;
  opt.force = force;
  opt.refine = refine;
  opt.out_dir = out_dir;
  const hsurf::RunReport rep = hsurf::run_pipeline(cfg, opt);
  hsurf::write_report(std::cout, rep);
  if (!rep.out_dir.empty()) {
    std::ofstream os(std::filesystem::path(rep.out_dir) / "report.txt");
    hsurf::write_report(os, rep);
  }
  return rep.exit_code;
}
