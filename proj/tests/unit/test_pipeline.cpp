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

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "hsurf/config.hpp"
#include "hsurf/error.hpp"
#include "hsurf/pipeline.hpp"

using namespace hsurf;

namespace {

const std::filesystem::path kConfigs = HSURF_CONFIG_DIR;

std::map<std::string, std::string> machine(const RunReport& r) {
  std::map<std::string, std::string> m;
  for (const auto& [k, v] : r.machine()) m[k] = v;
  return m;
}

std::string report_text(const RunReport& r) {
  std::ostringstream os;
  write_report(os, r);
  return os.str();
}

RunOptions options(Mode mode) {
  RunOptions o;
  o.mode = mode;
  o.timestamp = "fixed";
  return o;
}

const char* kMinimal = R"([domain]
g = "0"
u = "1"
a = 0
b = 1
R = 2
[data]
H = "0"
psi = "0"
gamma = "x1 + 2*x2"
[mesh]
n = 4
m = 4
)";

PipelineConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  const auto p = s.find(from);
  REQUIRE(p != std::string::npos);
  return s.replace(p, from.size(), to);
}

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  const auto tmp = std::filesystem::temp_directory_path() / "hsurf_cli_test.txt";
  const std::string cmd = std::string(HSURF_CLI_PATH) + " " + args + " > " + tmp.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(tmp);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

}  // namespace

TEST_CASE("config parsing") {
  const PipelineConfig c = parse(kMinimal);
  CHECK(c.g == "0");
  CHECK(c.gamma == "x1 + 2*x2");
  CHECK(c.R == 2.0);
  CHECK(c.n == 4);
  CHECK(c.tol == 1e-10);
  CHECK(c.max_iter == 25);
  CHECK(c.diagonal == DiagonalRule::Shorter);
  CHECK(c.guess == InitialGuess::Harmonic);

  const PipelineConfig d = parse(std::string(kMinimal) +
                                 "[solver]\ntol = 1e-8\nguess = zero\n[stability]\nfd_directions = 2\n");
  CHECK(d.tol == 1e-8);
  CHECK(d.guess == InitialGuess::Zero);
  CHECK(d.fd_directions == 2);
  CHECK(parse(replace(kMinimal, "R = 2", "R = \"0.5^2\"")).R == 0.25);
}

TEST_CASE("config errors name the key") {
  auto message = [](const std::string& text) {
    try {
      parse(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message(replace(kMinimal, "H = \"0\"\n", "")).find("data.H") != std::string::npos);
  CHECK(message(replace(kMinimal, "R = 2", "R = -1")).find("domain.R") != std::string::npos);
  CHECK(message(replace(kMinimal, "n = 4", "n = 0")).find("mesh.n") != std::string::npos);
  CHECK(message(replace(kMinimal, "n = 4", "n = 2.5")).find("mesh.n") != std::string::npos);
  CHECK(message(replace(kMinimal, "\"x1 + 2*x2\"", "\"x1 + \"")).find("data.gamma") != std::string::npos);
  CHECK(message(replace(kMinimal, "a = 0", "a = 3")).find("domain.a") != std::string::npos);
  CHECK(message(std::string(kMinimal) + "[mesh]\n").find("syntax") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("gate-only run on the lens passes with margins") {
  const RunReport r = run_pipeline(load_config(kConfigs / "cap_lens.cfg"), options(Mode::Gate));
  CHECK(r.verdict == "PASS");
  CHECK(r.exit_code == kExitPass);
  const auto m = machine(r);
  for (const char* key : {"0_4", "0_5", "0_10", "0_11_1", "0_11_2", "4_8", "adm_i", "adm_ii", "angles"}) {
    const std::string p = std::string("gate.") + key;
    REQUIRE(m.count(p + ".margin"));
    CHECK(m.at(p + ".pass") == "1");
    CHECK(std::stod(m.at(p + ".margin")) >= 0.0);
  }
  CHECK_FALSE(r.solution);
}

TEST_CASE("flat-support cap fails the convexity gate") {
  const PipelineConfig cfg = load_config(kConfigs / "cap_flat.cfg");
  const RunReport r = run_pipeline(cfg, options(Mode::Gate));
  CHECK(r.exit_code == kExitGate);
  CHECK(machine(r).at("gate.4_8.value") == "0.42000000000000004");
  CHECK(std::abs(r.gates.find("4_8")->value - 0.42) <= 1e-12);
  CHECK(r.gates.failures() == std::vector<std::string>{"R-admissible (ii)"});

  RunOptions forced = options(Mode::Solve);
  forced.force = true;
  const RunReport f = run_pipeline(cfg, forced);
  REQUIRE(f.solution);
  CHECK(f.solution->converged);
  CHECK(f.verdict == "FAIL");
  CHECK(f.exit_code == kExitGate);
  CHECK(machine(f).at("run.forced") == "1");
}

TEST_CASE("large H aborts at the smallness gate") {
  const RunReport r = run_pipeline(load_config(kConfigs / "lens_h2.cfg"), options(Mode::Solve));
  CHECK(r.exit_code == kExitGate);
  CHECK(r.error_stage == "gate");
  CHECK(r.error_message.find("(0.5)") != std::string::npos);
  CHECK_FALSE(r.gates.find("0_5")->pass);
  CHECK_FALSE(r.solution);
}

TEST_CASE("full run on the lens") {
  const PipelineConfig cfg = load_config(kConfigs / "cap_lens.cfg");
  const RunReport r = run_pipeline(cfg, options(Mode::Full));
  CHECK(r.verdict == "PASS");
  CHECK(r.exit_code == kExitPass);
  REQUIRE(r.stability);
  CHECK(r.stability->lambda_min >= -r.stability->tolerance);
  const auto m = machine(r);
  CHECK(m.count("diag.0_15.contact_max"));
  CHECK(std::stod(m.at("diag.0_15.contact_max")) < 1e-2);
  CHECK(std::stod(m.at("stability.fd_interior_max_rel")) <= 1e-3);
  CHECK(std::stod(m.at("stability.fd_trace_max_rel")) <= 1e-2);

  SUBCASE("deterministic apart from the timestamp") {
    RunOptions o = options(Mode::Full);
    o.timestamp = "other";
    std::string a = report_text(r), b = report_text(run_pipeline(cfg, o));
    b = replace(replace(b, "run at other", "run at fixed"), "run.timestamp=other", "run.timestamp=fixed");
    CHECK(a == b);
  }
}

TEST_CASE("solver and refinement paths") {
  PipelineConfig cfg = load_config(kConfigs / "cap_lens.cfg");
  cfg.max_iter = 1;
  const RunReport r = run_pipeline(cfg, options(Mode::Solve));
  CHECK(r.exit_code == kExitSolver);
  CHECK(r.error_stage == "solve");

  cfg.max_iter = 25;
  RunOptions o = options(Mode::Solve);
  o.refine = 1;
  const RunReport fine = run_pipeline(cfg, o);
  CHECK(fine.n == 64);
  CHECK(fine.m == 32);
  CHECK(fine.exit_code == kExitPass);

  cfg.a = 0.2;
  const RunReport bad = run_pipeline(cfg, options(Mode::Gate));
  CHECK(bad.exit_code == kExitUsage);
  CHECK(bad.error_stage == "geometry");
}

TEST_CASE("command-line interface") {
  const std::string lens = (kConfigs / "cap_lens.cfg").string();
  const CliResult gate = run_cli("gate --config " + lens);
  CHECK(gate.code == 0);
  CHECK(gate.out.find("verdict=PASS") != std::string::npos);

  const CliResult h2 = run_cli("solve --config " + (kConfigs / "lens_h2.cfg").string());
  CHECK(h2.code == 2);
  CHECK(h2.out.find("(0.5)") != std::string::npos);

  CHECK(run_cli("gate").code == 1);
  CHECK(run_cli("frobnicate --config " + lens).code == 1);
  CHECK(run_cli("gate --config /nonexistent.cfg").code == 1);

  const auto dir = std::filesystem::temp_directory_path() / "hsurf_cli_out";
  std::filesystem::remove_all(dir);
  const CliResult full = run_cli("full --config " + lens + " --out " + dir.string());
  CHECK(full.code == 0);
  for (const char* f : {"report.txt", "solution.csv", "surface.obj", "history.csv", "mesh.txt",
                        "contact_residual.csv", "eigenfunction.csv"}) {
    CHECK_MESSAGE(std::filesystem::exists(dir / f), f);
  }
  std::ifstream sol(dir / "solution.csv");
  std::string header;
  std::getline(sol, header);
  CHECK(header == "x1,x2,zeta");

  const CliResult ex = run_cli("mesh export --config " + lens + " --out " + dir.string());
  CHECK(ex.code == 0);
  std::ifstream mesh_in(dir / "mesh.txt");
  const Mesh mesh = read_mesh(mesh_in);
  CHECK(mesh.size() == 529);
}
