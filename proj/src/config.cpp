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

#include "hsurf/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <optional>

#include "hsurf/error.hpp"
#include "hsurf/fieldspec.hpp"

namespace hsurf {
namespace {

namespace pt = boost::property_tree;

std::string unquote(std::string s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') || (s.front() == '\'' && s.back() == '\''))) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::optional<std::string> find(const std::string& key) const {
    if (auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'))) return unquote(*v);
    return std::nullopt;
  }
  std::string text(const std::string& key) const {
    auto v = find(key);
    if (!v || v->empty()) throw ConfigError("missing required key " + key);
    return *v;
  }
  std::string expression(const std::string& key) const {
    const std::string s = text(key);
    try {
      parse_field(s);
    } catch (const ParseError& e) {
      throw ConfigError(key + ": " + e.what());
    }
    return s;
  }
  double number(const std::string& key, std::optional<double> fallback = std::nullopt) const {
    auto v = find(key);
    if (!v) {
      if (fallback) return *fallback;
      throw ConfigError("missing required key " + key);
    }
    try {
      std::size_t used = 0;
      const double x = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing");
      return x;
    } catch (const std::exception&) {
      // Accept constant expressions such as "0.3^2".
      try {
        const FieldExpr f = parse_field(*v);
        if (auto c = f.constant_value()) return *c;
      } catch (const ParseError&) {
      }
      throw ConfigError(key + ": not a number: " + *v);
    }
  }
  int integer(const std::string& key, std::optional<int> fallback = std::nullopt) const {
    const double x = number(key, fallback ? std::optional<double>(*fallback) : std::nullopt);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError(key + ": not an integer");
    return static_cast<int>(x);
  }

 private:
  const pt::ptree& tree_;
};

}  // namespace

PipelineConfig parse_config(std::istream& is, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  const Reader r(tree);
  PipelineConfig c;
  c.base_dir = base_dir;
  c.g = r.expression("domain.g");
  c.u = r.expression("domain.u");
  c.a = r.number("domain.a");
  c.b = r.number("domain.b");
  c.R = r.number("domain.R");
  c.H = r.expression("data.H");
  c.psi = r.expression("data.psi");
  c.gamma = r.expression("data.gamma");
  c.mesh_file = r.find("mesh.file").value_or("");
  if (c.mesh_file.empty()) {
    c.n = r.integer("mesh.n");
    c.m = r.integer("mesh.m");
    if (c.n < 1 || c.m < 1) throw ConfigError("mesh.n and mesh.m must be at least 1");
  }
  if (auto d = r.find("mesh.diagonal")) {
    try {
      c.diagonal = parse_diagonal_rule(*d);
    } catch (const Error& e) {
      throw ConfigError(std::string("mesh.diagonal: ") + e.what());
    }
  }
  c.tol = r.number("solver.tol", 1e-10);
  c.max_iter = r.integer("solver.max_iter", 25);
  if (auto gs = r.find("solver.guess")) {
    if (*gs == "harmonic") {
      c.guess = InitialGuess::Harmonic;
    } else if (*gs == "zero") {
      c.guess = InitialGuess::Zero;
    } else {
      throw ConfigError("solver.guess: expected harmonic or zero");
    }
  }
  c.tol_stab = r.number("stability.tol_stab", 1e-6);
  c.fd_directions = r.integer("stability.fd_directions", 5);
  c.seed = static_cast<std::uint64_t>(r.integer("stability.seed", 1));
  c.out_dir = r.find("output.dir").value_or("");

  if (!(c.R > 0.0)) throw ConfigError("domain.R must be positive");
  if (!(c.a < c.b)) throw ConfigError("domain.a must be less than domain.b");
  if (!(c.tol > 0.0)) throw ConfigError("solver.tol must be positive");
  if (c.max_iter < 1) throw ConfigError("solver.max_iter must be at least 1");
  if (!(c.tol_stab >= 0.0)) throw ConfigError("stability.tol_stab must be nonnegative");
  if (c.fd_directions < 0) throw ConfigError("stability.fd_directions must be nonnegative");
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

}  // namespace hsurf
