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

#include "hsurf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "hsurf/error.hpp"

namespace hsurf {

const char* tag_name(NodeTag t) {
  switch (t) {
    case NodeTag::Interior: return "INTERIOR";
    case NodeTag::Free: return "FREE";
    case NodeTag::Dirichlet: return "DIRICHLET";
    case NodeTag::Corner: return "CORNER";
  }
  return "INTERIOR";
}

DiagonalRule parse_diagonal_rule(const std::string& s) {
  if (s == "shorter") return DiagonalRule::Shorter;
  if (s == "uniform") return DiagonalRule::Uniform;
  throw MeshError("unknown diagonal rule '" + s + "' (expected shorter or uniform)");
}

const char* diagonal_rule_name(DiagonalRule r) {
  return r == DiagonalRule::Shorter ? "shorter" : "uniform";
}

NodeTag parse_tag(const std::string& s) {
  if (s == "INTERIOR") return NodeTag::Interior;
  if (s == "FREE") return NodeTag::Free;
  if (s == "DIRICHLET") return NodeTag::Dirichlet;
  if (s == "CORNER") return NodeTag::Corner;
  throw MeshError("unknown node tag '" + s + "'");
}

double Mesh::signed_area(int t) const {
  const Triangle& tri = triangles[static_cast<std::size_t>(t)];
  const Vec2& p = nodes[static_cast<std::size_t>(tri[0])];
  const Vec2& q = nodes[static_cast<std::size_t>(tri[1])];
  const Vec2& r = nodes[static_cast<std::size_t>(tri[2])];
  return 0.5 * ((q.x() - p.x()) * (r.y() - p.y()) - (r.x() - p.x()) * (q.y() - p.y()));
}

double Mesh::total_area() const {
  double s = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) s += signed_area(static_cast<int>(t));
  return s;
}

std::size_t Mesh::count(NodeTag t) const {
  return static_cast<std::size_t>(std::count(node_tags.begin(), node_tags.end(), t));
}

Mesh generate_band_mesh(const DomainSpec& domain, int n, int m, DiagonalRule rule) {
  if (n < 1 || m < 1) throw MeshError("mesh needs n, m >= 1");
  const double a = domain.support.a();
  const double b = domain.support.b();
  const FieldExpr& g = domain.support.g();
  const FieldExpr& u = domain.fixed.u;

  Mesh mesh;
  std::vector<int> grid(static_cast<std::size_t>((n + 1) * (m + 1)), -1);
  auto at = [&](int i, int j) -> int& { return grid[static_cast<std::size_t>(i * (m + 1) + j)]; };
  for (int i = 0; i <= n; ++i) {
    const double x = i == n ? b : a + (b - a) * i / n;
    const double lo = g(x);
    const double hi = u(x);
    const double height = hi - lo;
    const bool end = i == 0 || i == n;
    if (end ? height < -1e-12 : !(height > 0.0)) {
      throw MeshError("degenerate band: u <= g at x1 = " + std::to_string(x));
    }
    if (end && height <= 1e-12) {
      at(i, 0) = static_cast<int>(mesh.nodes.size());
      mesh.nodes.emplace_back(x, lo);
      mesh.node_tags.push_back(NodeTag::Corner);
      for (int j = 1; j <= m; ++j) at(i, j) = at(i, 0);
      continue;
    }
    for (int j = 0; j <= m; ++j) {
      at(i, j) = static_cast<int>(mesh.nodes.size());
      const double y = j == m ? hi : lo + height * j / m;
      mesh.nodes.emplace_back(x, y);
      NodeTag tag = NodeTag::Interior;
      if (j == 0) {
        tag = end ? NodeTag::Corner : NodeTag::Free;
      } else if (j == m || end) {
        tag = NodeTag::Dirichlet;
      }
      mesh.node_tags.push_back(tag);
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const int p00 = at(i, j), p10 = at(i + 1, j), p11 = at(i + 1, j + 1), p01 = at(i, j + 1);
      std::vector<int> ring;
      for (int v : {p00, p10, p11, p01}) {
        if (std::find(ring.begin(), ring.end(), v) == ring.end()) ring.push_back(v);
      }
      if (ring.size() < 3) continue;
      if (ring.size() == 3) {
        mesh.triangles.push_back({ring[0], ring[1], ring[2]});
        continue;
      }
      auto P = [&](int k) { return mesh.nodes[static_cast<std::size_t>(k)]; };
      const double d_main = (P(p11) - P(p00)).norm();
      const double d_anti = (P(p01) - P(p10)).norm();
      const bool main_diag =
          rule == DiagonalRule::Uniform || d_main <= d_anti * (1.0 + 1e-12);
      if (main_diag) {
        mesh.triangles.push_back({p00, p10, p11});
        mesh.triangles.push_back({p00, p11, p01});
      } else {
        mesh.triangles.push_back({p00, p10, p01});
        mesh.triangles.push_back({p10, p11, p01});
      }
    }
  }
  if (mesh.triangles.empty()) throw MeshError("degenerate band: no triangles");
  finalize_mesh(mesh);
  return mesh;
}

void finalize_mesh(Mesh& mesh) {
  const std::size_t N = mesh.nodes.size();
  if (mesh.node_tags.size() != N) throw MeshError("node tag count mismatch");
  std::map<std::pair<int, int>, int> edge_count;
  mesh.h_max = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    for (int v : tri) {
      if (v < 0 || static_cast<std::size_t>(v) >= N) {
        throw MeshError("triangle " + std::to_string(t) + " references a missing node");
      }
    }
    if (!(mesh.signed_area(static_cast<int>(t)) > 0.0)) {
      throw MeshError("triangle " + std::to_string(t) + " has non-positive area");
    }
    for (int k = 0; k < 3; ++k) {
      const int p = tri[static_cast<std::size_t>(k)];
      const int q = tri[static_cast<std::size_t>((k + 1) % 3)];
      ++edge_count[{std::min(p, q), std::max(p, q)}];
      mesh.h_max = std::max(
          mesh.h_max, (mesh.nodes[static_cast<std::size_t>(p)] - mesh.nodes[static_cast<std::size_t>(q)]).norm());
    }
  }

  auto on_support = [&](int v) {
    const NodeTag t = mesh.node_tags[static_cast<std::size_t>(v)];
    return t == NodeTag::Free || t == NodeTag::Corner;
  };
  mesh.boundary_edges.clear();
  for (const auto& [e, c] : edge_count) {
    if (c > 2) throw MeshError("non-manifold edge");
    if (c != 1) continue;
    const EdgeTag tag = on_support(e.first) && on_support(e.second) ? EdgeTag::Free : EdgeTag::Dirichlet;
    mesh.boundary_edges.push_back({e.first, e.second, tag});
  }

  std::vector<int> corners;
  for (std::size_t i = 0; i < N; ++i) {
    if (mesh.node_tags[i] == NodeTag::Corner) corners.push_back(static_cast<int>(i));
  }
  if (corners.size() != 2) throw MeshError("mesh must have exactly two CORNER nodes");
  if (mesh.nodes[static_cast<std::size_t>(corners[1])].x() <
      mesh.nodes[static_cast<std::size_t>(corners[0])].x()) {
    std::swap(corners[0], corners[1]);
  }
  mesh.corner1 = corners[0];
  mesh.corner2 = corners[1];

  std::vector<std::vector<int>> free_adj(N);
  std::size_t free_edges = 0;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag != EdgeTag::Free) continue;
    free_adj[static_cast<std::size_t>(e.a)].push_back(e.b);
    free_adj[static_cast<std::size_t>(e.b)].push_back(e.a);
    ++free_edges;
  }
  mesh.free_chain = {mesh.corner1};
  int prev = -1, cur = mesh.corner1;
  while (cur != mesh.corner2) {
    int next = -1;
    for (int v : free_adj[static_cast<std::size_t>(cur)]) {
      if (v != prev) {
        next = v;
        break;
      }
    }
    if (next < 0 || mesh.free_chain.size() > N) {
      throw MeshError("free boundary does not form a chain between the corners");
    }
    mesh.free_chain.push_back(next);
    prev = cur;
    cur = next;
  }
  if (mesh.free_chain.size() != free_edges + 1) {
    throw MeshError("free boundary edges do not form a single chain");
  }
}

std::vector<std::vector<int>> node_triangles(const Mesh& mesh) {
  std::vector<std::vector<int>> out(mesh.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int v : mesh.triangles[t]) out[static_cast<std::size_t>(v)].push_back(static_cast<int>(t));
  }
  return out;
}

std::vector<std::vector<int>> node_neighbors(const Mesh& mesh) {
  std::vector<std::vector<int>> out(mesh.size());
  for (const Triangle& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      for (int l = 0; l < 3; ++l) {
        if (k != l) out[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])].push_back(tri[static_cast<std::size_t>(l)]);
      }
    }
  }
  for (auto& v : out) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return out;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os.precision(17);
  os << "nodes " << mesh.nodes.size() << " triangles " << mesh.triangles.size() << '\n';
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    os << mesh.nodes[i].x() << ' ' << mesh.nodes[i].y() << ' ' << tag_name(mesh.node_tags[i]) << '\n';
  }
  for (const Triangle& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

Mesh read_mesh(std::istream& is) {
  std::string w1, w2;
  long long n = -1, t = -1;
  if (!(is >> w1 >> n >> w2 >> t) || w1 != "nodes" || w2 != "triangles" || n < 0 || t < 0) {
    throw MeshError("mesh header must read 'nodes N triangles T'");
  }
  Mesh mesh;
  mesh.nodes.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    double x = 0, y = 0;
    std::string tag;
    if (!(is >> x >> y >> tag)) throw MeshError("truncated node list at node " + std::to_string(i));
    mesh.nodes.emplace_back(x, y);
    mesh.node_tags.push_back(parse_tag(tag));
  }
  for (long long k = 0; k < t; ++k) {
    Triangle tri{};
    if (!(is >> tri[0] >> tri[1] >> tri[2])) {
      throw MeshError("truncated triangle list at triangle " + std::to_string(k));
    }
    mesh.triangles.push_back(tri);
  }
  finalize_mesh(mesh);
  return mesh;
}

void write_nodal_csv(std::ostream& os, const Mesh& mesh, std::span<const double> values,
                     const std::string& name) {
  if (values.size() != mesh.size()) throw MeshError("nodal field size mismatch");
  os.precision(17);
  os << "x1,x2," << name << '\n';
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    os << mesh.nodes[i].x() << ',' << mesh.nodes[i].y() << ',' << values[i] << '\n';
  }
}

void write_obj(std::ostream& os, const Mesh& mesh, std::span<const double> height) {
  if (height.size() != mesh.size()) throw MeshError("nodal field size mismatch");
  os.precision(17);
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    os << "v " << mesh.nodes[i].x() << ' ' << mesh.nodes[i].y() << ' ' << height[i] << '\n';
  }
  for (const Triangle& t : mesh.triangles) {
    os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
}

}  // namespace hsurf
