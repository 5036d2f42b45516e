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

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hsurf/geometry.hpp"

namespace hsurf {

enum class NodeTag { Interior, Free, Dirichlet, Corner };
enum class EdgeTag { Dirichlet, Free };

const char* tag_name(NodeTag t);
NodeTag parse_tag(const std::string& s);

struct BoundaryEdge {
  int a = 0, b = 0;
  EdgeTag tag = EdgeTag::Dirichlet;
};

using Triangle = std::array<int, 3>;

struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<Triangle> triangles;  // counter-clockwise
  std::vector<NodeTag> node_tags;
  std::vector<BoundaryEdge> boundary_edges;
  // Nodes along the support arc ordered by increasing x1, corners included.
  std::vector<int> free_chain;
  int corner1 = -1;
  int corner2 = -1;
  double h_max = 0.0;

  std::size_t size() const { return nodes.size(); }
  // Dirichlet or corner: the height is prescribed.
  bool fixed(int i) const {
    return node_tags[static_cast<std::size_t>(i)] == NodeTag::Dirichlet ||
           node_tags[static_cast<std::size_t>(i)] == NodeTag::Corner;
  }
  bool free_node(int i) const { return node_tags[static_cast<std::size_t>(i)] == NodeTag::Free; }
  double signed_area(int t) const;
  double total_area() const;
  std::size_t count(NodeTag t) const;
};

// Shorter: each quad is cut along its shorter diagonal (ties take the
// (i,j)-(i+1,j+1) one). Uniform: every quad takes the (i,j)-(i+1,j+1) cut,
// which keeps the grid pattern translation invariant.
enum class DiagonalRule { Shorter, Uniform };
DiagonalRule parse_diagonal_rule(const std::string& s);
const char* diagonal_rule_name(DiagonalRule r);

// (n+1) x (m+1) transfinite grid between x2 = g and x2 = u. End columns
// where u = g collapse to the corner node. Throws MeshError on a degenerate
// band or n, m < 1.
Mesh generate_band_mesh(const DomainSpec& domain, int n, int m,
                        DiagonalRule rule = DiagonalRule::Shorter);

// Rebuilds boundary edges, the free chain, corners and h_max from nodes,
// triangles and node tags. Throws MeshError when the tags are inconsistent
// or a triangle is not positively oriented.
void finalize_mesh(Mesh& mesh);

// Node -> incident triangles and node -> neighbouring nodes (sorted).
std::vector<std::vector<int>> node_triangles(const Mesh& mesh);
std::vector<std::vector<int>> node_neighbors(const Mesh& mesh);

// Text format: "nodes N triangles T", N lines "x1 x2 tag", T lines "i j k".
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

// CSV with header "x1,x2,<name>".
void write_nodal_csv(std::ostream& os, const Mesh& mesh, std::span<const double> values,
                     const std::string& name);
// OBJ surface "v x1 x2 z" and 1-based "f i j k".
void write_obj(std::ostream& os, const Mesh& mesh, std::span<const double> height);

}  // namespace hsurf
