#include "hexforge/hexgrid.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "hexforge/errors.hpp"

namespace hexforge {

TriGrid subdivide_triangle(const Vec3& A, const Vec3& B, const Vec3& C, int n) {
  if (n < 3 || n % 3 != 0) throw NotFactorOfThree(n);
  const double area = 0.5 * (B - A).cross(C - A).norm();
  if (area < 1e-12) throw DegenerateTriangle("triangle area below 1e-12 m^2");

  TriGrid grid;
  grid.corners = {A, B, C};
  grid.subdivision = n;
  grid.nodes.reserve(static_cast<std::size_t>((n + 1) * (n + 2) / 2));
  const Vec3 eu = (B - A) / n;
  const Vec3 ev = (C - A) / n;
  for (int u = 0; u <= n; ++u)
    for (int v = 0; v <= n - u; ++v)
      grid.nodes.push_back({{u, v}, A + u * eu + v * ev});
  return grid;
}

std::array<LatticeCoord, 6> hex_neighbors(int u, int v) {
  return {{{u, v - 1},
           {u + 1, v - 1},
           {u + 1, v},
           {u, v + 1},
           {u - 1, v + 1},
           {u - 1, v}}};
}

namespace {

void check_grid(const TriGrid& grid) {
  const int n = grid.subdivision;
  if (n < 3 || n % 3 != 0) throw InvalidGrid("subdivision not a multiple of 3");
  if (grid.nodes.size() != static_cast<std::size_t>((n + 1) * (n + 2) / 2))
    throw InvalidGrid("node count does not match subdivision");

  const Vec3& A = grid.corners[0];
  Vec3 normal = (grid.corners[1] - A).cross(grid.corners[2] - A);
  const double nn = normal.norm();
  if (nn < 1e-24) throw InvalidGrid("degenerate corner triangle");
  normal /= nn;
  const double edge = (grid.corners[1] - A).norm() / n;

  std::size_t k = 0;
  for (int u = 0; u <= n; ++u)
    for (int v = 0; v <= n - u; ++v, ++k) {
      const GridNode& node = grid.nodes[k];
      if (node.coord.u != u || node.coord.v != v)
        throw InvalidGrid("nodes not in row-major (u,v) order");
      if (std::abs(normal.dot(node.position - A)) >= 1e-12 * edge * n)
        throw InvalidGrid("lattice node off the base plane");
    }
  // equilateral base: all lattice steps share one length
  const double du = (grid.position(1, 0) - grid.position(0, 0)).norm();
  const double dv = (grid.position(0, 1) - grid.position(0, 0)).norm();
  const double dw = (grid.position(0, 1) - grid.position(1, 0)).norm();
  if (std::abs(du - dv) > 1e-9 * du || std::abs(du - dw) > 1e-9 * du)
    throw InvalidGrid("lattice neighbor edges are not equal length");
}

}  // namespace

HexMesh build_hex_mesh(const TriGrid& grid, BuildStats* stats) {
  check_grid(grid);
  const int n = grid.subdivision;

  HexMesh mesh;
  mesh.subdivision = n;
  std::map<LatticeCoord, int> vertexId;
  const auto intern = [&](const LatticeCoord& c) {
    auto [it, inserted] = vertexId.try_emplace(c, static_cast<int>(mesh.vertexPositions.size()));
    if (inserted) {
      mesh.vertexPositions.push_back(grid.position(c.u, c.v));
      mesh.vertexParams.push_back(c);
    }
    return it->second;
  };

  // Panel centers sit every third lattice node of the rows u = 1, 2 (mod 3);
  // rows at multiples of 3 carry none. This keeps the hexagons disjoint and
  // every interior face adjacent to exactly three others.
  long bodyCount = 0;
  int faceIndex = 0;
  // edge (vertex pair) -> owning faces, for the adjacency graph
  std::map<std::pair<int, int>, std::vector<int>> edgeFaces;
  int cols = n;
  for (int u = 1; u < n; ++u) {
    --cols;  // each upper row has one cell less
    if (u % 3 == 0) continue;
    for (int v = u % 3; v < cols; v += 3) {
      ++bodyCount;
      const auto ring = hex_neighbors(u, v);
      std::vector<int> face(6);
      for (int k = 0; k < 6; ++k) face[k] = intern(ring[k]);
      for (int k = 0; k < 6; ++k) {
        const int a = face[k], b = face[(k + 1) % 6];
        edgeFaces[{std::min(a, b), std::max(a, b)}].push_back(faceIndex);
      }
      mesh.faceMap.emplace(faceIndex, std::move(face));
      mesh.faceCenters.emplace(faceIndex, LatticeCoord{u, v});
      ++faceIndex;
    }
  }

  for (const auto& [face, _] : mesh.faceMap) mesh.adjacency[face] = {};
  for (const auto& [edge, faces] : edgeFaces) {
    if (faces.size() < 2) continue;
    for (std::size_t i = 0; i < faces.size(); ++i)
      for (std::size_t j = i + 1; j < faces.size(); ++j) {
        mesh.adjacency[faces[i]].push_back(faces[j]);
        mesh.adjacency[faces[j]].push_back(faces[i]);
      }
  }
  for (auto& [_, neighbors] : mesh.adjacency) {
    std::sort(neighbors.begin(), neighbors.end());
    neighbors.erase(std::unique(neighbors.begin(), neighbors.end()),
                    neighbors.end());
  }

  if (stats) stats->loopBodyExecutions = bodyCount;
  return mesh;
}

std::vector<MeshEdge> mesh_edges(const HexMesh& mesh) {
  std::map<std::pair<int, int>, std::vector<int>> edgeFaces;
  for (const auto& [face, ring] : mesh.faceMap) {
    const std::size_t k = ring.size();
    for (std::size_t i = 0; i < k; ++i) {
      const int a = ring[i], b = ring[(i + 1) % k];
      edgeFaces[{std::min(a, b), std::max(a, b)}].push_back(face);
    }
  }
  std::vector<MeshEdge> edges;
  edges.reserve(edgeFaces.size());
  for (auto& [key, faces] : edgeFaces) {
    std::sort(faces.begin(), faces.end());
    faces.erase(std::unique(faces.begin(), faces.end()), faces.end());
    edges.push_back({key.first, key.second, std::move(faces)});
  }
  return edges;
}

std::vector<std::vector<int>> vertex_faces(const HexMesh& mesh) {
  std::vector<std::vector<int>> result(mesh.vertexCount());
  for (const auto& [face, ring] : mesh.faceMap)
    for (int v : ring) result[static_cast<std::size_t>(v)].push_back(face);
  for (auto& faces : result) std::sort(faces.begin(), faces.end());
  return result;
}

std::vector<std::vector<int>> vertex_neighbors(const HexMesh& mesh) {
  std::vector<std::set<int>> sets(mesh.vertexCount());
  for (const auto& [_, ring] : mesh.faceMap) {
    const std::size_t k = ring.size();
    for (std::size_t i = 0; i < k; ++i) {
      const int a = ring[i], b = ring[(i + 1) % k];
      sets[static_cast<std::size_t>(a)].insert(b);
      sets[static_cast<std::size_t>(b)].insert(a);
    }
  }
  std::vector<std::vector<int>> result(mesh.vertexCount());
  for (std::size_t i = 0; i < sets.size(); ++i)
    result[i].assign(sets[i].begin(), sets[i].end());
  return result;
}

namespace {

bool lattice_neighbors(const LatticeCoord& a, const LatticeCoord& b) {
  const int du = b.u - a.u, dv = b.v - a.v;
  for (const auto& [eu, ev] : {std::pair{1, 0}, {0, 1}, {-1, 1},
                               {-1, 0}, {0, -1}, {1, -1}})
    if (du == eu && dv == ev) return true;
  return false;
}

}  // namespace

std::vector<Violation> validate_hex_mesh(const HexMesh& mesh) {
  std::vector<Violation> report;

  int expected = 0;
  for (const auto& [face, _] : mesh.faceMap)
    if (face != expected++) {
      report.push_back({"non-contiguous face indices", face, -1,
                        "expected face index " + std::to_string(expected - 1)});
      break;
    }

  const int vcount = static_cast<int>(mesh.vertexCount());
  for (const auto& [face, ring] : mesh.faceMap) {
    if (ring.size() != 6) {
      report.push_back({"face must have exactly 6 vertices", face, -1,
                        "has " + std::to_string(ring.size())});
      continue;
    }
    bool inRange = true;
    for (int v : ring)
      if (v < 0 || v >= vcount) {
        report.push_back({"face references missing vertex", face, v, ""});
        inRange = false;
      }
    if (!inRange) continue;
    std::set<int> unique(ring.begin(), ring.end());
    if (unique.size() != 6)
      report.push_back({"face vertices must be distinct", face, -1, ""});
    for (std::size_t i = 0; i < 6; ++i) {
      const int a = ring[i], b = ring[(i + 1) % 6];
      if (!lattice_neighbors(mesh.vertexParams[static_cast<std::size_t>(a)],
                             mesh.vertexParams[static_cast<std::size_t>(b)]))
        report.push_back({"consecutive face vertices must be lattice neighbors",
                          face, a, "pair " + std::to_string(a) + "," +
                                       std::to_string(b)});
    }
  }

  // adjacency must mirror the shared-lattice-edge relation exactly
  std::map<std::pair<int, int>, bool> expectedEdges;
  for (const MeshEdge& e : mesh_edges(mesh))
    for (std::size_t i = 0; i < e.faces.size(); ++i)
      for (std::size_t j = i + 1; j < e.faces.size(); ++j)
        expectedEdges[{e.faces[i], e.faces[j]}] = true;

  std::map<std::pair<int, int>, bool> actualEdges;
  for (const auto& [face, neighbors] : mesh.adjacency)
    for (int g : neighbors)
      actualEdges[{std::min(face, g), std::max(face, g)}] = true;

  for (const auto& [edge, _] : expectedEdges)
    if (!actualEdges.count(edge))
      report.push_back({"adjacency missing shared-edge pair", edge.first, -1,
                        "faces " + std::to_string(edge.first) + "," +
                            std::to_string(edge.second)});
  for (const auto& [edge, _] : actualEdges)
    if (!expectedEdges.count(edge))
      report.push_back({"adjacency pair without a shared edge", edge.first, -1,
                        "faces " + std::to_string(edge.first) + "," +
                            std::to_string(edge.second)});

  for (const auto& [face, neighbors] : mesh.adjacency) {
    if (neighbors.size() > 3)
      report.push_back({"face degree exceeds 3", face, -1,
                        "degree " + std::to_string(neighbors.size())});
    else if (neighbors.size() != 3 && mesh.subdivision > 0 &&
             mesh.faceMap.count(face) && !mesh.isBoundaryFace(face))
      report.push_back({"interior face degree must be 3", face, -1,
                        "degree " + std::to_string(neighbors.size())});
  }

  return report;
}

}  // namespace hexforge
