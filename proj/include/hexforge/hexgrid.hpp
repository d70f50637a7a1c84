#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hexforge/geometry.hpp"

namespace hexforge {

/// Integer (u, v) coordinates on the triangular lattice.
struct LatticeCoord {
  int u = 0;
  int v = 0;
  friend bool operator==(const LatticeCoord&, const LatticeCoord&) = default;
  friend auto operator<=>(const LatticeCoord&, const LatticeCoord&) = default;
};

struct GridNode {
  LatticeCoord coord;
  Vec3 position;
};

/// Equilateral triangle A,B,C subdivided into n segments per edge.
/// Nodes exist for every (u, v) with u >= 0, v >= 0, u + v <= n and sit at
/// A + (u/n)(B-A) + (v/n)(C-A).
struct TriGrid {
  std::array<Vec3, 3> corners;  // A, B, C
  int subdivision = 0;          // n, a multiple of 3
  std::vector<GridNode> nodes;  // row-major: u ascending, then v

  bool contains(int u, int v) const {
    return u >= 0 && v >= 0 && u + v <= subdivision;
  }
  /// Linear index of node (u, v); caller must check contains() first.
  int nodeIndex(int u, int v) const {
    const int n = subdivision;
    return u * (n + 1) - u * (u - 1) / 2 + v;
  }
  const Vec3& position(int u, int v) const {
    return nodes[static_cast<std::size_t>(nodeIndex(u, v))].position;
  }
};

/// Hexagonal faces carved out of a TriGrid plus their adjacency graph.
/// Vertices are compacted: only lattice nodes referenced by some face are
/// stored, keyed by dense mesh indices in first-use order.
struct HexMesh {
  int subdivision = 0;  // n of the source grid (0 when hand-built)
  std::vector<Vec3> vertexPositions;
  std::vector<LatticeCoord> vertexParams;        // lattice (u,v) per vertex
  std::map<int, std::vector<int>> faceMap;       // face -> cyclic vertex ids
  std::map<int, LatticeCoord> faceCenters;       // face -> lattice center
  std::map<int, std::vector<int>> adjacency;     // face -> sorted neighbors

  std::size_t faceCount() const { return faceMap.size(); }
  std::size_t vertexCount() const { return vertexPositions.size(); }

  bool isBoundaryVertex(int v) const {
    const LatticeCoord c = vertexParams[static_cast<std::size_t>(v)];
    return c.u == 0 || c.v == 0 || c.u + c.v == subdivision;
  }
  bool isBoundaryFace(int f) const {
    for (int v : faceMap.at(f))
      if (isBoundaryVertex(v)) return true;
    return false;
  }
};

/// Undirected mesh edge with the faces that use it (1 on the boundary, else 2).
struct MeshEdge {
  int a = 0, b = 0;        // vertex ids, a < b
  std::vector<int> faces;  // owning faces, ascending
};

/// All unique edges in (a, b) lexicographic order.
std::vector<MeshEdge> mesh_edges(const HexMesh& mesh);

/// vertex -> ascending list of faces incident to it.
std::vector<std::vector<int>> vertex_faces(const HexMesh& mesh);

/// vertex -> ascending list of vertices joined to it by a mesh edge.
std::vector<std::vector<int>> vertex_neighbors(const HexMesh& mesh);

/// Subdivide triangle ABC into an n-per-edge lattice.
/// Throws NotFactorOfThree unless n >= 3 and n % 3 == 0;
/// throws DegenerateTriangle when the triangle area is below 1e-12 m^2.
TriGrid subdivide_triangle(const Vec3& A, const Vec3& B, const Vec3& C, int n);

/// The six lattice neighbors of (u, v) in cyclic (counterclockwise) order.
std::array<LatticeCoord, 6> hex_neighbors(int u, int v);

struct BuildStats {
  long loopBodyExecutions = 0;  // inner-loop face emissions
};

/// Extract the hexagonal panel faces and their adjacency graph.
/// Centers sit on lattice nodes with u = v (mod 3) and v % 3 != 0, one
/// hexagon per accepted center, so each interior face touches exactly
/// three others. Throws InvalidGrid on an inconsistent TriGrid.
HexMesh build_hex_mesh(const TriGrid& grid, BuildStats* stats = nullptr);

struct Violation {
  std::string invariant;
  int face = -1;
  int vertex = -1;
  std::string detail;
};

/// Empty report iff all HexMesh invariants hold.
std::vector<Violation> validate_hex_mesh(const HexMesh& mesh);

}  // namespace hexforge
