#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hexforge/geometry.hpp"
#include "hexforge/hexgrid.hpp"

namespace hexforge {

/// Plain polygon soup as stored in the text mesh format.
struct PolyMesh {
  std::vector<Vec3> positions;
  std::vector<std::vector<int>> faces;  // 0-based in memory, 1-based on disk
};

/// Wavefront-style text mesh: "v x y z" lines (9 decimal digits) followed
/// by "f i j k ..." lines with 1-based indices. Output is byte-stable.
void export_mesh(const PolyMesh& mesh, const std::filesystem::path& path);

/// Throws IoError on missing files, MalformedMesh (line-annotated) on
/// bad records, zero indices, or out-of-range references.
PolyMesh import_mesh(const std::filesystem::path& path);

/// JSON sidecar carrying what the text format cannot: lattice (u,v)
/// parameters, face centers, the adjacency graph {nodes, edges}, the
/// subdivision count, and (optionally) the base-triangle corners.
void export_mesh_meta(const HexMesh& mesh,
                      const std::optional<std::array<Vec3, 3>>& corners,
                      const std::filesystem::path& path);

struct HexMeshFile {
  HexMesh mesh;
  std::optional<std::array<Vec3, 3>> corners;
};

/// Rebuild a HexMesh from a text mesh plus its sidecar.
HexMeshFile import_hex_mesh(const std::filesystem::path& objPath,
                            const std::filesystem::path& metaPath);

void export_hex_mesh(const HexMesh& mesh, const std::filesystem::path& path);

/// Conventional sidecar path: "<mesh>.meta.json" next to the mesh file.
std::filesystem::path meta_path_for(const std::filesystem::path& objPath);

}  // namespace hexforge
