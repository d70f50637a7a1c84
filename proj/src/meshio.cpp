#include "hexforge/meshio.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hexforge/errors.hpp"

namespace hexforge {

namespace {

std::string format_coord(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9f", x);
  return buf;
}

}  // namespace

void export_mesh(const PolyMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (const Vec3& p : mesh.positions)
    out << "v " << format_coord(p.x()) << ' ' << format_coord(p.y()) << ' '
        << format_coord(p.z()) << '\n';
  for (const auto& face : mesh.faces) {
    out << 'f';
    for (int v : face) out << ' ' << (v + 1);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

PolyMesh import_mesh(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());

  PolyMesh mesh;
  std::string line;
  long lineNo = 0;
  const auto fail = [&](const std::string& what) {
    throw MalformedMesh(path.string() + ":" + std::to_string(lineNo) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 p;
      if (!(ss >> p.x() >> p.y() >> p.z())) fail("bad vertex record");
      mesh.positions.push_back(p);
    } else if (tag == "f") {
      std::vector<int> face;
      long idx;
      while (ss >> idx) {
        if (idx == 0) fail("face references vertex 0 in a 1-based format");
        if (idx < 0 || idx > static_cast<long>(mesh.positions.size()))
          fail("face references vertex " + std::to_string(idx) +
               " out of range");
        face.push_back(static_cast<int>(idx - 1));
      }
      if (!ss.eof()) fail("bad face record");
      if (face.size() < 3) fail("face needs at least 3 vertices");
      mesh.faces.push_back(std::move(face));
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  return mesh;
}

void export_hex_mesh(const HexMesh& mesh, const std::filesystem::path& path) {
  PolyMesh poly;
  poly.positions = mesh.vertexPositions;
  for (const auto& [_, ring] : mesh.faceMap) poly.faces.push_back(ring);
  export_mesh(poly, path);
}

void export_mesh_meta(const HexMesh& mesh,
                      const std::optional<std::array<Vec3, 3>>& corners,
                      const std::filesystem::path& path) {
  nlohmann::json meta;
  meta["subdivision"] = mesh.subdivision;
  if (corners) {
    nlohmann::json cs = nlohmann::json::array();
    for (const Vec3& c : *corners) cs.push_back({c.x(), c.y(), c.z()});
    meta["corners"] = cs;
  }
  nlohmann::json params = nlohmann::json::array();
  for (const LatticeCoord& c : mesh.vertexParams) params.push_back({c.u, c.v});
  meta["vertexParams"] = params;
  nlohmann::json centers = nlohmann::json::array();
  for (const auto& [_, c] : mesh.faceCenters) centers.push_back({c.u, c.v});
  meta["faceCenters"] = centers;

  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& [f, _] : mesh.faceMap) nodes.push_back(f);
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [f, neighbors] : mesh.adjacency)
    for (int g : neighbors)
      if (f < g) edges.push_back({f, g});
  meta["graph"] = {{"nodes", nodes}, {"edges", edges}};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << meta.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

HexMeshFile import_hex_mesh(const std::filesystem::path& objPath,
                            const std::filesystem::path& metaPath) {
  const PolyMesh poly = import_mesh(objPath);

  std::ifstream in(metaPath, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + metaPath.string());
  nlohmann::json meta;
  try {
    in >> meta;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(metaPath.string() + ": " + e.what());
  }

  HexMeshFile result;
  HexMesh& mesh = result.mesh;
  mesh.subdivision = meta.at("subdivision").get<int>();
  mesh.vertexPositions = poly.positions;
  for (const auto& uv : meta.at("vertexParams"))
    mesh.vertexParams.push_back({uv.at(0).get<int>(), uv.at(1).get<int>()});
  if (mesh.vertexParams.size() != mesh.vertexPositions.size())
    throw MalformedMesh(metaPath.string() +
                        ": vertexParams count differs from the mesh");

  for (std::size_t f = 0; f < poly.faces.size(); ++f)
    mesh.faceMap.emplace(static_cast<int>(f), poly.faces[f]);
  const auto& centers = meta.at("faceCenters");
  for (std::size_t f = 0; f < centers.size(); ++f)
    mesh.faceCenters.emplace(static_cast<int>(f),
                             LatticeCoord{centers.at(f).at(0).get<int>(),
                                          centers.at(f).at(1).get<int>()});

  for (const auto& [f, _] : mesh.faceMap) mesh.adjacency[f] = {};
  for (const auto& edge : meta.at("graph").at("edges")) {
    const int f = edge.at(0).get<int>(), g = edge.at(1).get<int>();
    mesh.adjacency[f].push_back(g);
    mesh.adjacency[g].push_back(f);
  }
  for (auto& [_, neighbors] : mesh.adjacency)
    std::sort(neighbors.begin(), neighbors.end());

  if (meta.contains("corners")) {
    std::array<Vec3, 3> corners;
    for (int i = 0; i < 3; ++i) {
      const auto& c = meta["corners"].at(static_cast<std::size_t>(i));
      corners[static_cast<std::size_t>(i)] =
          Vec3(c.at(0).get<double>(), c.at(1).get<double>(), c.at(2).get<double>());
    }
    result.corners = corners;
  }
  return result;
}

std::filesystem::path meta_path_for(const std::filesystem::path& objPath) {
  std::filesystem::path p = objPath;
  p += ".meta.json";
  return p;
}

}  // namespace hexforge
