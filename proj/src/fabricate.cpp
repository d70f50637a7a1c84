#include "hexforge/fabricate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "hexforge/errors.hpp"
#include "hexforge/planarize.hpp"

namespace hexforge {

namespace {

std::vector<Vec3> face_points(const HexMesh& mesh, const std::vector<int>& ring) {
  std::vector<Vec3> pts;
  pts.reserve(ring.size());
  for (int v : ring) pts.push_back(mesh.vertexPositions[static_cast<std::size_t>(v)]);
  return pts;
}

// winding normal of a face, from its fitted plane signed by Newell
Vec3 winding_normal(const HexMesh& mesh, const std::vector<int>& ring) {
  const std::vector<Vec3> pts = face_points(mesh, ring);
  Vec3 n = fit_plane(pts).normal;
  if (n.dot(polygon_normal(pts)) < 0.0) n = -n;
  return n;
}

// directed occurrence of edge (a -> b) in a ring
bool ring_has_directed(const std::vector<int>& ring, int a, int b) {
  const std::size_t k = ring.size();
  for (std::size_t i = 0; i < k; ++i)
    if (ring[i] == a && ring[(i + 1) % k] == b) return true;
  return false;
}

}  // namespace

FaceNormalsResult face_normals(const HexMesh& mesh) {
  FaceNormalsResult result;
  if (mesh.faceMap.empty()) return result;

  // flipped[f]: use the ring reversed; consistent orientation demands a
  // shared edge run in opposite directions by its two faces
  std::map<int, bool> flipped;
  std::map<int, bool> visited;
  std::map<int, std::vector<int>> rings;
  for (const auto& [f, ring] : mesh.faceMap) rings[f] = ring;

  const int seed = mesh.faceMap.begin()->first;
  flipped[seed] = false;
  visited[seed] = true;
  std::deque<int> queue{seed};
  while (!queue.empty()) {
    const int f = queue.front();
    queue.pop_front();
    for (int g : mesh.adjacency.at(f)) {
      // find one shared directed edge between f and g
      const std::vector<int>& rf = rings[f];
      const std::vector<int>& rg = rings[g];
      bool sameDirection = false, found = false;
      const std::size_t kf = rf.size();
      for (std::size_t i = 0; i < kf && !found; ++i) {
        const int a = rf[i], b = rf[(i + 1) % kf];
        if (ring_has_directed(rg, a, b)) {
          sameDirection = true;
          found = true;
        } else if (ring_has_directed(rg, b, a)) {
          sameDirection = false;
          found = true;
        }
      }
      if (!found) continue;
      // effective direction flips with each face's assigned flip state
      const bool needFlip = sameDirection != flipped[f];
      if (!visited.count(g)) {
        visited[g] = true;
        flipped[g] = needFlip;
        queue.push_back(g);
      } else if (flipped[g] != needFlip) {
        throw OrientationConflict("face orientation propagation hit a contradiction at face " +
                                  std::to_string(g));
      }
    }
  }

  result.normals.resize(mesh.faceCount());
  for (const auto& [f, ring] : mesh.faceMap) {
    if (!visited.count(f))
      throw OrientationConflict("face " + std::to_string(f) +
                                " is disconnected from the seed face");
    std::vector<int> oriented = ring;
    if (flipped[f]) {
      std::reverse(oriented.begin(), oriented.end());
      result.flippedFaces.push_back(f);
    }
    result.normals[static_cast<std::size_t>(f)] = winding_normal(mesh, oriented);
  }
  std::sort(result.flippedFaces.begin(), result.flippedFaces.end());
  return result;
}

OffsetField averaged_offsets(const HexMesh& mesh,
                             const std::vector<Vec3>& faceNormals,
                             double wallHeight) {
  OffsetField field;
  field.wallHeight = wallHeight;
  field.faceNormals = faceNormals;

  const auto unitAverage = [](const std::vector<Vec3>& normals) {
    Vec3 avg = Vec3::Zero();
    for (const Vec3& n : normals) avg += n;
    avg /= static_cast<double>(normals.size());
    const double len = avg.norm();
    if (len < 1e-9)
      throw OppositeNormals("averaged normal vanishes (opposing face normals)");
    return Vec3(avg / len);
  };

  for (const MeshEdge& e : mesh_edges(mesh)) {
    std::vector<Vec3> ns;
    for (int f : e.faces) ns.push_back(faceNormals[static_cast<std::size_t>(f)]);
    field.edgeNormals[{e.a, e.b}] = unitAverage(ns);
  }

  const auto faceOf = vertex_faces(mesh);
  field.vertexNormals.resize(mesh.vertexCount());
  for (std::size_t v = 0; v < mesh.vertexCount(); ++v) {
    std::vector<Vec3> ns;
    for (int f : faceOf[v]) ns.push_back(faceNormals[static_cast<std::size_t>(f)]);
    if (ns.empty()) {
      field.vertexNormals[v] = Vec3::UnitZ();  // unreferenced vertex
      continue;
    }
    field.vertexNormals[v] = unitAverage(ns);
  }
  return field;
}

double deviation_error(int vertex, const HexMesh& mesh,
                       const OffsetField& offsets) {
  const double h = offsets.wallHeight;
  const Vec3& vertexDir = offsets.vertexNormals[static_cast<std::size_t>(vertex)];
  double worst = 0.0;
  for (const auto& [edge, edgeDir] : offsets.edgeNormals) {
    if (edge.first != vertex && edge.second != vertex) continue;
    worst = std::max(worst, (h * edgeDir - h * vertexDir).norm());
  }
  return worst;
}

DeviationReport deviation_report(const HexMesh& mesh,
                                 const OffsetField& offsets) {
  DeviationReport report;
  report.perVertex.resize(mesh.vertexCount());
  for (std::size_t v = 0; v < mesh.vertexCount(); ++v) {
    report.perVertex[v] = deviation_error(static_cast<int>(v), mesh, offsets);
    report.maxError = std::max(report.maxError, report.perVertex[v]);
  }
  return report;
}

std::array<Vec3, 4> wall_quad(const HexMesh& mesh, const OffsetField& offsets,
                              int a, int b) {
  const Vec3& pa = mesh.vertexPositions[static_cast<std::size_t>(a)];
  const Vec3& pb = mesh.vertexPositions[static_cast<std::size_t>(b)];
  const double h = offsets.wallHeight;
  return {pa, pb, pb + h * offsets.vertexNormals[static_cast<std::size_t>(b)],
          pa + h * offsets.vertexNormals[static_cast<std::size_t>(a)]};
}

std::vector<PanelBox> build_panel_boxes(const HexMesh& mesh,
                                        const OffsetField& offsets,
                                        double thickness) {
  if (offsets.wallHeight <= 0.0 || thickness <= 0.0)
    throw Error("wall height and thickness must be positive");

  std::vector<PanelBox> panels;
  panels.reserve(mesh.faceCount());
  for (const auto& [f, ring] : mesh.faceMap) {
    PanelBox box;
    box.faceIndex = f;
    box.topVertexIds = ring;
    box.top = face_points(mesh, ring);
    box.thickness = thickness;
    const Vec3& fn = offsets.faceNormals[static_cast<std::size_t>(f)];

    const std::size_t k = ring.size();
    for (std::size_t i = 0; i < k; ++i) {
      const int a = ring[i], b = ring[(i + 1) % k];
      const auto quad = wall_quad(mesh, offsets, a, b);
      // a healthy wall faces away from the panel: its normal must agree
      // with (edge direction x face normal)
      const Vec3 outward = (quad[1] - quad[0]).cross(fn);
      const Vec3 quadNormal =
          polygon_normal({quad[0], quad[1], quad[2], quad[3]});
      if (quadNormal.dot(outward) <= 0.0)
        throw SelfIntersectingWall(
            "offset flips the wall on edge " + std::to_string(a) + "-" +
            std::to_string(b) + " of face " + std::to_string(f) +
            " (wall height too large for the local curvature)");
      box.walls.push_back(quad);
    }
    panels.push_back(std::move(box));
  }
  return panels;
}

namespace {

double pyramid_volume(const Vec3& apex, const std::array<Vec3, 3>& base) {
  return std::abs((base[1] - base[0]).cross(base[2] - base[0]).dot(apex - base[0])) / 6.0;
}

}  // namespace

JointBuildResult build_joints(const HexMesh& mesh, const OffsetField& offsets,
                              double jointProportion, double thickness,
                              const HoleSpec& holeSpec) {
  if (jointProportion <= 0.0 || jointProportion > 0.5)
    throw Error("joint proportion must lie in (0, 0.5]");

  JointBuildResult result;
  const auto neighbors = vertex_neighbors(mesh);

  for (std::size_t v = 0; v < neighbors.size(); ++v) {
    if (neighbors[v].size() != 3) continue;  // joints live at valence-3 corners
    const Vec3& apex = mesh.vertexPositions[v];
    Joint joint;
    joint.vertex = static_cast<int>(v);
    joint.apex = apex;
    joint.axis = offsets.vertexNormals[v];
    joint.thickness = thickness;
    for (int k = 0; k < 3; ++k) {
      const Vec3& w =
          mesh.vertexPositions[static_cast<std::size_t>(neighbors[v][static_cast<std::size_t>(k)])];
      joint.base[static_cast<std::size_t>(k)] = apex + jointProportion * (w - apex);
    }
    if (pyramid_volume(joint.apex, joint.base) < 1e-12) {
      result.degenerateVertices.push_back(static_cast<int>(v));
      continue;  // flat corner needs no joint elevation
    }

    // one fastener per incident edge, axis normal to that edge's wall
    for (int w : neighbors[v]) {
      const auto quad = wall_quad(mesh, offsets, static_cast<int>(v), w);
      const Plane wallPlane =
          fit_plane({quad[0], quad[1], quad[2], quad[3]});
      const Vec3 mid = apex + 0.5 * jointProportion *
                                  (mesh.vertexPositions[static_cast<std::size_t>(w)] - apex) +
                       0.5 * offsets.wallHeight * offsets.vertexNormals[v];
      const Vec3 center = mid - wallPlane.signedDistance(mid) * wallPlane.normal;

      FastenerMarker marker;
      marker.onJoint = true;
      marker.ownerId = static_cast<int>(v);
      marker.center = center;
      marker.axis = wallPlane.normal;
      marker.diameter = holeSpec.diameter;
      joint.markers.push_back(marker);  // panel copies attach later
    }
    result.joints.push_back(std::move(joint));
  }
  return result;
}

FabricationModel build_fabrication_model(const HexMesh& mesh,
                                         const FabricateSettings& settings) {
  FabricationModel model;
  FaceNormalsResult oriented = face_normals(mesh);
  model.flippedFaces = oriented.flippedFaces;
  const OffsetField offsets =
      averaged_offsets(mesh, oriented.normals, settings.wallHeight);
  model.deviation = deviation_report(mesh, offsets);
  model.panels = build_panel_boxes(mesh, offsets, settings.thickness);
  JointBuildResult joints =
      build_joints(mesh, offsets, settings.jointProportion, settings.thickness,
                   HoleSpec{settings.holeDiameter});
  model.joints = std::move(joints.joints);
  model.degenerateJointVertices = std::move(joints.degenerateVertices);

  // mirror each joint marker onto the panels owning the mating wall
  std::map<std::pair<int, int>, std::vector<int>> owners;
  for (const MeshEdge& e : mesh_edges(mesh)) owners[{e.a, e.b}] = e.faces;
  std::map<int, std::size_t> panelByFace;
  for (std::size_t i = 0; i < model.panels.size(); ++i)
    panelByFace[model.panels[i].faceIndex] = i;

  const auto vertexNeighbors = vertex_neighbors(mesh);
  for (const Joint& joint : model.joints) {
    const auto& around = vertexNeighbors[static_cast<std::size_t>(joint.vertex)];
    for (std::size_t k = 0; k < around.size(); ++k) {
      const FastenerMarker& jm = joint.markers[k];
      const std::pair<int, int> key{std::min(joint.vertex, around[k]),
                                    std::max(joint.vertex, around[k])};
      for (int f : owners.at(key)) {
        FastenerMarker pm = jm;
        pm.onJoint = false;
        pm.ownerId = f;
        model.panels[panelByFace.at(f)].markers.push_back(pm);
      }
    }
  }

  for (const PanelBox& panel : model.panels)
    model.fasteners.insert(model.fasteners.end(), panel.markers.begin(),
                           panel.markers.end());
  for (const Joint& joint : model.joints)
    model.fasteners.insert(model.fasteners.end(), joint.markers.begin(),
                           joint.markers.end());
  return model;
}

}  // namespace hexforge
