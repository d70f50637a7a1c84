#pragma once

#include <array>
#include <map>
#include <utility>
#include <vector>

#include "hexforge/geometry.hpp"
#include "hexforge/hexgrid.hpp"

namespace hexforge {

struct FaceNormalsResult {
  std::vector<Vec3> normals;      // unit, consistently oriented, by face id
  std::vector<int> flippedFaces;  // faces whose winding was repaired
};

/// Unit normal of each face's fitted plane, oriented consistently by
/// adjacency propagation from face 0 (whose winding normal is kept).
/// Faces wound against their neighbors are flipped and reported.
FaceNormalsResult face_normals(const HexMesh& mesh);

/// Averaged offset directions: per edge the mean of its 1-2 face normals,
/// per vertex the mean over all its incident faces, both re-normalized to
/// unit length. Throws OppositeNormals when an average nearly cancels.
struct OffsetField {
  double wallHeight = 0.0;  // m
  std::vector<Vec3> faceNormals;
  std::map<std::pair<int, int>, Vec3> edgeNormals;  // key (a,b), a < b
  std::vector<Vec3> vertexNormals;                  // by vertex id
};

OffsetField averaged_offsets(const HexMesh& mesh,
                             const std::vector<Vec3>& faceNormals,
                             double wallHeight);

/// Wall-mating mismatch at a vertex: the max over its incident edges of
/// | h*n_edge - h*n_vertex |, both offset vectors anchored at the vertex.
double deviation_error(int vertex, const HexMesh& mesh,
                       const OffsetField& offsets);

struct DeviationReport {
  std::vector<double> perVertex;  // m
  double maxError = 0.0;          // m
};

DeviationReport deviation_report(const HexMesh& mesh,
                                 const OffsetField& offsets);

struct FastenerMarker {
  bool onJoint = false;  // else on a panel wall
  int ownerId = -1;      // joint vertex id or panel face id
  Vec3 center = Vec3::Zero();
  Vec3 axis = Vec3::UnitZ();  // unit, perpendicular to the mating wall
  double diameter = 0.0;      // m
};

/// A planar hexagonal panel extruded with one wall quad per edge. Wall
/// corners use the per-vertex averaged offsets so adjacent panels mate.
struct PanelBox {
  int faceIndex = -1;
  std::vector<int> topVertexIds;
  std::vector<Vec3> top;                    // planar hexagon, ring order
  std::vector<std::array<Vec3, 4>> walls;   // [a, b, b+h*nb, a+h*na]
  double thickness = 0.0;                   // m
  std::vector<FastenerMarker> markers;
};

/// One box per face, outward winding. Throws SelfIntersectingWall when an
/// offset flips a wall quad (wall height too large for the curvature).
std::vector<PanelBox> build_panel_boxes(const HexMesh& mesh,
                                        const OffsetField& offsets,
                                        double thickness);

struct HoleSpec {
  double diameter = 0.006;  // m
};

/// Printable connector at a valence-3 vertex: apex at the vertex, base
/// points proportioned along its three edges.
struct Joint {
  int vertex = -1;
  Vec3 apex = Vec3::Zero();
  std::array<Vec3, 3> base{};
  Vec3 axis = Vec3::UnitZ();  // vertex offset direction
  double thickness = 0.0;     // m
  std::vector<FastenerMarker> markers;
};

struct JointBuildResult {
  std::vector<Joint> joints;
  std::vector<int> degenerateVertices;  // flat corners, skipped
};

/// Base point k sits at v + t*(w_k - v) on edge (v, w_k). Flat corners
/// (pyramid volume under 1e-12 m^3) are flagged and skipped. Each joint
/// carries one marker per incident edge, axis perpendicular to that
/// edge's wall plane, mirrored onto the owning panels.
JointBuildResult build_joints(const HexMesh& mesh, const OffsetField& offsets,
                              double jointProportion, double thickness,
                              const HoleSpec& holeSpec);

struct FabricateSettings {
  double wallHeight = 0.10;      // m
  double thickness = 0.012;      // m
  double jointProportion = 0.25;
  double holeDiameter = 0.006;   // m
};

struct FabricationModel {
  std::vector<PanelBox> panels;
  std::vector<Joint> joints;
  std::vector<int> degenerateJointVertices;
  DeviationReport deviation;
  std::vector<FastenerMarker> fasteners;  // every marker, panels then joints
  std::vector<int> flippedFaces;
};

/// Full fabrication pass: orientation, offsets, panels, joints, report.
FabricationModel build_fabrication_model(const HexMesh& mesh,
                                         const FabricateSettings& settings);

/// Wall quad of edge (a, b) listed in that direction:
/// [pa, pb, pb + h*n_b, pa + h*n_a].
std::array<Vec3, 4> wall_quad(const HexMesh& mesh, const OffsetField& offsets,
                              int a, int b);

}  // namespace hexforge
