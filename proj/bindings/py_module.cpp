#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "hexforge/errors.hpp"
#include "hexforge/fabricate.hpp"
#include "hexforge/hexgrid.hpp"
#include "hexforge/meshio.hpp"
#include "hexforge/physics.hpp"
#include "hexforge/pipeline.hpp"
#include "hexforge/planarize.hpp"

namespace py = pybind11;
using namespace hexforge;

namespace {

std::vector<std::vector<int>> faces_of(const HexMesh& mesh) {
  std::vector<std::vector<int>> faces;
  faces.reserve(mesh.faceCount());
  for (const auto& [_, ring] : mesh.faceMap) faces.push_back(ring);
  return faces;
}

Eigen::MatrixXd positions_of(const std::vector<Vec3>& pts) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  return m;
}

std::vector<Vec3> to_points(const Eigen::MatrixXd& m) {
  if (m.cols() != 3) throw std::invalid_argument("expected an N x 3 array");
  std::vector<Vec3> pts(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) pts[static_cast<std::size_t>(i)] = m.row(i);
  return pts;
}

}  // namespace

PYBIND11_MODULE(hexforge_py, m) {
  m.doc() = "planar hexagonal panel shells: grid, form-finding, "
            "planarization and fabrication geometry";

  py::class_<TriGrid>(m, "TriGrid")
      .def_readonly("subdivision", &TriGrid::subdivision)
      .def_property_readonly(
          "node_count", [](const TriGrid& g) { return g.nodes.size(); })
      .def("contains", &TriGrid::contains, py::arg("u"), py::arg("v"))
      .def("position", &TriGrid::position, py::arg("u"), py::arg("v"));

  py::class_<HexMesh>(m, "HexMesh")
      .def_readonly("subdivision", &HexMesh::subdivision)
      .def_property_readonly("face_count", &HexMesh::faceCount)
      .def_property_readonly("vertex_count", &HexMesh::vertexCount)
      .def_property_readonly(
          "positions",
          [](const HexMesh& mesh) { return positions_of(mesh.vertexPositions); })
      .def_property_readonly("faces", &faces_of)
      .def_property_readonly(
          "vertex_params",
          [](const HexMesh& mesh) {
            std::vector<std::pair<int, int>> out;
            for (const LatticeCoord& c : mesh.vertexParams) out.emplace_back(c.u, c.v);
            return out;
          })
      .def_property_readonly("adjacency_edges", [](const HexMesh& mesh) {
        std::vector<std::pair<int, int>> out;
        for (const auto& [f, neighbors] : mesh.adjacency)
          for (int g : neighbors)
            if (f < g) out.emplace_back(f, g);
        return out;
      });

  m.def("subdivide_triangle", &subdivide_triangle, py::arg("a"), py::arg("b"),
        py::arg("c"), py::arg("n"));
  m.def("hex_neighbors", [](int u, int v) {
    std::vector<std::pair<int, int>> out;
    for (const LatticeCoord& c : hex_neighbors(u, v)) out.emplace_back(c.u, c.v);
    return out;
  });
  m.def("build_hex_mesh",
        [](const TriGrid& grid) { return build_hex_mesh(grid, nullptr); });
  m.def("validate_hex_mesh", [](const HexMesh& mesh) {
    std::vector<std::string> out;
    for (const Violation& v : validate_hex_mesh(mesh))
      out.push_back(v.invariant + (v.detail.empty() ? "" : ": " + v.detail));
    return out;
  });

  m.def("spring_force",
        [](double stiffness, double restLength, const Vec3& x1, const Vec3& x2) {
          Spring s;
          s.stiffness = stiffness;
          s.restLength = restLength;
          return spring_force(s, x1, x2);
        },
        py::arg("stiffness"), py::arg("rest_length"), py::arg("x1"), py::arg("x2"));

  m.def("form_find",
        [](const HexMesh& mesh, const std::string& configJson) {
          const PipelineConfig config = parse_config(configJson);
          std::vector<int> anchors;
          switch (config.physics.anchors.kind) {
            case AnchorSpec::Kind::Boundary:
              anchors = boundary_anchor_vertices(mesh);
              break;
            case AnchorSpec::Kind::Explicit:
              anchors = config.physics.anchors.indices;
              break;
            case AnchorSpec::Kind::Corners:
              throw Error("form_find needs \"boundary\" or explicit anchors");
          }
          SpringSystem sys = build_spring_system(mesh, config.physics.defaults,
                                                 anchors, config.physics.params);
          const EquilibriumResult eq = simulate_to_equilibrium(sys);
          return py::make_tuple(positions_of(eq.finalPositions), eq.steps,
                                eq.maxResidualForce);
        },
        py::arg("mesh"), py::arg("config_json"));

  m.def("fit_plane", [](const Eigen::MatrixXd& pts) {
    const Plane p = fit_plane(to_points(pts));
    return py::make_tuple(p.normal, p.offset);
  });
  m.def("planarity_error",
        [](const std::vector<int>& face, const Eigen::MatrixXd& pts) {
          return planarity_error(face, to_points(pts));
        });
  m.def("displacement_objective",
        [](const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q) {
          return displacement_objective(to_points(P), to_points(Q));
        });
  m.def("planarize",
        [](const Eigen::MatrixXd& P, const std::vector<std::vector<int>>& faces,
           double tolerance, int maxIterations) {
          PlanarizeSettings settings;
          settings.planarityTolerance = tolerance;
          settings.maxIterations = maxIterations;
          const PlanarizeResult r = planarize(to_points(P), faces, settings);
          return py::make_tuple(positions_of(r.Q), r.iterations,
                                r.maxPlanarityError);
        },
        py::arg("control_points"), py::arg("faces"), py::arg("tolerance") = 0.0,
        py::arg("max_iterations") = 500);

  m.def("deviation_report", [](const HexMesh& mesh, double wallHeight) {
    const FaceNormalsResult normals = face_normals(mesh);
    const OffsetField offsets = averaged_offsets(mesh, normals.normals, wallHeight);
    const DeviationReport report = deviation_report(mesh, offsets);
    return py::make_tuple(report.perVertex, report.maxError);
  });

  m.def("load_config",
        [](const std::filesystem::path& p) { return config_to_json(load_config(p)); });
  m.def("run_pipeline",
        [](const std::filesystem::path& configPath, const std::filesystem::path& outDir) {
          const PipelineConfig config = load_config(configPath);
          const RunReport report = run_pipeline(
              config, outDir.empty() ? std::filesystem::path(config.outputDirectory)
                                     : outDir);
          return report_to_json(report);
        },
        py::arg("config_path"), py::arg("out_dir") = std::filesystem::path());

  py::register_exception<NotFactorOfThree>(m, "NotFactorOfThreeError");
  py::register_exception<Error>(m, "HexforgeError");
}
