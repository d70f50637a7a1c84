#include "hexforge/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hexforge/errors.hpp"
#include "hexforge/meshio.hpp"

namespace hexforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  return obj.at(key).get<T>();
}

void require(bool ok, const std::string& invariant) {
  if (!ok) throw InvalidConfig(invariant);
}

}  // namespace

PipelineConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }

  PipelineConfig config;
  if (root.contains("grid")) {
    const json& g = root["grid"];
    config.grid.sideMeters = field_or(g, "sideMeters", config.grid.sideMeters);
    config.grid.subdivision = field_or(g, "subdivision", config.grid.subdivision);
  }
  if (root.contains("physics")) {
    const json& p = root["physics"];
    auto& d = config.physics.defaults;
    auto& s = config.physics.params;
    d.mass = field_or(p, "mass", d.mass);
    d.kStretch = field_or(p, "kStretch", d.kStretch);
    d.kShear = field_or(p, "kShear", d.kShear);
    d.kBend = field_or(p, "kBend", d.kBend);
    d.springDamping = field_or(p, "springDamping", d.springDamping);
    s.globalDamping = field_or(p, "damping", s.globalDamping);
    s.dt = field_or(p, "dt", s.dt);
    s.gravity = field_or(p, "g", s.gravity);
    s.forceTolerance = field_or(p, "forceTolerance", s.forceTolerance);
    s.maxSteps = field_or(p, "maxSteps", s.maxSteps);
    s.invertAfterSolve = field_or(p, "invertAfterSolve", s.invertAfterSolve);
    if (p.contains("anchors")) {
      const json& a = p["anchors"];
      if (a.is_string()) {
        const std::string kind = a.get<std::string>();
        if (kind == "corners")
          config.physics.anchors.kind = AnchorSpec::Kind::Corners;
        else if (kind == "boundary")
          config.physics.anchors.kind = AnchorSpec::Kind::Boundary;
        else
          throw InvalidConfig("anchors must be \"corners\", \"boundary\" or an index list");
      } else if (a.is_array()) {
        config.physics.anchors.kind = AnchorSpec::Kind::Explicit;
        config.physics.anchors.indices = a.get<std::vector<int>>();
      } else {
        throw InvalidConfig("anchors must be \"corners\", \"boundary\" or an index list");
      }
    }
  }
  if (root.contains("planarize")) {
    const json& p = root["planarize"];
    config.planarize.toleranceRel =
        field_or(p, "toleranceRel", config.planarize.toleranceRel);
    config.planarize.maxIterations =
        field_or(p, "maxIterations", config.planarize.maxIterations);
    config.planarize.closenessWeight =
        field_or(p, "closenessWeight", config.planarize.closenessWeight);
    config.planarize.planarityWeight =
        field_or(p, "planarityWeight", config.planarize.planarityWeight);
  }
  if (root.contains("fabricate")) {
    const json& f = root["fabricate"];
    config.fabricate.wallHeight =
        field_or(f, "wallHeight", config.fabricate.wallHeight);
    config.fabricate.thickness =
        field_or(f, "thickness", config.fabricate.thickness);
    config.fabricate.jointProportion =
        field_or(f, "jointProportion", config.fabricate.jointProportion);
    config.fabricate.holeDiameter =
        field_or(f, "holeDiameter", config.fabricate.holeDiameter);
  }
  if (root.contains("output")) {
    config.outputDirectory =
        field_or<std::string>(root["output"], "directory", config.outputDirectory);
  }

  require(config.grid.subdivision % 3 == 0 && config.grid.subdivision >= 3,
          "subdivision must be a multiple of 3");
  require(config.grid.sideMeters > 0, "grid side must be positive");
  require(config.physics.defaults.mass > 0, "mass must be positive");
  require(config.physics.defaults.kStretch > 0 &&
              config.physics.defaults.kShear > 0 &&
              config.physics.defaults.kBend > 0,
          "spring stiffnesses must be positive");
  require(config.physics.defaults.springDamping >= 0,
          "spring damping must be non-negative");
  require(config.physics.params.dt > 0, "dt must be positive");
  require(config.physics.params.globalDamping >= 0,
          "damping must be non-negative");
  require(config.physics.params.forceTolerance > 0,
          "force tolerance must be positive");
  require(config.physics.params.maxSteps >= 1, "maxSteps must be at least 1");
  require(config.planarize.toleranceRel > 0,
          "planarity tolerance must be positive");
  require(config.planarize.maxIterations >= 1,
          "planarize maxIterations must be at least 1");
  require(config.planarize.closenessWeight > 0 &&
              config.planarize.planarityWeight > 0,
          "planarize weights must be positive");
  require(config.fabricate.wallHeight > 0, "wall height must be positive");
  require(config.fabricate.thickness > 0, "thickness must be positive");
  require(config.fabricate.jointProportion > 0 &&
              config.fabricate.jointProportion <= 0.5,
          "joint proportion must lie in (0, 0.5]");
  require(config.fabricate.holeDiameter > 0, "hole diameter must be positive");
  return config;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string config_to_json(const PipelineConfig& c) {
  json anchors;
  switch (c.physics.anchors.kind) {
    case AnchorSpec::Kind::Corners: anchors = "corners"; break;
    case AnchorSpec::Kind::Boundary: anchors = "boundary"; break;
    case AnchorSpec::Kind::Explicit: anchors = c.physics.anchors.indices; break;
  }
  const json root = {
      {"grid",
       {{"sideMeters", c.grid.sideMeters}, {"subdivision", c.grid.subdivision}}},
      {"physics",
       {{"mass", c.physics.defaults.mass},
        {"kStretch", c.physics.defaults.kStretch},
        {"kShear", c.physics.defaults.kShear},
        {"kBend", c.physics.defaults.kBend},
        {"springDamping", c.physics.defaults.springDamping},
        {"damping", c.physics.params.globalDamping},
        {"dt", c.physics.params.dt},
        {"g", c.physics.params.gravity},
        {"anchors", anchors},
        {"invertAfterSolve", c.physics.params.invertAfterSolve},
        {"forceTolerance", c.physics.params.forceTolerance},
        {"maxSteps", c.physics.params.maxSteps}}},
      {"planarize",
       {{"toleranceRel", c.planarize.toleranceRel},
        {"maxIterations", c.planarize.maxIterations},
        {"closenessWeight", c.planarize.closenessWeight},
        {"planarityWeight", c.planarize.planarityWeight}}},
      {"fabricate",
       {{"wallHeight", c.fabricate.wallHeight},
        {"thickness", c.fabricate.thickness},
        {"jointProportion", c.fabricate.jointProportion},
        {"holeDiameter", c.fabricate.holeDiameter}}},
      {"output", {{"directory", c.outputDirectory}}}};
  return root.dump(2);
}

std::string file_hash_hex(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot hash missing file: " + path.string());
  std::uint64_t hash = 1469598103934665603ull;  // FNV-1a 64
  char buf[1 << 14];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ull;
    }
    if (!in) break;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx",
                static_cast<unsigned long long>(hash));
  return out;
}

namespace {

std::array<Vec3, 3> base_corners(const PipelineConfig& config) {
  const double s = config.grid.sideMeters;
  return {Vec3(0, 0, 0), Vec3(s, 0, 0), Vec3(0.5 * s, 0.5 * std::sqrt(3.0) * s, 0)};
}

std::vector<int> pick_anchors(const PipelineConfig& config, const HexMesh& mesh,
                              const std::optional<std::array<Vec3, 3>>& corners) {
  switch (config.physics.anchors.kind) {
    case AnchorSpec::Kind::Corners: {
      if (!corners)
        throw Error("anchor mode \"corners\" needs base corners in the mesh metadata");
      return corner_anchor_vertices(mesh, *corners);
    }
    case AnchorSpec::Kind::Boundary:
      return boundary_anchor_vertices(mesh);
    case AnchorSpec::Kind::Explicit:
      return config.physics.anchors.indices;
  }
  return {};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::string format_double(double x, int digits = 9) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

}  // namespace

void stage_grid(const PipelineConfig& config, const fs::path& meshOut,
                RunReport* report) {
  const double t0 = now_seconds();
  const auto corners = base_corners(config);
  const TriGrid grid = subdivide_triangle(corners[0], corners[1], corners[2],
                                          config.grid.subdivision);
  BuildStats stats;
  const HexMesh mesh = build_hex_mesh(grid, &stats);
  export_hex_mesh(mesh, meshOut);
  export_mesh_meta(mesh, corners, meta_path_for(meshOut));
  if (report) {
    report->grid.seconds = now_seconds() - t0;
    report->grid.faces = static_cast<long>(mesh.faceCount());
    report->grid.vertices = static_cast<long>(mesh.vertexCount());
    report->grid.loopBodyExecutions = stats.loopBodyExecutions;
  }
}

void stage_simulate(const PipelineConfig& config, const fs::path& meshIn,
                    const fs::path& meshOut, const fs::path& tracePath,
                    RunReport* report) {
  const double t0 = now_seconds();
  HexMeshFile file = import_hex_mesh(meshIn, meta_path_for(meshIn));
  const std::vector<int> anchors = pick_anchors(config, file.mesh, file.corners);
  SpringSystem sys = build_spring_system(file.mesh, config.physics.defaults,
                                         anchors, config.physics.params);

  StepObserver observer;
  std::ofstream trace;
  if (!tracePath.empty()) {
    trace.open(tracePath, std::ios::binary);
    if (!trace) throw IoError("cannot open trace: " + tracePath.string());
    trace << "step,kineticEnergy,maxResidualForce\n";
    observer = [&trace](long step, const SpringSystem& s, double residual) {
      trace << step << ',' << format_double(kinetic_energy(s), 12) << ','
            << format_double(residual, 12) << '\n';
    };
  }
  const EquilibriumResult eq = simulate_to_equilibrium(sys, observer);

  HexMesh out = file.mesh;
  out.vertexPositions = eq.finalPositions;
  export_hex_mesh(out, meshOut);
  export_mesh_meta(out, file.corners, meta_path_for(meshOut));

  if (report) {
    report->sim.seconds = now_seconds() - t0;
    report->sim.steps = eq.steps;
    report->sim.maxResidualForce = eq.maxResidualForce;
    report->sim.springs = static_cast<long>(sys.springs.size());
    report->sim.anchors = static_cast<long>(anchors.size());
  }
}

void stage_planarize(const PipelineConfig& config, const fs::path& meshIn,
                     const fs::path& meshOut, const fs::path& tracePath,
                     RunReport* report) {
  const double t0 = now_seconds();
  HexMeshFile file = import_hex_mesh(meshIn, meta_path_for(meshIn));

  std::vector<std::vector<int>> faces;
  faces.reserve(file.mesh.faceCount());
  for (const auto& [_, ring] : file.mesh.faceMap) faces.push_back(ring);

  PlanarizeSettings settings;
  settings.planarityTolerance =
      config.planarize.toleranceRel *
      bounding_box_diagonal(file.mesh.vertexPositions);
  settings.maxIterations = config.planarize.maxIterations;
  settings.closenessWeight = config.planarize.closenessWeight;
  settings.planarityWeight = config.planarize.planarityWeight;

  PlanarizeObserver observer;
  std::ofstream trace;
  if (!tracePath.empty()) {
    trace.open(tracePath, std::ios::binary);
    if (!trace) throw IoError("cannot open trace: " + tracePath.string());
    trace << "iteration,objective,maxPlanarityError,wPlan\n";
    observer = [&trace](const PlanarizeTraceRow& row) {
      trace << row.iteration << ',' << format_double(row.objective, 12) << ','
            << format_double(row.maxPlanarityError, 12) << ','
            << format_double(row.wPlan, 3) << '\n';
    };
  }

  const PlanarizeResult solved =
      planarize(file.mesh.vertexPositions, faces, settings, observer);

  HexMesh out = file.mesh;
  const double displacement =
      displacement_objective(file.mesh.vertexPositions, solved.Q);
  out.vertexPositions = solved.Q;
  export_hex_mesh(out, meshOut);
  export_mesh_meta(out, file.corners, meta_path_for(meshOut));

  if (report) {
    report->plan.seconds = now_seconds() - t0;
    report->plan.iterations = solved.iterations;
    report->plan.maxPlanarityError = solved.maxPlanarityError;
    report->plan.toleranceAbs = settings.planarityTolerance;
    report->plan.displacement = displacement;
  }
}

namespace {

std::string csv_line(int index, const Vec3& p, double e) {
  std::ostringstream ss;
  ss << index << ',' << format_double(p.x()) << ',' << format_double(p.y())
     << ',' << format_double(p.z()) << ',' << format_double(e) << '\n';
  return ss.str();
}

json marker_json(const FastenerMarker& m) {
  return {{"owner", m.onJoint ? "joint" : "panel"},
          {"ownerId", m.ownerId},
          {"center", {m.center.x(), m.center.y(), m.center.z()}},
          {"axis", {m.axis.x(), m.axis.y(), m.axis.z()}},
          {"diameter", m.diameter}};
}

}  // namespace

void stage_fabricate(const PipelineConfig& config, const fs::path& meshIn,
                     const fs::path& outDir, RunReport* report) {
  const double t0 = now_seconds();
  HexMeshFile file = import_hex_mesh(meshIn, meta_path_for(meshIn));
  const FabricationModel model =
      build_fabrication_model(file.mesh, config.fabricate);

  fs::create_directories(outDir);
  char name[64];
  for (const PanelBox& panel : model.panels) {
    PolyMesh poly;
    const std::size_t k = panel.top.size();
    for (const Vec3& p : panel.top) poly.positions.push_back(p);
    for (const auto& wall : panel.walls) {
      poly.positions.push_back(wall[2]);  // offset corner over edge end
    }
    // top ring (0..k-1), offsets of vertex i live at k + ((i+k-1) % k)
    std::vector<int> top(k);
    for (std::size_t i = 0; i < k; ++i) top[i] = static_cast<int>(i);
    poly.faces.push_back(top);
    for (std::size_t i = 0; i < k; ++i) {
      const int a = static_cast<int>(i);
      const int b = static_cast<int>((i + 1) % k);
      const int bOff = static_cast<int>(k + i);
      const int aOff = static_cast<int>(k + (i + k - 1) % k);
      poly.faces.push_back({a, b, bOff, aOff});
    }
    std::snprintf(name, sizeof(name), "panel_%03d.obj", panel.faceIndex);
    export_mesh(poly, outDir / name);
  }

  int jointFile = 0;
  for (const Joint& joint : model.joints) {
    PolyMesh poly;
    poly.positions = {joint.base[0], joint.base[1], joint.base[2], joint.apex};
    poly.faces = {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {2, 0, 3}};
    std::snprintf(name, sizeof(name), "joint_%03d.obj", jointFile++);
    export_mesh(poly, outDir / name);
  }

  std::ostringstream csv;
  csv << "vertexIndex,x,y,z,e_dev_m\n";
  for (std::size_t v = 0; v < file.mesh.vertexCount(); ++v)
    csv << csv_line(static_cast<int>(v), file.mesh.vertexPositions[v],
                    model.deviation.perVertex[v]);
  write_text(outDir / "deviation_report.csv", csv.str());

  json fasteners = json::array();
  for (const FastenerMarker& m : model.fasteners) fasteners.push_back(marker_json(m));
  write_text(outDir / "fasteners.json", fasteners.dump(2) + "\n");

  if (report) {
    report->fab.seconds = now_seconds() - t0;
    report->fab.panels = static_cast<long>(model.panels.size());
    report->fab.joints = static_cast<long>(model.joints.size());
    report->fab.flippedFaces = static_cast<long>(model.flippedFaces.size());
    report->fab.maxDeviationM = model.deviation.maxError;
  }
}

std::string report_to_json(const RunReport& r) {
  json root = {
      {"grid",
       {{"seconds", r.grid.seconds},
        {"faces", r.grid.faces},
        {"vertices", r.grid.vertices},
        {"loopBodyExecutions", r.grid.loopBodyExecutions}}},
      {"simulate",
       {{"seconds", r.sim.seconds},
        {"steps", r.sim.steps},
        {"springs", r.sim.springs},
        {"anchors", r.sim.anchors},
        {"maxResidualForce", r.sim.maxResidualForce}}},
      {"planarize",
       {{"seconds", r.plan.seconds},
        {"iterations", r.plan.iterations},
        {"maxPlanarityError", r.plan.maxPlanarityError},
        {"toleranceAbs", r.plan.toleranceAbs},
        {"displacement", r.plan.displacement}}},
      {"fabricate",
       {{"seconds", r.fab.seconds},
        {"panels", r.fab.panels},
        {"joints", r.fab.joints},
        {"flippedFaces", r.fab.flippedFaces},
        {"maxDeviationM", r.fab.maxDeviationM},
        {"maxDeviationMm", r.fab.maxDeviationM * 1e3}}},
      {"outputs", r.outputHashes},
      {"config", json::parse(r.configEcho.empty() ? "{}" : r.configEcho)}};
  return root.dump(2);
}

void write_report(const RunReport& report, const fs::path& path) {
  write_text(path, report_to_json(report) + "\n");
}

RunReport read_report(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open report: " + path.string());
  json root;
  try {
    in >> root;
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  RunReport r;
  const json& g = root.at("grid");
  r.grid.seconds = g.at("seconds").get<double>();
  r.grid.faces = g.at("faces").get<long>();
  r.grid.vertices = g.at("vertices").get<long>();
  r.grid.loopBodyExecutions = g.at("loopBodyExecutions").get<long>();
  const json& s = root.at("simulate");
  r.sim.seconds = s.at("seconds").get<double>();
  r.sim.steps = s.at("steps").get<long>();
  r.sim.springs = s.at("springs").get<long>();
  r.sim.anchors = s.at("anchors").get<long>();
  r.sim.maxResidualForce = s.at("maxResidualForce").get<double>();
  const json& p = root.at("planarize");
  r.plan.seconds = p.at("seconds").get<double>();
  r.plan.iterations = p.at("iterations").get<long>();
  r.plan.maxPlanarityError = p.at("maxPlanarityError").get<double>();
  r.plan.toleranceAbs = p.at("toleranceAbs").get<double>();
  r.plan.displacement = p.at("displacement").get<double>();
  const json& f = root.at("fabricate");
  r.fab.seconds = f.at("seconds").get<double>();
  r.fab.panels = f.at("panels").get<long>();
  r.fab.joints = f.at("joints").get<long>();
  r.fab.flippedFaces = f.at("flippedFaces").get<long>();
  r.fab.maxDeviationM = f.at("maxDeviationM").get<double>();
  r.outputHashes =
      root.at("outputs").get<std::map<std::string, std::string>>();
  r.configEcho = root.at("config").dump(2);
  return r;
}

RunReport run_pipeline(const PipelineConfig& config, const fs::path& outDir) {
  fs::create_directories(outDir);
  RunReport report;
  report.configEcho = config_to_json(config);

  const fs::path gridMesh = outDir / artifacts::kGridMesh;
  const fs::path formMesh = outDir / artifacts::kFormFoundMesh;
  const fs::path planarMesh = outDir / artifacts::kPlanarMesh;
  const fs::path fabDir = outDir / artifacts::kFabDir;

  // each stage reads its predecessor's files, so staged CLI runs and this
  // call quantize positions identically
  try {
    stage_grid(config, gridMesh, &report);
  } catch (const Error& e) {
    throw Error(std::string("[grid] ") + e.what());
  }
  try {
    stage_simulate(config, gridMesh, formMesh, {}, &report);
  } catch (const Error& e) {
    throw Error(std::string("[simulate] ") + e.what());
  }
  try {
    stage_planarize(config, formMesh, planarMesh, {}, &report);
  } catch (const Error& e) {
    throw Error(std::string("[planarize] ") + e.what());
  }
  try {
    stage_fabricate(config, planarMesh, fabDir, &report);
  } catch (const Error& e) {
    throw Error(std::string("[fabricate] ") + e.what());
  }

  std::vector<fs::path> files;
  for (const fs::path& p : {gridMesh, formMesh, planarMesh}) {
    files.push_back(p);
    files.push_back(meta_path_for(p));
  }
  std::vector<fs::path> fabFiles;
  for (const auto& entry : fs::directory_iterator(fabDir))
    fabFiles.push_back(entry.path());
  std::sort(fabFiles.begin(), fabFiles.end());
  files.insert(files.end(), fabFiles.begin(), fabFiles.end());
  for (const fs::path& p : files)
    report.outputHashes[fs::relative(p, outDir).generic_string()] =
        file_hash_hex(p);

  write_report(report, outDir / artifacts::kReport);
  return report;
}

}  // namespace hexforge
