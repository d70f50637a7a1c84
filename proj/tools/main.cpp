#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hexforge/errors.hpp"
#include "hexforge/meshio.hpp"
#include "hexforge/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hexforge;

namespace {

PipelineConfig config_from(const std::string& configPath) {
  if (configPath.empty()) return PipelineConfig{};
  return load_config(configPath);
}

int run_guarded(const char* stage, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "[" << stage << "] error: " << e.what() << "\n";
    return 1;
  }
}

void print_report(const RunReport& r, const fs::path& runDir) {
  std::printf("grid:       %ld faces, %ld vertices (%.3f s)\n", r.grid.faces,
              r.grid.vertices, r.grid.seconds);
  std::printf("simulate:   %ld steps, residual %.3e N, %ld springs, %ld anchors (%.3f s)\n",
              r.sim.steps, r.sim.maxResidualForce, r.sim.springs,
              r.sim.anchors, r.sim.seconds);
  std::printf("planarize:  %ld iterations, max error %.3e m (tolerance %.3e m) (%.3f s)\n",
              r.plan.iterations, r.plan.maxPlanarityError, r.plan.toleranceAbs,
              r.plan.seconds);
  std::printf("fabricate:  %ld panels, %ld joints, max deviation %.3f mm (%.3f s)\n",
              r.fab.panels, r.fab.joints, r.fab.maxDeviationM * 1e3,
              r.fab.seconds);
  std::printf("outputs:    %zu files under %s\n", r.outputHashes.size(),
              runDir.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hexforge: planar hexagonal panel shells from a subdivided triangle"};
  app.require_subcommand(1);

  std::string configPath;
  const auto addConfigOption = [&configPath](CLI::App* cmd) {
    cmd->add_option("--config", configPath, "pipeline config JSON");
  };

  // grid
  auto* grid = app.add_subcommand("grid", "build the hexagonal panel mesh");
  addConfigOption(grid);
  double side = 0.0;
  int subdivision = 0;
  std::string gridOut = "grid.obj";
  grid->add_option("--side", side, "triangle side length in meters");
  grid->add_option("--subdivision", subdivision, "segments per edge (multiple of 3)");
  grid->add_option("--out", gridOut, "output mesh path")->required();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "form-find with the particle-spring solver");
  addConfigOption(simulate);
  std::string simMesh, simOut, simTrace;
  simulate->add_option("--mesh", simMesh, "input mesh")->required();
  simulate->add_option("--out", simOut, "output mesh")->required();
  simulate->add_option("--trace", simTrace, "per-step CSV trace");

  // planarize
  auto* planar = app.add_subcommand("planarize", "flatten every panel by constrained least squares");
  addConfigOption(planar);
  std::string planMesh, planOut, planTrace;
  double tolRel = 0.0;
  int maxIters = 0;
  planar->add_option("--mesh", planMesh, "input mesh")->required();
  planar->add_option("--out", planOut, "output mesh")->required();
  planar->add_option("--tolerance", tolRel, "planarity tolerance, relative to the bbox diagonal");
  planar->add_option("--max-iters", maxIters, "iteration cap");
  planar->add_option("--trace", planTrace, "per-iteration CSV trace");

  // fabricate
  auto* fab = app.add_subcommand("fabricate", "emit panel boxes, joints and reports");
  addConfigOption(fab);
  std::string fabMesh, fabOutDir;
  double wallHeight = 0.0, thickness = 0.0, jointProportion = 0.0, holeDiameter = 0.0;
  fab->add_option("--mesh", fabMesh, "input (planarized) mesh")->required();
  fab->add_option("--out-dir", fabOutDir, "output directory")->required();
  fab->add_option("--wall-height", wallHeight, "wall height in meters");
  fab->add_option("--thickness", thickness, "material thickness in meters");
  fab->add_option("--joint-proportion", jointProportion, "joint base proportion in (0, 0.5]");
  fab->add_option("--hole-diameter", holeDiameter, "fastener hole diameter in meters");

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "run grid -> simulate -> planarize -> fabricate");
  addConfigOption(pipe);
  std::string pipeOutDir;
  pipe->add_option("--out-dir", pipeOutDir, "run directory (default: config output.directory)");

  // report
  auto* rep = app.add_subcommand("report", "print and verify a previous run's report");
  addConfigOption(rep);
  std::string repDir;
  rep->add_option("--run", repDir, "run directory (default: config output.directory)");

  CLI11_PARSE(app, argc, argv);

  if (grid->parsed())
    return run_guarded("grid", [&] {
      PipelineConfig config = config_from(configPath);
      if (side > 0.0) config.grid.sideMeters = side;
      if (subdivision != 0) config.grid.subdivision = subdivision;
      if (config.grid.subdivision % 3 != 0 || config.grid.subdivision < 3)
        throw InvalidConfig("subdivision must be a multiple of 3");
      stage_grid(config, gridOut, nullptr);
    });

  if (simulate->parsed())
    return run_guarded("simulate", [&] {
      const PipelineConfig config = config_from(configPath);
      stage_simulate(config, simMesh, simOut, simTrace, nullptr);
    });

  if (planar->parsed())
    return run_guarded("planarize", [&] {
      PipelineConfig config = config_from(configPath);
      if (tolRel > 0.0) config.planarize.toleranceRel = tolRel;
      if (maxIters > 0) config.planarize.maxIterations = maxIters;
      stage_planarize(config, planMesh, planOut, planTrace, nullptr);
    });

  if (fab->parsed())
    return run_guarded("fabricate", [&] {
      PipelineConfig config = config_from(configPath);
      if (wallHeight > 0.0) config.fabricate.wallHeight = wallHeight;
      if (thickness > 0.0) config.fabricate.thickness = thickness;
      if (jointProportion > 0.0) config.fabricate.jointProportion = jointProportion;
      if (holeDiameter > 0.0) config.fabricate.holeDiameter = holeDiameter;
      stage_fabricate(config, fabMesh, fabOutDir, nullptr);
    });

  if (pipe->parsed())
    return run_guarded("pipeline", [&] {
      const PipelineConfig config = config_from(configPath);
      const fs::path outDir =
          pipeOutDir.empty() ? fs::path(config.outputDirectory) : fs::path(pipeOutDir);
      const RunReport report = run_pipeline(config, outDir);
      print_report(report, outDir);
    });

  if (rep->parsed())
    return run_guarded("report", [&] {
      const PipelineConfig config = config_from(configPath);
      const fs::path runDir =
          repDir.empty() ? fs::path(config.outputDirectory) : fs::path(repDir);
      const RunReport report = read_report(runDir / artifacts::kReport);
      print_report(report, runDir);
      long mismatches = 0;
      for (const auto& [rel, hash] : report.outputHashes) {
        const fs::path p = runDir / rel;
        if (!fs::exists(p)) {
          std::printf("MISSING %s\n", rel.c_str());
          ++mismatches;
        } else if (file_hash_hex(p) != hash) {
          std::printf("MODIFIED %s\n", rel.c_str());
          ++mismatches;
        }
      }
      if (mismatches > 0)
        throw Error(std::to_string(mismatches) + " artifact(s) missing or modified");
      std::printf("all %zu artifacts verified\n", report.outputHashes.size());
    });

  return 0;
}
