#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hexforge/fabricate.hpp"
#include "hexforge/physics.hpp"
#include "hexforge/planarize.hpp"

namespace hexforge {

struct GridConfig {
  double sideMeters = 6.0;
  int subdivision = 9;
};

struct AnchorSpec {
  enum class Kind { Corners, Boundary, Explicit };
  Kind kind = Kind::Corners;
  std::vector<int> indices;  // used when kind == Explicit
};

struct PhysicsConfig {
  SpringDefaults defaults;
  SimulationParams params;
  AnchorSpec anchors;
};

struct PlanarizeConfig {
  double toleranceRel = 1e-6;  // of the bounding-box diagonal
  int maxIterations = 500;
  double closenessWeight = 1.0;
  double planarityWeight = 10.0;
};

struct PipelineConfig {
  GridConfig grid;
  PhysicsConfig physics;
  PlanarizeConfig planarize;
  FabricateSettings fabricate;
  std::string outputDirectory = "out";
};

/// Parse + validate a config file, filling defaults for absent fields.
/// Throws ParseError (position-annotated) or InvalidConfig (naming the
/// violated invariant).
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(const std::string& text);
std::string config_to_json(const PipelineConfig& config);

struct RunReport {
  struct GridStats {
    double seconds = 0;
    long faces = 0, vertices = 0, loopBodyExecutions = 0;
  };
  struct SimStats {
    double seconds = 0;
    long steps = 0, springs = 0, anchors = 0;
    double maxResidualForce = 0;
  };
  struct PlanStats {
    double seconds = 0;
    long iterations = 0;
    double maxPlanarityError = 0, toleranceAbs = 0, displacement = 0;
  };
  struct FabStats {
    double seconds = 0;
    long panels = 0, joints = 0, flippedFaces = 0;
    double maxDeviationM = 0;
  };
  GridStats grid;
  SimStats sim;
  PlanStats plan;
  FabStats fab;
  std::map<std::string, std::string> outputHashes;  // relative path -> hash
  std::string configEcho;
};

// Stage functions work file-to-file; run_pipeline chains them through the
// same files so staged CLI runs reproduce its outputs byte for byte.
void stage_grid(const PipelineConfig& config,
                const std::filesystem::path& meshOut, RunReport* report);
void stage_simulate(const PipelineConfig& config,
                    const std::filesystem::path& meshIn,
                    const std::filesystem::path& meshOut,
                    const std::filesystem::path& tracePath,  // empty = none
                    RunReport* report);
void stage_planarize(const PipelineConfig& config,
                     const std::filesystem::path& meshIn,
                     const std::filesystem::path& meshOut,
                     const std::filesystem::path& tracePath, RunReport* report);
void stage_fabricate(const PipelineConfig& config,
                     const std::filesystem::path& meshIn,
                     const std::filesystem::path& outDir, RunReport* report);

/// grid -> simulate -> planarize -> fabricate, all artifacts plus
/// report.json under outDir. Deterministic: identical configs give
/// identical output hashes.
RunReport run_pipeline(const PipelineConfig& config,
                       const std::filesystem::path& outDir);

std::string report_to_json(const RunReport& report);
void write_report(const RunReport& report, const std::filesystem::path& path);
RunReport read_report(const std::filesystem::path& path);

/// FNV-1a (64-bit) content hash, lowercase hex.
std::string file_hash_hex(const std::filesystem::path& path);

// Canonical artifact names under a run directory.
namespace artifacts {
inline constexpr const char* kGridMesh = "grid.obj";
inline constexpr const char* kFormFoundMesh = "formfound.obj";
inline constexpr const char* kPlanarMesh = "planar.obj";
inline constexpr const char* kFabDir = "fab";
inline constexpr const char* kReport = "report.json";
}  // namespace artifacts

}  // namespace hexforge
