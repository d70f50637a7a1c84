#pragma once

#include <functional>
#include <vector>

#include "hexforge/geometry.hpp"

namespace hexforge {

/// Plane in Hessian form: normal . x + offset = 0, |normal| = 1.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;  // m

  double signedDistance(const Vec3& p) const { return normal.dot(p) + offset; }
};

/// Least-squares plane through >= 3 points (centroid + smallest principal
/// direction). Sign convention: first component of the normal that exceeds
/// 1e-12 in magnitude is positive. Throws DegenerateFace when the two
/// smallest principal spreads are both under 1e-12 m.
Plane fit_plane(const std::vector<Vec3>& points);

/// Max distance of the face's vertices to their own best-fit plane.
double planarity_error(const std::vector<int>& face,
                       const std::vector<Vec3>& positions);

struct PlanarizeSettings {
  double planarityTolerance = 0.0;  // m; <= 0 means 1e-6 * bbox diagonal
  int maxIterations = 500;
  double closenessWeight = 1.0;
  double planarityWeight = 10.0;    // initial; escalated x10 on stall
  std::vector<int> pinnedVertices;  // held at their control positions
};

struct PlanarizeTraceRow {
  int iteration = 0;
  double objective = 0.0;
  double maxPlanarityError = 0.0;
  double wPlan = 0.0;
};

struct PlanarizeResult {
  std::vector<Vec3> Q;
  int iterations = 0;
  double maxPlanarityError = 0.0;
  std::vector<PlanarizeTraceRow> objectiveTrace;
};

/// Called after every iteration, including those of a run that later
/// fails to converge.
using PlanarizeObserver = std::function<void(const PlanarizeTraceRow&)>;

/// Alternating minimization of
///   E(Q, planes) = wPlan * sum over corners (n_j . q_i + d_j)^2
///                + wClose * sum_i |q_i - p_i|^2
/// Local step refits each face plane (exact); global step solves each
/// vertex's 3x3 normal equations (exact). wPlan is multiplied by 10
/// whenever the alternation stalls (relative objective change < 1e-8, or
/// 50 iterations at one weight), capped at 1e8 times wClose. Stops when
/// the max planarity error drops below tolerance; throws NoConvergence at
/// the iteration cap.
PlanarizeResult planarize(const std::vector<Vec3>& P,
                          const std::vector<std::vector<int>>& faces,
                          const PlanarizeSettings& settings,
                          const PlanarizeObserver& observer = {});

/// sum_i |p_i - q_i|^2. Throws LengthMismatch.
double displacement_objective(const std::vector<Vec3>& P,
                              const std::vector<Vec3>& Q);

double default_planarity_tolerance(const std::vector<Vec3>& P);

}  // namespace hexforge
