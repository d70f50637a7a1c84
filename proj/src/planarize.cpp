#include "hexforge/planarize.hpp"

#include <algorithm>
#include <cmath>

#include "hexforge/errors.hpp"

namespace hexforge {

namespace {

Vec3 canonical_sign(Vec3 n) {
  for (int k = 0; k < 3; ++k) {
    if (std::abs(n[k]) <= 1e-12) continue;
    if (n[k] < 0.0) n = -n;
    break;
  }
  return n;
}

}  // namespace

Plane fit_plane(const std::vector<Vec3>& points) {
  if (points.size() < 3) throw DegenerateFace("plane fit needs >= 3 points");

  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - centroid;
    cov += d * d.transpose();
  }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Vec3 spreads =
      (eig.eigenvalues().cwiseMax(0.0) / static_cast<double>(points.size()))
          .cwiseSqrt();
  if (spreads[0] < 1e-12 && spreads[1] < 1e-12)
    throw DegenerateFace("points are collinear or coincident");

  // eigenvalues come out ascending; on a near-tie pick the candidate whose
  // sign-normalized vector is lexicographically smallest, for determinism
  Vec3 normal = canonical_sign(eig.eigenvectors().col(0));
  const double tie = 1e-12 * std::max(1.0, eig.eigenvalues()[2]);
  for (int k = 1; k < 3; ++k) {
    if (eig.eigenvalues()[k] - eig.eigenvalues()[0] > tie) break;
    const Vec3 candidate = canonical_sign(eig.eigenvectors().col(k));
    if (std::lexicographical_compare(candidate.data(), candidate.data() + 3,
                                     normal.data(), normal.data() + 3))
      normal = candidate;
  }
  normal.normalize();
  return {normal, -normal.dot(centroid)};
}

double planarity_error(const std::vector<int>& face,
                       const std::vector<Vec3>& positions) {
  std::vector<Vec3> pts;
  pts.reserve(face.size());
  for (int v : face) pts.push_back(positions.at(static_cast<std::size_t>(v)));
  const Plane plane = fit_plane(pts);
  double worst = 0.0;
  for (const Vec3& p : pts)
    worst = std::max(worst, std::abs(plane.signedDistance(p)));
  return worst;
}

double displacement_objective(const std::vector<Vec3>& P,
                              const std::vector<Vec3>& Q) {
  if (P.size() != Q.size())
    throw LengthMismatch("control and solution point counts differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i)
    sum += (P[i] - Q[i]).squaredNorm();
  return sum;
}

double default_planarity_tolerance(const std::vector<Vec3>& P) {
  return 1e-6 * bounding_box_diagonal(P);
}

namespace {

double max_planarity_error(const std::vector<std::vector<int>>& faces,
                           const std::vector<Vec3>& Q) {
  double worst = 0.0;
  for (const auto& face : faces)
    worst = std::max(worst, planarity_error(face, Q));
  return worst;
}

}  // namespace

PlanarizeResult planarize(const std::vector<Vec3>& P,
                          const std::vector<std::vector<int>>& faces,
                          const PlanarizeSettings& settings,
                          const PlanarizeObserver& observer) {
  const std::size_t nv = P.size();
  for (const auto& face : faces) {
    if (face.size() < 3) throw Error("planarize faces need >= 3 vertices");
    for (int v : face)
      if (v < 0 || v >= static_cast<int>(nv))
        throw Error("face references vertex out of range");
  }
  if (settings.maxIterations < 1 || settings.closenessWeight <= 0.0 ||
      settings.planarityWeight <= 0.0)
    throw Error("planarize settings out of range");

  const double tol = settings.planarityTolerance > 0.0
                         ? settings.planarityTolerance
                         : default_planarity_tolerance(P);

  std::vector<bool> pinned(nv, false);
  for (int v : settings.pinnedVertices) pinned.at(static_cast<std::size_t>(v)) = true;

  const double wClose = settings.closenessWeight;
  const double wPlanCap = 1e8 * wClose;
  double wPlan = settings.planarityWeight;

  PlanarizeResult result;
  result.Q = P;
  std::vector<Plane> planes(faces.size());
  double prevObjective = -1.0;
  int phaseIterations = 0;

  for (int iter = 1; iter <= settings.maxIterations; ++iter) {
    const double err = max_planarity_error(faces, result.Q);
    if (err <= tol) {
      result.iterations = iter;
      result.maxPlanarityError = err;
      return result;
    }

    // local step: exact plane refit per face
    std::vector<Vec3> facePts;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      facePts.clear();
      for (int v : faces[f]) facePts.push_back(result.Q[static_cast<std::size_t>(v)]);
      planes[f] = fit_plane(facePts);
    }

    // global step: vertices decouple into 3x3 normal equations
    std::vector<Eigen::Matrix3d> lhs(nv, wClose * Eigen::Matrix3d::Identity());
    std::vector<Vec3> rhs(nv);
    for (std::size_t i = 0; i < nv; ++i) rhs[i] = wClose * P[i];
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const Vec3& n = planes[f].normal;
      const double d = planes[f].offset;
      for (int v : faces[f]) {
        lhs[static_cast<std::size_t>(v)] += wPlan * n * n.transpose();
        rhs[static_cast<std::size_t>(v)] -= wPlan * d * n;
      }
    }
    for (std::size_t i = 0; i < nv; ++i) {
      if (pinned[i]) {
        result.Q[i] = P[i];
        continue;
      }
      result.Q[i] = lhs[i].ldlt().solve(rhs[i]);
    }

    double objective = wClose * displacement_objective(P, result.Q);
    for (std::size_t f = 0; f < faces.size(); ++f)
      for (int v : faces[f]) {
        const double r = planes[f].signedDistance(result.Q[static_cast<std::size_t>(v)]);
        objective += wPlan * r * r;
      }

    const PlanarizeTraceRow row{iter, objective,
                                max_planarity_error(faces, result.Q), wPlan};
    result.objectiveTrace.push_back(row);
    if (observer) observer(row);

    // escalate the penalty once the alternation stalls at this weight
    ++phaseIterations;
    const bool stalled =
        (prevObjective >= 0.0 &&
         std::abs(prevObjective - objective) <
             1e-8 * std::max(prevObjective, 1e-300)) ||
        phaseIterations >= 50;
    if (stalled && wPlan < wPlanCap) {
      wPlan = std::min(wPlan * 10.0, wPlanCap);
      prevObjective = -1.0;
      phaseIterations = 0;
    } else {
      prevObjective = objective;
    }
  }

  const double err = max_planarity_error(faces, result.Q);
  if (err <= tol) {
    result.iterations = settings.maxIterations;
    result.maxPlanarityError = err;
    return result;
  }
  throw NoConvergence("planarization stopped at iteration cap with max error " +
                          std::to_string(err) + " m",
                      err);
}

}  // namespace hexforge
