#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hexforge {

using Vec3 = Eigen::Vector3d;

// Newell's method; returns the (unnormalized) area-weighted polygon normal.
inline Vec3 polygon_normal(const std::vector<Vec3>& ring) {
  Vec3 n = Vec3::Zero();
  const std::size_t k = ring.size();
  for (std::size_t i = 0; i < k; ++i) {
    const Vec3& a = ring[i];
    const Vec3& b = ring[(i + 1) % k];
    n.x() += (a.y() - b.y()) * (a.z() + b.z());
    n.y() += (a.z() - b.z()) * (a.x() + b.x());
    n.z() += (a.x() - b.x()) * (a.y() + b.y());
  }
  return 0.5 * n;
}

inline double bounding_box_diagonal(const std::vector<Vec3>& pts) {
  if (pts.empty()) return 0.0;
  Vec3 lo = pts.front(), hi = pts.front();
  for (const Vec3& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

}  // namespace hexforge
