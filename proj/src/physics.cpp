#include "hexforge/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "hexforge/errors.hpp"

namespace hexforge {

Vec3 spring_force(const Spring& s, const Vec3& x1, const Vec3& x2) {
  const Vec3 d = x1 - x2;
  const double len = d.norm();
  if (len <= 1e-12)
    throw CoincidentEndpoints("spring endpoints closer than 1e-12 m");
  return s.stiffness * (s.restLength - len) * (d / len);
}

Vec3 gravity_force(const Particle& p, double g) {
  return {0.0, 0.0, -p.mass * g};
}

Vec3 damping_force(const Particle& p, double cGlobal) {
  return -cGlobal * p.velocity;
}

namespace {

void add_forces(const SpringSystem& sys, const std::vector<Vec3>& positions,
                const std::vector<Vec3>& velocities, std::vector<Vec3>& out) {
  const double g = sys.params.gravity;
  const double c = sys.params.globalDamping;
  for (std::size_t i = 0; i < sys.particles.size(); ++i)
    out[i] = Vec3(0.0, 0.0, -sys.particles[i].mass * g) - c * velocities[i];

  for (const Spring& s : sys.springs) {
    const std::size_t i = static_cast<std::size_t>(s.i);
    const std::size_t j = static_cast<std::size_t>(s.j);
    const Vec3 d = positions[i] - positions[j];
    const double len = d.norm();
    if (len <= 1e-12)
      throw CoincidentEndpoints("spring endpoints closer than 1e-12 m");
    const Vec3 axis = d / len;
    Vec3 f = s.stiffness * (s.restLength - len) * axis;
    if (s.damping > 0.0)
      f -= s.damping * axis.dot(velocities[i] - velocities[j]) * axis;
    out[i] += f;
    out[j] -= f;
  }
}

}  // namespace

std::vector<Vec3> accumulate_forces(const SpringSystem& sys) {
  std::vector<Vec3> positions(sys.particles.size());
  std::vector<Vec3> velocities(sys.particles.size());
  for (std::size_t i = 0; i < sys.particles.size(); ++i) {
    positions[i] = sys.particles[i].position;
    velocities[i] = sys.particles[i].velocity;
  }
  std::vector<Vec3> forces(sys.particles.size());
  add_forces(sys, positions, velocities, forces);
  return forces;
}

void step_rk4(SpringSystem& sys) {
  const double dt = sys.params.dt;
  if (dt <= 0.0) throw Error("timestep must be positive");
  const std::size_t n = sys.particles.size();

  std::vector<Vec3> x0(n), v0(n);
  for (std::size_t i = 0; i < n; ++i) {
    x0[i] = sys.particles[i].position;
    v0[i] = sys.particles[i].velocity;
  }

  std::vector<Vec3> f(n);
  std::vector<Vec3> xs(n), vs(n);
  std::array<std::vector<Vec3>, 4> kx, kv;  // kx = velocity, kv = acceleration

  const auto evaluate = [&](const std::vector<Vec3>& x,
                            const std::vector<Vec3>& v, std::vector<Vec3>& dx,
                            std::vector<Vec3>& dv) {
    add_forces(sys, x, v, f);
    dx.resize(n);
    dv.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (sys.particles[i].anchored) {
        dx[i].setZero();
        dv[i].setZero();
      } else {
        dx[i] = v[i];
        dv[i] = f[i] / sys.particles[i].mass;
      }
    }
  };

  evaluate(x0, v0, kx[0], kv[0]);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x0[i] + 0.5 * dt * kx[0][i];
    vs[i] = v0[i] + 0.5 * dt * kv[0][i];
  }
  evaluate(xs, vs, kx[1], kv[1]);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x0[i] + 0.5 * dt * kx[1][i];
    vs[i] = v0[i] + 0.5 * dt * kv[1][i];
  }
  evaluate(xs, vs, kx[2], kv[2]);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x0[i] + dt * kx[2][i];
    vs[i] = v0[i] + dt * kv[2][i];
  }
  evaluate(xs, vs, kx[3], kv[3]);

  for (std::size_t i = 0; i < n; ++i) {
    if (sys.particles[i].anchored) continue;
    Particle& p = sys.particles[i];
    p.position =
        x0[i] + (dt / 6.0) * (kx[0][i] + 2.0 * kx[1][i] + 2.0 * kx[2][i] + kx[3][i]);
    p.velocity =
        v0[i] + (dt / 6.0) * (kv[0][i] + 2.0 * kv[1][i] + 2.0 * kv[2][i] + kv[3][i]);
    if (!p.position.allFinite() || !p.velocity.allFinite())
      throw NonFiniteState("particle state became non-finite (dt too large?)");
  }
}

double kinetic_energy(const SpringSystem& sys) {
  double e = 0.0;
  for (const Particle& p : sys.particles)
    e += 0.5 * p.mass * p.velocity.squaredNorm();
  return e;
}

namespace {

double max_free_residual(const SpringSystem& sys,
                         const std::vector<Vec3>& forces) {
  double worst = 0.0;
  for (std::size_t i = 0; i < sys.particles.size(); ++i)
    if (!sys.particles[i].anchored)
      worst = std::max(worst, forces[i].norm());
  return worst;
}

}  // namespace

EquilibriumResult simulate_to_equilibrium(SpringSystem& sys,
                                          const StepObserver& observer) {
  bool damped = sys.params.globalDamping > 0.0;
  if (!damped)
    damped = !sys.springs.empty() &&
             std::all_of(sys.springs.begin(), sys.springs.end(),
                         [](const Spring& s) { return s.damping > 0.0; });
  if (!damped) throw Error("undamped system cannot settle to equilibrium");

  const bool anyAnchor =
      std::any_of(sys.particles.begin(), sys.particles.end(),
                  [](const Particle& p) { return p.anchored; });
  if (sys.params.gravity != 0.0 && !anyAnchor)
    throw EmptyAnchorSet("gravity is nonzero but no particle is anchored");

  EquilibriumResult result;
  double residual = max_free_residual(sys, accumulate_forces(sys));
  long step = 0;
  if (observer) observer(step, sys, residual);
  while (residual > sys.params.forceTolerance) {
    if (step >= sys.params.maxSteps)
      throw NoConvergence("equilibrium not reached within max steps; residual " +
                              std::to_string(residual) + " N",
                          residual);
    step_rk4(sys);
    ++step;
    residual = max_free_residual(sys, accumulate_forces(sys));
    if (observer) observer(step, sys, residual);
  }

  result.steps = step;
  result.maxResidualForce = residual;
  result.finalPositions.reserve(sys.particles.size());
  for (const Particle& p : sys.particles)
    result.finalPositions.push_back(p.position);

  if (sys.params.invertAfterSolve) {
    double anchorZ = 0.0;
    long anchorCount = 0;
    for (const Particle& p : sys.particles)
      if (p.anchored) {
        anchorZ += p.position.z();
        ++anchorCount;
      }
    if (anchorCount > 0) anchorZ /= static_cast<double>(anchorCount);
    for (Vec3& p : result.finalPositions) p.z() = 2.0 * anchorZ - p.z();
  }
  return result;
}

namespace {

bool lattice_collinear(const LatticeCoord& a, const LatticeCoord& mid,
                       const LatticeCoord& b) {
  return a.u + b.u == 2 * mid.u && a.v + b.v == 2 * mid.v;
}

}  // namespace

SpringSystem build_spring_system(const HexMesh& mesh,
                                 const SpringDefaults& defaults,
                                 const std::vector<int>& anchors,
                                 const SimulationParams& params) {
  if (params.gravity != 0.0 && anchors.empty())
    throw EmptyAnchorSet("gravity is nonzero but the anchor set is empty");
  if (defaults.mass <= 0.0 || defaults.kStretch <= 0.0 ||
      defaults.kShear <= 0.0 || defaults.kBend <= 0.0)
    throw Error("spring defaults must be positive");

  SpringSystem sys;
  sys.params = params;
  sys.particles.resize(mesh.vertexCount());
  for (std::size_t i = 0; i < mesh.vertexCount(); ++i) {
    sys.particles[i].mass = defaults.mass;
    sys.particles[i].position = mesh.vertexPositions[i];
  }
  for (int a : anchors) {
    if (a < 0 || a >= static_cast<int>(mesh.vertexCount()))
      throw Error("anchor index out of range: " + std::to_string(a));
    sys.particles[static_cast<std::size_t>(a)].anchored = true;
  }

  const auto restLength = [&](int i, int j) {
    return (mesh.vertexPositions[static_cast<std::size_t>(i)] -
            mesh.vertexPositions[static_cast<std::size_t>(j)])
        .norm();
  };
  std::set<std::pair<int, int>> seen[3];
  const auto addSpring = [&](int i, int j, SpringKind kind, double k) {
    const std::pair<int, int> key{std::min(i, j), std::max(i, j)};
    if (!seen[static_cast<int>(kind)].insert(key).second) return;
    sys.springs.push_back({key.first, key.second, k, restLength(i, j),
                           defaults.springDamping, kind});
  };

  for (const MeshEdge& e : mesh_edges(mesh))
    addSpring(e.a, e.b, SpringKind::Stretch, defaults.kStretch);

  // within-face second neighbors: bend when the run through the middle
  // vertex is a straight lattice line, shear otherwise
  for (const auto& [_, ring] : mesh.faceMap) {
    const std::size_t k = ring.size();
    for (std::size_t i = 0; i < k; ++i) {
      const int a = ring[i];
      const int mid = ring[(i + 1) % k];
      const int b = ring[(i + 2) % k];
      const bool straight =
          lattice_collinear(mesh.vertexParams[static_cast<std::size_t>(a)],
                            mesh.vertexParams[static_cast<std::size_t>(mid)],
                            mesh.vertexParams[static_cast<std::size_t>(b)]);
      addSpring(a, b, straight ? SpringKind::Bend : SpringKind::Shear,
                straight ? defaults.kBend : defaults.kShear);
    }
  }

  // straight runs across faces also brace with bend springs
  const auto neighbors = vertex_neighbors(mesh);
  for (std::size_t mid = 0; mid < neighbors.size(); ++mid) {
    const auto& around = neighbors[mid];
    for (std::size_t i = 0; i < around.size(); ++i)
      for (std::size_t j = i + 1; j < around.size(); ++j)
        if (lattice_collinear(
                mesh.vertexParams[static_cast<std::size_t>(around[i])],
                mesh.vertexParams[mid],
                mesh.vertexParams[static_cast<std::size_t>(around[j])]))
          addSpring(around[i], around[j], SpringKind::Bend, defaults.kBend);
  }

  return sys;
}

std::vector<int> corner_anchor_vertices(const HexMesh& mesh,
                                        const std::array<Vec3, 3>& corners) {
  std::set<int> picked;
  for (const Vec3& corner : corners) {
    double best = std::numeric_limits<double>::max();
    for (const Vec3& p : mesh.vertexPositions)
      best = std::min(best, (p - corner).norm());
    // ties held loosely: file round-tripping quantizes coordinates at 1e-9
    const double cutoff = best * (1.0 + 1e-6) + 1e-12;
    for (std::size_t i = 0; i < mesh.vertexCount(); ++i)
      if ((mesh.vertexPositions[i] - corner).norm() <= cutoff)
        picked.insert(static_cast<int>(i));
  }
  return {picked.begin(), picked.end()};
}

std::vector<int> boundary_anchor_vertices(const HexMesh& mesh) {
  std::vector<int> result;
  for (std::size_t i = 0; i < mesh.vertexCount(); ++i)
    if (mesh.isBoundaryVertex(static_cast<int>(i)))
      result.push_back(static_cast<int>(i));
  return result;
}

}  // namespace hexforge
