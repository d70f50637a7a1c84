#pragma once

#include <functional>
#include <vector>

#include "hexforge/geometry.hpp"
#include "hexforge/hexgrid.hpp"

namespace hexforge {

struct Particle {
  double mass = 1.0;       // kg
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  bool anchored = false;
};

enum class SpringKind { Stretch, Shear, Bend };

struct Spring {
  int i = 0, j = 0;          // particle indices, i < j
  double stiffness = 0.0;    // N/m
  double restLength = 0.0;   // m
  double damping = 0.0;      // N*s/m, axial on relative velocity
  SpringKind kind = SpringKind::Stretch;
};

struct SimulationParams {
  double gravity = 9.81;        // m/s^2, applied as (0, 0, -m*g)
  double dt = 0.005;            // s
  double globalDamping = 5.0;   // N*s/m, linear drag -c*v
  double forceTolerance = 1e-4; // N
  long maxSteps = 200000;
  bool invertAfterSolve = true; // mirror z about the anchor plane
};

struct SpringSystem {
  std::vector<Particle> particles;
  std::vector<Spring> springs;
  SimulationParams params;
};

struct SpringDefaults {
  double mass = 1.0;
  double kStretch = 500.0;
  double kShear = 50.0;
  double kBend = 50.0;
  double springDamping = 0.0;
};

/// Stretch springs on every hexagon edge; one spring per distance-2 vertex
/// pair: bend when the pair is lattice-collinear through the shared
/// neighbor, shear when the pair lies (non-collinearly) within one face.
/// Rest lengths equal the initial distances. Throws EmptyAnchorSet when
/// gravity is nonzero and no anchors are given.
SpringSystem build_spring_system(const HexMesh& mesh,
                                 const SpringDefaults& defaults,
                                 const std::vector<int>& anchors,
                                 const SimulationParams& params);

/// Hooke force on the endpoint at x1: K (L - |x1-x2|) (x1-x2)/|x1-x2|.
/// Throws CoincidentEndpoints when |x1-x2| <= 1e-12 m.
Vec3 spring_force(const Spring& s, const Vec3& x1, const Vec3& x2);

Vec3 gravity_force(const Particle& p, double g);

/// Linear drag -c * v.
Vec3 damping_force(const Particle& p, double cGlobal);

/// Net force per particle (springs + gravity + drag). Anchored particles
/// report their accumulated force too; integration ignores it.
std::vector<Vec3> accumulate_forces(const SpringSystem& sys);

/// Classical 4th-order Runge-Kutta update of (x, v) for free particles.
/// Throws NonFiniteState when a coordinate leaves the finite range.
void step_rk4(SpringSystem& sys);

struct EquilibriumResult {
  std::vector<Vec3> finalPositions;
  long steps = 0;
  double maxResidualForce = 0.0;
};

/// Called with (step, system, max residual) before the first step and
/// after every step.
using StepObserver =
    std::function<void(long, const SpringSystem&, double)>;

/// Step until the max net force over free particles drops below
/// forceTolerance, or throw NoConvergence at maxSteps. With
/// invertAfterSolve the returned positions are mirrored in z about the
/// anchors' mean plane (the system itself is left at the raw equilibrium).
EquilibriumResult simulate_to_equilibrium(SpringSystem& sys,
                                          const StepObserver& observer = {});

double kinetic_energy(const SpringSystem& sys);

/// Mesh vertices nearest each base-triangle corner (ties kept).
std::vector<int> corner_anchor_vertices(const HexMesh& mesh,
                                        const std::array<Vec3, 3>& corners);

/// All mesh vertices on the base-triangle boundary.
std::vector<int> boundary_anchor_vertices(const HexMesh& mesh);

}  // namespace hexforge
