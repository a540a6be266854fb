#pragma once

#include "slabflow/kernels.hpp"
#include "slabflow/mesh.hpp"
#include "slabflow/solvers.hpp"

#include <cmath>
#include <map>
#include <span>
#include <vector>

namespace slabflow {

/// Nondimensional flow parameters. Permeability, reference viscosity,
/// pressure drop and length scale are absorbed into the scaling.
struct FlowParams {
  double xi = 2.0;      // viscosity exponent: eta = exp(xi * phi)
  double v_char = 1.0;  // relative resolution of space and time

  double viscosity(double phi) const { return std::exp(xi * phi); }
};

/// Element-constant Darcy velocity and the timespace transport direction
/// a = (v_x / v_char, v_y / v_char, 1).
struct ElementVelocity {
  std::vector<Vec2> spatial;
  std::vector<Vec3> transport;
};

std::vector<kernels::TetGeometry> tet_geometry(const SimplexMesh& mesh);

/// Consistent P1 mass matrix (symmetric, no constraints).
LinearSystem assemble_mass(const SimplexMesh& mesh, std::span<const kernels::TetGeometry> geom);

/// Pressure equation: int (1/eta(phi_K)) grad_s u . grad_s v with the
/// spatial-only gradient, p = 1 on INLET nodes and p = 0 on OUTER nodes.
LinearSystem assemble_pressure(const SimplexMesh& mesh, std::span<const double> phi, const FlowParams& params);

ElementVelocity compute_velocity(const SimplexMesh& mesh, std::span<const double> p, std::span<const double> phi,
                                 const FlowParams& params);

/// SUPG length scale of a tet: Steiner-ellipsoid extent along `direction`.
double supg_length(const SimplexMesh& mesh, int tet, const Vec3& direction);

/// Saturation transport a . grad phi = 0 with SUPG stabilisation
/// tau_K = h_K / (2 |a|). `dirichlet` holds the INLET and T_BEGIN values.
LinearSystem assemble_saturation(const SimplexMesh& mesh, const ElementVelocity& vel,
                                 const std::map<int, double>& dirichlet);

/// Saturation Dirichlet set: 1 on INLET nodes, `inflow` on T_BEGIN nodes.
std::map<int, double> saturation_dirichlet(const SimplexMesh& mesh, std::span<const double> inflow);

/// Element-average saturation of a tet.
inline double element_average(const Tet& t, std::span<const double> f) {
  return 0.25 * (f[t[0]] + f[t[1]] + f[t[2]] + f[t[3]]);
}

}  // namespace slabflow
