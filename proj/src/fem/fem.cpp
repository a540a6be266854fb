#include "slabflow/fem.hpp"

#include "slabflow/error.hpp"

namespace slabflow {

namespace {

PlaneMask inner_mask(const AnnulusGeometry& g) { return (PlaneMask{1} << g.n_sides) - 1; }
PlaneMask outer_mask(const AnnulusGeometry& g) { return inner_mask(g) << g.n_sides; }

SparseMatrix from_triplets(int n, std::vector<Eigen::Triplet<double>>& triplets) {
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace

std::vector<kernels::TetGeometry> tet_geometry(const SimplexMesh& mesh) {
  std::vector<kernels::TetGeometry> geom(mesh.tets.size());
  kernels::tet_geometry(mesh, geom);
  return geom;
}

LinearSystem assemble_mass(const SimplexMesh& mesh, std::span<const kernels::TetGeometry> geom) {
  const int n = static_cast<int>(mesh.nodes.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.tets.size() * 16);
  for (std::size_t k = 0; k < mesh.tets.size(); ++k) {
    const Tet& t = mesh.tets[k];
    const double v = geom[k].volume / 20.0;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) triplets.emplace_back(t[i], t[j], i == j ? 2.0 * v : v);
    }
  }
  LinearSystem sys;
  sys.matrix = from_triplets(n, triplets);
  sys.rhs = Eigen::VectorXd::Zero(n);
  sys.symmetric = true;
  return sys;
}

LinearSystem assemble_pressure(const SimplexMesh& mesh, std::span<const double> phi, const FlowParams& params) {
  if (phi.size() != mesh.nodes.size()) throw PreconditionError("assemble_pressure: phi size mismatch");
  const int n = static_cast<int>(mesh.nodes.size());
  const auto geom = tet_geometry(mesh);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.tets.size() * 16);
  for (std::size_t k = 0; k < mesh.tets.size(); ++k) {
    const Tet& t = mesh.tets[k];
    const double coef = geom[k].volume / params.viscosity(element_average(t, phi));
    for (int i = 0; i < 4; ++i) {
      const Vec3& gi = geom[k].grad[i];
      for (int j = 0; j < 4; ++j) {
        const Vec3& gj = geom[k].grad[j];
        triplets.emplace_back(t[i], t[j], coef * (gi.x() * gj.x() + gi.y() * gj.y()));
      }
    }
  }
  LinearSystem sys;
  sys.matrix = from_triplets(n, triplets);
  sys.rhs = Eigen::VectorXd::Zero(n);
  sys.symmetric = true;
  const PlaneMask inner = inner_mask(mesh.geometry), outer = outer_mask(mesh.geometry);
  for (int i = 0; i < n; ++i) {
    if (mesh.planes[i] & inner) sys.dirichlet[i] = 1.0;
    if (mesh.planes[i] & outer) sys.dirichlet[i] = 0.0;
  }
  return sys;
}

ElementVelocity compute_velocity(const SimplexMesh& mesh, std::span<const double> p, std::span<const double> phi,
                                 const FlowParams& params) {
  if (p.size() != mesh.nodes.size() || phi.size() != mesh.nodes.size()) {
    throw PreconditionError("compute_velocity: field size mismatch");
  }
  const auto geom = tet_geometry(mesh);
  ElementVelocity vel;
  vel.spatial.resize(mesh.tets.size());
  vel.transport.resize(mesh.tets.size());
  for (std::size_t k = 0; k < mesh.tets.size(); ++k) {
    const Tet& t = mesh.tets[k];
    Vec3 grad = Vec3::Zero();
    for (int i = 0; i < 4; ++i) grad += p[t[i]] * geom[k].grad[i];
    const double mobility = 1.0 / params.viscosity(element_average(t, phi));
    vel.spatial[k] = Vec2(-mobility * grad.x(), -mobility * grad.y());
    vel.transport[k] = Vec3(vel.spatial[k].x() / params.v_char, vel.spatial[k].y() / params.v_char, 1.0);
  }
  return vel;
}

double supg_length(const SimplexMesh& mesh, int tet, const Vec3& direction) {
  const Tet& t = mesh.tets[tet];
  const Ellipsoid e = steiner_ellipsoid(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]], mesh.nodes[t[3]]);
  return directional_extent(e, direction);
}

LinearSystem assemble_saturation(const SimplexMesh& mesh, const ElementVelocity& vel,
                                 const std::map<int, double>& dirichlet) {
  if (vel.transport.size() != mesh.tets.size()) throw PreconditionError("assemble_saturation: velocity size");
  const int n = static_cast<int>(mesh.nodes.size());
  const auto geom = tet_geometry(mesh);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.tets.size() * 16);
  for (std::size_t k = 0; k < mesh.tets.size(); ++k) {
    const Tet& t = mesh.tets[k];
    const Vec3& a = vel.transport[k];
    const double anorm = a.norm();
    const double tau = supg_length(mesh, static_cast<int>(k), a) / (2.0 * anorm);
    const double vol = geom[k].volume;
    std::array<double, 4> adg{};
    for (int j = 0; j < 4; ++j) adg[j] = a.dot(geom[k].grad[j]);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        triplets.emplace_back(t[i], t[j], vol * (0.25 * adg[j] + tau * adg[i] * adg[j]));
      }
    }
  }
  LinearSystem sys;
  sys.matrix = from_triplets(n, triplets);
  sys.rhs = Eigen::VectorXd::Zero(n);
  sys.symmetric = false;
  sys.dirichlet = dirichlet;
  return sys;
}

std::map<int, double> saturation_dirichlet(const SimplexMesh& mesh, std::span<const double> inflow) {
  if (inflow.size() != mesh.nodes.size()) throw PreconditionError("saturation_dirichlet: inflow size mismatch");
  std::map<int, double> bc;
  const PlaneMask inner = inner_mask(mesh.geometry);
  const int begin_bit = mesh.geometry.t_begin_bit();
  for (int i = 0; i < static_cast<int>(mesh.nodes.size()); ++i) {
    if (mesh.planes[i] & inner) {
      bc[i] = 1.0;
    } else if (mesh.on_plane(i, begin_bit)) {
      bc[i] = inflow[i];
    }
  }
  return bc;
}

}  // namespace slabflow
