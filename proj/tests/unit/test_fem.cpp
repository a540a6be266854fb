#include "helpers.hpp"
#include "slabflow/error.hpp"
#include "slabflow/fem.hpp"

#include <doctest.h>

using namespace slabflow;

namespace {

double radius(const Vec3& p) { return std::hypot(p.x(), p.y()); }

}  // namespace

TEST_CASE("pressure with uniform viscosity follows the logarithmic profile") {
  const SimplexMesh m = build_slab_mesh(0.04, 0.0, 0.2);
  const std::vector<double> phi(m.nodes.size(), 0.0);
  const LinearSystem sys = assemble_pressure(m, phi, {});
  CHECK(sys.symmetric);
  const auto p = solve_direct(sys);
  // Radial oracle for concentric circles; the polygon sides deviate from
  // the circles by 1 - cos(pi / 13), about 3%.
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double exact = std::log(radius(m.nodes[i])) / std::log(0.1);
    worst = std::max(worst, std::abs(p[i] - exact));
  }
  CHECK(worst < 0.02);
}

TEST_CASE("direct and conjugate gradient solves agree") {
  const SimplexMesh m = build_slab_mesh(0.1, 0.0, 0.3);
  std::vector<double> phi(m.nodes.size());
  for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = std::clamp(1.5 - 2.0 * radius(m.nodes[i]), 0.0, 1.0);
  const LinearSystem sys = assemble_pressure(m, phi, {});
  const auto direct = solve_direct(sys);
  const auto it = solve_iterative_detailed(sys, 1e-12);
  CHECK(it.relative_residual <= 1e-12);
  for (std::size_t i = 0; i < direct.size(); ++i) CHECK(it.x[i] == doctest::Approx(direct[i]).epsilon(1e-8));
  const auto warm = solve_iterative_detailed(sys, 1e-12, &direct);
  CHECK(warm.iterations <= 1);
}

TEST_CASE("pressure Dirichlet values are exact") {
  const SimplexMesh m = build_slab_mesh(0.1, 0.0, 0.3);
  const std::vector<double> phi(m.nodes.size(), 0.5);
  const LinearSystem sys = assemble_pressure(m, phi, {});
  const auto p = solve_iterative(sys);
  std::size_t inlet = 0, outer = 0;
  for (const auto& [node, value] : sys.dirichlet) {
    CHECK(p[node] == value);
    const double r = radius(m.nodes[node]);
    if (value == 1.0) {
      ++inlet;
      CHECK(r <= 0.1 + 1e-12);
    } else {
      ++outer;
      CHECK(value == 0.0);
      CHECK(r >= std::cos(std::numbers::pi / 13) - 1e-12);
    }
  }
  CHECK(inlet > 0);
  CHECK(outer > 0);
}

TEST_CASE("velocity of the radial pressure points outward") {
  const SimplexMesh m = build_slab_mesh(0.1, 0.0, 0.3);
  const std::vector<double> phi(m.nodes.size(), 0.0);
  const auto p = solve_direct(assemble_pressure(m, phi, {}));
  FlowParams flow;
  flow.v_char = 2.0;
  const ElementVelocity v = compute_velocity(m, p, phi, flow);
  REQUIRE(v.spatial.size() == m.tets.size());
  for (std::size_t k = 0; k < m.tets.size(); ++k) {
    Vec3 c = Vec3::Zero();
    for (int n : m.tets[k]) c += 0.25 * m.nodes[n];
    CHECK(v.spatial[k].dot(Vec2(c.x(), c.y())) > 0.0);
    CHECK(v.transport[k].z() == 1.0);
    CHECK(v.transport[k].x() == doctest::Approx(v.spatial[k].x() / 2.0));
  }
}

TEST_CASE("higher viscosity slows the flow") {
  const SimplexMesh m = build_slab_mesh(0.15, 0.0, 0.3);
  const std::vector<double> zero(m.nodes.size(), 0.0), one(m.nodes.size(), 1.0);
  FlowParams flow;
  flow.xi = 2.0;
  const auto p = solve_direct(assemble_pressure(m, one, flow));
  const ElementVelocity slow = compute_velocity(m, p, one, flow);
  const ElementVelocity fast = compute_velocity(m, p, zero, flow);
  // Same pressure, uniform phi: the velocity scales with exp(-xi).
  for (std::size_t k = 0; k < m.tets.size(); ++k) {
    CHECK(slow.spatial[k].norm() == doctest::Approx(fast.spatial[k].norm() * std::exp(-2.0)));
  }
}

TEST_CASE("SUPG transport reproduces a linear solution") {
  const SimplexMesh m = build_slab_mesh(0.12, 0.0, 0.4);
  ElementVelocity vel;
  vel.spatial.assign(m.tets.size(), Vec2(1.0, 0.0));
  vel.transport.assign(m.tets.size(), Vec3(1.0, 0.0, 1.0));
  std::map<int, double> bc;
  std::size_t interior = 0;
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    if (m.planes[i] != 0) {
      bc[static_cast<int>(i)] = m.nodes[i].x() - m.nodes[i].z();
    } else {
      ++interior;
    }
  }
  REQUIRE(interior > 0);
  const auto phi = solve_direct(assemble_saturation(m, vel, bc));
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    CHECK(phi[i] == doctest::Approx(m.nodes[i].x() - m.nodes[i].z()).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("saturation Dirichlet set covers the inlet and T_BEGIN") {
  const SimplexMesh m = build_slab_mesh(0.15, 0.0, 0.3);
  std::vector<double> inflow(m.nodes.size(), 0.25);
  const auto bc = saturation_dirichlet(m, inflow);
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    const int v = static_cast<int>(i);
    const bool inlet = radius(m.nodes[i]) <= 0.1 + 1e-12;
    const bool begin = m.on_plane(v, m.geometry.t_begin_bit());
    if (inlet) {
      CHECK(bc.at(v) == 1.0);
    } else if (begin) {
      CHECK(bc.at(v) == 0.25);
    } else {
      CHECK(bc.count(v) == 0);
    }
  }
}

TEST_CASE("SUPG length is the Steiner extent and ignores the direction sign") {
  const SimplexMesh m = build_slab_mesh(0.2, 0.0, 0.3);
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    const Vec3 d = test_support::random_vec(rng);
    const int tet = static_cast<int>(rng() % m.tets.size());
    const double h = supg_length(m, tet, d);
    CHECK(h > 0.0);
    CHECK(h == doctest::Approx(supg_length(m, tet, -3.0 * d)));
    // The ellipsoid contains every vertex, so its extent bounds the projections.
    const Tet& t = m.tets[tet];
    const Vec3 u = d.normalized();
    double lo = 1e9, hi = -1e9;
    for (int n : t) {
      lo = std::min(lo, u.dot(m.nodes[n]));
      hi = std::max(hi, u.dot(m.nodes[n]));
    }
    CHECK(h >= hi - lo - 1e-12);
  }
}

TEST_CASE("mass matrix entries sum to the slab volume") {
  const SimplexMesh m = build_slab_mesh(0.15, 0.0, 0.5);
  const auto geom = tet_geometry(m);
  const LinearSystem mass = assemble_mass(m, geom);
  CHECK(mass.matrix.sum() == doctest::Approx(m.total_volume()).epsilon(1e-12));
}

TEST_CASE("solvers reject broken systems") {
  LinearSystem sys;
  sys.matrix.resize(3, 3);
  sys.rhs = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(solve_direct(sys), SolverError);
  sys.symmetric = false;
  CHECK_THROWS_AS(solve_iterative(sys), PreconditionError);
  std::vector<Eigen::Triplet<double>> t = {{0, 0, -1.0}, {1, 1, -1.0}, {2, 2, -1.0}};
  sys.matrix.setFromTriplets(t.begin(), t.end());
  sys.symmetric = true;
  CHECK_THROWS_AS(solve_iterative(sys), SolverError);
  sys.dirichlet[7] = 1.0;
  CHECK_THROWS_AS(solve_direct(sys), PreconditionError);
  const SimplexMesh m = build_slab_mesh(0.3, 0.0, 0.3);
  CHECK_THROWS_AS(assemble_pressure(m, std::vector<double>(3), {}), PreconditionError);
}
