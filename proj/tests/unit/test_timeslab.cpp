#include "helpers.hpp"
#include "slabflow/error.hpp"
#include "slabflow/fem.hpp"
#include "slabflow/timeslab.hpp"

#include <doctest.h>

#include <map>

using namespace slabflow;

namespace {

double radius(const Vec3& p) { return std::hypot(p.x(), p.y()); }

SimConfig coarse_config() {
  SimConfig c;
  c.sigma = 0.3;
  c.h0 = 0.15;
  c.dt = 0.25;
  c.t_final = 0.5;
  c.iters_per_slab = 3;
  c.max_sweeps = 2;
  return c;
}

bool same_records(const ResidualTrace& a, const ResidualTrace& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].slab != b[i].slab || a[i].iteration != b[i].iteration || a[i].l2 != b[i].l2 ||
        a[i].sqrt_l2 != b[i].sqrt_l2 || a[i].nodes != b[i].nodes || a[i].tets != b[i].tets) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("initial saturation profiles") {
  for (auto p : {InflowProfile::Ramp, InflowProfile::Step, InflowProfile::Cosine}) {
    CHECK(initial_saturation(0.1, p) == 1.0);
    CHECK(initial_saturation(0.2, p) == 1.0);
    CHECK(initial_saturation(0.3, p) == 0.0);
    CHECK(initial_saturation(0.9, p) == 0.0);
  }
  CHECK(initial_saturation(0.25, InflowProfile::Ramp) == doctest::Approx(0.5));
  CHECK(initial_saturation(0.22, InflowProfile::Ramp) == doctest::Approx(0.8));
  CHECK(initial_saturation(0.25, InflowProfile::Step) == 0.0);
  CHECK(initial_saturation(0.25, InflowProfile::Cosine) == doctest::Approx(0.5));
  CHECK(initial_saturation(0.21, InflowProfile::Cosine) > initial_saturation(0.21, InflowProfile::Ramp));
}

TEST_CASE("initial pressure guesses") {
  CHECK(initial_pressure(0.55, PressureGuess::Verbatim) == doctest::Approx(0.5));
  CHECK(initial_pressure(0.55, PressureGuess::Complement) == doctest::Approx(0.5));
  CHECK(initial_pressure(0.1, PressureGuess::Verbatim) == doctest::Approx(0.0));
  CHECK(initial_pressure(0.1, PressureGuess::Complement) == doctest::Approx(1.0));
  CHECK(initial_pressure(1.0, PressureGuess::Verbatim) == doctest::Approx(1.0));
}

TEST_CASE("init_state sets inflow on T_BEGIN only") {
  SimConfig c = coarse_config();
  c.profile = InflowProfile::Cosine;
  const SlabState s = init_state(c);
  CHECK(s.slab_index == 0);
  CHECK(s.t_start == 0.0);
  CHECK(s.mesh.t_end == doctest::Approx(c.dt));
  for (std::size_t i = 0; i < s.mesh.nodes.size(); ++i) {
    const double r = radius(s.mesh.nodes[i]);
    if (s.mesh.on_plane(static_cast<int>(i), s.mesh.geometry.t_begin_bit())) {
      CHECK(s.inflow[i] == initial_saturation(r, InflowProfile::Cosine));
    } else {
      CHECK(s.inflow[i] == 0.0);
    }
    CHECK(s.phi[i] == 0.0);
    CHECK(s.p[i] == initial_pressure(r, PressureGuess::Verbatim));
  }
  SimConfig bad;
  CHECK_THROWS_AS(init_state(bad), ConfigError);
}

TEST_CASE("L2 residual against closed forms and an exact quadrature") {
  const SimplexMesh m = build_slab_mesh(0.2, 0.0, 0.4);
  const std::size_t n = m.nodes.size();
  std::vector<double> a(n), zero(n, 0.0), shifted(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = std::sin(3.0 * m.nodes[i].x()) + m.nodes[i].z();
    shifted[i] = a[i] + 0.3;
  }
  CHECK(l2_residual(a, a, m) == 0.0);
  CHECK(l2_residual(shifted, a, m) == doctest::Approx(0.09).epsilon(1e-12));
  // Exact integral of a squared P1 function: V/20 (sum f_i^2 + (sum f_i)^2).
  double num = 0.0, vol = 0.0;
  for (std::size_t k = 0; k < m.tets.size(); ++k) {
    const double v = std::abs(m.tet_signed_volume(static_cast<int>(k)));
    double s = 0.0, s2 = 0.0;
    for (int node : m.tets[k]) {
      s += a[node];
      s2 += a[node] * a[node];
    }
    num += v / 20.0 * (s2 + s * s);
    vol += v;
  }
  CHECK(l2_residual(a, zero, m) == doctest::Approx(num / vol).epsilon(1e-12));
  CHECK(l2_residual(a, zero, m) == doctest::Approx(l2_residual(zero, a, m)).epsilon(1e-15));
  CHECK_THROWS_AS(l2_residual(std::vector<double>(3), a, m), PreconditionError);
}

TEST_CASE("the first iteration solves without adapting") {
  const SimConfig c = coarse_config();
  SlabState s = init_state(c);
  const SimplexMesh before = s.mesh;
  const ResidualRecord r1 = slab_iteration(s, c, 1);
  CHECK(s.mesh.nodes == before.nodes);
  CHECK(s.mesh.tets == before.tets);
  CHECK(r1.slab == 0);
  CHECK(r1.iteration == 1);
  CHECK(r1.nodes == before.nodes.size());
  CHECK(r1.l2 > 0.0);
  CHECK(r1.sqrt_l2 == std::sqrt(r1.l2));
  CHECK(s.phi_prev == s.phi);
  const ResidualRecord r2 = slab_iteration(s, c, 2);
  CHECK(r2.nodes == before.nodes.size());  // solved on the mesh from iteration 1
  CHECK(s.mesh.nodes.size() != before.nodes.size());
  CHECK(validate_mesh(s.mesh).clean());
  CHECK(s.p.size() == s.mesh.nodes.size());
  CHECK(s.phi.size() == s.mesh.nodes.size());
  CHECK(s.inflow.size() == s.mesh.nodes.size());
}

TEST_CASE("without viscosity contrast the pressure does not depend on phi") {
  SimConfig c = coarse_config();
  c.xi = 0.0;
  SlabState s = init_state(c);
  std::vector<std::vector<double>> p;
  auto hook = [&](const SlabState& st) { p.push_back(st.p); };
  slab_iteration(s, c, 1, hook);
  // The second solve runs on the same mesh with a different phi.
  const ResidualRecord r = slab_iteration(s, c, 2, hook);
  REQUIRE(p.size() == 2);
  for (std::size_t i = 0; i < p[0].size(); ++i) CHECK(p[1][i] == doctest::Approx(p[0][i]).epsilon(1e-8));
  CHECK(r.l2 < 1e-16);
}

TEST_CASE("advance_slab hands T_END values to the next T_BEGIN") {
  const SimConfig c = coarse_config();
  SlabState s = init_state(c);
  for (int it = 1; it <= c.iters_per_slab; ++it) slab_iteration(s, c, it);
  const SlabState next = advance_slab(s, c);
  CHECK(next.slab_index == 1);
  CHECK(next.t_start == doctest::Approx(c.dt));
  CHECK(next.mesh.t_begin == doctest::Approx(s.mesh.t_end));
  CHECK(next.mesh.t_end == doctest::Approx(2.0 * c.dt));
  CHECK(validate_mesh(next.mesh).clean());
  const int old_end = s.mesh.geometry.t_end_bit();
  const int new_begin = next.mesh.geometry.t_begin_bit();
  std::size_t handed = 0;
  for (std::size_t i = 0; i < next.mesh.nodes.size(); ++i) {
    const int v = static_cast<int>(i);
    CHECK(s.mesh.on_plane(v, old_end) == next.mesh.on_plane(v, new_begin));
    if (next.mesh.on_plane(v, new_begin)) {
      ++handed;
      CHECK(next.inflow[i] == s.phi[i]);
      CHECK(next.mesh.frozen[i] == 1);
      CHECK(next.mesh.nodes[i].x() == s.mesh.nodes[i].x());
      CHECK(next.mesh.nodes[i].y() == s.mesh.nodes[i].y());
    } else {
      CHECK(next.inflow[i] == 0.0);
    }
    CHECK(next.phi[i] == 0.0);
  }
  CHECK(handed > 0);
}

TEST_CASE("run_simulation logs one record per iteration and is deterministic") {
  const SimConfig c = coarse_config();
  std::vector<int> seen;
  SimulationObserver obs;
  obs.on_record = [&](const ResidualRecord& r) { seen.push_back(r.slab * 100 + r.iteration); };
  const ResidualTrace a = run_simulation(c, obs);
  REQUIRE(a.size() == static_cast<std::size_t>(c.slab_count() * c.iters_per_slab));
  REQUIRE(seen.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].slab == static_cast<int>(i) / c.iters_per_slab);
    CHECK(a[i].iteration == static_cast<int>(i) % c.iters_per_slab + 1);
    CHECK(std::isfinite(a[i].l2));
    CHECK(a[i].sqrt_l2 == std::sqrt(a[i].l2));
  }
  CHECK(same_records(a, run_simulation(c)));
}

TEST_CASE("tail residual is the median of the final slab") {
  ResidualTrace t;
  for (int i = 1; i <= 6; ++i) t.push_back({0, i, 100.0, 10.0, 1, 1, 0.0});
  for (double v : {5.0, 1.0, 4.0, 2.0, 3.0, 9.0}) t.push_back({1, 1, v, std::sqrt(v), 1, 1, 0.0});
  CHECK(tail_residual(t) == 3.0);  // last five: 1 4 2 3 9
  CHECK(tail_residual(t, 4) == 3.5);
  CHECK(tail_residual(t, 50) == 3.5);  // only the final slab counts
  CHECK_THROWS_AS(tail_residual({}), PreconditionError);
}

TEST_CASE("slab_ending_at maps times to slab indices") {
  SimConfig c;
  c.sigma = 0.1;
  c.dt = 0.1;
  CHECK(slab_ending_at(c, 0.5) == 4);
  CHECK(slab_ending_at(c, 0.1) == 0);
  CHECK(slab_ending_at(c, 1.0) == 9);
  CHECK_FALSE(slab_ending_at(c, 0.0).has_value());
  CHECK_FALSE(slab_ending_at(c, 0.55).has_value());
  CHECK_FALSE(slab_ending_at(c, 1.1).has_value());
  c.dt = 0.05;
  CHECK(slab_ending_at(c, 0.5) == 9);
  c.dt = 1.0;
  CHECK_FALSE(slab_ending_at(c, 0.5).has_value());
}

TEST_CASE("config validation names the offending key") {
  SimConfig c;
  try {
    c.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "sigma");
  }
  c.sigma = 0.1;
  c.validate();
  c.dt = 0.3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.dt = 0.1;
  c.iters_per_slab = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.iters_per_slab = 20;
  c.l_high = 0.9;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.l_high = 2.0;
  CHECK(c.slab_count() == 10);
}

TEST_CASE("residuals settle below the second iteration within every slab") {
  SimConfig c;
  c.sigma = 0.08;
  c.h0 = 0.1;
  c.dt = 0.25;
  c.t_final = 0.5;
  c.iters_per_slab = 10;
  const ResidualTrace trace = run_simulation(c);
  std::map<int, std::vector<double>> by_slab;
  for (const auto& r : trace) by_slab[r.slab].push_back(r.l2);
  REQUIRE(by_slab.size() == 2);
  for (const auto& [slab, l2] : by_slab) {
    CAPTURE(slab);
    std::vector<double> tail(l2.end() - 5, l2.end());
    std::sort(tail.begin(), tail.end());
    CHECK(tail[2] < l2[1]);
  }
  // The first iteration of the second slab is a peak.
  CHECK(by_slab[1].front() > by_slab[0].back());
}
