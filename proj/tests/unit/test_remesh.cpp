#include "helpers.hpp"
#include "slabflow/error.hpp"
#include "slabflow/quality.hpp"
#include "slabflow/remesh.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace slabflow;

namespace {

TensorField uniform_metric(const SimplexMesh& m, const Mat3& t) { return TensorField(m.nodes.size(), t); }

double min_quality(const SimplexMesh& m, const TensorField& metric) {
  return quality_report(m, metric, 1.0 / std::sqrt(2.0), std::sqrt(2.0)).min_quality;
}

/// Coordinates of the T_BEGIN facets, order independent.
std::set<std::array<double, 9>> begin_face(const SimplexMesh& m) {
  std::set<std::array<double, 9>> out;
  for (const auto& f : m.boundary_facets) {
    if (f.tag != FacetTag::TBegin) continue;
    std::array<Vec3, 3> p = {m.nodes[f.nodes[0]], m.nodes[f.nodes[1]], m.nodes[f.nodes[2]]};
    std::sort(p.begin(), p.end(), [](const Vec3& a, const Vec3& b) {
      return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
    });
    out.insert({p[0].x(), p[0].y(), p[0].z(), p[1].x(), p[1].y(), p[1].z(), p[2].x(), p[2].y(), p[2].z()});
  }
  return out;
}

Mat3 ring_metric(const Vec3& p, double sigma) {
  // tanh(20 (r - 0.25)) Hessian through the metric formula.
  const double r = std::hypot(p.x(), p.y());
  const double th = std::tanh(20.0 * (r - 0.25));
  const double s2 = 1.0 - th * th;
  const Eigen::Vector2d e(p.x() / r, p.y() / r);
  const Eigen::Matrix2d radial = e * e.transpose();
  Mat3 h = Mat3::Zero();
  h.topLeftCorner<2, 2>() = -800.0 * th * s2 * radial + (20.0 * s2 / r) * (Eigen::Matrix2d::Identity() - radial);
  MetricParams mp;
  mp.sigma = sigma;
  return metric_from_hessian(h, mp);
}

}  // namespace

TEST_CASE("coarsening removes nodes when every edge is short") {
  SimplexMesh m = build_slab_mesh(0.2, 0.0, 0.4);
  const std::size_t before = m.nodes.size();
  TensorField metric = uniform_metric(m, Mat3::Identity() / (0.4 * 0.4));
  const std::size_t n = coarsen_pass(m, metric, {});
  CHECK(n > 0);
  CHECK(m.nodes.size() < before);
  CHECK(metric.size() == m.nodes.size());
  CHECK(validate_mesh(m).clean());
}

TEST_CASE("coarsening leaves long edges alone") {
  SimplexMesh m = build_slab_mesh(0.2, 0.0, 0.4);
  double shortest = 1e9;
  for (const auto& e : mesh_edges(m)) shortest = std::min(shortest, (m.nodes[e[0]] - m.nodes[e[1]]).norm());
  TensorField metric = uniform_metric(m, Mat3::Identity() * (4.0 / (shortest * shortest)));
  const SimplexMesh before = m;
  CHECK(coarsen_pass(m, metric, {}) == 0);
  CHECK(m.nodes == before.nodes);
  CHECK(m.tets == before.tets);
}

TEST_CASE("coarsening keeps frozen nodes and the frozen face") {
  SimplexMesh m = build_slab_mesh(0.2, 0.0, 0.4);
  const auto face = begin_face(m);
  std::vector<Vec3> frozen_points;
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    if (m.on_plane(static_cast<int>(i), m.geometry.t_begin_bit())) frozen_points.push_back(m.nodes[i]);
  }
  TensorField metric = uniform_metric(m, Mat3::Identity() / (0.6 * 0.6));
  AdaptConstraints c;
  c.freeze_t_begin = true;
  CHECK(coarsen_pass(m, metric, c) > 0);
  CHECK(validate_mesh(m).clean());
  CHECK(begin_face(m) == face);
  std::size_t still = 0;
  for (const Vec3& p : frozen_points) {
    for (const Vec3& q : m.nodes) {
      if (p == q) {
        ++still;
        break;
      }
    }
  }
  CHECK(still == frozen_points.size());
}

TEST_CASE("refinement ignores meshes without long edges") {
  SimplexMesh m = build_slab_mesh(0.2, 0.0, 0.4);
  TensorField metric = uniform_metric(m, Mat3::Identity());
  const SimplexMesh before = m;
  CHECK(refine_pass(m, metric, {}) == 0);
  CHECK(m.tets == before.tets);
}

TEST_CASE("anisotropic refinement splits only edges long in the metric") {
  SimplexMesh m = build_slab_mesh(0.2, 0.0, 0.4);
  const Mat3 aniso = Vec3(1.0 / (0.06 * 0.06), 1.0 / (0.3 * 0.3), 1.0 / (0.3 * 0.3)).asDiagonal();
  TensorField metric = uniform_metric(m, aniso);
  const double q0 = min_quality(m, metric);
  std::map<std::pair<int, int>, double> before;
  for (const auto& e : mesh_edges(m)) {
    before[{e[0], e[1]}] = metric_edge_length(m.nodes[e[0]], m.nodes[e[1]], aniso, aniso);
  }
  const std::size_t n_before = m.nodes.size();
  const std::size_t splits = refine_pass(m, metric, {});
  CHECK(splits > 0);
  CHECK(m.nodes.size() == n_before + splits);
  CHECK(validate_mesh(m).clean());
  CHECK(min_quality(m, metric) >= q0);
  // Split nodes are appended, so surviving edges keep their indices.
  std::set<std::pair<int, int>> after;
  for (const auto& e : mesh_edges(m)) after.insert({e[0], e[1]});
  for (const auto& [e, len] : before) {
    if (!after.count(e)) CHECK(len > std::sqrt(2.0));
  }
}

TEST_CASE("swapping and smoothing never lower the minimum quality") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 4; ++trial) {
    SimplexMesh m = build_slab_mesh(0.2, 0.0, 0.4);
    // Jitter interior nodes to create poor elements.
    std::uniform_real_distribution<double> u(-0.06, 0.06);
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
      if (m.planes[i] != 0) continue;
      const Vec3 old = m.nodes[i];
      m.nodes[i] += Vec3(u(rng), u(rng), u(rng));
      if (!validate_mesh(m).clean()) m.nodes[i] = old;
    }
    REQUIRE(validate_mesh(m).clean());
    TensorField metric = uniform_metric(m, Mat3::Identity() / (0.2 * 0.2));
    const double q0 = min_quality(m, metric);
    swap_pass(m, metric, {});
    CHECK(validate_mesh(m).clean());
    const double q1 = min_quality(m, metric);
    CHECK(q1 >= q0);
    smooth_pass(m, metric, {});
    CHECK(validate_mesh(m).clean());
    CHECK(min_quality(m, metric) >= q1);
  }
}

TEST_CASE("smoothing pulls a displaced node back") {
  SimplexMesh m = build_slab_mesh(0.2, 0.0, 0.6);
  int v = -1;
  for (std::size_t i = 0; i < m.nodes.size() && v < 0; ++i) {
    if (m.planes[i] == 0) v = static_cast<int>(i);
  }
  REQUIRE(v >= 0);
  TensorField metric = uniform_metric(m, Mat3::Identity() / (0.2 * 0.2));
  const Vec3 home = m.nodes[v];
  m.nodes[v] += Vec3(0.05, 0.03, 0.04);
  REQUIRE(validate_mesh(m).clean());
  auto incident_min = [&](const SimplexMesh& mesh) {
    double q = 1.0;
    for (std::size_t k = 0; k < mesh.tets.size(); ++k) {
      const Tet& t = mesh.tets[k];
      if (std::find(t.begin(), t.end(), v) != t.end()) q = std::min(q, element_quality(mesh, static_cast<int>(k), metric));
    }
    return q;
  };
  const double before = incident_min(m);
  const Vec3 displaced = m.nodes[v];
  smooth_pass(m, metric, {});
  CHECK(m.nodes[v] != displaced);
  CHECK((m.nodes[v] - home).norm() < (displaced - home).norm());
  CHECK(incident_min(m) > before);
}

TEST_CASE("frozen nodes never move") {
  SimplexMesh m = build_slab_mesh(0.2, 0.0, 0.4);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    if (m.planes[i] != 0) continue;
    const Vec3 old = m.nodes[i];
    m.nodes[i] += Vec3(u(rng), u(rng), u(rng));
    if (!validate_mesh(m).clean()) m.nodes[i] = old;
    m.frozen[i] = i % 2;
  }
  const SimplexMesh before = m;
  TensorField metric = uniform_metric(m, Mat3::Identity() / (0.2 * 0.2));
  CHECK(smooth_pass(m, metric, {}) > 0);
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    if (before.frozen[i]) CHECK(m.nodes[i] == before.nodes[i]);
  }
}

TEST_CASE("adaptation reduces out-of-band edges on random initial meshes") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int seed = 0; seed < 5; ++seed) {
    // Smooth anisotropic size field, rotated about the time axis.
    const double h_radial = 0.08 + 0.08 * u(rng), h_angular = 0.12 + 0.1 * u(rng), h_time = 0.1 + 0.1 * u(rng);
    const double wave = 2.0 + 4.0 * u(rng);
    const SimplexMesh m = build_slab_mesh(0.1 + 0.2 * u(rng), 0.0, 0.3 + 0.5 * u(rng));
    const AnalyticMetric source([=](const Vec3& p) {
      const double r = std::hypot(p.x(), p.y());
      const double a = std::atan2(p.y(), p.x());
      const double hr = h_radial * (1.0 + 0.5 * std::sin(wave * r));
      Mat3 rot = Mat3::Identity();
      rot.topLeftCorner<2, 2>() << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
      const Vec3 d(1.0 / (hr * hr), 1.0 / (h_angular * h_angular), 1.0 / (h_time * h_time));
      return Mat3(rot * d.asDiagonal() * rot.transpose());
    });
    AdaptOptions opt;
    opt.max_sweeps = 5;
    opt.stop_fraction = 0.0;
    const AdaptResult r = adapt(m, source, {}, opt);
    CAPTURE(seed);
    REQUIRE(r.sweeps.size() >= 2);
    const auto outside = [](const SweepLog& l) {
      return std::lround((1.0 - l.fraction_in_band) * static_cast<double>(l.edges));
    };
    CHECK(outside(r.sweeps.back()) < outside(r.sweeps.front()));
    CHECK(validate_mesh(r.mesh).clean());
    CHECK(r.report.fraction_in_band > 0.8);
  }
}

TEST_CASE("the tanh ring metric is mostly met after adaptation") {
  const SimplexMesh m = build_slab_mesh(0.2, 0.0, 1.0);
  const AnalyticMetric source([](const Vec3& p) { return ring_metric(p, 0.08); });
  AdaptOptions opt;
  opt.max_sweeps = 8;
  const AdaptResult r = adapt(m, source, {}, opt);
  const QualityReport wide = quality_report(r.mesh, r.metric, 0.5, 2.0);
  CHECK(wide.fraction_in_band >= 0.8);
  CHECK(validate_mesh(r.mesh).clean());
}

TEST_CASE("adaptation keeps a frozen T_BEGIN face bit-identical") {
  const SimplexMesh m = build_slab_mesh(0.15, 0.0, 0.3);
  const AnalyticMetric source([](const Vec3& p) { return ring_metric(p, 0.1); });
  AdaptConstraints c;
  c.freeze_t_begin = true;
  AdaptOptions opt;
  opt.max_sweeps = 3;
  const AdaptResult r = adapt(m, source, c, opt);
  CHECK(validate_mesh(r.mesh).clean());
  CHECK(begin_face(r.mesh) == begin_face(m));
  for (std::size_t i = 0; i < r.mesh.nodes.size(); ++i) {
    if (r.mesh.on_plane(static_cast<int>(i), r.mesh.geometry.t_begin_bit())) {
      REQUIRE(r.origin[i] >= 0);
      CHECK(r.mesh.nodes[i] == m.nodes[r.origin[i]]);
    }
  }
}

TEST_CASE("an adapted mesh is a fixed point of adaptation") {
  const SimplexMesh m = build_slab_mesh(0.2, 0.0, 0.4);
  const TensorField metric = uniform_metric(m, Mat3::Identity() / (0.15 * 0.15));
  AdaptOptions opt;
  opt.max_sweeps = 10;
  const AdaptResult first = adapt(m, metric, {}, opt);
  opt.max_sweeps = 1;
  const AdaptResult again = adapt(first.mesh, first.metric, {}, opt);
  REQUIRE(again.sweeps.size() == 1);
  const auto& s = again.sweeps[0];
  const double changed = static_cast<double>(s.collapses + s.splits + s.swaps) / static_cast<double>(s.edges);
  CHECK(changed <= 0.01);
}

TEST_CASE("transfer_field copies kept nodes and interpolates new ones") {
  const SimplexMesh m = build_slab_mesh(0.2, 0.0, 0.4);
  std::vector<double> f(m.nodes.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = 1.0 + m.nodes[i].x() - 2.0 * m.nodes[i].z();
  const AnalyticMetric source([](const Vec3& p) { return ring_metric(p, 0.2); });
  AdaptOptions opt;
  opt.max_sweeps = 2;
  const AdaptResult r = adapt(m, source, {}, opt);
  const auto g = transfer_field(m, f, r);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3& p = r.mesh.nodes[i];
    CHECK(g[i] == doctest::Approx(1.0 + p.x() - 2.0 * p.z()).epsilon(1e-10));
    if (r.origin[i] >= 0) CHECK(g[i] == f[r.origin[i]]);
  }
}

TEST_CASE("adapt rejects a zero sweep budget") {
  const SimplexMesh m = build_slab_mesh(0.3, 0.0, 0.3);
  AdaptOptions opt;
  opt.max_sweeps = 0;
  CHECK_THROWS_AS(adapt(m, uniform_metric(m, Mat3::Identity()), {}, opt), PreconditionError);
}
