#include "slabflow/error.hpp"
#include "slabflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <unordered_map>

namespace slabflow {

namespace {

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// Positive when d lies strictly inside the circumcircle of the
// counter-clockwise triangle (a, b, c).
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  const Vec2 ad = a - d, bd = b - d, cd = c - d;
  const double al = ad.squaredNorm(), bl = bd.squaredNorm(), cl = cd.squaredNorm();
  return ad.x() * (bd.y() * cl - cd.y() * bl) - ad.y() * (bd.x() * cl - cd.x() * bl) +
         al * (bd.x() * cd.y() - cd.x() * bd.y());
}

struct Triangulation2D {
  std::vector<Vec2> points;
  std::vector<PlaneMask> planes;
  std::vector<Tri> tris;
};

// Concentric polygon rings zipped into a strip triangulation; the boundary
// edges are the polygon sides by construction.
Triangulation2D ring_triangulation(double h0, const AnnulusGeometry& g) {
  const int n = g.n_sides;
  const double half_angle = std::numbers::pi / n;
  const double radial_gap = (g.r_out - g.r_in) * std::cos(half_angle);
  const int rings = std::max(1, static_cast<int>(std::lround(radial_gap / (h0 * std::sqrt(3.0) / 2.0))));

  Triangulation2D tri;
  std::vector<int> ring_start, ring_m;
  for (int k = 0; k <= rings; ++k) {
    const double rho = (k == rings) ? g.r_out : g.r_in + (g.r_out - g.r_in) * k / rings;
    const double side = 2.0 * rho * std::sin(half_angle);
    const int m = std::max(1, static_cast<int>(std::lround(side / h0)));
    ring_start.push_back(static_cast<int>(tri.points.size()));
    ring_m.push_back(m);
    for (int s = 0; s < n; ++s) {
      const Vec2 c0 = g.corner(rho, s), c1 = g.corner(rho, s + 1);
      for (int j = 0; j < m; ++j) {
        const double u = static_cast<double>(j) / m;
        tri.points.push_back(j == 0 ? c0 : Vec2((1.0 - u) * c0 + u * c1));
        PlaneMask mask = 0;
        if (k == 0 || k == rings) {
          const bool inner = k == 0;
          auto bit = [&](int side_index) {
            const int sidx = (side_index + n) % n;
            return PlaneMask{1} << (inner ? g.inner_bit(sidx) : g.outer_bit(sidx));
          };
          mask |= bit(s);
          if (j == 0) mask |= bit(s - 1);
        }
        tri.planes.push_back(mask);
      }
    }
  }

  for (int k = 0; k < rings; ++k) {
    const int ma = ring_m[k], mb = ring_m[k + 1];
    const int na = n * ma, nb = n * mb;
    for (int s = 0; s < n; ++s) {
      auto a = [&](int i) { return ring_start[k] + (s * ma + i) % na; };
      auto b = [&](int j) { return ring_start[k + 1] + (s * mb + j) % nb; };
      int i = 0, j = 0;
      while (i < ma || j < mb) {
        Tri t;
        const bool advance_a = (j == mb) || (i < ma && (i + 1) * mb <= (j + 1) * ma);
        if (advance_a) {
          t = {a(i), b(j), a(i + 1)};
          ++i;
        } else {
          t = {a(i), b(j), b(j + 1)};
          ++j;
        }
        if (orient2d(tri.points[t[0]], tri.points[t[1]], tri.points[t[2]]) < 0.0) std::swap(t[1], t[2]);
        tri.tris.push_back(t);
      }
    }
  }
  return tri;
}

// Lawson edge flips to the Delaunay triangulation of the point set that
// keeps every boundary edge (boundary edges have a single incident triangle).
void delaunay_flips(Triangulation2D& tri) {
  const double scale = 1.0;
  for (int pass = 0; pass < 200; ++pass) {
    std::unordered_map<std::uint64_t, std::array<int, 2>> edge_tris;
    edge_tris.reserve(tri.tris.size() * 3);
    for (int t = 0; t < static_cast<int>(tri.tris.size()); ++t) {
      for (int e = 0; e < 3; ++e) {
        auto [it, inserted] = edge_tris.try_emplace(edge_key(tri.tris[t][e], tri.tris[t][(e + 1) % 3]),
                                                    std::array<int, 2>{t, -1});
        if (!inserted) it->second[1] = t;
      }
    }
    std::vector<std::uint64_t> keys;
    keys.reserve(edge_tris.size());
    for (const auto& [key, ts] : edge_tris) {
      if (ts[1] >= 0) keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end());

    std::vector<std::uint8_t> touched(tri.tris.size(), 0);
    int flips = 0;
    for (std::uint64_t key : keys) {
      const auto [t1, t2] = edge_tris[key];
      if (touched[t1] || touched[t2]) continue;
      const int u = static_cast<int>(key >> 32), v = static_cast<int>(key & 0xffffffffU);
      auto opposite = [&](int t) {
        for (int x : tri.tris[t]) {
          if (x != u && x != v) return x;
        }
        return -1;
      };
      // Orient so that (p, q, w1) is the counter-clockwise triangle t1.
      int p = u, q = v;
      const Tri& a = tri.tris[t1];
      for (int e = 0; e < 3; ++e) {
        if (a[e] == v && a[(e + 1) % 3] == u) std::swap(p, q);
      }
      const int w1 = opposite(t1), w2 = opposite(t2);
      const auto& X = tri.points;
      if (incircle(X[p], X[q], X[w1], X[w2]) <= 1e-12 * scale) continue;
      // Quad p, w2, q, w1 must be strictly convex.
      if (orient2d(X[p], X[w2], X[w1]) <= 0.0 || orient2d(X[w2], X[q], X[w1]) <= 0.0) continue;
      tri.tris[t1] = {p, w2, w1};
      tri.tris[t2] = {w2, q, w1};
      touched[t1] = touched[t2] = 1;
      ++flips;
    }
    if (flips == 0) return;
  }
}

// Laplacian smoothing of the interior points; a move is kept only when every
// incident triangle stays positively oriented.
void smooth_interior(Triangulation2D& tri, int iterations) {
  const int n = static_cast<int>(tri.points.size());
  std::vector<std::vector<int>> point_tris(n);
  for (int t = 0; t < static_cast<int>(tri.tris.size()); ++t) {
    for (int v : tri.tris[t]) point_tris[v].push_back(t);
  }
  for (int it = 0; it < iterations; ++it) {
    for (int v = 0; v < n; ++v) {
      if (tri.planes[v] != 0) continue;
      std::set<int> ring;
      for (int t : point_tris[v]) {
        for (int w : tri.tris[t]) {
          if (w != v) ring.insert(w);
        }
      }
      Vec2 c = Vec2::Zero();
      for (int w : ring) c += tri.points[w];
      c /= static_cast<double>(ring.size());
      const Vec2 old = tri.points[v];
      tri.points[v] = c;
      for (int t : point_tris[v]) {
        const Tri& x = tri.tris[t];
        if (orient2d(tri.points[x[0]], tri.points[x[1]], tri.points[x[2]]) <= 0.0) {
          tri.points[v] = old;
          break;
        }
      }
    }
  }
}

}  // namespace

SimplexMesh build_slab_mesh(double h0, double t_start, double dt, const AnnulusGeometry& g) {
  if (!(g.r_in > 0.0 && g.r_in < g.r_out) || g.n_sides < 3 || g.n_sides > 31) {
    throw PreconditionError("build_slab_mesh: invalid annulus geometry");
  }
  if (!(h0 > 0.0 && h0 <= g.r_out)) {
    throw PreconditionError("build_slab_mesh: h0 must satisfy 0 < h0 <= r_out");
  }
  if (!(dt > 0.0)) throw PreconditionError("build_slab_mesh: dt must be positive");

  Triangulation2D tri = ring_triangulation(h0, g);
  delaunay_flips(tri);
  for (int round = 0; round < 3; ++round) {
    smooth_interior(tri, 5);
    delaunay_flips(tri);
  }

  const int layers = std::max(1, static_cast<int>(std::lround(dt / h0)));
  const int n2 = static_cast<int>(tri.points.size());

  SimplexMesh mesh;
  mesh.geometry = g;
  mesh.t_begin = t_start;
  mesh.t_end = t_start + dt;
  mesh.nodes.reserve(static_cast<std::size_t>(n2) * (layers + 1));
  for (int l = 0; l <= layers; ++l) {
    const double t = (l == layers) ? mesh.t_end : t_start + dt * l / layers;
    for (int i = 0; i < n2; ++i) {
      mesh.nodes.emplace_back(tri.points[i].x(), tri.points[i].y(), t);
      PlaneMask m = tri.planes[i];
      if (l == 0) m |= PlaneMask{1} << g.t_begin_bit();
      if (l == layers) m |= PlaneMask{1} << g.t_end_bit();
      mesh.planes.push_back(m);
    }
  }
  mesh.frozen.assign(mesh.nodes.size(), 0);

  for (int l = 0; l < layers; ++l) {
    for (const Tri& t2 : tri.tris) {
      Tri s = t2;
      std::sort(s.begin(), s.end());
      const int a0 = l * n2 + s[0], b0 = l * n2 + s[1], c0 = l * n2 + s[2];
      const int a1 = a0 + n2, b1 = b0 + n2, c1 = c0 + n2;
      // Each quad face is cut from its lower-index bottom node to its
      // higher-index top node, so neighbouring prisms agree.
      for (Tet tet : {Tet{a0, b0, c0, c1}, Tet{a0, b0, b1, c1}, Tet{a0, a1, b1, c1}}) {
        if (tet_volume(mesh.nodes[tet[0]], mesh.nodes[tet[1]], mesh.nodes[tet[2]], mesh.nodes[tet[3]]) < 0.0) {
          std::swap(tet[0], tet[1]);
        }
        mesh.tets.push_back(tet);
      }
    }
  }
  rebuild_boundary_facets(mesh);
  return mesh;
}

}  // namespace slabflow
