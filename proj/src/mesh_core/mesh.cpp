#include "slabflow/mesh.hpp"

#include "slabflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace slabflow {

namespace {

constexpr std::array<std::array<int, 3>, 4> kTetFaces{{{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};

}  // namespace

std::uint64_t face_key(int a, int b, int c) {
  if (a > b) std::swap(a, b);
  if (b > c) std::swap(b, c);
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 42) | (static_cast<std::uint64_t>(b) << 21) |
         static_cast<std::uint64_t>(c);
}

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double SimplexMesh::tet_signed_volume(int tet) const {
  const Tet& t = tets[tet];
  return tet_volume(nodes[t[0]], nodes[t[1]], nodes[t[2]], nodes[t[3]]);
}

double SimplexMesh::total_volume() const {
  double v = 0.0;
  for (std::size_t i = 0; i < tets.size(); ++i) v += tet_signed_volume(static_cast<int>(i));
  return v;
}

double SimplexMesh::extent() const {
  if (nodes.empty()) return 0.0;
  Vec3 lo = nodes.front(), hi = nodes.front();
  for (const Vec3& x : nodes) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  return (hi - lo).maxCoeff();
}

MeshDefects validate_mesh(const SimplexMesh& mesh) {
  MeshDefects d;
  const int n = static_cast<int>(mesh.nodes.size());

  std::unordered_map<std::uint64_t, int> face_count;
  face_count.reserve(mesh.tets.size() * 4);
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    const Tet& tet = mesh.tets[t];
    bool in_range = true;
    for (int v : tet) in_range = in_range && v >= 0 && v < n;
    if (!in_range || mesh.tet_signed_volume(static_cast<int>(t)) <= 0.0) ++d.inverted_tets;
    if (!in_range) continue;
    for (const auto& f : kTetFaces) ++face_count[face_key(tet[f[0]], tet[f[1]], tet[f[2]])];
  }

  std::unordered_map<std::uint64_t, int> facet_count;
  for (const BoundaryFacet& bf : mesh.boundary_facets) ++facet_count[face_key(bf.nodes[0], bf.nodes[1], bf.nodes[2])];

  for (const auto& [key, count] : face_count) {
    if (count > 2) ++d.nonconforming_faces;
    if (count == 1 && !facet_count.contains(key)) ++d.untagged_boundary_faces;
  }
  for (const auto& [key, count] : facet_count) {
    auto it = face_count.find(key);
    if (count > 1 || it == face_count.end() || it->second != 1) ++d.nonconforming_faces;
  }

  std::vector<std::uint8_t> bad(mesh.nodes.size(), 0);
  const double tol = 1e-12 * std::max(1.0, mesh.extent());
  const AnnulusGeometry& g = mesh.geometry;
  for (int i = 0; i < n; ++i) {
    PlaneMask m = i < static_cast<int>(mesh.planes.size()) ? mesh.planes[i] : 0;
    for (int bit = 0; m != 0; ++bit, m >>= 1) {
      if (!(m & 1U)) continue;
      if (bit >= g.plane_count()) {
        bad[i] = 1;
        continue;
      }
      if (bit == g.t_begin_bit()) {
        if (mesh.nodes[i].z() != mesh.t_begin) bad[i] = 1;
      } else if (bit == g.t_end_bit()) {
        if (mesh.nodes[i].z() != mesh.t_end) bad[i] = 1;
      } else if (std::abs(mesh.plane(bit).signed_distance(mesh.nodes[i])) > tol) {
        bad[i] = 1;
      }
    }
  }
  if (mesh.planes.size() != mesh.nodes.size()) std::fill(bad.begin(), bad.end(), 1);
  for (const BoundaryFacet& bf : mesh.boundary_facets) {
    bool in_range = true;
    for (int v : bf.nodes) in_range = in_range && v >= 0 && v < n;
    if (!in_range || mesh.planes.size() != mesh.nodes.size()) continue;
    PlaneMask common = mesh.planes[bf.nodes[0]] & mesh.planes[bf.nodes[1]] & mesh.planes[bf.nodes[2]];
    bool tagged = false;
    for (int bit = 0; common != 0; ++bit, common >>= 1) {
      if ((common & 1U) && bit < g.plane_count() && g.tag_of_bit(bit) == bf.tag) tagged = true;
    }
    if (!tagged) {
      for (int v : bf.nodes) bad[v] = 1;
    }
  }
  d.misclassified_nodes = static_cast<std::size_t>(std::count(bad.begin(), bad.end(), 1));
  return d;
}

void rebuild_boundary_facets(SimplexMesh& mesh) {
  struct Entry {
    int count = 0;
    Tri nodes{};
  };
  std::unordered_map<std::uint64_t, Entry> faces;
  faces.reserve(mesh.tets.size() * 4);
  for (const Tet& tet : mesh.tets) {
    for (const auto& f : kTetFaces) {
      Entry& e = faces[face_key(tet[f[0]], tet[f[1]], tet[f[2]])];
      ++e.count;
      e.nodes = {tet[f[0]], tet[f[1]], tet[f[2]]};
    }
  }
  std::vector<BoundaryFacet> out;
  for (const auto& [key, e] : faces) {
    if (e.count != 1) continue;
    PlaneMask common = mesh.planes[e.nodes[0]] & mesh.planes[e.nodes[1]] & mesh.planes[e.nodes[2]];
    if (common == 0) throw Error("exposed face lies on no boundary plane");
    const int bit = __builtin_ctzll(common);
    out.push_back({e.nodes, mesh.geometry.tag_of_bit(bit)});
  }
  // Hash iteration order is not portable; sort for reproducible output.
  std::sort(out.begin(), out.end(), [](const BoundaryFacet& a, const BoundaryFacet& b) {
    Tri sa = a.nodes, sb = b.nodes;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    return sa < sb;
  });
  mesh.boundary_facets = std::move(out);
}

SimplexMesh mirror_in_time(const SimplexMesh& mesh, double t_plane) {
  const double tol = 1e-12 * std::max(1.0, std::abs(mesh.t_end));
  if (std::abs(t_plane - mesh.t_end) > tol) {
    throw PreconditionError("mirror plane does not match the T_END face");
  }
  const AnnulusGeometry& g = mesh.geometry;
  const int begin_bit = g.t_begin_bit();
  const int end_bit = g.t_end_bit();

  SimplexMesh out;
  out.geometry = g;
  out.t_begin = mesh.t_end;
  out.t_end = 2.0 * mesh.t_end - mesh.t_begin;
  out.nodes.resize(mesh.nodes.size());
  out.planes.resize(mesh.planes.size());
  // Frozen flags describe the previous slab's constraints; callers set new ones.
  out.frozen.assign(mesh.nodes.size(), 0);
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    const Vec3& x = mesh.nodes[i];
    PlaneMask m = mesh.planes[i];
    const bool was_begin = (m >> begin_bit) & 1U;
    const bool was_end = (m >> end_bit) & 1U;
    m &= ~g.time_mask();
    double t = 2.0 * mesh.t_end - x.z();
    if (was_end) {
      m |= PlaneMask{1} << begin_bit;
      t = out.t_begin;
    }
    if (was_begin) {
      m |= PlaneMask{1} << end_bit;
      t = out.t_end;
    }
    out.nodes[i] = Vec3(x.x(), x.y(), t);
    out.planes[i] = m;
  }
  out.tets = mesh.tets;
  for (Tet& t : out.tets) std::swap(t[0], t[1]);
  out.boundary_facets = mesh.boundary_facets;
  for (BoundaryFacet& f : out.boundary_facets) {
    std::swap(f.nodes[0], f.nodes[1]);
    if (f.tag == FacetTag::TBegin) {
      f.tag = FacetTag::TEnd;
    } else if (f.tag == FacetTag::TEnd) {
      f.tag = FacetTag::TBegin;
    }
  }
  return out;
}

Ellipsoid steiner_ellipsoid(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  const double lmax = std::max({(b - a).norm(), (c - a).norm(), (d - a).norm(), (c - b).norm(),
                                (d - b).norm(), (d - c).norm()});
  if (!(std::abs(tet_volume(a, b, c, d)) > 1e-14 * lmax * lmax * lmax)) {
    throw PreconditionError("degenerate tetrahedron has no Steiner ellipsoid");
  }
  Ellipsoid e;
  e.center = 0.25 * (a + b + c + d);
  Mat3 cov = Mat3::Zero();
  for (const Vec3* x : {&a, &b, &c, &d}) {
    const Vec3 r = *x - e.center;
    cov += r * r.transpose();
  }
  e.shape = 3.0 * 0.25 * cov;
  return e;
}

Ellipsoid steiner_ellipsoid(std::span<const Vec3, 4> v) {
  return steiner_ellipsoid(v[0], v[1], v[2], v[3]);
}

double directional_extent(const Ellipsoid& e, const Vec3& w) {
  const double n = w.norm();
  if (!(n > 0.0)) throw PreconditionError("directional_extent: zero direction");
  const Vec3 u = w / n;
  return 2.0 * std::sqrt(u.dot(e.shape * u));
}

}  // namespace slabflow
