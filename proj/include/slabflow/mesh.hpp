#pragma once

#include "slabflow/geometry.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace slabflow {

using Tet = std::array<int, 4>;
using Tri = std::array<int, 3>;

struct BoundaryFacet {
  Tri nodes;
  FacetTag tag;
};

/// Conforming tetrahedral mesh of a timespace slab. Coordinates are
/// (x, y, t), all dimensionless.
struct SimplexMesh {
  AnnulusGeometry geometry;
  double t_begin = 0.0;
  double t_end = 0.0;

  std::vector<Vec3> nodes;
  std::vector<Tet> tets;
  std::vector<BoundaryFacet> boundary_facets;
  std::vector<PlaneMask> planes;      // per node
  std::vector<std::uint8_t> frozen;   // per node

  std::size_t node_count() const { return nodes.size(); }
  std::size_t tet_count() const { return tets.size(); }

  NodeClass node_class(int node) const {
    return classify(planes[node], geometry.time_mask());
  }
  bool on_plane(int node, int bit) const { return (planes[node] >> bit) & 1U; }
  Plane plane(int bit) const { return geometry.plane(bit, t_begin, t_end); }

  double tet_signed_volume(int tet) const;
  double total_volume() const;
  /// Largest coordinate extent of the node cloud.
  double extent() const;
};

/// Per-invariant defect counts; all-zero means the mesh is valid.
struct MeshDefects {
  std::size_t inverted_tets = 0;
  std::size_t nonconforming_faces = 0;
  std::size_t untagged_boundary_faces = 0;
  std::size_t misclassified_nodes = 0;

  bool clean() const {
    return inverted_tets == 0 && nonconforming_faces == 0 && untagged_boundary_faces == 0 &&
           misclassified_nodes == 0;
  }
  std::size_t total() const {
    return inverted_tets + nonconforming_faces + untagged_boundary_faces + misclassified_nodes;
  }
};

MeshDefects validate_mesh(const SimplexMesh& mesh);

/// Regenerates `boundary_facets` from the exposed faces of the tet set and
/// the node plane masks. Throws if an exposed face lies on no boundary plane.
void rebuild_boundary_facets(SimplexMesh& mesh);

/// Builds the slab mesh of the polygonal annulus over [t_start, t_start + dt].
/// The cross-section is a constrained Delaunay triangulation at target size
/// h0 with Laplacian-smoothed interior points; it is extruded in max(1, round(dt / h0)) layers and every prism is
/// split into three tets with the sorted-index diagonal rule.
SimplexMesh build_slab_mesh(double h0, double t_start, double dt,
                            const AnnulusGeometry& geometry = {});

/// Reflects t -> 2 t_plane - t. T_BEGIN/T_END swap roles, tet orientation is
/// restored and node numbering is preserved, so the old T_END face becomes
/// the new T_BEGIN face node for node.
SimplexMesh mirror_in_time(const SimplexMesh& mesh, double t_plane);

/// Ellipsoid {x : (x - c)^T shape^{-1} (x - c) <= 1}.
struct Ellipsoid {
  Vec3 center = Vec3::Zero();
  Mat3 shape = Mat3::Identity();
};

/// Minimal-volume ellipsoid circumscribing a tetrahedron.
Ellipsoid steiner_ellipsoid(std::span<const Vec3, 4> vertices);
Ellipsoid steiner_ellipsoid(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

/// Full width of the ellipsoid along direction w.
double directional_extent(const Ellipsoid& e, const Vec3& w);

/// Keys for hashing unordered node tuples.
std::uint64_t face_key(int a, int b, int c);
std::uint64_t edge_key(int a, int b);

}  // namespace slabflow
