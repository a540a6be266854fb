#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>

namespace slabflow {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Bit set of the boundary planes a node lies on. Bit layout for an
/// n-sided annulus: [0, n) inner sides, [n, 2n) outer sides, 2n the
/// T_BEGIN plane and 2n+1 the T_END plane.
using PlaneMask = std::uint64_t;

enum class FacetTag : std::uint8_t { Outer, Inlet, TBegin, TEnd };

enum class NodeClass : std::uint8_t {
  Interior,
  LateralSurface,
  TimeFace,
  EdgeCurve,  // intersection of two boundary planes
  Corner,     // three planes, immovable
};

const char* to_string(FacetTag tag);

/// An affine plane {x : normal . x = offset}.
struct Plane {
  Vec3 normal;
  double offset = 0.0;

  double signed_distance(const Vec3& x) const { return normal.dot(x) - offset; }
};

/// The timespace slab domain: the region between two concentric regular
/// polygons (circumradii r_in < r_out), extruded over [t_begin, t_end].
struct AnnulusGeometry {
  double r_in = 0.1;
  double r_out = 1.0;
  int n_sides = 13;

  /// Corner k of the polygon with circumradius `radius`; corner 0 on the +x axis.
  Vec2 corner(double radius, int k) const;
  /// Plane of side k (between corners k and k+1) of the inner or outer prism.
  Plane side_plane(bool inner, int k) const;
  /// Cross-section area of the polygonal annulus.
  double annulus_area() const;

  int inner_bit(int k) const { return k; }
  int outer_bit(int k) const { return n_sides + k; }
  int t_begin_bit() const { return 2 * n_sides; }
  int t_end_bit() const { return 2 * n_sides + 1; }
  PlaneMask time_mask() const {
    return (PlaneMask{1} << t_begin_bit()) | (PlaneMask{1} << t_end_bit());
  }
  int plane_count() const { return 2 * n_sides + 2; }

  /// Plane for bit `bit`, using the given time-face coordinates.
  Plane plane(int bit, double t_begin, double t_end) const;
  FacetTag tag_of_bit(int bit) const;
  int bit_of_tag(FacetTag tag, int side) const;
};

inline bool operator==(const AnnulusGeometry& a, const AnnulusGeometry& b) {
  return a.r_in == b.r_in && a.r_out == b.r_out && a.n_sides == b.n_sides;
}

inline int popcount(PlaneMask m) { return __builtin_popcountll(m); }

inline NodeClass classify(PlaneMask planes, PlaneMask time_mask) {
  switch (popcount(planes)) {
    case 0:
      return NodeClass::Interior;
    case 1:
      return (planes & time_mask) ? NodeClass::TimeFace : NodeClass::LateralSurface;
    case 2:
      return NodeClass::EdgeCurve;
    default:
      return NodeClass::Corner;
  }
}

/// Six times the signed volume of (a, b, c, d); positive when d lies on
/// the side of triangle (a, b, c) that its right-handed normal points away from.
inline double orient3d(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).cross(c - a).dot(d - a);
}

inline double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return orient3d(a, b, c, d) / 6.0;
}

}  // namespace slabflow
