#include "slabflow/geometry.hpp"

#include "slabflow/error.hpp"

#include <cmath>
#include <numbers>

namespace slabflow {

const char* to_string(FacetTag tag) {
  switch (tag) {
    case FacetTag::Outer:
      return "OUTER";
    case FacetTag::Inlet:
      return "INLET";
    case FacetTag::TBegin:
      return "T_BEGIN";
    case FacetTag::TEnd:
      return "T_END";
  }
  return "?";
}

Vec2 AnnulusGeometry::corner(double radius, int k) const {
  const int kk = ((k % n_sides) + n_sides) % n_sides;
  const double theta = 2.0 * std::numbers::pi * kk / n_sides;
  return {radius * std::cos(theta), radius * std::sin(theta)};
}

Plane AnnulusGeometry::side_plane(bool inner, int k) const {
  const double radius = inner ? r_in : r_out;
  const Vec2 a = corner(radius, k);
  const Vec2 b = corner(radius, k + 1);
  Vec2 n(b.y() - a.y(), a.x() - b.x());  // outward for counter-clockwise corners
  n.normalize();
  Plane p;
  p.normal = Vec3(n.x(), n.y(), 0.0);
  p.offset = 0.5 * n.dot(a + b);
  return p;
}

double AnnulusGeometry::annulus_area() const {
  return 0.5 * n_sides * std::sin(2.0 * std::numbers::pi / n_sides) * (r_out * r_out - r_in * r_in);
}

Plane AnnulusGeometry::plane(int bit, double t_begin, double t_end) const {
  if (bit < n_sides) return side_plane(true, bit);
  if (bit < 2 * n_sides) return side_plane(false, bit - n_sides);
  Plane p;
  p.normal = Vec3(0.0, 0.0, 1.0);
  if (bit == t_begin_bit()) {
    p.offset = t_begin;
    return p;
  }
  if (bit == t_end_bit()) {
    p.offset = t_end;
    return p;
  }
  throw Error("plane bit out of range");
}

FacetTag AnnulusGeometry::tag_of_bit(int bit) const {
  if (bit < n_sides) return FacetTag::Inlet;
  if (bit < 2 * n_sides) return FacetTag::Outer;
  if (bit == t_begin_bit()) return FacetTag::TBegin;
  if (bit == t_end_bit()) return FacetTag::TEnd;
  throw Error("plane bit out of range");
}

int AnnulusGeometry::bit_of_tag(FacetTag tag, int side) const {
  switch (tag) {
    case FacetTag::Inlet:
      return inner_bit(side);
    case FacetTag::Outer:
      return outer_bit(side);
    case FacetTag::TBegin:
      return t_begin_bit();
    case FacetTag::TEnd:
      return t_end_bit();
  }
  return -1;
}

}  // namespace slabflow
