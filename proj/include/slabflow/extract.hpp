#pragma once

#include "slabflow/mesh.hpp"

#include <span>
#include <string>
#include <vector>

namespace slabflow {

/// Indexed triangle surface; vertices on shared tet edges are merged, so
/// the surface is watertight across conforming faces.
struct TriangleSurface {
  std::vector<Vec3> vertices;
  std::vector<Tri> triangles;

  double area() const;
};

/// Marching-tetrahedra level set of a P1 nodal field.
TriangleSurface extract_isosurface(const SimplexMesh& mesh, std::span<const double> field, double level);

/// A boundary time face restricted to 2D with nodal field values.
struct TimeSlice {
  double t = 0.0;
  std::vector<Vec2> points;
  std::vector<int> mesh_nodes;  // slice point -> mesh node
  std::vector<Tri> triangles;
  std::vector<std::string> field_names;
  std::vector<std::vector<double>> fields;  // [field][point]

  double area() const;
};

TimeSlice extract_time_face(const SimplexMesh& mesh, std::span<const std::vector<double>> fields,
                            std::span<const std::string> names, FacetTag which);

struct Polyline {
  std::vector<Vec2> points;
  bool closed = false;
};

/// Marching-triangles contour of one slice field; segments are chained into
/// polylines, closed ones not repeating their first point.
std::vector<Polyline> contour_polylines(const TimeSlice& slice, int field, double level);

/// Length-weighted mean distance from the origin along the polylines.
double mean_radius(std::span<const Polyline> lines);

}  // namespace slabflow
