#pragma once

#include "slabflow/extract.hpp"
#include "slabflow/mesh.hpp"

#include <span>
#include <string>
#include <vector>

namespace slabflow {

/// Point data with 1 (scalar) or 6 (symmetric tensor xx yy zz xy yz xz)
/// components, stored point-major.
struct NamedField {
  std::string name;
  int components = 1;
  std::vector<double> values;
};

/// Contents of a legacy ASCII unstructured-grid file.
struct VtkData {
  std::string title;
  std::vector<Vec3> points;
  std::vector<std::vector<int>> cells;
  std::vector<int> cell_types;  // 5 triangle, 10 tetrahedron
  std::vector<NamedField> fields;

  const NamedField* field(const std::string& name) const;
};

/// Writes with shortest round-trip number formatting, so reading back is
/// exact. Throws Error when the file cannot be written.
void write_vtk(const std::string& path, const VtkData& data);
/// Throws Error on malformed input.
VtkData read_vtk(const std::string& path);

NamedField scalar_field(std::string name, std::span<const double> values);
NamedField tensor_field(std::string name, std::span<const Mat3> values);

/// Tet mesh with its plane masks and frozen flags as extra point fields;
/// the title records the geometry and time range.
void write_mesh_vtk(const std::string& path, const SimplexMesh& mesh, std::span<const NamedField> fields = {});
/// Inverse of write_mesh_vtk (boundary facets are rebuilt).
SimplexMesh mesh_from_vtk(const VtkData& data);

void write_surface_vtk(const std::string& path, const TriangleSurface& surface);
/// Slice triangles at height t with its fields.
void write_slice_vtk(const std::string& path, const TimeSlice& slice);

}  // namespace slabflow
