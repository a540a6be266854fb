#pragma once

#include "slabflow/mesh.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace slabflow {

struct Location {
  int tet = -1;
  std::array<double, 4> bary{};
  /// Distance the query lay outside the tet before clamping (0 if inside).
  double outside = 0.0;
};

/// Point location on a fixed mesh: a barycentric walk from a seed tet with a
/// bucket-grid exhaustive fallback. Read-only after construction, so one
/// locator may serve concurrent queries as long as each caller owns its hint.
class PointLocator {
 public:
  /// Points closer than this outside the mesh are clamped onto it.
  static constexpr double kClampTolerance = 1e-9;
  /// Points farther than this outside the mesh are rejected.
  static constexpr double kRejectTolerance = 1e-6;

  explicit PointLocator(const SimplexMesh& mesh);

  /// Locates p; `hint` seeds the walk and receives the containing tet.
  /// Throws when p lies farther than kRejectTolerance outside the mesh.
  Location locate(const Vec3& p, int& hint) const;
  Location locate(const Vec3& p) const {
    int hint = 0;
    return locate(p, hint);
  }

  /// Brute force over every tet; the oracle for tests.
  Location locate_exhaustive(const Vec3& p) const;

  const SimplexMesh& mesh() const { return *mesh_; }
  int neighbor(int tet, int face) const { return neighbors_[tet][face]; }

 private:
  Location evaluate(int tet, const Vec3& p) const;
  Location grid_search(const Vec3& p) const;
  std::array<int, 3> cell_of(const Vec3& p) const;

  const SimplexMesh* mesh_;
  std::vector<std::array<int, 4>> neighbors_;  // neighbour across face opposite vertex i
  Vec3 lo_, cell_size_;
  std::array<int, 3> dims_{};
  std::vector<int> cell_start_, cell_items_;
};

/// Barycentric interpolation of a nodal field at a located point.
double interpolate(const SimplexMesh& mesh, std::span<const double> field, const Location& loc);

/// Evaluates a nodal field at arbitrary points.
std::vector<double> locate_and_interpolate(const SimplexMesh& source_mesh, std::span<const double> source_field,
                                           std::span<const Vec3> query_points);

}  // namespace slabflow
