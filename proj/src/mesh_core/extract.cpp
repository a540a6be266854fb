#include "slabflow/extract.hpp"

#include "slabflow/error.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace slabflow {

namespace {

constexpr double kLevelNudge = 1e-12;

double nudged(double v, double level) { return v == level ? v + kLevelNudge : v; }

}  // namespace

double TriangleSurface::area() const {
  double a = 0.0;
  for (const Tri& t : triangles) {
    a += 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
  }
  return a;
}

TriangleSurface extract_isosurface(const SimplexMesh& mesh, std::span<const double> field, double level) {
  if (field.size() != mesh.nodes.size()) throw PreconditionError("extract_isosurface: field size mismatch");
  TriangleSurface out;
  std::unordered_map<std::uint64_t, int> vertex_of_edge;
  auto crossing = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    auto [it, inserted] = vertex_of_edge.try_emplace(edge_key(a, b), static_cast<int>(out.vertices.size()));
    if (inserted) {
      const double va = nudged(field[a], level), vb = nudged(field[b], level);
      const double s = (level - va) / (vb - va);
      out.vertices.push_back(mesh.nodes[a] + s * (mesh.nodes[b] - mesh.nodes[a]));
    }
    return it->second;
  };

  for (const Tet& tet : mesh.tets) {
    std::array<int, 4> above{}, below{};
    int na = 0, nb = 0;
    for (int v : tet) {
      if (nudged(field[v], level) > level) {
        above[na++] = v;
      } else {
        below[nb++] = v;
      }
    }
    if (na == 0 || nb == 0) continue;
    if (na == 1 || nb == 1) {
      const int lone = na == 1 ? above[0] : below[0];
      const auto& others = na == 1 ? below : above;
      out.triangles.push_back({crossing(lone, others[0]), crossing(lone, others[1]), crossing(lone, others[2])});
    } else {
      // Quadrilateral cut; split along one diagonal.
      const int ac = crossing(above[0], below[0]), ad = crossing(above[0], below[1]);
      const int bd = crossing(above[1], below[1]), bc = crossing(above[1], below[0]);
      out.triangles.push_back({ac, ad, bd});
      out.triangles.push_back({ac, bd, bc});
    }
  }
  return out;
}

double TimeSlice::area() const {
  double a = 0.0;
  for (const Tri& t : triangles) {
    const Vec2 u = points[t[1]] - points[t[0]], v = points[t[2]] - points[t[0]];
    a += 0.5 * std::abs(u.x() * v.y() - u.y() * v.x());
  }
  return a;
}

TimeSlice extract_time_face(const SimplexMesh& mesh, std::span<const std::vector<double>> fields,
                            std::span<const std::string> names, FacetTag which) {
  if (which != FacetTag::TBegin && which != FacetTag::TEnd) {
    throw PreconditionError("extract_time_face: tag must be T_BEGIN or T_END");
  }
  TimeSlice slice;
  slice.t = which == FacetTag::TBegin ? mesh.t_begin : mesh.t_end;
  std::map<int, int> local;
  for (const BoundaryFacet& f : mesh.boundary_facets) {
    if (f.tag != which) continue;
    for (int v : f.nodes) local.emplace(v, 0);
  }
  for (auto& [node, idx] : local) {
    idx = static_cast<int>(slice.points.size());
    slice.points.emplace_back(mesh.nodes[node].x(), mesh.nodes[node].y());
    slice.mesh_nodes.push_back(node);
  }
  for (const BoundaryFacet& f : mesh.boundary_facets) {
    if (f.tag != which) continue;
    slice.triangles.push_back({local[f.nodes[0]], local[f.nodes[1]], local[f.nodes[2]]});
  }
  slice.field_names.assign(names.begin(), names.end());
  for (const auto& field : fields) {
    if (field.size() != mesh.nodes.size()) throw PreconditionError("extract_time_face: field size mismatch");
    std::vector<double> values;
    values.reserve(slice.mesh_nodes.size());
    for (int node : slice.mesh_nodes) values.push_back(field[node]);
    slice.fields.push_back(std::move(values));
  }
  return slice;
}

std::vector<Polyline> contour_polylines(const TimeSlice& slice, int field, double level) {
  const std::vector<double>& f = slice.fields.at(field);
  std::vector<Vec2> verts;
  std::unordered_map<std::uint64_t, int> vertex_of_edge;
  auto crossing = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    auto [it, inserted] = vertex_of_edge.try_emplace(edge_key(a, b), static_cast<int>(verts.size()));
    if (inserted) {
      const double va = nudged(f[a], level), vb = nudged(f[b], level);
      const double s = (level - va) / (vb - va);
      verts.push_back(slice.points[a] + s * (slice.points[b] - slice.points[a]));
    }
    return it->second;
  };

  std::vector<std::array<int, 2>> segments;
  for (const Tri& t : slice.triangles) {
    std::array<int, 2> seg{};
    int k = 0;
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3];
      if ((nudged(f[a], level) > level) != (nudged(f[b], level) > level)) seg[k++] = crossing(a, b);
    }
    if (k == 2) segments.push_back(seg);
  }

  std::vector<std::vector<int>> incident(verts.size());
  for (int s = 0; s < static_cast<int>(segments.size()); ++s) {
    incident[segments[s][0]].push_back(s);
    incident[segments[s][1]].push_back(s);
  }
  std::vector<std::uint8_t> used(segments.size(), 0);
  std::vector<Polyline> lines;
  auto trace = [&](int start_vertex, int start_segment) {
    Polyline line;
    int v = start_vertex, s = start_segment;
    line.points.push_back(verts[v]);
    while (s >= 0 && !used[s]) {
      used[s] = 1;
      v = segments[s][0] == v ? segments[s][1] : segments[s][0];
      if (v == start_vertex) {
        line.closed = true;
        break;
      }
      line.points.push_back(verts[v]);
      s = -1;
      for (int cand : incident[v]) {
        if (!used[cand]) {
          s = cand;
          break;
        }
      }
    }
    lines.push_back(std::move(line));
  };
  // Open chains start at degree-1 vertices; whatever remains forms loops.
  for (int v = 0; v < static_cast<int>(verts.size()); ++v) {
    if (incident[v].size() == 1 && !used[incident[v][0]]) trace(v, incident[v][0]);
  }
  for (int s = 0; s < static_cast<int>(segments.size()); ++s) {
    if (!used[s]) trace(segments[s][0], s);
  }
  return lines;
}

double mean_radius(std::span<const Polyline> lines) {
  double weighted = 0.0, length = 0.0;
  for (const Polyline& line : lines) {
    const std::size_t n = line.points.size();
    const std::size_t segs = line.closed ? n : (n == 0 ? 0 : n - 1);
    for (std::size_t i = 0; i < segs; ++i) {
      const Vec2& a = line.points[i];
      const Vec2& b = line.points[(i + 1) % n];
      const double l = (b - a).norm();
      weighted += l * 0.5 * (a.norm() + b.norm());
      length += l;
    }
  }
  return length > 0.0 ? weighted / length : 0.0;
}

}  // namespace slabflow
