#include "slabflow/locate.hpp"

#include "slabflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace slabflow {

namespace {

constexpr std::array<std::array<int, 3>, 4> kFaces{{{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};

}  // namespace

PointLocator::PointLocator(const SimplexMesh& mesh) : mesh_(&mesh) {
  const int nt = static_cast<int>(mesh.tets.size());
  neighbors_.assign(nt, {-1, -1, -1, -1});
  std::unordered_map<std::uint64_t, std::pair<int, int>> open;
  open.reserve(static_cast<std::size_t>(nt) * 2);
  for (int t = 0; t < nt; ++t) {
    const Tet& tet = mesh.tets[t];
    for (int f = 0; f < 4; ++f) {
      const auto key = face_key(tet[kFaces[f][0]], tet[kFaces[f][1]], tet[kFaces[f][2]]);
      auto [it, inserted] = open.try_emplace(key, t, f);
      if (!inserted) {
        neighbors_[t][f] = it->second.first;
        neighbors_[it->second.first][it->second.second] = t;
        open.erase(it);
      }
    }
  }

  lo_ = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::max());
  for (const Vec3& x : mesh.nodes) {
    lo_ = lo_.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  if (mesh.nodes.empty()) {
    lo_.setZero();
    hi.setOnes();
  }
  lo_.array() -= kRejectTolerance;
  hi.array() += kRejectTolerance;
  const Vec3 span = hi - lo_;
  const double target_cells = std::max(1.0, nt / 2.0);
  const double unit = std::cbrt(span.prod() / target_cells);
  for (int a = 0; a < 3; ++a) {
    dims_[a] = std::clamp(static_cast<int>(std::ceil(span[a] / unit)), 1, 512);
    cell_size_[a] = span[a] / dims_[a];
  }

  const std::size_t ncells = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  std::vector<int> counts(ncells + 1, 0);
  auto for_cells = [&](int t, auto&& fn) {
    const Tet& tet = mesh.tets[t];
    Vec3 tlo = mesh.nodes[tet[0]], thi = mesh.nodes[tet[0]];
    for (int v : tet) {
      tlo = tlo.cwiseMin(mesh.nodes[v]);
      thi = thi.cwiseMax(mesh.nodes[v]);
    }
    tlo.array() -= kRejectTolerance;
    thi.array() += kRejectTolerance;
    const auto c0 = cell_of(tlo), c1 = cell_of(thi);
    for (int k = c0[2]; k <= c1[2]; ++k)
      for (int j = c0[1]; j <= c1[1]; ++j)
        for (int i = c0[0]; i <= c1[0]; ++i) fn((static_cast<std::size_t>(k) * dims_[1] + j) * dims_[0] + i);
  };
  for (int t = 0; t < nt; ++t) for_cells(t, [&](std::size_t c) { ++counts[c + 1]; });
  for (std::size_t c = 0; c < ncells; ++c) counts[c + 1] += counts[c];
  cell_start_ = counts;
  cell_items_.resize(counts[ncells]);
  std::vector<int> fill(counts.begin(), counts.end() - 1);
  for (int t = 0; t < nt; ++t) for_cells(t, [&](std::size_t c) { cell_items_[fill[c]++] = t; });
}

std::array<int, 3> PointLocator::cell_of(const Vec3& p) const {
  std::array<int, 3> c{};
  for (int a = 0; a < 3; ++a) {
    c[a] = std::clamp(static_cast<int>(std::floor((p[a] - lo_[a]) / cell_size_[a])), 0, dims_[a] - 1);
  }
  return c;
}

Location PointLocator::evaluate(int tet, const Vec3& p) const {
  const Tet& t = mesh_->tets[tet];
  const auto& X = mesh_->nodes;
  const Vec3 &x0 = X[t[0]], &x1 = X[t[1]], &x2 = X[t[2]], &x3 = X[t[3]];
  const double d = orient3d(x0, x1, x2, x3);
  Location loc;
  loc.tet = tet;
  loc.bary = {orient3d(p, x1, x2, x3) / d, orient3d(x0, p, x2, x3) / d, orient3d(x0, x1, p, x3) / d,
              orient3d(x0, x1, x2, p) / d};
  double outside = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (loc.bary[i] >= 0.0) continue;
    const Vec3& a = X[t[kFaces[i][0]]];
    const Vec3& b = X[t[kFaces[i][1]]];
    const Vec3& c = X[t[kFaces[i][2]]];
    const double area2 = (b - a).cross(c - a).norm();
    outside = std::max(outside, -loc.bary[i] * d / area2);
  }
  loc.outside = outside;
  return loc;
}

namespace {

Location clamp(Location loc) {
  if (loc.outside == 0.0) return loc;
  double sum = 0.0;
  for (double& b : loc.bary) {
    b = std::max(b, 0.0);
    sum += b;
  }
  for (double& b : loc.bary) b /= sum;
  return loc;
}

}  // namespace

Location PointLocator::locate(const Vec3& p, int& hint) const {
  const int nt = static_cast<int>(mesh_->tets.size());
  if (nt == 0) throw Error("point location on an empty mesh");
  int t = (hint >= 0 && hint < nt) ? hint : 0;
  for (int step = 0; step < 4096; ++step) {
    const Location loc = evaluate(t, p);
    int worst = -1;
    double worst_b = -1e-14;
    for (int i = 0; i < 4; ++i) {
      if (loc.bary[i] < worst_b) {
        worst_b = loc.bary[i];
        worst = i;
      }
    }
    if (worst < 0) {
      hint = t;
      return clamp(loc);
    }
    const int next = neighbors_[t][worst];
    if (next < 0) break;
    t = next;
  }
  Location loc = grid_search(p);
  hint = loc.tet;
  return loc;
}

Location PointLocator::grid_search(const Vec3& p) const {
  Location best;
  best.outside = std::numeric_limits<double>::infinity();
  bool in_box = true;
  for (int a = 0; a < 3; ++a) {
    in_box = in_box && p[a] >= lo_[a] && p[a] <= lo_[a] + cell_size_[a] * dims_[a];
  }
  if (in_box) {
    const auto c = cell_of(p);
    const std::size_t cell = (static_cast<std::size_t>(c[2]) * dims_[1] + c[1]) * dims_[0] + c[0];
    for (int k = cell_start_[cell]; k < cell_start_[cell + 1]; ++k) {
      const Location loc = evaluate(cell_items_[k], p);
      if (loc.outside < best.outside) best = loc;
      if (best.outside == 0.0) break;
    }
  }
  if (!(best.outside <= kRejectTolerance)) {
    std::ostringstream os;
    os.precision(17);
    os << "point (" << p.x() << ", " << p.y() << ", " << p.z() << ") lies outside the mesh";
    throw Error(os.str());
  }
  return clamp(best);
}

Location PointLocator::locate_exhaustive(const Vec3& p) const {
  Location best;
  best.outside = std::numeric_limits<double>::infinity();
  for (int t = 0; t < static_cast<int>(mesh_->tets.size()); ++t) {
    const Location loc = evaluate(t, p);
    if (loc.outside < best.outside) best = loc;
    if (best.outside == 0.0) break;
  }
  if (!(best.outside <= kRejectTolerance)) throw Error("point lies outside the mesh");
  return clamp(best);
}

double interpolate(const SimplexMesh& mesh, std::span<const double> field, const Location& loc) {
  const Tet& t = mesh.tets[loc.tet];
  double v = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (loc.bary[i] != 0.0) v += loc.bary[i] * field[t[i]];
  }
  return v;
}

std::vector<double> locate_and_interpolate(const SimplexMesh& source_mesh, std::span<const double> source_field,
                                           std::span<const Vec3> query_points) {
  if (source_field.size() != source_mesh.nodes.size()) {
    throw PreconditionError("locate_and_interpolate: field size does not match mesh");
  }
  PointLocator locator(source_mesh);
  std::vector<double> out(query_points.size());
  int hint = 0;
  for (std::size_t i = 0; i < query_points.size(); ++i) {
    out[i] = interpolate(source_mesh, source_field, locator.locate(query_points[i], hint));
  }
  return out;
}

}  // namespace slabflow
