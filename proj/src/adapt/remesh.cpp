#include "slabflow/remesh.hpp"

#include "slabflow/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace slabflow {

namespace {

// Tets flatter than this (volume over cubed longest edge) count as inverted.
constexpr double kMinRelativeVolume = 1e-12;

bool contains(const Tet& t, int v) { return t[0] == v || t[1] == v || t[2] == v || t[3] == v; }

Tet substitute(Tet t, int from, int to) {
  for (int& v : t) {
    if (v == from) v = to;
  }
  return t;
}

// Triangulations of a convex polygon with k vertices, as index triples.
using Triangulation = std::vector<std::array<int, 3>>;

std::vector<Triangulation> triangulate_range(int i, int j) {
  if (j - i < 2) return {Triangulation{}};
  std::vector<Triangulation> out;
  for (int m = i + 1; m < j; ++m) {
    const auto left = triangulate_range(i, m);
    const auto right = triangulate_range(m, j);
    for (const auto& l : left) {
      for (const auto& r : right) {
        Triangulation t = l;
        t.insert(t.end(), r.begin(), r.end());
        t.push_back({i, m, j});
        out.push_back(std::move(t));
      }
    }
  }
  return out;
}

const std::vector<Triangulation>& polygon_triangulations(int k) {
  static const std::array<std::vector<Triangulation>, 8> table = [] {
    std::array<std::vector<Triangulation>, 8> t;
    for (int n = 3; n < 8; ++n) t[n] = triangulate_range(0, n - 1);
    return t;
  }();
  return table[k];
}

// Parameter s on a -> b where both halves have equal metric length, with the
// tensor interpolated linearly along the edge.
double metric_midpoint(const Vec3& e, const Mat3& ma, const Mat3& mb) {
  auto len = [&e](const Mat3& m) { return std::sqrt(e.dot(m * e)); };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 50; ++it) {
    const double s = 0.5 * (lo + hi);
    const Mat3 ms = (1.0 - s) * ma + s * mb;
    const double first = s * len(0.5 * (ma + ms));
    const double second = (1.0 - s) * len(0.5 * (ms + mb));
    (first < second ? lo : hi) = s;
  }
  return std::clamp(0.5 * (lo + hi), 0.1, 0.9);
}

}  // namespace

BackgroundMetric::BackgroundMetric(SimplexMesh mesh, TensorField metric)
    : mesh_(std::move(mesh)), metric_(std::move(metric)), locator_(mesh_) {
  if (metric_.size() != mesh_.nodes.size()) throw PreconditionError("BackgroundMetric: metric size mismatch");
}

Mat3 BackgroundMetric::evaluate(const Vec3& p, int& hint) const {
  const Location loc = locator_.locate(p, hint);
  const Tet& t = mesh_.tets[loc.tet];
  Mat3 m = Mat3::Zero();
  for (int i = 0; i < 4; ++i) m += loc.bary[i] * metric_[t[i]];
  return spd_floor(m);
}

Remesher::Remesher(const SimplexMesh& mesh, std::span<const Mat3> metric, const MetricSource& source,
                   const AdaptConstraints& constraints, const AdaptOptions& options)
    : input_(&mesh), source_(&source), options_(options) {
  const std::size_t n = mesh.nodes.size();
  if (metric.size() != n) throw PreconditionError("Remesher: metric size mismatch");
  x_ = mesh.nodes;
  planes_ = mesh.planes;
  frozen_ = mesh.frozen;
  frozen_.resize(n, 0);
  if (constraints.freeze_t_begin) {
    for (std::size_t i = 0; i < n; ++i) {
      if (mesh.on_plane(static_cast<int>(i), mesh.geometry.t_begin_bit())) frozen_[i] = 1;
    }
  }
  metric_.assign(metric.begin(), metric.end());
  stale_.assign(n, 0);
  origin_.resize(n);
  std::iota(origin_.begin(), origin_.end(), 0);
  hint_.assign(n, 0);
  node_alive_.assign(n, 1);
  node_tets_.assign(n, {});
  tets_ = mesh.tets;
  tet_alive_.assign(tets_.size(), 1);
  tet_quality_.resize(tets_.size());
  for (std::size_t k = 0; k < tets_.size(); ++k) {
    for (int v : tets_[k]) {
      node_tets_[v].push_back(static_cast<int>(k));
      hint_[v] = static_cast<int>(k);
    }
    tet_quality_[k] = quality(tets_[k]);
  }
  live_nodes_ = n;
  live_tets_ = tets_.size();
}

double Remesher::edge_length(int a, int b) const {
  return metric_edge_length(x_[a], x_[b], metric_[a], metric_[b]);
}

double Remesher::quality(const Tet& t) const {
  const Mat3 m = 0.25 * (metric_[t[0]] + metric_[t[1]] + metric_[t[2]] + metric_[t[3]]);
  return element_quality(x_[t[0]], x_[t[1]], x_[t[2]], x_[t[3]], m);
}

Mat3 Remesher::mean_metric(const Tet& t, int node, const Mat3& m) const {
  Mat3 sum = Mat3::Zero();
  for (int v : t) sum += v == node ? m : metric_[v];
  return 0.25 * sum;
}

double Remesher::quality_with(const Tet& t, int node, const Vec3& pos, const Mat3& m) const {
  std::array<Vec3, 4> p;
  for (int i = 0; i < 4; ++i) p[i] = t[i] == node ? pos : x_[t[i]];
  return element_quality(p[0], p[1], p[2], p[3], mean_metric(t, node, m));
}

bool Remesher::valid_with(const Tet& t, int node, const Vec3& pos) const {
  std::array<Vec3, 4> p;
  for (int i = 0; i < 4; ++i) p[i] = t[i] == node ? pos : x_[t[i]];
  double lmax2 = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) lmax2 = std::max(lmax2, (p[i] - p[j]).squaredNorm());
  }
  const double vol = tet_volume(p[0], p[1], p[2], p[3]);
  return vol > kMinRelativeVolume * lmax2 * std::sqrt(lmax2);
}

bool Remesher::valid(const Tet& t) const { return valid_with(t, -1, Vec3::Zero()); }

std::vector<std::array<int, 2>> Remesher::live_edges() const {
  std::vector<std::array<int, 2>> edges;
  edges.reserve(live_tets_ * 6);
  for (std::size_t k = 0; k < tets_.size(); ++k) {
    if (!tet_alive_[k]) continue;
    const Tet& t = tets_[k];
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) edges.push_back({std::min(t[i], t[j]), std::max(t[i], t[j])});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

bool Remesher::has_edge(int a, int b) const {
  if (!node_alive_[a] || !node_alive_[b]) return false;
  for (int t : node_tets_[a]) {
    if (contains(tets_[t], b)) return true;
  }
  return false;
}

std::vector<int> Remesher::shell_tets(int a, int b) const {
  std::vector<int> out;
  for (int t : node_tets_[a]) {
    if (contains(tets_[t], b)) out.push_back(t);
  }
  return out;
}

Remesher::Shell Remesher::shell(int a, int b) const {
  Shell s;
  s.tets = shell_tets(a, b);
  // For each shell tet, the other two nodes (c, d) with (a, b, c, d) positive.
  std::vector<std::array<int, 2>> links;
  for (int k : s.tets) {
    const Tet& t = tets_[k];
    std::array<int, 4> pos{};
    int other = 2;
    for (int i = 0; i < 4; ++i) {
      if (t[i] == a) {
        pos[0] = i;
      } else if (t[i] == b) {
        pos[1] = i;
      } else {
        pos[other++] = i;
      }
    }
    int inversions = 0;
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) inversions += pos[i] > pos[j];
    }
    const int c = t[pos[2]], d = t[pos[3]];
    links.push_back(inversions % 2 == 0 ? std::array<int, 2>{c, d} : std::array<int, 2>{d, c});
  }
  if (links.empty()) return s;
  s.ring.push_back(links[0][0]);
  int current = links[0][1];
  std::size_t steps = 1;
  while (current != s.ring.front() && steps <= links.size()) {
    s.ring.push_back(current);
    const auto it = std::find_if(links.begin(), links.end(), [current](const auto& l) { return l[0] == current; });
    if (it == links.end()) return s;  // open shell: boundary edge
    current = (*it)[1];
    ++steps;
  }
  s.closed = current == s.ring.front() && s.ring.size() == links.size();
  return s;
}

Vec3 Remesher::project(const Vec3& p, PlaneMask planes) const {
  if (planes == 0) return p;
  const AnnulusGeometry& g = input_->geometry;
  Eigen::Matrix<double, 3, 3> n;
  Vec3 c;
  int rows = 0;
  for (int bit = 0; bit < g.plane_count() && rows < 3; ++bit) {
    if (!((planes >> bit) & 1U)) continue;
    const Plane pl = input_->plane(bit);
    n.row(rows) = pl.normal.transpose();
    c[rows] = pl.offset;
    ++rows;
  }
  const auto nr = n.topRows(rows);
  const Eigen::VectorXd residual = nr * p - c.head(rows);
  const Eigen::MatrixXd gram = nr * nr.transpose();
  Vec3 y = p - nr.transpose() * gram.ldlt().solve(residual);
  if ((planes >> g.t_begin_bit()) & 1U) y.z() = input_->t_begin;
  if ((planes >> g.t_end_bit()) & 1U) y.z() = input_->t_end;
  return y;
}

int Remesher::add_node(const Vec3& p, PlaneMask planes, const Mat3& m, int hint) {
  x_.push_back(p);
  planes_.push_back(planes);
  frozen_.push_back(0);
  metric_.push_back(m);
  stale_.push_back(1);
  origin_.push_back(-1);
  hint_.push_back(hint);
  node_alive_.push_back(1);
  node_tets_.emplace_back();
  ++live_nodes_;
  return static_cast<int>(x_.size()) - 1;
}

int Remesher::add_tet(const Tet& t) {
  int k;
  if (!free_tets_.empty()) {
    k = free_tets_.back();
    free_tets_.pop_back();
    tets_[k] = t;
    tet_alive_[k] = 1;
    tet_quality_[k] = quality(t);
  } else {
    k = static_cast<int>(tets_.size());
    tets_.push_back(t);
    tet_alive_.push_back(1);
    tet_quality_.push_back(quality(t));
  }
  for (int v : t) node_tets_[v].push_back(k);
  ++live_tets_;
  return k;
}

void Remesher::detach(int node, int t) {
  auto& list = node_tets_[node];
  const auto it = std::find(list.begin(), list.end(), t);
  if (it != list.end()) list.erase(it);
}

void Remesher::kill_tet(int t) {
  for (int v : tets_[t]) detach(v, t);
  tet_alive_[t] = 0;
  free_tets_.push_back(t);
  --live_tets_;
}

double Remesher::min_quality() const {
  double q = 1.0;
  for (std::size_t k = 0; k < tets_.size(); ++k) {
    if (tet_alive_[k]) q = std::min(q, tet_quality_[k]);
  }
  return q;
}

SweepLog Remesher::stats() const {
  SweepLog log;
  log.nodes = live_nodes_;
  log.tets = live_tets_;
  double sum = 0.0;
  log.min_quality = 1.0;
  for (std::size_t k = 0; k < tets_.size(); ++k) {
    if (!tet_alive_[k]) continue;
    sum += tet_quality_[k];
    log.min_quality = std::min(log.min_quality, tet_quality_[k]);
  }
  log.mean_quality = live_tets_ ? sum / static_cast<double>(live_tets_) : 0.0;
  const auto edges = live_edges();
  log.edges = edges.size();
  std::size_t in_band = 0;
  for (const auto& [a, b] : edges) {
    const double l = edge_length(a, b);
    in_band += l >= options_.l_low && l <= options_.l_high;
  }
  log.fraction_in_band = edges.empty() ? 0.0 : static_cast<double>(in_band) / static_cast<double>(edges.size());
  return log;
}

bool Remesher::try_collapse(int a, int b) {
  // a is removed and merged into b.
  if (frozen_[a]) return false;
  if (planes_[a] & ~planes_[b]) return false;
  if (frozen_[b] && (planes_[a] & planes_[b])) return false;
  // New edges may not exceed l_high or the longest edge already at a.
  double limit = options_.l_high;
  for (int k : node_tets_[a]) {
    for (int v : tets_[k]) {
      if (v != a) limit = std::max(limit, edge_length(a, v));
    }
  }
  for (int k : node_tets_[a]) {
    const Tet& t = tets_[k];
    if (contains(t, b)) continue;
    const Tet nt = substitute(t, a, b);
    if (!valid(nt)) return false;
    for (int v : nt) {
      if (v == b) continue;
      if (edge_length(b, v) > limit && !has_edge(b, v)) return false;
    }
  }
  const std::vector<int> ball = node_tets_[a];
  for (int k : ball) {
    if (contains(tets_[k], b)) {
      kill_tet(k);
    } else {
      tets_[k] = substitute(tets_[k], a, b);
      node_tets_[b].push_back(k);
      tet_quality_[k] = quality(tets_[k]);
    }
  }
  node_tets_[a].clear();
  node_alive_[a] = 0;
  --live_nodes_;
  return true;
}

std::size_t Remesher::coarsen() {
  const auto edges = live_edges();
  std::vector<std::pair<double, std::size_t>> marked;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double l = edge_length(edges[i][0], edges[i][1]);
    if (l < options_.l_low) marked.emplace_back(l, i);
  }
  std::sort(marked.begin(), marked.end());
  std::size_t count = 0;
  for (const auto& [len, i] : marked) {
    auto [a, b] = edges[i];
    if (!has_edge(a, b) || edge_length(a, b) >= options_.l_low) continue;
    // Remove the less constrained endpoint first.
    if (popcount(planes_[b]) < popcount(planes_[a])) std::swap(a, b);
    if (try_collapse(a, b) || try_collapse(b, a)) ++count;
  }
  return count;
}

bool Remesher::try_split(int a, int b) {
  if (frozen_[a] && frozen_[b]) return false;
  const PlaneMask common = planes_[a] & planes_[b];
  if ((frozen_[a] || frozen_[b]) && common) return false;
  const double s = metric_midpoint(x_[b] - x_[a], metric_[a], metric_[b]);
  const Vec3 p = project(x_[a] + s * (x_[b] - x_[a]), common);
  // Interpolated along the edge; refresh_metric() later samples the source.
  const Mat3 mp = spd_floor((1.0 - s) * metric_[a] + s * metric_[b]);

  const std::vector<int> sh = shell_tets(a, b);
  double old_min = 1.0, new_min = 1.0;
  for (int k : sh) {
    const Tet& t = tets_[k];
    old_min = std::min(old_min, tet_quality_[k]);
    if (!valid_with(t, a, p) || !valid_with(t, b, p)) return false;
    new_min = std::min({new_min, quality_with(t, a, p, mp), quality_with(t, b, p, mp)});
  }
  if (new_min < std::max(split_floor_, options_.split_quality_ratio * old_min)) return false;

  const int n = add_node(p, common, mp, hint_[a]);
  for (int k : sh) {
    const Tet upper = substitute(tets_[k], b, n);
    tets_[k] = substitute(tets_[k], a, n);
    detach(a, k);
    node_tets_[n].push_back(k);
    tet_quality_[k] = quality(tets_[k]);
    add_tet(upper);
  }
  return true;
}

std::size_t Remesher::refine() {
  split_floor_ = min_quality();
  const auto edges = live_edges();
  std::vector<std::pair<double, std::size_t>> marked;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double l = edge_length(edges[i][0], edges[i][1]);
    if (l > options_.l_high) marked.emplace_back(-l, i);
  }
  std::sort(marked.begin(), marked.end());
  std::size_t count = 0;
  for (const auto& [neg_len, i] : marked) {
    const auto [a, b] = edges[i];
    if (!has_edge(a, b) || edge_length(a, b) <= options_.l_high) continue;
    if (try_split(a, b)) ++count;
  }
  return count;
}

bool Remesher::try_swap(int a, int b) {
  if (frozen_[a] || frozen_[b] || (planes_[a] & planes_[b])) return false;
  const Shell sh = shell(a, b);
  const int k = static_cast<int>(sh.ring.size());
  if (!sh.closed || k < 3 || k > options_.max_ring) return false;
  double old_min = 1.0;
  for (int t : sh.tets) old_min = std::min(old_min, tet_quality_[t]);
  if (old_min >= options_.swap_trigger) return false;
  for (int v : sh.ring) {
    if (frozen_[v]) return false;
  }

  // Quality of the two tets over each ring triangle, cached by index triple.
  std::vector<double> tri_quality(k * k * k, -1.0);
  auto triangle_quality = [&](const std::array<int, 3>& tri) {
    double& q = tri_quality[(tri[0] * k + tri[1]) * k + tri[2]];
    if (q < 0.0) {
      const int vi = sh.ring[tri[0]], vj = sh.ring[tri[1]], vk = sh.ring[tri[2]];
      const Tet lower{a, vi, vj, vk}, upper{b, vi, vk, vj};
      q = valid(lower) && valid(upper) ? std::min(quality(lower), quality(upper)) : 0.0;
    }
    return q;
  };
  const Triangulation* best = nullptr;
  double best_min = old_min;
  for (const Triangulation& tr : polygon_triangulations(k)) {
    double m = 1.0;
    for (const auto& tri : tr) {
      m = std::min(m, triangle_quality(tri));
      if (m <= best_min) break;
    }
    if (m > best_min) {
      best_min = m;
      best = &tr;
    }
  }
  if (!best) return false;
  for (int t : sh.tets) kill_tet(t);
  for (const auto& tri : *best) {
    const int vi = sh.ring[tri[0]], vj = sh.ring[tri[1]], vk = sh.ring[tri[2]];
    add_tet({a, vi, vj, vk});
    add_tet({b, vi, vk, vj});
  }
  return true;
}

std::size_t Remesher::swap() {
  const auto edges = live_edges();
  std::size_t count = 0;
  for (const auto& [a, b] : edges) {
    if (!has_edge(a, b)) continue;
    if (try_swap(a, b)) ++count;
  }
  return count;
}

bool Remesher::try_move(int v) {
  if (frozen_[v] || popcount(planes_[v]) >= 3 || node_tets_[v].empty()) return false;
  std::vector<int> neighbours;
  for (int k : node_tets_[v]) {
    for (int u : tets_[k]) {
      if (u != v) neighbours.push_back(u);
    }
  }
  std::sort(neighbours.begin(), neighbours.end());
  neighbours.erase(std::unique(neighbours.begin(), neighbours.end()), neighbours.end());
  Mat3 weight = Mat3::Zero();
  Vec3 pull = Vec3::Zero();
  for (int u : neighbours) {
    const Mat3 m = 0.5 * (metric_[v] + metric_[u]);
    weight += m;
    pull += m * (x_[u] - x_[v]);
  }
  const Vec3 step = weight.ldlt().solve(pull);
  if (!step.allFinite()) return false;

  double old_min = 1.0;
  for (int k : node_tets_[v]) old_min = std::min(old_min, tet_quality_[k]);
  for (const double relax : {1.0, 0.5, 0.25}) {
    const Vec3 p = project(x_[v] + relax * step, planes_[v]);
    bool ok = true;
    for (int k : node_tets_[v]) {
      if (!valid_with(tets_[k], v, p)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    int hint = hint_[v];
    Mat3 m;
    try {
      m = source_->evaluate(p, hint);
    } catch (const Error&) {
      continue;
    }
    double new_min = 1.0;
    for (int k : node_tets_[v]) new_min = std::min(new_min, quality_with(tets_[k], v, p, m));
    if (new_min > old_min) {
      x_[v] = p;
      metric_[v] = m;
      stale_[v] = 0;
      hint_[v] = hint;
      origin_[v] = -1;
      for (int k : node_tets_[v]) tet_quality_[k] = quality(tets_[k]);
      return true;
    }
  }
  return false;
}

std::size_t Remesher::refresh_metric() {
  std::size_t count = 0;
  for (std::size_t v = 0; v < x_.size(); ++v) {
    if (!node_alive_[v] || !stale_[v]) continue;
    metric_[v] = source_->evaluate(x_[v], hint_[v]);
    stale_[v] = 0;
    for (int k : node_tets_[v]) tet_quality_[k] = quality(tets_[k]);
    ++count;
  }
  return count;
}

std::size_t Remesher::smooth() {
  std::size_t count = 0;
  const int n = static_cast<int>(x_.size());
  for (int v = 0; v < n; ++v) {
    if (node_alive_[v] && try_move(v)) ++count;
  }
  return count;
}

AdaptResult Remesher::finish() const {
  AdaptResult r;
  SimplexMesh& m = r.mesh;
  m.geometry = input_->geometry;
  m.t_begin = input_->t_begin;
  m.t_end = input_->t_end;
  std::vector<int> index(x_.size(), -1);
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (!node_alive_[i]) continue;
    index[i] = static_cast<int>(m.nodes.size());
    m.nodes.push_back(x_[i]);
    m.planes.push_back(planes_[i]);
    m.frozen.push_back(frozen_[i]);
    r.metric.push_back(metric_[i]);
    r.origin.push_back(origin_[i]);
  }
  m.tets.reserve(live_tets_);
  for (std::size_t k = 0; k < tets_.size(); ++k) {
    if (!tet_alive_[k]) continue;
    const Tet& t = tets_[k];
    m.tets.push_back({index[t[0]], index[t[1]], index[t[2]], index[t[3]]});
  }
  rebuild_boundary_facets(m);
  r.report = quality_report(m, r.metric, options_.l_low, options_.l_high);
  return r;
}

namespace {

template <class Pass>
std::size_t run_pass(SimplexMesh& mesh, TensorField& metric, const AdaptConstraints& constraints,
                     const AdaptOptions& options, Pass pass) {
  const BackgroundMetric background(mesh, metric);
  Remesher rm(mesh, metric, background, constraints, options);
  const std::size_t count = pass(rm);
  AdaptResult r = rm.finish();
  mesh = std::move(r.mesh);
  metric = std::move(r.metric);
  return count;
}

AdaptResult run_adapt(const SimplexMesh& mesh, std::span<const Mat3> metric, const MetricSource& source,
                      const AdaptConstraints& constraints, const AdaptOptions& options) {
  if (options.max_sweeps < 1) throw PreconditionError("adapt: max_sweeps must be at least 1");
  Remesher rm(mesh, metric, source, constraints, options);
  std::vector<SweepLog> logs;
  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    rm.refresh_metric();
    SweepLog counts;
    counts.collapses = rm.coarsen();
    counts.swaps = rm.swap();
    counts.splits = rm.refine();
    counts.swaps += rm.swap();
    counts.moves = rm.smooth();
    SweepLog log = rm.stats();
    log.sweep = sweep;
    log.collapses = counts.collapses;
    log.swaps = counts.swaps;
    log.splits = counts.splits;
    log.moves = counts.moves;
    logs.push_back(log);
    const double changed = static_cast<double>(log.collapses + log.splits + log.swaps);
    if (changed < options.stop_fraction * static_cast<double>(log.edges)) break;
  }
  rm.refresh_metric();
  AdaptResult r = rm.finish();
  r.sweeps = std::move(logs);
  return r;
}

}  // namespace

std::size_t coarsen_pass(SimplexMesh& mesh, TensorField& metric, const AdaptConstraints& constraints, double l_low) {
  AdaptOptions options;
  options.l_low = l_low;
  return run_pass(mesh, metric, constraints, options, [](Remesher& rm) { return rm.coarsen(); });
}

std::size_t refine_pass(SimplexMesh& mesh, TensorField& metric, const AdaptConstraints& constraints, double l_high) {
  AdaptOptions options;
  options.l_high = l_high;
  return run_pass(mesh, metric, constraints, options, [](Remesher& rm) { return rm.refine(); });
}

std::size_t swap_pass(SimplexMesh& mesh, TensorField& metric, const AdaptConstraints& constraints) {
  return run_pass(mesh, metric, constraints, {}, [](Remesher& rm) { return rm.swap(); });
}

std::size_t smooth_pass(SimplexMesh& mesh, TensorField& metric, const AdaptConstraints& constraints) {
  return run_pass(mesh, metric, constraints, {}, [](Remesher& rm) { return rm.smooth(); });
}

AdaptResult adapt(const SimplexMesh& mesh, std::span<const Mat3> metric, const AdaptConstraints& constraints,
                  const AdaptOptions& options) {
  const BackgroundMetric background(mesh, TensorField(metric.begin(), metric.end()));
  return run_adapt(mesh, metric, background, constraints, options);
}

AdaptResult adapt(const SimplexMesh& mesh, const MetricSource& source, const AdaptConstraints& constraints,
                  const AdaptOptions& options) {
  TensorField metric(mesh.nodes.size());
  int hint = 0;
  for (std::size_t i = 0; i < metric.size(); ++i) metric[i] = source.evaluate(mesh.nodes[i], hint);
  return run_adapt(mesh, metric, source, constraints, options);
}

std::vector<double> transfer_field(const SimplexMesh& from, std::span<const double> field, const AdaptResult& to) {
  if (field.size() != from.nodes.size()) throw PreconditionError("transfer_field: field size mismatch");
  const PointLocator locator(from);
  std::vector<double> out(to.mesh.nodes.size());
  int hint = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (to.origin[i] >= 0) {
      out[i] = field[to.origin[i]];
    } else {
      out[i] = interpolate(from, field, locator.locate(to.mesh.nodes[i], hint));
    }
  }
  return out;
}

}  // namespace slabflow
