#pragma once

#include "slabflow/locate.hpp"
#include "slabflow/mesh.hpp"
#include "slabflow/metric.hpp"
#include "slabflow/quality.hpp"

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace slabflow {

/// Which nodes may change. Nodes flagged in `SimplexMesh::frozen` are always
/// immutable; `freeze_t_begin` additionally freezes every T_BEGIN node (the
/// face shared with the previous slab). Movement of the remaining boundary
/// nodes is restricted by their plane masks.
struct AdaptConstraints {
  bool freeze_t_begin = false;
};

struct AdaptOptions {
  double l_low = 1.0 / std::sqrt(2.0);
  double l_high = std::sqrt(2.0);
  int max_sweeps = 5;
  /// A sweep that changes fewer than this fraction of edges ends adaptation.
  double stop_fraction = 0.01;
  double swap_trigger = 0.5;
  /// A split may lower the worst quality of its shell to this fraction of
  /// the old value, but never below the global minimum at the start of the
  /// pass.
  double split_quality_ratio = 0.5;
  int max_ring = 7;
};

/// Metric evaluated at arbitrary points of the slab.
class MetricSource {
 public:
  virtual ~MetricSource() = default;
  /// `hint` is a seed for point location, updated in place.
  virtual Mat3 evaluate(const Vec3& p, int& hint) const = 0;
};

/// Nodal tensors on a fixed mesh, interpolated componentwise and floored
/// back to SPD.
class BackgroundMetric final : public MetricSource {
 public:
  BackgroundMetric(SimplexMesh mesh, TensorField metric);
  Mat3 evaluate(const Vec3& p, int& hint) const override;

 private:
  SimplexMesh mesh_;
  TensorField metric_;
  PointLocator locator_;
};

class AnalyticMetric final : public MetricSource {
 public:
  explicit AnalyticMetric(std::function<Mat3(const Vec3&)> f) : f_(std::move(f)) {}
  Mat3 evaluate(const Vec3& p, int&) const override { return f_(p); }

 private:
  std::function<Mat3(const Vec3&)> f_;
};

struct SweepLog {
  int sweep = 0;
  std::size_t nodes = 0, tets = 0, edges = 0;
  std::size_t collapses = 0, splits = 0, swaps = 0, moves = 0;
  double min_quality = 0.0, mean_quality = 0.0;
  double fraction_in_band = 0.0;
};

struct AdaptResult {
  SimplexMesh mesh;
  TensorField metric;
  /// For every output node, the index of the input node it is identical to
  /// (same position), or -1 for created and moved nodes.
  std::vector<int> origin;
  QualityReport report;
  std::vector<SweepLog> sweeps;
};

/// Mutable working mesh for local modifications. Every operation is
/// accepted only if all affected tets keep a positive volume; node
/// constraints follow the plane masks and frozen flags.
class Remesher {
 public:
  Remesher(const SimplexMesh& mesh, std::span<const Mat3> metric, const MetricSource& source,
           const AdaptConstraints& constraints, const AdaptOptions& options);

  /// Collapses edges shorter than l_low; returns the number of collapses.
  std::size_t coarsen();
  /// Splits edges longer than l_high at their metric midpoint.
  std::size_t refine();
  /// Edge removal by retriangulating the ring of interior edges.
  std::size_t swap();
  /// Metric-weighted Laplacian node relocation.
  std::size_t smooth();
  /// Nodes created by splits carry the tensor interpolated along their
  /// edge; this resamples them from the metric source.
  std::size_t refresh_metric();

  std::size_t node_count() const { return live_nodes_; }
  std::size_t tet_count() const { return live_tets_; }
  double min_quality() const;
  /// Sizes, quality and band fraction of the current mesh (operation counts zero).
  SweepLog stats() const;

  /// Compacted mesh, nodal metric and origin map.
  AdaptResult finish() const;

 private:
  struct Shell {
    std::vector<int> tets;
    std::vector<int> ring;  // ordered so that (a, b, ring[i], ring[i+1]) is positive
    bool closed = false;
  };

  double edge_length(int a, int b) const;
  double quality(const Tet& t) const;
  double quality_with(const Tet& t, int node, const Vec3& pos, const Mat3& m) const;
  Mat3 mean_metric(const Tet& t, int node, const Mat3& m) const;
  bool valid(const Tet& t) const;
  bool valid_with(const Tet& t, int node, const Vec3& pos) const;
  std::vector<std::array<int, 2>> live_edges() const;
  bool has_edge(int a, int b) const;
  std::vector<int> shell_tets(int a, int b) const;
  Shell shell(int a, int b) const;
  Vec3 project(const Vec3& p, PlaneMask planes) const;

  bool try_collapse(int a, int b);
  bool try_split(int a, int b);
  bool try_swap(int a, int b);
  bool try_move(int v);

  int add_node(const Vec3& p, PlaneMask planes, const Mat3& m, int hint);
  int add_tet(const Tet& t);
  void kill_tet(int t);
  void detach(int node, int t);

  const SimplexMesh* input_;
  const MetricSource* source_;
  AdaptOptions options_;

  std::vector<Vec3> x_;
  std::vector<PlaneMask> planes_;
  std::vector<std::uint8_t> frozen_;
  std::vector<Mat3> metric_;
  std::vector<std::uint8_t> stale_;
  std::vector<int> origin_;
  std::vector<int> hint_;
  std::vector<std::uint8_t> node_alive_;
  std::vector<std::vector<int>> node_tets_;
  std::vector<Tet> tets_;
  std::vector<std::uint8_t> tet_alive_;
  std::vector<double> tet_quality_;
  std::vector<int> free_tets_;
  std::size_t live_nodes_ = 0, live_tets_ = 0;
  double split_floor_ = 0.0;
};

/// Single passes on a mesh with a nodal metric. Split nodes take the tensor
/// interpolated along their edge; moved nodes sample the input metric.
std::size_t coarsen_pass(SimplexMesh& mesh, TensorField& metric, const AdaptConstraints& constraints,
                         double l_low = 1.0 / std::sqrt(2.0));
std::size_t refine_pass(SimplexMesh& mesh, TensorField& metric, const AdaptConstraints& constraints,
                        double l_high = std::sqrt(2.0));
std::size_t swap_pass(SimplexMesh& mesh, TensorField& metric, const AdaptConstraints& constraints);
std::size_t smooth_pass(SimplexMesh& mesh, TensorField& metric, const AdaptConstraints& constraints);

/// Sweeps coarsen -> swap -> refine -> swap -> smooth until a sweep changes
/// fewer than stop_fraction of the edges or max_sweeps is reached. Split
/// nodes are resampled from the metric source before every sweep and at
/// the end.
AdaptResult adapt(const SimplexMesh& mesh, std::span<const Mat3> metric, const AdaptConstraints& constraints,
                  const AdaptOptions& options = {});
/// As above with the metric taken from `source` everywhere.
AdaptResult adapt(const SimplexMesh& mesh, const MetricSource& source, const AdaptConstraints& constraints,
                  const AdaptOptions& options = {});

/// Values of a nodal field on the adapted mesh: copied for nodes with an
/// origin, interpolated on the input mesh otherwise.
std::vector<double> transfer_field(const SimplexMesh& from, std::span<const double> field, const AdaptResult& to);

}  // namespace slabflow
