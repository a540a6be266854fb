#pragma once

#include "slabflow/mesh.hpp"
#include "slabflow/metric.hpp"
#include "slabflow/remesh.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace slabflow {

/// Saturation on the first slab's T_BEGIN face between the radii 0.2 and 0.3.
enum class InflowProfile { Ramp, Step, Cosine };
/// Solver initial guess for the pressure: (r - 0.1)/0.9 as written, or its
/// complement, which matches the boundary values.
enum class PressureGuess { Verbatim, Complement };
enum class SnapshotMode { None, Final, All };

/// Nondimensional parameters of a simulation. `sigma` has no default.
struct SimConfig {
  std::optional<double> sigma;
  double dt = 0.1;
  double xi = 2.0;
  double q = 2.0;
  double t_final = 1.0;
  double v_char = 1.0;
  double h0 = 0.05;
  int iters_per_slab = 20;
  double h_min = 1e-3;
  double h_max = 2.0;
  double l_low = 1.0 / std::sqrt(2.0);
  double l_high = std::sqrt(2.0);
  int max_sweeps = 5;
  InflowProfile profile = InflowProfile::Ramp;
  PressureGuess p_init = PressureGuess::Verbatim;
  std::string out;
  SnapshotMode snapshots = SnapshotMode::Final;
  std::uint64_t seed = 0;
  int threads = 1;

  bool operator==(const SimConfig&) const = default;

  /// Throws ConfigError naming the first offending key.
  void validate() const;
  int slab_count() const { return static_cast<int>(std::lround(t_final / dt)); }
  MetricParams metric_params() const;
  AdaptOptions adapt_options() const;
};

inline constexpr double kInflowInner = 0.2;
inline constexpr double kInflowOuter = 0.3;

double initial_saturation(double r, InflowProfile profile);
double initial_pressure(double r, PressureGuess guess);

struct SlabState {
  SimplexMesh mesh;
  std::vector<double> p, phi;
  /// Previous iteration's saturation on the current mesh.
  std::vector<double> phi_prev;
  /// Saturation prescribed on T_BEGIN nodes (zero elsewhere).
  std::vector<double> inflow;
  int slab_index = 0;  // 0-based
  double t_start = 0.0;
};

struct ResidualRecord {
  int slab = 0;
  int iteration = 0;  // 1-based within the slab
  double l2 = 0.0;
  double sqrt_l2 = 0.0;
  std::size_t nodes = 0, tets = 0;
  double seconds = 0.0;  // wall time of the iteration
};

using ResidualTrace = std::vector<ResidualRecord>;

SlabState init_state(const SimConfig& config);

/// Mean squared difference of two P1 fields over the mesh (exact quadrature).
double l2_residual(std::span<const double> phi_now, std::span<const double> phi_prev, const SimplexMesh& mesh);

/// Intersection of the interpolation-error metrics of p and phi.
TensorField solution_metric(const SimplexMesh& mesh, std::span<const double> p, std::span<const double> phi,
                            const SimConfig& config);

/// Pressure solve, saturation solve, residual against `phi_prev`, then
/// (from iteration 2 on) adaptation to the intersected metrics of p and phi
/// with all fields carried to the new mesh. `after_solve` sees the state
/// before adaptation.
ResidualRecord slab_iteration(SlabState& state, const SimConfig& config, int iteration,
                              const std::function<void(const SlabState&)>& after_solve = {});

/// Mirrors the mesh about T_END; the old T_END saturation becomes the new
/// inflow node for node, and p, phi are reset to their initial guesses.
SlabState advance_slab(const SlabState& state, const SimConfig& config);

/// Hooks for output writers; all optional.
struct SimulationObserver {
  std::function<void(const ResidualRecord&)> on_record;
  /// Called after the solves of every iteration, before adaptation.
  std::function<void(const SlabState&, int iteration, bool last)> on_iteration;
};

/// Runs every slab for iters_per_slab iterations. Errors are rethrown as
/// Error with the slab and iteration prefixed.
ResidualTrace run_simulation(const SimConfig& config, const SimulationObserver& observer = {});

/// Median of the last `count` residuals of the final slab.
double tail_residual(const ResidualTrace& trace, int count = 5);

/// Index of the slab whose T_END face lies at time t (within 1e-9), if any.
std::optional<int> slab_ending_at(const SimConfig& config, double t);

}  // namespace slabflow
