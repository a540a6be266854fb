#pragma once

#include "slabflow/outputs.hpp"
#include "slabflow/remesh.hpp"
#include "slabflow/timeslab.hpp"

#include <functional>
#include <string>
#include <vector>

namespace slabflow {

/// A scalar function of (x, y, t) with its analytic Hessian.
struct AnalyticFunction {
  std::function<double(const Vec3&)> value;
  std::function<Mat3(const Vec3&)> hessian;
};

/// Known names: "tanh-ring" = tanh(20 (r - 0.25)). Throws on others.
AnalyticFunction analytic_function(const std::string& name);

/// sqrt of the volume-averaged squared difference between f and its P1
/// interpolant, integrated on two levels of midpoint subdivision.
double interpolation_error(const SimplexMesh& mesh, const std::function<double(const Vec3&)>& f);

struct AdaptDemoOptions {
  std::string function = "tanh-ring";
  MetricParams metric;  // metric.sigma is the target tolerance
  double dt = 1.5;
  double h0 = 0.2;
  /// Adaptation runs against sigma 2^(stages-1), ..., 2, 1 times the
  /// target, each stage starting from the previous mesh.
  int stages = 6;
  int sweeps_per_stage = 6;
};

struct AdaptDemoResult {
  AdaptResult adapted;
  double l2_error = 0.0;
  double seconds = 0.0;
};

AdaptDemoResult run_adapt_demo(const AdaptDemoOptions& options);

/// Runs a simulation writing residuals.csv, snapshots, isosurfaces, the
/// final slice, the t = 0.5 contour and manifest.json into `dir`.
struct RunOutcome {
  ResidualTrace trace;
  RunManifest manifest;
};
RunOutcome run_to_directory(const SimConfig& config, const std::string& dir);

struct SweepOptions {
  SimConfig base;
  std::vector<double> sigmas, dts;
  std::string out;
  /// 0 runs cells in this process; n > 0 runs up to n child processes of
  /// `executable`.
  int jobs = 0;
  std::string executable;
};

struct SweepCell {
  double sigma = 0.0, dt = 0.0;
  std::string dir;  // relative to the sweep root
  RunStatus status = RunStatus::Running;
  double tail_residual = 0.0;
  std::size_t records = 0;
};

/// Cross product of sigmas and dts. Cells whose manifest reports complete
/// are not rerun. Writes sweep.json and summary.csv.
std::vector<SweepCell> run_sweep(const SweepOptions& options);

std::string sweep_cell_dir(double sigma, double dt);

/// Command-line entry point; returns the process exit status.
int run_cli(int argc, char** argv);

}  // namespace slabflow
