#include "slabflow/timeslab.hpp"

#include "slabflow/error.hpp"
#include "slabflow/fem.hpp"
#include "slabflow/kernels.hpp"
#include "slabflow/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <numbers>

namespace slabflow {

namespace {

double radius(const Vec3& x) { return std::hypot(x.x(), x.y()); }

bool near_integer(double x) { return std::abs(x - std::round(x)) <= 1e-9; }

/// Inflow on T_BEGIN nodes from the initial profile, zero elsewhere.
std::vector<double> analytic_inflow(const SimplexMesh& mesh, InflowProfile profile) {
  std::vector<double> inflow(mesh.nodes.size(), 0.0);
  const int bit = mesh.geometry.t_begin_bit();
  for (std::size_t i = 0; i < inflow.size(); ++i) {
    if (mesh.on_plane(static_cast<int>(i), bit)) inflow[i] = initial_saturation(radius(mesh.nodes[i]), profile);
  }
  return inflow;
}

std::vector<double> pressure_guess(const SimplexMesh& mesh, PressureGuess guess) {
  std::vector<double> p(mesh.nodes.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = initial_pressure(radius(mesh.nodes[i]), guess);
  return p;
}

}  // namespace

void SimConfig::validate() const {
  if (!sigma) throw ConfigError("sigma", "required parameter is missing");
  if (!(*sigma > 0.0) || !std::isfinite(*sigma)) throw ConfigError("sigma", "must be positive");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ConfigError("t_final", "must be positive");
  if (!(dt > 0.0) || dt > t_final) throw ConfigError("dt", "must satisfy 0 < dt <= t_final");
  if (!near_integer(t_final / dt)) throw ConfigError("dt", "t_final / dt must be an integer");
  if (!std::isfinite(xi)) throw ConfigError("xi", "must be finite");
  if (!(q >= 1.0) || !std::isfinite(q)) throw ConfigError("q", "must be at least 1");
  if (!(v_char > 0.0) || !std::isfinite(v_char)) throw ConfigError("v_char", "must be positive");
  if (!(h0 > 0.0) || !std::isfinite(h0)) throw ConfigError("h0", "must be positive");
  if (iters_per_slab < 2) throw ConfigError("iters_per_slab", "must be at least 2");
  if (!(h_min > 0.0)) throw ConfigError("h_min", "must be positive");
  if (!(h_max >= h_min) || !std::isfinite(h_max)) throw ConfigError("h_max", "must be finite and >= h_min");
  if (!(l_low > 0.0) || !(l_low < 1.0)) throw ConfigError("l_low", "must lie in (0, 1)");
  if (!(l_high > 1.0) || !std::isfinite(l_high)) throw ConfigError("l_high", "must be finite and > 1");
  if (max_sweeps < 1) throw ConfigError("max_sweeps", "must be at least 1");
  if (threads < 1) throw ConfigError("threads", "must be at least 1");
}

MetricParams SimConfig::metric_params() const {
  MetricParams mp;
  mp.sigma = sigma.value_or(0.0);
  mp.q = q;
  mp.h_min = h_min;
  mp.h_max = h_max;
  return mp;
}

AdaptOptions SimConfig::adapt_options() const {
  AdaptOptions opt;
  opt.l_low = l_low;
  opt.l_high = l_high;
  opt.max_sweeps = max_sweeps;
  return opt;
}

double initial_saturation(double r, InflowProfile profile) {
  if (r <= kInflowInner) return 1.0;
  switch (profile) {
    case InflowProfile::Step:
      return 0.0;
    case InflowProfile::Ramp:
      return r < kInflowOuter ? (kInflowOuter - r) / (kInflowOuter - kInflowInner) : 0.0;
    case InflowProfile::Cosine:
      if (r >= kInflowOuter) return 0.0;
      return 0.5 * (1.0 + std::cos(std::numbers::pi * (r - kInflowInner) / (kInflowOuter - kInflowInner)));
  }
  return 0.0;
}

double initial_pressure(double r, PressureGuess guess) {
  const double verbatim = (r - 0.1) / 0.9;
  return guess == PressureGuess::Verbatim ? verbatim : 1.0 - verbatim;
}

SlabState init_state(const SimConfig& config) {
  config.validate();
  SlabState s;
  s.mesh = build_slab_mesh(config.h0, 0.0, config.dt);
  const std::size_t n = s.mesh.nodes.size();
  s.phi.assign(n, 0.0);
  s.phi_prev.assign(n, 0.0);
  s.p = pressure_guess(s.mesh, config.p_init);
  s.inflow = analytic_inflow(s.mesh, config.profile);
  return s;
}

double l2_residual(std::span<const double> phi_now, std::span<const double> phi_prev, const SimplexMesh& mesh) {
  if (phi_now.size() != mesh.nodes.size() || phi_prev.size() != mesh.nodes.size()) {
    throw PreconditionError("l2_residual: field size mismatch");
  }
  const auto geom = tet_geometry(mesh);
  std::vector<double> per_tet(mesh.tets.size());
  kernels::squared_difference(geom, mesh, phi_now, phi_prev, per_tet);
  double num = 0.0, vol = 0.0;
  for (std::size_t k = 0; k < per_tet.size(); ++k) {
    num += per_tet[k];
    vol += geom[k].volume;
  }
  return num / vol;
}

TensorField solution_metric(const SimplexMesh& mesh, std::span<const double> p, std::span<const double> phi,
                            const SimConfig& config) {
  const MetricParams mp = config.metric_params();
  const TensorField metric_p = metric_from_hessian(recover_hessian(mesh, p), mp);
  const TensorField metric_phi = metric_from_hessian(recover_hessian(mesh, phi), mp);
  return intersect_metrics(metric_p, metric_phi);
}

ResidualRecord slab_iteration(SlabState& state, const SimConfig& config, int iteration,
                              const std::function<void(const SlabState&)>& after_solve) {
  const auto start = std::chrono::steady_clock::now();
  FlowParams flow;
  flow.xi = config.xi;
  flow.v_char = config.v_char;
  SimplexMesh& mesh = state.mesh;

  // The viscosity of both solves uses the saturation from before this iteration.
  const LinearSystem pressure = assemble_pressure(mesh, state.phi, flow);
  state.p = solve_iterative_detailed(pressure, 1e-10, &state.p).x;
  const ElementVelocity vel = compute_velocity(mesh, state.p, state.phi, flow);
  const LinearSystem saturation = assemble_saturation(mesh, vel, saturation_dirichlet(mesh, state.inflow));
  state.phi = solve_direct(saturation);

  ResidualRecord rec;
  rec.slab = state.slab_index;
  rec.iteration = iteration;
  rec.l2 = l2_residual(state.phi, state.phi_prev, mesh);
  rec.sqrt_l2 = std::sqrt(rec.l2);
  rec.nodes = mesh.nodes.size();
  rec.tets = mesh.tets.size();
  state.phi_prev = state.phi;
  if (after_solve) after_solve(state);

  if (iteration >= 2) {
    const TensorField metric = solution_metric(mesh, state.p, state.phi, config);
    AdaptConstraints constraints;
    constraints.freeze_t_begin = state.slab_index > 0;
    AdaptResult adapted = adapt(mesh, metric, constraints, config.adapt_options());
    const MeshDefects defects = validate_mesh(adapted.mesh);
    if (!defects.clean()) {
      throw Error("adaptation produced an invalid mesh: inverted " + std::to_string(defects.inverted_tets) +
                  ", nonconforming " + std::to_string(defects.nonconforming_faces) + ", untagged " +
                  std::to_string(defects.untagged_boundary_faces) + ", misclassified " +
                  std::to_string(defects.misclassified_nodes));
    }
    state.p = transfer_field(mesh, state.p, adapted);
    state.phi = transfer_field(mesh, state.phi, adapted);
    state.inflow = state.slab_index == 0 ? analytic_inflow(adapted.mesh, config.profile)
                                         : transfer_field(mesh, state.inflow, adapted);
    state.phi_prev = state.phi;
    mesh = std::move(adapted.mesh);
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

SlabState advance_slab(const SlabState& state, const SimConfig& config) {
  const SimplexMesh& old = state.mesh;
  SlabState next;
  next.mesh = mirror_in_time(old, old.t_end);
  const std::size_t n = next.mesh.nodes.size();
  const int old_end = old.geometry.t_end_bit();
  const int new_begin = next.mesh.geometry.t_begin_bit();
  next.inflow.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int v = static_cast<int>(i);
    if (old.on_plane(v, old_end)) next.inflow[i] = state.phi[i];
    if (next.mesh.on_plane(v, new_begin)) next.mesh.frozen[i] = 1;
  }
  next.phi.assign(n, 0.0);
  next.phi_prev.assign(n, 0.0);
  next.p = pressure_guess(next.mesh, config.p_init);
  next.slab_index = state.slab_index + 1;
  next.t_start = next.slab_index * config.dt;
  return next;
}

ResidualTrace run_simulation(const SimConfig& config, const SimulationObserver& observer) {
  config.validate();
  kernels::set_threads(config.threads);
  ResidualTrace trace;
  SlabState state = init_state(config);
  const int slabs = config.slab_count();
  for (int slab = 0; slab < slabs; ++slab) {
    if (slab > 0) state = advance_slab(state, config);
    for (int it = 1; it <= config.iters_per_slab; ++it) {
      const bool last = it == config.iters_per_slab;
      try {
        std::function<void(const SlabState&)> hook;
        if (observer.on_iteration) hook = [&](const SlabState& s) { observer.on_iteration(s, it, last); };
        trace.push_back(slab_iteration(state, config, it, hook));
      } catch (const std::exception& e) {
        throw Error("slab " + std::to_string(slab) + " iteration " + std::to_string(it) + ": " + e.what());
      }
      if (observer.on_record) observer.on_record(trace.back());
    }
  }
  return trace;
}

double tail_residual(const ResidualTrace& trace, int count) {
  if (trace.empty()) throw PreconditionError("tail_residual: empty trace");
  const int final_slab = trace.back().slab;
  std::vector<double> tail;
  for (auto it = trace.rbegin(); it != trace.rend() && it->slab == final_slab && static_cast<int>(tail.size()) < count;
       ++it) {
    tail.push_back(it->l2);
  }
  std::sort(tail.begin(), tail.end());
  const std::size_t m = tail.size();
  return m % 2 ? tail[m / 2] : 0.5 * (tail[m / 2 - 1] + tail[m / 2]);
}

std::optional<int> slab_ending_at(const SimConfig& config, double t) {
  const double k = t / config.dt;
  if (!near_integer(k)) return std::nullopt;
  const int end = static_cast<int>(std::lround(k));
  if (end < 1 || end > config.slab_count()) return std::nullopt;
  return end - 1;
}

}  // namespace slabflow
