#include "slabflow/commands.hpp"

#include "slabflow/config.hpp"
#include "slabflow/error.hpp"
#include "slabflow/extract.hpp"
#include "slabflow/quality.hpp"
#include "slabflow/vtk.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace fs = std::filesystem;

namespace slabflow {

namespace {

// Degree-2 rule on the reference tet: four points, equal weights.
constexpr double kQuadA = 0.5854101966249685;
constexpr double kQuadB = 0.1381966011250105;

/// Adds the integral of (f - P1 interpolant)^2 over (x0..x3) using `levels`
/// rounds of 8-way midpoint subdivision; `v` holds the nodal values.
double squared_error(const std::array<Vec3, 4>& x, const std::array<double, 4>& v,
                     const std::function<double(const Vec3&)>& f, int levels) {
  if (levels == 0) {
    const double vol = std::abs(tet_volume(x[0], x[1], x[2], x[3]));
    double sum = 0.0;
    for (int q = 0; q < 4; ++q) {
      Vec3 p = Vec3::Zero();
      double interp = 0.0;
      for (int i = 0; i < 4; ++i) {
        const double w = i == q ? kQuadA : kQuadB;
        p += w * x[i];
        interp += w * v[i];
      }
      const double e = f(p) - interp;
      sum += e * e;
    }
    return 0.25 * vol * sum;
  }
  // Corner tets and the octahedron split along the 0-5 diagonal (edge mid
  // points m01 m02 m03 m12 m13 m23).
  std::array<Vec3, 6> m;
  std::array<double, 6> mv;
  const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  for (int e = 0; e < 6; ++e) {
    m[e] = 0.5 * (x[pairs[e][0]] + x[pairs[e][1]]);
    mv[e] = 0.5 * (v[pairs[e][0]] + v[pairs[e][1]]);
  }
  // Node ids: 0-3 corners, 4-9 midpoints.
  auto pt = [&](int i) { return i < 4 ? x[i] : m[i - 4]; };
  auto val = [&](int i) { return i < 4 ? v[i] : mv[i - 4]; };
  static const int subs[8][4] = {{0, 4, 5, 6}, {4, 1, 7, 8}, {5, 7, 2, 9}, {6, 8, 9, 3},
                                 {4, 5, 6, 8}, {4, 5, 7, 8}, {5, 6, 8, 9}, {5, 7, 8, 9}};
  double sum = 0.0;
  for (const auto& s : subs) {
    sum += squared_error({pt(s[0]), pt(s[1]), pt(s[2]), pt(s[3])}, {val(s[0]), val(s[1]), val(s[2]), val(s[3])}, f,
                         levels - 1);
  }
  return sum;
}

std::string join(const fs::path& dir, const std::string& name) { return (dir / name).string(); }

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item, key));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

std::string default_root() {
  const char* env = std::getenv("SLABFLOW_OUT");
  return env && *env ? env : "slabflow_out";
}

/// Registers --<key> for every config key; returns the storage.
std::shared_ptr<std::map<std::string, std::string>> add_config_options(CLI::App* app,
                                                                       const std::set<std::string>& skip = {}) {
  auto values = std::make_shared<std::map<std::string, std::string>>();
  for (const auto& key : config_keys()) {
    if (skip.count(key)) continue;
    app->add_option("--" + key, (*values)[key], "configuration value for " + key);
  }
  return values;
}

ConfigOverrides collect(CLI::App* app, const std::map<std::string, std::string>& values) {
  ConfigOverrides o;
  for (const auto& [key, value] : values) {
    if (app->count("--" + key) > 0) o[key] = value;
  }
  return o;
}

SimConfig load_config(const std::string& file, const ConfigOverrides& overrides, bool validate = true) {
  if (!file.empty()) return parse_config_file(file, overrides);
  if (validate) return parse_config("", overrides);
  SimConfig c;
  for (const auto& [key, value] : overrides) set_config_value(c, key, value);
  return c;
}

int check_mesh_file(const std::string& path) {
  const VtkData d = read_vtk(path);
  std::size_t tets = 0;
  for (int t : d.cell_types) tets += t == 10;
  std::cout << "file " << path << " points " << d.points.size() << " cells " << d.cells.size() << " tets " << tets
            << '\n';
  if (d.field("planes") && d.field("frozen")) {
    const SimplexMesh mesh = mesh_from_vtk(d);
    const MeshDefects defects = validate_mesh(mesh);
    std::cout << "inverted " << defects.inverted_tets << " nonconforming " << defects.nonconforming_faces
              << " untagged " << defects.untagged_boundary_faces << " misclassified " << defects.misclassified_nodes
              << '\n';
    std::cout << (defects.clean() ? "valid" : "invalid") << '\n';
    return defects.clean() ? 0 : 2;
  }
  // Without plane masks only orientation and face sharing can be checked.
  std::size_t inverted = 0;
  std::unordered_map<std::uint64_t, int> faces;
  for (std::size_t k = 0; k < d.cells.size(); ++k) {
    if (d.cell_types[k] != 10) continue;
    const auto& c = d.cells[k];
    if (orient3d(d.points[c[0]], d.points[c[1]], d.points[c[2]], d.points[c[3]]) <= 0.0) ++inverted;
    for (int f = 0; f < 4; ++f) ++faces[face_key(c[(f + 1) % 4], c[(f + 2) % 4], c[(f + 3) % 4])];
  }
  std::size_t overshared = 0;
  for (const auto& [key, count] : faces) overshared += count > 2;
  std::cout << "inverted " << inverted << " nonconforming " << overshared << '\n';
  const bool ok = inverted == 0 && overshared == 0;
  std::cout << (ok ? "valid" : "invalid") << '\n';
  return ok ? 0 : 2;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_summary(const fs::path& root, const std::vector<SweepCell>& cells) {
  nlohmann::json j;
  j["cells"] = nlohmann::json::array();
  std::ofstream csv(root / "summary.csv");
  if (!csv) throw Error("cannot write " + (root / "summary.csv").string());
  csv << "sigma,dt,status,records,tail_residual,dir\n";
  for (const auto& c : cells) {
    j["cells"].push_back({{"sigma", c.sigma}, {"dt", c.dt}, {"dir", c.dir}, {"status", to_string(c.status)}});
    csv << format_number(c.sigma) << ',' << format_number(c.dt) << ',' << to_string(c.status) << ',' << c.records
        << ',' << (c.status == RunStatus::Complete ? format_number(c.tail_residual) : "") << ',' << c.dir << '\n';
  }
  write_json((root / "sweep.json").string(), j);
}

/// Reads a finished cell back; false if the cell must be (re)run.
bool load_finished(const fs::path& dir, SweepCell& cell) {
  if (!fs::exists(dir / "manifest.json")) return false;
  try {
    if (read_manifest((dir / "manifest.json").string()).status != RunStatus::Complete) return false;
    const ResidualTrace trace = read_residual_csv((dir / "residuals.csv").string());
    cell.records = trace.size();
    cell.tail_residual = tail_residual(trace);
    cell.status = RunStatus::Complete;
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

AnalyticFunction analytic_function(const std::string& name) {
  if (name == "tanh-ring") {
    constexpr double k = 20.0, r0 = 0.25;
    AnalyticFunction f;
    f.value = [](const Vec3& p) { return std::tanh(k * (std::hypot(p.x(), p.y()) - r0)); };
    f.hessian = [](const Vec3& p) {
      const double r = std::hypot(p.x(), p.y());
      const double th = std::tanh(k * (r - r0));
      const double sech2 = 1.0 - th * th;
      const double d1 = k * sech2;
      const double d2 = -2.0 * k * k * th * sech2;
      const Vec2 e(p.x() / r, p.y() / r);
      const Eigen::Matrix2d radial = e * e.transpose();
      Mat3 h = Mat3::Zero();
      h.topLeftCorner<2, 2>() = d2 * radial + (d1 / r) * (Eigen::Matrix2d::Identity() - radial);
      return h;
    };
    return f;
  }
  throw PreconditionError("unknown function '" + name + "' (known: tanh-ring)");
}

double interpolation_error(const SimplexMesh& mesh, const std::function<double(const Vec3&)>& f) {
  std::vector<double> nodal(mesh.nodes.size());
  for (std::size_t i = 0; i < nodal.size(); ++i) nodal[i] = f(mesh.nodes[i]);
  double sum = 0.0, vol = 0.0;
  for (const Tet& t : mesh.tets) {
    const std::array<Vec3, 4> x = {mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]], mesh.nodes[t[3]]};
    sum += squared_error(x, {nodal[t[0]], nodal[t[1]], nodal[t[2]], nodal[t[3]]}, f, 2);
    vol += std::abs(tet_volume(x[0], x[1], x[2], x[3]));
  }
  return std::sqrt(sum / vol);
}

AdaptDemoResult run_adapt_demo(const AdaptDemoOptions& options) {
  if (options.stages < 1 || options.sweeps_per_stage < 1) throw PreconditionError("run_adapt_demo: bad stage counts");
  const auto start = std::chrono::steady_clock::now();
  const AnalyticFunction fn = analytic_function(options.function);
  SimplexMesh mesh = build_slab_mesh(options.h0, 0.0, options.dt);
  AdaptOptions ao;
  ao.max_sweeps = options.sweeps_per_stage;
  AdaptDemoResult out;
  for (int stage = options.stages - 1; stage >= 0; --stage) {
    MetricParams mp = options.metric;
    mp.sigma = options.metric.sigma * std::ldexp(1.0, stage);
    const AnalyticMetric source([&fn, mp](const Vec3& p) { return metric_from_hessian(fn.hessian(p), mp); });
    out.adapted = adapt(mesh, source, {}, ao);
    mesh = out.adapted.mesh;
  }
  out.l2_error = interpolation_error(out.adapted.mesh, fn.value);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

RunOutcome run_to_directory(const SimConfig& config, const std::string& dir_name) {
  config.validate();
  const fs::path dir(dir_name);
  fs::create_directories(dir);
  RunOutcome outcome;
  RunManifest& manifest = outcome.manifest;
  manifest.config = config;
  manifest.config.out = dir.string();
  manifest.started = utc_timestamp();
  const std::string manifest_path = join(dir, "manifest.json");
  write_manifest(manifest_path, manifest);

  std::set<std::string> files;
  auto add_file = [&](const std::string& name) { files.insert(name); };
  std::ofstream csv(dir / "residuals.csv");
  if (!csv) throw Error("cannot write " + join(dir, "residuals.csv"));
  csv << residual_csv_header() << '\n';
  add_file("residuals.csv");

  const int slabs = config.slab_count();
  const std::optional<int> contour_slab = slab_ending_at(config, 0.5);
  SimulationObserver obs;
  obs.on_record = [&](const ResidualRecord& r) { csv << residual_csv_row(r) << '\n' << std::flush; };
  obs.on_iteration = [&](const SlabState& s, int it, bool last) {
    const bool snapshot = config.snapshots == SnapshotMode::All || (config.snapshots == SnapshotMode::Final && last);
    if (snapshot) {
      const std::string name = "slab" + std::to_string(s.slab_index) + "_iter" + std::to_string(it) + ".vtk";
      const TensorField metric = solution_metric(s.mesh, s.p, s.phi, config);
      const std::vector<NamedField> fields = {scalar_field("p", s.p), scalar_field("phi", s.phi),
                                              scalar_field("inflow", s.inflow), tensor_field("metric", metric)};
      write_mesh_vtk(join(dir, name), s.mesh, fields);
      add_file(name);
    }
    if (!last) return;
    const std::string iso = "iso_phi05_slab" + std::to_string(s.slab_index) + ".vtk";
    write_surface_vtk(join(dir, iso), extract_isosurface(s.mesh, s.phi, 0.5));
    add_file(iso);
    const std::vector<std::vector<double>> slice_fields = {s.p, s.phi};
    const std::vector<std::string> names = {"p", "phi"};
    if (contour_slab && *contour_slab == s.slab_index) {
      const TimeSlice slice = extract_time_face(s.mesh, slice_fields, names, FacetTag::TEnd);
      write_contour_csv(join(dir, "contour_t05.csv"), contour_polylines(slice, 1, 0.5));
      add_file("contour_t05.csv");
    }
    if (s.slab_index == slabs - 1) {
      write_slice_vtk(join(dir, "final_slice.vtk"), extract_time_face(s.mesh, slice_fields, names, FacetTag::TEnd));
      add_file("final_slice.vtk");
    }
  };

  try {
    outcome.trace = run_simulation(config, obs);
    manifest.status = RunStatus::Complete;
  } catch (const std::exception& e) {
    manifest.status = RunStatus::Failed;
    manifest.error = e.what();
  }
  csv.close();
  manifest.files.assign(files.begin(), files.end());
  manifest.files.push_back("manifest.json");
  manifest.finished = utc_timestamp();
  write_manifest(manifest_path, manifest);
  if (manifest.status == RunStatus::Failed) throw Error(manifest.error);
  return outcome;
}

std::string sweep_cell_dir(double sigma, double dt) {
  return "sigma" + format_number(sigma) + "_dt" + format_number(dt);
}

std::vector<SweepCell> run_sweep(const SweepOptions& options) {
  const fs::path root(options.out);
  fs::create_directories(root);
  std::vector<SweepCell> cells;
  for (double sigma : options.sigmas) {
    for (double dt : options.dts) {
      SweepCell c;
      c.sigma = sigma;
      c.dt = dt;
      c.dir = sweep_cell_dir(sigma, dt);
      cells.push_back(c);
    }
  }
  // Validate every cell before running any.
  std::vector<SimConfig> configs;
  for (auto& c : cells) {
    SimConfig cfg = options.base;
    cfg.sigma = c.sigma;
    cfg.dt = c.dt;
    cfg.out = (root / c.dir).string();
    cfg.validate();
    configs.push_back(cfg);
    if (!load_finished(root / c.dir, c)) c.status = RunStatus::Running;
  }
  write_summary(root, cells);

  auto finish_cell = [&](std::size_t i) {
    if (!load_finished(root / cells[i].dir, cells[i])) cells[i].status = RunStatus::Failed;
    write_summary(root, cells);
  };

  if (options.jobs <= 0) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i].status == RunStatus::Complete) continue;
      try {
        run_to_directory(configs[i], configs[i].out);
      } catch (const std::exception& e) {
        std::cerr << "cell " << cells[i].dir << " failed: " << e.what() << '\n';
      }
      finish_cell(i);
    }
    return cells;
  }

  std::map<pid_t, std::size_t> running;
  auto wait_one = [&] {
    int status = 0;
    const pid_t pid = ::wait(&status);
    if (pid < 0) throw Error("wait failed");
    const std::size_t i = running.at(pid);
    running.erase(pid);
    finish_cell(i);
  };
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].status == RunStatus::Complete) continue;
    while (static_cast<int>(running.size()) >= options.jobs) wait_one();
    fs::create_directories(configs[i].out);
    const std::string cfg_path = join(configs[i].out, "config.toml");
    {
      std::ofstream cfg(cfg_path);
      cfg << serialize_config(configs[i]);
    }
    const pid_t pid = ::fork();
    if (pid < 0) throw Error("fork failed");
    if (pid == 0) {
      const std::string exe = options.executable;
      ::execl(exe.c_str(), exe.c_str(), "run", "--config", cfg_path.c_str(), static_cast<char*>(nullptr));
      std::_Exit(127);
    }
    running[pid] = i;
  }
  while (!running.empty()) wait_one();
  return cells;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Timespace viscous fingering on adapted tetrahedral meshes"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "single simulation");
  std::string run_config;
  run->add_option("--config", run_config, "flat key = value config file");
  auto run_values = add_config_options(run);

  CLI::App* sweep = app.add_subcommand("sweep", "cross product of sigma and dt lists");
  std::string sweep_config, sweep_sigmas, sweep_dts;
  int jobs = 0;
  sweep->add_option("--config", sweep_config, "base config file");
  sweep->add_option("--sigma", sweep_sigmas, "comma-separated sigma values")->required();
  sweep->add_option("--dt", sweep_dts, "comma-separated slab thicknesses")->required();
  sweep->add_option("--jobs", jobs, "child processes (0 runs in this process)");
  auto sweep_values = add_config_options(sweep, {"sigma", "dt"});

  CLI::App* demo = app.add_subcommand("adapt-demo", "adapt to an analytic function");
  std::string function = "tanh-ring", demo_out;
  AdaptDemoOptions demo_opt;
  demo->add_option("--function", function, "analytic function name");
  demo->add_option("--sigma", demo_opt.metric.sigma, "target metric tolerance")->required();
  demo->add_option("--out", demo_out, "output directory");
  demo->add_option("--stages", demo_opt.stages, "metric continuation stages");
  demo->add_option("--sweeps", demo_opt.sweeps_per_stage, "adaptation sweeps per stage");
  demo->add_option("--h0", demo_opt.h0, "initial mesh size");
  demo->add_option("--dt", demo_opt.dt, "slab thickness");

  CLI::App* validate = app.add_subcommand("validate", "check a VTK mesh file");
  std::string mesh_file;
  validate->add_option("file", mesh_file, "VTK file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run) {
      SimConfig config = load_config(run_config, collect(run, *run_values));
      if (config.out.empty()) config.out = (fs::path(default_root()) / sweep_cell_dir(*config.sigma, config.dt)).string();
      const RunOutcome outcome = run_to_directory(config, config.out);
      std::cout << "run complete: " << outcome.trace.size() << " records, tail residual "
                << format_number(tail_residual(outcome.trace)) << ", output " << config.out << '\n';
      return 0;
    }
    if (*sweep) {
      SweepOptions opt;
      ConfigOverrides overrides = collect(sweep, *sweep_values);
      opt.sigmas = parse_list(sweep_sigmas, "sigma");
      opt.dts = parse_list(sweep_dts, "dt");
      overrides["sigma"] = format_number(opt.sigmas.front());
      overrides["dt"] = format_number(opt.dts.front());
      opt.base = load_config(sweep_config, overrides);
      opt.out = opt.base.out.empty() ? (fs::path(default_root()) / "sweep").string() : opt.base.out;
      opt.jobs = jobs;
      opt.executable = fs::read_symlink("/proc/self/exe").string();
      const auto cells = run_sweep(opt);
      std::size_t failed = 0;
      for (const auto& c : cells) failed += c.status != RunStatus::Complete;
      std::cout << "sweep: " << cells.size() - failed << " of " << cells.size() << " cells complete, summary "
                << (fs::path(opt.out) / "summary.csv").string() << '\n';
      return failed ? 1 : 0;
    }
    if (*demo) {
      demo_opt.function = function;
      const AdaptDemoResult r = run_adapt_demo(demo_opt);
      const auto& rep = r.adapted.report;
      std::cout << "adapt-demo " << function << " sigma " << format_number(demo_opt.metric.sigma) << ": nodes "
                << r.adapted.mesh.nodes.size() << " tets " << r.adapted.mesh.tets.size() << " l2_error "
                << format_number(r.l2_error) << " in_band " << format_number(rep.fraction_in_band) << " min_quality "
                << format_number(rep.min_quality) << '\n';
      if (!demo_out.empty()) {
        const fs::path dir(demo_out);
        fs::create_directories(dir);
        const AnalyticFunction fn = analytic_function(function);
        std::vector<double> values(r.adapted.mesh.nodes.size());
        for (std::size_t i = 0; i < values.size(); ++i) values[i] = fn.value(r.adapted.mesh.nodes[i]);
        const std::vector<NamedField> fields = {scalar_field("f", values), tensor_field("metric", r.adapted.metric)};
        write_mesh_vtk(join(dir, "adapt_demo.vtk"), r.adapted.mesh, fields);
        nlohmann::json j = {{"function", function},
                            {"sigma", demo_opt.metric.sigma},
                            {"nodes", r.adapted.mesh.nodes.size()},
                            {"tets", r.adapted.mesh.tets.size()},
                            {"l2_error", r.l2_error},
                            {"fraction_in_band", rep.fraction_in_band},
                            {"band", {rep.band_low, rep.band_high}},
                            {"min_quality", rep.min_quality},
                            {"mean_quality", rep.mean_quality},
                            {"stages", demo_opt.stages},
                            {"seconds", r.seconds}};
        write_json(join(dir, "adapt_demo.json"), j);
      }
      return 0;
    }
    if (*validate) return check_mesh_file(mesh_file);
  } catch (const std::exception& e) {
    std::cerr << "slabflow: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace slabflow
