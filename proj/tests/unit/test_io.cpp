#include "helpers.hpp"
#include "slabflow/commands.hpp"
#include "slabflow/config.hpp"
#include "slabflow/error.hpp"
#include "slabflow/vtk.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace slabflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("slabflow_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "slabflow");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string config_error_key(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST_CASE("config parsing accepts comments, quotes and defaults") {
  const SimConfig c = parse_config(
      "# run\n"
      "sigma = 0.02   # tolerance\n"
      "dt=0.05\n"
      "\n"
      "profile = \"cosine\"\n"
      "out = \"dir # with hash\"\n");
  CHECK(*c.sigma == 0.02);
  CHECK(c.dt == 0.05);
  CHECK(c.profile == InflowProfile::Cosine);
  CHECK(c.out == "dir # with hash");
  CHECK(c.xi == 2.0);
  CHECK(c.iters_per_slab == 20);
  CHECK(c.slab_count() == 20);
  CHECK(parse_config("sigma = 0.1\ndt = 0.1\n").slab_count() == 10);
}

TEST_CASE("config errors name the key") {
  CHECK(config_error_key("dt = 0.1\n") == "sigma");
  CHECK(config_error_key("sigma = 0.1\nsigma = 0.2\n") == "sigma");
  CHECK(config_error_key("sigma = 0.1\ncolour = 3\n") == "colour");
  CHECK(config_error_key("sigma = 0.1\ndt = fast\n") == "dt");
  CHECK(config_error_key("sigma = 0.1\ndt = 0.3\n") == "dt");
  CHECK(config_error_key("sigma = -1\n") == "sigma");
  CHECK(config_error_key("sigma = 0.1\nprofile = \"zigzag\"\n") == "profile");
  CHECK(config_error_key("sigma = 0.1\njust words\n") == "line 2");
  CHECK(config_error_key("sigma = 0.1\n").empty());
}

TEST_CASE("overrides replace file values before validation") {
  const SimConfig c = parse_config("sigma = 0.1\ndt = 0.3\n", {{"dt", "0.25"}, {"xi", "0"}});
  CHECK(c.dt == 0.25);
  CHECK(c.xi == 0.0);
  CHECK_THROWS_AS(parse_config("sigma = 0.1\n", {{"bogus", "1"}}), ConfigError);
}

TEST_CASE("config serialization round-trips") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    SimConfig c;
    c.sigma = 0.001 + u(rng);
    c.t_final = 1.0 + std::floor(3.0 * u(rng));
    c.dt = c.t_final / (1 + static_cast<int>(rng() % 40));
    c.xi = 4.0 * u(rng) - 2.0;
    c.q = 1.0 + 3.0 * u(rng);
    c.v_char = 0.1 + u(rng);
    c.h0 = 0.01 + u(rng) / 3.0;
    c.iters_per_slab = 2 + static_cast<int>(rng() % 30);
    c.h_min = 1e-4 * (1.0 + u(rng));
    c.h_max = 1.0 + u(rng);
    c.l_low = 0.1 + 0.8 * u(rng);
    c.l_high = 1.1 + u(rng);
    c.max_sweeps = 1 + static_cast<int>(rng() % 9);
    c.profile = static_cast<InflowProfile>(rng() % 3);
    c.p_init = static_cast<PressureGuess>(rng() % 2);
    c.snapshots = static_cast<SnapshotMode>(rng() % 3);
    c.out = "runs/cell " + std::to_string(trial);
    c.seed = rng();
    c.threads = 1 + static_cast<int>(rng() % 4);
    c.validate();
    const std::string text = serialize_config(c);
    CHECK(parse_config(text) == c);
    for (const auto& key : config_keys()) {
      SimConfig d = c;
      set_config_value(d, key, get_config_value(c, key));
      CHECK(d == c);
    }
  }
}

TEST_CASE("shortest number formatting is exact") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 20) - 10);
    CHECK(parse_number(format_number(x), "x") == x);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(2.0) == "2");
}

TEST_CASE("VTK single tetrahedron") {
  const fs::path dir = scratch_dir("vtk1");
  VtkData d;
  d.title = "one tet";
  d.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  d.cells = {{0, 1, 2, 3}};
  d.cell_types = {10};
  const std::vector<double> phi = {0.0, 0.25, 0.5, 1.0 / 3.0};
  d.fields.push_back(scalar_field("phi", phi));
  const std::vector<Mat3> m(4, Mat3::Identity());
  d.fields.push_back(tensor_field("metric", m));
  const std::string path = (dir / "tet.vtk").string();
  write_vtk(path, d);
  const std::string text = read_file(path);
  CHECK(text.rfind("# vtk DataFile Version", 0) == 0);
  CHECK(text.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(text.find("CELLS 1 5") != std::string::npos);
  CHECK(text.find("SCALARS phi double 1") != std::string::npos);
  const VtkData back = read_vtk(path);
  CHECK(back.title == "one tet");
  CHECK(back.points == d.points);
  CHECK(back.cells == d.cells);
  CHECK(back.cell_types == d.cell_types);
  REQUIRE(back.field("phi"));
  CHECK(back.field("phi")->values == phi);
  REQUIRE(back.field("metric"));
  CHECK(back.field("metric")->components == 6);
  CHECK(back.field("metric")->values == d.field("metric")->values);
  CHECK_FALSE(back.field("nothing"));
  fs::remove_all(dir);
}

TEST_CASE("tensor fields use xx yy zz xy yz xz order") {
  Mat3 m;
  m << 1, 4, 6, 4, 2, 5, 6, 5, 3;
  const std::vector<Mat3> v = {m};
  const NamedField f = tensor_field("metric", v);
  CHECK(f.values == std::vector<double>{1, 2, 3, 4, 5, 6});
}

TEST_CASE("mesh VTK round trip keeps everything needed for validation") {
  const fs::path dir = scratch_dir("vtk2");
  SimplexMesh m = build_slab_mesh(0.2, 0.5, 0.3);
  for (std::size_t i = 0; i < m.nodes.size(); i += 3) m.frozen[i] = 1;
  const std::string path = (dir / "mesh.vtk").string();
  write_mesh_vtk(path, m);
  const SimplexMesh back = mesh_from_vtk(read_vtk(path));
  CHECK(back.nodes == m.nodes);
  CHECK(back.tets == m.tets);
  CHECK(back.planes == m.planes);
  CHECK(back.frozen == m.frozen);
  CHECK(back.t_begin == m.t_begin);
  CHECK(back.t_end == m.t_end);
  CHECK(back.geometry == m.geometry);
  CHECK(back.boundary_facets.size() == m.boundary_facets.size());
  CHECK(validate_mesh(back).clean());

  CHECK(cli({"validate", path}) == 0);
  // Swap two vertices of one tet to invert it.
  VtkData d = read_vtk(path);
  std::swap(d.cells[0][0], d.cells[0][1]);
  const std::string bad = (dir / "bad.vtk").string();
  write_vtk(bad, d);
  CHECK(cli({"validate", bad}) == 2);
  fs::remove_all(dir);
}

TEST_CASE("residual CSV and manifest round trip") {
  const fs::path dir = scratch_dir("csv");
  ResidualTrace t = {{0, 1, 0.125, std::sqrt(0.125), 10, 30, 0.5}, {3, 20, 1e-9, std::sqrt(1e-9), 1234, 5678, 12.25}};
  const std::string csv = (dir / "residuals.csv").string();
  write_residual_csv(csv, t);
  CHECK(read_file(csv).rfind("slab,iter,L2,sqrt_L2,nodes,tets,seconds\n", 0) == 0);
  const ResidualTrace back = read_residual_csv(csv);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(back[i].slab == t[i].slab);
    CHECK(back[i].iteration == t[i].iteration);
    CHECK(back[i].l2 == t[i].l2);
    CHECK(back[i].sqrt_l2 == t[i].sqrt_l2);
    CHECK(back[i].nodes == t[i].nodes);
    CHECK(back[i].tets == t[i].tets);
    CHECK(back[i].seconds == t[i].seconds);
  }

  RunManifest m;
  m.config.sigma = 0.05;
  m.config.out = "x";
  m.started = utc_timestamp();
  m.finished = m.started;
  m.files = {"residuals.csv", "manifest.json"};
  m.status = RunStatus::Failed;
  m.error = "slab 0 iteration 2: boom";
  const std::string mp = (dir / "manifest.json").string();
  write_manifest(mp, m);
  const RunManifest r = read_manifest(mp);
  CHECK(r.config == m.config);
  CHECK(r.version == kVersion);
  CHECK(r.files == m.files);
  CHECK(r.status == RunStatus::Failed);
  CHECK(r.error == m.error);
  CHECK(r.started.size() == 20);
  fs::remove_all(dir);
}

TEST_CASE("the run command refuses a config without sigma") {
  const fs::path dir = scratch_dir("cli");
  CHECK(cli({"run", "--dt", "0.1", "--out", (dir / "r").string()}) == 1);
  CHECK_FALSE(fs::exists(dir / "r" / "residuals.csv"));
  CHECK(cli({"run", "--sigma", "0.1", "--dt", "0.3"}) == 1);
  fs::remove_all(dir);
}

TEST_CASE("sweep skips completed cells on resume") {
  const fs::path dir = scratch_dir("sweep");
  SweepOptions opt;
  opt.base.sigma = 0.4;
  opt.base.h0 = 0.2;
  opt.base.t_final = 0.5;
  opt.base.iters_per_slab = 2;
  opt.base.max_sweeps = 1;
  opt.base.snapshots = SnapshotMode::None;
  opt.sigmas = {0.4};
  opt.dts = {0.5, 0.25};
  opt.out = dir.string();
  const auto first = run_sweep(opt);
  REQUIRE(first.size() == 2);
  for (const auto& c : first) {
    CHECK(c.status == RunStatus::Complete);
    CHECK(c.records == static_cast<std::size_t>(2 * std::lround(0.5 / c.dt)));
    CHECK(fs::exists(dir / c.dir / "residuals.csv"));
  }
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "sweep.json"));
  const auto stamp = fs::last_write_time(dir / first[0].dir / "residuals.csv");
  // A failed or missing cell is rerun; a complete one is left alone.
  fs::remove_all(dir / first[1].dir);
  const auto second = run_sweep(opt);
  CHECK(fs::last_write_time(dir / first[0].dir / "residuals.csv") == stamp);
  CHECK(second[1].status == RunStatus::Complete);
  CHECK(second[0].tail_residual == first[0].tail_residual);
  opt.dts = {0.3};
  CHECK_THROWS_AS(run_sweep(opt), ConfigError);
  fs::remove_all(dir);
}
