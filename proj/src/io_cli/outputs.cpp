#include "slabflow/outputs.hpp"

#include "slabflow/config.hpp"
#include "slabflow/error.hpp"

#include <json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

namespace slabflow {

std::string residual_csv_header() { return "slab,iter,L2,sqrt_L2,nodes,tets,seconds"; }

std::string residual_csv_row(const ResidualRecord& r) {
  return std::to_string(r.slab) + "," + std::to_string(r.iteration) + "," + format_number(r.l2) + "," +
         format_number(r.sqrt_l2) + "," + std::to_string(r.nodes) + "," + std::to_string(r.tets) + "," +
         format_number(r.seconds);
}

void write_residual_csv(const std::string& path, const ResidualTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << residual_csv_header() << '\n';
  for (const auto& r : trace) out << residual_csv_row(r) << '\n';
  if (!out) throw Error("write failed for " + path);
}

ResidualTrace read_residual_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::string line;
  std::getline(in, line);
  if (line != residual_csv_header()) throw Error(path + ": unexpected header");
  ResidualTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 7) throw Error(path + ": expected 7 columns in '" + line + "'");
    ResidualRecord r;
    r.slab = static_cast<int>(parse_number(cols[0], "slab"));
    r.iteration = static_cast<int>(parse_number(cols[1], "iter"));
    r.l2 = parse_number(cols[2], "L2");
    r.sqrt_l2 = parse_number(cols[3], "sqrt_L2");
    r.nodes = static_cast<std::size_t>(parse_number(cols[4], "nodes"));
    r.tets = static_cast<std::size_t>(parse_number(cols[5], "tets"));
    r.seconds = parse_number(cols[6], "seconds");
    trace.push_back(r);
  }
  return trace;
}

void write_contour_csv(const std::string& path, std::span<const Polyline> lines) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << "line,x,y\n";
  for (std::size_t l = 0; l < lines.size(); ++l) {
    for (const Vec2& p : lines[l].points) out << l << ',' << format_number(p.x()) << ',' << format_number(p.y()) << '\n';
  }
  if (!out) throw Error("write failed for " + path);
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Running:
      return "running";
    case RunStatus::Complete:
      return "complete";
    case RunStatus::Failed:
      return "failed";
  }
  return "?";
}

RunStatus run_status_from_string(const std::string& s) {
  if (s == "running") return RunStatus::Running;
  if (s == "complete") return RunStatus::Complete;
  if (s == "failed") return RunStatus::Failed;
  throw Error("unknown run status " + s);
}

void write_manifest(const std::string& path, const RunManifest& m) {
  nlohmann::json j;
  j["config"] = serialize_config(m.config);
  j["version"] = m.version;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["files"] = m.files;
  j["status"] = to_string(m.status);
  if (!m.error.empty()) j["error"] = m.error;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error("cannot write " + tmp);
    out << j.dump(2) << '\n';
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("cannot replace " + path);
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  const nlohmann::json j = nlohmann::json::parse(in);
  RunManifest m;
  m.config = parse_config(j.at("config").get<std::string>());
  m.version = j.at("version").get<std::string>();
  m.started = j.at("started").get<std::string>();
  m.finished = j.at("finished").get<std::string>();
  m.files = j.at("files").get<std::vector<std::string>>();
  m.status = run_status_from_string(j.at("status").get<std::string>());
  if (j.contains("error")) m.error = j["error"].get<std::string>();
  return m;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace slabflow
