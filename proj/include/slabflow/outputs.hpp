#pragma once

#include "slabflow/extract.hpp"
#include "slabflow/timeslab.hpp"

#include <span>
#include <string>
#include <vector>

namespace slabflow {

inline constexpr const char* kVersion = "0.1.0";

/// Residual log: slab,iter,L2,sqrt_L2,nodes,tets,seconds.
std::string residual_csv_header();
std::string residual_csv_row(const ResidualRecord& r);
void write_residual_csv(const std::string& path, const ResidualTrace& trace);
ResidualTrace read_residual_csv(const std::string& path);

/// Polyline vertices as line,x,y rows.
void write_contour_csv(const std::string& path, std::span<const Polyline> lines);

enum class RunStatus { Running, Complete, Failed };
const char* to_string(RunStatus s);
RunStatus run_status_from_string(const std::string& s);

struct RunManifest {
  SimConfig config;
  std::string version = kVersion;
  std::string started, finished;  // UTC, ISO 8601
  std::vector<std::string> files;  // relative to the run directory
  RunStatus status = RunStatus::Running;
  std::string error;
};

void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path);

std::string utc_timestamp();

}  // namespace slabflow
