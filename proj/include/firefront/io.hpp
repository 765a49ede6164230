/// @file io.hpp
/// @brief File formats: round-trip double formatting, CSV artifacts,
///        snapshot import, content hashing, and run manifests.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "firefront/classical.hpp"
#include "firefront/field.hpp"
#include "firefront/geometry.hpp"
#include "firefront/scenario.hpp"

namespace firefront {

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

/// FNV-1a 64-bit over raw bytes, lowercase hex.
std::string fnv1a_hex(const std::string& bytes);

std::string read_file(const std::string& path);     // throws IoError
void write_file(const std::string& path, const std::string& content);

// --- CSV artifacts (all doubles via format_double; physical units) ---

void write_loss_csv(const std::string& path, const std::vector<double>& history);

/// One snapshot: header "t,x,y,psi", one row per node, x fastest.
void write_snapshot_csv(const std::string& path, double t_phys,
                        const ScalarField2& f, const Grid2& grid_phys);

/// Header "x,y,t_ignite"; never-ignited nodes carry "nan".
void write_ignition_csv(const std::string& path, const ScalarField2& t_ignite_phys,
                        const Grid2& grid_phys);

/// Header "loop_id,x,y"; loops numbered in extraction order.
void write_fireline_csv(const std::string& path, const Fireline& fl);

void write_metrics_csv(const std::string& path, const MetricsSeries& ms);
std::string metrics_json(const MetricsSeries& ms);

/// Reads a snapshot written by write_snapshot_csv: recovers the time, the
/// uniform grid, and the field. Throws ParseError on ragged input.
struct SnapshotFile {
  double time = 0.0;  // physical
  Grid2 grid;         // physical
  ScalarField2 field;
};
SnapshotFile read_snapshot_csv(const std::string& path);

/// Loads every snapshot_*.csv under a directory, sorted by time.
std::vector<SnapshotFile> read_snapshot_dir(const std::string& dir);

// --- Run manifest ---

/// Everything needed to rerun a command: echoed config, seed, input hash,
/// produced artifacts, wall-clock timings.
struct RunManifest {
  std::string command;
  std::string scenario_path;
  std::string scenario_hash;
  std::uint64_t seed = 0;
  int threads = 0;
  std::map<std::string, std::string> config;   // echoed resolved settings
  std::vector<std::string> artifacts;          // paths relative to out dir
  std::map<std::string, double> timings_s;
};

std::string manifest_json(const RunManifest& m);
void write_manifest(const std::string& dir, const RunManifest& m);

/// Joins a directory and a relative filename.
std::string path_join(const std::string& dir, const std::string& name);

}  // namespace firefront
