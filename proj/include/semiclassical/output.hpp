#pragma once

// Run directories:
//   scenario.echo        resolved scenario text (hashed into the manifest)
//   metrics.json         ConvergenceReport, no timing, byte-reproducible
//   trajectories.csv     exported Bohm and classical paths
//   fields/*.csv         final grid fields per rung and the classical limit
//   manifest.json        written last

#include <cstdint>
#include <string>
#include <vector>

#include "semiclassical/experiments.hpp"
#include "semiclassical/scenario.hpp"

namespace semiclassical {

inline constexpr const char* kToolVersion = "0.3.0";

/// Shortest decimal text that reads back to the same double ("nan",
/// "inf", "-inf" for non-finite values). Locale independent.
std::string format_double(double value);

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(const std::string& bytes);

std::string metrics_json(const ConvergenceReport& report);

struct RunManifest {
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::string started;   // ISO 8601 UTC
  std::string finished;
  std::vector<std::string> outputs;  // relative to the run directory
  std::string version = kToolVersion;
};

std::string manifest_json(const RunManifest& manifest);

/// Writes every file of the run directory (creating it) and returns the
/// manifest that was written last.
RunManifest write_run_directory(const std::string& dir, const Scenario& scenario, const SweepResult& result,
                                const std::string& started, const std::string& finished);

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

}  // namespace semiclassical
