#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "voxmc/scheduler.hpp"
#include "voxmc/types.hpp"

namespace voxmc {

/// Fully resolved run description: scene, simulation parameters, device
/// roster, partitioning strategy, output locations.
struct RunSetup {
  Scene scene;
  SimulationConfig config;
  std::vector<DeviceProfile> devices;
  Strategy strategy = Strategy::S1;
  std::string output_path;
  std::string report_path;
};

/// Parses the JSON run configuration (benchmark preset or explicit
/// grid/media/source; explicit settings override preset fields). Throws
/// ParseError / ValidationError.
RunSetup parse_config(const std::filesystem::path& path);
RunSetup parse_config_text(const std::string& json_text);

/// Device roster: JSON array of {name, cores, kind, a?, t0?, jitter_sigma?}.
std::vector<DeviceProfile> load_roster(const std::filesystem::path& path);
std::vector<DeviceProfile> parse_roster_text(const std::string& json_text);

/// Single host-pool device spanning `threads` workers (default roster).
DeviceProfile host_device(int threads);

/// Hash identifying the physics content of a run (grid, media, source,
/// boundary handling); keys the calibration cache.
std::uint64_t scene_hash(const Scene& scene, const SimulationConfig& config);

struct DeviceReport {
  std::string name;
  std::uint64_t photons = 0;
  double wall_ms = 0.0;
};

struct RunReport {
  std::vector<DeviceReport> devices;
  double makespan_ms = 0.0;
  double throughput_photons_per_ms = 0.0;
  double conservation_residual = 0.0;
  std::string strategy;
  std::uint64_t photon_count = 0;
  std::uint64_t seed = 0;
  std::string mode;
  std::string boundary;
};

std::string report_to_json(const RunReport& report);

struct RunResult {
  FluenceMap map;
  RunReport report;
};

/// End-to-end run: partition across the roster, simulate, merge, audit
/// energy conservation (ValidationError when the residual exceeds 1e-6).
RunResult run_pipeline(const RunSetup& setup, int threads_per_device);

/// Calibration cache sidecar: {"<device>@<scene-hash>": {a, t0}}.
std::optional<Calibration> cache_lookup(const std::filesystem::path& cache,
                                        const std::string& device_name, std::uint64_t scene_key);
void cache_store(const std::filesystem::path& cache, const std::string& device_name,
                 std::uint64_t scene_key, const Calibration& cal);

}  // namespace voxmc
