#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "test_helpers.hpp"
#include "voxmc/config.hpp"
#include "voxmc/volume_io.hpp"

using namespace voxmc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("voxmc_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

}  // namespace

TEST_CASE("volume files are raw float32 with a verified sidecar") {
  TempDir tmp;
  FluenceMap map({60, 60, 60}, 1000);
  map.deposit(VoxelIndex{30, 30, 0}, 0.25);
  map.deposit(VoxelIndex{0, 0, 0}, 0.5);
  const fs::path out = tmp.path / "phi.bin";
  write_volume(map, 1.0, 42, out);

  CHECK(fs::file_size(out) == 60u * 60 * 60 * sizeof(float));  // 864000 bytes
  CHECK(fs::exists(out.string() + ".json"));

  VolumeData vol = read_volume(out);
  CHECK(vol.dims == VoxelIndex{60, 60, 60});
  CHECK(vol.voxel_size_mm == 1.0);
  CHECK(vol.photon_count == 1000);
  CHECK(vol.seed == 42);
  CHECK_FALSE(vol.normalized);
  CHECK(vol.values[0] == doctest::Approx(0.5).epsilon(1e-6));
  const std::size_t cell = 30 + 60 * (30 + 60 * std::size_t{0});
  CHECK(vol.values[cell] == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(vol.checksum == fnv1a64(vol.values.data(), vol.values.size() * sizeof(float)));
}

TEST_CASE("corrupted volume bytes fail the checksum") {
  TempDir tmp;
  FluenceMap map({4, 4, 4}, 10);
  map.deposit(std::size_t{1}, 0.5);
  const fs::path out = tmp.path / "phi.bin";
  write_volume(map, 1.0, 0, out);
  {
    std::fstream f(out, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(8);
    const char junk = 0x7f;
    f.write(&junk, 1);
  }
  CHECK_THROWS_AS(read_volume(out), IoError);
}

TEST_CASE("benchmark preset config with overrides") {
  RunSetup s = parse_config_text(R"({
    "benchmark": "b2",
    "photons": 5000,
    "seed": 7,
    "mode": "atomic",
    "strategy": "s3",
    "tmax_ns": 2.5
  })");
  CHECK(s.scene.grid.dims() == VoxelIndex{60, 60, 60});
  CHECK(s.config.photon_count == 5000);
  CHECK(s.config.master_seed == 7);
  CHECK(s.config.accumulation_mode == AccumulationMode::SharedAtomic);
  CHECK(s.config.boundary_mode == BoundaryMode::ReflectAtMismatch);
  CHECK(s.config.tmax_ns == 2.5);
  CHECK(s.strategy == Strategy::S3);
}

TEST_CASE("photon count defaults to 1e8") {
  RunSetup s = parse_config_text(R"({"benchmark": "b1"})");
  CHECK(s.config.photon_count == 100'000'000);
  CHECK(s.config.accumulation_mode == AccumulationMode::PrivateMerge);
  CHECK(s.config.boundary_mode == BoundaryMode::TerminateAtBoundary);
}

TEST_CASE("explicit scene with a spherical inclusion") {
  RunSetup s = parse_config_text(R"({
    "grid": {"dims": [20, 20, 20], "voxel_size_mm": 1.0},
    "media": [
      {"mua": 0.0, "mus": 0.0, "g": 0.0, "n": 1.0},
      {"mua": 0.01, "mus": 1.0, "g": 0.9, "n": 1.37}
    ],
    "sphere": {"center": [10, 10, 10], "radius": 5.0,
               "medium": {"mua": 0.002, "mus": 5.0, "g": 0.9, "n": 1.0}},
    "source": {"position": [10, 10, 0], "direction": [0, 0, 1]},
    "photons": 100
  })");
  CHECK(s.scene.grid.dims() == VoxelIndex{20, 20, 20});
  CHECK(s.scene.grid.media().size() == 3);
  CHECK(s.scene.grid.label({10, 10, 10}) == 2);
  CHECK(s.scene.grid.label({0, 0, 0}) == 1);
  CHECK(s.scene.source.position.z == 0.0);
}

TEST_CASE("bad configs raise diagnostics") {
  CHECK_THROWS_AS(parse_config_text("{not json"), ParseError);
  CHECK_THROWS_AS(parse_config_text(R"({"benchmark": "b9"})"), ParseError);
  CHECK_THROWS_AS(parse_config_text(R"({"benchmark": "b1", "photons": -5})"), ValidationError);
  CHECK_THROWS_AS(parse_config_text(R"({"benchmark": "b1", "tmax_ns": 0})"), ValidationError);
}

TEST_CASE("device rosters parse with model defaults") {
  auto devs = parse_roster_text(R"([
    {"name": "cpu", "cores": 4, "kind": "real"},
    {"name": "gpu0", "cores": 3584, "kind": "simulated", "a": 5.2e-5, "t0": 53.0,
     "jitter_sigma": 0.01}
  ])");
  REQUIRE(devs.size() == 2);
  CHECK(devs[0].kind == DeviceKind::RealWorkerPool);
  CHECK(devs[0].cores == 4);
  CHECK(devs[1].kind == DeviceKind::Simulated);
  CHECK(devs[1].a == 5.2e-5);
  CHECK(devs[1].t0 == 53.0);
  CHECK(devs[1].jitter_sigma == 0.01);
  CHECK_THROWS_AS(parse_roster_text(R"([{"name": "x", "cores": 0}])"), ValidationError);
}

TEST_CASE("host device defaults to a real pool") {
  DeviceProfile host = host_device(8);
  CHECK(host.kind == DeviceKind::RealWorkerPool);
  CHECK(host.cores == 8);
}

TEST_CASE("scene hash distinguishes physics-relevant changes") {
  auto grid = testing::homogeneous_grid(10, 1.0, testing::b1_background());
  Scene scene{grid, Source{{5, 5, 0}, {0, 0, 1}, false}};
  SimulationConfig cfg;
  const std::uint64_t base = scene_hash(scene, cfg);
  CHECK(base == scene_hash(scene, cfg));  // deterministic

  SimulationConfig other = cfg;
  other.boundary_mode = BoundaryMode::ReflectAtMismatch;
  CHECK(scene_hash(scene, other) != base);

  Scene moved = scene;
  moved.source.position.x = 6.0;
  CHECK(scene_hash(moved, cfg) != base);

  // Seed and photon count are not physics content per photon index.
  SimulationConfig seeded = cfg;
  seeded.photon_count = 12345;
  CHECK(scene_hash(scene, seeded) == base);
}

TEST_CASE("calibration cache round-trips") {
  TempDir tmp;
  const fs::path cache = tmp.path / "cal.json";
  CHECK_FALSE(cache_lookup(cache, "gpu0", 0xabcd).has_value());
  cache_store(cache, "gpu0", 0xabcd, {0.002, 50.0});
  cache_store(cache, "gpu1", 0xabcd, {0.004, 75.0});
  auto hit = cache_lookup(cache, "gpu0", 0xabcd);
  REQUIRE(hit.has_value());
  CHECK(hit->a == doctest::Approx(0.002));
  CHECK(hit->t0 == doctest::Approx(50.0));
  CHECK_FALSE(cache_lookup(cache, "gpu0", 0xabce).has_value());
}

TEST_CASE("pipeline produces a coherent report") {
  auto grid = testing::homogeneous_grid(20, 1.0, testing::b1_background());
  RunSetup setup{Scene{grid, Source{{10, 10, 0}, {0, 0, 1}, false}}, {}, {}, Strategy::S1, "", ""};
  setup.config.photon_count = 2000;
  setup.config.master_seed = 5;
  setup.strategy = Strategy::S1;
  RunResult r = run_pipeline(setup, 2);
  CHECK(r.report.photon_count == 2000);
  CHECK(std::fabs(r.report.conservation_residual) < 1e-6);
  CHECK(r.report.makespan_ms > 0.0);
  CHECK(r.map.total_deposited() > 0.0);

  const std::string json = report_to_json(r.report);
  CHECK(json.find("\"makespan_ms\"") != std::string::npos);
  CHECK(json.find("\"conservation_residual\"") != std::string::npos);
}
