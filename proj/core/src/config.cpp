#include "voxmc/config.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include "json.hpp"

#include "voxmc/volume_io.hpp"

namespace voxmc {

using nlohmann::json;

namespace {

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

Vec3 parse_vec3(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError(std::string(field) + ": expected an array of 3 numbers");
  }
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

DeviceProfile parse_device(const json& j) {
  DeviceProfile d;
  d.name = j.at("name").get<std::string>();
  d.cores = j.value("cores", 1);
  if (d.cores < 1) throw ValidationError("device " + d.name + ": cores must be >= 1");
  const std::string kind = j.value("kind", "simulated");
  if (kind == "simulated") {
    d.kind = DeviceKind::Simulated;
  } else if (kind == "real" || kind == "worker-pool") {
    d.kind = DeviceKind::RealWorkerPool;
  } else {
    throw ParseError("device " + d.name + ": unknown kind '" + kind + "'");
  }
  d.a = j.value("a", 0.0);
  d.t0 = j.value("t0", 0.0);
  d.jitter_sigma = j.value("jitter_sigma", 0.0);
  if (d.kind == DeviceKind::Simulated && !(d.a > 0.0)) {
    throw ValidationError("device " + d.name + ": simulated devices need a > 0");
  }
  if (d.t0 < 0.0) throw ValidationError("device " + d.name + ": t0 must be >= 0");
  return d;
}

VoxelGrid parse_grid(const json& root) {
  const json& jg = root.at("grid");
  const json& jm = root.at("media");
  if (!jm.is_array() || jm.size() < 2) {
    throw ParseError("media: expected an array with the exterior medium plus at least one more");
  }
  std::vector<OpticalProperties> media;
  for (const json& m : jm) {
    media.push_back({m.at("mua").get<double>(), m.at("mus").get<double>(),
                     m.at("g").get<double>(), m.at("n").get<double>()});
  }
  const json& jd = jg.at("dims");
  const VoxelIndex dims{jd.at(0).get<int>(), jd.at(1).get<int>(), jd.at(2).get<int>()};
  const double h = jg.contains("voxel_size_mm") ? jg.at("voxel_size_mm").get<double>()
                                                : jg.value("voxel_size", 1.0);
  if (dims.x < 1 || dims.y < 1 || dims.z < 1 || !(h > 0.0)) {
    throw ValidationError("grid: dims must be >= 1 and voxel_size > 0");
  }
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(dims.x) * dims.y * dims.z, 1);
  if (root.contains("sphere")) {
    const json& js = root.at("sphere");
    const Vec3 center = parse_vec3(js.at("center"), "sphere.center");
    const double radius = js.at("radius").get<double>();
    std::uint8_t lbl;
    if (js.contains("medium")) {
      const json& m = js.at("medium");
      media.push_back({m.at("mua").get<double>(), m.at("mus").get<double>(),
                       m.at("g").get<double>(), m.at("n").get<double>()});
      lbl = static_cast<std::uint8_t>(media.size() - 1);
    } else {
      lbl = static_cast<std::uint8_t>(js.value("label", media.size() - 1));
    }
    std::size_t i = 0;
    for (int z = 0; z < dims.z; ++z) {
      for (int y = 0; y < dims.y; ++y) {
        for (int x = 0; x < dims.x; ++x, ++i) {
          const Vec3 c{(x + 0.5) * h, (y + 0.5) * h, (z + 0.5) * h};
          const Vec3 dv = c - center;
          if (dv.dot(dv) <= radius * radius) labels[i] = lbl;
        }
      }
    }
  }
  return VoxelGrid(dims, h, std::move(labels), std::move(media));
}

Source parse_source(const json& js) {
  Source s;
  s.position = parse_vec3(js.at("position"), "source.position");
  if (js.contains("direction")) {
    s.direction = parse_vec3(js.at("direction"), "source.direction").normalized();
  }
  s.isotropic = js.value("isotropic", false);
  return s;
}

}  // namespace

DeviceProfile host_device(int threads) {
  DeviceProfile d;
  d.name = "host";
  d.cores = threads > 0 ? threads
                        : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  d.kind = DeviceKind::RealWorkerPool;
  return d;
}

std::vector<DeviceProfile> parse_roster_text(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("roster: ") + e.what());
  }
  if (!j.is_array() || j.empty()) throw ParseError("roster: expected a non-empty array");
  std::vector<DeviceProfile> devices;
  for (const json& jd : j) devices.push_back(parse_device(jd));
  return devices;
}

std::vector<DeviceProfile> load_roster(const std::filesystem::path& path) {
  const json j = load_json(path);
  if (!j.is_array() || j.empty()) throw ParseError(path.string() + ": expected a non-empty array");
  std::vector<DeviceProfile> devices;
  for (const json& jd : j) devices.push_back(parse_device(jd));
  return devices;
}

namespace {

RunSetup parse_config_json(const json& root) {
  std::optional<BenchmarkSetup> preset;
  if (root.contains("benchmark")) {
    const std::string name = root.at("benchmark").get<std::string>();
    const auto b = benchmark_from_name(name);
    if (!b) throw ParseError("unknown benchmark '" + name + "'");
    preset = benchmark_preset(*b);
  }

  std::optional<VoxelGrid> grid;
  std::optional<Source> source;
  if (root.contains("grid")) grid = parse_grid(root);
  if (root.contains("source")) source = parse_source(root.at("source"));
  if (!preset && (!grid || !source)) {
    throw ParseError("config: need either \"benchmark\" or explicit \"grid\"+\"media\"+\"source\"");
  }

  SimulationConfig config = preset ? preset->config : SimulationConfig{};
  if (root.contains("photons")) {
    const auto p = root.at("photons").get<std::int64_t>();
    if (p < 1) throw ValidationError("photons must be >= 1");
    config.photon_count = static_cast<std::uint64_t>(p);
  }
  config.master_seed = root.value("seed", config.master_seed);
  if (root.contains("mode")) {
    const std::string mode = root.at("mode").get<std::string>();
    if (mode == "atomic") {
      config.accumulation_mode = AccumulationMode::SharedAtomic;
    } else if (mode == "merge") {
      config.accumulation_mode = AccumulationMode::PrivateMerge;
    } else {
      throw ValidationError("mode must be 'atomic' or 'merge'");
    }
  }
  if (root.contains("boundary")) {
    const std::string b = root.at("boundary").get<std::string>();
    if (b == "terminate") {
      config.boundary_mode = BoundaryMode::TerminateAtBoundary;
    } else if (b == "reflect") {
      config.boundary_mode = BoundaryMode::ReflectAtMismatch;
    } else {
      throw ValidationError("boundary must be 'terminate' or 'reflect'");
    }
  }
  config.tmax_ns = root.value("tmax_ns", config.tmax_ns);
  config.roulette_threshold = root.value("roulette_threshold", config.roulette_threshold);
  config.roulette_multiplier = root.value("roulette_multiplier", config.roulette_multiplier);
  config.workgroup_size = root.value("workgroup_size", config.workgroup_size);
  config.validate();

  RunSetup setup{
      Scene{grid ? std::move(*grid) : std::move(preset->grid),
            source ? *source : preset->source},
      config,
      {},
      Strategy::S1,
      root.value("output", ""),
      root.value("report", ""),
  };

  if (root.contains("devices")) {
    const json& jd = root.at("devices");
    if (jd.is_string()) {
      setup.devices = load_roster(jd.get<std::string>());
    } else if (jd.is_array()) {
      for (const json& d : jd) setup.devices.push_back(parse_device(d));
    } else {
      throw ParseError("devices: expected roster path or inline array");
    }
  }
  if (root.contains("strategy")) {
    const std::string s = root.at("strategy").get<std::string>();
    const auto strat = strategy_from_name(s);
    if (!strat) throw ValidationError("strategy must be one of s1, s2, s3");
    setup.strategy = *strat;
  }
  return setup;
}

}  // namespace

RunSetup parse_config(const std::filesystem::path& path) {
  try {
    return parse_config_json(load_json(path));
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

RunSetup parse_config_text(const std::string& json_text) {
  try {
    return parse_config_json(json::parse(json_text));
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

std::uint64_t scene_hash(const Scene& scene, const SimulationConfig& config) {
  std::vector<std::byte> buf;
  const auto put = [&buf](const void* p, std::size_t n) {
    const auto* b = static_cast<const std::byte*>(p);
    buf.insert(buf.end(), b, b + n);
  };
  const VoxelGrid& g = scene.grid;
  const VoxelIndex dims = g.dims();
  const double h = g.voxel_size();
  put(&dims, sizeof(dims));
  put(&h, sizeof(h));
  put(g.labels().data(), g.labels().size());
  put(g.media().data(), g.media().size() * sizeof(OpticalProperties));
  put(&scene.source.position, sizeof(Vec3));
  put(&scene.source.direction, sizeof(Vec3));
  const std::uint8_t iso = scene.source.isotropic ? 1 : 0;
  put(&iso, 1);
  put(&config.boundary_mode, sizeof(config.boundary_mode));
  put(&config.tmax_ns, sizeof(config.tmax_ns));
  return fnv1a64(buf.data(), buf.size());
}

std::string report_to_json(const RunReport& report) {
  json j;
  j["devices"] = json::array();
  for (const DeviceReport& d : report.devices) {
    j["devices"].push_back({{"name", d.name}, {"photons", d.photons}, {"wall_ms", d.wall_ms}});
  }
  j["makespan_ms"] = report.makespan_ms;
  j["throughput_photons_per_ms"] = report.throughput_photons_per_ms;
  j["conservation_residual"] = report.conservation_residual;
  j["strategy"] = report.strategy;
  j["photon_count"] = report.photon_count;
  j["seed"] = report.seed;
  j["mode"] = report.mode;
  j["boundary"] = report.boundary;
  return j.dump(2);
}

RunResult run_pipeline(const RunSetup& setup, int threads_per_device) {
  setup.config.validate();
  std::vector<DeviceProfile> devices = setup.devices;
  if (devices.empty()) devices.push_back(host_device(threads_per_device));

  MultiDeviceResult res = run_multi_device(setup.config.photon_count, devices, setup.strategy,
                                           setup.scene, setup.config, threads_per_device);

  const double n = static_cast<double>(setup.config.photon_count);
  const PhotonDisposition& t = res.totals;
  const double residual = (t.deposited + t.escaped + t.killed + t.truncated - n) / n;

  RunReport report;
  for (const DeviceRunResult& d : res.devices) {
    report.devices.push_back({d.name, d.photons, d.wall_ms});
  }
  report.makespan_ms = res.makespan_ms;
  report.throughput_photons_per_ms = res.makespan_ms > 0.0 ? n / res.makespan_ms : 0.0;
  report.conservation_residual = residual;
  report.strategy = std::string(strategy_name(setup.strategy));
  report.photon_count = setup.config.photon_count;
  report.seed = setup.config.master_seed;
  report.mode =
      setup.config.accumulation_mode == AccumulationMode::SharedAtomic ? "atomic" : "merge";
  report.boundary = setup.config.boundary_mode == BoundaryMode::TerminateAtBoundary
                        ? "terminate"
                        : "reflect";

  if (std::fabs(residual) > 1e-6) {
    throw ValidationError("energy conservation violated: relative residual " +
                          std::to_string(residual));
  }
  return RunResult{std::move(res.map), std::move(report)};
}

namespace {

std::string cache_key(const std::string& device_name, std::uint64_t scene_key) {
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(scene_key));
  return device_name + "@" + hex;
}

}  // namespace

std::optional<Calibration> cache_lookup(const std::filesystem::path& cache,
                                        const std::string& device_name, std::uint64_t scene_key) {
  std::ifstream in(cache);
  if (!in) return std::nullopt;
  json j;
  try {
    in >> j;
  } catch (const json::parse_error&) {
    return std::nullopt;
  }
  const auto it = j.find(cache_key(device_name, scene_key));
  if (it == j.end()) return std::nullopt;
  return Calibration{it->at("a").get<double>(), it->at("t0").get<double>()};
}

void cache_store(const std::filesystem::path& cache, const std::string& device_name,
                 std::uint64_t scene_key, const Calibration& cal) {
  json j = json::object();
  {
    std::ifstream in(cache);
    if (in) {
      try {
        in >> j;
      } catch (const json::parse_error&) {
        j = json::object();
      }
    }
  }
  j[cache_key(device_name, scene_key)] = {{"a", cal.a}, {"t0", cal.t0}};
  std::ofstream out(cache, std::ios::trunc);
  if (!out) throw IoError("cannot write calibration cache " + cache.string());
  out << j.dump(2) << "\n";
}

}  // namespace voxmc
