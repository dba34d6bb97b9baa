// voxmc: parallel 3-D voxel Monte Carlo photon transport with
// heterogeneous-device scheduling.
//
// Subcommands:
//   run              full simulation -> raw float32 volume + report JSON
//   calibrate        pilot runs -> cached runtime-model coefficients (a, t0)
//   partition        print S1/S2/S3 photon counts and model makespans
//   benchmark        run B1/B2/B2a at a photon count, print a speed table
//   simulate-devices device-model-only scheduling study (no physics)

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "voxmc/config.hpp"
#include "voxmc/oracles.hpp"
#include "voxmc/scheduler.hpp"
#include "voxmc/volume_io.hpp"

namespace {

using namespace voxmc;

struct CommonFlags {
  std::string config_path;
  std::string benchmark;
  std::string devices_path;
  std::string strategy = "s1";
  std::string mode;
  std::string output;
  std::string report;
  std::int64_t photons = -1;
  std::int64_t seed = -1;
  int threads = 0;
};

RunSetup build_setup(const CommonFlags& f) {
  RunSetup setup = [&] {
    if (!f.config_path.empty()) return parse_config(f.config_path);
    if (!f.benchmark.empty()) {
      const auto b = benchmark_from_name(f.benchmark);
      if (!b) throw ValidationError("unknown benchmark '" + f.benchmark + "'");
      BenchmarkSetup preset = benchmark_preset(*b);
      return RunSetup{Scene{std::move(preset.grid), preset.source}, preset.config, {},
                      Strategy::S1, "", ""};
    }
    throw ValidationError("need --config or --benchmark");
  }();
  if (f.photons >= 0) {
    if (f.photons < 1) throw ValidationError("--photons must be >= 1");
    setup.config.photon_count = static_cast<std::uint64_t>(f.photons);
  }
  if (f.seed >= 0) setup.config.master_seed = static_cast<std::uint64_t>(f.seed);
  if (!f.mode.empty()) {
    if (f.mode == "atomic") {
      setup.config.accumulation_mode = AccumulationMode::SharedAtomic;
    } else if (f.mode == "merge") {
      setup.config.accumulation_mode = AccumulationMode::PrivateMerge;
    } else {
      throw ValidationError("--mode must be 'atomic' or 'merge'");
    }
  }
  if (!f.devices_path.empty()) setup.devices = load_roster(f.devices_path);
  if (const auto s = strategy_from_name(f.strategy)) {
    setup.strategy = *s;
  } else {
    throw ValidationError("--strategy must be one of s1, s2, s3");
  }
  if (!f.output.empty()) setup.output_path = f.output;
  if (!f.report.empty()) setup.report_path = f.report;
  setup.config.validate();
  return setup;
}

int cmd_run(const CommonFlags& f) {
  RunSetup setup = build_setup(f);
  RunResult result = run_pipeline(setup, f.threads);
  if (!setup.output_path.empty()) {
    write_volume(result.map, setup.scene.grid.voxel_size(), setup.config.master_seed,
                 setup.output_path);
  }
  const std::string report = report_to_json(result.report);
  if (!setup.report_path.empty()) {
    std::ofstream out(setup.report_path, std::ios::trunc);
    if (!out) throw IoError("cannot write report " + setup.report_path);
    out << report << "\n";
  }
  std::cout << report << "\n";
  return 0;
}

int cmd_calibrate(const CommonFlags& f, std::uint64_t n1, std::uint64_t n2,
                  const std::string& cache_path) {
  RunSetup setup = build_setup(f);
  if (setup.devices.empty()) setup.devices.push_back(host_device(f.threads));
  const std::uint64_t key = scene_hash(setup.scene, setup.config);
  for (const DeviceProfile& dev : setup.devices) {
    Calibration cal;
    if (const auto cached = cache_lookup(cache_path, dev.name, key)) {
      cal = *cached;
      std::printf("%-16s a=%.6e ms/photon  t0=%.3f ms  (cached)\n", dev.name.c_str(), cal.a,
                  cal.t0);
    } else {
      cal = calibrate(dev, n1, n2, setup.scene, setup.config, f.threads);
      cache_store(cache_path, dev.name, key, cal);
      std::printf("%-16s a=%.6e ms/photon  t0=%.3f ms\n", dev.name.c_str(), cal.a, cal.t0);
    }
  }
  return 0;
}

int cmd_partition(const CommonFlags& f) {
  if (f.devices_path.empty()) throw ValidationError("partition: need --devices roster");
  const std::vector<DeviceProfile> devices = load_roster(f.devices_path);
  const std::uint64_t total = f.photons >= 1 ? static_cast<std::uint64_t>(f.photons)
                                             : std::uint64_t{100'000'000};
  for (const Strategy s : {Strategy::S1, Strategy::S2, Strategy::S3}) {
    Partition p;
    try {
      p = make_partition(total, devices, s);
    } catch (const ValidationError& e) {
      std::printf("%s: unavailable (%s)\n", std::string(strategy_name(s)).c_str(), e.what());
      continue;
    }
    std::printf("%s: makespan %.3f ms, counts [", std::string(strategy_name(s)).c_str(),
                model_makespan(p, devices));
    for (std::size_t i = 0; i < p.counts.size(); ++i) {
      std::printf("%s%llu", i ? ", " : "", static_cast<unsigned long long>(p.counts[i]));
    }
    std::printf("]\n");
  }
  return 0;
}

int cmd_benchmark(const CommonFlags& f) {
  const std::uint64_t photons =
      f.photons >= 1 ? static_cast<std::uint64_t>(f.photons) : std::uint64_t{1'000'000};
  std::printf("%-5s %12s %12s %14s\n", "name", "photons", "time (ms)", "photons/ms");
  for (const Benchmark b : {Benchmark::B1, Benchmark::B2, Benchmark::B2a}) {
    BenchmarkSetup preset = benchmark_preset(b);
    preset.config.photon_count = photons;
    if (f.seed >= 0) preset.config.master_seed = static_cast<std::uint64_t>(f.seed);
    RunSetup setup{Scene{std::move(preset.grid), preset.source}, preset.config, {}, Strategy::S1,
                   "", ""};
    const auto t0 = std::chrono::steady_clock::now();
    RunResult result = run_pipeline(setup, f.threads);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%-5s %12llu %12.1f %14.1f\n", std::string(benchmark_name(b)).c_str(),
                static_cast<unsigned long long>(photons), ms, static_cast<double>(photons) / ms);
    (void)result;
  }
  return 0;
}

int cmd_simulate_devices(const CommonFlags& f, int max_copies) {
  if (f.devices_path.empty()) throw ValidationError("simulate-devices: need --devices roster");
  const std::vector<DeviceProfile> devices = load_roster(f.devices_path);
  const std::uint64_t total = f.photons >= 1 ? static_cast<std::uint64_t>(f.photons)
                                             : std::uint64_t{100'000'000};

  std::printf("strategy comparison (%llu photons, %zu devices):\n",
              static_cast<unsigned long long>(total), devices.size());
  double s1_makespan = 0.0;
  for (const Strategy s : {Strategy::S1, Strategy::S2, Strategy::S3}) {
    const Partition p = make_partition(total, devices, s);
    const double m = model_makespan(p, devices);
    if (s == Strategy::S1) s1_makespan = m;
    std::printf("  %s: makespan %.3f ms  (%.1f%% vs S1)\n", std::string(strategy_name(s)).c_str(),
                m, s1_makespan > 0.0 ? 100.0 * (s1_makespan - m) / s1_makespan : 0.0);
  }

  std::printf("scaling with identical copies of '%s':\n", devices[0].name.c_str());
  const double solo = devices[0].a * static_cast<double>(total) + devices[0].t0;
  for (int k = 1; k <= max_copies; ++k) {
    std::vector<DeviceProfile> copies(static_cast<std::size_t>(k), devices[0]);
    const Partition p = partition_s3(total, copies);
    const double m = model_makespan(p, copies);
    std::printf("  %dx: makespan %.3f ms, speedup %.3f (ideal %d)\n", k, m, solo / m, k);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voxel Monte Carlo photon transport with heterogeneous-device scheduling"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::uint64_t n1 = 1'000'000;
  std::uint64_t n2 = 5'000'000;
  std::string cache_path = "calibration.json";
  int max_copies = 8;

  const auto add_common = [&flags](CLI::App* cmd, bool with_outputs) {
    cmd->add_option("--config", flags.config_path, "JSON run configuration");
    cmd->add_option("--benchmark", flags.benchmark, "benchmark preset (B1, B2, B2a)");
    cmd->add_option("--photons", flags.photons, "photon count override");
    cmd->add_option("--seed", flags.seed, "master RNG seed");
    cmd->add_option("--threads", flags.threads, "worker threads per device (0 = auto)");
    cmd->add_option("--devices", flags.devices_path, "device roster JSON");
    cmd->add_option("--strategy", flags.strategy, "partitioning strategy: s1, s2, s3");
    if (with_outputs) {
      cmd->add_option("--mode", flags.mode, "accumulation mode: atomic, merge");
      cmd->add_option("--output", flags.output, "raw float32 volume output path");
      cmd->add_option("--report", flags.report, "run report JSON path");
    }
  };

  CLI::App* run = app.add_subcommand("run", "run a full simulation");
  add_common(run, true);

  CLI::App* cal = app.add_subcommand("calibrate", "estimate runtime model (a, t0) per device");
  add_common(cal, false);
  cal->add_option("--n1", n1, "first pilot photon count");
  cal->add_option("--n2", n2, "second pilot photon count");
  cal->add_option("--cache", cache_path, "calibration cache path");

  CLI::App* part = app.add_subcommand("partition", "print partition counts without simulating");
  add_common(part, false);

  CLI::App* bench = app.add_subcommand("benchmark", "run B1/B2/B2a and print a speed table");
  add_common(bench, false);

  CLI::App* simdev = app.add_subcommand("simulate-devices", "device-model scheduling study");
  add_common(simdev, false);
  simdev->add_option("--max-copies", max_copies, "scaling study: max identical device count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(flags);
    if (cal->parsed()) return cmd_calibrate(flags, n1, n2, cache_path);
    if (part->parsed()) return cmd_partition(flags);
    if (bench->parsed()) return cmd_benchmark(flags);
    if (simdev->parsed()) return cmd_simulate_devices(flags, max_copies);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
