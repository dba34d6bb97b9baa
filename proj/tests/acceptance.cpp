// Acceptance gate: one line per criterion, PASS/FAIL with measured numbers.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "test_helpers.hpp"
#include "voxmc/config.hpp"
#include "voxmc/oracles.hpp"
#include "voxmc/scheduler.hpp"
#include "voxmc/transport.hpp"
#include "voxmc/volume_io.hpp"

using namespace voxmc;

namespace {

int g_failures = 0;

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

void report(int index, bool pass, const std::string& name, const std::string& detail) {
  std::printf("[%2d] %s  %s — %s\n", index, pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

int pool_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

DeviceProfile simulated(const std::string& name, int cores, double a, double t0) {
  DeviceProfile d;
  d.name = name;
  d.cores = cores;
  d.a = a;
  d.t0 = t0;
  d.kind = DeviceKind::Simulated;
  return d;
}

// --- 1. Energy conservation, B1/B2, 10 seeds, < 30 s -----------------------

void criterion_1() {
  const double t_begin = now_s();
  const int threads = pool_threads();
  double worst = 0.0;
  int runs = 0;
  for (Benchmark b : {Benchmark::B1, Benchmark::B2}) {
    auto setup = benchmark_preset(b);
    Scene scene{setup.grid, setup.source};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      SimulationConfig cfg = setup.config;
      cfg.photon_count = 100'000;
      cfg.master_seed = seed;
      auto run = run_group_dynamic(0, cfg.photon_count, threads, scene, cfg);
      const double books = run.totals.deposited + run.totals.escaped + run.totals.killed +
                           run.totals.truncated;
      worst = std::max(worst, std::fabs(books / static_cast<double>(cfg.photon_count) - 1.0));
      ++runs;
    }
  }
  const double elapsed = now_s() - t_begin;
  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "%d runs, worst relative residual %.3e (gate 1e-6), runtime %.1f s (gate 30 s, "
                "%d worker thread(s))",
                runs, worst, elapsed, threads);
  report(1, worst < 1e-6 && elapsed < 30.0, "energy conservation (B1/B2, 10 seeds)", detail);
}

// --- 2. Diffusion agreement, isotropic source in 100^3 ---------------------

void criterion_2() {
  const std::uint64_t photons = 10'000'000;
  VoxelGrid grid = testing::homogeneous_grid(100, 1.0, testing::b1_background());
  Source src;
  src.position = {50.0, 50.0, 50.0};
  src.isotropic = true;
  Scene scene{grid, src};
  SimulationConfig cfg;
  cfg.photon_count = photons;
  cfg.master_seed = 20260826;

  auto run = run_group_dynamic(0, photons, pool_threads(), scene, cfg);
  run.map.normalize(grid);

  const auto params = oracles::DiffusionParams::from(0.005, 1.0 * (1.0 - 0.01));
  std::vector<double> mc_sum(16, 0.0), oracle_sum(16, 0.0);
  std::vector<long> count(16, 0);
  for (int z = 0; z < 100; ++z) {
    for (int y = 0; y < 100; ++y) {
      for (int x = 0; x < 100; ++x) {
        const Vec3 c{x + 0.5, y + 0.5, z + 0.5};
        const Vec3 d = c - src.position;
        const double r = d.norm();
        const long bin = std::lround(r);
        if (bin < 5 || bin > 15) continue;
        mc_sum[bin] += run.map.value(grid.linear({x, y, z}));
        oracle_sum[bin] += oracles::diffusion_infinite_cw(r, params);
        ++count[bin];
      }
    }
  }
  double worst = 0.0;
  int worst_bin = 0;
  for (int bin = 5; bin <= 15; ++bin) {
    const double ratio = mc_sum[bin] / oracle_sum[bin];
    if (std::fabs(ratio - 1.0) > worst) {
      worst = std::fabs(ratio - 1.0);
      worst_bin = bin;
    }
  }
  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "1e7 photons, radial shells r=5..15 mm vs exp(-mueff r)/(4 pi D r): worst "
                "deviation %.1f%% at r=%d mm (gate 15%%)",
                worst * 100.0, worst_bin);
  report(2, worst < 0.15, "diffusion agreement (isotropic point source)", detail);
}

// --- 3. SharedAtomic vs PrivateMerge ----------------------------------------

void criterion_3() {
  auto setup = benchmark_preset(Benchmark::B2a);
  Scene scene{setup.grid, setup.source};
  const std::uint64_t photons = 1'000'000;

  SimulationConfig merged_cfg = setup.config;
  merged_cfg.photon_count = photons;
  merged_cfg.accumulation_mode = AccumulationMode::PrivateMerge;
  // Single-owner pass that also tracks per-voxel deposit counts.
  FluenceMap merged(setup.grid.dims(), photons, AccumulationMode::PrivateMerge, true);
  for (std::uint64_t i = 0; i < photons; ++i) simulate_photon(i, scene, merged_cfg, merged);

  SimulationConfig atomic_cfg = merged_cfg;
  atomic_cfg.accumulation_mode = AccumulationMode::SharedAtomic;
  auto atomic_run = run_group_dynamic(0, photons, std::max(4, pool_threads()), scene, atomic_cfg);

  double worst = 0.0;
  long checked = 0;
  for (std::size_t c = 0; c < merged.voxel_count(); ++c) {
    if (merged.deposit_count(c) < 100) continue;
    ++checked;
    const double a = merged.value(c);
    const double b = atomic_run.map.value(c);
    worst = std::max(worst, std::fabs(a - b) / std::max(std::fabs(a), 1e-300));
  }
  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "1e6 photons, %ld voxels with >=100 deposits, worst relative difference %.3e "
                "(gate 1e-5)",
                checked, worst);
  report(3, checked > 0 && worst < 1e-5, "accumulation-mode equivalence (B2a)", detail);
}

// --- 4. Henyey-Greenstein sampling ------------------------------------------

void criterion_4() {
  bool pass = true;
  std::string detail;
  const Vec3 axis{0.0, 0.0, 1.0};
  for (double g : {0.0, 0.01, 0.9}) {
    RngStream stream(13, static_cast<std::uint64_t>(g * 1000));
    const int n = 1'000'000;
    std::vector<double> mu(n);
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      mu[i] = hg_scatter(axis, g, stream).dot(axis);
      sum += mu[i];
      sq += mu[i] * mu[i];
    }
    const double mean = sum / n;
    const double sd = std::sqrt(std::max(0.0, sq / n - mean * mean));
    const double se = sd / std::sqrt(static_cast<double>(n));
    const bool mean_ok = std::fabs(mean - g) <= 3.0 * se;
    pass = pass && mean_ok;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "g=%.2f: mean %.5f (%.1f se) ", g, mean,
                  std::fabs(mean - g) / se);
    detail += buf;
    if (g == 0.9) {
      std::nth_element(mu.begin(), mu.begin() + n / 2, mu.end());
      const double median = mu[n / 2];
      const double inverted = hg_cos_theta(0.9, 0.5);
      const bool med_ok = std::fabs(median - inverted) < 1e-4 &&
                          std::fabs(inverted - 0.98550) < 1e-4;
      pass = pass && med_ok;
      std::snprintf(buf, sizeof(buf), "median %.5f vs inversion %.5f (gate 1e-4)", median,
                    inverted);
      detail += buf;
    }
  }
  report(4, pass, "Henyey-Greenstein sampling", detail);
}

// --- 5. Fresnel / TIR --------------------------------------------------------

void criterion_5() {
  const double r0 = fresnel_reflectance(1.37, 1.0, 1.0);
  const double expect = (0.37 / 2.37) * (0.37 / 2.37);
  const bool normal_ok = std::fabs(r0 - expect) < 1e-9;

  const double theta_c = std::asin(1.0 / 1.37);
  bool tir_ok = true;
  for (int i = 1; i <= 1000; ++i) {
    const double theta = theta_c + (3.14159265358979323846 / 2.0 - theta_c) * i / 1000.0;
    if (fresnel_reflectance(1.37, 1.0, std::cos(theta)) != 1.0) tir_ok = false;
  }
  char detail[192];
  std::snprintf(detail, sizeof(detail),
                "R(0 deg)=%.9f vs ((0.37)/(2.37))^2=%.9f; TIR holds on 1000 angles past "
                "asin(1/1.37)=%.2f deg",
                r0, expect, theta_c * 180.0 / 3.14159265358979323846);
  report(5, normal_ok && tir_ok, "Fresnel normal incidence and TIR", detail);
}

// --- 6. S3 vs brute force ----------------------------------------------------

void criterion_6() {
  const double t_begin = now_s();
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> ua(0.1, 10.0), ut0(0.0, 1000.0);
  std::uniform_int_distribution<std::uint64_t> utotal(10, 2000);
  std::uniform_int_distribution<int> ukdev(2, 4);
  int mismatches = 0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<DeviceProfile> devs;
    const int k = ukdev(rng);
    for (int i = 0; i < k; ++i) devs.push_back(simulated("d", 1, ua(rng), ut0(rng)));
    const std::uint64_t total = utotal(rng);
    const auto brute = oracles::brute_force_partition(total, devs);
    const double s3 = model_makespan(partition_s3(total, devs), devs);
    if (std::fabs(s3 - brute.makespan) > 1e-9 * std::max(1.0, brute.makespan)) ++mismatches;
  }
  const double elapsed = now_s() - t_begin;
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "500 random instances (2-4 devices, total 10..2000): %d makespan mismatches, "
                "runtime %.1f s (gate 60 s)",
                mismatches, elapsed);
  report(6, mismatches == 0 && elapsed < 60.0, "S3 optimality vs exhaustive search", detail);
}

// --- 7. Strategy ordering on the measured-overhead instance ------------------

void criterion_7() {
  // Overheads as measured per device in the reference experiment (53, 63,
  // 631, 652 ms); slopes chosen so solo throughputs reproduce the devices'
  // relative speeds; cores are the physical compute-unit x wavefront sizes.
  const std::vector<DeviceProfile> devs{
      simulated("gpu0", 3584, 5.247e-5, 53.0),
      simulated("gpu1", 2816, 7.812e-5, 63.0),
      simulated("gpu2", 4096, 4.627e-5, 631.0),
      simulated("gpu3", 2304, 5.275e-5, 652.0),
  };
  const std::uint64_t total = 300'000'000;
  const double m1 = model_makespan(partition_s1(total, devs), devs);
  const double m2 = model_makespan(partition_s2(total, devs), devs);
  const double m3 = model_makespan(partition_s3(total, devs), devs);
  const double gain2 = 1.0 - m2 / m1;
  const double gain3 = 1.0 - m3 / m1;
  char detail[192];
  std::snprintf(detail, sizeof(detail),
                "makespans S1=%.0f S2=%.0f S3=%.0f ms; S2 %.1f%%, S3 %.1f%% faster than S1 "
                "(gate >= 5%% each, S3 <= S2)",
                m1, m2, m3, gain2 * 100.0, gain3 * 100.0);
  report(7, gain2 >= 0.05 && gain3 >= 0.05 && m3 <= m2 + 1e-9, "strategy ordering S3 < S2 < S1",
         detail);
}

// --- 8. Near-linear scaling over identical devices ---------------------------

void criterion_8() {
  VoxelGrid grid = testing::homogeneous_grid(20, 1.0, testing::b1_background());
  Scene scene{grid, Source{{10.0, 10.0, 0.0}, {0.0, 0.0, 1.0}, false}};
  SimulationConfig cfg;
  cfg.master_seed = 88;
  const std::uint64_t photons = 1'000'000;
  const double a = 1e-4;  // ms/photon

  bool linear_ok = true;
  double solo_ms = 0.0;
  std::string detail = "t0=0 speedups:";
  for (int k = 1; k <= 8; ++k) {
    std::vector<DeviceProfile> devs;
    for (int i = 0; i < k; ++i) devs.push_back(simulated("sim" + std::to_string(i), 1, a, 0.0));
    auto run = run_multi_device(photons, devs, Strategy::S3, scene, cfg, 1);
    if (k == 1) solo_ms = run.makespan_ms;
    const double speedup = solo_ms / run.makespan_ms;
    if (speedup < 0.95 * k) linear_ok = false;
    if (k == 2 || k == 4 || k == 8) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), " k=%d:%.2f", k, speedup);
      detail += buf;
    }
  }

  // With t0 = 1% of the solo runtime the k=8 speedup must degrade exactly as
  // the runtime model predicts.
  const double t0 = 0.01 * a * static_cast<double>(photons);
  std::vector<DeviceProfile> devs;
  for (int i = 0; i < 8; ++i) devs.push_back(simulated("sim" + std::to_string(i), 1, a, t0));
  auto run8 = run_multi_device(photons, devs, Strategy::S3, scene, cfg, 1);
  const double solo_t0 = a * static_cast<double>(photons) + t0;
  const double measured = solo_t0 / run8.makespan_ms;
  const double predicted = solo_t0 / (a * static_cast<double>(photons) / 8.0 + t0);
  const bool degrade_ok = std::fabs(measured / predicted - 1.0) < 0.02;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "; t0=1%%: k=8 speedup %.3f vs model %.3f (gate 2%%)", measured,
                predicted);
  detail += buf;
  report(8, linear_ok && degrade_ok, "near-linear multi-device scaling", detail);
}

// --- 9. Dynamic vs static workgroup balancing --------------------------------

void criterion_9() {
  // Cost replay: heavy-tailed per-photon costs, 64 threads, 100 trials.
  std::mt19937_64 rng(909);
  std::lognormal_distribution<double> cost(0.0, 1.0);
  int wins = 0;
  std::vector<double> improvements;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> costs(16384);
    for (auto& c : costs) c = cost(rng);
    const double dyn = dynamic_makespan(costs, 64);
    const double sta = static_split_makespan(costs, 64);
    if (dyn <= sta) ++wins;
    improvements.push_back(1.0 - dyn / sta);
  }
  std::sort(improvements.begin(), improvements.end());
  const double median = improvements[improvements.size() / 2];

  // The two schedulers must also produce bit-identical physics.
  VoxelGrid grid = testing::homogeneous_grid(20, 1.0, testing::b1_background());
  Scene scene{grid, Source{{10.0, 10.0, 0.0}, {0.0, 0.0, 1.0}, false}};
  SimulationConfig cfg;
  cfg.master_seed = 99;
  cfg.photon_count = 100'000;
  auto dyn_run = run_group_dynamic(0, cfg.photon_count, 64, scene, cfg);
  auto sta_run = run_static_split(0, cfg.photon_count, 64, scene, cfg);
  bool identical = true;
  for (std::size_t c = 0; c < dyn_run.map.voxel_count(); ++c) {
    if (dyn_run.map.raw_cell(c) != sta_run.map.raw_cell(c)) identical = false;
  }
  char detail[192];
  std::snprintf(detail, sizeof(detail),
                "replay: dynamic <= static on %d/100 trials, median improvement %.1f%% (gate "
                "> 5%%); 64-thread fluence bit-identical: %s",
                wins, median * 100.0, identical ? "yes" : "NO");
  report(9, wins == 100 && median > 0.05 && identical, "dynamic vs static balancing", detail);
}

// --- 10. Reproducibility across threads and strategies -----------------------

void criterion_10() {
  auto setup = benchmark_preset(Benchmark::B1);
  Scene scene{setup.grid, setup.source};
  SimulationConfig cfg = setup.config;
  cfg.photon_count = 100'000;
  cfg.master_seed = 1;
  cfg.accumulation_mode = AccumulationMode::PrivateMerge;
  const std::vector<DeviceProfile> devs{simulated("sim0", 2, 1e-4, 5.0),
                                        simulated("sim1", 1, 3e-4, 20.0)};

  std::vector<std::uint64_t> checksums;
  for (Strategy s : {Strategy::S1, Strategy::S2, Strategy::S3}) {
    for (int threads : {1, 4, 8}) {
      auto run = run_multi_device(cfg.photon_count, devs, s, scene, cfg, threads);
      const auto vol = run.map.to_float_volume();
      checksums.push_back(fnv1a64(vol.data(), vol.size() * sizeof(float)));
    }
  }
  const bool same =
      std::all_of(checksums.begin(), checksums.end(), [&](std::uint64_t c) { return c == checksums[0]; });
  char detail[160];
  std::snprintf(detail, sizeof(detail),
                "B1 1e5 photons seed 1, 2 devices, strategies {s1,s2,s3} x threads {1,4,8}: "
                "volume checksum %016llx on all 9 runs: %s",
                static_cast<unsigned long long>(checksums[0]), same ? "yes" : "NO");
  report(10, same, "byte-identical reproducibility", detail);
}

// --- 11. Beam-axis sanity -----------------------------------------------------

void criterion_11() {
  auto setup = benchmark_preset(Benchmark::B1);
  Scene scene{setup.grid, setup.source};
  SimulationConfig cfg = setup.config;
  cfg.photon_count = 1'000'000;
  cfg.master_seed = 11;
  auto run = run_group_dynamic(0, cfg.photon_count, pool_threads(), scene, cfg);

  std::size_t best_cell = 0;
  std::int64_t best = -1;
  for (std::size_t c = 0; c < run.map.voxel_count(); ++c) {
    if (run.map.raw_cell(c) > best) {
      best = run.map.raw_cell(c);
      best_cell = c;
    }
  }
  const int x = static_cast<int>(best_cell % 60);
  const int y = static_cast<int>((best_cell / 60) % 60);
  const int z = static_cast<int>(best_cell / 3600);
  char detail[128];
  std::snprintf(detail, sizeof(detail),
                "1e6 photons: peak-fluence voxel (%d, %d, %d); gate x=30, y=30, z<5", x, y, z);
  report(11, x == 30 && y == 30 && z < 5, "beam-axis fluence peak (B1)", detail);
}

}  // namespace

int main() {
  const double t0 = now_s();
  criterion_1();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_9();
  criterion_10();
  criterion_8();
  criterion_11();
  criterion_3();
  criterion_2();
  std::printf("-- %d/11 criteria passed in %.0f s --\n", 11 - g_failures, now_s() - t0);
  return g_failures;
}
