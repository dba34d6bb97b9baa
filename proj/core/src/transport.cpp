#include "voxmc/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace voxmc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

double sample_scattering_length(RngStream& stream) {
  const double u = stream.next_unit();
  return -std::log(u > 0.0 ? u : std::numeric_limits<double>::denorm_min());
}

/// exp(-x) for x >= 0. One voxel segment carries a tiny optical depth
/// (mua * voxel diagonal), so a degree-4 Taylor series below 0.01 keeps the
/// relative error under 1e-12 at a fraction of the libm cost.
inline double exp_neg(double x) {
  if (x < 0.01) {
    return 1.0 - x * (1.0 - x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 24.0))));
  }
  return std::exp(-x);
}

/// Uniform unit vector in the plane (cos/sin of a uniform azimuth) by
/// rejection from the unit disk; cheaper than sincos and free of its
/// argument reduction.
inline void sample_azimuth(RngStream& stream, double& cp, double& sp) {
  for (;;) {
    const double ax = 2.0 * stream.next_unit() - 1.0;
    const double ay = 2.0 * stream.next_unit() - 1.0;
    const double r2 = ax * ax + ay * ay;
    if (r2 > 1e-12 && r2 <= 1.0) {
      const double inv = 1.0 / std::sqrt(r2);
      cp = ax * inv;
      sp = ay * inv;
      return;
    }
  }
}

/// Distance to the current voxel's bounding planes using the cached voxel
/// index and inverse direction; reports the crossing axis. Clamped at 0 so
/// sub-ulp drift past a plane reads as an immediate crossing.
inline double boundary_distance(const PhotonState& st, double h, int& axis) {
  const int iv[3] = {st.voxel.x, st.voxel.y, st.voxel.z};
  double t[3];
  for (int k = 0; k < 3; ++k) {
    const double dk = st.direction[k];
    const double plane = (iv[k] + (dk > 0.0 ? 1 : 0)) * h;
    const double tk = (plane - st.position[k]) * st.inv_direction[k];
    // Clamp sub-ulp drift past a plane to an immediate crossing; a zero
    // component never crosses its planes.
    t[k] = dk != 0.0 ? (tk > 0.0 ? tk : 0.0) : kInf;
  }
  // Select-style argmin keeps the crossing axis free of hard-to-predict
  // branches (it changes nearly every segment).
  axis = 0;
  double best = t[0];
  if (t[1] < best) {
    best = t[1];
    axis = 1;
  }
  if (t[2] < best) {
    best = t[2];
    axis = 2;
  }
  return best;
}

}  // namespace

void PhotonState::set_direction(const Vec3& d) {
  direction = d;
  inv_direction = {d.x != 0.0 ? 1.0 / d.x : kInf, d.y != 0.0 ? 1.0 / d.y : kInf,
                   d.z != 0.0 ? 1.0 / d.z : kInf};
}

PhotonState launch(const Source& source, const VoxelGrid& grid, RngStream& stream) {
  Vec3 dir;
  if (source.isotropic) {
    const double ct = 2.0 * stream.next_unit() - 1.0;
    const double phi = 2.0 * kPi * stream.next_unit();
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    dir = {st * std::cos(phi), st * std::sin(phi), ct};
  } else {
    dir = source.direction.normalized();
  }
  PhotonState photon;
  photon.set_direction(dir);
  photon.position = source.position + dir * 1e-6;
  const auto voxel = grid.voxel_of(photon.position);
  if (!voxel) {
    throw SourceOutsideDomain("source entry point maps outside the voxel grid");
  }
  photon.voxel = *voxel;
  photon.medium = grid.label(*voxel);
  photon.weight = 1.0;
  photon.time_ns = 0.0;
  photon.remaining_scat = sample_scattering_length(stream);
  return photon;
}

double distance_to_voxel_boundary(const Vec3& position, const Vec3& direction,
                                  const VoxelGrid& grid) {
  const auto voxel = grid.voxel_of(position);
  if (!voxel) throw VoxelOutOfRange("position outside grid");
  PhotonState st;
  st.position = position;
  st.set_direction(direction);
  st.voxel = *voxel;
  int axis;
  return boundary_distance(st, grid.voxel_size(), axis);
}

double hg_cos_theta(double g, double xi) {
  if (std::fabs(g) < 1e-6) return 2.0 * xi - 1.0;
  const double tmp = (1.0 - g * g) / (1.0 - g + 2.0 * g * xi);
  return std::clamp((1.0 + g * g - tmp * tmp) / (2.0 * g), -1.0, 1.0);
}

Vec3 hg_scatter(const Vec3& direction, double g, RngStream& stream) {
  const double u1 = stream.next_unit();
  const double ct = hg_cos_theta(g, u1);
  const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
  double cp, sp;
  sample_azimuth(stream, cp, sp);

  Vec3 out;
  if (std::fabs(direction.z) > 0.99999) {
    out = {st * cp, st * sp, direction.z > 0.0 ? ct : -ct};
  } else {
    const double den = std::sqrt(1.0 - direction.z * direction.z);
    out.x = st * (direction.x * direction.z * cp - direction.y * sp) / den + direction.x * ct;
    out.y = st * (direction.y * direction.z * cp + direction.x * sp) / den + direction.y * ct;
    out.z = -st * cp * den + direction.z * ct;
  }
  const double norm2 = out.dot(out);
  if (std::fabs(norm2 - 1.0) > 1e-12) {
    out = out * (1.0 / std::sqrt(norm2));
  }
  return out;
}

double fresnel_reflectance(double n1, double n2, double cos_i) {
  cos_i = std::clamp(cos_i, 0.0, 1.0);
  const double sin2_i = 1.0 - cos_i * cos_i;
  const double eta = n1 / n2;
  const double sin2_t = eta * eta * sin2_i;
  if (sin2_t > 1.0) return 1.0;
  const double cos_t = std::sqrt(1.0 - sin2_t);
  const double rs = (n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t);
  const double rp = (n1 * cos_t - n2 * cos_i) / (n1 * cos_t + n2 * cos_i);
  return 0.5 * (rs * rs + rp * rp);
}

StepOutcome advance(PhotonState& photon, const VoxelGrid& grid, const SimulationConfig& config,
                    RngStream& stream) {
  const OpticalProperties& med = grid.medium(photon.medium);
  const double h = grid.voxel_size();

  int axis;
  const double d_boundary = boundary_distance(photon, h, axis);
  const double d_scatter = med.mus > 0.0 ? photon.remaining_scat / med.mus : kInf;
  const double ns_per_mm = med.n * (1.0 / kLightSpeedMmPerNs);
  const double remaining_ns = config.tmax_ns - photon.time_ns;

  double d = std::min(d_boundary, d_scatter);
  const bool hits_horizon = d * ns_per_mm >= remaining_ns;
  if (hits_horizon) d = std::max(0.0, remaining_ns / ns_per_mm);

  StepOutcome out;
  const double w_after = photon.weight * exp_neg(med.mua * d);
  out.deposited = photon.weight - w_after;
  photon.weight = w_after;
  photon.time_ns += d * ns_per_mm;

  if (hits_horizon) {
    photon.position = photon.position + photon.direction * d;
    photon.time_ns = config.tmax_ns;
    out.kind = StepKind::Terminated;
    return out;
  }

  if (d_scatter <= d_boundary) {
    photon.position = photon.position + photon.direction * d;
    photon.set_direction(hg_scatter(photon.direction, med.g, stream));
    photon.remaining_scat = sample_scattering_length(stream);
    out.kind = StepKind::Scattered;
    return out;
  }

  // Land exactly on the face; the next voxel comes from the face index, not
  // from position rounding.
  photon.remaining_scat = std::max(0.0, photon.remaining_scat - d * med.mus);
  const int step = photon.direction[axis] > 0.0 ? 1 : -1;
  Vec3 p = photon.position + photon.direction * d;
  const int iv = axis == 0 ? photon.voxel.x : (axis == 1 ? photon.voxel.y : photon.voxel.z);
  p.ref(axis) = (iv + (step > 0 ? 1 : 0)) * h;
  photon.position = p;

  VoxelIndex next = photon.voxel;
  (axis == 0 ? next.x : (axis == 1 ? next.y : next.z)) += step;
  out.kind = StepKind::CrossedVoxel;
  out.face_axis = axis;
  out.face_step = step;
  out.next_voxel = next;

  if (!grid.contains(next)) {
    out.next_is_exterior = true;
    out.interface_pending = true;
    return out;
  }
  if (grid.medium_at(next).n != med.n) {
    out.interface_pending = true;
    return out;
  }
  photon.voxel = next;
  photon.medium = grid.label(next);
  return out;
}

StepOutcome handle_interface(PhotonState& photon, const VoxelGrid& grid,
                             const SimulationConfig& config, const StepOutcome& crossing,
                             RngStream& stream) {
  StepOutcome out;
  out.face_axis = crossing.face_axis;
  out.face_step = crossing.face_step;

  if (crossing.next_is_exterior && config.boundary_mode == BoundaryMode::TerminateAtBoundary) {
    out.kind = StepKind::ExitedDomain;
    return out;
  }

  const double n1 = grid.medium(photon.medium).n;
  const double n2 = crossing.next_is_exterior ? grid.exterior().n
                                              : grid.medium_at(crossing.next_voxel).n;
  if (n1 == n2) {
    // Identity interface: no reflection draw.
    if (crossing.next_is_exterior) {
      out.kind = StepKind::ExitedDomain;
      return out;
    }
    photon.voxel = crossing.next_voxel;
    photon.medium = grid.label(crossing.next_voxel);
    out.kind = StepKind::CrossedVoxel;
    return out;
  }

  const int axis = crossing.face_axis;
  const double cos_i = std::fabs(photon.direction[axis]);
  const double sin2_i = std::max(0.0, 1.0 - cos_i * cos_i);
  const double eta = n1 / n2;
  const double sin2_t = eta * eta * sin2_i;

  if (sin2_t > 1.0) {  // total internal reflection, deterministic
    Vec3 d = photon.direction;
    d.ref(axis) = -d[axis];
    photon.set_direction(d);
    out.kind = StepKind::Reflected;
    return out;
  }

  const double cos_t = std::sqrt(1.0 - sin2_t);
  const double rs = (n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t);
  const double rp = (n1 * cos_t - n2 * cos_i) / (n1 * cos_t + n2 * cos_i);
  const double reflectance = 0.5 * (rs * rs + rp * rp);

  if (stream.next_unit() < reflectance) {
    Vec3 d = photon.direction;
    d.ref(axis) = -d[axis];
    photon.set_direction(d);
    out.kind = StepKind::Reflected;
    return out;
  }

  // Snell refraction: tangential components scaled by n1/n2.
  Vec3 d = photon.direction;
  for (int k = 0; k < 3; ++k) {
    if (k == axis) continue;
    d.ref(k) = d[k] * eta;
  }
  d.ref(axis) = photon.direction[axis] > 0.0 ? cos_t : -cos_t;
  photon.set_direction(d.normalized());

  if (crossing.next_is_exterior) {
    out.kind = StepKind::ExitedDomain;
    return out;
  }
  photon.voxel = crossing.next_voxel;
  photon.medium = grid.label(crossing.next_voxel);
  out.kind = StepKind::CrossedVoxel;
  return out;
}

bool roulette(PhotonState& photon, const SimulationConfig& config, RngStream& stream) {
  if (stream.next_unit() < 1.0 / config.roulette_multiplier) {
    photon.weight *= config.roulette_multiplier;
    return true;
  }
  return false;
}

namespace {

template <typename Sink>
#if defined(__GNUC__)
__attribute__((flatten))
#endif
PhotonDisposition
run_photon(std::uint64_t photon_index, const Scene& scene, const SimulationConfig& config,
           Sink&& sink) {
  const VoxelGrid& grid = scene.grid;
  RngStream stream(config.master_seed, photon_index);
  PhotonState photon = launch(scene.source, grid, stream);
  PhotonDisposition disp;

  for (;;) {
    const VoxelIndex at = photon.voxel;
    const StepOutcome out = advance(photon, grid, config, stream);
    if (out.deposited != 0.0) {
      sink(grid.linear(at), out.deposited);
      disp.deposited += out.deposited;
    }
    switch (out.kind) {
      case StepKind::Terminated:
        disp.truncated += photon.weight;
        return disp;
      case StepKind::Scattered:
        if (photon.weight < config.roulette_threshold) {
          const double before = photon.weight;
          if (!roulette(photon, config, stream)) {
            disp.killed += before;
            return disp;
          }
          // Survivor boost is booked against the killed channel so the
          // per-photon weight identity stays exact.
          disp.killed += before - photon.weight;
        }
        break;
      case StepKind::CrossedVoxel:
        if (out.interface_pending) {
          const StepOutcome resolved = handle_interface(photon, grid, config, out, stream);
          if (resolved.kind == StepKind::ExitedDomain) {
            disp.escaped += photon.weight;
            return disp;
          }
        }
        break;
      default:
        break;
    }
  }
}

}  // namespace

PhotonDisposition simulate_photon(std::uint64_t photon_index, const Scene& scene,
                                  const SimulationConfig& config, FluenceMap& map) {
  return run_photon(photon_index, scene, config,
                    [&map](std::size_t cell, double dw) { map.deposit(cell, dw); });
}

PhotonDisposition simulate_photon_trace(std::uint64_t photon_index, const Scene& scene,
                                        const SimulationConfig& config,
                                        std::vector<std::pair<VoxelIndex, double>>& deposits) {
  const VoxelGrid& grid = scene.grid;
  const int nx = grid.nx();
  const int ny = grid.ny();
  return run_photon(photon_index, scene, config, [&](std::size_t cell, double dw) {
    const int z = static_cast<int>(cell / (static_cast<std::size_t>(nx) * ny));
    const std::size_t rest = cell % (static_cast<std::size_t>(nx) * ny);
    deposits.emplace_back(VoxelIndex{static_cast<int>(rest % nx), static_cast<int>(rest / nx), z},
                          dw);
  });
}

}  // namespace voxmc
