#pragma once

#include <cstdint>
#include <random>

#include "scalar_att/measurement.hpp"
#include "scalar_att/observability.hpp"
#include "scalar_att/sim.hpp"

namespace scalar_att::testing {

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

/// Smooth random tumble: per-axis sinusoids with random amplitude, frequency
/// and phase, random initial attitude.
inline TrajectorySpec random_smooth_spec(std::uint64_t seed, double duration, double rate_hz) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(0.3, 1.2), freq(0.05, 0.6), phase(0.0, 6.283185307179586);
  TrajectorySpec spec;
  spec.omega = OmegaProfile::sinusoid(Vec3(amp(rng), amp(rng), amp(rng)), Vec3(freq(rng), freq(rng), freq(rng)),
                                      Vec3(phase(rng), phase(rng), phase(rng)));
  spec.r0 = exp_so3(3.0 * random_unit(rng) * std::uniform_real_distribution<double>(0.0, 1.0)(rng));
  spec.duration = duration;
  spec.rate_hz = rate_hz;
  return spec;
}

inline TrueTrajectory random_smooth_trajectory(std::uint64_t seed, double duration = 4.0, double rate_hz = 2000.0) {
  const TrajectorySpec spec = random_smooth_spec(seed, duration, rate_hz);
  const MeasurementConfig cfg = preset_config(Preset::Two, Rotation(), spec.m0);
  return generate(spec, cfg).truth;
}

inline TrueTrajectory static_trajectory(const Rotation& r, double duration = 4.0, double rate_hz = 100.0) {
  TrajectorySpec spec = preset_trajectory("static");
  spec.r0 = r;
  spec.duration = duration;
  spec.rate_hz = rate_hz;
  return generate(spec, preset_config(Preset::Two, Rotation(), spec.m0)).truth;
}

/// Channels of the three-scalar static configuration:
/// (e1, e3), (e2, e3), (e1, (1, 1, 0)/sqrt 2).
inline MeasurementConfig static_three_config() {
  const Vec3 b2 = Vec3(1, 1, 0).normalized();
  return MeasurementConfig("static-three", {ScalarChannel(Vec3::UnitX(), DirectionSignal::constant(Vec3::UnitZ())),
                                            ScalarChannel(Vec3::UnitY(), DirectionSignal::constant(Vec3::UnitZ())),
                                            ScalarChannel(Vec3::UnitX(), DirectionSignal::constant(b2))});
}

}  // namespace scalar_att::testing
