#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "scalar_att/measurement.hpp"
#include "scalar_att/observability.hpp"
#include "scalar_att/observer.hpp"
#include "scalar_att/so3.hpp"

namespace scalar_att {

/// Body angular velocity profile. The sinusoid is
/// Omega_i(t) = amplitude_i sin(2 pi frequency_i t + phase_i).
struct OmegaProfile {
  enum class Kind { Static, Constant, Sinusoid };

  Kind kind = Kind::Static;
  Vec3 value = Vec3::Zero();
  Vec3 amplitude = Vec3::Zero();
  Vec3 frequency_hz = Vec3::Zero();
  Vec3 phase = Vec3::Zero();

  static OmegaProfile stationary() { return {}; }
  static OmegaProfile constant(const Vec3& omega);
  static OmegaProfile sinusoid(const Vec3& amplitude, const Vec3& frequency_hz, const Vec3& phase);

  Vec3 at(double t) const;
};

struct NoiseSpec {
  double gyro_sigma = 0.0;  // rad/s per axis
  double meas_sigma = 0.0;  // per scalar output / unit direction component
  std::uint64_t seed = 0;
};

/// Inclined magnetic reference used by the fixtures: 60 degrees below north.
Vec3 default_m0();

struct TrajectorySpec {
  OmegaProfile omega;
  Rotation r0;
  Vec3 d_true = Vec3::Zero();
  double duration = 60.0;
  double rate_hz = 286.0;
  std::optional<NoiseSpec> noise;
  Vec3 m0 = default_m0();
  double gravity = 9.81;

  void validate() const;
};

/// Ground truth plus the sensor streams an observer would see.
///
/// Gyro sample k is the rate held over [t_k, t_k + dt): the profile sampled at
/// the interval midpoint, plus bias and noise. The attitude is propagated
/// with exactly that rate, so the noise-free prediction path is exact.
struct SyntheticRun {
  TrueTrajectory truth;
  std::vector<Vec3> omega_held;  // noise- and bias-free held rate
  std::vector<Vec3> omega_y;
  std::vector<VecX> y;
  std::vector<Vec3> acc;  // body-frame specific force, m/s^2
  std::vector<Vec3> mag;  // body-frame magnetic direction
  Vec3 d_true = Vec3::Zero();
  double dt = 0.0;

  std::vector<StepInput> inputs() const;
};

SyntheticRun generate(const TrajectorySpec& spec, const MeasurementConfig& cfg);

/// Named fixtures:
///   pe_tumble       sinusoid, amplitude (1, 1, 1) rad/s, frequency (0.5, 0.7, 0.3) Hz
///   constant_omega  Omega = (0.3, 0, 0) rad/s
///   static          Omega = 0
/// All start at R0 = I with zero bias, 60 s at 286 Hz, noise-free.
TrajectorySpec preset_trajectory(std::string_view name);

}  // namespace scalar_att
