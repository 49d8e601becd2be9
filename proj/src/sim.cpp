#include "scalar_att/sim.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "scalar_att/errors.hpp"

namespace scalar_att {

OmegaProfile OmegaProfile::constant(const Vec3& omega) {
  OmegaProfile p;
  p.kind = Kind::Constant;
  p.value = omega;
  return p;
}

OmegaProfile OmegaProfile::sinusoid(const Vec3& amplitude, const Vec3& frequency_hz, const Vec3& phase) {
  OmegaProfile p;
  p.kind = Kind::Sinusoid;
  p.amplitude = amplitude;
  p.frequency_hz = frequency_hz;
  p.phase = phase;
  return p;
}

Vec3 OmegaProfile::at(double t) const {
  switch (kind) {
    case Kind::Static: return Vec3::Zero();
    case Kind::Constant: return value;
    case Kind::Sinusoid: {
      Vec3 w;
      for (int i = 0; i < 3; ++i) {
        w(i) = amplitude(i) * std::sin(2.0 * std::numbers::pi * frequency_hz(i) * t + phase(i));
      }
      return w;
    }
  }
  return Vec3::Zero();
}

Vec3 default_m0() {
  const double incl = std::numbers::pi / 3.0;
  return Vec3(std::cos(incl), 0.0, std::sin(incl));
}

void TrajectorySpec::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw InvalidArgumentError("trajectory duration must be positive");
  }
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) {
    throw InvalidArgumentError("trajectory rate must be positive");
  }
  if (1.0 / rate_hz > StepInput::kMaxDt) {
    throw InvalidArgumentError("trajectory rate too low for the observer step bound");
  }
  if (noise && (noise->gyro_sigma < 0.0 || noise->meas_sigma < 0.0)) {
    throw InvalidArgumentError("noise standard deviations must be non-negative");
  }
  if (std::abs(m0.norm() - 1.0) > 1e-6) throw InvalidArgumentError("m0 must be a unit vector");
}

std::vector<StepInput> SyntheticRun::inputs() const {
  std::vector<StepInput> out;
  out.reserve(omega_y.size());
  for (size_t k = 0; k < omega_y.size(); ++k) {
    out.push_back(StepInput{omega_y[k], y[k], dt, truth.times()[k]});
  }
  return out;
}

SyntheticRun generate(const TrajectorySpec& spec, const MeasurementConfig& cfg) {
  spec.validate();
  const double dt = 1.0 / spec.rate_hz;
  const size_t n = static_cast<size_t>(std::llround(spec.duration * spec.rate_hz)) + 1;

  std::mt19937_64 rng(spec.noise ? spec.noise->seed : 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double gyro_sigma = spec.noise ? spec.noise->gyro_sigma : 0.0;
  const double meas_sigma = spec.noise ? spec.noise->meas_sigma : 0.0;
  // Measurement noise is truncated at 3 sigma (by rejection) so outputs stay
  // within 1 + 3 sigma of the unit sphere.
  const auto truncated = [&] {
    double x;
    do {
      x = normal(rng);
    } while (std::abs(x) > 3.0);
    return x;
  };
  // Components drawn in x, y, z order.
  const auto gyro_noise = [&] {
    Vec3 n = Vec3::Zero();
    if (gyro_sigma > 0.0) {
      for (int i = 0; i < 3; ++i) n(i) = gyro_sigma * normal(rng);
    }
    return n;
  };
  const auto meas_noise = [&] {
    Vec3 n = Vec3::Zero();
    if (meas_sigma > 0.0) {
      for (int i = 0; i < 3; ++i) n(i) = meas_sigma * truncated();
    }
    return n;
  };

  std::vector<double> times(n);
  std::vector<Rotation> rotations(n);
  std::vector<Vec3> omegas(n);
  SyntheticRun run{TrueTrajectory({0.0, 1.0}, {Rotation(), Rotation()}, {Vec3::Zero(), Vec3::Zero()}),
                   {}, {}, {}, {}, {}, spec.d_true, dt};
  run.omega_held.reserve(n);
  run.omega_y.reserve(n);
  run.y.reserve(n);
  run.acc.reserve(n);
  run.mag.reserve(n);

  Rotation r = spec.r0;
  for (size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    times[k] = t;
    rotations[k] = r;
    omegas[k] = spec.omega.at(t);

    const Vec3 held = spec.omega.at(t + 0.5 * dt);
    run.omega_held.push_back(held);
    run.omega_y.push_back(held + spec.d_true + gyro_noise());

    VecX y = predict_outputs(r, cfg, t);
    if (meas_sigma > 0.0) {
      for (long i = 0; i < y.size(); ++i) y(i) += meas_sigma * truncated();
    }
    run.y.push_back(std::move(y));
    const Mat3 rt = r.matrix().transpose();
    run.acc.push_back(-spec.gravity * (rt * Vec3::UnitZ() + meas_noise()));
    run.mag.push_back(rt * spec.m0 + meas_noise());

    r = r * exp_so3(dt * held);
  }
  run.truth = TrueTrajectory(std::move(times), std::move(rotations), std::move(omegas));
  return run;
}

TrajectorySpec preset_trajectory(std::string_view name) {
  TrajectorySpec spec;
  if (name == "pe_tumble") {
    spec.omega = OmegaProfile::sinusoid(Vec3(1.0, 1.0, 1.0), Vec3(0.5, 0.7, 0.3), Vec3::Zero());
  } else if (name == "constant_omega") {
    spec.omega = OmegaProfile::constant(Vec3(0.3, 0.0, 0.0));
  } else if (name == "static") {
    spec.omega = OmegaProfile::stationary();
  } else {
    throw InvalidArgumentError("unknown trajectory preset '" + std::string(name) +
                               "' (expected pe_tumble, constant_omega or static)");
  }
  return spec;
}

}  // namespace scalar_att
