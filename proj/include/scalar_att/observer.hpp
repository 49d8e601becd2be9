#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "scalar_att/measurement.hpp"
#include "scalar_att/so3.hpp"

namespace scalar_att {

using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Estimate (R_hat, d_hat) with its Riccati matrix P (6x6 biased, 3x3
/// unbiased, empty for the complementary filter).
struct ObserverState {
  Rotation r_hat;
  Vec3 d_hat = Vec3::Zero();
  MatX p;
  double t = 0.0;
  std::uint64_t steps = 0;

  /// R_hat(0) = I, d_hat(0) = 0, P(0) = 0.5 I.
  static ObserverState default_initial(bool biased, double t0 = 0.0);
};

/// Riccati weights Q(t) (m x m) and V(t) (n x n). Both are checked symmetric
/// positive definite whenever they are evaluated.
class Gains {
 public:
  using MatrixFn = std::function<MatX(double)>;

  static Gains constant(const MatX& q, const MatX& v);
  static Gains time_varying(MatrixFn q, MatrixFn v);

  /// Q = 0.05 I_m, V = 0.005 I_6 (or I_3 when unbiased).
  static Gains defaults(int m, bool biased);

  MatX q(double t) const;
  MatX v(double t) const;

 private:
  MatrixFn q_;
  MatrixFn v_;
  bool constant_ = false;
};

struct StepInput {
  Vec3 omega_y = Vec3::Zero();  // rad/s, held over [t, t + dt)
  VecX y;
  double dt = 0.0;
  double t = 0.0;

  static constexpr double kMaxDt = 0.1;
  void validate() const;
};

struct Innovation {
  Vec3 delta_r = Vec3::Zero();
  Vec3 delta_d = Vec3::Zero();  // zero for the unbiased observer
};

/// [[0, R_hat], [0, 0]].
Mat6 build_a(const Rotation& r_hat);

/// Delta = -P C^T Q y_tilde, split into attitude and bias parts.
Innovation innovation(const MatX& p, const MatX& c, const MatX& q, const VecX& y_tilde);

/// One RK4 step of P' = A P + P A^T - P C^T Q C P + V, then symmetrized.
/// Throws NumericalError (naming `t`) if the result is not positive definite.
MatX cre_step(const MatX& p, const MatX& a, const MatX& c, const MatX& q, const MatX& v, double dt,
              double t = 0.0);

struct RiccatiOptions {
  /// Re-orthonormalize R_hat every this many steps; 0 disables.
  int projection_interval = 1000;
};

struct StepOutcome {
  ObserverState next;
  Innovation innovation;
  VecX output_error;
};

/// Biased observer, discretized as
///   R+ = exp(dt Delta_R) R_hat exp(dt (omega_y - d_hat)),  d+ = d_hat - dt Delta_d.
StepOutcome riccati_step(const ObserverState& state, const StepInput& input,
                         const MeasurementConfig& cfg, const Gains& gains,
                         const RiccatiOptions& opts = {});

/// Attitude-only observer: A = 0, 3x3 P, d_hat frozen.
StepOutcome riccati_step_unbiased(const ObserverState& state, const StepInput& input,
                                  const MeasurementConfig& cfg, const Gains& gains,
                                  const RiccatiOptions& opts = {});

/// Passive complementary filter gains: two attitude gains and the bias gain.
struct ComplementaryGains {
  double k1 = 2.0;
  double k2 = 2.0;
  double kb = 0.5;
};

/// input.y carries the body-frame accelerometer direction (first three
/// entries) and magnetometer direction (last three).
StepOutcome complementary_step(const ObserverState& state, const StepInput& input,
                               const Vec3& gravity_dir, const Vec3& mag_dir,
                               const ComplementaryGains& gains);

enum class EstimatorKind { Riccati, RiccatiUnbiased, Complementary };

EstimatorKind parse_estimator(std::string_view name);
std::string_view estimator_name(EstimatorKind kind);

struct RunSettings {
  EstimatorKind kind = EstimatorKind::Riccati;
  std::optional<Gains> gains;  // Riccati variants; defaults to Gains::defaults
  ComplementaryGains complementary;
  Vec3 gravity_dir = Vec3::UnitZ();
  Vec3 mag_dir = Vec3::UnitX();
  RiccatiOptions options;
};

struct RunHistory {
  std::vector<ObserverState> states;  // states[k] is the estimate before input k
  std::vector<Innovation> innovations;
  std::vector<VecX> output_errors;
};

/// Deterministic replay. Any step failure is rethrown with its step index.
RunHistory run(const RunSettings& settings, const ObserverState& initial,
               std::span<const StepInput> inputs, const MeasurementConfig& cfg);

}  // namespace scalar_att
