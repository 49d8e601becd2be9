#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "scalar_att/history_io.hpp"
#include "scalar_att/measurement.hpp"
#include "scalar_att/observer.hpp"
#include "scalar_att/sim.hpp"
#include "scalar_att/so3.hpp"

namespace scalar_att {

/// One IMU sample. Ground truth is optional so estimate-only files load too.
struct ImuRecord {
  double t = 0.0;
  Vec3 gyro = Vec3::Zero();  // rad/s
  Vec3 acc = Vec3::Zero();   // m/s^2
  Vec3 mag = Vec3::Zero();   // arbitrary units
  std::optional<UnitQuaternion> q_gt;
};

struct SequenceMeta {
  static constexpr double kNominalRate = 286.0;

  double rate_hz = kNominalRate;
  Rotation r_imu;
  std::optional<Vec3> m0;
  Vec3 g0 = Vec3::UnitZ();
  std::vector<size_t> gaps;  // record indices k with t_k - t_{k-1} > 3 / rate
};

struct Sequence {
  std::vector<ImuRecord> records;
  SequenceMeta meta;
};

inline constexpr const char* kImuCsvHeader = "t_s,gx,gy,gz,ax,ay,az,mx,my,mz,qw,qx,qy,qz";

/// Columns are matched by name. Quaternion cells may be left empty (all four)
/// for rows without ground truth. The rate is estimated from the median step.
Sequence load_csv(const std::filesystem::path& path);
Sequence read_csv(std::istream& in, const std::string& name = "<stream>");

void write_csv(std::ostream& out, std::span<const ImuRecord> records);

/// Records in the ingestion schema; the ground truth quaternion is included.
std::vector<ImuRecord> to_records(const SyntheticRun& run);

/// normalize(mean_k R_gt,k R_imu normalize(mag_k)) over the first k records.
Vec3 derive_m0(std::span<const ImuRecord> records, const Rotation& r_imu = Rotation(), int k = 100);

struct ScalarStream {
  MeasurementConfig cfg;
  std::vector<StepInput> inputs;
  std::vector<size_t> flagged;  // zero-norm acc/mag samples replaced by the previous one
};

/// Gravity direction in the sensor frame is normalize(-acc) (NED, static
/// specific force -g R^T e3). The step held by input k is t_{k+1} - t_k; the
/// last record uses the nominal period.
ScalarStream to_scalar_stream(std::span<const ImuRecord> records, const SequenceMeta& meta, Preset preset);

/// Body-frame unit gravity and magnetic directions, six values per step, for
/// the complementary filter.
ScalarStream to_vector_stream(std::span<const ImuRecord> records, const SequenceMeta& meta);

std::vector<double> times_of(std::span<const ImuRecord> records);
/// Throws DataError if a record has no ground truth.
std::vector<Rotation> ground_truth(std::span<const ImuRecord> records);

struct ErrorSeries {
  std::vector<double> t;
  std::vector<double> theta_deg;
  std::vector<double> roll_deg;
  std::vector<double> pitch_deg;
  std::vector<double> yaw_deg;
  std::vector<Vec3> d_hat;   // empty if the estimate carries none
  std::vector<Vec3> d_tilde;  // empty unless the true bias is known
};

struct RmseSummary {
  double theta = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
  size_t samples = 0;
};

struct Evaluation {
  ErrorSeries series;
  RmseSummary rmse;
};

/// Wraps an angle difference in degrees into (-180, 180].
double wrap_deg(double x);

/// Each estimate sample is paired with the nearest truth sample, if one lies
/// within half the median truth period. Estimates outside are skipped;
/// throws DataError if nothing pairs up.
Evaluation evaluate(const EstimatedTrajectory& est, std::span<const double> truth_t,
                    std::span<const Rotation> truth_r, std::optional<Vec3> true_bias = std::nullopt);

void write_error_series_csv(std::ostream& out, const ErrorSeries& series);

}  // namespace scalar_att
