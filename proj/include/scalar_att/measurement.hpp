#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "scalar_att/so3.hpp"

namespace scalar_att {

using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Row3 = Eigen::RowVector3d;

/// Known inertial direction b_i(t): either constant or a timestamped series of
/// unit vectors, linearly interpolated and renormalized between samples.
class DirectionSignal {
 public:
  static constexpr double kUnitTolerance = 1e-6;

  static DirectionSignal constant(const Vec3& b);
  static DirectionSignal sampled(std::vector<double> times, std::vector<Vec3> values);

  bool is_constant() const { return times_.empty(); }

  /// Throws DataError when a sampled signal does not cover `t`.
  Vec3 at(double t) const;

  const std::vector<double>& times() const { return times_; }
  const std::vector<Vec3>& values() const { return values_; }

  /// File the series was loaded from, kept for serialization.
  const std::optional<std::string>& source() const { return source_; }
  void set_source(std::string path) { source_ = std::move(path); }

 private:
  std::vector<double> times_;
  std::vector<Vec3> values_;
  std::optional<std::string> source_;
};

/// One scalar output y = a^T R^T b(t).
struct ScalarChannel {
  Vec3 a;
  DirectionSignal b;

  /// Checked: |a| = 1 within 1e-6.
  ScalarChannel(const Vec3& a, DirectionSignal b);

  /// Skips the unit-norm check on `a` (homogeneity studies of the Gramian).
  static ScalarChannel unnormalized(const Vec3& a, DirectionSignal b);

 private:
  struct Raw {};
  ScalarChannel(const Vec3& a, DirectionSignal b, Raw) : a(a), b(std::move(b)) {}
};

/// Ordered list of channels; the order fixes the rows of C, y and Q.
class MeasurementConfig {
 public:
  MeasurementConfig(std::string name, std::vector<ScalarChannel> channels);

  const std::string& name() const { return name_; }
  const std::vector<ScalarChannel>& channels() const { return channels_; }
  int size() const { return static_cast<int>(channels_.size()); }
  const ScalarChannel& operator[](int i) const { return channels_[static_cast<size_t>(i)]; }

 private:
  std::string name_;
  std::vector<ScalarChannel> channels_;
};

/// Accelerometer/magnetometer axis subsets of the reduced-measurement study.
enum class Preset { Six, Four, Three, Two };

struct PresetAxes {
  std::vector<int> acc;  // 0-based sensor axes, in output order
  std::vector<int> mag;
};

Preset parse_preset(std::string_view name);
std::string_view preset_name(Preset p);
PresetAxes preset_axes(Preset p);

/// Accelerometer rows use b = e3 (gravity, NED), magnetometer rows b = m0,
/// a_i = R_imu e_k. Rows are ordered accelerometer first, then magnetometer.
MeasurementConfig preset_config(Preset p, const Rotation& r_imu, const Vec3& m0);
MeasurementConfig preset_config(std::string_view name, const Rotation& r_imu, const Vec3& m0);

/// y_i = a_i^T R^T b_i(t).
VecX predict_outputs(const Rotation& r, const MeasurementConfig& cfg, double t);

/// y_hat - y_meas.
VecX output_error(const Rotation& r_hat, const MeasurementConfig& cfg, double t, const VecX& y_meas);

/// C_i = a^T R_hat^T skew(b(t)).
Row3 c_row(const Rotation& r_hat, const ScalarChannel& ch, double t);

/// m x 3 stack of c_row, or m x 6 with a zero bias block when `with_bias`.
MatX build_c(const Rotation& r_hat, const MeasurementConfig& cfg, double t, bool with_bias);

/// {name, channels: [{a: [x,y,z], b: {const: [x,y,z]} | {series: path}}]}
nlohmann::json config_to_json(const MeasurementConfig& cfg);
/// Series paths are resolved relative to `base_dir`.
MeasurementConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// CSV with header `t,x,y,z`.
DirectionSignal load_direction_series(const std::filesystem::path& path);

}  // namespace scalar_att
