#include "scalar_att/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <string>

#include "scalar_att/csv.hpp"
#include "scalar_att/errors.hpp"

namespace scalar_att {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;
constexpr double kZeroNorm = 1e-12;

double median_step(std::span<const double> t) {
  if (t.size() < 2) return 0.0;
  std::vector<double> d(t.size() - 1);
  for (size_t k = 1; k < t.size(); ++k) d[k - 1] = t[k] - t[k - 1];
  const auto mid = d.begin() + static_cast<long>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

// Unit vectors for every record, carrying the previous value over zero-norm samples.
std::vector<Vec3> unit_series(std::span<const ImuRecord> records, Vec3 (*pick)(const ImuRecord&),
                              const char* what, std::vector<size_t>& flagged) {
  std::vector<Vec3> out;
  out.reserve(records.size());
  for (size_t k = 0; k < records.size(); ++k) {
    const Vec3 v = pick(records[k]);
    const double n = v.norm();
    if (n > kZeroNorm) {
      out.push_back(v / n);
      continue;
    }
    if (k == 0) throw DataError(std::string("record 0: zero-norm ") + what + " sample");
    out.push_back(out.back());
    flagged.push_back(k);
  }
  return out;
}

Vec3 pick_gravity(const ImuRecord& r) { return -r.acc; }
Vec3 pick_mag(const ImuRecord& r) { return r.mag; }

std::vector<StepInput> make_inputs(std::span<const ImuRecord> records, const SequenceMeta& meta,
                                   const std::vector<VecX>& y) {
  std::vector<StepInput> inputs;
  inputs.reserve(records.size());
  for (size_t k = 0; k < records.size(); ++k) {
    const double dt = k + 1 < records.size() ? records[k + 1].t - records[k].t : 1.0 / meta.rate_hz;
    inputs.push_back(StepInput{records[k].gyro, y[k], dt, records[k].t});
  }
  return inputs;
}

void sort_unique(std::vector<size_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

Sequence load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_csv(in, path.string());
}

Sequence read_csv(std::istream& in, const std::string& name) {
  static constexpr std::array<const char*, 14> kCols = {"t_s", "gx", "gy", "gz", "ax", "ay", "az",
                                                        "mx",  "my", "mz", "qw", "qx", "qy", "qz"};
  std::string line;
  if (!std::getline(in, line)) throw DataError(name + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::map<std::string, size_t, std::less<>> col;
  {
    const auto fields = csv::split(line);
    for (size_t i = 0; i < fields.size(); ++i) col.emplace(std::string(fields[i]), i);
  }
  std::array<size_t, 14> idx{};
  for (size_t i = 0; i < kCols.size(); ++i) {
    const auto it = col.find(kCols[i]);
    if (it == col.end()) throw DataError(name + ": missing column '" + kCols[i] + "'");
    idx[i] = it->second;
  }

  Sequence seq;
  size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split(line);
    const auto bad = [&](const std::string& why) {
      return DataError(name + ": row " + std::to_string(row) + ": " + why);
    };
    double v[14];
    int quat_present = 0;
    for (size_t i = 0; i < kCols.size(); ++i) {
      const size_t c = idx[i];
      const std::string_view field = c < f.size() ? f[c] : std::string_view{};
      if (i >= 10 && field.empty()) continue;
      if (!csv::parse(field, v[i])) throw bad(std::string("cannot parse ") + kCols[i]);
      if (!std::isfinite(v[i])) throw bad(std::string("non-finite ") + kCols[i]);
      if (i >= 10) ++quat_present;
    }
    if (quat_present != 0 && quat_present != 4) throw bad("partial quaternion");
    ImuRecord r;
    r.t = v[0];
    r.gyro = Vec3(v[1], v[2], v[3]);
    r.acc = Vec3(v[4], v[5], v[6]);
    r.mag = Vec3(v[7], v[8], v[9]);
    if (quat_present == 4) {
      const Vec3 qv(v[11], v[12], v[13]);
      const double norm2 = v[10] * v[10] + qv.squaredNorm();
      if (norm2 < 1e-12) throw bad("zero quaternion");
      // Stored quaternions that are already unit are kept bit-exact.
      r.q_gt = std::abs(norm2 - 1.0) <= UnitQuaternion::kTolerance ? UnitQuaternion{v[10], qv}
                                                                  : UnitQuaternion::normalized(v[10], qv);
    }
    if (!seq.records.empty() && !(r.t > seq.records.back().t)) throw bad("time not strictly increasing");
    seq.records.push_back(r);
  }
  if (seq.records.empty()) throw DataError(name + ": no records");

  const std::vector<double> t = times_of(seq.records);
  const double step = median_step(t);
  if (step > 0.0) seq.meta.rate_hz = 1.0 / step;
  const double gap = 3.0 / seq.meta.rate_hz;
  for (size_t k = 1; k < t.size(); ++k) {
    if (t[k] - t[k - 1] > gap) seq.meta.gaps.push_back(k);
  }
  return seq;
}

void write_csv(std::ostream& out, std::span<const ImuRecord> records) {
  out << kImuCsvHeader << '\n';
  for (const ImuRecord& r : records) {
    out << csv::format(r.t);
    for (const Vec3* v : {&r.gyro, &r.acc, &r.mag}) {
      for (int i = 0; i < 3; ++i) out << ',' << csv::format((*v)(i));
    }
    if (r.q_gt) {
      out << ',' << csv::format(r.q_gt->w);
      for (int i = 0; i < 3; ++i) out << ',' << csv::format(r.q_gt->v(i));
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
}

std::vector<ImuRecord> to_records(const SyntheticRun& run) {
  const auto& t = run.truth.times();
  const auto& r = run.truth.rotations();
  std::vector<ImuRecord> out(t.size());
  for (size_t k = 0; k < t.size(); ++k) {
    out[k].t = t[k];
    out[k].gyro = run.omega_y[k];
    out[k].acc = run.acc[k];
    out[k].mag = run.mag[k];
    out[k].q_gt = to_quaternion(r[k]);
  }
  return out;
}

Vec3 derive_m0(std::span<const ImuRecord> records, const Rotation& r_imu, int k) {
  if (k < 10) throw InvalidArgumentError("derive_m0 needs at least 10 samples");
  if (records.size() < static_cast<size_t>(k)) {
    throw DataError("derive_m0: sequence shorter than " + std::to_string(k) + " records");
  }
  Vec3 sum = Vec3::Zero();
  for (int i = 0; i < k; ++i) {
    const ImuRecord& r = records[static_cast<size_t>(i)];
    if (!r.q_gt) throw DataError("derive_m0: record " + std::to_string(i) + " has no ground truth");
    const double n = r.mag.norm();
    if (n <= kZeroNorm) throw DataError("derive_m0: zero magnetometer sample at record " + std::to_string(i));
    sum += from_quaternion(*r.q_gt) * (r_imu * (r.mag / n));
  }
  const Vec3 mean = sum / k;
  if (mean.norm() < 1e-3) throw DataError("derive_m0: magnetometer directions average to ~0");
  return mean.normalized();
}

ScalarStream to_scalar_stream(std::span<const ImuRecord> records, const SequenceMeta& meta, Preset preset) {
  if (!meta.m0) throw InvalidArgumentError("sequence meta has no magnetic reference m0");
  std::vector<size_t> flagged;
  const std::vector<Vec3> g = unit_series(records, pick_gravity, "accelerometer", flagged);
  const std::vector<Vec3> m = unit_series(records, pick_mag, "magnetometer", flagged);
  sort_unique(flagged);

  const PresetAxes axes = preset_axes(preset);
  const long n_out = static_cast<long>(axes.acc.size() + axes.mag.size());
  std::vector<VecX> y(records.size(), VecX(n_out));
  for (size_t k = 0; k < records.size(); ++k) {
    long i = 0;
    for (int a : axes.acc) y[k](i++) = g[k](a);
    for (int a : axes.mag) y[k](i++) = m[k](a);
  }
  return ScalarStream{preset_config(preset, meta.r_imu, *meta.m0), make_inputs(records, meta, y),
                      std::move(flagged)};
}

ScalarStream to_vector_stream(std::span<const ImuRecord> records, const SequenceMeta& meta) {
  std::vector<size_t> flagged;
  const std::vector<Vec3> g = unit_series(records, pick_gravity, "accelerometer", flagged);
  const std::vector<Vec3> m = unit_series(records, pick_mag, "magnetometer", flagged);
  sort_unique(flagged);
  std::vector<VecX> y(records.size(), VecX(6));
  for (size_t k = 0; k < records.size(); ++k) {
    y[k] << meta.r_imu * g[k], meta.r_imu * m[k];
  }
  const Vec3 m0 = meta.m0.value_or(default_m0());
  return ScalarStream{preset_config(Preset::Six, meta.r_imu, m0), make_inputs(records, meta, y),
                      std::move(flagged)};
}

std::vector<double> times_of(std::span<const ImuRecord> records) {
  std::vector<double> t(records.size());
  for (size_t k = 0; k < records.size(); ++k) t[k] = records[k].t;
  return t;
}

std::vector<Rotation> ground_truth(std::span<const ImuRecord> records) {
  std::vector<Rotation> r;
  r.reserve(records.size());
  for (size_t k = 0; k < records.size(); ++k) {
    if (!records[k].q_gt) throw DataError("record " + std::to_string(k) + " has no ground truth");
    r.push_back(from_quaternion(*records[k].q_gt));
  }
  return r;
}

double wrap_deg(double x) {
  double w = std::fmod(x, 360.0);
  if (w <= -180.0) w += 360.0;
  if (w > 180.0) w -= 360.0;
  return w;
}

Evaluation evaluate(const EstimatedTrajectory& est, std::span<const double> truth_t,
                    std::span<const Rotation> truth_r, std::optional<Vec3> true_bias) {
  if (truth_t.size() != truth_r.size()) throw InvalidArgumentError("truth times and rotations differ in length");
  if (est.t.size() != est.r.size()) throw InvalidArgumentError("estimate times and rotations differ in length");
  if (truth_t.empty() || est.t.empty()) throw DataError("evaluate: empty trajectory");

  double period = 0.0;
  for (double p : {median_step(truth_t), median_step(est.t)}) {
    if (p > 0.0) period = period > 0.0 ? std::min(period, p) : p;
  }
  const double tol = 0.5 * period + 1e-12;
  const bool with_dhat = est.d_hat.size() == est.t.size();

  Evaluation ev;
  ErrorSeries& s = ev.series;
  double sum_theta = 0.0, sum_roll = 0.0, sum_pitch = 0.0, sum_yaw = 0.0;
  for (size_t k = 0; k < est.t.size(); ++k) {
    const double t = est.t[k];
    const auto it = std::lower_bound(truth_t.begin(), truth_t.end(), t);
    size_t j = static_cast<size_t>(it - truth_t.begin());
    if (j == truth_t.size() || (j > 0 && t - truth_t[j - 1] <= truth_t[j] - t)) --j;
    if (std::abs(truth_t[j] - t) > tol) continue;

    const Rotation& r_hat = est.r[k];
    const Rotation& r = truth_r[j];
    const EulerZYX e_hat = euler_zyx(r_hat);
    const EulerZYX e = euler_zyx(r);
    const double theta = angular_distance(r_hat, r) * kDeg;
    const double droll = wrap_deg((e_hat.roll - e.roll) * kDeg);
    const double dpitch = wrap_deg((e_hat.pitch - e.pitch) * kDeg);
    const double dyaw = wrap_deg((e_hat.yaw - e.yaw) * kDeg);
    s.t.push_back(t);
    s.theta_deg.push_back(theta);
    s.roll_deg.push_back(droll);
    s.pitch_deg.push_back(dpitch);
    s.yaw_deg.push_back(dyaw);
    if (with_dhat) {
      s.d_hat.push_back(est.d_hat[k]);
      if (true_bias) s.d_tilde.push_back(*true_bias - est.d_hat[k]);
    }
    sum_theta += theta * theta;
    sum_roll += droll * droll;
    sum_pitch += dpitch * dpitch;
    sum_yaw += dyaw * dyaw;
  }
  const size_t n = s.t.size();
  if (n == 0) throw DataError("evaluate: estimate and ground truth share no time support");
  ev.rmse = RmseSummary{std::sqrt(sum_theta / n), std::sqrt(sum_roll / n), std::sqrt(sum_pitch / n),
                        std::sqrt(sum_yaw / n), n};
  return ev;
}

void write_error_series_csv(std::ostream& out, const ErrorSeries& s) {
  const bool dhat = !s.d_hat.empty();
  const bool dtilde = !s.d_tilde.empty();
  out << "t,theta_deg,roll_err_deg,pitch_err_deg,yaw_err_deg";
  if (dhat) out << ",dhat_x,dhat_y,dhat_z";
  if (dtilde) out << ",dtilde_x,dtilde_y,dtilde_z";
  out << '\n';
  for (size_t k = 0; k < s.t.size(); ++k) {
    out << csv::format(s.t[k]) << ',' << csv::format(s.theta_deg[k]) << ',' << csv::format(s.roll_deg[k])
        << ',' << csv::format(s.pitch_deg[k]) << ',' << csv::format(s.yaw_deg[k]);
    if (dhat) {
      for (int i = 0; i < 3; ++i) out << ',' << csv::format(s.d_hat[k](i));
    }
    if (dtilde) {
      for (int i = 0; i < 3; ++i) out << ',' << csv::format(s.d_tilde[k](i));
    }
    out << '\n';
  }
}

}  // namespace scalar_att
