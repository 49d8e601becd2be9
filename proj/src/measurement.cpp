#include "scalar_att/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "scalar_att/errors.hpp"

namespace scalar_att {

namespace {

void require_unit(const Vec3& v, const char* what) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > DirectionSignal::kUnitTolerance) {
    throw InvalidArgumentError(std::string(what) + " must be a unit vector (|v| = " +
                               std::to_string(v.norm()) + ")");
  }
}

Vec3 vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw InvalidArgumentError("expected a 3-element array");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

DirectionSignal DirectionSignal::constant(const Vec3& b) {
  require_unit(b, "inertial direction");
  DirectionSignal s;
  s.values_.push_back(b);
  return s;
}

DirectionSignal DirectionSignal::sampled(std::vector<double> times, std::vector<Vec3> values) {
  if (times.empty() || times.size() != values.size()) {
    throw InvalidArgumentError("direction series needs matching, non-empty time and value lists");
  }
  for (size_t k = 0; k < times.size(); ++k) {
    require_unit(values[k], "direction sample");
    if (k > 0 && !(times[k] > times[k - 1])) {
      throw DataError("direction series timestamps must be strictly increasing (sample " +
                      std::to_string(k) + ")");
    }
  }
  DirectionSignal s;
  s.times_ = std::move(times);
  s.values_ = std::move(values);
  return s;
}

Vec3 DirectionSignal::at(double t) const {
  if (is_constant()) return values_.front();
  if (t < times_.front() || t > times_.back()) {
    throw DataError("direction series [" + std::to_string(times_.front()) + ", " +
                    std::to_string(times_.back()) + "] does not cover t = " + std::to_string(t));
  }
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.end()) return values_.back();
  const size_t hi = static_cast<size_t>(it - times_.begin());
  const size_t lo = hi - 1;
  const double alpha = (t - times_[lo]) / (times_[hi] - times_[lo]);
  const Vec3 v = (1.0 - alpha) * values_[lo] + alpha * values_[hi];
  const double n = v.norm();
  if (n < 1e-12) {
    throw DataError("direction series interpolates through zero near t = " + std::to_string(t));
  }
  return v / n;
}

ScalarChannel::ScalarChannel(const Vec3& a_in, DirectionSignal b_in) : a(a_in), b(std::move(b_in)) {
  require_unit(a, "body direction a");
}

ScalarChannel ScalarChannel::unnormalized(const Vec3& a, DirectionSignal b) {
  if (!a.allFinite()) throw InvalidArgumentError("body direction a must be finite");
  return ScalarChannel(a, std::move(b), Raw{});
}

MeasurementConfig::MeasurementConfig(std::string name, std::vector<ScalarChannel> channels)
    : name_(std::move(name)), channels_(std::move(channels)) {
  if (channels_.empty()) {
    throw InvalidArgumentError("measurement configuration needs at least one channel");
  }
}

Preset parse_preset(std::string_view name) {
  if (name == "six") return Preset::Six;
  if (name == "four") return Preset::Four;
  if (name == "three") return Preset::Three;
  if (name == "two") return Preset::Two;
  throw InvalidArgumentError("unknown measurement configuration '" + std::string(name) +
                             "' (expected six, four, three or two)");
}

std::string_view preset_name(Preset p) {
  switch (p) {
    case Preset::Six: return "six";
    case Preset::Four: return "four";
    case Preset::Three: return "three";
    case Preset::Two: return "two";
  }
  return "";
}

PresetAxes preset_axes(Preset p) {
  switch (p) {
    case Preset::Six: return {{0, 1, 2}, {0, 1, 2}};
    case Preset::Four: return {{1, 2}, {0, 1}};
    case Preset::Three: return {{1, 2}, {1}};
    case Preset::Two: return {{1}, {1}};
  }
  return {};
}

MeasurementConfig preset_config(Preset p, const Rotation& r_imu, const Vec3& m0) {
  require_unit(m0, "magnetic reference m0");
  const PresetAxes axes = preset_axes(p);
  const auto gravity = DirectionSignal::constant(Vec3::UnitZ());
  const auto magnetic = DirectionSignal::constant(m0);
  std::vector<ScalarChannel> channels;
  for (int k : axes.acc) channels.emplace_back(r_imu * Vec3::Unit(k), gravity);
  for (int k : axes.mag) channels.emplace_back(r_imu * Vec3::Unit(k), magnetic);
  return MeasurementConfig(std::string(preset_name(p)), std::move(channels));
}

MeasurementConfig preset_config(std::string_view name, const Rotation& r_imu, const Vec3& m0) {
  return preset_config(parse_preset(name), r_imu, m0);
}

VecX predict_outputs(const Rotation& r, const MeasurementConfig& cfg, double t) {
  VecX y(cfg.size());
  for (int i = 0; i < cfg.size(); ++i) {
    const ScalarChannel& ch = cfg[i];
    y(i) = ch.a.dot(r.matrix().transpose() * ch.b.at(t));
  }
  return y;
}

VecX output_error(const Rotation& r_hat, const MeasurementConfig& cfg, double t, const VecX& y_meas) {
  if (y_meas.size() != cfg.size()) {
    throw InvalidArgumentError("output_error: expected " + std::to_string(cfg.size()) +
                               " measurements, got " + std::to_string(y_meas.size()));
  }
  return predict_outputs(r_hat, cfg, t) - y_meas;
}

Row3 c_row(const Rotation& r_hat, const ScalarChannel& ch, double t) {
  return ch.a.transpose() * r_hat.matrix().transpose() * skew(ch.b.at(t));
}

MatX build_c(const Rotation& r_hat, const MeasurementConfig& cfg, double t, bool with_bias) {
  MatX c = MatX::Zero(cfg.size(), with_bias ? 6 : 3);
  for (int i = 0; i < cfg.size(); ++i) {
    c.block<1, 3>(i, 0) = c_row(r_hat, cfg[i], t);
  }
  return c;
}

nlohmann::json config_to_json(const MeasurementConfig& cfg) {
  nlohmann::json channels = nlohmann::json::array();
  for (const ScalarChannel& ch : cfg.channels()) {
    nlohmann::json b;
    if (ch.b.is_constant()) {
      const Vec3 v = ch.b.at(0.0);
      b["const"] = {v.x(), v.y(), v.z()};
    } else if (ch.b.source()) {
      b["series"] = *ch.b.source();
    } else {
      throw InvalidArgumentError("sampled direction without a source file cannot be serialized");
    }
    channels.push_back({{"a", {ch.a.x(), ch.a.y(), ch.a.z()}}, {"b", b}});
  }
  return {{"name", cfg.name()}, {"channels", channels}};
}

MeasurementConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  try {
    std::vector<ScalarChannel> channels;
    for (const auto& cj : j.at("channels")) {
      const Vec3 a = vec3_from_json(cj.at("a"));
      const auto& bj = cj.at("b");
      if (bj.contains("const")) {
        channels.emplace_back(a, DirectionSignal::constant(vec3_from_json(bj.at("const"))));
      } else if (bj.contains("series")) {
        const std::string rel = bj.at("series").get<std::string>();
        DirectionSignal s = load_direction_series(base_dir / rel);
        s.set_source(rel);
        channels.emplace_back(a, std::move(s));
      } else {
        throw InvalidArgumentError("channel direction needs 'const' or 'series'");
      }
    }
    return MeasurementConfig(j.at("name").get<std::string>(), std::move(channels));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgumentError(std::string("malformed measurement configuration: ") + e.what());
  }
}

DirectionSignal load_direction_series(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open direction series " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> times;
  std::vector<Vec3> values;
  size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double t, x, y, z;
    if (!(ss >> t >> x >> y >> z)) {
      throw DataError(path.string() + ": malformed row " + std::to_string(row));
    }
    times.push_back(t);
    values.emplace_back(x, y, z);
  }
  return DirectionSignal::sampled(std::move(times), std::move(values));
}

}  // namespace scalar_att
