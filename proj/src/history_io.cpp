#include "scalar_att/history_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <string>

#include "scalar_att/csv.hpp"
#include "scalar_att/errors.hpp"

namespace scalar_att {


void write_history_csv(std::ostream& out, const RunHistory& history, std::span<const Rotation> truth) {
  const size_t n = history.output_errors.size();
  if (!truth.empty() && truth.size() < n) {
    throw InvalidArgumentError("ground truth shorter than the run history");
  }
  const long m = n > 0 ? history.output_errors.front().size() : 0;
  const bool with_truth = !truth.empty();
  constexpr double kDeg = 180.0 / std::numbers::pi;

  out << "t,q0,q1,q2,q3,roll_deg,pitch_deg,yaw_deg,dhat_x,dhat_y,dhat_z,";
  if (with_truth) out << "theta_err_deg,";
  out << "p_trace";
  for (long i = 0; i < m; ++i) out << ",ytilde_" << (i + 1);
  out << '\n';

  for (size_t k = 0; k < n; ++k) {
    const ObserverState& s = history.states[k];
    const UnitQuaternion q = to_quaternion(s.r_hat);
    const EulerZYX e = euler_zyx(s.r_hat);
    out << csv::format(s.t) << ',' << csv::format(q.w) << ',' << csv::format(q.v.x()) << ','
        << csv::format(q.v.y()) << ',' << csv::format(q.v.z()) << ',' << csv::format(e.roll * kDeg)
        << ',' << csv::format(e.pitch * kDeg) << ',' << csv::format(e.yaw * kDeg) << ','
        << csv::format(s.d_hat.x()) << ',' << csv::format(s.d_hat.y()) << ','
        << csv::format(s.d_hat.z()) << ',';
    if (with_truth) out << csv::format(angular_distance(s.r_hat, truth[k]) * kDeg) << ',';
    out << csv::format(s.p.size() > 0 ? s.p.trace() : 0.0);
    const VecX& yt = history.output_errors[k];
    for (long i = 0; i < yt.size(); ++i) out << ',' << csv::format(yt(i));
    out << '\n';
  }
}

EstimatedTrajectory read_history_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open history file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty history file");
  std::map<std::string, size_t, std::less<>> col;
  {
    const auto fields = csv::split(line);
    for (size_t i = 0; i < fields.size(); ++i) col.emplace(std::string(fields[i]), i);
  }
  const char* required[] = {"t", "q0", "q1", "q2", "q3", "dhat_x", "dhat_y", "dhat_z"};
  for (const char* name : required) {
    if (!col.count(name)) throw DataError(path.string() + ": missing column '" + name + "'");
  }
  EstimatedTrajectory traj;
  size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto f = csv::split(line);
    double v[8];
    for (int i = 0; i < 8; ++i) {
      const size_t c = col.at(required[i]);
      if (c >= f.size() || !csv::parse(f[c], v[i]) || !std::isfinite(v[i])) {
        throw DataError(path.string() + ": malformed row " + std::to_string(row));
      }
    }
    traj.t.push_back(v[0]);
    traj.r.push_back(from_quaternion(UnitQuaternion::normalized(v[1], Vec3(v[2], v[3], v[4]))));
    traj.d_hat.emplace_back(v[5], v[6], v[7]);
  }
  return traj;
}

}  // namespace scalar_att
