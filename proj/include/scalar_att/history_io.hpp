#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "scalar_att/observer.hpp"

namespace scalar_att {

/// Writes one row per input step (the estimate at the measurement time):
///   t, q0..q3, roll_deg, pitch_deg, yaw_deg, dhat_x..z, [theta_err_deg,] p_trace, ytilde_1..m
/// `truth`, when given, must hold one rotation per step.
void write_history_csv(std::ostream& out, const RunHistory& history,
                       std::span<const Rotation> truth = {});

struct EstimatedTrajectory {
  std::vector<double> t;
  std::vector<Rotation> r;
  std::vector<Vec3> d_hat;
};

/// Reads back the t, q0..q3 and dhat columns of a history file.
EstimatedTrajectory read_history_csv(const std::filesystem::path& path);

}  // namespace scalar_att
