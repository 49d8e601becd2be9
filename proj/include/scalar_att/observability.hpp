#pragma once

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "scalar_att/measurement.hpp"
#include "scalar_att/observer.hpp"
#include "scalar_att/so3.hpp"

namespace scalar_att {

/// Averaging window [t, t + delta] sampled with n_quad trapezoid nodes.
struct Window {
  double t = 0.0;
  double delta = 2.0;
  int n_quad = 401;

  void validate() const;
};

/// Sampled ground truth R(t), Omega(t). Between samples the attitude is
/// interpolated along the geodesic and the angular velocity linearly.
class TrueTrajectory {
 public:
  TrueTrajectory(std::vector<double> times, std::vector<Rotation> rotations, std::vector<Vec3> omegas);

  size_t size() const { return times_.size(); }
  double start() const { return times_.front(); }
  double end() const { return times_.back(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Rotation>& rotations() const { return rotations_; }
  const std::vector<Vec3>& omegas() const { return omegas_; }

  Rotation rotation_at(double s) const;
  Vec3 omega_at(double s) const;

  /// Throws DataError unless [a, b] lies inside the sampled span.
  void require_coverage(double a, double b) const;

 private:
  size_t interval(double s) const;

  std::vector<double> times_;
  std::vector<Rotation> rotations_;
  std::vector<Vec3> omegas_;
};

enum class Verdict { Observable, NotObservable };

const char* verdict_name(Verdict v);

struct GramianReport {
  std::string condition;
  Window window;
  MatX w;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double threshold = 0.0;
  Verdict verdict = Verdict::NotObservable;  // Observable iff lambda_min > threshold
};

struct FullGramian {
  GramianReport report;  // 6x6 [[W, M], [M^T, H]]
  Mat3 w_attitude;
  Mat3 m;
  Mat3 h;
};

/// Closed-form transition matrix of the linearized biased error system,
/// [[I, int_t^s R], [0, I]], with the integral taken by the trapezoid rule on
/// the trajectory's native samples (ends interpolated).
Mat6 transition_matrix(const TrueTrajectory& traj, double t, double s);

/// W = (1/delta) int sum_i C_i^T C_i ds with C_i(s) = a_i^T R(s)^T skew(b_i(s)).
GramianReport gramian_attitude(const TrueTrajectory& traj, const MeasurementConfig& cfg,
                               const Window& window, double mu = 1e-4);

/// Observability Gramian of the full 6-state error system.
FullGramian gramian_full(const TrueTrajectory& traj, const MeasurementConfig& cfg,
                         const Window& window, double mu = 1e-4);

/// Bias observability condition: Gramian of C_i (int_t^s R - rho) with
/// rho = W^{-1} M. Throws InvalidArgumentError when the attitude Gramian is
/// singular (the attitude condition must hold first).
GramianReport lemma2_condition(const TrueTrajectory& traj, const MeasurementConfig& cfg,
                               const Window& window, double mu = 1e-4);

struct SchurCheck {
  double residual = 0.0;          // |W_bar - (H - M^T W^{-1} M)| / |H|
  double det_full = 0.0;
  double det_attitude = 0.0;
  double det_schur = 0.0;
  double det_relative_error = 0.0;  // |det_full - det_attitude det_schur| / |det_full|
};

SchurCheck schur_check(const TrueTrajectory& traj, const MeasurementConfig& cfg, const Window& window);

enum class PEClass { Strong, Weak, None };

const char* pe_class_name(PEClass c);

struct PEClassification {
  Mat3 u;
  Vec3 eigenvalues;  // ascending
  PEClass cls = PEClass::None;
  double beta = 0.0;
};

using VectorFn = std::function<Vec3(double)>;

/// U = (1/delta) int alpha alpha^T ds; strong if lambda_1 >= beta, weak if
/// lambda_2 >= beta, none otherwise.
PEClassification pe_classify(const VectorFn& alpha, const Window& window, double beta = 1e-3);
PEClassification pe_classify(std::span<const double> times, std::span<const Vec3> alpha,
                             const Window& window, double beta = 1e-3);

struct Corollary1Thresholds {
  double beta = 1e-3;
  double delta1 = 1e-4;
  double det_tolerance = 1e-6;     // "non-zero" determinant for the static case
  double static_tolerance = 1e-9;  // max attitude excursion (rad) to count as constant
  double mu = 1e-4;
};

struct SubcaseResult {
  std::string id;  // "1.i", "1.ii", "1.iii", "2.i", "2.i*"
  bool applicable = false;
  bool certified = false;
  std::string detail;
};

/// Sufficient conditions for two- and three-channel configurations with
/// constant directions.
struct Corollary1Report {
  int m = 0;
  std::vector<PEClassification> pe;  // of R(s) a_i per channel
  std::vector<SubcaseResult> subcases;
  std::vector<std::string> certified_by;
  double gramian_lambda_min = 0.0;  // direct attitude Gramian, for comparison
  Verdict verdict = Verdict::NotObservable;
};

/// Throws InvalidArgumentError when the configuration has no matching shape:
/// m = 2 with non-collinear b, or m = 3 with b1 = b2 and b3 non-collinear.
Corollary1Report corollary1_check(const TrueTrajectory& traj, const MeasurementConfig& cfg,
                                  const Window& window, const Corollary1Thresholds& th = {});

/// lambda_min of (1/delta) int skew(Omega)^T skew(Omega) ds, i.e. the minimum
/// over unit v of the windowed mean of |Omega x v|^2.
GramianReport corollary2_check(const TrueTrajectory& traj, const Window& window, double mu = 1e-4);
GramianReport corollary2_check(const VectorFn& omega, const Window& window, double mu = 1e-4);

nlohmann::json to_json(const GramianReport& r);
nlohmann::json to_json(const SchurCheck& r);
nlohmann::json to_json(const Corollary1Report& r);

}  // namespace scalar_att
