#include "scalar_att/observability.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "scalar_att/errors.hpp"

namespace scalar_att {

namespace {

// Nodes, trapezoid weights, attitude and prefix integral int_t^{s_j} R on one
// window. Every Gramian of a window is assembled from this single table.
struct Grid {
  std::vector<double> s;
  std::vector<double> w;
  std::vector<Rotation> rot;
  std::vector<Mat3> r;
  std::vector<Mat3> prefix;
};

std::vector<double> nodes(const Window& window) {
  window.validate();
  const int n = window.n_quad;
  std::vector<double> s(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) s[static_cast<size_t>(j)] = window.t + window.delta * j / (n - 1);
  s.back() = window.t + window.delta;
  return s;
}

std::vector<double> trapezoid_weights(const Window& window) {
  const int n = window.n_quad;
  const double h = window.delta / (n - 1);
  std::vector<double> w(static_cast<size_t>(n), h);
  w.front() = w.back() = 0.5 * h;
  return w;
}

Grid make_grid(const TrueTrajectory& traj, const Window& window) {
  Grid g;
  g.s = nodes(window);
  g.w = trapezoid_weights(window);
  traj.require_coverage(g.s.front(), g.s.back());
  g.r.reserve(g.s.size());
  g.prefix.reserve(g.s.size());
  for (size_t j = 0; j < g.s.size(); ++j) {
    g.rot.push_back(traj.rotation_at(g.s[j]));
    g.r.push_back(g.rot.back().matrix());
    if (j == 0) {
      g.prefix.push_back(Mat3::Zero());
    } else {
      const double h = g.s[j] - g.s[j - 1];
      g.prefix.push_back(g.prefix.back() + 0.5 * h * (g.r[j - 1] + g.r[j]));
    }
  }
  return g;
}

// sum_i C_i^T C_i at node j.
Mat3 output_information(const Mat3& r, const MeasurementConfig& cfg, double s) {
  Mat3 g = Mat3::Zero();
  for (const ScalarChannel& ch : cfg.channels()) {
    const Row3 c = ch.a.transpose() * r.transpose() * skew(ch.b.at(s));
    g.noalias() += c.transpose() * c;
  }
  return g;
}

std::vector<Mat3> information_table(const Grid& g, const MeasurementConfig& cfg) {
  std::vector<Mat3> out;
  out.reserve(g.s.size());
  for (size_t j = 0; j < g.s.size(); ++j) out.push_back(output_information(g.r[j], cfg, g.s[j]));
  return out;
}

MatX symmetrized(const MatX& m) { return 0.5 * (m + m.transpose()); }

GramianReport make_report(std::string condition, const Window& window, const MatX& w, double mu) {
  GramianReport rep;
  rep.condition = std::move(condition);
  rep.window = window;
  rep.w = symmetrized(w);
  Eigen::SelfAdjointEigenSolver<MatX> es(rep.w, Eigen::EigenvaluesOnly);
  rep.lambda_min = es.eigenvalues().minCoeff();
  rep.lambda_max = es.eigenvalues().maxCoeff();
  rep.threshold = mu;
  rep.verdict = rep.lambda_min > mu ? Verdict::Observable : Verdict::NotObservable;
  return rep;
}

struct Blocks {
  Mat3 w = Mat3::Zero();
  Mat3 m = Mat3::Zero();
  Mat3 h = Mat3::Zero();
};

Blocks gramian_blocks(const Grid& g, const std::vector<Mat3>& info, double delta) {
  Blocks b;
  for (size_t j = 0; j < g.s.size(); ++j) {
    const Mat3& gi = info[j];
    const Mat3& ir = g.prefix[j];
    b.w.noalias() += g.w[j] * gi;
    b.m.noalias() += g.w[j] * gi * ir;
    b.h.noalias() += g.w[j] * ir.transpose() * gi * ir;
  }
  b.w /= delta;
  b.m /= delta;
  b.h /= delta;
  return b;
}

bool singular(const Mat3& w) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (w + w.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0) <= 1e-12 * std::max(1.0, es.eigenvalues()(2));
}

double triple(const Vec3& a, const Vec3& b, const Vec3& c) { return a.dot(b.cross(c)); }

std::string fmt(double x) {
  std::ostringstream ss;
  ss.precision(6);
  ss << x;
  return ss.str();
}

}  // namespace

void Window::validate() const {
  if (!(delta > 0.0) || !std::isfinite(t)) throw InvalidArgumentError("window delta must be positive");
  if (n_quad < 16) throw InvalidArgumentError("window needs at least 16 quadrature nodes");
}

TrueTrajectory::TrueTrajectory(std::vector<double> times, std::vector<Rotation> rotations,
                               std::vector<Vec3> omegas)
    : times_(std::move(times)), rotations_(std::move(rotations)), omegas_(std::move(omegas)) {
  if (times_.size() < 2 || rotations_.size() != times_.size() || omegas_.size() != times_.size()) {
    throw InvalidArgumentError("trajectory needs at least two samples with matching R and Omega");
  }
  for (size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1])) {
      throw DataError("trajectory time must be strictly increasing (sample " + std::to_string(k) + ")");
    }
  }
}

size_t TrueTrajectory::interval(double s) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), s);
  const size_t hi = static_cast<size_t>(std::clamp<std::ptrdiff_t>(it - times_.begin(), 1,
                                                                   static_cast<std::ptrdiff_t>(times_.size() - 1)));
  return hi - 1;
}

Rotation TrueTrajectory::rotation_at(double s) const {
  require_coverage(s, s);
  const size_t k = interval(s);
  const double alpha = std::clamp((s - times_[k]) / (times_[k + 1] - times_[k]), 0.0, 1.0);
  if (alpha == 0.0) return rotations_[k];
  if (alpha == 1.0) return rotations_[k + 1];
  const Vec3 rel = log_so3(rotations_[k].transpose() * rotations_[k + 1]);
  return rotations_[k] * exp_so3(alpha * rel);
}

Vec3 TrueTrajectory::omega_at(double s) const {
  require_coverage(s, s);
  const size_t k = interval(s);
  const double alpha = std::clamp((s - times_[k]) / (times_[k + 1] - times_[k]), 0.0, 1.0);
  return (1.0 - alpha) * omegas_[k] + alpha * omegas_[k + 1];
}

void TrueTrajectory::require_coverage(double a, double b) const {
  const double slack = 1e-9 * std::max(1.0, std::abs(times_.back()));
  if (a < times_.front() - slack || b > times_.back() + slack || a > b) {
    throw DataError("trajectory [" + std::to_string(times_.front()) + ", " +
                    std::to_string(times_.back()) + "] does not cover [" + std::to_string(a) +
                    ", " + std::to_string(b) + "]");
  }
}

const char* verdict_name(Verdict v) {
  return v == Verdict::Observable ? "observable" : "not_observable";
}

const char* pe_class_name(PEClass c) {
  switch (c) {
    case PEClass::Strong: return "strong";
    case PEClass::Weak: return "weak";
    case PEClass::None: return "none";
  }
  return "";
}

Mat6 transition_matrix(const TrueTrajectory& traj, double t, double s) {
  traj.require_coverage(t, s);
  Mat6 phi = Mat6::Identity();
  if (s == t) return phi;

  const auto& ts = traj.times();
  const auto first = std::upper_bound(ts.begin(), ts.end(), t);
  const auto last = std::lower_bound(ts.begin(), ts.end(), s);
  Mat3 integral = Mat3::Zero();
  double prev_t = t;
  Mat3 prev_r = traj.rotation_at(t).matrix();
  for (auto it = first; it < last; ++it) {
    const size_t k = static_cast<size_t>(it - ts.begin());
    const Mat3& r = traj.rotations()[k].matrix();
    integral += 0.5 * (ts[k] - prev_t) * (prev_r + r);
    prev_t = ts[k];
    prev_r = r;
  }
  integral += 0.5 * (s - prev_t) * (prev_r + traj.rotation_at(s).matrix());
  phi.topRightCorner<3, 3>() = integral;
  return phi;
}

GramianReport gramian_attitude(const TrueTrajectory& traj, const MeasurementConfig& cfg,
                               const Window& window, double mu) {
  window.validate();
  const std::vector<double> s = nodes(window);
  const std::vector<double> w = trapezoid_weights(window);
  traj.require_coverage(s.front(), s.back());
  Mat3 acc = Mat3::Zero();
  for (size_t j = 0; j < s.size(); ++j) {
    acc += w[j] * output_information(traj.rotation_at(s[j]).matrix(), cfg, s[j]);
  }
  return make_report("attitude_gramian", window, acc / window.delta, mu);
}

FullGramian gramian_full(const TrueTrajectory& traj, const MeasurementConfig& cfg,
                         const Window& window, double mu) {
  const Grid g = make_grid(traj, window);
  const std::vector<Mat3> info = information_table(g, cfg);
  // Assembled from Phi^T C^T C Phi with Phi(s, t) = [[I, int R], [0, I]].
  Mat6 acc = Mat6::Zero();
  for (size_t j = 0; j < g.s.size(); ++j) {
    Mat6 phi = Mat6::Identity();
    phi.topRightCorner<3, 3>() = g.prefix[j];
    Mat6 ctc = Mat6::Zero();
    ctc.topLeftCorner<3, 3>() = info[j];
    acc.noalias() += g.w[j] * phi.transpose() * ctc * phi;
  }
  acc /= window.delta;
  FullGramian out;
  out.report = make_report("full_gramian", window, acc, mu);
  out.w_attitude = out.report.w.topLeftCorner(3, 3);
  out.m = out.report.w.topRightCorner(3, 3);
  out.h = out.report.w.bottomRightCorner(3, 3);
  return out;
}

GramianReport lemma2_condition(const TrueTrajectory& traj, const MeasurementConfig& cfg,
                               const Window& window, double mu) {
  const Grid g = make_grid(traj, window);
  const std::vector<Mat3> info = information_table(g, cfg);
  const Blocks b = gramian_blocks(g, info, window.delta);
  if (singular(b.w)) {
    throw InvalidArgumentError(
        "bias observability check needs an invertible attitude Gramian; the attitude "
        "observability condition fails on this window");
  }
  const Mat3 rho = b.w.ldlt().solve(b.m);
  Mat3 acc = Mat3::Zero();
  for (size_t j = 0; j < g.s.size(); ++j) {
    const Mat3 shifted = g.prefix[j] - rho;
    for (const ScalarChannel& ch : cfg.channels()) {
      const Row3 c = ch.a.transpose() * g.r[j].transpose() * skew(ch.b.at(g.s[j]));
      const Row3 c_bar = c * shifted;
      acc.noalias() += g.w[j] * c_bar.transpose() * c_bar;
    }
  }
  return make_report("bias_gramian", window, acc / window.delta, mu);
}

SchurCheck schur_check(const TrueTrajectory& traj, const MeasurementConfig& cfg, const Window& window) {
  const FullGramian full = gramian_full(traj, cfg, window);
  if (singular(full.w_attitude)) {
    throw InvalidArgumentError("Schur check needs an invertible attitude Gramian");
  }
  const Mat3 schur = full.h - full.m.transpose() * full.w_attitude.ldlt().solve(full.m);
  const GramianReport bar = lemma2_condition(traj, cfg, window);

  SchurCheck out;
  const double h_norm = full.h.norm();
  out.residual = (bar.w - schur).norm() / (h_norm > 0.0 ? h_norm : 1.0);
  out.det_full = full.report.w.determinant();
  out.det_attitude = full.w_attitude.determinant();
  out.det_schur = schur.determinant();
  const double denom = std::abs(out.det_full) > 0.0 ? std::abs(out.det_full) : 1.0;
  out.det_relative_error = std::abs(out.det_full - out.det_attitude * out.det_schur) / denom;
  return out;
}

PEClassification pe_classify(const VectorFn& alpha, const Window& window, double beta) {
  const std::vector<double> s = nodes(window);
  const std::vector<double> w = trapezoid_weights(window);
  Mat3 u = Mat3::Zero();
  for (size_t j = 0; j < s.size(); ++j) {
    const Vec3 a = alpha(s[j]);
    u.noalias() += w[j] * a * a.transpose();
  }
  u /= window.delta;
  PEClassification out;
  out.u = 0.5 * (u + u.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> es(out.u, Eigen::EigenvaluesOnly);
  out.eigenvalues = es.eigenvalues();
  out.beta = beta;
  if (out.eigenvalues(0) >= beta) {
    out.cls = PEClass::Strong;
  } else if (out.eigenvalues(1) >= beta) {
    out.cls = PEClass::Weak;
  } else {
    out.cls = PEClass::None;
  }
  return out;
}

PEClassification pe_classify(std::span<const double> times, std::span<const Vec3> alpha,
                             const Window& window, double beta) {
  if (times.empty()) throw InvalidArgumentError("pe_classify: empty direction series");
  const DirectionSignal sig = DirectionSignal::sampled({times.begin(), times.end()},
                                                       {alpha.begin(), alpha.end()});
  window.validate();
  if (window.t < times.front() || window.t + window.delta > times.back() + 1e-9) {
    throw DataError("pe_classify: direction series does not cover the window");
  }
  const double end = times.back();
  return pe_classify([&](double s) { return sig.at(std::min(s, end)); }, window, beta);
}

Corollary1Report corollary1_check(const TrueTrajectory& traj, const MeasurementConfig& cfg,
                                  const Window& window, const Corollary1Thresholds& th) {
  const int m = cfg.size();
  for (const ScalarChannel& ch : cfg.channels()) {
    if (!ch.b.is_constant()) {
      throw InvalidArgumentError("sufficient-condition checks need constant inertial directions");
    }
  }
  std::vector<Vec3> a, b;
  for (const ScalarChannel& ch : cfg.channels()) {
    a.push_back(ch.a);
    b.push_back(ch.b.at(window.t));
  }
  constexpr double kCollinear = 1e-9;
  if (m == 2) {
    if (b[0].cross(b[1]).norm() <= kCollinear) {
      throw InvalidArgumentError("two-channel check needs non-collinear inertial directions");
    }
  } else if (m == 3) {
    if ((b[0] - b[1]).norm() > kCollinear || b[0].cross(b[2]).norm() <= kCollinear) {
      throw InvalidArgumentError(
          "three-channel check needs b1 = b2 and b3 non-collinear with b1");
    }
  } else {
    throw InvalidArgumentError("sufficient-condition checks cover two or three channels, got " +
                               std::to_string(m));
  }

  const Grid g = make_grid(traj, window);
  Corollary1Report rep;
  rep.m = m;
  for (int i = 0; i < m; ++i) {
    const Vec3 ai = a[static_cast<size_t>(i)];
    rep.pe.push_back(pe_classify([&](double s) { return Vec3(traj.rotation_at(s) * ai); }, window,
                                 th.beta));
  }
  // int_t^{t+delta} det(...)^2 ds on the window grid.
  const auto det_integral = [&](const std::function<double(const Mat3&)>& det) {
    double acc = 0.0;
    for (size_t j = 0; j < g.s.size(); ++j) {
      const double d = det(g.r[j]);
      acc += g.w[j] * d * d;
    }
    return acc;
  };
  const auto strong = [&](int i) { return rep.pe[static_cast<size_t>(i)].cls == PEClass::Strong; };
  const auto weak_or_better = [&](int i) { return rep.pe[static_cast<size_t>(i)].cls != PEClass::None; };

  if (m == 2) {
    const double d1 = det_integral([&](const Mat3& r) { return triple(r * a[0], b[0], b[1]); });
    const double d2 = det_integral([&](const Mat3& r) { return triple(r * a[1], b[0], b[1]); });
    const std::string dets = "det integrals (a1, a2) = (" + fmt(d1) + ", " + fmt(d2) + ")";
    SubcaseResult c1{"1.i", true, strong(0) && strong(1), "both R a_i strongly exciting"};
    SubcaseResult c2{"1.ii", true,
                     (strong(0) && d2 > th.delta1) || (strong(1) && d1 > th.delta1),
                     "one strongly exciting direction plus the other's " + dets};
    SubcaseResult c3{"1.iii", true,
                     weak_or_better(0) && weak_or_better(1) && d1 > th.delta1 && d2 > th.delta1,
                     "certified per the stated conditions (both weakly exciting, " + dets + ")"};
    rep.subcases = {c1, c2, c3};
  } else {
    const Vec3& b1 = b[0];
    const Vec3& b2 = b[2];
    const double e1 = det_integral([&](const Mat3& r) { return triple(r * a[0], r * a[1], b1); });
    const double e2 = det_integral([&](const Mat3& r) { return triple(r * a[2], b1, b2); });
    SubcaseResult c1{"2.i", true, e1 > th.delta1 && e2 > th.delta1,
                     "det integrals = (" + fmt(e1) + ", " + fmt(e2) + ")"};

    double excursion = 0.0;
    for (const Rotation& r : g.rot) excursion = std::max(excursion, angular_distance(r, g.rot.front()));
    const Mat3& r0 = g.r.front();
    const double s1 = triple(r0 * a[0], r0 * a[1], b1);
    const double s2 = triple(r0 * a[2], b1, b2);
    const bool is_static = excursion <= th.static_tolerance;
    SubcaseResult c2{"2.i*", is_static,
                     is_static && std::abs(s1) > th.det_tolerance && std::abs(s2) > th.det_tolerance,
                     "constant attitude (excursion " + fmt(excursion) + " rad), dets = (" + fmt(s1) +
                         ", " + fmt(s2) + ")"};
    rep.subcases = {c1, c2};
  }
  for (const SubcaseResult& sc : rep.subcases) {
    if (sc.certified) rep.certified_by.push_back(sc.id);
  }
  rep.verdict = rep.certified_by.empty() ? Verdict::NotObservable : Verdict::Observable;
  rep.gramian_lambda_min = gramian_attitude(traj, cfg, window, th.mu).lambda_min;
  return rep;
}

GramianReport corollary2_check(const VectorFn& omega, const Window& window, double mu) {
  const std::vector<double> s = nodes(window);
  const std::vector<double> w = trapezoid_weights(window);
  Mat3 acc = Mat3::Zero();
  for (size_t j = 0; j < s.size(); ++j) {
    const Mat3 k = skew(omega(s[j]));
    acc.noalias() += w[j] * k.transpose() * k;
  }
  return make_report("omega_excitation", window, acc / window.delta, mu);
}

GramianReport corollary2_check(const TrueTrajectory& traj, const Window& window, double mu) {
  window.validate();
  traj.require_coverage(window.t, window.t + window.delta);
  return corollary2_check([&](double s) { return traj.omega_at(std::min(s, traj.end())); }, window, mu);
}

nlohmann::json to_json(const GramianReport& r) {
  return {{"condition", r.condition},
          {"window", {{"t", r.window.t}, {"delta", r.window.delta}, {"n_quad", r.window.n_quad}}},
          {"lambda_min", r.lambda_min},
          {"lambda_max", r.lambda_max},
          {"threshold", r.threshold},
          {"verdict", verdict_name(r.verdict)}};
}

nlohmann::json to_json(const SchurCheck& r) {
  return {{"condition", "schur_identity"},
          {"residual", r.residual},
          {"det_full", r.det_full},
          {"det_attitude", r.det_attitude},
          {"det_schur", r.det_schur},
          {"det_relative_error", r.det_relative_error}};
}

nlohmann::json to_json(const Corollary1Report& r) {
  nlohmann::json pe = nlohmann::json::array();
  for (const auto& p : r.pe) {
    pe.push_back({{"eigenvalues", {p.eigenvalues(0), p.eigenvalues(1), p.eigenvalues(2)}},
                  {"class", pe_class_name(p.cls)},
                  {"beta", p.beta}});
  }
  nlohmann::json subcases = nlohmann::json::array();
  for (const auto& s : r.subcases) {
    subcases.push_back({{"subcase", s.id},
                        {"applicable", s.applicable},
                        {"certified", s.certified},
                        {"detail", s.detail}});
  }
  return {{"condition", "constant_direction_sufficient"},
          {"m", r.m},
          {"pe", pe},
          {"subcases", subcases},
          {"certified_by", r.certified_by},
          {"lambda_min", r.gramian_lambda_min},
          {"verdict", verdict_name(r.verdict)}};
}

}  // namespace scalar_att
