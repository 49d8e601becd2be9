#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "scalar_att/errors.hpp"
#include "scalar_att/observability.hpp"

using namespace scalar_att;
using scalar_att::testing::random_smooth_trajectory;
using scalar_att::testing::static_three_config;
using scalar_att::testing::static_trajectory;

namespace {

constexpr double kPi = std::numbers::pi;

MeasurementConfig preset(Preset p) { return preset_config(p, Rotation(), default_m0()); }

MeasurementConfig single(const Vec3& a, const Vec3& b) {
  return MeasurementConfig("single", {ScalarChannel::unnormalized(a, DirectionSignal::constant(b))});
}

TrueTrajectory constant_omega(double duration = 10.0) {
  TrajectorySpec spec = preset_trajectory("constant_omega");
  spec.duration = duration;
  return generate(spec, preset(Preset::Two)).truth;
}

// RK4 integration of dPhi/ds = A*(s) Phi with A* = [[0, R(s)], [0, 0]].
Mat6 rk4_transition(const TrueTrajectory& traj, double t, double s, int steps) {
  const auto a = [&](double u) {
    Mat6 m = Mat6::Zero();
    m.topRightCorner<3, 3>() = traj.rotation_at(std::min(u, traj.end())).matrix();
    return m;
  };
  Mat6 phi = Mat6::Identity();
  const double h = (s - t) / steps;
  for (int k = 0; k < steps; ++k) {
    const double u = t + k * h;
    const Mat6 k1 = a(u) * phi;
    const Mat6 k2 = a(u + h / 2) * (phi + h / 2 * k1);
    const Mat6 k3 = a(u + h / 2) * (phi + h / 2 * k2);
    const Mat6 k4 = a(u + h) * (phi + h * k3);
    phi += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return phi;
}

}  // namespace

TEST(TrueTrajectory, InterpolationAndCoverage) {
  const TrueTrajectory traj({0.0, 1.0}, {Rotation(), rot_z(0.4)}, {Vec3::Zero(), Vec3(0, 0, 2)});
  EXPECT_NEAR(angular_distance(traj.rotation_at(0.5), rot_z(0.2)), 0.0, 1e-15);
  EXPECT_LT((traj.omega_at(0.25) - Vec3(0, 0, 0.5)).norm(), 1e-15);
  EXPECT_THROW(traj.rotation_at(1.5), DataError);
  EXPECT_THROW(TrueTrajectory({0.0}, {Rotation()}, {Vec3::Zero()}), InvalidArgumentError);
  EXPECT_THROW(TrueTrajectory({0.0, 0.0}, {Rotation(), Rotation()}, {Vec3::Zero(), Vec3::Zero()}), DataError);
}

TEST(TransitionMatrix, ClosedFormCases) {
  const TrueTrajectory st = static_trajectory(Rotation(), 4.0);
  EXPECT_TRUE(transition_matrix(st, 1.0, 1.0).isIdentity());
  const Mat6 phi = transition_matrix(st, 0.5, 2.25);
  EXPECT_LT((phi.topRightCorner<3, 3>() - 1.75 * Mat3::Identity()).norm(), 1e-14);
  EXPECT_TRUE((phi.bottomLeftCorner<3, 3>().isZero()));
  EXPECT_THROW(transition_matrix(st, 3.0, 5.0), DataError);
}

TEST(TransitionMatrix, MatchesOdeIntegration) {
  for (std::uint64_t seed = 100; seed < 103; ++seed) {
    const TrueTrajectory traj = random_smooth_trajectory(seed, 3.0, 2000.0);
    const Mat6 closed = transition_matrix(traj, 0.3, 2.3);
    const Mat6 ode = rk4_transition(traj, 0.3, 2.3, 4000);
    EXPECT_LT((closed - ode).cwiseAbs().maxCoeff(), 1e-6) << "seed " << seed;
  }
}

TEST(TransitionMatrix, ConstantRateClosedForm) {
  // R(s) = exp(s w), int_0^T R = T I + (1 - cos wT)/w^2 W + (T - sin(wT)/w)/w^2 W^2 with W = skew(w).
  const TrueTrajectory traj = constant_omega(3.0);
  const Vec3 w(0.3, 0, 0);
  const double th = w.norm(), T = 2.0;
  const Mat3 k = skew(w);
  const Mat3 exact = T * Mat3::Identity() + (1 - std::cos(th * T)) / (th * th) * k +
                     (T - std::sin(th * T) / th) / (th * th) * k * k;
  EXPECT_LT((transition_matrix(traj, 0.0, T).topRightCorner<3, 3>() - exact).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(GramianAttitude, SingleChannelStatic) {
  const TrueTrajectory st = static_trajectory(Rotation());
  const GramianReport r = gramian_attitude(st, single(Vec3::UnitX(), Vec3::UnitZ()), Window{0.0, 2.0, 101});
  EXPECT_LT((r.w - Vec3(0, 1, 0).asDiagonal().toDenseMatrix()).norm(), 1e-14);
  EXPECT_NEAR(r.lambda_min, 0.0, 1e-15);
  EXPECT_EQ(r.verdict, Verdict::NotObservable);
  EXPECT_EQ(r.condition, "attitude_gramian");
}

TEST(GramianAttitude, StaticThreeChannelIsObservable) {
  const GramianReport r = gramian_attitude(static_trajectory(Rotation()), static_three_config(), Window{});
  EXPECT_GT(r.lambda_min, 0.1);
  EXPECT_EQ(r.verdict, Verdict::Observable);
}

TEST(GramianAttitude, QuadraticHomogeneityAndMonotonicity) {
  const TrueTrajectory traj = random_smooth_trajectory(7);
  const Window w{0.5, 2.0, 201};
  const Vec3 a = Vec3(1, 2, -1).normalized(), b = Vec3(0.3, -0.1, 0.9).normalized();
  const GramianReport base = gramian_attitude(traj, single(a, b), w);
  const GramianReport doubled = gramian_attitude(traj, single(2 * a, b), w);
  EXPECT_LT((doubled.w - 4 * base.w).norm(), 1e-13 * base.w.norm());

  const GramianReport three = gramian_attitude(traj, preset(Preset::Three), w);
  const GramianReport four = gramian_attitude(traj, preset(Preset::Four), w);
  const GramianReport six = gramian_attitude(traj, preset(Preset::Six), w);
  EXPECT_LE(gramian_attitude(traj, preset(Preset::Two), w).lambda_min, three.lambda_min + 1e-15);
  EXPECT_LE(three.lambda_min, four.lambda_min + 1e-15);
  EXPECT_LE(four.lambda_min, six.lambda_min + 1e-15);
}

TEST(GramianFull, BlocksAndSymmetry) {
  const TrueTrajectory traj = random_smooth_trajectory(8);
  const Window w{0.4, 2.0, 301};
  const MeasurementConfig cfg = preset(Preset::Four);
  const FullGramian full = gramian_full(traj, cfg, w);
  const GramianReport att = gramian_attitude(traj, cfg, w);
  EXPECT_LE((full.w_attitude - att.w).cwiseAbs().maxCoeff(), 1e-15 * att.w.norm());
  EXPECT_EQ(full.report.w, full.report.w.transpose());
  EXPECT_GE(full.report.lambda_min, -1e-12);
  EXPECT_LE(full.report.lambda_min, full.report.lambda_max);
  EXPECT_EQ(full.report.w.rows(), 6);
}

TEST(GramianFull, BiasObservabilityAtRest) {
  const Window w{0.0, 2.0, 201};
  const TrueTrajectory st = static_trajectory(exp_so3(Vec3(0.2, -0.1, 0.4)));
  EXPECT_EQ(gramian_full(st, preset(Preset::Two), w).report.verdict, Verdict::NotObservable);
  EXPECT_EQ(gramian_full(constant_omega(), preset(Preset::Two), w).report.verdict, Verdict::NotObservable);
  // With a rank-3 attitude block the drift d (s - t) is seen directly, so
  // the bias is observable even without motion.
  const FullGramian six = gramian_full(st, preset(Preset::Six), w);
  EXPECT_EQ(six.report.verdict, Verdict::Observable);
}

TEST(Lemma2, TumblingAndConstantRate) {
  const Window w{0.0, 2.0, 401};
  const TrueTrajectory tumble = generate(preset_trajectory("pe_tumble"), preset(Preset::Two)).truth;
  EXPECT_EQ(lemma2_condition(tumble, preset(Preset::Two), w).verdict, Verdict::Observable);
  const TrueTrajectory constant = constant_omega();
  EXPECT_EQ(gramian_attitude(constant, preset(Preset::Two), w).verdict, Verdict::Observable);
  EXPECT_EQ(lemma2_condition(constant, preset(Preset::Two), w).verdict, Verdict::NotObservable);
  EXPECT_THROW(lemma2_condition(static_trajectory(Rotation()), preset(Preset::Two), w), InvalidArgumentError);
}

TEST(Schur, IdentityAndGridRefinement) {
  const TrueTrajectory traj = random_smooth_trajectory(9);
  for (Preset p : {Preset::Six, Preset::Four, Preset::Three, Preset::Two}) {
    const SchurCheck s = schur_check(traj, preset(p), Window{0.5, 2.0, 401});
    EXPECT_LE(s.residual, 1e-8);
    EXPECT_LE(s.det_relative_error, 1e-6);
  }
  // Both sides move together when the grid is refined.
  const SchurCheck coarse = schur_check(traj, preset(Preset::Six), Window{0.5, 2.0, 101});
  const SchurCheck fine = schur_check(traj, preset(Preset::Six), Window{0.5, 2.0, 201});
  EXPECT_LE(coarse.residual, 1e-8);
  EXPECT_LE(fine.residual, 1e-8);
  EXPECT_NEAR(coarse.det_schur, fine.det_schur, 1e-3 * std::abs(fine.det_schur));
}

TEST(PeClassify, ClosedForms) {
  const PEClassification constant = pe_classify([](double) { return Vec3(0, 0.6, 0.8); }, Window{0.0, 2.0, 101});
  EXPECT_EQ(constant.cls, PEClass::None);
  EXPECT_NEAR(constant.eigenvalues(2), 1.0, 1e-14);

  const double f = 0.5;
  const PEClassification circle = pe_classify(
      [&](double s) { return Vec3(std::cos(2 * kPi * f * s), std::sin(2 * kPi * f * s), 0.0); },
      Window{0.0, 4.0, 801});
  EXPECT_EQ(circle.cls, PEClass::Weak);
  EXPECT_NEAR(circle.eigenvalues(0), 0.0, 1e-3);
  EXPECT_NEAR(circle.eigenvalues(1), 0.5, 1e-3);
  EXPECT_NEAR(circle.eigenvalues(2), 0.5, 1e-3);

  const PEClassification lissajous = pe_classify(
      [](double s) { return Vec3(std::sin(1.1 * s), std::sin(1.7 * s + 1), std::cos(0.7 * s)).normalized(); },
      Window{0.0, 20.0, 2001});
  EXPECT_EQ(lissajous.cls, PEClass::Strong);
}

TEST(PeClassify, SampledOverload) {
  std::vector<double> t;
  std::vector<Vec3> a;
  for (int k = 0; k <= 2000; ++k) {
    t.push_back(k * 0.002);
    a.emplace_back(std::cos(kPi * t.back()), std::sin(kPi * t.back()), 0.0);
  }
  const PEClassification c = pe_classify(t, a, Window{0.0, 4.0, 801});
  EXPECT_EQ(c.cls, PEClass::Weak);
  EXPECT_NEAR(c.eigenvalues(1), 0.5, 1e-3);
  EXPECT_THROW(pe_classify(t, a, Window{2.0, 4.0, 801}), DataError);
}

TEST(Corollary1, StaticThreeChannelCertifiesByDeterminants) {
  const TrueTrajectory st = static_trajectory(Rotation());
  const Corollary1Report r = corollary1_check(st, static_three_config(), Window{});
  ASSERT_EQ(r.subcases.size(), 2u);
  EXPECT_EQ(r.subcases[1].id, "2.i*");
  EXPECT_TRUE(r.subcases[1].applicable);
  EXPECT_TRUE(r.subcases[1].certified);
  EXPECT_EQ(r.verdict, Verdict::Observable);
  EXPECT_GT(r.gramian_lambda_min, 0.0);
  // Hand determinants: det[e1 e2 e3] = 1, det[e1 e3 b2] = -1/sqrt 2.
  EXPECT_NE(r.subcases[1].detail.find("1, -0.707107"), std::string::npos) << r.subcases[1].detail;
}

TEST(Corollary1, StaticTwoChannelCertifiesNothing) {
  const Corollary1Report r = corollary1_check(static_trajectory(exp_so3(Vec3(0.2, 0.1, 0.3))), preset(Preset::Two),
                                              Window{});
  EXPECT_TRUE(r.certified_by.empty());
  EXPECT_EQ(r.verdict, Verdict::NotObservable);
  EXPECT_EQ(r.pe[0].cls, PEClass::None);
}

TEST(Corollary1, TumblingTwoChannel) {
  const TrueTrajectory tumble = generate(preset_trajectory("pe_tumble"), preset(Preset::Two)).truth;
  const Corollary1Report r = corollary1_check(tumble, preset(Preset::Two), Window{0.0, 10.0, 2001});
  EXPECT_EQ(r.pe[0].cls, PEClass::Strong);
  EXPECT_EQ(r.verdict, Verdict::Observable);
  EXPECT_EQ(r.certified_by.front(), "1.i");
  EXPECT_GT(r.gramian_lambda_min, 0.0);
}

TEST(Corollary1, ShapeMismatch) {
  const TrueTrajectory st = static_trajectory(Rotation());
  EXPECT_THROW(corollary1_check(st, preset(Preset::Six), Window{}), InvalidArgumentError);
  const MeasurementConfig three("t", {ScalarChannel(Vec3::UnitX(), DirectionSignal::constant(default_m0())),
                                      ScalarChannel(Vec3::UnitY(), DirectionSignal::constant(Vec3::UnitZ())),
                                      ScalarChannel(Vec3::UnitX(), DirectionSignal::constant(Vec3::UnitZ()))});
  EXPECT_THROW(corollary1_check(st, three, Window{}), InvalidArgumentError);
  EXPECT_NO_THROW(corollary1_check(st, preset(Preset::Three), Window{}));
  const MeasurementConfig collinear("c", {ScalarChannel(Vec3::UnitX(), DirectionSignal::constant(Vec3::UnitZ())),
                                          ScalarChannel(Vec3::UnitY(), DirectionSignal::constant(-Vec3::UnitZ()))});
  EXPECT_THROW(corollary1_check(st, collinear, Window{}), InvalidArgumentError);
}

TEST(Corollary2, ClosedForms) {
  const GramianReport constant = corollary2_check([](double) { return Vec3(0.3, 0, 0); }, Window{0, 2, 101});
  EXPECT_NEAR(constant.lambda_min, 0.0, 1e-15);
  EXPECT_EQ(constant.verdict, Verdict::NotObservable);

  const GramianReport circle =
      corollary2_check([](double s) { return Vec3(std::sin(s), std::cos(s), 0); }, Window{0, 2 * kPi, 2001});
  EXPECT_LT((circle.w - Vec3(0.5, 0.5, 1.0).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(circle.lambda_min, 0.5, 1e-12);
  EXPECT_EQ(circle.verdict, Verdict::Observable);

  EXPECT_EQ(corollary2_check(static_trajectory(Rotation()), Window{}).verdict, Verdict::NotObservable);
  EXPECT_EQ(corollary2_check(constant_omega(), Window{}).verdict, Verdict::NotObservable);
}

TEST(Corollary2, ImpliesBiasConditionOnTumbles) {
  const MeasurementConfig two = preset(Preset::Two);
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const TrueTrajectory traj = random_smooth_trajectory(seed, 8.0, 500.0);
    for (double t0 : {0.0, 3.0}) {
      const Window w{t0, 4.0, 401};
      if (corollary2_check(traj, w).verdict != Verdict::Observable) continue;
      if (gramian_attitude(traj, two, w).verdict != Verdict::Observable) continue;
      EXPECT_EQ(lemma2_condition(traj, two, w).verdict, Verdict::Observable) << seed << " " << t0;
    }
  }
}

TEST(Reports, JsonSchema) {
  const GramianReport r = gramian_attitude(static_trajectory(Rotation()), static_three_config(), Window{});
  const nlohmann::json j = to_json(r);
  for (const char* k : {"condition", "window", "lambda_min", "lambda_max", "threshold", "verdict"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
  EXPECT_EQ(j["verdict"], "observable");
  const nlohmann::json c = to_json(corollary1_check(static_trajectory(Rotation()), static_three_config(), Window{}));
  EXPECT_EQ(c["certified_by"], nlohmann::json::array({"2.i", "2.i*"}));
}

TEST(Window, Validation) {
  EXPECT_THROW((Window{0.0, 0.0, 100}).validate(), InvalidArgumentError);
  EXPECT_THROW((Window{0.0, 1.0, 8}).validate(), InvalidArgumentError);
  EXPECT_THROW(gramian_attitude(static_trajectory(Rotation()), static_three_config(), Window{3.0, 2.0, 100}),
               DataError);
}
