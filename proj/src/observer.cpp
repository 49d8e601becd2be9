#include "scalar_att/observer.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Geometry>
#include <cmath>
#include <string>

#include "scalar_att/errors.hpp"

namespace scalar_att {

namespace {

void check_spd(const MatX& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InvalidArgumentError(std::string(what) + " must be a non-empty square matrix");
  }
  if (!m.allFinite() || (m - m.transpose()).norm() > 1e-10 * std::max(1.0, m.norm())) {
    throw InvalidArgumentError(std::string(what) + " must be symmetric");
  }
  Eigen::LLT<MatX> llt(m);
  if (llt.info() != Eigen::Success) {
    throw InvalidArgumentError(std::string(what) + " must be positive definite");
  }
}

bool positive_definite(const MatX& m) {
  Eigen::LLT<MatX> llt(m);
  return llt.info() == Eigen::Success;
}

// Applies the shared part of both Riccati variants once C and A are known.
StepOutcome riccati_update(const ObserverState& state, const StepInput& input,
                           const MeasurementConfig& cfg, const Gains& gains,
                           const RiccatiOptions& opts, bool biased) {
  input.validate();
  const int n = biased ? 6 : 3;
  if (state.p.rows() != n || state.p.cols() != n) {
    throw InvalidArgumentError("observer state P must be " + std::to_string(n) + "x" +
                               std::to_string(n));
  }

  const VecX y_tilde = output_error(state.r_hat, cfg, input.t, input.y);
  const MatX c = build_c(state.r_hat, cfg, input.t, biased);
  const MatX q = gains.q(input.t);
  const MatX v = gains.v(input.t);
  if (q.rows() != cfg.size()) {
    throw InvalidArgumentError("Q must be " + std::to_string(cfg.size()) + "x" +
                               std::to_string(cfg.size()));
  }
  if (v.rows() != n) {
    throw InvalidArgumentError("V must be " + std::to_string(n) + "x" + std::to_string(n));
  }

  const Innovation inn = innovation(state.p, c, q, y_tilde);
  const MatX a = biased ? MatX(build_a(state.r_hat)) : MatX(MatX::Zero(3, 3));

  StepOutcome out;
  out.innovation = inn;
  out.output_error = y_tilde;
  ObserverState& next = out.next;
  next.r_hat = exp_so3(input.dt * inn.delta_r) * state.r_hat *
               exp_so3(input.dt * (input.omega_y - state.d_hat));
  next.d_hat = biased ? Vec3(state.d_hat - input.dt * inn.delta_d) : state.d_hat;
  next.p = cre_step(state.p, a, c, q, v, input.dt, input.t);
  next.t = input.t + input.dt;
  next.steps = state.steps + 1;
  if (opts.projection_interval > 0 && next.steps % static_cast<std::uint64_t>(opts.projection_interval) == 0) {
    next.r_hat = project_to_so3(next.r_hat.matrix());
  }
  return out;
}

}  // namespace

ObserverState ObserverState::default_initial(bool biased, double t0) {
  ObserverState s;
  s.p = 0.5 * MatX::Identity(biased ? 6 : 3, biased ? 6 : 3);
  s.t = t0;
  return s;
}

Gains Gains::constant(const MatX& q, const MatX& v) {
  check_spd(q, "Q");
  check_spd(v, "V");
  Gains g;
  g.q_ = [q](double) { return q; };
  g.v_ = [v](double) { return v; };
  g.constant_ = true;
  return g;
}

Gains Gains::time_varying(MatrixFn q, MatrixFn v) {
  if (!q || !v) throw InvalidArgumentError("time-varying gains need both Q(t) and V(t)");
  Gains g;
  g.q_ = std::move(q);
  g.v_ = std::move(v);
  return g;
}

Gains Gains::defaults(int m, bool biased) {
  const int n = biased ? 6 : 3;
  return constant(0.05 * MatX::Identity(m, m), 0.005 * MatX::Identity(n, n));
}

MatX Gains::q(double t) const {
  MatX m = q_(t);
  if (!constant_) check_spd(m, "Q(t)");
  return m;
}

MatX Gains::v(double t) const {
  MatX m = v_(t);
  if (!constant_) check_spd(m, "V(t)");
  return m;
}

void StepInput::validate() const {
  if (!(dt > 0.0) || dt > kMaxDt) {
    throw InvalidArgumentError("step dt must lie in (0, " + std::to_string(kMaxDt) + "], got " +
                               std::to_string(dt));
  }
  if (!omega_y.allFinite() || !y.allFinite() || !std::isfinite(t)) {
    throw DataError("non-finite measurement at t = " + std::to_string(t));
  }
}

Mat6 build_a(const Rotation& r_hat) {
  Mat6 a = Mat6::Zero();
  a.topRightCorner<3, 3>() = r_hat.matrix();
  return a;
}

Innovation innovation(const MatX& p, const MatX& c, const MatX& q, const VecX& y_tilde) {
  if (p.rows() != c.cols() || c.rows() != q.rows() || q.cols() != y_tilde.size() ||
      (p.rows() != 3 && p.rows() != 6)) {
    throw InvalidArgumentError("innovation: dimension mismatch between P, C, Q and y");
  }
  const VecX delta = -p * (c.transpose() * (q * y_tilde));
  Innovation out;
  out.delta_r = delta.head<3>();
  if (delta.size() == 6) out.delta_d = delta.tail<3>();
  return out;
}

MatX cre_step(const MatX& p, const MatX& a, const MatX& c, const MatX& q, const MatX& v, double dt,
              double t) {
  if (!(dt > 0.0)) throw InvalidArgumentError("cre_step: dt must be positive");
  const MatX ctqc = c.transpose() * q * c;
  const auto rhs = [&](const MatX& x) -> MatX {
    return a * x + x * a.transpose() - x * ctqc * x + v;
  };
  const MatX k1 = rhs(p);
  const MatX k2 = rhs(p + 0.5 * dt * k1);
  const MatX k3 = rhs(p + 0.5 * dt * k2);
  const MatX k4 = rhs(p + dt * k3);
  MatX next = p + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  next = 0.5 * (next + next.transpose()).eval();
  if (!next.allFinite() || !positive_definite(next)) {
    throw NumericalError("Riccati matrix lost positive definiteness at t = " + std::to_string(t));
  }
  return next;
}

StepOutcome riccati_step(const ObserverState& state, const StepInput& input,
                         const MeasurementConfig& cfg, const Gains& gains,
                         const RiccatiOptions& opts) {
  return riccati_update(state, input, cfg, gains, opts, true);
}

StepOutcome riccati_step_unbiased(const ObserverState& state, const StepInput& input,
                                  const MeasurementConfig& cfg, const Gains& gains,
                                  const RiccatiOptions& opts) {
  return riccati_update(state, input, cfg, gains, opts, false);
}

StepOutcome complementary_step(const ObserverState& state, const StepInput& input,
                               const Vec3& gravity_dir, const Vec3& mag_dir,
                               const ComplementaryGains& gains) {
  input.validate();
  if (input.y.size() != 6) {
    throw InvalidArgumentError("complementary filter expects 6 outputs (acc and mag directions)");
  }
  const auto unit = [&](const Vec3& v, const char* what) -> Vec3 {
    const double n = v.norm();
    if (n < 1e-12) {
      throw DataError(std::string("zero-norm ") + what + " direction at t = " + std::to_string(input.t));
    }
    return v / n;
  };
  const Vec3 v_a = unit(input.y.head<3>(), "accelerometer");
  const Vec3 v_m = unit(input.y.tail<3>(), "magnetometer");
  const Mat3 rt = state.r_hat.matrix().transpose();
  const Vec3 va_hat = rt * gravity_dir;
  const Vec3 vm_hat = rt * mag_dir;
  const Vec3 sigma = gains.k1 * v_a.cross(va_hat) + gains.k2 * v_m.cross(vm_hat);

  StepOutcome out;
  out.innovation.delta_r = sigma;
  out.innovation.delta_d = gains.kb * sigma;
  out.output_error.resize(6);
  out.output_error << va_hat - v_a, vm_hat - v_m;
  out.next.r_hat = state.r_hat * exp_so3(input.dt * (input.omega_y - state.d_hat + sigma));
  out.next.d_hat = state.d_hat - input.dt * gains.kb * sigma;
  out.next.p = state.p;
  out.next.t = input.t + input.dt;
  out.next.steps = state.steps + 1;
  return out;
}

EstimatorKind parse_estimator(std::string_view name) {
  if (name == "riccati") return EstimatorKind::Riccati;
  if (name == "riccati-unbiased") return EstimatorKind::RiccatiUnbiased;
  if (name == "complementary") return EstimatorKind::Complementary;
  throw InvalidArgumentError("unknown observer '" + std::string(name) +
                             "' (expected riccati, riccati-unbiased or complementary)");
}

std::string_view estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Riccati: return "riccati";
    case EstimatorKind::RiccatiUnbiased: return "riccati-unbiased";
    case EstimatorKind::Complementary: return "complementary";
  }
  return "";
}

RunHistory run(const RunSettings& settings, const ObserverState& initial,
               std::span<const StepInput> inputs, const MeasurementConfig& cfg) {
  const bool biased = settings.kind == EstimatorKind::Riccati;
  const Gains gains = settings.gains ? *settings.gains : Gains::defaults(cfg.size(), biased);

  RunHistory h;
  h.states.reserve(inputs.size() + 1);
  h.innovations.reserve(inputs.size());
  h.output_errors.reserve(inputs.size());
  h.states.push_back(initial);

  for (size_t k = 0; k < inputs.size(); ++k) {
    if (k > 0 && !(inputs[k].t > inputs[k - 1].t)) {
      throw DataError("step " + std::to_string(k) + ": timestamps must be strictly increasing");
    }
    try {
      const ObserverState& s = h.states.back();
      StepOutcome o;
      switch (settings.kind) {
        case EstimatorKind::Riccati:
          o = riccati_step(s, inputs[k], cfg, gains, settings.options);
          break;
        case EstimatorKind::RiccatiUnbiased:
          o = riccati_step_unbiased(s, inputs[k], cfg, gains, settings.options);
          break;
        case EstimatorKind::Complementary:
          o = complementary_step(s, inputs[k], settings.gravity_dir, settings.mag_dir,
                                 settings.complementary);
          break;
      }
      h.states.push_back(std::move(o.next));
      h.innovations.push_back(o.innovation);
      h.output_errors.push_back(std::move(o.output_error));
    } catch (const Error& e) {
      throw_error(e.kind(), "step " + std::to_string(k) + ": " + e.what());
    }
  }
  return h;
}

}  // namespace scalar_att
