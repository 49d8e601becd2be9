#include "scalar_att/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "scalar_att/csv.hpp"
#include "scalar_att/dataset.hpp"
#include "scalar_att/errors.hpp"
#include "scalar_att/history_io.hpp"
#include "scalar_att/observability.hpp"
#include "scalar_att/observer.hpp"
#include "scalar_att/sim.hpp"

#ifndef SCALAR_ATT_VERSION
#define SCALAR_ATT_VERSION "0.0.0"
#endif

namespace scalar_att::cli {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr double kDegToRad = std::numbers::pi / 180.0;

Vec3 parse_vec3(const std::string& text, const std::string& flag) {
  const auto f = csv::split(text);
  Vec3 v;
  if (f.size() != 3) throw InvalidArgumentError(flag + " expects three comma-separated numbers");
  for (int i = 0; i < 3; ++i) {
    if (!csv::parse(f[static_cast<size_t>(i)], v(i)) || !std::isfinite(v(i))) {
      throw InvalidArgumentError(flag + ": cannot parse '" + text + "'");
    }
  }
  return v;
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& fill) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  fill(f);
  if (!f) throw DataError("write failed: " + path.string());
}

void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
}

// Shared state of one invocation: the raw arguments and the manifest under construction.
struct Invocation {
  std::vector<std::string> args;
  std::ostream& out;
  std::ostream& err;
  json params = json::object();
  json seeds = json::object();
  json inputs = json::object();

  void add_input(const std::string& path) { inputs[path] = file_digest(path); }

  void write_manifest(const std::string& command, const fs::path& dir) const {
    json m;
    m["tool"] = "scalar-att";
    m["version"] = SCALAR_ATT_VERSION;
    m["command"] = command;
    m["argv"] = args;
    m["cwd"] = fs::current_path().string();
    m["params"] = params;
    m["seeds"] = seeds;
    m["inputs"] = inputs;
    write_file(dir / "manifest.json", [&](std::ostream& o) { o << m.dump(2) << '\n'; });
  }
};

// Magnetic reference flags shared by estimate and analyze.
struct MagFlags {
  std::string m0;
  std::optional<double> incl_deg;
  double dec_deg = 0.0;
  int samples = 100;

  void add(CLI::App* app) {
    app->add_option("--m0", m0, "Inertial magnetic direction x,y,z (normalized)");
    app->add_option("--mag-incl-deg", incl_deg, "Magnetic inclination below horizontal, deg");
    app->add_option("--mag-dec-deg", dec_deg, "Magnetic declination east of north, deg")->capture_default_str();
    app->add_option("--m0-samples", samples, "Ground-truth samples used to derive m0")->capture_default_str();
  }

  Vec3 resolve(const Sequence& seq, json& params) const {
    Vec3 m;
    if (!m0.empty()) {
      m = parse_vec3(m0, "--m0");
      if (m.norm() < 1e-12) throw InvalidArgumentError("--m0 must be non-zero");
      m.normalize();
      params["m0_source"] = "flag";
    } else if (incl_deg) {
      const double i = *incl_deg * kDegToRad;
      const double d = dec_deg * kDegToRad;
      m = Vec3(std::cos(i) * std::cos(d), std::cos(i) * std::sin(d), std::sin(i));
      params["m0_source"] = "inclination";
    } else {
      m = derive_m0(seq.records, seq.meta.r_imu, samples);
      params["m0_source"] = "derived";
      params["m0_samples"] = samples;
    }
    params["m0"] = vec_json(m);
    return m;
  }
};

bool has_ground_truth(const Sequence& seq) {
  for (const ImuRecord& r : seq.records) {
    if (!r.q_gt) return false;
  }
  return true;
}

// ---------------------------------------------------------------- simulate

struct SimulateFlags {
  std::string preset = "pe_tumble";
  std::string config = "six";
  std::optional<double> duration;
  std::optional<double> rate;
  std::string bias = "0,0,0";
  std::string r0 = "0,0,0";
  std::string m0;
  double gyro_noise = 0.0;
  double meas_noise = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

void cmd_simulate(const SimulateFlags& f, Invocation& inv) {
  TrajectorySpec spec = preset_trajectory(f.preset);
  if (f.duration) spec.duration = *f.duration;
  if (f.rate) spec.rate_hz = *f.rate;
  spec.d_true = parse_vec3(f.bias, "--bias");
  const Vec3 rpy = parse_vec3(f.r0, "--r0") * kDegToRad;
  spec.r0 = from_euler_zyx(rpy.x(), rpy.y(), rpy.z());
  if (!f.m0.empty()) {
    spec.m0 = parse_vec3(f.m0, "--m0");
    if (spec.m0.norm() < 1e-12) throw InvalidArgumentError("--m0 must be non-zero");
    spec.m0.normalize();
  }
  if (f.gyro_noise < 0.0 || f.meas_noise < 0.0) throw InvalidArgumentError("noise levels must be non-negative");
  if (f.gyro_noise > 0.0 || f.meas_noise > 0.0) spec.noise = NoiseSpec{f.gyro_noise, f.meas_noise, f.seed};
  const MeasurementConfig cfg = preset_config(f.config, Rotation(), spec.m0);
  spec.validate();

  inv.params = {{"preset", f.preset},
                {"config", f.config},
                {"duration_s", spec.duration},
                {"rate_hz", spec.rate_hz},
                {"bias", vec_json(spec.d_true)},
                {"r0_rpy_deg", vec_json(rpy / kDegToRad)},
                {"m0", vec_json(spec.m0)},
                {"gravity", spec.gravity},
                {"gyro_noise", f.gyro_noise},
                {"meas_noise", f.meas_noise}};
  inv.seeds["noise"] = f.seed;

  const SyntheticRun run = generate(spec, cfg);
  const fs::path dir(f.out);
  prepare_out_dir(dir);
  const std::vector<ImuRecord> records = to_records(run);
  write_file(dir / "imu.csv", [&](std::ostream& o) { write_csv(o, records); });
  write_file(dir / "outputs.csv", [&](std::ostream& o) {
    o << 't';
    for (int i = 0; i < cfg.size(); ++i) o << ",y_" << (i + 1);
    o << '\n';
    for (size_t k = 0; k < run.y.size(); ++k) {
      o << csv::format(run.truth.times()[k]);
      for (long i = 0; i < run.y[k].size(); ++i) o << ',' << csv::format(run.y[k](i));
      o << '\n';
    }
  });
  write_file(dir / "config.json", [&](std::ostream& o) { o << config_to_json(cfg).dump(2) << '\n'; });
  inv.write_manifest("simulate", dir);
  inv.out << "wrote " << records.size() << " samples, " << cfg.size() << " scalar outputs to " << dir.string()
          << '\n';
}

// ---------------------------------------------------------------- estimate

struct EstimateFlags {
  std::string input;
  std::string observer = "riccati";
  std::string config = "six";
  double q = 0.05;
  double v = 0.005;
  double p0 = 0.5;
  std::string init_rot = "0,0,0";
  std::string init_bias = "0,0,0";
  std::string true_bias;
  double k1 = 2.0;
  double k2 = 2.0;
  double kb = 0.5;
  int projection_interval = 1000;
  MagFlags mag;
  std::string out;
};

void cmd_estimate(const EstimateFlags& f, Invocation& inv) {
  const EstimatorKind kind = parse_estimator(f.observer);
  const Preset preset = parse_preset(f.config);
  const Vec3 rpy = parse_vec3(f.init_rot, "--init-rot");
  const Vec3 d0 = parse_vec3(f.init_bias, "--init-bias");
  std::optional<Vec3> true_bias;
  if (!f.true_bias.empty()) true_bias = parse_vec3(f.true_bias, "--true-bias");
  if (!(f.q > 0.0) || !(f.v > 0.0) || !(f.p0 > 0.0)) throw InvalidArgumentError("--q, --v and --p0 must be positive");
  if (f.projection_interval < 0) throw InvalidArgumentError("--projection-interval must be >= 0");

  inv.add_input(f.input);
  Sequence seq = load_csv(f.input);
  const bool gt = has_ground_truth(seq);
  seq.meta.m0 = f.mag.resolve(seq, inv.params);

  const ScalarStream stream = kind == EstimatorKind::Complementary ? to_vector_stream(seq.records, seq.meta)
                                                                   : to_scalar_stream(seq.records, seq.meta, preset);
  const int m = stream.cfg.size();
  const int n = kind == EstimatorKind::Riccati ? 6 : 3;

  RunSettings settings;
  settings.kind = kind;
  settings.options.projection_interval = f.projection_interval;
  settings.complementary = ComplementaryGains{f.k1, f.k2, f.kb};
  settings.gravity_dir = seq.meta.g0;
  settings.mag_dir = *seq.meta.m0;

  ObserverState init;
  init.r_hat = from_euler_zyx(rpy.x() * kDegToRad, rpy.y() * kDegToRad, rpy.z() * kDegToRad);
  init.d_hat = d0;
  init.t = seq.records.front().t;
  if (kind != EstimatorKind::Complementary) {
    settings.gains = Gains::constant(f.q * MatX::Identity(m, m), f.v * MatX::Identity(n, n));
    init.p = f.p0 * MatX::Identity(n, n);
  }

  inv.params["observer"] = estimator_name(kind);
  inv.params["config"] = kind == EstimatorKind::Complementary ? "vectors" : std::string(preset_name(preset));
  inv.params["input"] = f.input;
  inv.params["rate_hz"] = seq.meta.rate_hz;
  inv.params["init_rot_rpy_deg"] = vec_json(rpy);
  inv.params["init_bias"] = vec_json(d0);
  if (kind == EstimatorKind::Complementary) {
    inv.params["k1"] = f.k1;
    inv.params["k2"] = f.k2;
    inv.params["kb"] = f.kb;
  } else {
    inv.params["q"] = f.q;
    inv.params["v"] = f.v;
    inv.params["p0"] = f.p0;
    inv.params["projection_interval"] = f.projection_interval;
  }
  if (true_bias) inv.params["true_bias"] = vec_json(*true_bias);
  inv.params["flagged_samples"] = stream.flagged;
  inv.params["gaps"] = seq.meta.gaps;

  if (!stream.flagged.empty()) {
    inv.err << "warning: " << stream.flagged.size() << " zero-norm acc/mag samples replaced by the previous one\n";
  }
  if (!seq.meta.gaps.empty()) {
    inv.err << "warning: " << seq.meta.gaps.size() << " time gaps longer than 3 sample periods\n";
  }

  const RunHistory history = run(settings, init, stream.inputs, stream.cfg);

  const fs::path dir(f.out);
  prepare_out_dir(dir);
  std::vector<Rotation> truth;
  if (gt) truth = ground_truth(seq.records);
  write_file(dir / "history.csv", [&](std::ostream& o) { write_history_csv(o, history, truth); });

  const ObserverState& last = history.states[history.output_errors.size() - 1];
  inv.out << "observer " << estimator_name(kind) << ", " << history.output_errors.size() << " steps\n";
  if (gt) {
    EstimatedTrajectory est;
    for (size_t k = 0; k < history.output_errors.size(); ++k) {
      est.t.push_back(history.states[k].t);
      est.r.push_back(history.states[k].r_hat);
      est.d_hat.push_back(history.states[k].d_hat);
    }
    const Evaluation ev = evaluate(est, times_of(seq.records), truth, true_bias);
    write_file(dir / "errors.csv", [&](std::ostream& o) { write_error_series_csv(o, ev.series); });
    inv.out << std::fixed << std::setprecision(4) << "final theta_deg " << ev.series.theta_deg.back()
            << "\nrmse_deg theta " << ev.rmse.theta << " roll " << ev.rmse.roll << " pitch " << ev.rmse.pitch
            << " yaw " << ev.rmse.yaw << '\n';
  }
  inv.out << std::setprecision(6) << "final dhat " << last.d_hat.x() << ' ' << last.d_hat.y() << ' '
          << last.d_hat.z() << '\n';
  inv.out.unsetf(std::ios::floatfield);
  inv.write_manifest("estimate", dir);
}

// ---------------------------------------------------------------- analyze

struct AnalyzeFlags {
  std::string input;
  std::string preset;
  std::string config = "six";
  double window = 2.0;
  double mu = 1e-4;
  std::optional<double> stride;
  int n_quad = 401;
  std::optional<double> duration;
  std::optional<double> rate;
  MagFlags mag;
  std::string out;
};

json verdict_entry(const GramianReport& r) {
  return {{"lambda_min", r.lambda_min}, {"verdict", verdict_name(r.verdict)}};
}

void cmd_analyze(const AnalyzeFlags& f, Invocation& inv) {
  if (f.input.empty() == f.preset.empty()) throw InvalidArgumentError("give exactly one of --input or --preset");
  if (!(f.window > 0.0)) throw InvalidArgumentError("--window must be positive");
  const double stride = f.stride.value_or(f.window);
  if (!(stride > 0.0)) throw InvalidArgumentError("--stride must be positive");
  const Preset preset = parse_preset(f.config);

  std::optional<TrueTrajectory> traj;
  std::optional<MeasurementConfig> cfg;
  inv.params["config"] = preset_name(preset);
  if (!f.preset.empty()) {
    TrajectorySpec spec = preset_trajectory(f.preset);
    if (f.duration) spec.duration = *f.duration;
    if (f.rate) spec.rate_hz = *f.rate;
    cfg = preset_config(preset, Rotation(), spec.m0);
    traj = generate(spec, *cfg).truth;
    inv.params["preset"] = f.preset;
    inv.params["duration_s"] = spec.duration;
    inv.params["rate_hz"] = spec.rate_hz;
    inv.params["m0"] = vec_json(spec.m0);
  } else {
    inv.add_input(f.input);
    Sequence seq = load_csv(f.input);
    const Vec3 m0 = f.mag.resolve(seq, inv.params);
    cfg = preset_config(preset, seq.meta.r_imu, m0);
    std::vector<Vec3> omega;
    for (const ImuRecord& r : seq.records) omega.push_back(r.gyro);
    traj = TrueTrajectory(times_of(seq.records), ground_truth(seq.records), std::move(omega));
    inv.params["input"] = f.input;
    inv.params["omega_source"] = "gyro";
  }
  inv.params["window_s"] = f.window;
  inv.params["stride_s"] = stride;
  inv.params["mu"] = f.mu;
  inv.params["n_quad"] = f.n_quad;

  if (traj->end() - traj->start() < f.window - 1e-9) {
    throw DataError("trajectory shorter than one analysis window");
  }

  bool corollary1_applies = true;
  Corollary1Thresholds th;
  th.mu = f.mu;
  const char* names[] = {"attitude_gramian", "full_gramian", "bias_gramian", "omega_excitation", "corollary1"};

  json windows = json::array();
  json summary = json::object();
  for (const char* name : names) summary[name] = {{"verdict", "observable"}, {"min_lambda_min", nullptr}, {"windows", 0}};
  const auto tally = [&](const char* name, const json& entry) {
    json& s = summary[name];
    if (entry["verdict"] == "not_applicable") return;
    s["windows"] = s["windows"].get<int>() + 1;
    if (entry["verdict"] != "observable") s["verdict"] = "not_observable";
    if (entry.contains("lambda_min")) {
      const double l = entry["lambda_min"].get<double>();
      if (s["min_lambda_min"].is_null() || l < s["min_lambda_min"].get<double>()) s["min_lambda_min"] = l;
    }
  };

  for (long k = 0;; ++k) {
    const double t = traj->start() + static_cast<double>(k) * stride;
    if (t + f.window > traj->end() + 1e-9) break;
    Window w{t, f.window, f.n_quad};
    w.validate();
    json c;
    c["attitude_gramian"] = verdict_entry(gramian_attitude(*traj, *cfg, w, f.mu));
    c["full_gramian"] = verdict_entry(gramian_full(*traj, *cfg, w, f.mu).report);
    try {
      c["bias_gramian"] = verdict_entry(lemma2_condition(*traj, *cfg, w, f.mu));
    } catch (const InvalidArgumentError&) {
      c["bias_gramian"] = {{"lambda_min", 0.0}, {"verdict", "not_observable"}, {"note", "attitude Gramian singular"}};
    }
    c["omega_excitation"] = verdict_entry(corollary2_check(*traj, w, f.mu));
    if (corollary1_applies) {
      try {
        const Corollary1Report r = corollary1_check(*traj, *cfg, w, th);
        c["corollary1"] = {{"verdict", verdict_name(r.verdict)}, {"certified_by", r.certified_by}};
      } catch (const InvalidArgumentError&) {
        corollary1_applies = false;
      }
    }
    if (!corollary1_applies) c["corollary1"] = {{"verdict", "not_applicable"}};
    for (const char* name : names) tally(name, c[name]);
    windows.push_back({{"t", t}, {"conditions", std::move(c)}});
  }
  for (const char* name : names) {
    if (summary[name]["windows"] == 0) summary[name]["verdict"] = "not_applicable";
  }

  json report = {{"config", config_to_json(*cfg)}, {"window_s", f.window}, {"stride_s", stride}, {"mu", f.mu},
                 {"windows", std::move(windows)}, {"summary", summary}};
  const fs::path dir(f.out);
  prepare_out_dir(dir);
  write_file(dir / "report.json", [&](std::ostream& o) { o << report.dump(2) << '\n'; });
  inv.write_manifest("analyze", dir);

  for (const char* name : names) {
    const json& s = summary[name];
    inv.out << std::left << std::setw(18) << name << ' ' << s["verdict"].get<std::string>();
    if (!s["min_lambda_min"].is_null()) inv.out << "  min lambda_min " << s["min_lambda_min"].get<double>();
    inv.out << '\n';
  }
}

// ---------------------------------------------------------------- evaluate

struct EvaluateFlags {
  std::vector<std::string> estimates;
  std::vector<std::string> labels;
  std::string truth;
  std::string true_bias;
  std::string out;
};

void cmd_evaluate(const EvaluateFlags& f, Invocation& inv) {
  if (!f.labels.empty() && f.labels.size() != f.estimates.size()) {
    throw InvalidArgumentError("--label must be given once per --estimates file");
  }
  std::optional<Vec3> true_bias;
  if (!f.true_bias.empty()) true_bias = parse_vec3(f.true_bias, "--true-bias");
  inv.add_input(f.truth);
  const Sequence truth = load_csv(f.truth);
  const std::vector<double> tt = times_of(truth.records);
  const std::vector<Rotation> tr = ground_truth(truth.records);

  json rows = json::array();
  for (size_t i = 0; i < f.estimates.size(); ++i) {
    inv.add_input(f.estimates[i]);
    const Evaluation ev = evaluate(read_history_csv(f.estimates[i]), tt, tr, true_bias);
    const std::string label = f.labels.empty() ? fs::path(f.estimates[i]).parent_path().filename().string() +
                                                     "/" + fs::path(f.estimates[i]).filename().string()
                                               : f.labels[i];
    rows.push_back({{"label", label},
                    {"estimates", f.estimates[i]},
                    {"theta_deg", ev.rmse.theta},
                    {"roll_deg", ev.rmse.roll},
                    {"pitch_deg", ev.rmse.pitch},
                    {"yaw_deg", ev.rmse.yaw},
                    {"samples", ev.rmse.samples}});
  }
  inv.params = {{"truth", f.truth}, {"estimates", f.estimates}, {"labels", f.labels}};

  std::ostringstream text;
  size_t width = 5;
  for (const json& r : rows) width = std::max(width, r["label"].get<std::string>().size());
  text << std::left << std::setw(static_cast<int>(width)) << "label" << std::right;
  for (const char* h : {"theta", "roll", "pitch", "yaw"}) text << std::setw(12) << h;
  text << '\n' << std::fixed << std::setprecision(6);
  for (const json& r : rows) {
    text << std::left << std::setw(static_cast<int>(width)) << r["label"].get<std::string>() << std::right;
    for (const char* k : {"theta_deg", "roll_deg", "pitch_deg", "yaw_deg"}) {
      text << std::setw(12) << r[k].get<double>();
    }
    text << '\n';
  }

  const fs::path dir(f.out);
  prepare_out_dir(dir);
  const json doc = {{"unit", "deg"}, {"rows", rows}};
  write_file(dir / "rmse.json", [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
  write_file(dir / "rmse.txt", [&](std::ostream& o) { o << text.str(); });
  inv.write_manifest("evaluate", dir);
  inv.out << text.str();
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth);

// ---------------------------------------------------------------- replay

int cmd_replay(const std::string& manifest_path, const std::string& out_override, std::ostream& out,
               std::ostream& err, int depth) {
  if (depth > 0) throw InvalidArgumentError("a replay manifest cannot itself describe a replay");
  std::ifstream f(manifest_path);
  if (!f) throw DataError("cannot open manifest " + manifest_path);
  json m;
  try {
    m = json::parse(f);
  } catch (const json::exception& e) {
    throw DataError(manifest_path + ": " + e.what());
  }
  if (!m.contains("argv") || !m.contains("cwd") || !m["argv"].is_array()) {
    throw DataError(manifest_path + ": not a run manifest");
  }
  std::vector<std::string> argv = m["argv"].get<std::vector<std::string>>();
  if (!out_override.empty()) {
    const std::string abs = fs::absolute(out_override).string();
    bool found = false;
    for (size_t i = 0; i + 1 < argv.size(); ++i) {
      if (argv[i] == "--out") {
        argv[i + 1] = abs;
        found = true;
      } else if (argv[i].rfind("--out=", 0) == 0) {
        argv[i] = "--out=" + abs;
        found = true;
      }
    }
    if (!found) throw DataError(manifest_path + ": manifest argv has no --out");
  }

  const fs::path previous = fs::current_path();
  std::error_code ec;
  fs::current_path(m["cwd"].get<std::string>(), ec);
  if (ec) throw DataError("manifest working directory no longer exists: " + m["cwd"].get<std::string>());
  struct Restore {
    fs::path p;
    ~Restore() {
      std::error_code ignored;
      fs::current_path(p, ignored);
    }
  } restore{previous};

  const json inputs = m.value("inputs", json::object());
  for (const auto& [path, digest] : inputs.items()) {
    if (!digest.is_string() || file_digest(path) != digest.get<std::string>()) {
      throw DataError("input changed since the manifest was written: " + path);
    }
  }
  return dispatch(argv, out, err, depth + 1);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, int depth) {
  CLI::App app{"Attitude estimation from scalar measurements", "scalar-att"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SCALAR_ATT_VERSION);

  SimulateFlags sim;
  auto* s = app.add_subcommand("simulate", "Generate a synthetic IMU sequence");
  s->add_option("--preset", sim.preset, "pe_tumble | constant_omega | static")->capture_default_str();
  s->add_option("--config", sim.config, "six | four | three | two")->capture_default_str();
  s->add_option("--duration", sim.duration, "Seconds (preset default 60)");
  s->add_option("--rate", sim.rate, "Sample rate, Hz (preset default 286)");
  s->add_option("--bias", sim.bias, "True gyro bias x,y,z rad/s")->capture_default_str();
  s->add_option("--r0", sim.r0, "Initial attitude roll,pitch,yaw deg")->capture_default_str();
  s->add_option("--m0", sim.m0, "Inertial magnetic direction x,y,z");
  s->add_option("--gyro-noise", sim.gyro_noise, "Gyro noise std, rad/s")->capture_default_str();
  s->add_option("--meas-noise", sim.meas_noise, "Direction noise std")->capture_default_str();
  s->add_option("--seed", sim.seed, "Noise seed")->capture_default_str();
  s->add_option("--out", sim.out, "Output directory")->required();

  EstimateFlags est;
  auto* e = app.add_subcommand("estimate", "Run an observer over an IMU CSV");
  e->add_option("--input", est.input, "IMU CSV")->required()->check(CLI::ExistingFile);
  e->add_option("--observer", est.observer, "riccati | riccati-unbiased | complementary")->capture_default_str();
  e->add_option("--config", est.config, "six | four | three | two")->capture_default_str();
  e->add_option("--q", est.q, "Q = q I")->capture_default_str();
  e->add_option("--v", est.v, "V = v I")->capture_default_str();
  e->add_option("--p0", est.p0, "P(0) = p0 I")->capture_default_str();
  e->add_option("--init-rot", est.init_rot, "Initial estimate roll,pitch,yaw deg")->capture_default_str();
  e->add_option("--init-bias", est.init_bias, "Initial bias estimate x,y,z rad/s")->capture_default_str();
  e->add_option("--true-bias", est.true_bias, "Known true bias, adds dtilde columns");
  e->add_option("--k1", est.k1, "Complementary accelerometer gain")->capture_default_str();
  e->add_option("--k2", est.k2, "Complementary magnetometer gain")->capture_default_str();
  e->add_option("--kb", est.kb, "Complementary bias gain")->capture_default_str();
  e->add_option("--projection-interval", est.projection_interval, "Steps between SO(3) projections (0 = never)")
      ->capture_default_str();
  est.mag.add(e);
  e->add_option("--out", est.out, "Output directory")->required();

  AnalyzeFlags an;
  auto* a = app.add_subcommand("analyze", "Sliding-window observability analysis");
  a->add_option("--input", an.input, "IMU CSV with ground truth")->check(CLI::ExistingFile);
  a->add_option("--preset", an.preset, "Synthetic trajectory preset");
  a->add_option("--config", an.config, "six | four | three | two")->capture_default_str();
  a->add_option("--window", an.window, "Window length delta, s")->capture_default_str();
  a->add_option("--mu", an.mu, "Observability threshold on lambda_min")->capture_default_str();
  a->add_option("--stride", an.stride, "Window start stride, s (default: window)");
  a->add_option("--n-quad", an.n_quad, "Quadrature nodes per window")->capture_default_str();
  a->add_option("--duration", an.duration, "Preset duration override, s");
  a->add_option("--rate", an.rate, "Preset rate override, Hz");
  an.mag.add(a);
  a->add_option("--out", an.out, "Output directory")->required();

  EvaluateFlags ev;
  auto* v = app.add_subcommand("evaluate", "RMSE of estimate histories against ground truth");
  v->add_option("--estimates", ev.estimates, "State-history CSV (repeatable)")->required()->check(CLI::ExistingFile);
  v->add_option("--label", ev.labels, "Row label per --estimates");
  v->add_option("--truth", ev.truth, "IMU CSV with ground truth")->required()->check(CLI::ExistingFile);
  v->add_option("--true-bias", ev.true_bias, "Known true bias x,y,z");
  v->add_option("--out", ev.out, "Output directory")->required();

  std::string manifest;
  std::string replay_out;
  auto* r = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  r->add_option("--manifest", manifest, "manifest.json")->required()->check(CLI::ExistingFile);
  r->add_option("--out", replay_out, "Write outputs here instead of the recorded directory");

  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.push_back("scalar-att");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a_ : storage) argv.push_back(a_.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& pe) {
    const int code = app.exit(pe, out, err);
    return code == 0 ? kOk : kUsage;
  }

  Invocation inv{args, out, err};
  if (s->parsed()) cmd_simulate(sim, inv);
  else if (e->parsed()) cmd_estimate(est, inv);
  else if (a->parsed()) cmd_analyze(an, inv);
  else if (v->parsed()) cmd_evaluate(ev, inv);
  else if (r->parsed()) return cmd_replay(manifest, replay_out, out, err, depth);
  return kOk;
}

}  // namespace

std::string file_digest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
    for (std::streamsize i = 0; i < f.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err, 0);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::InvalidArgument: return kUsage;
      case ErrorKind::Data: return kData;
      case ErrorKind::Numerical: return kNumerical;
    }
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kData;
}

}  // namespace scalar_att::cli
