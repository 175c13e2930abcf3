#pragma once

// Command-line driver: one registration per invocation.
// Exit codes: 0 ok, 1 output could not be written, 2 bad arguments or
// unreadable input, 3 solver abort.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gcreg/baselines.hpp"
#include "gcreg/fixtures.hpp"
#include "gcreg/image_io.hpp"
#include "gcreg/render.hpp"
#include "gcreg/report.hpp"
#include "gcreg/solver_gc.hpp"

namespace gcreg {

enum ExitCode : int { kExitOk = 0, kExitOutput = 1, kExitUsage = 2, kExitAbort = 3 };

struct CliSettings {
  std::string model;
  std::string template_path;
  std::string reference_path;
  std::string out_dir;
  std::string fixture;
  int size = 64;
  std::optional<double> gamma, r, omega, tol, dt, noise_ratio, smooth_sigma, intensity_scale;
  std::optional<int> max_iter, sweeps, squaring_steps;
  bool additive = false;
  int grid_spacing = 8;
  std::string report = "json";
  bool verbose = false;
  std::string config_path;
};

namespace detail {

struct Inputs {
  ScalarField t;
  ScalarField r;
  nlohmann::json echo;
};

// Settings given on the command line win over the config file.
inline void merge_config_file(CLI::App& app, CliSettings& s) {
  std::ifstream in(s.config_path);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open config " + s.config_path);
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
  }
  if (!cfg.is_object()) throw Error(ErrorKind::InvalidArgument, "config must be a JSON object");

  auto take = [&](const char* key, const char* flag, auto& target) {
    if (app.count(flag) > 0 || !cfg.contains(key)) return;
    using T = std::decay_t<decltype(target)>;
    try {
      if constexpr (requires { typename T::value_type; } && !std::is_same_v<T, std::string>)
        target = cfg[key].template get<typename T::value_type>();
      else
        target = cfg[key].template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::InvalidArgument, std::string("config: bad value for ") + key);
    }
  };
  take("model", "--model", s.model);
  take("template", "--template", s.template_path);
  take("reference", "--reference", s.reference_path);
  take("out", "--out", s.out_dir);
  take("fixture", "--fixture", s.fixture);
  take("size", "--size", s.size);
  take("gamma", "--gamma", s.gamma);
  take("r", "--r", s.r);
  take("omega", "--omega", s.omega);
  take("tol", "--tol", s.tol);
  take("max_iter", "--max-iter", s.max_iter);
  take("grid_spacing", "--grid-spacing", s.grid_spacing);
  take("report", "--report", s.report);
  take("dt", "--dt", s.dt);
  take("sweeps", "--sweeps", s.sweeps);
  take("noise_ratio", "--noise-ratio", s.noise_ratio);
  take("smooth_sigma", "--smooth-sigma", s.smooth_sigma);
  take("squaring_steps", "--squaring-steps", s.squaring_steps);
  take("intensity_scale", "--intensity-scale", s.intensity_scale);
  take("additive", "--additive", s.additive);
}

inline Inputs load_inputs(const CliSettings& s) {
  if (!s.fixture.empty()) {
    const auto kind = parse_fixture_kind(s.fixture);
    if (!kind) throw Error(ErrorKind::InvalidArgument, "unknown fixture '" + s.fixture + "'");
    Fixture fx = make_fixture(*kind, s.size);
    return {std::move(fx.template_image), std::move(fx.reference), {{"fixture", s.fixture}, {"size", s.size}}};
  }
  ScalarField t = load_image(s.template_path);
  ScalarField r = load_image(s.reference_path);
  if (t.width() != r.width() || t.height() != r.height())
    throw Error(ErrorKind::DimensionMismatch, "template and reference sizes differ");
  return {std::move(t), std::move(r), {{"template", s.template_path}, {"reference", s.reference_path}}};
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CliSettings s;
  CLI::App app{"Gaussian-curvature image registration and baselines"};
  app.add_option("--model", s.model, "gc | lc | mc | demon");
  app.add_option("--template", s.template_path, "template image (PGM or PNG)");
  app.add_option("--reference", s.reference_path, "reference image (PGM or PNG)");
  app.add_option("--out", s.out_dir, "output directory");
  app.add_option("--fixture", s.fixture, "gaussian_shift | square_rotate | smooth_warp (replaces the images)");
  app.add_option("--size", s.size, "fixture side length");
  app.add_option("--gamma", s.gamma, "regularization weight");
  app.add_option("--r", s.r, "penalty parameter (gc)");
  app.add_option("--omega", s.omega, "Gauss-Seidel relaxation (gc)");
  app.add_option("--tol", s.tol, "stopping tolerance");
  app.add_option("--max-iter", s.max_iter, "outer iteration budget");
  app.add_option("--grid-spacing", s.grid_spacing, "stride of the rendered deformed grid");
  app.add_option("--report", s.report, "json | csv");
  app.add_option("--dt", s.dt, "time step (lc, mc)");
  app.add_option("--sweeps", s.sweeps, "Gauss-Seidel sweeps per outer iteration (gc)");
  app.add_option("--noise-ratio", s.noise_ratio, "demon denominator constant");
  app.add_option("--smooth-sigma", s.smooth_sigma, "demon update smoothing, pixels");
  app.add_option("--squaring-steps", s.squaring_steps, "scaling-and-squaring doublings (demon)");
  app.add_option("--intensity-scale", s.intensity_scale, "divisor applied to intensities before the data term");
  app.add_flag("--additive", s.additive, "demon: additive updates instead of exp(v)");
  app.add_flag("-v,--verbose", s.verbose, "log every iteration");
  app.add_option("--config", s.config_path, "JSON file with the same keys (snake_case); flags take precedence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto usage_error = [&](const std::string& msg) {
    err << "error: " << msg << "\n\n" << app.help();
    return kExitUsage;
  };

  std::optional<ModelKind> model;
  std::optional<detail::Inputs> inputs;
  try {
    if (!s.config_path.empty()) detail::merge_config_file(app, s);
    model = parse_model_kind(s.model);
    if (!model) return usage_error("--model must be one of gc, lc, mc, demon");
    if (s.out_dir.empty()) return usage_error("--out is required");
    if (!s.fixture.empty() && (!s.template_path.empty() || !s.reference_path.empty()))
      return usage_error("--fixture cannot be combined with --template/--reference");
    if (s.fixture.empty() && (s.template_path.empty() || s.reference_path.empty()))
      return usage_error("--template and --reference are required unless --fixture is given");
    if (s.report != "json" && s.report != "csv") return usage_error("--report must be json or csv");
    if (s.grid_spacing < 2) return usage_error("--grid-spacing must be >= 2");
    inputs = detail::load_inputs(s);
  } catch (const Error& e) {
    return usage_error(e.what());
  }

  const ScalarField& t = inputs->t;
  const ScalarField& ref = inputs->r;
  IterationObserver observer;
  if (s.verbose)
    observer = [&out](int k, double res, double cur) { out << "iter " << k << " residual " << res << " ssd " << cur << '\n'; };

  std::optional<RegistrationResult> result;
  nlohmann::json echo;
  std::optional<double> gamma_out, r_out;
  try {
    switch (*model) {
      case ModelKind::gc: {
        RegistrationConfig c;
        if (s.gamma) c.gamma = *s.gamma;
        if (s.r) c.r = *s.r;
        if (s.omega) c.omega = *s.omega;
        if (s.tol) c.tol = *s.tol;
        if (s.max_iter) c.max_iter = *s.max_iter;
        if (s.sweeps) c.gs_sweeps = *s.sweeps;
        if (s.intensity_scale) c.intensity_scale = *s.intensity_scale;
        c.validate();
        echo = {{"gamma", c.gamma},         {"r", c.r},     {"omega", c.omega},
                {"tol", c.tol},             {"max_iter", c.max_iter}, {"gs_sweeps", c.gs_sweeps},
                {"denom_guard", c.denom_guard}, {"intensity_scale", c.intensity_scale}};
        out << "gc: " << echo.dump() << '\n';
        gamma_out = c.gamma;
        r_out = c.r;
        result = register_gc(t, ref, c, observer);
        break;
      }
      case ModelKind::lc:
      case ModelKind::mc: {
        TimeMarchConfig c = *model == ModelKind::lc ? lc_defaults() : mc_defaults();
        if (s.gamma) c.gamma = *s.gamma;
        if (s.dt) c.dt = *s.dt;
        if (s.tol) c.tol = *s.tol;
        if (s.max_iter) c.max_iter = *s.max_iter;
        if (s.intensity_scale) c.intensity_scale = *s.intensity_scale;
        c.validate();
        echo = {{"gamma", c.gamma}, {"dt", c.dt}, {"tol", c.tol}, {"max_iter", c.max_iter},
                {"intensity_scale", c.intensity_scale}};
        if (*model == ModelKind::lc) echo["inner_iters"] = c.inner_iters;
        out << to_string(*model) << ": " << echo.dump() << '\n';
        gamma_out = c.gamma;
        result = *model == ModelKind::lc ? register_lc(t, ref, c, observer) : register_mc(t, ref, c, observer);
        break;
      }
      case ModelKind::demon: {
        DemonConfig c;
        if (s.noise_ratio) c.noise_ratio = *s.noise_ratio;
        if (s.smooth_sigma) c.smooth_sigma = *s.smooth_sigma;
        if (s.squaring_steps) c.squaring_steps = *s.squaring_steps;
        if (s.tol) c.tol = *s.tol;
        if (s.max_iter) c.max_iter = *s.max_iter;
        if (s.intensity_scale) c.intensity_scale = *s.intensity_scale;
        c.diffeomorphic = !s.additive;
        c.validate();
        echo = {{"noise_ratio", c.noise_ratio},       {"smooth_sigma", c.smooth_sigma}, {"diffeomorphic", c.diffeomorphic},
                {"squaring_steps", c.squaring_steps}, {"tol", c.tol},                   {"max_iter", c.max_iter},
                {"intensity_scale", c.intensity_scale}};
        out << "demon: " << echo.dump() << '\n';
        result = register_demon(t, ref, c, observer);
        break;
      }
    }
  } catch (const SolverAbort& e) {
    err << "solver abort: " << e.what() << '\n';
    return kExitAbort;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SingularBlock || e.kind() == ErrorKind::NonFinite) {
      err << "solver abort: " << e.what() << '\n';
      return kExitAbort;
    }
    return usage_error(e.what());
  }

  echo["grid_spacing"] = s.grid_spacing;
  echo["input"] = inputs->echo;
  const ReportRow row = make_report_row(*model, gamma_out, r_out, *result);
  out << "epsilon " << row.epsilon << " min_jac " << row.min_jac << " negative_jac_count " << row.negative_jac_count
      << " iterations " << row.iterations << " time_s " << row.time_s << '\n';

  try {
    const std::filesystem::path dir(s.out_dir);
    std::filesystem::create_directories(dir);
    const ScalarField warped = sample_warped(t, result->u);
    save_pgm(dir / "deformed.pgm", warped);
    save_pgm(dir / "diff_before.pgm", difference_image(t, ref));
    save_pgm(dir / "diff_after.pgm", difference_image(warped, ref));
    save_pgm(dir / "grid.pgm", render_deformed_grid(result->u, s.grid_spacing));
    if (!s.fixture.empty()) {
      save_pgm(dir / "template.pgm", t);
      save_pgm(dir / "reference.pgm", ref);
    }
    const std::filesystem::path report_path = dir / (s.report == "json" ? "report.json" : "report.csv");
    std::ofstream rep(report_path);
    if (s.report == "json")
      rep << report_json(row, echo, &*result).dump(2) << '\n';
    else
      rep << report_csv(row);
    if (!rep) throw Error(ErrorKind::IoFailure, "cannot write " + report_path.string());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitOutput;
  }
  return kExitOk;
}

}  // namespace gcreg
