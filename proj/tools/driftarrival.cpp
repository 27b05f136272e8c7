// Command-line front end: config resolution, subcommand dispatch, and
// machine-readable outputs (CSV data, JSON summaries, one manifest per run).
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "driftarrival/analytic/densities.hpp"
#include "driftarrival/core/config.hpp"
#include "driftarrival/errors.hpp"
#include "driftarrival/estimate/estimate.hpp"
#include "driftarrival/io/csv.hpp"
#include "driftarrival/io/manifest.hpp"
#include "driftarrival/simulate/simulate.hpp"
#include "driftarrival/validate/gof.hpp"
#include "driftarrival/validate/histogram.hpp"

namespace fs = std::filesystem;
using namespace driftarrival;
using nlohmann::json;

namespace {

void stage(const std::string& msg) {
  std::fprintf(stderr, "[driftarrival] %s\n", msg.c_str());
}

/// Flag values shared by every subcommand; unset optionals fall back to the
/// config file (when given) and then to built-in defaults. Flags win.
struct Overrides {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::optional<int> dim;
  std::optional<double> sigma2;
  std::optional<std::string> vlat;
  std::optional<std::uint64_t> particles;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<std::string> crossing;
  std::optional<std::string> convention;

  bool any_channel_flag() const {
    return !config_path.empty() || dim || sigma2 || vlat || convention;
  }
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration file");
  cmd->add_option("--seed", o.seed, "RNG seed (counter-based streams)");
  cmd->add_option("--threads", o.threads,
                  "worker cap, 0 = one per hardware thread");
  cmd->add_option("--out", o.out_dir, "output directory (default: .)");
  cmd->add_option("--dim", o.dim, "total spatial dimension D");
  cmd->add_option("--sigma2", o.sigma2,
                  "diffusion value under the active convention");
  cmd->add_option("--vlat", o.vlat, "lateral drift components, comma-separated");
  cmd->add_option("--particles", o.particles, "particle / sample count");
  cmd->add_option("--dt", o.dt, "time step (physical units)");
  cmd->add_option("--horizon", o.horizon, "simulation horizon (physical units)");
  cmd->add_option("--crossing", o.crossing,
                  "crossing detector: step-end or bridge");
  cmd->add_option("--diffusion-convention", o.convention,
                  "sigma-squared (variance rate) or einstein (D_c, so "
                  "sigma^2 = 2 D_c)");
}

Eigen::VectorXd parse_vlat(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--vlat: cannot parse '" + item + "' as a number");
    }
  }
  if (vals.empty()) throw ConfigError("--vlat: empty drift list");
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = vals[i];
  return v;
}

/// Config resolution: built-in defaults, then the config file, then flags.
core::RunConfig resolve_config(const Overrides& o) {
  core::RunConfig cfg;
  if (!o.config_path.empty()) {
    cfg = core::load_config(o.config_path);
  } else {
    // flag-only runs default to a planar (D = 2) driftless channel
    cfg.physical.lateral_drift = Eigen::VectorXd::Zero(1);
    cfg.physical.lateral_origin = Eigen::VectorXd::Zero(1);
  }

  // the diffusion value and its convention resolve together
  double raw = cfg.physical.diffusion_sigma_sq;
  if (cfg.convention == core::DiffusionConvention::Einstein) raw *= 0.5;
  if (o.sigma2) raw = *o.sigma2;
  if (o.convention)
    cfg.convention = core::parse_diffusion_convention(*o.convention);
  cfg.physical.diffusion_sigma_sq =
      cfg.convention == core::DiffusionConvention::Einstein ? 2.0 * raw : raw;

  int dim = cfg.physical.dim();
  if (o.dim) dim = *o.dim;
  else if (o.vlat && o.config_path.empty())
    dim = static_cast<int>(parse_vlat(*o.vlat).size()) + 1;
  if (dim < 1 || dim > core::kMaxDim)
    throw ConfigError("dim must be in [1, " + std::to_string(core::kMaxDim) +
                      "], got " + std::to_string(dim));
  if (dim != cfg.physical.dim()) {
    const Eigen::Index keep =
        std::min<Eigen::Index>(dim - 1, cfg.physical.lateral_drift.size());
    Eigen::VectorXd drift = Eigen::VectorXd::Zero(dim - 1);
    Eigen::VectorXd origin = Eigen::VectorXd::Zero(dim - 1);
    drift.head(keep) = cfg.physical.lateral_drift.head(keep);
    origin.head(keep) = cfg.physical.lateral_origin.head(keep);
    cfg.physical.lateral_drift = drift;
    cfg.physical.lateral_origin = origin;
  }
  if (o.vlat) {
    const Eigen::VectorXd v = parse_vlat(*o.vlat);
    if (v.size() != dim - 1)
      throw ConfigError("--vlat has " + std::to_string(v.size()) +
                        " entries but dim " + std::to_string(dim) +
                        " needs " + std::to_string(dim - 1));
    cfg.physical.lateral_drift = v;
  }

  if (o.particles) cfg.particles = *o.particles;
  if (o.dt) cfg.dt = *o.dt;
  if (o.horizon) cfg.horizon = *o.horizon;
  if (o.seed) cfg.seed = *o.seed;
  if (o.crossing) cfg.crossing = *o.crossing;
  simulate::parse_crossing_mode(cfg.crossing);  // reject bad names early
  return cfg;
}

/// A fully resolved unit of work; replay rebuilds one from a manifest.
struct Plan {
  std::string command;
  core::RunConfig cfg;
  unsigned threads = 0;
  json settings = json::object();
  std::string out_dir = ".";
};

/// Protocol in the dimensionless units the library works in.
simulate::SimSpec norm_spec(const core::RunConfig& cfg) {
  const double ts = cfg.physical.time_scale();
  simulate::SimSpec s;
  s.n_particles = cfg.particles;
  s.dt = cfg.dt / ts;
  s.horizon = cfg.horizon / ts;
  s.seed = cfg.seed;
  s.crossing = simulate::parse_crossing_mode(cfg.crossing);
  return s;
}

std::vector<std::string> parameter_names(int dim) {
  std::vector<std::string> names{"sigma"};
  for (int k = 2; k <= dim; ++k) names.push_back("v" + std::to_string(k));
  return names;
}

json vec_json(const Eigen::VectorXd& v) {
  auto arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// subcommand bodies; each returns the output files it wrote (role -> path)

using Outputs = std::vector<std::pair<std::string, std::string>>;

Outputs run_simulate(const Plan& plan) {
  const auto params = plan.cfg.channel();
  const auto spec = norm_spec(plan.cfg);
  stage("simulate: " + std::to_string(spec.n_particles) + " particles, dt " +
        io::format_full(spec.dt) + ", horizon " + io::format_full(spec.horizon) +
        ", " + simulate::to_string(spec.crossing) + " crossing");
  const auto res = simulate::simulate(params, spec, plan.threads);
  const fs::path out = fs::path(plan.out_dir) / "samples.csv";
  io::write_samples_csv(out.string(), res);
  stage("simulate: " + std::to_string(res.arrivals.size()) + " arrivals, " +
        std::to_string(res.n_censored) + " censored -> " + out.string());
  return {{"samples", out.string()}};
}

Outputs run_pdf(const Plan& plan) {
  const auto params = plan.cfg.channel();
  if (params.dim != 2)
    throw ConfigError("pdf writes a (t, x) grid and needs dim 2, got dim " +
                      std::to_string(params.dim));
  const double horizon = norm_spec(plan.cfg).horizon;
  if (!(horizon > 0)) throw ConfigError("pdf needs a positive --horizon");
  const int nt = plan.settings.value("nt", 100);
  const int nx = plan.settings.value("nx", 80);
  if (nt < 2 || nx < 2) throw ConfigError("pdf grid needs nt, nx >= 2");

  const auto grid = validate::default_grid(params, horizon, nt, nx);
  const double mass = analytic::fat_cdf(horizon, params);
  const fs::path out = fs::path(plan.out_dir) / "pdf.csv";
  std::ofstream os(out, std::ios::binary);
  if (!os) throw IoError("cannot write '" + out.string() + "'");
  os << "t,x,fat,joint,fap,conditional\n";
  Eigen::VectorXd xv(1);
  for (int i = 1; i <= nt; ++i) {
    const double t = horizon * i / nt;
    const double fat = analytic::fat_pdf(t, params);
    for (int j = 0; j <= nx; ++j) {
      const double x = grid.second[0] +
                       (grid.second[nx] - grid.second[0]) * j / nx;
      xv[0] = x;
      const double joint = analytic::joint_pdf<double>(t, xv, params);
      os << io::format_full(t) << ',' << io::format_full(x) << ','
         << io::format_full(fat) << ',' << io::format_full(joint) << ','
         << io::format_full(analytic::fap_pdf<double>(xv, params)) << ','
         << io::format_full(joint / mass) << "\n";
    }
  }
  os.flush();
  if (!os) throw IoError("write failed for '" + out.string() + "'");
  stage("pdf: " + std::to_string(nt) + "x" + std::to_string(nx + 1) +
        " grid -> " + out.string());
  return {{"pdf", out.string()}};
}

Outputs run_fim(const Plan& plan) {
  const auto params = plan.cfg.channel();
  const std::uint64_t n = plan.cfg.particles;
  const Eigen::MatrixXd fim = analytic::fim_closed_form(params);
  const Eigen::VectorXd crlb = estimate::crlb_report(params, n);

  json j;
  j["dim"] = params.dim;
  j["sigma"] = params.sigma;
  j["n"] = n;
  j["parameters"] = parameter_names(params.dim);
  auto rows = json::array();
  for (Eigen::Index i = 0; i < fim.rows(); ++i)
    rows.push_back(vec_json(fim.row(i).transpose()));
  j["fim_per_sample"] = rows;
  j["crlb_diag"] = vec_json(crlb);
  const fs::path out = fs::path(plan.out_dir) / "fim.json";
  write_json_file(out, j);
  stage("fim: dim " + std::to_string(params.dim) + ", n " + std::to_string(n) +
        " -> " + out.string());
  return {{"fim", out.string()}};
}

Outputs run_estimate(const Plan& plan) {
  const std::string input = plan.settings.at("input").get<std::string>();
  stage("estimate: reading " + input);
  const auto f = io::read_samples_csv(input);
  const auto est = estimate::mle(f.samples, f.params.dim,
                                 f.params.lateral_origin);

  json j;
  j["input"] = input;
  j["n_samples"] = est.n_samples;
  j["parameters"] = parameter_names(f.params.dim);
  j["theta_hat"] = vec_json(est.theta_hat);
  j["sigma_hat"] = est.sigma_hat();
  j["lateral_drift_hat"] = vec_json(est.lateral_drift_hat());
  j["loglik_at_hat"] = est.loglik_at_hat;
  j["crlb_diag"] = vec_json(est.crlb_diag);
  const fs::path out = fs::path(plan.out_dir) / "estimate.json";
  write_json_file(out, j);
  stage("estimate: sigma_hat " + io::format_full(est.sigma_hat()) + " -> " +
        out.string());
  return {{"estimate", out.string()}};
}

Outputs run_validate(const Plan& plan, core::PhysicalConfig* used_physical) {
  const std::string input = plan.settings.at("input").get<std::string>();
  stage("validate: reading " + input);
  const auto f = io::read_samples_csv(input);

  core::ChannelParams model = plan.settings.value("params_from_file", true)
                                  ? f.params
                                  : plan.cfg.channel();
  double horizon = plan.settings.value("gof_horizon", 0.0);
  if (horizon <= 0) horizon = f.spec.horizon;
  if (horizon <= 0)
    throw ConfigError(
        "the sample file carries no horizon; pass --horizon explicitly");

  // D > 2 comparisons run on the (t, x2) marginal, which is exactly the
  // dim-2 law with the first lateral drift/origin components.
  simulate::SampleSet planar;
  planar.t = f.samples.t;
  planar.x = f.samples.x.leftCols(1);
  core::ChannelParams model2 = model;
  if (model.dim != 2) {
    if (model.dim < 2)
      throw ConfigError("validate needs at least one lateral coordinate");
    stage("validate: dim " + std::to_string(model.dim) +
          " input, testing the (t, x2) marginal");
    model2.dim = 2;
    model2.lateral_drift = model.lateral_drift.head(1);
    model2.lateral_origin = model.lateral_origin.head(1);
  }
  if (used_physical) *used_physical = core::denormalize(model, 1.0, 1.0);

  const int nt = plan.settings.value("nt", 40);
  const int nx = plan.settings.value("nx", 40);
  const auto grid = validate::default_grid(model2, horizon, nt, nx);
  const auto hist = validate::build_histogram(planar, grid.first, grid.second);
  const auto prob =
      validate::bin_probabilities(grid.first, grid.second, model2, horizon);
  const auto rep = validate::gof_report(hist, model2, horizon);

  const fs::path hist_path = fs::path(plan.out_dir) / "histogram.csv";
  const fs::path model_path = fs::path(plan.out_dir) / "model.csv";
  const fs::path gof_path = fs::path(plan.out_dir) / "gof.json";
  io::write_histogram_csv(hist_path.string(), hist);
  io::write_model_csv(model_path.string(), grid.first, grid.second, prob);

  json j;
  j["input"] = input;
  j["horizon"] = horizon;
  j["n_samples"] = hist.total + hist.dropped;
  j["dropped"] = hist.dropped;
  j["chi2_stat"] = rep.chi2_stat;
  j["dof"] = rep.dof;
  j["p_value"] = rep.p_value;
  j["total_variation"] = rep.total_variation;
  j["retained_cells"] = rep.retained_cells;
  write_json_file(gof_path, j);
  stage("validate: chi2 " + io::format_full(rep.chi2_stat) + " on " +
        std::to_string(rep.dof) + " dof, p " + io::format_full(rep.p_value) +
        ", tv " + io::format_full(rep.total_variation) + " -> " +
        gof_path.string());
  return {{"histogram", hist_path.string()},
          {"model", model_path.string()},
          {"gof", gof_path.string()}};
}

Outputs run_study(const Plan& plan) {
  const int trials = plan.settings.value("trials", 200);
  const std::uint64_t per =
      plan.settings.value("per_trial", std::uint64_t{10000});
  stage("study: " + std::to_string(trials) + " trials of " +
        std::to_string(per) + " samples");
  const auto report = estimate::efficiency_study(
      plan.cfg.channel(), per, trials, plan.cfg.seed, plan.threads);

  const fs::path csv_path = fs::path(plan.out_dir) / "study.csv";
  std::ofstream os(csv_path, std::ios::binary);
  if (!os) throw IoError("cannot write '" + csv_path.string() + "'");
  os << report.to_csv();
  os.flush();
  if (!os) throw IoError("write failed for '" + csv_path.string() + "'");

  const fs::path json_path = fs::path(plan.out_dir) / "study.json";
  std::ofstream oj(json_path, std::ios::binary);
  if (!oj) throw IoError("cannot write '" + json_path.string() + "'");
  oj << report.to_json() << "\n";
  oj.flush();
  if (!oj) throw IoError("write failed for '" + json_path.string() + "'");
  stage("study: variance/CRLB ratios -> " + csv_path.string());
  return {{"study_csv", csv_path.string()}, {"study_json", json_path.string()}};
}

int run_plan(Plan plan) {
  std::error_code ec;
  fs::create_directories(plan.out_dir, ec);
  if (ec)
    throw IoError("cannot create output directory '" + plan.out_dir +
                  "': " + ec.message());

  io::RunManifest m;
  m.command = plan.command;
  m.physical = plan.cfg.physical;
  m.convention = plan.cfg.convention;
  m.spec = norm_spec(plan.cfg);
  m.threads = plan.threads;
  m.settings = plan.settings;

  const auto t0 = std::chrono::steady_clock::now();
  Outputs outs;
  if (plan.command == "simulate") outs = run_simulate(plan);
  else if (plan.command == "pdf") outs = run_pdf(plan);
  else if (plan.command == "fim") outs = run_fim(plan);
  else if (plan.command == "estimate") outs = run_estimate(plan);
  else if (plan.command == "validate") outs = run_validate(plan, &m.physical);
  else if (plan.command == "study") outs = run_study(plan);
  else throw ConfigError("unknown command '" + plan.command + "'");
  m.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const fs::path mpath = fs::path(plan.out_dir) / "manifest.json";
  m.outputs = outs;
  m.outputs.emplace_back("manifest", mpath.string());
  save_manifest(mpath.string(), m);
  stage(plan.command + ": manifest -> " + mpath.string());
  return 0;
}

Plan plan_from_manifest(const std::string& path, const std::string& out_dir) {
  const auto m = io::load_manifest(path);
  Plan plan;
  plan.command = m.command;
  plan.cfg.physical = m.physical;
  plan.cfg.convention = m.convention;
  plan.cfg.particles = m.spec.n_particles;
  const double ts = m.physical.time_scale();
  plan.cfg.dt = m.spec.dt * ts;
  plan.cfg.horizon = m.spec.horizon * ts;
  plan.cfg.seed = m.spec.seed;
  plan.cfg.crossing = simulate::to_string(m.spec.crossing);
  plan.threads = m.threads;
  plan.settings = m.settings;
  plan.out_dir = out_dir;
  return plan;
}

int dispatch(const std::string& command, const Overrides& o, json settings) {
  Plan plan;
  plan.command = command;
  plan.cfg = resolve_config(o);
  plan.threads = o.threads;
  plan.settings = std::move(settings);
  plan.out_dir = o.out_dir;
  return run_plan(std::move(plan));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drift-diffusion arrival laws: simulate, estimate, validate"};
  app.set_version_flag("--version", std::string("driftarrival ") +
                                        io::kToolVersion);
  app.require_subcommand(1);

  Overrides o;
  int nt = -1, nx = -1;
  int trials = 200;
  std::uint64_t per_trial = 10000;
  std::string input_path, manifest_path;

  auto* c_sim = app.add_subcommand("simulate", "run particles, dump arrivals");
  add_common_flags(c_sim, o);

  auto* c_pdf = app.add_subcommand("pdf", "tabulate the analytic densities");
  add_common_flags(c_pdf, o);
  c_pdf->add_option("--grid-t", nt, "time points (default 100)");
  c_pdf->add_option("--grid-x", nx, "lateral intervals (default 80)");

  auto* c_fim = app.add_subcommand(
      "fim", "Fisher information and CRLB for --particles samples");
  add_common_flags(c_fim, o);

  auto* c_est = app.add_subcommand("estimate", "fit a sample dump by MLE");
  add_common_flags(c_est, o);
  c_est->add_option("input", input_path, "samples.csv from `simulate`")
      ->required();

  auto* c_val = app.add_subcommand(
      "validate", "goodness of fit of a sample dump against the law");
  add_common_flags(c_val, o);
  c_val->add_option("input", input_path, "samples.csv from `simulate`")
      ->required();
  c_val->add_option("--grid-t", nt, "time bins (default 40)");
  c_val->add_option("--grid-x", nx, "lateral bins (default 40)");

  auto* c_study = app.add_subcommand(
      "study", "repeated-trial estimator variance vs the CRLB");
  add_common_flags(c_study, o);
  c_study->add_option("--trials", trials, "number of trials (default 200)");
  c_study->add_option("--per-trial", per_trial,
                      "samples per trial (default 10000)");

  auto* c_replay = app.add_subcommand("replay", "re-run a saved manifest");
  c_replay->add_option("manifest", manifest_path, "manifest.json to replay")
      ->required();
  c_replay->add_option("--out", o.out_dir, "output directory (default: .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;  // usage problems are configuration problems
  }

  try {
    if (c_replay->parsed()) {
      stage("replay: " + manifest_path);
      return run_plan(plan_from_manifest(manifest_path, o.out_dir));
    }
    json settings = json::object();
    std::string command;
    if (c_sim->parsed()) command = "simulate";
    if (c_fim->parsed()) command = "fim";
    if (c_pdf->parsed()) {
      command = "pdf";
      if (nt > 0) settings["nt"] = nt;
      if (nx > 0) settings["nx"] = nx;
    }
    if (c_est->parsed()) {
      command = "estimate";
      settings["input"] = fs::absolute(input_path).string();
    }
    if (c_val->parsed()) {
      command = "validate";
      settings["input"] = fs::absolute(input_path).string();
      settings["params_from_file"] = !o.any_channel_flag();
      if (nt > 0) settings["nt"] = nt;
      if (nx > 0) settings["nx"] = nx;
      if (o.horizon) settings["gof_horizon"] = *o.horizon;
    }
    if (c_study->parsed()) {
      command = "study";
      settings["trials"] = trials;
      settings["per_trial"] = per_trial;
    }
    return dispatch(command, o, std::move(settings));
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error (config): %s\n", e.what());
    return 1;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error (io): %s\n", e.what());
    return 2;
  } catch (const CapacityError& e) {
    std::fprintf(stderr, "error (capacity): %s\n", e.what());
    return 3;
  } catch (const DegenerateSampleError& e) {
    std::fprintf(stderr, "error (degenerate sample): %s\n", e.what());
    return 4;
  } catch (const EmptySampleError& e) {
    std::fprintf(stderr, "error (degenerate sample): %s\n", e.what());
    return 4;
  } catch (const CannotTestError& e) {
    std::fprintf(stderr, "error (cannot test): %s\n", e.what());
    return 5;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error (config): %s\n", e.what());
    return 1;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error (config): %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 10;
  }
}
