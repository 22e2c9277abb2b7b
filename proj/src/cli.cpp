#include "stablesde/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <json.hpp>

#include "stablesde/config.hpp"
#include "stablesde/diagnostics.hpp"
#include "stablesde/errors.hpp"
#include "stablesde/io.hpp"
#include "stablesde/mcmc.hpp"
#include "stablesde/quasi.hpp"
#include "stablesde/simulate.hpp"

namespace stablesde {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Options {
  std::string config;
  std::string out_dir;  // overrides the config's output
  std::string backend = "openmp";
  std::string csv, column;
  double T = 1.0;
};

struct Session {
  ExperimentConfig cfg;
  fs::path config_dir;
  Backend backend = Backend::openmp;

  fs::path out_dir(const Options& o) const {
    fs::path d = o.out_dir.empty() ? fs::path(cfg.output) : fs::path(o.out_dir);
    if (o.out_dir.empty() && d.is_relative()) d = config_dir / d;
    fs::create_directories(d);
    return d;
  }
};

Session open_session(const Options& o) {
  Session s;
  s.cfg = load_config(o.config);
  s.config_dir = fs::path(o.config).parent_path();
  if (o.backend == "serial")
    s.backend = Backend::serial;
  else if (o.backend != "openmp")
    throw ConfigError("--backend must be serial or openmp");
  return s;
}

ObservationSet load_data(const Session& s, std::ostream& err) {
  const auto& d = s.cfg.data;
  if (d.simulate) {
    if (!s.cfg.beta) throw ConfigError("simulated data needs a numeric beta");
    const ModelSpec model = s.cfg.make_model();
    const auto& sim = *d.simulate;
    const Eigen::VectorXd theta = Eigen::Map<const Eigen::VectorXd>(sim.theta.data(), sim.theta.size());
    model.check_bounds(theta);
    PathConfig pc;
    pc.seed = s.cfg.seed;
    pc.refine = sim.refine;
    pc.x0 = sim.x0;
    return simulate_path(model, theta, StableIndex(*s.cfg.beta), sim.N, sim.T, pc);
  }
  fs::path p(*d.path);
  if (p.is_relative()) p = s.config_dir / p;
  LoadedSeries ls = load_csv(p.string(), d.column, d.T);
  if (!ls.dropped_rows.empty()) {
    json w;
    w["warning"] = "dropped rows with missing values";
    w["rows"] = ls.dropped_rows;
    err << w.dump() << "\n";
  }
  return ls.obs;
}

struct ResolvedBeta {
  double value;
  bool estimated;
  bool clamped;
};

ResolvedBeta resolve_beta(const Session& s, const ObservationSet& obs) {
  if (s.cfg.beta) return {*s.cfg.beta, false, false};
  const BetaEstimate e = estimate_beta(increments(obs));
  return {e.beta, true, e.clamped};
}

json named(const std::vector<std::string>& names, const Eigen::VectorXd& v) {
  json j = json::object();
  for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = v[static_cast<Eigen::Index>(i)];
  return j;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json j = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    j.push_back(row);
  }
  return j;
}

json vector_json(const Eigen::VectorXd& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Eigen::VectorXd truth(const Session& s) {
  const auto& t = s.cfg.data.simulate->theta;
  return Eigen::Map<const Eigen::VectorXd>(t.data(), t.size());
}

// The generating parameter for simulated data, else the box midpoint.
Eigen::VectorXd optimizer_start(const Session& s, const ModelSpec& model) {
  if (s.cfg.data.simulate) return truth(s);
  Eigen::VectorXd mid(model.dim());
  for (std::size_t i = 0; i < model.dim(); ++i) mid[i] = 0.5 * (model.bounds()[i].lo + model.bounds()[i].hi);
  return mid;
}

struct FitResult {
  ObservationSet obs;
  ResolvedBeta beta;
  MLEResult mle;
  Eigen::VectorXd init;
  ChainTrace trace;
  Eigen::MatrixXd retained;
};

FitResult fit(const Session& s, std::ostream& err) {
  const ModelSpec model = s.cfg.make_model();
  FitResult r;
  r.obs = load_data(s, err);
  r.beta = resolve_beta(s, r.obs);
  const StableIndex beta(r.beta.value);
  const StableLaw law(beta);
  r.mle = quasi_mle(model, r.obs, law, optimizer_start(s, model), {}, s.backend);
  r.init = s.cfg.mcmc.init == "truth" ? truth(s) : r.mle.theta;

  const Prior prior = s.cfg.make_prior();
  MCMCConfig mc = s.cfg.make_mcmc(model.dim());
  mc.backend = s.backend;
  if (s.cfg.mcmc.pilot > 0) {
    MCMCConfig pilot = mc;
    pilot.iterations = s.cfg.mcmc.pilot;
    pilot.seed = Stream::derive(s.cfg.seed, 1, 0).next();
    pilot.record_variances = false;
    const ChainTrace pt = run_chain(model, r.obs, beta, prior, pilot, r.init);
    const Eigen::VectorXd rate =
        mc.scale_by_rate ? rate_matrix(r.obs.N, r.obs.h, beta, model.p_alpha(), model.p_gamma()) : Eigen::VectorXd();
    mc.sigma = tuned_proposal(thin_draws(pt, pilot.iterations / 2, 1), rate);
  }
  r.trace = run_chain(model, r.obs, beta, prior, mc, r.init);
  r.retained = thin_draws(r.trace, s.cfg.mcmc.burn, s.cfg.mcmc.thin);
  return r;
}

json data_json(const Session& s, const ObservationSet& obs, const ResolvedBeta& b) {
  json j;
  j["beta"] = b.value;
  j["beta_estimated"] = b.estimated;
  if (b.estimated) j["beta_clamped"] = b.clamped;
  j["N"] = obs.N;
  j["T"] = obs.T;
  j["h"] = obs.h;
  j["seed"] = s.cfg.seed;
  return j;
}

void write_json(const fs::path& p, const json& j) { write_text(p.string(), j.dump(2) + "\n"); }

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const Session s = open_session(o);
  if (!s.cfg.data.simulate) throw ConfigError("simulate needs a [data.simulate] block");
  const ObservationSet obs = load_data(s, err);
  const fs::path p = s.out_dir(o) / "data.csv";
  write_observations(obs, p.string());
  out << p.string() << "\n";
  return 0;
}

int cmd_mle(const Options& o, std::ostream& out, std::ostream& err) {
  const Session s = open_session(o);
  const ModelSpec model = s.cfg.make_model();
  const ObservationSet obs = load_data(s, err);
  const ResolvedBeta b = resolve_beta(s, obs);
  const StableLaw law{StableIndex(b.value)};
  const MLEResult r = quasi_mle(model, obs, law, optimizer_start(s, model), {}, s.backend);
  const QuasiInfo info = fisher_info(model, r.theta, obs, law, s.backend);
  json j = data_json(s, obs, b);
  j["mle"] = named(model.param_names(), r.theta);
  j["loglik"] = r.loglik;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["rate"] = vector_json(info.D);
  j["information"] = matrix_json(info.I);
  const fs::path p = s.out_dir(o) / "mle.json";
  write_json(p, j);
  out << p.string() << "\n";
  return 0;
}

int cmd_fit(const Options& o, std::ostream& out, std::ostream& err) {
  const Session s = open_session(o);
  const ModelSpec model = s.cfg.make_model();
  const FitResult r = fit(s, err);
  const fs::path dir = s.out_dir(o);
  write_trace(r.trace, (dir / "trace.csv").string());

  const Eigen::MatrixXd& d = r.retained;
  const Eigen::VectorXd mean = d.colwise().mean().transpose();
  Eigen::VectorXd sd(d.cols());
  for (Eigen::Index j = 0; j < d.cols(); ++j)
    sd[j] = d.rows() > 1 ? std::sqrt((d.col(j).array() - mean[j]).square().sum() / double(d.rows() - 1)) : 0.0;

  // Posterior means of the path averages of a and c.
  double avg_drift = 0.0, avg_scale = 0.0;
  const std::size_t N = r.obs.N;
  for (Eigen::Index m = 0; m < d.rows(); ++m) {
    const Eigen::VectorXd th = d.row(m).transpose();
    avg_drift += kernels::blocked_sum_of(N, s.backend, [&](std::size_t n) { return model.drift_at(r.obs.values[n], th); });
    avg_scale += kernels::blocked_sum_of(N, s.backend, [&](std::size_t n) { return model.scale_at(r.obs.values[n], th); });
  }
  const double denom = static_cast<double>(N) * static_cast<double>(d.rows());

  json j;
  j["acceptance_rate"] = r.trace.acceptance_rate;
  j["posterior_mean"] = named(model.param_names(), mean);
  j["posterior_sd"] = named(model.param_names(), sd);
  j["mle"] = named(model.param_names(), r.mle.theta);
  j.update(data_json(s, r.obs, r.beta));
  j["variant"] = s.cfg.mcmc.variant;
  j["iterations"] = s.cfg.mcmc.iterations;
  j["retained"] = d.rows();
  j["avg_drift"] = avg_drift / denom;
  j["avg_scale"] = avg_scale / denom;
  j["init"] = named(model.param_names(), r.init);
  write_json(dir / "summary.json", j);

  if (!r.trace.snapshots.empty()) {
    std::string csv = "iteration,n,V\n";
    for (const auto& snap : r.trace.snapshots)
      for (std::size_t n = 0; n < snap.V.size(); ++n)
        csv += std::to_string(snap.iteration) + "," + std::to_string(n) + "," + format_double(snap.V[n]) + "\n";
    write_text((dir / "variances.csv").string(), csv);
  }
  out << (dir / "summary.json").string() << "\n";
  return 0;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream&) {
  const Session s = open_session(o);
  if (!s.cfg.data.simulate) throw ConfigError("sweep needs a [data.simulate] block for theta and T");
  if (!s.cfg.beta) throw ConfigError("sweep needs a numeric beta");
  const ModelSpec model = s.cfg.make_model();
  SweepOptions so;
  so.T = s.cfg.data.simulate->T;
  so.x0 = s.cfg.data.simulate->x0;
  so.scale_by_rate = s.cfg.sweep.scale_by_rate;
  so.prior = s.cfg.make_prior();
  so.sigma = s.cfg.make_mcmc(model.dim()).sigma;
  const auto rows = sweep_acceptance(model, truth(s), StableIndex(*s.cfg.beta), s.cfg.sweep.N, s.cfg.sweep.iterations,
                                     s.cfg.sweep.replicates, s.cfg.seed, so, s.backend);
  std::string csv = "N,mean_rate,sd_rate\n";
  for (const auto& r : rows)
    csv += std::to_string(r.N) + "," + format_double(r.mean_rate) + "," + format_double(r.sd_rate) + "\n";
  const fs::path p = s.out_dir(o) / "sweep.csv";
  write_text(p.string(), csv);
  out << p.string() << "\n";
  return 0;
}

int cmd_bvm(const Options& o, std::ostream& out, std::ostream& err) {
  const Session s = open_session(o);
  const ModelSpec model = s.cfg.make_model();
  const FitResult r = fit(s, err);
  const StableLaw law{StableIndex(r.beta.value)};
  const bool simulated = s.cfg.data.simulate.has_value();
  const Eigen::VectorXd center = simulated ? truth(s) : r.mle.theta;
  const QuasiInfo info = fisher_info(model, center, r.obs, law, s.backend);
  const BvMReport rep = bvm_report(r.retained, info, center, simulated ? "true" : "quasi-mle");
  json j = data_json(s, r.obs, r.beta);
  j["acceptance_rate"] = r.trace.acceptance_rate;
  j["center_label"] = rep.center_label;
  j["center"] = named(model.param_names(), rep.center);
  j["limit_mean"] = vector_json(rep.limit_mean);
  j["limit_cov"] = matrix_json(rep.limit_cov);
  j["per_coordinate_ks"] = named(model.param_names(), rep.per_coordinate_ks);
  j["bl_distance_estimate"] = rep.bl_distance_estimate;
  j["retained"] = r.retained.rows();
  const fs::path p = s.out_dir(o) / "bvm.json";
  write_json(p, j);
  out << p.string() << "\n";
  return 0;
}

int cmd_pp(const Options& o, std::ostream& out, std::ostream& err) {
  const Session s = open_session(o);
  const FitResult r = fit(s, err);
  const StableLaw law{StableIndex(r.beta.value)};
  const PPData pp = pp_data(r.trace.residual_means, law);
  std::string csv = "empirical,model\n";
  for (std::size_t i = 0; i < pp.empirical.size(); ++i)
    csv += format_double(pp.empirical[i]) + "," + format_double(pp.model[i]) + "\n";
  const fs::path p = s.out_dir(o) / "pp.csv";
  write_text(p.string(), csv);
  out << p.string() << "\n";
  return 0;
}

int cmd_estimate_beta(const Options& o, std::ostream& out, std::ostream& err) {
  ObservationSet obs;
  if (!o.csv.empty()) {
    const LoadedSeries ls = load_csv(o.csv, o.column, o.T);
    obs = ls.obs;
  } else if (!o.config.empty()) {
    obs = load_data(open_session(o), err);
  } else {
    throw ConfigError("estimate-beta needs --config or --csv");
  }
  const BetaEstimate e = estimate_beta(increments(obs));
  json j;
  j["beta"] = e.beta;
  j["raw"] = e.raw;
  j["clamped"] = e.clamped;
  j["N"] = obs.N;
  out << j.dump() << "\n";
  return 0;
}

void error_line(std::ostream& err, const std::string& kind, const std::string& message, int code) {
  json j;
  j["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
  err << j.dump() << "\n";
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian inference for SDEs driven by symmetric stable noise", "stablesde"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* c, bool config_required = true) {
    auto* opt = c->add_option("-c,--config", o.config, "experiment file");
    if (config_required) opt->required();
    c->add_option("-o,--out-dir", o.out_dir, "output directory (default: the config's output)");
    c->add_option("--backend", o.backend, "serial or openmp")->capture_default_str();
  };
  auto* sim = app.add_subcommand("simulate", "write a synthetic path to data.csv");
  auto* fit_c = app.add_subcommand("fit", "run the sampler; write trace.csv and summary.json");
  auto* mle = app.add_subcommand("mle", "quasi-maximum likelihood; write mle.json");
  auto* sweep = app.add_subcommand("sweep", "acceptance rate against N; write sweep.csv");
  auto* bvm = app.add_subcommand("bvm", "posterior normality report; write bvm.json");
  auto* pp = app.add_subcommand("pp", "p-p table of posterior mean residuals; write pp.csv");
  auto* eb = app.add_subcommand("estimate-beta", "quantile-matching estimate of beta");
  for (auto* c : {sim, fit_c, mle, sweep, bvm, pp}) add_common(c);
  add_common(eb, false);
  eb->add_option("--csv", o.csv, "series file (instead of --config)");
  eb->add_option("--column", o.column, "column name or 0-based index");
  eb->add_option("--T", o.T, "observation window")->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    error_line(err, "usage_error", e.what(), 1);
    return 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(o, out, err);
    if (fit_c->parsed()) return cmd_fit(o, out, err);
    if (mle->parsed()) return cmd_mle(o, out, err);
    if (sweep->parsed()) return cmd_sweep(o, out, err);
    if (bvm->parsed()) return cmd_bvm(o, out, err);
    if (pp->parsed()) return cmd_pp(o, out, err);
    if (eb->parsed()) return cmd_estimate_beta(o, out, err);
  } catch (const Error& e) {
    error_line(err, e.kind(), e.what(), e.exit_code());
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    error_line(err, "io_error", e.what(), 1);
    return 1;
  } catch (const std::exception& e) {
    error_line(err, "internal_error", e.what(), 2);
    return 2;
  }
  return 1;
}

}  // namespace stablesde
