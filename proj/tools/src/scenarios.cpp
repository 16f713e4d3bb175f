#include "pdmplab_cli/scenarios.hpp"

#include <chrono>
#include <cmath>
#include <map>

#include "pdmplab/branching.hpp"
#include "pdmplab/gene.hpp"
#include "pdmplab/if_averaging.hpp"
#include "pdmplab/pdmp.hpp"
#include "pdmplab/switched.hpp"
#include "pdmplab_cli/csv.hpp"

namespace pdmplab::cli {

using nlohmann::json;

namespace {

Eigen::MatrixXd to_matrix(const json& rows) {
  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rows[i][j].get<double>();
  return m;
}

RateMatrix rate_matrix_from(const json& rows) {
  return RateMatrix::from_rates(to_matrix(rows));
}

std::string tags_at(const std::vector<Event>& events, double t) {
  std::string out;
  for (const auto& e : events) {
    if (e.t != t) continue;
    if (!out.empty()) out += "+";
    out += event_tag_name(e.tag);
  }
  return out;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          const Trajectory& traj) {
  const int dim = traj.states.empty() ? 0 : static_cast<int>(traj.states[0].size());
  std::vector<std::string> header{"t"};
  for (int d = 0; d < dim; ++d) header.push_back("x_" + std::to_string(d + 1));
  header.push_back("env");
  header.push_back("event_tag");
  CsvWriter csv(path, header);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    std::vector<CsvValue> row{traj.times[i]};
    for (int d = 0; d < dim; ++d) row.push_back(traj.states[i](d));
    row.push_back(static_cast<std::int64_t>(traj.env[i]));
    row.push_back(tags_at(traj.events, traj.times[i]));
    csv.row(row);
  }
}

std::vector<std::filesystem::path> run_malthus(const json& cfg,
                                               const RunOptions& opt) {
  const auto q = rate_matrix_from(cfg["rates"]);
  std::vector<double> growth = cfg["growth"].get<std::vector<double>>();
  const double horizon = opt.horizon.value_or(cfg["horizon"].get<double>());

  const double p_min = cfg["p_min"].get<double>();
  const double p_max = cfg["p_max"].get<double>();
  const auto p_count = cfg["p_count"].get<std::int64_t>();
  std::vector<double> p_grid(p_count);
  for (std::int64_t i = 0; i < p_count; ++i)
    p_grid[i] = p_min + (p_max - p_min) * static_cast<double>(i) /
                            static_cast<double>(p_count - 1);
  const auto curve = switched::growth_rate_curve(q, growth, p_grid);

  const auto curve_path = opt.out_dir / "growth_curve.csv";
  {
    CsvWriter csv(curve_path, {"p", "lambda_p"});
    for (std::size_t i = 0; i < curve.p.size(); ++i)
      csv.row({curve.p[i], curve.lambda[i]});
  }

  switched::MalthusModel model(q, growth, cfg["x0"].get<double>());
  RngStream rng(opt.seed, 0);
  PdmpOptions sim_opt;
  sim_opt.record_dt = horizon / 400.0;
  Eigen::VectorXd x0(1);
  x0 << model.x0;
  const auto traj =
      simulate_pdmp(model.to_system(), x0, 0, horizon, rng, nullptr, nullptr, sim_opt);
  const auto traj_path = opt.out_dir / "trajectory.csv";
  write_trajectory_csv(traj_path, traj);

  const auto report = switched::moment_dichotomy(q, growth);
  json rep;
  rep["nu_a"] = report.nu_a;
  rep["regime"] = report.regime == switched::DichotomyReport::Regime::MomentsDecay
                      ? "moments-decay"
                  : report.regime == switched::DichotomyReport::Regime::MomentsDiverge
                      ? "moments-diverge"
                      : "critical";
  if (report.regime == switched::DichotomyReport::Regime::MomentsDecay) {
    rep["p_star"] = report.p_star;
    rep["window_hi"] = report.window_hi;
    rep["window_open"] = report.window_open;
  }
  const auto rep_path = opt.out_dir / "dichotomy.json";
  std::ofstream(rep_path) << rep.dump(2) << "\n";
  return {curve_path, traj_path, rep_path};
}

std::vector<std::filesystem::path> run_planar(const json& cfg,
                                              const RunOptions& opt) {
  const auto grid = cfg["lambda_grid"].get<std::vector<double>>();
  const double horizon = opt.horizon.value_or(cfg["horizon"].get<double>());
  const int n_rep = static_cast<int>(
      opt.replicas.value_or(cfg["n_rep"].get<std::int64_t>()));
  switched::LyapunovOptions lopt;
  lopt.renorm_dt = cfg["renorm_dt"].get<double>();
  lopt.n_threads = opt.n_threads;

  const bool custom = cfg.contains("m0") && cfg["m0"].is_array();
  const auto path = opt.out_dir / "lyapunov.csv";
  CsvWriter csv(path, {"lambda_switch", "chi", "ci_lo", "ci_hi"});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto sys =
        custom ? switched::LinearSwitchedSystem(
                     {to_matrix(cfg["m0"]), to_matrix(cfg["m1"])},
                     RateMatrix::symmetric_two_state(grid[i]))
               : switched::canonical_planar(grid[i]);
    const auto est = switched::lyapunov_exponent(
        sys, horizon, opt.seed ^ mix64(i + 1), n_rep, lopt);
    csv.row({grid[i], est.chi, est.ci_lo, est.ci_hi});
  }
  return {path};
}

std::vector<std::filesystem::path> run_coupling(const json& cfg,
                                                const RunOptions& opt) {
  const auto q = rate_matrix_from(cfg["rates"]);
  std::vector<Eigen::MatrixXd> mats;
  for (const auto& fm : cfg["fields"]) mats.push_back(to_matrix(fm));
  switched::LinearSwitchedSystem sys(mats, q);
  const auto x0v = cfg["x0"].get<std::vector<double>>();
  const auto x0pv = cfg["x0_prime"].get<std::vector<double>>();
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(x0v.data(), x0v.size());
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(x0pv.data(), x0pv.size());
  RngStream rng(opt.seed, 0);
  const auto path_out = switched::two_point_coupling(
      sys, a, b, opt.horizon.value_or(cfg["horizon"].get<double>()),
      cfg["grid_dt"].get<double>(), rng);
  const auto path = opt.out_dir / "coupling.csv";
  CsvWriter csv(path, {"t", "distance", "bound"});
  for (std::size_t i = 0; i < path_out.t.size(); ++i)
    csv.row({path_out.t[i], path_out.distance[i], path_out.bound[i]});
  return {path};
}

std::vector<std::filesystem::path> run_branching(const json& cfg,
                                                 const RunOptions& opt) {
  const auto kind = cfg["kind"].get<std::string>();
  const double r = cfg["growth_rate"].get<double>();
  branching::BranchingSpec spec =
      kind == "size-structured"
          ? branching::size_structured_spec(r)
          : branching::constant_rate_spec(cfg["rate"].get<double>(), r,
                                          cfg["p_death"].get<double>());
  const double horizon = opt.horizon.value_or(cfg["horizon"].get<double>());
  RngStream rng(opt.seed, 0);
  const auto tree = branching::simulate_tree(spec, cfg["x0"].get<double>(),
                                             horizon, rng);
  const auto path = opt.out_dir / "tree.csv";
  CsvWriter csv(path, {"id", "parent", "birth", "death", "trait_at_birth"});
  for (std::size_t i = 0; i < tree.individuals.size(); ++i) {
    const auto& u = tree.individuals[i];
    csv.row({static_cast<std::int64_t>(i), u.parent, u.birth_time,
             std::isfinite(u.division_time) ? CsvValue{u.division_time}
                                            : CsvValue{std::string("inf")},
             u.trait_at_birth});
  }
  return {path};
}

std::vector<std::filesystem::path> run_ifire(const json& cfg,
                                             const RunOptions& opt) {
  ifa::IFSpec spec;
  spec.env = rate_matrix_from(cfg["rates"]);
  spec.celerity = cfg["celerity"].get<std::vector<double>>();
  spec.floor = cfg["floor"].get<double>();
  spec.threshold = cfg["threshold"].get<double>();
  spec.flow_factor = [](double) { return 1.0; };
  spec.initial_env = static_cast<int>(cfg["initial_env"].get<std::int64_t>());

  auto make_reset = [](const json& r) {
    if (r["kind"].get<std::string>() == "uniform")
      return ifa::uniform_reset(r["lo"].get<double>(), r["hi"].get<double>());
    return ifa::point_reset(r["value"].get<double>());
  };
  const auto& resets = cfg["reset"];
  for (int i = 0; i < spec.env.size(); ++i)
    spec.reset.push_back(
        make_reset(resets.size() == 1 ? resets[0] : resets[i]));
  const auto first = spec.reset.front();
  spec.initial_law = [first](RngStream& rng) { return first.sample(rng); };

  ifa::ConvergenceStudyOptions copt;
  copt.n_first_hits = static_cast<std::size_t>(
      opt.replicas.value_or(cfg["n_first_hits"].get<std::int64_t>()));
  copt.n_prehit_replicas = static_cast<std::size_t>(
      cfg["n_prehit_replicas"].get<std::int64_t>());
  copt.seed = opt.seed;
  copt.n_threads = opt.n_threads;
  const auto study = ifa::convergence_study(
      spec, cfg["epsilon_schedule"].get<std::vector<double>>(), copt);

  const auto path = opt.out_dir / "convergence.csv";
  CsvWriter csv(path,
                {"epsilon", "n_hits", "tv_pi_star", "ks_mu_bar", "sup_dist_prehit"});
  for (const auto& row : study.rows)
    csv.row({row.epsilon, static_cast<std::uint64_t>(row.n_hits), row.tv_pi_star,
             row.ks_mu_bar, row.sup_dist_prehit});
  return {path};
}

std::vector<std::filesystem::path> run_gene(const json& cfg,
                                            const RunOptions& opt) {
  gene::GeneParams params{cfg["lambda1"].get<double>(), cfg["sigma1"].get<double>(),
                          cfg["lambda2"].get<double>(), cfg["tauR"].get<double>(),
                          cfg["tauD"].get<double>(),    cfg["V0"].get<double>()};
  params.validate();
  const auto n_cycles = static_cast<std::size_t>(
      opt.replicas.value_or(cfg["n_cycles"].get<std::int64_t>()));
  gene::LineageOptions lopt;
  lopt.burn_in_cycles = static_cast<std::size_t>(cfg["burn_in"].get<std::int64_t>());
  lopt.thin = static_cast<std::size_t>(cfg["thin"].get<std::int64_t>());
  const auto phase_count = cfg["phase_count"].get<std::int64_t>();
  std::vector<double> phases(phase_count);
  for (std::int64_t i = 0; i < phase_count; ++i)
    phases[i] = params.tau_d * static_cast<double>(i) /
                static_cast<double>(phase_count);
  RngStream rng(opt.seed, 0);
  const auto stats = gene::concentration_stats(params, n_cycles, phases, rng, lopt);

  const auto path = opt.out_dir / "concentrations.csv";
  CsvWriter csv(path, {"s", "mean_conc_M", "mean_conc_P", "cv_M", "cv_P"});
  for (const auto& row : stats.rows)
    csv.row({row.s, row.mean_conc_m, row.mean_conc_p, row.cv_m, row.cv_p});

  const auto eq = gene::equilibrium_moments(params);
  json summary;
  summary["mu_p"] = stats.mu_p;
  summary["fluctuation_amplitude"] = stats.fluctuation_amplitude;
  summary["equilibrium"] = {{"EM", eq.em},
                            {"EP", eq.ep},
                            {"VarM", eq.var_m},
                            {"VarP", eq.var_p},
                            {"CovMP", eq.cov_mp}};
  const auto sum_path = opt.out_dir / "summary.json";
  std::ofstream(sum_path) << summary.dump(2) << "\n";
  return {path, sum_path};
}

std::vector<std::filesystem::path> run_cvscan(const json& cfg,
                                              const RunOptions& opt) {
  (void)opt;
  const double lo = cfg["lambda1_min"].get<double>();
  const double hi = cfg["lambda1_max"].get<double>();
  const auto points = cfg["points"].get<std::int64_t>();
  std::vector<gene::GeneParams> grid;
  for (std::int64_t i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(points - 1);
    gene::GeneParams p{lo * std::pow(hi / lo, f), cfg["sigma1"].get<double>(),
                       cfg["lambda2"].get<double>(),  cfg["tauR"].get<double>(),
                       cfg["tauD"].get<double>(),     cfg["V0"].get<double>()};
    grid.push_back(p);
  }
  const auto scan = gene::cv_scan(grid);
  const auto path = opt.out_dir / "cvscan.csv";
  CsvWriter csv(path, {"lambda1", "sigma1", "lambda2", "tauR", "tauD", "V0",
                       "mu_p", "cv2"});
  for (const auto& pt : scan)
    csv.row({pt.params.lambda1, pt.params.sigma1, pt.params.lambda2,
             pt.params.tau_r, pt.params.tau_d, pt.params.v0, pt.mu_p, pt.cv2});
  return {path};
}

}  // namespace

RunManifest run_scenario(const RunOptions& opt) {
  const auto started = std::chrono::steady_clock::now();
  const auto validation = validate_config(opt.scenario, opt.config_path);
  if (!validation.ok)
    throw std::runtime_error("invalid " + opt.scenario +
                             " config: " + validation.joined_errors());
  std::filesystem::create_directories(opt.out_dir);

  std::vector<std::filesystem::path> outputs;
  try {
    if (opt.scenario == "malthus")
      outputs = run_malthus(validation.config, opt);
    else if (opt.scenario == "planar")
      outputs = run_planar(validation.config, opt);
    else if (opt.scenario == "coupling")
      outputs = run_coupling(validation.config, opt);
    else if (opt.scenario == "branching")
      outputs = run_branching(validation.config, opt);
    else if (opt.scenario == "ifire")
      outputs = run_ifire(validation.config, opt);
    else if (opt.scenario == "gene")
      outputs = run_gene(validation.config, opt);
    else if (opt.scenario == "cvscan")
      outputs = run_cvscan(validation.config, opt);
    else
      throw std::runtime_error("unknown scenario");
  } catch (const std::exception& e) {
    throw std::runtime_error("scenario " + opt.scenario + " failed: " + e.what());
  }

  RunManifest manifest;
  manifest.scenario = opt.scenario;
  manifest.seed = opt.seed;
  manifest.config = validation.config;
  manifest.outputs = outputs;
  manifest.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  manifest.write(opt.out_dir / "manifest.json");
  return manifest;
}

}  // namespace pdmplab::cli
