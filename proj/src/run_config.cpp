#include "dcap/run_config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

namespace dcap {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& section,
                  const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError("section '" + section + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in section '" + section + "'");
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("key '" + key + "' has the wrong type");
  }
}

const std::set<std::string> kExperiments = {"simulate",    "energy-check", "stability-check",
                                            "limit-study", "kinetic-diag", "nondegeneracy"};

}  // namespace

RunConfig parse_config(const json& j) {
  require_keys(j, "root",
               {"experiment", "flux", "noise", "solver", "initial", "ensemble", "output",
                "stability", "limit", "kinetic", "nondegeneracy"});
  RunConfig cfg;
  cfg.echo = j;
  if (!j.contains("experiment")) throw ConfigError("missing required key 'experiment'");
  cfg.experiment = j.at("experiment").get<std::string>();
  if (!kExperiments.count(cfg.experiment))
    throw ConfigError("unknown experiment '" + cfg.experiment + "'");

  if (j.contains("flux")) {
    const auto& f = j.at("flux");
    require_keys(f, "flux", {"preset", "amplitude", "lambda_box"});
    cfg.flux_preset = get_or<std::string>(f, "preset", cfg.flux_preset);
    cfg.flux_amplitude = get_or(f, "amplitude", cfg.flux_amplitude);
    cfg.lambda_box = get_or(f, "lambda_box", cfg.lambda_box);
    if (!(cfg.lambda_box > 0)) throw ConfigError("flux.lambda_box must be positive");
  }
  if (j.contains("noise")) {
    const auto& m = j.at("noise");
    require_keys(m, "noise", {"preset", "amplitude"});
    cfg.noise_preset = get_or<std::string>(m, "preset", cfg.noise_preset);
    cfg.noise_amplitude = get_or(m, "amplitude", cfg.noise_amplitude);
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    require_keys(s, "solver",
                 {"dim", "n_per_axis", "epsilon", "delta", "dt", "horizon", "snapshot_every",
                  "blowup_threshold"});
    cfg.solver.dim = get_or(s, "dim", cfg.solver.dim);
    cfg.solver.n_per_axis = get_or(s, "n_per_axis", cfg.solver.n_per_axis);
    cfg.solver.epsilon = get_or(s, "epsilon", cfg.solver.epsilon);
    cfg.solver.delta = get_or(s, "delta", cfg.solver.delta);
    cfg.solver.dt = get_or(s, "dt", cfg.solver.dt);
    cfg.solver.horizon = get_or(s, "horizon", cfg.solver.horizon);
    cfg.solver.snapshot_every = get_or(s, "snapshot_every", cfg.solver.snapshot_every);
    cfg.solver.blowup_threshold = get_or(s, "blowup_threshold", cfg.solver.blowup_threshold);
  }
  if (j.contains("initial")) {
    const auto& s = j.at("initial");
    require_keys(s, "initial",
                 {"preset", "amplitude", "offset", "mode", "value", "left", "right", "seed",
                  "band"});
    cfg.initial_preset = get_or<std::string>(s, "preset", cfg.initial_preset);
    cfg.initial_amplitude = get_or(s, "amplitude", cfg.initial_amplitude);
    cfg.initial_offset = get_or(s, "offset", cfg.initial_offset);
    cfg.initial_mode = get_or(s, "mode", cfg.initial_mode);
    cfg.initial_value = get_or(s, "value", cfg.initial_value);
    cfg.initial_left = get_or(s, "left", cfg.initial_left);
    cfg.initial_right = get_or(s, "right", cfg.initial_right);
    cfg.initial_seed = get_or<std::uint64_t>(s, "seed", cfg.initial_seed);
    cfg.initial_band = get_or(s, "band", cfg.initial_band);
  }
  if (j.contains("ensemble")) {
    const auto& s = j.at("ensemble");
    require_keys(s, "ensemble", {"paths", "seed", "threads", "bound_scale"});
    cfg.ensemble.n_paths = get_or(s, "paths", cfg.ensemble.n_paths);
    cfg.ensemble.seed0 = get_or<std::uint64_t>(s, "seed", cfg.ensemble.seed0);
    cfg.ensemble.threads = get_or(s, "threads", cfg.ensemble.threads);
    cfg.ensemble.bound_scale = get_or(s, "bound_scale", cfg.ensemble.bound_scale);
    if (cfg.ensemble.n_paths < 1) throw ConfigError("ensemble.paths must be >= 1");
  }
  if (j.contains("output")) {
    const auto& s = j.at("output");
    require_keys(s, "output", {"dir"});
    cfg.out_dir = get_or<std::string>(s, "dir", cfg.out_dir);
  }
  if (j.contains("stability")) {
    const auto& s = j.at("stability");
    require_keys(s, "stability", {"magnitudes", "direction_mode"});
    cfg.stability_magnitudes =
        get_or<std::vector<double>>(s, "magnitudes", cfg.stability_magnitudes);
    cfg.stability_direction_mode = get_or(s, "direction_mode", cfg.stability_direction_mode);
  }
  if (j.contains("limit")) {
    const auto& s = j.at("limit");
    require_keys(s, "limit",
                 {"mode", "k_min", "k_max", "levels", "fv_cells", "fv_dt", "dt_fine",
                  "neps_bound", "threshold", "regularize_with_level", "sigma0", "snapshots",
                  "m_lambda", "lambda_box"});
    std::string mode = get_or<std::string>(s, "mode", "reference");
    if (mode != "reference" && mode != "self")
      throw ConfigError("limit.mode must be 'reference' or 'self'");
    cfg.limit.self_convergence = mode == "self";
    cfg.limit.neps_bound = get_or(s, "neps_bound", cfg.limit.neps_bound);
    if (s.contains("levels")) {
      for (const auto& lv : s.at("levels")) {
        if (!lv.is_array() || lv.size() != 2)
          throw ConfigError("limit.levels entries must be [epsilon, delta] pairs");
        cfg.limit.levels.push_back({lv[0].get<double>(), lv[1].get<double>()});
      }
    } else {
      int kmin = get_or(s, "k_min", 2), kmax = get_or(s, "k_max", 6);
      if (kmin < 1 || kmax < kmin) throw ConfigError("limit.k_min/k_max form an empty ladder");
      cfg.limit.level_offset = kmin;
      for (int k = kmin; k <= kmax; ++k) {
        double eps = std::pow(2.0, -k);
        cfg.limit.levels.push_back({eps, eps * eps});
      }
    }
    for (const auto& lvl : cfg.limit.levels) {
      if (!(lvl.epsilon > 0) || !(lvl.delta > 0))
        throw ConfigError("limit levels need positive epsilon and delta");
      if (lvl.delta / (lvl.epsilon * lvl.epsilon) > cfg.limit.neps_bound + 1e-12)
        throw ConfigError("delta/epsilon^2 = " +
                          std::to_string(lvl.delta / (lvl.epsilon * lvl.epsilon)) +
                          " exceeds the singular-limit bound " +
                          std::to_string(cfg.limit.neps_bound));
    }
    cfg.limit.fv_cells = get_or(s, "fv_cells", cfg.limit.fv_cells);
    cfg.limit.fv_dt = get_or(s, "fv_dt", cfg.limit.fv_dt);
    cfg.limit.dt_fine = get_or(s, "dt_fine", cfg.limit.dt_fine);
    cfg.limit.final_error_threshold = get_or(s, "threshold", cfg.limit.final_error_threshold);
    cfg.limit.regularize_with_level =
        get_or(s, "regularize_with_level", cfg.limit.regularize_with_level);
    cfg.limit.sigma0 = get_or(s, "sigma0", cfg.limit.sigma0);
    cfg.limit.snapshots = get_or(s, "snapshots", cfg.limit.snapshots);
    cfg.limit.m_lambda = get_or(s, "m_lambda", cfg.limit.m_lambda);
    cfg.limit.lambda_box = get_or(s, "lambda_box", cfg.limit.lambda_box);
  }
  if (j.contains("kinetic")) {
    const auto& s = j.at("kinetic");
    require_keys(s, "kinetic",
                 {"m_lambda", "lambda_box", "theta_factors", "neg_sobolev_order",
                  "slope_threshold"});
    cfg.m_lambda = get_or(s, "m_lambda", cfg.m_lambda);
    cfg.kinetic_lambda_box = get_or(s, "lambda_box", cfg.kinetic_lambda_box);
    cfg.theta_factors = get_or<std::vector<int>>(s, "theta_factors", cfg.theta_factors);
    cfg.sobolev_order = get_or(s, "neg_sobolev_order", cfg.sobolev_order);
    cfg.slope_threshold = get_or(s, "slope_threshold", cfg.slope_threshold);
  }
  if (j.contains("nondegeneracy")) {
    const auto& s = j.at("nondegeneracy");
    require_keys(s, "nondegeneracy",
                 {"lambda_min", "lambda_max", "etas", "directions", "lambda_nodes",
                  "min_xi_prime"});
    cfg.nd_lambda_min = get_or(s, "lambda_min", cfg.nd_lambda_min);
    cfg.nd_lambda_max = get_or(s, "lambda_max", cfg.nd_lambda_max);
    cfg.nd_etas = get_or<std::vector<double>>(s, "etas", cfg.nd_etas);
    cfg.nd_directions = get_or(s, "directions", cfg.nd_directions);
    cfg.nd_lambda_nodes = get_or(s, "lambda_nodes", cfg.nd_lambda_nodes);
    cfg.nd_min_xi = get_or(s, "min_xi_prime", cfg.nd_min_xi);
  }

  // physical constraints checked up front, before any computation
  try {
    cfg.solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (cfg.experiment == "energy-check" && cfg.solver.delta > cfg.solver.epsilon)
    throw ConfigError("energy-check requires delta <= epsilon");
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

SpectralFieldD make_initial(const RunConfig& cfg, const TorusGrid& grid) {
  FourierWorkspaceD ws;
  Eigen::ArrayXd s(grid.size());
  const std::string& p = cfg.initial_preset;
  if (p == "zero") {
    s.setZero();
  } else if (p == "constant") {
    s.setConstant(cfg.initial_value);
  } else if (p == "sine" || p == "cosine") {
    for (std::int64_t i = 0; i < grid.size(); ++i) {
      double x0 = grid.coord(grid.axis_bin(i, 0));
      double v = p == "sine" ? std::sin(two_pi * cfg.initial_mode * x0)
                             : std::cos(two_pi * cfg.initial_mode * x0);
      if (grid.dim() == 2)
        v *= std::sin(two_pi * cfg.initial_mode * grid.coord(grid.axis_bin(i, 1)));
      s[i] = cfg.initial_amplitude * v;
    }
  } else if (p == "riemann") {
    for (std::int64_t i = 0; i < grid.size(); ++i) {
      double x0 = grid.coord(grid.axis_bin(i, 0));
      s[i] = x0 < 0.5 ? cfg.initial_left : cfg.initial_right;
    }
  } else if (p == "random") {
    std::mt19937_64 rng(cfg.initial_seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (std::int64_t i = 0; i < grid.size(); ++i) s[i] = cfg.initial_amplitude * nd(rng);
    int band = cfg.initial_band > 0 ? cfg.initial_band : grid.n() / 4;
    auto f = truncate_modes(ws.forward(grid, s), band);
    f.coeff(0) += cfg.initial_offset;
    return f;
  } else {
    throw ConfigError("unknown initial preset '" + p + "'");
  }
  s += cfg.initial_offset;
  return ws.forward(grid, s);
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

json stat_json(const MeanSe& s) { return json{{"mean", s.mean}, {"se", s.se}}; }

void write_report(const std::filesystem::path& dir, const std::string& experiment,
                  const json& config_echo, const json& series, const json& pass_flags,
                  const json& seeds, const json& results) {
  json rep;
  rep["experiment"] = experiment;
  rep["config_echo"] = config_echo;
  rep["per_time_series"] = series;
  rep["pass_flags"] = pass_flags;
  rep["seeds"] = seeds;
  rep["results"] = results;
  write_file(dir / "report.json", rep.dump(2) + "\n");
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) continue;
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return 0;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

int dispatch(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);

  TorusGrid grid(cfg.solver.dim, cfg.solver.n_per_axis);
  FluxModel flux = FluxModel::preset(cfg.flux_preset, grid, cfg.flux_amplitude, cfg.lambda_box);
  NoiseModel noise = NoiseModel::preset(cfg.noise_preset, cfg.noise_amplitude);
  SpectralFieldD u0 = make_initial(cfg, grid);

  json seeds = json::array();
  for (int m = 0; m < cfg.ensemble.n_paths; ++m)
    seeds.push_back(cfg.ensemble.seed0 + static_cast<std::uint64_t>(m));

  if (cfg.experiment == "simulate") {
    int exit_code = 0;
    json series = json::array();
    std::vector<SolutionPath> paths(cfg.ensemble.n_paths);
    std::vector<int> aborted(cfg.ensemble.n_paths, 0);
    parallel_for_members(cfg.ensemble.n_paths, cfg.ensemble.threads, [&](int m) {
      GalerkinSolver solver(cfg.solver, &flux, &noise);
      auto w = WienerPath::sample(cfg.ensemble.seed0 + static_cast<std::uint64_t>(m),
                                  cfg.solver.dt, cfg.solver.horizon);
      try {
        paths[m] = solver.simulate(u0, w, /*keep_fields=*/true);
      } catch (const BlowUpError&) {
        aborted[m] = 1;
      }
    });
    json aborted_seeds = json::array();
    for (int m = 0; m < cfg.ensemble.n_paths; ++m) {
      std::uint64_t seed = cfg.ensemble.seed0 + static_cast<std::uint64_t>(m);
      if (aborted[m]) {
        exit_code = 2;
        aborted_seeds.push_back(seed);
        continue;
      }
      const auto& p = paths[m];
      std::string csv = cfg.solver.dim == 1 ? "t,k,re,im\n" : "t,k0,k1,re,im\n";
      for (std::size_t ti = 0; ti < p.times.size(); ++ti) {
        const auto& f = p.snapshots[ti];
        for (std::int64_t i = 0; i < grid.size(); ++i) {
          int k0 = grid.wavenumber(grid.axis_bin(i, 0));
          csv += fmt(p.times[ti]) + "," + std::to_string(k0);
          if (cfg.solver.dim == 2)
            csv += "," + std::to_string(grid.wavenumber(grid.axis_bin(i, 1)));
          csv += "," + fmt(f.coeffs[i].real()) + "," + fmt(f.coeffs[i].imag()) + "\n";
        }
      }
      write_file(dir / ("path_" + std::to_string(seed) + ".csv"), csv);
      json row;
      row["seed"] = seed;
      row["terminal_l2_sq"] = p.l2_sq.back();
      row["terminal_h1_sq"] = p.h1_sq.back();
      series.push_back(row);
    }
    write_report(dir, cfg.experiment, cfg.echo, series,
                 json{{"completed", exit_code == 0}}, seeds,
                 json{{"aborted_seeds", aborted_seeds}});
    return exit_code;
  }

  if (cfg.experiment == "energy-check") {
    auto rep = run_ensemble(cfg.solver, &flux, &noise, u0, cfg.ensemble);
    std::string csv =
        "t,l2_mean,l2_se,h1_mean,h1_se,h2_mean,h2_se,diss_mean,diss_se,energy_lhs_mean,"
        "energy_lhs_se,energy_bound,weighted_lhs_mean,weighted_lhs_se,weighted_bound\n";
    json series = json::array();
    for (std::size_t j = 0; j < rep.times.size(); ++j) {
      csv += fmt(rep.times[j]) + "," + fmt(rep.l2_sq[j].mean) + "," + fmt(rep.l2_sq[j].se) +
             "," + fmt(rep.h1_sq[j].mean) + "," + fmt(rep.h1_sq[j].se) + "," +
             fmt(rep.h2_sq[j].mean) + "," + fmt(rep.h2_sq[j].se) + "," +
             fmt(rep.dissipation[j].mean) + "," + fmt(rep.dissipation[j].se) + "," +
             fmt(rep.energy_lhs[j].mean) + "," + fmt(rep.energy_lhs[j].se) + "," +
             fmt(rep.energy_bound[j]) + "," + fmt(rep.weighted_lhs[j].mean) + "," +
             fmt(rep.weighted_lhs[j].se) + "," + fmt(rep.weighted_bound[j]) + "\n";
      json row;
      row["t"] = rep.times[j];
      row["l2_sq"] = stat_json(rep.l2_sq[j]);
      row["h1_sq"] = stat_json(rep.h1_sq[j]);
      row["h2_sq"] = stat_json(rep.h2_sq[j]);
      row["dissipation"] = stat_json(rep.dissipation[j]);
      row["energy_lhs"] = stat_json(rep.energy_lhs[j]);
      row["energy_bound"] = rep.energy_bound[j];
      row["weighted_lhs"] = stat_json(rep.weighted_lhs[j]);
      row["weighted_bound"] = rep.weighted_bound[j];
      series.push_back(row);
    }
    write_file(dir / "energy.csv", csv);
    json flags{{"energy_bound", rep.pass_energy},
               {"weighted_bound", rep.pass_weighted},
               {"weighted_applicable", rep.weighted_applicable},
               {"p4_moment_bound", rep.pass_p4},
               {"se_applicable", rep.se_applicable}};
    json results{{"p4_sup", stat_json(rep.p4_sup)},
                 {"p4_dissipation", stat_json(rep.p4_dissipation)},
                 {"p4_bound", rep.p4_bound},
                 {"aborted_seeds", rep.aborted_seeds}};
    write_report(dir, cfg.experiment, cfg.echo, series, flags, seeds, results);
    if (!rep.aborted_seeds.empty()) return 2;
    return rep.pass() ? 0 : 1;
  }

  if (cfg.experiment == "stability-check") {
    RunConfig dir_cfg = cfg;
    dir_cfg.initial_preset = "cosine";
    dir_cfg.initial_mode = cfg.stability_direction_mode;
    dir_cfg.initial_amplitude = 1.0;
    auto direction = make_initial(dir_cfg, grid);
    auto rep = stability_experiment(cfg.solver, &flux, &noise, u0, direction,
                                    cfg.stability_magnitudes, cfg.ensemble);
    std::string csv = "magnitude,distance,ratio_mean,ratio_se\n";
    json series = json::array();
    for (std::size_t i = 0; i < rep.magnitudes.size(); ++i) {
      csv += fmt(rep.magnitudes[i]) + "," + fmt(rep.distances[i]) + "," +
             fmt(rep.ratios[i].mean) + "," + fmt(rep.ratios[i].se) + "\n";
      json row;
      row["magnitude"] = rep.magnitudes[i];
      row["ratio"] = stat_json(rep.ratios[i]);
      series.push_back(row);
    }
    write_file(dir / "stability.csv", csv);
    write_report(dir, cfg.experiment, cfg.echo, series,
                 json{{"bounded_variation", rep.pass},
                      {"identical_initial", rep.identical_initial}},
                 seeds, json{{"variation", rep.variation}});
    return rep.pass ? 0 : 1;
  }

  if (cfg.experiment == "limit-study") {
    LimitStudyConfig study = cfg.limit;
    study.dim = cfg.solver.dim;
    study.n_per_axis = cfg.solver.n_per_axis;
    study.galerkin_dt = cfg.solver.dt;
    study.horizon = cfg.solver.horizon;
    auto rep = limit_study(study, flux, &noise, u0, cfg.ensemble);
    if (!study.self_convergence) {
      // reference trajectory of the first member, as cell averages
      double fv_dt = study.fv_dt, fine_dt = study.dt_fine;
      if (fv_dt <= 0) fv_dt = fine_dt > 0 ? fine_dt : study.galerkin_dt;
      if (fine_dt <= 0) fine_dt = std::min(study.galerkin_dt, fv_dt);
      FvConfig fvc;
      fvc.dim = study.dim;
      fvc.cells = study.fv_cells;
      fvc.dt = fv_dt;
      fvc.horizon = study.horizon;
      fvc.snapshot_every =
          static_cast<int>(std::llround(study.horizon / study.snapshots / fvc.dt));
      FvSolver fv(fvc, &flux, &noise);
      auto fine = WienerPath::sample(cfg.ensemble.seed0, fine_dt, study.horizon);
      auto ref = fv.simulate(
          cell_average(truncate_modes(u0, dealias_limit(u0.grid)), study.fv_cells), fine);
      std::string csv = "t,cell_index,value\n";
      for (std::size_t ti = 0; ti < ref.times.size(); ++ti)
        for (Eigen::Index c = 0; c < ref.snapshots[ti].size(); ++c)
          csv += fmt(ref.times[ti]) + "," + std::to_string(c) + "," +
                 fmt(ref.snapshots[ti][c]) + "\n";
      write_file(dir / "fv_reference.csv", csv);
    }
    std::string csv =
        "level,epsilon,delta,l1_mean,l1_se,vgap_mean,vgap_se,vgap_pair_mean,vgap_pair_se\n";
    json series = json::array();
    for (std::size_t i = 0; i < rep.levels.size(); ++i) {
      auto at = [&](const std::vector<MeanSe>& v) {
        return i < v.size() ? v[i] : MeanSe{};
      };
      csv += std::to_string(i) + "," + fmt(rep.levels[i].epsilon) + "," +
             fmt(rep.levels[i].delta) + "," + fmt(at(rep.l1_error).mean) + "," +
             fmt(at(rep.l1_error).se) + "," + fmt(at(rep.velocity_gap).mean) + "," +
             fmt(at(rep.velocity_gap).se) + "," + fmt(at(rep.velocity_gap_pair).mean) + "," +
             fmt(at(rep.velocity_gap_pair).se) + "\n";
      json row;
      row["epsilon"] = rep.levels[i].epsilon;
      row["delta"] = rep.levels[i].delta;
      row["l1_error"] = stat_json(at(rep.l1_error));
      row["velocity_gap"] = stat_json(at(rep.velocity_gap));
      row["velocity_gap_pair"] = stat_json(at(rep.velocity_gap_pair));
      series.push_back(row);
    }
    write_file(dir / "limit.csv", csv);
    write_report(dir, cfg.experiment, cfg.echo, series,
                 json{{"l1_decreasing", rep.pass_decreasing},
                      {"final_below_threshold", rep.pass_threshold},
                      {"velocity_gaps_decreasing", rep.pass_velocity}},
                 seeds,
                 json{{"lambda_box", rep.lambda_box_used},
                      {"aborted_seeds", rep.aborted_seeds}});
    if (!rep.aborted_seeds.empty()) return 2;
    return rep.pass() ? 0 : 1;
  }

  if (cfg.experiment == "kinetic-diag") {
    std::vector<SolutionPath> paths(cfg.ensemble.n_paths);
    std::vector<int> aborted(cfg.ensemble.n_paths, 0);
    parallel_for_members(cfg.ensemble.n_paths, cfg.ensemble.threads, [&](int m) {
      GalerkinSolver solver(cfg.solver, &flux, &noise);
      auto w = WienerPath::sample(cfg.ensemble.seed0 + static_cast<std::uint64_t>(m),
                                  cfg.solver.dt, cfg.solver.horizon);
      try {
        paths[m] = solver.simulate(u0, w, /*keep_fields=*/true);
      } catch (const BlowUpError&) {
        aborted[m] = 1;
      }
    });
    json aborted_seeds = json::array();
    for (int m = 0; m < cfg.ensemble.n_paths; ++m)
      if (aborted[m]) aborted_seeds.push_back(cfg.ensemble.seed0 + std::uint64_t(m));
    if (!aborted_seeds.empty()) {
      write_report(dir, cfg.experiment, cfg.echo, json::array(), json{{"completed", false}},
                   seeds, json{{"aborted_seeds", aborted_seeds}});
      return 2;
    }

    // shared lambda box over the ensemble
    double umax = 0;
    FourierWorkspaceD ws;
    for (const auto& p : paths)
      for (const auto& f : p.snapshots)
        umax = std::max(umax, ws.inverse(f).abs().maxCoeff());
    double box = cfg.kinetic_lambda_box > 0 ? cfg.kinetic_lambda_box
                                            : 1.25 * std::max(umax, 1e-12);

    double spacing = cfg.solver.dt * cfg.solver.snapshot_every;
    std::vector<double> thetas;
    for (int f : cfg.theta_factors) thetas.push_back(f * spacing);
    std::vector<std::vector<double>> modulus(thetas.size(),
                                             std::vector<double>(cfg.ensemble.n_paths));
    std::vector<double> trunc_err(cfg.ensemble.n_paths, 0.0);
    parallel_for_members(cfg.ensemble.n_paths, cfg.ensemble.threads, [&](int m) {
      auto h = kinetic_of(paths[m], box, cfg.m_lambda);
      FourierWorkspaceD wsm;
      for (std::size_t ti = 0; ti < paths[m].times.size(); ++ti) {
        auto rec = truncation_reconstruct(h, static_cast<int>(ti));
        auto u_phys = wsm.inverse(paths[m].snapshots[ti]);
        Eigen::ArrayXd clamped = u_phys.min(box).max(-box);
        trunc_err[m] = std::max(trunc_err[m], (rec - clamped).abs().maxCoeff());
      }
      for (std::size_t i = 0; i < thetas.size(); ++i)
        modulus[i][m] = translation_modulus(h, thetas[i], cfg.sobolev_order);
    });

    std::string csv = "theta,modulus_mean,modulus_se\n";
    std::vector<double> means;
    json series = json::array();
    for (std::size_t i = 0; i < thetas.size(); ++i) {
      MeanSe s;
      double sum = 0;
      for (double v : modulus[i]) sum += v;
      s.mean = sum / modulus[i].size();
      if (modulus[i].size() >= 2) {
        double ss = 0;
        for (double v : modulus[i]) ss += (v - s.mean) * (v - s.mean);
        s.se = std::sqrt(ss / (modulus[i].size() * (modulus[i].size() - 1.0)));
      }
      means.push_back(s.mean);
      csv += fmt(thetas[i]) + "," + fmt(s.mean) + "," + fmt(s.se) + "\n";
      json row;
      row["theta"] = thetas[i];
      row["modulus"] = stat_json(s);
      series.push_back(row);
    }
    write_file(dir / "modulus.csv", csv);

    auto diss = dissipation_density(paths[0], box, cfg.m_lambda);
    std::string hist = "lambda_lo,lambda_hi,mass\n";
    for (int b = 0; b < cfg.m_lambda; ++b)
      hist += fmt(diss.bin_edges[b]) + "," + fmt(diss.bin_edges[b + 1]) + "," +
              fmt(diss.bin_mass[b]) + "\n";
    write_file(dir / "dissipation_hist.csv", hist);

    double slope = fit_loglog_slope(thetas, means);
    double max_trunc = 0;
    for (double v : trunc_err) max_trunc = std::max(max_trunc, v);
    double cell = 2 * box / (cfg.m_lambda - 1);
    json flags{{"modulus_slope_ok", slope >= cfg.slope_threshold},
               {"truncation_within_cell", max_trunc <= 0.5 * cell + 1e-12}};
    write_report(dir, cfg.experiment, cfg.echo, series, flags, seeds,
                 json{{"slope", slope},
                      {"lambda_box", box},
                      {"max_truncation_error", max_trunc},
                      {"dissipation_total", diss.total}});
    return (slope >= cfg.slope_threshold && max_trunc <= 0.5 * cell + 1e-12) ? 0 : 1;
  }

  if (cfg.experiment == "nondegeneracy") {
    std::string csv = "eta,measure,fraction,measure_full_sphere,fraction_full_sphere\n";
    json series = json::array();
    for (double eta : cfg.nd_etas) {
      auto restricted =
          nondegeneracy_measure(flux, cfg.nd_lambda_min, cfg.nd_lambda_max, eta,
                                cfg.nd_directions, cfg.nd_lambda_nodes, cfg.nd_min_xi);
      auto full = nondegeneracy_measure(flux, cfg.nd_lambda_min, cfg.nd_lambda_max, eta,
                                        cfg.nd_directions, cfg.nd_lambda_nodes, 0.0);
      csv += fmt(eta) + "," + fmt(restricted.measure) + "," + fmt(restricted.worst_fraction) +
             "," + fmt(full.measure) + "," + fmt(full.worst_fraction) + "\n";
      json row;
      row["eta"] = eta;
      row["measure"] = restricted.measure;
      row["fraction"] = restricted.worst_fraction;
      row["measure_full_sphere"] = full.measure;
      row["fraction_full_sphere"] = full.worst_fraction;
      series.push_back(row);
    }
    write_file(dir / "nondegeneracy.csv", csv);
    write_report(dir, cfg.experiment, cfg.echo, series, json{{"completed", true}}, seeds,
                 json::object());
    return 0;
  }

  throw ConfigError("unhandled experiment '" + cfg.experiment + "'");
}

}  // namespace dcap
