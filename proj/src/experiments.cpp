#include "dcap/experiments.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace dcap {

void parallel_for_members(int n_members, int threads, const std::function<void(int)>& work) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n_members));
  if (threads == 1) {
    for (int i = 0; i < n_members; ++i) work(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = next.fetch_add(1); i < n_members; i = next.fetch_add(1)) work(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

MeanSe reduce(const std::vector<double>& values) {
  MeanSe out;
  const auto n = values.size();
  if (n == 0) return out;
  double sum = 0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(n);
  if (n >= 2) {
    double ss = 0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / (static_cast<double>(n) * (static_cast<double>(n) - 1)));
  }
  return out;
}

// mean <= bound within the Monte-Carlo tolerance 3 SE
bool within_bound(const MeanSe& lhs, double bound) {
  double tol = lhs.mean > 0 ? 1.0 + 3.0 * lhs.se / lhs.mean : 1.0;
  return lhs.mean <= bound * tol + 1e-14;
}

}  // namespace

double energy_bound_constant(double t, double c_phi, double delta, double u0_l2_sq,
                             double u0_h1_sq) {
  double y0 = 0.5 * (1.0 - delta) * u0_l2_sq + 0.5 * delta * u0_h1_sq;
  return std::exp(c_phi * t) * (c_phi * t + y0);
}

double weighted_bound_constant(double t, double c_phi, double epsilon, double delta,
                               double u0_h1_sq, double u0_h2_sq, double energy_const,
                               double flux_lipschitz, double flux_sup_l2) {
  double lead = 0.5 * delta * (1.0 - delta) * u0_h1_sq + 0.5 * delta * delta * u0_h2_sq;
  double mid = energy_const * (0.5 + c_phi * t + delta +
                               0.5 * delta / (epsilon * epsilon) * flux_lipschitz *
                                   flux_lipschitz);
  double tail = c_phi * t + 0.5 * t * delta / epsilon * flux_sup_l2 * flux_sup_l2;
  return lead + mid + tail;
}

double fourth_moment_bound(double y0, double c_phi, double horizon) {
  double base = 3.0 * (y0 + c_phi * c_phi * horizon) * (y0 + c_phi * c_phi * horizon) +
                24.0 * c_phi * c_phi * horizon;
  double rate = 48.0 * std::pow(c_phi, 4) * horizon + 768.0 * c_phi * c_phi;
  return 16.0 * base * std::exp(rate * horizon);
}

EnergyReport run_ensemble(const SolverConfig& config, const FluxModel* flux,
                          const NoiseModel* noise, const SpectralFieldD& u0,
                          const EnsembleConfig& ens) {
  config.validate();
  if (ens.n_paths < 1) throw std::invalid_argument("run_ensemble: need at least one path");

  struct MemberResult {
    std::vector<double> l2, h1, h2, diss, h2int;
    double sup_l2_sq = 0;
    bool aborted = false;
  };
  std::vector<MemberResult> results(ens.n_paths);

  parallel_for_members(ens.n_paths, ens.threads, [&](int m) {
    GalerkinSolver solver(config, flux, noise);
    auto path = WienerPath::sample(ens.seed0 + static_cast<std::uint64_t>(m), config.dt,
                                   config.horizon);
    auto& r = results[m];
    try {
      auto sol = solver.simulate(u0, path, /*keep_fields=*/false);
      r.l2 = sol.l2_sq;
      r.h1 = sol.h1_sq;
      r.h2 = sol.h2_sq;
      r.diss = sol.dissipation;
      r.h2int = sol.h2_time_integral;
      r.sup_l2_sq = sol.sup_l2_sq;
    } catch (const BlowUpError&) {
      r.aborted = true;
    }
  });

  EnergyReport rep;
  rep.n_paths = ens.n_paths;
  rep.se_applicable = ens.n_paths >= 2;
  for (int m = 0; m < ens.n_paths; ++m) {
    rep.seeds.push_back(ens.seed0 + static_cast<std::uint64_t>(m));
    if (results[m].aborted) rep.aborted_seeds.push_back(rep.seeds.back());
  }

  const auto n_steps = config.steps();
  const auto n_times = static_cast<std::size_t>(n_steps / config.snapshot_every) + 1;
  for (std::size_t j = 0; j < n_times; ++j)
    rep.times.push_back(static_cast<double>(j * config.snapshot_every) * config.dt);

  GalerkinSolver proj_solver(config, flux, noise);
  auto u0p = proj_solver.project(u0);
  const double u0_l2 = u0p.l2_norm_sq();
  const double u0_h1 = sobolev_norm_sq(u0p, 1.0);
  const double u0_h2 = sobolev_norm_sq(u0p, 2.0);
  const double c_phi = noise ? noise->linear_growth_const() : 0.0;
  const double delta = config.delta, epsilon = config.epsilon;
  rep.weighted_applicable = delta <= epsilon;

  const double flux_lip = flux ? flux->lipschitz_bound() : 0.0;
  const double flux_sup = flux ? flux->sup_profile_l2() : 0.0;

  rep.pass_energy = rep.pass_weighted = rep.pass_p4 = true;
  std::vector<double> scratch;
  scratch.reserve(ens.n_paths);
  auto collect = [&](auto&& extract) {
    scratch.clear();
    for (const auto& r : results)
      if (!r.aborted) scratch.push_back(extract(r));
    return reduce(scratch);
  };

  for (std::size_t j = 0; j < n_times; ++j) {
    rep.l2_sq.push_back(collect([&](const MemberResult& r) { return r.l2[j]; }));
    rep.h1_sq.push_back(collect([&](const MemberResult& r) { return r.h1[j]; }));
    rep.h2_sq.push_back(collect([&](const MemberResult& r) { return r.h2[j]; }));
    rep.dissipation.push_back(collect([&](const MemberResult& r) { return r.diss[j]; }));
    rep.energy_lhs.push_back(collect([&](const MemberResult& r) {
      return 0.5 * (1 - delta) * r.l2[j] + 0.5 * delta * r.h1[j] + r.diss[j];
    }));
    rep.weighted_lhs.push_back(collect([&](const MemberResult& r) {
      return 0.5 * delta * (1 - delta) * r.h1[j] + 0.5 * delta * delta * r.h2[j] +
             0.5 * epsilon * delta * r.h2int[j];
    }));
    double t = rep.times[j];
    double c0 = energy_bound_constant(t, c_phi, delta, u0_l2, u0_h1) * ens.bound_scale;
    double c1 = weighted_bound_constant(t, c_phi, epsilon, delta, u0_h1, u0_h2,
                                        energy_bound_constant(t, c_phi, delta, u0_l2, u0_h1),
                                        flux_lip, flux_sup) *
                ens.bound_scale;
    rep.energy_bound.push_back(c0);
    rep.weighted_bound.push_back(c1);
    if (!within_bound(rep.energy_lhs.back(), c0)) rep.pass_energy = false;
    if (rep.weighted_applicable && !within_bound(rep.weighted_lhs.back(), c1))
      rep.pass_weighted = false;
  }

  rep.p4_sup = collect([](const MemberResult& r) { return r.sup_l2_sq * r.sup_l2_sq; });
  rep.p4_dissipation =
      collect([](const MemberResult& r) { return r.diss.back() * r.diss.back(); });
  double y0 = 0.5 * (1 - delta) * u0_l2 + 0.5 * delta * u0_h1;
  rep.p4_bound = fourth_moment_bound(y0, c_phi, config.horizon) * ens.bound_scale;
  rep.pass_p4 = within_bound(rep.p4_sup, rep.p4_bound) &&
                within_bound(rep.p4_dissipation, rep.p4_bound);
  return rep;
}

StabilityReport stability_experiment(const SolverConfig& config, const FluxModel* flux,
                                     const NoiseModel* noise, const SpectralFieldD& u0,
                                     const SpectralFieldD& direction,
                                     const std::vector<double>& magnitudes,
                                     const EnsembleConfig& ens) {
  config.validate();
  StabilityReport rep;
  rep.n_paths = ens.n_paths;
  rep.magnitudes = magnitudes;

  GalerkinSolver proto(config, flux, noise);
  auto u0p = proto.project(u0);
  auto dirp = proto.project(direction);
  double dir_norm = std::sqrt(dirp.l2_norm_sq());
  if (dir_norm == 0) {
    rep.identical_initial = true;
    for (std::size_t i = 0; i < magnitudes.size(); ++i) {
      rep.distances.push_back(0);
      rep.ratios.push_back(MeanSe{});
    }
    rep.pass = true;
    return rep;
  }

  const auto n_steps = config.steps();
  for (double eta : magnitudes) {
    SpectralFieldD v0 = u0p;
    v0.coeffs += eta * dirp.coeffs;
    double dist_sq = eta * eta * dir_norm * dir_norm;
    rep.distances.push_back(std::sqrt(dist_sq));
    if (dist_sq == 0) {
      rep.identical_initial = true;
      rep.ratios.push_back(MeanSe{});
      continue;
    }
    std::vector<double> ratios(ens.n_paths);
    parallel_for_members(ens.n_paths, ens.threads, [&](int m) {
      GalerkinSolver solver(config, flux, noise);
      auto w = WienerPath::sample(ens.seed0 + static_cast<std::uint64_t>(m), config.dt,
                                  config.horizon);
      SpectralFieldD u = u0p, v = v0;
      double sup = (u.coeffs - v.coeffs).abs2().sum();
      for (Eigen::Index i = 0; i < n_steps; ++i) {
        double dW = w.increments()[i];
        solver.em_step(u, dW, (i + 1) * config.dt);
        solver.em_step(v, dW, (i + 1) * config.dt);
        sup = std::max(sup, (u.coeffs - v.coeffs).abs2().sum());
      }
      ratios[m] = sup / dist_sq;
    });
    rep.ratios.push_back(reduce(ratios));
  }

  double lo = 1e300, hi = 0;
  for (const auto& r : rep.ratios) {
    if (r.mean <= 0) continue;
    lo = std::min(lo, r.mean);
    hi = std::max(hi, r.mean);
  }
  rep.variation = lo < hi ? hi / lo : 1.0;
  rep.pass = rep.variation < 10.0;
  return rep;
}

namespace {

struct MemberSeries {
  // comparison-mesh sample series per level (and the reference, if any)
  std::vector<std::vector<Eigen::ArrayXd>> level_series;
  std::vector<Eigen::ArrayXd> reference_series;
  double umax = 0;
  bool aborted = false;
};

}  // namespace

LimitStudyReport limit_study(const LimitStudyConfig& study, const FluxModel& flux,
                             const NoiseModel* noise, const SpectralFieldD& u0,
                             const EnsembleConfig& ens) {
  if (study.levels.empty()) throw std::invalid_argument("limit_study: no levels given");
  for (const auto& lvl : study.levels) {
    if (!(lvl.epsilon > 0) || !(lvl.delta > 0))
      throw std::invalid_argument("limit_study: levels need positive epsilon and delta");
    if (lvl.delta / (lvl.epsilon * lvl.epsilon) > study.neps_bound + 1e-12)
      throw std::invalid_argument(
          "limit_study: delta/epsilon^2 exceeds the singular-limit bound " +
          std::to_string(study.neps_bound));
  }
  const bool reference_mode = !study.self_convergence;
  if (study.levels.size() < 2 && study.self_convergence)
    throw std::invalid_argument("limit_study: self-convergence needs >= 2 levels");

  double fv_dt = study.fv_dt;
  double dt_fine = study.dt_fine;
  if (reference_mode && fv_dt <= 0) fv_dt = dt_fine > 0 ? dt_fine : study.galerkin_dt;
  if (dt_fine <= 0) dt_fine = reference_mode ? std::min(study.galerkin_dt, fv_dt)
                                             : study.galerkin_dt;

  // common snapshot lattice
  const double snap_dt = study.horizon / study.snapshots;
  auto snap_every = [&](double dt) {
    double f = snap_dt / dt;
    auto k = static_cast<int>(std::llround(f));
    if (k < 1 || std::abs(f - k) > 1e-9)
      throw std::invalid_argument("limit_study: snapshot spacing must be a multiple of dt");
    return k;
  };

  SolverConfig galcfg;
  galcfg.dim = study.dim;
  galcfg.n_per_axis = study.n_per_axis;
  galcfg.dt = study.galerkin_dt;
  galcfg.horizon = study.horizon;
  galcfg.snapshot_every = snap_every(study.galerkin_dt);

  FvConfig fvcfg;
  fvcfg.dim = study.dim;
  fvcfg.cells = study.fv_cells;
  fvcfg.dt = fv_dt;
  fvcfg.horizon = study.horizon;
  fvcfg.snapshot_every = reference_mode ? snap_every(fv_dt) : 1;

  // per-level flux models (optionally tied to the regularization ladder)
  std::vector<FluxModel> level_flux;
  for (std::size_t i = 0; i < study.levels.size(); ++i) {
    if (study.regularize_with_level && !flux.is_null())
      level_flux.push_back(
          regularize(flux, study.level_offset + static_cast<int>(i), study.sigma0));
    else
      level_flux.push_back(flux);
  }

  const int comparison_cells = reference_mode ? study.fv_cells : study.n_per_axis;

  std::vector<MemberSeries> members(ens.n_paths);
  parallel_for_members(ens.n_paths, ens.threads, [&](int m) {
    auto& mem = members[m];
    auto fine = WienerPath::sample(ens.seed0 + static_cast<std::uint64_t>(m), dt_fine,
                                   study.horizon);
    try {
      if (reference_mode) {
        FvSolver fv(fvcfg, &flux, noise);
        Eigen::ArrayXd fv0 =
            cell_average(truncate_modes(u0, dealias_limit(u0.grid)), study.fv_cells);
        auto ref = fv.simulate(fv0, fine, true);
        mem.reference_series = ref.snapshots;
        for (const auto& s : ref.snapshots) mem.umax = std::max(mem.umax, s.abs().maxCoeff());
      }
      for (std::size_t lvl = 0; lvl < study.levels.size(); ++lvl) {
        SolverConfig c = galcfg;
        c.epsilon = study.levels[lvl].epsilon;
        c.delta = study.levels[lvl].delta;
        GalerkinSolver solver(c, &level_flux[lvl], noise);
        auto sol = solver.simulate(u0, fine, true);
        std::vector<Eigen::ArrayXd> series;
        series.reserve(sol.snapshots.size());
        if (reference_mode) {
          for (const auto& f : sol.snapshots) series.push_back(cell_average(f, comparison_cells));
        } else {
          FourierWorkspaceD ws;
          for (const auto& f : sol.snapshots) series.push_back(ws.inverse(f));
        }
        for (const auto& s : series) mem.umax = std::max(mem.umax, s.abs().maxCoeff());
        mem.level_series.push_back(std::move(series));
      }
    } catch (const BlowUpError&) {
      mem.aborted = true;
    }
  });

  LimitStudyReport rep;
  rep.levels = study.levels;
  rep.n_paths = ens.n_paths;
  for (int m = 0; m < ens.n_paths; ++m)
    if (members[m].aborted)
      rep.aborted_seeds.push_back(ens.seed0 + static_cast<std::uint64_t>(m));

  double umax = 0;
  for (const auto& mem : members) umax = std::max(umax, mem.umax);
  rep.lambda_box_used = study.lambda_box > 0 ? study.lambda_box : 1.25 * std::max(umax, 1e-12);

  TorusGrid cmp_grid(study.dim, comparison_cells);
  const double wq = cmp_grid.quad_weight();
  std::vector<double> snap_times;
  for (int j = 0; j <= study.snapshots; ++j) snap_times.push_back(j * snap_dt);

  // velocity-average weight rho = 1/2 on [-L, L]
  auto truncation_series = [&](const std::vector<Eigen::ArrayXd>& series) {
    auto h = kinetic_from_samples(snap_times, cmp_grid, series, rep.lambda_box_used,
                                  study.m_lambda);
    std::vector<Eigen::ArrayXd> out;
    out.reserve(series.size());
    for (std::size_t t = 0; t < series.size(); ++t)
      out.push_back(truncation_reconstruct(h, static_cast<int>(t)));
    return out;
  };

  auto l1_time_integral = [&](const std::vector<Eigen::ArrayXd>& a,
                              const std::vector<Eigen::ArrayXd>& b) {
    double acc = 0;
    for (std::size_t t = 0; t + 1 < a.size(); ++t)
      acc += (a[t] - b[t]).abs().mean() * snap_dt;
    return acc;
  };
  auto l2_gap_time_integral = [&](const std::vector<Eigen::ArrayXd>& a,
                                  const std::vector<Eigen::ArrayXd>& b) {
    double acc = 0;
    for (std::size_t t = 0; t + 1 < a.size(); ++t)
      acc += (a[t] - b[t]).square().sum() * wq * snap_dt;
    return acc;
  };

  const auto n_levels = study.levels.size();
  std::vector<std::vector<double>> l1(n_levels), vgap(n_levels), vgap_pair(n_levels);
  for (int m = 0; m < ens.n_paths; ++m) {
    const auto& mem = members[m];
    if (mem.aborted) continue;
    std::vector<std::vector<Eigen::ArrayXd>> trunc;
    for (const auto& series : mem.level_series) trunc.push_back(truncation_series(series));
    std::vector<Eigen::ArrayXd> trunc_ref;
    if (reference_mode) trunc_ref = truncation_series(mem.reference_series);

    for (std::size_t lvl = 0; lvl < n_levels; ++lvl) {
      if (reference_mode)
        l1[lvl].push_back(l1_time_integral(mem.level_series[lvl], mem.reference_series));
      else if (lvl + 1 < n_levels)
        l1[lvl].push_back(l1_time_integral(mem.level_series[lvl], mem.level_series[lvl + 1]));
      if (reference_mode)
        vgap[lvl].push_back(l2_gap_time_integral(trunc[lvl], trunc_ref));
      if (lvl + 1 < n_levels)
        vgap_pair[lvl].push_back(l2_gap_time_integral(trunc[lvl], trunc[lvl + 1]));
    }
  }

  for (std::size_t lvl = 0; lvl < n_levels; ++lvl) {
    if (!l1[lvl].empty()) rep.l1_error.push_back(reduce(l1[lvl]));
    if (!vgap[lvl].empty()) rep.velocity_gap.push_back(reduce(vgap[lvl]));
    if (!vgap_pair[lvl].empty()) rep.velocity_gap_pair.push_back(reduce(vgap_pair[lvl]));
  }

  auto strictly_decreasing = [](const std::vector<MeanSe>& v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
      if (!(v[i + 1].mean < v[i].mean)) return false;
    return !v.empty();
  };
  rep.pass_decreasing = strictly_decreasing(rep.l1_error);
  rep.pass_velocity = strictly_decreasing(reference_mode ? rep.velocity_gap
                                                         : rep.velocity_gap_pair);
  if (study.final_error_threshold > 0 && !rep.l1_error.empty())
    rep.pass_threshold = rep.l1_error.back().mean <= study.final_error_threshold;
  return rep;
}

std::vector<MeanSe> kinetic_compactness(const LimitStudyConfig& study, const FluxModel& flux,
                                        const NoiseModel* noise, const SpectralFieldD& u0,
                                        const EnsembleConfig& ens) {
  LimitStudyConfig s = study;
  s.self_convergence = true;
  auto rep = limit_study(s, flux, noise, u0, ens);
  return rep.velocity_gap_pair;
}

}  // namespace dcap
