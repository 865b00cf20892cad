// Acceptance suite: every check is library-driven and prints one line.
// Usage: acceptance [criterion-number]; no argument runs all twelve.

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "dcap/run_config.hpp"

using namespace dcap;

namespace {

FourierWorkspaceD g_ws;

SpectralFieldD sine_field(const TorusGrid& g, double amp = 1.0, int mode = 1) {
  Eigen::ArrayXd s(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i) {
    double v = std::sin(two_pi * mode * g.coord(g.axis_bin(i, 0)));
    if (g.dim() == 2) v *= std::sin(two_pi * mode * g.coord(g.axis_bin(i, 1)));
    s[i] = amp * v;
  }
  return g_ws.forward(g, s);
}

SpectralFieldD random_band_limited(const TorusGrid& g, int band, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::ArrayXd s(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i) s[i] = nd(rng);
  return truncate_modes(g_ws.forward(g, s), band);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// 1. With f = 0 and no noise the integrator reproduces the per-mode
//    integrating factor to 1e-10 relative, for any dt.
bool criterion1(std::string& msg) {
  double worst = 0;
  for (double dt : {0.5, 0.02, 1e-3}) {
    for (auto [eps, del] : {std::pair{0.5, 0.5}, {0.1, 0.01}, {0.01, 0.25}}) {
      TorusGrid g(1, 32);
      SolverConfig cfg;
      cfg.n_per_axis = 32;
      cfg.epsilon = eps;
      cfg.delta = del;
      cfg.dt = dt;
      cfg.horizon = 1.0;
      cfg.snapshot_every = static_cast<int>(cfg.steps());
      auto flux = FluxModel::none(g);
      auto noise = NoiseModel::preset("none", 0);
      GalerkinSolver solver(cfg, &flux, &noise);
      auto u0 = solver.project(random_band_limited(g, 10, 99));
      auto w = WienerPath::sample(1, dt, 1.0);
      auto sol = solver.simulate(u0, w);
      const auto& uT = sol.snapshots.back();
      for (std::int64_t i = 0; i < g.size(); ++i) {
        double lam2 = lambda_sq(g, i);
        double rate = eps * (lam2 - 1) / (1 - del + del * lam2);
        auto want = u0.coeffs[i] * std::exp(-rate * 1.0);
        double denom = std::max(std::abs(want), 1e-30);
        if (std::abs(want) > 1e-14)
          worst = std::max(worst, std::abs(uT.coeffs[i] - want) / denom);
      }
    }
  }
  msg = "max relative error " + std::to_string(worst);
  return worst < 1e-10;
}

// 2. Additive noise: Monte-Carlo E||u(T)||^2 within 3 SE of the per-mode
//    Ito identity decayed(||u0||^2) + sigma^2 T.
bool criterion2(std::string& msg) {
  TorusGrid g(1, 32);
  SolverConfig cfg;
  cfg.n_per_axis = 32;
  cfg.epsilon = 0.1;
  cfg.delta = 0.01;
  cfg.dt = 1e-3;
  cfg.horizon = 1.0;
  cfg.snapshot_every = static_cast<int>(cfg.steps());
  auto flux = FluxModel::none(g);
  auto noise = NoiseModel::preset("noise-const", 0.3);
  auto u0 = sine_field(g);
  EnsembleConfig ens;
  ens.n_paths = 10000;
  ens.seed0 = 2024;
  auto rep = run_ensemble(cfg, &flux, &noise, u0, ens);
  double lam2 = 1 + 4 * M_PI * M_PI;
  double rate = cfg.epsilon * (lam2 - 1) / (1 - cfg.delta + cfg.delta * lam2);
  double want = 0.5 * std::exp(-2 * rate * cfg.horizon) + 0.3 * 0.3 * cfg.horizon;
  const auto& got = rep.l2_sq.back();
  msg = "E||u(T)||^2 = " + std::to_string(got.mean) + " vs " + std::to_string(want) +
        " (3 SE = " + std::to_string(3 * got.se) + ")";
  return std::abs(got.mean - want) <= 3 * got.se;
}

// 3. The Gronwall energy bound, its weighted counterpart and the fourth
//    moment bound hold at every sample time within 3 SE.
bool criterion3(std::string& msg) {
  TorusGrid g(1, 32);
  auto flux = FluxModel::preset("burgers1d", g, 1.0, 2.0);
  auto noise = NoiseModel::preset("noise-linear", 0.2);
  SolverConfig cfg;
  cfg.n_per_axis = 32;
  cfg.epsilon = 0.05;
  cfg.delta = 0.0025;
  cfg.dt = 1e-3;
  cfg.horizon = 1.0;
  cfg.snapshot_every = 50;
  EnsembleConfig ens;
  ens.n_paths = 512;
  ens.seed0 = 300;
  auto rep = run_ensemble(cfg, &flux, &noise, sine_field(g), ens);
  msg = std::string("energy ") + (rep.pass_energy ? "ok" : "violated") + ", weighted " +
        (rep.pass_weighted ? "ok" : "violated") + ", p4 " + (rep.pass_p4 ? "ok" : "violated");
  return rep.pass_energy && rep.pass_weighted && rep.pass_p4 && rep.aborted_seeds.empty();
}

// 4. Geometry compatibility of every shipped flux preset: spectral
//    divergence below 1e-10 and Stokes residual below 1e-8 for 100 random
//    band-limited fields.
bool criterion4(std::string& msg) {
  double worst_div = 0, worst_res = 0;
  TorusGrid g1(1, 64), g2(2, 32);
  struct Case {
    FluxModel flux;
    TorusGrid grid;
    int band;
  };
  std::vector<Case> cases;
  cases.push_back({FluxModel::preset("burgers1d", g1), g1, 8});
  cases.push_back({FluxModel::preset("linear1d", g1), g1, 8});
  cases.push_back({FluxModel::preset("stream2d-smooth", g2), g2, 4});
  cases.push_back({FluxModel::preset("stream2d-rough", g2), g2, 4});
  for (auto& c : cases) {
    worst_div = std::max(worst_div, max_divergence(c.flux));
    for (int trial = 0; trial < 100; ++trial) {
      auto u = random_band_limited(c.grid, c.band, 7000 + trial);
      worst_res = std::max(worst_res, stokes_residual(c.flux, u, g_ws));
    }
  }
  msg = "max |div f| = " + std::to_string(worst_div) +
        ", max Stokes residual = " + std::to_string(worst_res);
  return worst_div < 1e-10 && worst_res < 1e-8;
}

// 5. Coupled-noise stability ratio varies by < 10x across four decades of
//    initial separation.
bool criterion5(std::string& msg) {
  TorusGrid g(1, 32);
  auto flux = FluxModel::preset("burgers1d", g, 1.0, 2.0);
  auto noise = NoiseModel::preset("noise-linear", 0.2);
  SolverConfig cfg;
  cfg.n_per_axis = 32;
  cfg.epsilon = 0.05;
  cfg.delta = 0.0025;
  cfg.dt = 1e-3;
  cfg.horizon = 0.5;
  EnsembleConfig ens;
  ens.n_paths = 128;
  ens.seed0 = 500;
  Eigen::ArrayXd c(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i) c[i] = std::cos(two_pi * 2 * g.coord(i));
  auto dir = g_ws.forward(g, c);
  auto rep = stability_experiment(cfg, &flux, &noise, sine_field(g), dir,
                                  {1e-1, 1e-2, 1e-3, 1e-4}, ens);
  msg = "ratio variation " + std::to_string(rep.variation) + "x";
  return rep.pass;
}

// 6. Strong self-convergence order 0.5 +- 0.15 against a coupled dt = 1e-5
//    reference under multiplicative noise.
bool criterion6(std::string& msg) {
  TorusGrid g(1, 32);
  auto flux = FluxModel::none(g);
  auto noise = NoiseModel::preset("noise-linear", 0.2);
  auto u0 = sine_field(g);
  const double T = 0.25, dt_ref = 1e-5;
  const int n_paths = 256;
  std::vector<double> dts = {1e-2, 1e-3, 1e-4};
  std::vector<double> errs(dts.size(), 0.0);
  std::vector<std::vector<double>> per_member(n_paths);
  parallel_for_members(n_paths, 0, [&](int m) {
    auto fine = WienerPath::sample(6000 + m, dt_ref, T);
    SolverConfig rc;
    rc.n_per_axis = 32;
    rc.epsilon = 0.01;
    rc.delta = 0.01;
    rc.dt = dt_ref;
    rc.horizon = T;
    rc.snapshot_every = static_cast<int>(rc.steps());
    GalerkinSolver ref(rc, &flux, &noise);
    auto uref = ref.simulate(u0, fine).snapshots.back();
    per_member[m].resize(dts.size());
    for (std::size_t d = 0; d < dts.size(); ++d) {
      SolverConfig c = rc;
      c.dt = dts[d];
      c.snapshot_every = static_cast<int>(c.steps());
      GalerkinSolver solver(c, &flux, &noise);
      auto u = solver.simulate(u0, fine).snapshots.back();
      per_member[m][d] = std::sqrt((u.coeffs - uref.coeffs).abs2().sum());
    }
  });
  for (int m = 0; m < n_paths; ++m)
    for (std::size_t d = 0; d < dts.size(); ++d) errs[d] += per_member[m][d] / n_paths;
  double slope = loglog_slope(dts, errs);
  msg = "fitted strong order " + std::to_string(slope);
  return slope >= 0.35 && slope <= 0.65;
}

// 7. Kinetic identities: two-valued, lambda-monotone, and truncation within
//    half a lambda cell, on 100 random fields.
bool criterion7(std::string& msg) {
  TorusGrid g(1, 16);
  const double L = 2.0;
  const int m_lambda = 33;
  std::mt19937_64 rng(70);
  std::normal_distribution<double> nd(0.0, 0.7);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::ArrayXd s(g.size());
    for (std::int64_t i = 0; i < g.size(); ++i) s[i] = nd(rng);
    auto h = kinetic_from_samples({0.0}, g, {s}, L, m_lambda);
    for (Eigen::Index x = 0; x < g.size(); ++x)
      for (int l = 0; l < m_lambda; ++l) {
        auto v = h.values[0](x, l);
        if (v != 1 && v != -1) {
          msg = "value outside {-1, +1}";
          return false;
        }
        if (l > 0 && h.values[0](x, l) > h.values[0](x, l - 1)) {
          msg = "not monotone in lambda";
          return false;
        }
      }
    auto rec = truncation_reconstruct(h, 0);
    for (std::int64_t x = 0; x < g.size(); ++x)
      worst = std::max(worst, std::abs(rec[x] - std::clamp(s[x], -L, L)));
  }
  double cell = 2 * L / (m_lambda - 1);
  msg = "max truncation error " + std::to_string(worst) + " vs cell " + std::to_string(cell);
  return worst <= 0.5 * cell + 1e-12;
}

// 8. Temporal translation modulus grows with slope >= 0.4 in theta.
bool criterion8(std::string& msg) {
  TorusGrid g(1, 32);
  auto flux = FluxModel::preset("burgers1d", g, 1.0, 2.0);
  auto noise = NoiseModel::preset("noise-linear", 0.2);
  SolverConfig cfg;
  cfg.n_per_axis = 32;
  cfg.epsilon = 0.05;
  cfg.delta = 0.0025;
  cfg.dt = 1e-3;
  cfg.horizon = 0.5;
  cfg.snapshot_every = 5;
  const int n_paths = 64;
  const double spacing = cfg.dt * cfg.snapshot_every;
  std::vector<int> factors = {2, 4, 8, 16};
  std::vector<std::vector<double>> modulus(factors.size(), std::vector<double>(n_paths));
  parallel_for_members(n_paths, 0, [&](int m) {
    GalerkinSolver solver(cfg, &flux, &noise);
    auto w = WienerPath::sample(800 + m, cfg.dt, cfg.horizon);
    auto sol = solver.simulate(sine_field(g, 0.5), w);
    auto h = kinetic_of(sol, 2.0, 33);
    for (std::size_t i = 0; i < factors.size(); ++i)
      modulus[i][m] = translation_modulus(h, factors[i] * spacing, 4);
  });
  std::vector<double> thetas, means;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    double acc = 0;
    for (double v : modulus[i]) acc += v;
    thetas.push_back(factors[i] * spacing);
    means.push_back(acc / n_paths);
  }
  double slope = loglog_slope(thetas, means);
  msg = "E[modulus] slope " + std::to_string(slope);
  return slope >= 0.4;
}

// 9. Vanishing diffusion-capillarity ladder against the finite-volume
//    reference: L1 errors and velocity-average gaps strictly decreasing.
//    A mean flow dominates the error with the wave-speed restoration
//    channel (the coefficient mass factor slows transport at coarse levels),
//    which is monotone along the ladder.
bool criterion9(std::string& msg) {
  TorusGrid g(1, 64);
  auto flux = FluxModel::preset("burgers1d", g, 1.0, 2.0);
  auto noise = NoiseModel::preset("noise-linear", 0.2);
  Eigen::ArrayXd s(g.size());
  for (int i = 0; i < g.n(); ++i) s[i] = 1.0 + 0.3 * std::sin(two_pi * g.coord(i));
  auto u0 = g_ws.forward(g, s);
  LimitStudyConfig study;
  study.dim = 1;
  study.n_per_axis = 64;
  study.galerkin_dt = 1e-3;
  study.dt_fine = 1e-4;
  study.horizon = 0.25;
  study.snapshots = 10;
  study.fv_cells = 1024;
  study.fv_dt = 2e-4;
  study.m_lambda = 33;
  for (int k = 2; k <= 6; ++k) {
    double eps = std::pow(2.0, -k);
    study.levels.push_back({eps, eps * eps});
  }
  EnsembleConfig ens;
  ens.n_paths = 32;
  ens.seed0 = 900;
  auto rep = limit_study(study, flux, &noise, u0, ens);
  bool pairs_ok = true;
  for (std::size_t i = 0; i + 1 < rep.velocity_gap_pair.size(); ++i)
    if (!(rep.velocity_gap_pair[i + 1].mean < rep.velocity_gap_pair[i].mean)) pairs_ok = false;
  msg = "L1 errors";
  for (const auto& e : rep.l1_error) msg += " " + std::to_string(e.mean);
  msg += pairs_ok ? " | velocity gaps decreasing" : " | velocity gaps NOT decreasing";
  return rep.pass_decreasing && pairs_ok && rep.aborted_seeds.empty();
}

// 10. Two-dimensional discontinuous-flux self-convergence: Cauchy L1
//     differences decreasing along the ladder with level-tied mollification.
//     Initial data at wavenumber 3 puts every level in the regime where the
//     per-level distance to the limit is geometric, so consecutive
//     differences order cleanly at this four-level window.
bool criterion10(std::string& msg) {
  TorusGrid g(2, 64);
  auto flux = FluxModel::preset("stream2d-rough", g, 1.0, 2.5);
  auto noise = NoiseModel::preset("noise-linear", 0.2);
  Eigen::ArrayXd s(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i)
    s[i] = 0.3 * std::sin(two_pi * 3 * g.coord(g.axis_bin(i, 0)));
  auto u0 = g_ws.forward(g, s);
  LimitStudyConfig study;
  study.self_convergence = true;
  study.dim = 2;
  study.n_per_axis = 64;
  study.galerkin_dt = 5e-4;
  study.horizon = 0.5;
  study.snapshots = 20;
  study.regularize_with_level = true;
  study.level_offset = 2;
  study.sigma0 = 0.1;
  study.m_lambda = 17;
  for (int k = 2; k <= 5; ++k) {
    double eps = std::pow(2.0, -k);
    study.levels.push_back({eps, eps * eps});
  }
  EnsembleConfig ens;
  ens.n_paths = 16;
  ens.seed0 = 1000;
  auto rep = limit_study(study, flux, &noise, u0, ens);
  msg = "Cauchy L1 differences";
  for (const auto& e : rep.l1_error) msg += " " + std::to_string(e.mean);
  return rep.pass_decreasing && rep.aborted_seeds.empty();
}

// 11. Pathwise weak residual shrinks by >= 1.5x under dt -> dt/4 for the
//     three test functions 1, cos 2 pi x, sin 4 pi x.
bool criterion11(std::string& msg) {
  TorusGrid g(1, 32);
  auto flux = FluxModel::preset("burgers1d", g, 1.0, 2.0);
  auto noise = NoiseModel::preset("noise-linear", 0.2);
  auto u0 = sine_field(g, 0.5);
  std::vector<SpectralFieldD> phis;
  {
    SpectralFieldD one(g);
    one.coeff(0) = 1.0;
    phis.push_back(one);
    Eigen::ArrayXd c(g.size()), s(g.size());
    for (int i = 0; i < g.n(); ++i) {
      c[i] = std::cos(two_pi * g.coord(i));
      s[i] = std::sin(2 * two_pi * g.coord(i));
    }
    phis.push_back(g_ws.forward(g, c));
    phis.push_back(g_ws.forward(g, s));
  }
  SolverConfig coarse;
  coarse.n_per_axis = 32;
  coarse.epsilon = 0.05;
  coarse.delta = 0.0025;
  coarse.dt = 2e-3;
  coarse.horizon = 0.25;
  SolverConfig fine = coarse;
  fine.dt = coarse.dt / 4;
  auto w = WienerPath::sample(42, fine.dt, coarse.horizon);
  GalerkinSolver sc(coarse, &flux, &noise), sf(fine, &flux, &noise);
  auto solc = sc.simulate(u0, w);
  auto solf = sf.simulate(u0, w);
  bool ok = true;
  msg.clear();
  for (std::size_t p = 0; p < phis.size(); ++p) {
    double rc = weak_residual(solc, phis[p], &flux, &noise);
    double rf = weak_residual(solf, phis[p], &flux, &noise);
    bool this_ok = (rf * 1.5 <= rc) || (rc < 1e-12 && rf < 1e-12);
    ok = ok && this_ok;
    msg += "phi" + std::to_string(p) + ": " + std::to_string(rc) + " -> " +
           std::to_string(rf) + (this_ok ? " ok " : " FAIL ");
  }
  return ok;
}

// 12. Identical master seed and config give a byte-identical report.
bool criterion12(std::string& msg) {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "dcap_acceptance_repro";
  fs::remove_all(dir);
  nlohmann::json j;
  j["experiment"] = "energy-check";
  j["flux"] = {{"preset", "burgers1d"}};
  j["noise"] = {{"preset", "noise-linear"}, {"amplitude", 0.2}};
  j["solver"] = {{"n_per_axis", 32}, {"epsilon", 0.05}, {"delta", 0.0025}, {"dt", 1e-3},
                 {"horizon", 0.2},   {"snapshot_every", 20}};
  j["ensemble"] = {{"paths", 16}, {"seed", 77}, {"threads", 4}};
  j["initial"] = {{"preset", "sine"}};
  j["output"] = {{"dir", dir.string()}};
  auto cfg = parse_config(j);
  if (dispatch(cfg) != 0) {
    msg = "first run failed";
    return false;
  }
  std::ifstream a(dir / "report.json", std::ios::binary);
  std::string first((std::istreambuf_iterator<char>(a)), {});
  a.close();
  if (dispatch(cfg) != 0) {
    msg = "second run failed";
    return false;
  }
  std::ifstream b(dir / "report.json", std::ios::binary);
  std::string second((std::istreambuf_iterator<char>(b)), {});
  msg = first == second ? "byte-identical reports (" + std::to_string(first.size()) + " bytes)"
                        : "reports differ";
  return first == second && !first.empty();
}

using Criterion = bool (*)(std::string&);

struct Entry {
  int id;
  const char* label;
  Criterion fn;
};

const Entry kCriteria[] = {
    {1, "linear exactness of the per-mode integrating factor", criterion1},
    {2, "additive-noise second-moment identity", criterion2},
    {3, "closed-form energy, weighted and fourth-moment bounds", criterion3},
    {4, "geometry compatibility of shipped flux presets", criterion4},
    {5, "coupled-noise stability ratio across four decades", criterion5},
    {6, "strong order one half against a coupled fine reference", criterion6},
    {7, "kinetic function identities and truncation accuracy", criterion7},
    {8, "temporal translation modulus growth", criterion8},
    {9, "singular-limit ladder against the finite-volume reference", criterion9},
    {10, "two-dimensional rough-flux self-convergence", criterion10},
    {11, "weak-residual decay under time refinement", criterion11},
    {12, "byte-identical reports for identical seeds", criterion12},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  int failures = 0;
  for (const auto& e : kCriteria) {
    if (only != 0 && e.id != only) continue;
    std::string msg;
    bool ok = false;
    try {
      ok = e.fn(msg);
    } catch (const std::exception& ex) {
      msg = std::string("exception: ") + ex.what();
    }
    std::printf("[%s] criterion %2d: %s  (%s)\n", ok ? "PASS" : "FAIL", e.id, e.label,
                msg.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
