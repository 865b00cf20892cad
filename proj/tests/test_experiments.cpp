#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dcap/experiments.hpp"

using namespace dcap;

namespace {

SpectralFieldD sine_field(const TorusGrid& g, FourierWorkspaceD& ws, double amp = 1.0) {
  Eigen::ArrayXd s(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i)
    s[i] = amp * std::sin(two_pi * g.coord(g.axis_bin(i, 0)));
  return ws.forward(g, s);
}

}  // namespace

TEST_CASE("unforced ensemble passes the energy bound with zero variance") {
  TorusGrid g(1, 16);
  FourierWorkspaceD ws;
  auto flux = FluxModel::none(g);
  auto noise = NoiseModel::preset("none", 0);
  SolverConfig cfg;
  cfg.n_per_axis = 16;
  cfg.dt = 1e-2;
  cfg.horizon = 0.3;
  cfg.snapshot_every = 5;
  EnsembleConfig ens;
  ens.n_paths = 4;
  ens.seed0 = 10;
  ens.threads = 2;
  auto rep = run_ensemble(cfg, &flux, &noise, sine_field(g, ws), ens);
  CHECK(rep.pass());
  CHECK(rep.pass_energy);
  CHECK(rep.pass_weighted);
  CHECK(rep.pass_p4);
  for (const auto& s : rep.energy_lhs) CHECK(s.se == 0.0);  // deterministic paths
  // with no noise the bound at t = 0 is attained exactly
  CHECK(rep.energy_lhs[0].mean == doctest::Approx(rep.energy_bound[0]).epsilon(1e-12));
  // and the left side decays while the dissipation accumulates
  CHECK(rep.energy_lhs.back().mean <= rep.energy_lhs[0].mean + 1e-12);
}

TEST_CASE("constant additive noise matches the per-mode ito identity") {
  TorusGrid g(1, 16);
  FourierWorkspaceD ws;
  auto flux = FluxModel::none(g);
  auto noise = NoiseModel::preset("noise-const", 0.3);
  SolverConfig cfg;
  cfg.n_per_axis = 16;
  cfg.epsilon = 0.1;
  cfg.delta = 0.01;
  cfg.dt = 1e-3;
  cfg.horizon = 0.5;
  cfg.snapshot_every = 100;
  EnsembleConfig ens;
  ens.n_paths = 400;
  ens.seed0 = 100;
  auto u0 = sine_field(g, ws);
  auto rep = run_ensemble(cfg, &flux, &noise, u0, ens);
  REQUIRE(rep.pass());

  double lam2 = 1 + 4 * M_PI * M_PI;
  double rate = cfg.epsilon * (lam2 - 1) / (1 - cfg.delta + cfg.delta * lam2);
  for (std::size_t j = 0; j < rep.times.size(); ++j) {
    double t = rep.times[j];
    double want = 0.5 * std::exp(-2 * rate * t) + 0.3 * 0.3 * t;
    CHECK(std::abs(rep.l2_sq[j].mean - want) <= 3.0 * rep.l2_sq[j].se + 1e-9);
  }
}

TEST_CASE("single-path ensembles carry no standard errors") {
  TorusGrid g(1, 16);
  FourierWorkspaceD ws;
  auto flux = FluxModel::none(g);
  auto noise = NoiseModel::preset("noise-const", 0.1);
  SolverConfig cfg;
  cfg.n_per_axis = 16;
  cfg.dt = 1e-2;
  cfg.horizon = 0.1;
  EnsembleConfig ens;
  ens.n_paths = 1;
  auto rep = run_ensemble(cfg, &flux, &noise, sine_field(g, ws), ens);
  CHECK_FALSE(rep.se_applicable);
  CHECK(rep.n_paths == 1);
  for (const auto& s : rep.l2_sq) CHECK(s.se == 0.0);
}

TEST_CASE("bound scale hook forces a failure") {
  TorusGrid g(1, 16);
  FourierWorkspaceD ws;
  auto flux = FluxModel::none(g);
  auto noise = NoiseModel::preset("none", 0);
  SolverConfig cfg;
  cfg.n_per_axis = 16;
  cfg.dt = 1e-2;
  cfg.horizon = 0.1;
  EnsembleConfig ens;
  ens.n_paths = 2;
  ens.bound_scale = 1e-9;
  auto rep = run_ensemble(cfg, &flux, &noise, sine_field(g, ws), ens);
  CHECK_FALSE(rep.pass());
}

TEST_CASE("aborted members are listed, not dropped silently") {
  TorusGrid g(1, 32);
  FourierWorkspaceD ws;
  auto flux = FluxModel::preset("burgers1d", g);
  auto noise = NoiseModel::preset("none", 0);
  SolverConfig cfg;
  cfg.n_per_axis = 32;
  cfg.dt = 0.5;
  cfg.horizon = 20.0;
  EnsembleConfig ens;
  ens.n_paths = 3;
  auto rep = run_ensemble(cfg, &flux, &noise, sine_field(g, ws, 50.0), ens);
  CHECK(rep.aborted_seeds.size() == 3);
  CHECK_FALSE(rep.pass());
}

TEST_CASE("stability of identical initial data returns a flagged zero") {
  TorusGrid g(1, 16);
  FourierWorkspaceD ws;
  auto flux = FluxModel::none(g);
  auto noise = NoiseModel::preset("none", 0);
  SolverConfig cfg;
  cfg.n_per_axis = 16;
  cfg.dt = 1e-2;
  cfg.horizon = 0.1;
  EnsembleConfig ens;
  ens.n_paths = 2;
  SpectralFieldD zero(g);
  auto rep = stability_experiment(cfg, &flux, &noise, sine_field(g, ws), zero, {1e-1}, ens);
  CHECK(rep.identical_initial);
  CHECK(rep.ratios[0].mean == 0.0);
  CHECK(rep.pass);
}

TEST_CASE("unforced stability is a contraction") {
  TorusGrid g(1, 16);
  FourierWorkspaceD ws;
  auto flux = FluxModel::none(g);
  auto noise = NoiseModel::preset("none", 0);
  SolverConfig cfg;
  cfg.n_per_axis = 16;
  cfg.dt = 1e-2;
  cfg.horizon = 0.2;
  EnsembleConfig ens;
  ens.n_paths = 2;
  auto u0 = sine_field(g, ws);
  Eigen::ArrayXd c(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i) c[i] = std::cos(two_pi * 2 * g.coord(i));
  auto dir = ws.forward(g, c);
  auto rep = stability_experiment(cfg, &flux, &noise, u0, dir, {1e-1, 1e-2, 1e-3}, ens);
  for (const auto& r : rep.ratios) CHECK(r.mean <= 1.0 + 1e-12);
  CHECK(rep.pass);
  CHECK(rep.variation < 1.0 + 1e-9);
}

TEST_CASE("limit study rejects bad ladders") {
  TorusGrid g(1, 16);
  auto flux = FluxModel::preset("burgers1d", g);
  auto noise = NoiseModel::preset("none", 0);
  FourierWorkspaceD ws;
  auto u0 = sine_field(g, ws);
  EnsembleConfig ens;
  ens.n_paths = 1;
  LimitStudyConfig study;
  study.n_per_axis = 16;
  study.levels = {{0.0, 0.0}};
  CHECK_THROWS(limit_study(study, flux, &noise, u0, ens));
  study.levels = {{0.25, 0.25}};  // delta/eps^2 = 4 > 1
  CHECK_THROWS(limit_study(study, flux, &noise, u0, ens));
}

TEST_CASE("coupled additive noise leaves only the deterministic gap") {
  TorusGrid g(1, 32);
  FourierWorkspaceD ws;
  auto flux = FluxModel::none(g);
  auto noise = NoiseModel::preset("noise-const", 0.3);
  auto u0 = ws.forward(g, Eigen::ArrayXd::Constant(g.size(), 0.6).eval());
  LimitStudyConfig study;
  study.dim = 1;
  study.n_per_axis = 32;
  study.galerkin_dt = 1e-3;
  study.horizon = 0.2;
  study.snapshots = 20;
  study.fv_cells = 64;
  study.levels = {{0.25, 1.0 / 32}, {0.125, 1.0 / 128}};
  EnsembleConfig ens;
  ens.n_paths = 3;
  ens.seed0 = 5;
  auto rep = limit_study(study, flux, &noise, u0, ens);
  // constant data: both solvers follow u0 + sigma W(t) exactly
  for (const auto& e : rep.l1_error) CHECK(e.mean < 1e-10);
}

TEST_CASE("burgers ladder errors decrease toward the reference") {
  TorusGrid g(1, 32);
  FourierWorkspaceD ws;
  auto flux = FluxModel::preset("burgers1d", g, 1.0, 2.0);
  auto noise = NoiseModel::preset("noise-linear", 0.2);
  auto u0 = sine_field(g, ws, 0.5);
  LimitStudyConfig study;
  study.dim = 1;
  study.n_per_axis = 32;
  study.galerkin_dt = 2.5e-4;
  study.dt_fine = 2.5e-4;
  study.horizon = 0.25;
  study.snapshots = 25;
  study.fv_cells = 256;
  study.fv_dt = 2.5e-4;
  study.levels = {{0.25, 1.0 / 32}, {0.125, 1.0 / 64}, {0.0625, 1.0 / 256}};
  study.m_lambda = 17;
  EnsembleConfig ens;
  ens.n_paths = 4;
  ens.seed0 = 42;
  auto rep = limit_study(study, flux, &noise, u0, ens);
  REQUIRE(rep.l1_error.size() == 3);
  CHECK(rep.pass_decreasing);
  CHECK(rep.velocity_gap.size() == 3);
  CHECK(rep.lambda_box_used > 0);
}

TEST_CASE("kinetic compactness of identical levels vanishes") {
  TorusGrid g(1, 16);
  FourierWorkspaceD ws;
  auto flux = FluxModel::none(g);
  auto noise = NoiseModel::preset("noise-const", 0.2);
  auto u0 = sine_field(g, ws);
  LimitStudyConfig study;
  study.dim = 1;
  study.n_per_axis = 16;
  study.galerkin_dt = 1e-2;
  study.horizon = 0.1;
  study.snapshots = 10;
  study.levels = {{0.1, 0.01}, {0.1, 0.01}};
  EnsembleConfig ens;
  ens.n_paths = 2;
  auto gaps = kinetic_compactness(study, flux, &noise, u0, ens);
  REQUIRE(gaps.size() == 1);
  CHECK(gaps[0].mean == 0.0);
}

TEST_CASE("closed-form constants") {
  // no noise: C0 equals the initial weighted energy
  CHECK(energy_bound_constant(2.0, 0.0, 0.1, 1.0, 3.0) ==
        doctest::Approx(0.5 * 0.9 * 1.0 + 0.5 * 0.1 * 3.0).epsilon(1e-14));
  // monotone in t
  CHECK(energy_bound_constant(1.0, 0.3, 0.1, 1.0, 3.0) >
        energy_bound_constant(0.5, 0.3, 0.1, 1.0, 3.0));
  CHECK(fourth_moment_bound(1.0, 0.0, 1.0) == doctest::Approx(48.0).epsilon(1e-12));
}
