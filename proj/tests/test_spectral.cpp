#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dcap/spectral_field.hpp"
#include "dcap/spectral_ops.hpp"

using namespace dcap;

namespace {

Eigen::ArrayXd random_samples(const TorusGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::ArrayXd out(g.size());
  for (std::int64_t i = 0; i < g.size(); ++i) out[i] = nd(rng);
  return out;
}

// Random real field restricted to |k_i| <= band (no Nyquist content).
SpectralFieldD random_band_limited(const TorusGrid& g, int band, std::uint64_t seed,
                                   FourierWorkspaceD& ws) {
  auto f = ws.forward(g, random_samples(g, seed));
  return truncate_modes(f, band);
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS(TorusGrid(3, 8));
  CHECK_THROWS(TorusGrid(1, 7));
  CHECK_THROWS(TorusGrid(1, 2));
  TorusGrid g(2, 8);
  CHECK(g.size() == 64);
  // quadrature of the constant 1 equals the torus volume
  Eigen::ArrayXd ones = Eigen::ArrayXd::Ones(g.size());
  CHECK(quadrature(g, ones) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("lambda_sq eigenvalues") {
  TorusGrid g1(1, 16);
  CHECK(lambda_sq(g1, g1.bin(0)) == 1.0);
  CHECK(lambda_sq(g1, g1.bin(1)) == doctest::Approx(40.47841760435743).epsilon(1e-14));
  TorusGrid g2(2, 16);
  CHECK(lambda_sq(g2, g2.flat(g2.bin(3), g2.bin(4))) ==
        doctest::Approx(987.9604401089358).epsilon(1e-14));
  for (std::int64_t i = 0; i < g1.size(); ++i) CHECK(lambda_sq(g1, i) >= 1.0);
}

TEST_CASE("forward transform of elementary fields") {
  TorusGrid g(1, 32);
  FourierWorkspaceD ws;

  auto c = ws.forward(g, Eigen::ArrayXd::Constant(g.size(), 2.5).eval());
  CHECK(std::abs(c.coeff(0) - std::complex<double>(2.5, 0)) < 1e-14);
  for (int k = 1; k < 16; ++k) CHECK(std::abs(c.coeff(k)) < 1e-14);

  Eigen::ArrayXd cosx(g.size());
  for (int j = 0; j < g.n(); ++j) cosx[j] = std::cos(two_pi * g.coord(j));
  auto f = ws.forward(g, cosx);
  CHECK(std::abs(f.coeff(1) - std::complex<double>(0.5, 0)) < 1e-14);
  CHECK(std::abs(f.coeff(-1) - std::complex<double>(0.5, 0)) < 1e-14);
  CHECK(std::abs(f.coeff(0)) < 1e-14);
  CHECK(std::abs(f.coeff(5)) < 1e-14);
}

TEST_CASE("round trip and Parseval on random fields") {
  for (int dim : {1, 2}) {
    TorusGrid g(dim, 24);
    FourierWorkspaceD ws;
    auto samples = random_samples(g, 42 + dim);
    auto f = ws.forward(g, samples);
    CHECK(hermitian_defect(f) < 1e-12);
    auto back = ws.inverse(f);
    CHECK((back - samples).abs().maxCoeff() < 1e-12);
    // Parseval: sum |coeff|^2 equals grid quadrature of u^2
    double lhs = f.l2_norm_sq();
    double rhs = quadrature(g, (samples * samples).eval());
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("transform rejects dimension mismatch") {
  TorusGrid g(1, 16);
  FourierWorkspaceD ws;
  Eigen::ArrayXd bad(7);
  bad.setZero();
  CHECK_THROWS(ws.forward(g, bad));
}

TEST_CASE("sobolev norms") {
  TorusGrid g(1, 32);
  FourierWorkspaceD ws;

  auto c = ws.forward(g, Eigen::ArrayXd::Constant(g.size(), 1.7).eval());
  for (double s : {-2.0, 0.0, 1.0, 3.5})
    CHECK(sobolev_norm_sq(c, s) == doctest::Approx(1.7 * 1.7).epsilon(1e-13));

  Eigen::ArrayXd cosx(g.size());
  for (int j = 0; j < g.n(); ++j) cosx[j] = std::cos(two_pi * g.coord(j));
  auto f = ws.forward(g, cosx);
  // two modes of weight 1/4 each, eigenvalue 1 + 4 pi^2
  CHECK(sobolev_norm_sq(f, 1.0) == doctest::Approx(20.239208802178716).epsilon(1e-12));
  CHECK(sobolev_norm_sq(f, -1.0) == doctest::Approx(0.01235226151592882).epsilon(1e-12));
  CHECK(sobolev_norm_sq(f, 0.0) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("sobolev monotone in s for mean-free unit fields") {
  TorusGrid g(1, 32);
  FourierWorkspaceD ws;
  auto f = random_band_limited(g, 10, 7, ws);
  f.coeff(0) = 0;
  double l2 = std::sqrt(f.l2_norm_sq());
  f.coeffs /= l2;
  double prev = sobolev_norm_sq(f, -2.0);
  for (double s : {-1.0, 0.0, 1.0, 2.0}) {
    double cur = sobolev_norm_sq(f, s);
    CHECK(cur >= prev * (1 - 1e-12));
    prev = cur;
  }
}

TEST_CASE("gradient and laplacian symbols") {
  TorusGrid g(1, 32);
  FourierWorkspaceD ws;

  auto c = ws.forward(g, Eigen::ArrayXd::Constant(g.size(), 3.0).eval());
  auto dc = gradient(c);
  CHECK(dc[0].coeffs.abs().maxCoeff() < 1e-15);

  Eigen::ArrayXd sinx(g.size());
  for (int j = 0; j < g.n(); ++j) sinx[j] = std::sin(two_pi * g.coord(j));
  auto f = ws.forward(g, sinx);
  auto lap = laplacian(f);
  auto lap_phys = ws.inverse(lap);
  Eigen::ArrayXd expected = -4.0 * M_PI * M_PI * sinx;
  CHECK((lap_phys - expected).abs().maxCoeff() < 1e-10);

  // laplacian(e_k) = (1 - lambda_k^2) e_k exactly
  SpectralFieldD ek(g);
  ek.coeff(3) = std::complex<double>(0.5, 0);
  ek.coeff(-3) = std::complex<double>(0.5, 0);
  auto lek = laplacian(ek);
  double want = 1.0 - lambda_sq(g, g.bin(3));
  CHECK(std::abs(lek.coeff(3) - want * ek.coeff(3)) < 1e-12);
}

TEST_CASE("div grad equals laplacian on band-limited fields") {
  for (int dim : {1, 2}) {
    TorusGrid g(dim, 24);
    FourierWorkspaceD ws;
    auto f = random_band_limited(g, 7, 99 + dim, ws);
    auto dg = divergence(gradient(f));
    auto lap = laplacian(f);
    CHECK((dg.coeffs - lap.coeffs).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("laplacian is self-adjoint under grid quadrature") {
  TorusGrid g(2, 16);
  FourierWorkspaceD ws;
  auto u = random_band_limited(g, 5, 1, ws);
  auto v = random_band_limited(g, 5, 2, ws);
  auto lu = ws.inverse(laplacian(u));
  auto lv = ws.inverse(laplacian(v));
  auto up = ws.inverse(u);
  auto vp = ws.inverse(v);
  double a = l2_inner(g, lu, vp);
  double b = l2_inner(g, up, lv);
  CHECK(a == doctest::Approx(b).epsilon(1e-10));
}

TEST_CASE("projections are independent of the Sobolev index") {
  TorusGrid g(1, 32);
  FourierWorkspaceD ws;
  auto f = ws.forward(g, random_samples(g, 5));
  auto trunc = truncate_modes(f, 6);
  // Truncation does not touch the retained coefficients at all.
  for (int k = -6; k <= 6; ++k) CHECK(trunc.coeff(k) == f.coeff(k));
}

TEST_CASE("dealias keeps the two-thirds band") {
  TorusGrid g(1, 30);
  SpectralFieldD f(g);
  for (int k = -15; k < 15; ++k) f.coeff(k) = std::complex<double>(1, 0);
  dealias_in_place(f);
  CHECK(f.coeff(10) != std::complex<double>(0, 0));
  CHECK(f.coeff(11) == std::complex<double>(0, 0));
  CHECK(f.coeff(-11) == std::complex<double>(0, 0));
}

TEST_CASE("spectral core instantiates for float") {
  TorusGrid g(1, 16);
  FourierWorkspace<float> ws;
  Eigen::ArrayXf s(g.size());
  for (int j = 0; j < g.n(); ++j) s[j] = std::cos(float(two_pi) * float(g.coord(j)));
  auto f = ws.forward(g, s);
  CHECK(std::abs(f.coeff(1) - std::complex<float>(0.5f, 0)) < 1e-5f);
  auto back = ws.inverse(f);
  CHECK((back - s).abs().maxCoeff() < 1e-5f);
}
