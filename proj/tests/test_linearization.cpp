#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <vat/linearization.hpp>

using namespace vat;

TEST_CASE("LMG symmetric phase linearizes to a pure rotation", "[linear]") {
  // At s = 0 the flow around (pi/2, 0) is d(dtheta) = 2 dphi,
  // d(dphi) = -2 dtheta, i.e. K = [[0, 2], [-2, 0]] up to orientation.
  auto vgs = variational_ground_state(Model::Lmg, 4, 0.0, 0.0);
  auto lin = linearize(vgs.x, 0.0, 0.0);
  REQUIRE(std::abs(lin.K(0, 0)) < 1e-8);
  REQUIRE(std::abs(lin.K(1, 1)) < 1e-8);
  REQUIRE(std::abs(lin.K(0, 1) + lin.K(1, 0)) < 1e-8);
  REQUIRE(std::abs(std::abs(lin.K(0, 1)) - 2.0) < 1e-6);

  auto sp = biorthogonal_spectrum(lin.K);
  REQUIRE(sp.omega(0) == Catch::Approx(-2.0).margin(1e-6));
  REQUIRE(sp.omega(1) == Catch::Approx(2.0).margin(1e-6));
  // Antisymmetric K has orthonormal eigenvectors, so eta is the identity.
  Eigen::Matrix2cd eta = pseudo_metric(sp);
  REQUIRE((eta - Eigen::Matrix2cd::Identity()).norm() < 1e-6);
}

TEST_CASE("linearize rejects non-stationary expansion points", "[linear]") {
  ProductState off{Model::TwoQubit, 2, 1.0, 1.0};
  REQUIRE_THROWS(linearize(off, 0.5, 0.0));
}

TEST_CASE("spectral pairing and pseudo-Hermiticity along the paths", "[linear]") {
  struct Case {
    Model model;
    int N;
    double A;
    double s_min, s_max;
  };
  for (const Case& c : {Case{Model::TwoQubit, 2, 0.0, 0.0, 1.0},
                        Case{Model::TwoQubit, 2, 5.0, 0.0, 1.0},
                        Case{Model::Lmg, 4, 0.0, 0.45, 1.0}}) {
    ProductState guess{c.model, c.N, M_PI / 2, 0.0};
    for (int k = 0; k <= 40; ++k) {
      double s = c.s_min + (c.s_max - c.s_min) * k / 40.0;
      auto vgs = variational_ground_state(c.model, c.N, c.A, s, guess);
      guess = vgs.x;
      if (std::abs(std::sin(vgs.x.theta)) < 1e-4) continue;  // chart pole
      auto lin = linearize(vgs.x, s, c.A);
      auto sp = biorthogonal_spectrum(lin.K);
      REQUIRE(sp.pair_residual < 1e-8);        // omega come in +/- pairs
      REQUIRE(sp.realness_residual < 1e-8);    // iK eigenvalues are real
      Eigen::Matrix2cd eta = pseudo_metric(sp);
      REQUIRE(pseudo_hermiticity_residual(lin.K, eta) < 1e-8);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(eta);
      REQUIRE(es.eigenvalues()(0) > 0.0);      // strictly positive metric
    }
  }
}

TEST_CASE("kappa is zero before the LMG transition", "[linear]") {
  KappaOptions opt;
  opt.s_min = 0.0;
  opt.s_max = 0.35;
  auto rep = kappa_bound(Model::Lmg, 4, 0.0, opt);
  REQUIRE_FALSE(rep.gapless);
  REQUIRE(rep.max_drive < 1e-8);  // ground state is s-independent here
  REQUIRE(rep.kappa < 1e-7);
}

TEST_CASE("kappa diverges across the LMG critical point", "[linear]") {
  KappaOptions opt;
  opt.s_min = 0.0;
  opt.s_max = 1.0;
  auto rep = kappa_bound(Model::Lmg, 4, 0.0, opt);
  REQUIRE(rep.gapless);
  REQUIRE(std::isinf(rep.kappa));
}

TEST_CASE("two-qubit kappa is finite and the bound holds at s = 1", "[linear]") {
  auto rep = kappa_bound(Model::TwoQubit, 2, 0.0);
  REQUIRE_FALSE(rep.gapless);
  REQUIRE(rep.kappa > 0.0);
  REQUIRE(std::isfinite(rep.kappa));
  for (double T : {8.0, 16.0, 32.0, 64.0, 128.0}) {
    IntegrateOptions opt;
    opt.dt = 0.005;
    opt.s_begin = rep.samples.front().s;
    opt.s_end = rep.samples.back().s;
    auto traj = integrate(rep.samples.front().vgs, T, opt);
    const auto& fin = traj.samples.back();
    const auto& grid = rep.samples.back();
    Eigen::Vector2d dx(wrap_angle(fin.theta - grid.vgs.theta),
                       wrap_angle(fin.phi - grid.vgs.phi));
    REQUIRE(eta_norm(grid.eta, dx) <= rep.kappa / T);
  }
}

TEST_CASE("drive grows without bound approaching the critical point", "[linear]") {
  // Refining the grid toward s* makes max |dx0/ds|_eta blow up (square-root
  // divergence of the order parameter).
  double prev = 0.0;
  for (double eps : {4e-2, 1e-2, 2.5e-3}) {
    KappaOptions opt;
    opt.s_min = 0.4 + eps;
    opt.s_max = 0.6;
    auto rep = kappa_bound(Model::Lmg, 4, 0.0, opt);
    REQUIRE(rep.max_drive > prev);
    prev = rep.max_drive;
  }
  REQUIRE(prev > 15.0);
}
