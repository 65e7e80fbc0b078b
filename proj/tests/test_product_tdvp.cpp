#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <vat/core.hpp>
#include <vat/models.hpp>
#include <vat/product_tdvp.hpp>
#include <vat/rng.hpp>

using namespace vat;

namespace {

ProductState random_chart_point(Model m, int N, SplitMix64& rng) {
  // Stay away from the poles where the (theta, phi) chart degenerates.
  ProductState x{m, N, 0.0, 0.0};
  x.theta = 0.2 + 2.7 * rng.next_open01();
  x.phi = -3.0 + 6.0 * rng.next_open01();
  return x;
}

}  // namespace

TEST_CASE("embedded ansatz has unit norm and the right amplitudes", "[product]") {
  ProductState x{Model::TwoQubit, 2, 1.1, 0.4};
  StateVector psi = embed(x);
  REQUIRE(psi.dim() == 4);
  REQUIRE(psi.norm() == Catch::Approx(1.0).margin(1e-13));
  Complex a0 = std::cos(x.theta / 2);
  Complex a1 = std::sin(x.theta / 2) * std::exp(Complex(0, x.phi));
  REQUIRE(std::abs(psi.amplitudes(0) - a0 * a0) < 1e-13);
  REQUIRE(std::abs(psi.amplitudes(3) - a1 * a1) < 1e-13);

  ProductState y{Model::Lmg, 3, 0.8, -0.3};
  StateVector chi = embed(y);
  REQUIRE(chi.dim() == 8);
  REQUIRE(chi.norm() == Catch::Approx(1.0).margin(1e-13));
}

TEST_CASE("manifold geometry: metric, symplectic form, complex structure", "[product]") {
  SplitMix64 rng(2024);
  for (int k = 0; k < 100; ++k) {
    Model m = (k % 3 == 0) ? Model::TwoQubit : (k % 3 == 1) ? Model::Lmg
                                                            : Model::Bipartite;
    int N = (m == Model::Lmg) ? 4 + int(rng.next_u64() % 5)
                              : (m == Model::Bipartite ? int(rng.next_u64() % 8) : 2);
    ProductState x = random_chart_point(m, N, rng);
    auto geo = geometry(x);
    int n = (m == Model::Lmg) ? N : 2;
    REQUIRE(geo.g(0, 0) == Catch::Approx(n / 2.0).margin(1e-12));
    REQUIRE(geo.g(1, 1) ==
            Catch::Approx(n / 2.0 * std::sin(x.theta) * std::sin(x.theta)).margin(1e-12));
    REQUIRE(std::abs(geo.omega(0, 0)) < 1e-14);
    REQUIRE(std::abs(geo.omega(0, 1) + geo.omega(1, 0)) < 1e-14);
    // J = -g^{-1} omega squares to -identity (Kaehler compatibility).
    Eigen::Matrix2d r = geo.J * geo.J + Eigen::Matrix2d::Identity();
    REQUIRE(r.norm() < 1e-10);
  }
}

TEST_CASE("geometry throws at the chart pole", "[product]") {
  ProductState x{Model::TwoQubit, 2, 0.0, 0.3};
  REQUIRE_THROWS(geometry(x));
}

TEST_CASE("closed-form rates equal the tangent-projection oracle", "[product]") {
  SplitMix64 rng(7);
  for (int k = 0; k < 100; ++k) {
    Model m = (k % 3 == 0) ? Model::TwoQubit : (k % 3 == 1) ? Model::Lmg
                                                            : Model::Bipartite;
    int N = (m == Model::Lmg) ? 3 + int(rng.next_u64() % 6)
                              : (m == Model::Bipartite ? int(rng.next_u64() % 6) : 2);
    ProductState x = random_chart_point(m, N, rng);
    double s = rng.next_open01();
    double A = (m == Model::Lmg) ? 0.0 : 5.0 * rng.next_open01();
    Rates closed = eom_rhs(x, s, A);
    Rates oracle = eom_rhs_generic(x, s, A);
    REQUIRE(std::abs(closed.dtheta - oracle.dtheta) < 1e-8);
    REQUIRE(std::abs(closed.dphi - oracle.dphi) < 1e-8);
  }
}

TEST_CASE("bipartite flow does not depend on the local dimension", "[product]") {
  SplitMix64 rng(99);
  for (int k = 0; k < 20; ++k) {
    ProductState x0{Model::Bipartite, 0, 0.0, 0.0};
    x0.theta = 0.3 + 2.5 * rng.next_open01();
    x0.phi = -2.0 + 4.0 * rng.next_open01();
    ProductState x14 = x0;
    x14.N = 14;
    double s = rng.next_open01();
    Rates r0 = eom_rhs(x0, s, 3.0);
    Rates r14 = eom_rhs(x14, s, 3.0);
    REQUIRE(std::abs(r0.dtheta - r14.dtheta) < 1e-10);
    REQUIRE(std::abs(r0.dphi - r14.dphi) < 1e-10);
  }
}

TEST_CASE("variational ground state matches dense projection onto the ansatz",
          "[product]") {
  // The optimizer's energy must agree with a brute scan over the chart.
  for (double s : {0.0, 0.3, 0.7, 1.0}) {
    for (double A : {0.0, 5.0}) {
      auto vgs = variational_ground_state(Model::TwoQubit, 2, A, s);
      REQUIRE(vgs.converged);
      double best = 1e300;
      for (int it = 0; it <= 200; ++it) {
        double th = M_PI * it / 200.0;
        for (int ip = -100; ip <= 100; ++ip) {
          double ph = M_PI * ip / 100.0;
          best = std::min(best, variational_energy_pm(Model::TwoQubit, 2, A, s, th, ph));
        }
      }
      REQUIRE(vgs.energy <= best + 1e-6);
    }
  }
}

TEST_CASE("LMG critical point and symmetry breaking", "[product]") {
  REQUIRE(lmg_critical_s(4) == Catch::Approx(0.4).margin(1e-15));
  int N = 4;
  // Symmetric phase: theta = pi/2 exactly, s-independent.
  for (double s : {0.05, 0.2, 0.35}) {
    auto vgs = variational_ground_state(Model::Lmg, N, 0.0, s);
    REQUIRE(vgs.x.theta == Catch::Approx(M_PI / 2).margin(1e-12));
  }
  // Broken phase: theta moves continuously from pi/2 to pi.
  double prev = M_PI / 2;
  for (double s : {0.45, 0.6, 0.8, 1.0}) {
    auto vgs = variational_ground_state(Model::Lmg, N, 0.0, s);
    REQUIRE(vgs.x.theta > prev - 1e-12);
    prev = vgs.x.theta;
  }
  REQUIRE(prev == Catch::Approx(M_PI).margin(1e-12));
}

TEST_CASE("variational energy agrees with the embedded expectation value",
          "[product]") {
  SplitMix64 rng(31);
  auto spec0 = build_protocol(Model::TwoQubit, 2, 4.0);
  auto specL = build_protocol(Model::Lmg, 5, 0.0);
  for (int k = 0; k < 25; ++k) {
    double s = rng.next_open01();
    ProductState x = random_chart_point(Model::TwoQubit, 2, rng);
    MatrixXcd H = hamiltonian_at(spec0, s).mat;
    VectorXcd psi = embed(x).amplitudes;
    double dense = (psi.adjoint() * H * psi)(0).real();
    REQUIRE(variational_energy_pm(Model::TwoQubit, 2, 4.0, s, x.theta, x.phi) ==
            Catch::Approx(dense).margin(1e-10));

    ProductState y = random_chart_point(Model::Lmg, 5, rng);
    MatrixXcd HL = hamiltonian_at(specL, s).mat;
    VectorXcd chi = embed(y).amplitudes;
    double denseL = (chi.adjoint() * HL * chi)(0).real();
    REQUIRE(lmg_variational_energy(5, s, y.theta, y.phi) ==
            Catch::Approx(denseL).margin(1e-10));
  }
}

TEST_CASE("integration conserves the ansatz normalization trivially and lands "
          "near the target for slow ramps", "[product]") {
  ProductState x0{Model::TwoQubit, 2, M_PI / 2, 0.0};
  IntegrateOptions opt;
  opt.dt = 0.005;
  auto traj = integrate(x0, 64.0, opt);
  REQUIRE(traj.samples.size() == 101);
  const auto& last = traj.samples.back();
  REQUIRE(last.s == Catch::Approx(1.0).margin(1e-9));
  // Slow anneal ends close to |00>, i.e. theta near 0 (or wrapped).
  StateVector fin = embed(ProductState{Model::TwoQubit, 2, last.theta, last.phi});
  VectorXcd target = VectorXcd::Zero(4);
  target(0) = 1.0;
  REQUIRE(phase_aligned_distance(fin.amplitudes, target) < 0.05);
}
