#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include <vat/core.hpp>
#include <vat/models.hpp>
#include <vat/mps.hpp>
#include <vat/rng.hpp>

using namespace vat;

namespace {

MpsState random_mps(int N, int D, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<Eigen::Vector2cd> locals(N);
  for (auto& v : locals) {
    v << Complex(rng.next_open01() - 0.5, rng.next_open01() - 0.5),
        Complex(rng.next_open01() - 0.5, rng.next_open01() - 0.5);
    v.normalize();
  }
  return product_mps(locals, D);
}

}  // namespace

TEST_CASE("product state embedding round-trips through the MPS form", "[mps]") {
  for (int D : {1, 2, 4}) {
    MpsState psi = product_mps(6, D);
    REQUIRE(canonical_residual(psi) < 1e-12);
    StateVector dense = mps_to_dense(psi);
    REQUIRE(dense.norm() == Catch::Approx(1.0).margin(1e-12));
    // |+>^6 has uniform amplitudes 2^{-3}.
    for (int b = 0; b < 64; ++b)
      REQUIRE(std::abs(dense.amplitudes(b) - Complex(0.125, 0)) < 1e-12);
    for (int bond = 0; bond < 5; ++bond)
      REQUIRE(mps_entropy(psi, bond) < 1e-10);
  }
}

TEST_CASE("center moves preserve the encoded state", "[mps]") {
  MpsState psi = random_mps(7, 4, 11);
  StateVector before = mps_to_dense(psi);
  move_center_to(psi, 6);
  REQUIRE(psi.center == 6);
  REQUIRE(canonical_residual(psi) < 1e-12);
  move_center_to(psi, 2);
  StateVector after = mps_to_dense(psi);
  REQUIRE((before.amplitudes - after.amplitudes).norm() < 1e-12);
}

TEST_CASE("overlap agrees with the dense inner product", "[mps]") {
  MpsState a = random_mps(6, 4, 1);
  MpsState b = random_mps(6, 4, 2);
  Complex dense = mps_to_dense(a).amplitudes.dot(mps_to_dense(b).amplitudes);
  REQUIRE(std::abs(overlap(a, b) - dense) < 1e-12);
  REQUIRE(std::abs(overlap(a, a) - Complex(1, 0)) < 1e-12);
}

TEST_CASE("a Bell pair carries one bit across the middle bond", "[mps]") {
  // Build |00> + |11> by hand: left-canonical site then center.
  MpsState psi;
  psi.D_max = 2;
  psi.center = 1;
  SiteTensor s0, s1;
  s0[0] = MatrixXcd::Zero(1, 2);
  s0[0](0, 0) = 1.0;
  s0[1] = MatrixXcd::Zero(1, 2);
  s0[1](0, 1) = 1.0;
  s1[0] = MatrixXcd::Zero(2, 1);
  s1[0](0, 0) = M_SQRT1_2;
  s1[1] = MatrixXcd::Zero(2, 1);
  s1[1](1, 0) = M_SQRT1_2;
  psi.sites = {s0, s1};
  REQUIRE(mps_entropy(psi, 0) == Catch::Approx(std::log(2.0)).margin(1e-12));
  StateVector dense = mps_to_dense(psi);
  REQUIRE(std::abs(dense.amplitudes(0) - Complex(M_SQRT1_2, 0)) < 1e-12);
  REQUIRE(std::abs(dense.amplitudes(3) - Complex(M_SQRT1_2, 0)) < 1e-12);
}

TEST_CASE("MPO expectation matches the dense matrix element", "[mps]") {
  auto inst = sample_spin_glass(6, 21);
  for (double s : {0.0, 0.5, 1.0}) {
    Mpo mpo = spin_glass_mpo(inst, s);
    MatrixXcd H = mpo_to_dense(mpo);
    MpsState psi = random_mps(6, 4, 5);
    VectorXcd v = mps_to_dense(psi).amplitudes;
    double dense = (v.adjoint() * H * v)(0).real();
    REQUIRE(mps_energy(mpo, psi) == Catch::Approx(dense).margin(1e-10));
  }
}

TEST_CASE("DMRG recovers exact ground states", "[mps]") {
  // Transverse driver: product ground state |+>^N at energy -N, found at D=1.
  auto inst = sample_spin_glass(8, 77);
  Mpo driver = spin_glass_mpo(inst, 0.0);
  auto res0 = dmrg(driver, product_mps(8, 1), 1);
  REQUIRE(res0.energy == Catch::Approx(-8.0).margin(1e-10));

  // Mid-protocol at N=8: compare against dense diagonalization at D=16.
  Mpo mid = spin_glass_mpo(inst, 0.55);
  auto res = dmrg(mid, product_mps(8, 16), 16);
  auto exact = ground_state(DenseOperator{mpo_to_dense(mid)});
  REQUIRE(res.energy == Catch::Approx(exact.energy).margin(1e-9));
  StateVector v = mps_to_dense(res.state);
  REQUIRE(phase_aligned_distance(v, exact.state) < 1e-5);

  // Classical endpoint at D=1: greedy sweeps land on a configuration that
  // no single spin flip can improve (possibly a local minimum).
  Mpo cls = spin_glass_mpo(inst, 1.0);
  auto res1 = dmrg(cls, product_mps(8, 1), 1);
  VectorXcd amp = mps_to_dense(res1.state).amplitudes;
  Eigen::Index b;
  amp.cwiseAbs().maxCoeff(&b);
  REQUIRE(std::abs(amp(b)) == Catch::Approx(1.0).margin(1e-8));
  REQUIRE(res1.energy == Catch::Approx(inst.basis_energy(b)).margin(1e-9));
  for (int k = 0; k < 8; ++k)
    REQUIRE(inst.basis_energy(b ^ (1ll << k)) > res1.energy - 1e-9);
}

TEST_CASE("DMRG sweep energies never increase", "[mps]") {
  auto inst = sample_spin_glass(8, 13);
  Mpo mpo = spin_glass_mpo(inst, 0.5);
  auto res = dmrg(mpo, product_mps(8, 4), 4);
  for (std::size_t k = 1; k < res.sweep_energies.size(); ++k)
    REQUIRE(res.sweep_energies[k] <= res.sweep_energies[k - 1] + 1e-10);
}

TEST_CASE("effective gap reproduces the exact spectrum at the ends", "[mps]") {
  auto inst = sample_spin_glass(6, 3);
  // s = 0: driver gap is exactly 2 regardless of D.
  Mpo mpo0 = spin_glass_mpo(inst, 0.0);
  for (int D : {1, 2, 4}) {
    auto res = dmrg(mpo0, product_mps(6, D), D);
    REQUIRE(effective_gap(mpo0, res.state) == Catch::Approx(2.0).margin(1e-8));
  }
  // s = 1, D = 1 around the exact classical ground state: the effective
  // spectrum holds the ground configuration and its center-site flip.
  Mpo mpo1 = spin_glass_mpo(inst, 1.0);
  Eigen::Index gs = classical_ground_manifold(inst)[0];
  std::vector<Eigen::Vector2cd> locals(6);
  for (int k = 0; k < 6; ++k) {
    int bit = (gs >> (5 - k)) & 1;  // site 0 is the most significant bit
    locals[k] = Eigen::Vector2cd::Zero();
    locals[k](bit) = 1.0;
  }
  MpsState psi1 = product_mps(locals, 1);
  move_center_to(psi1, 3);
  double expect = inst.basis_energy(gs ^ (1ll << 2)) - inst.basis_energy(gs);
  REQUIRE(effective_gap(mpo1, psi1) == Catch::Approx(expect).margin(1e-8));
}

TEST_CASE("TDVP conserves norm and frozen-Hamiltonian energy", "[mps]") {
  auto inst = sample_spin_glass(6, 41);
  Mpo mpo = spin_glass_mpo(inst, 0.45);
  MpsState psi = random_mps(6, 4, 17);
  double e0 = mps_energy(mpo, psi);
  for (int step = 0; step < 1000; ++step) tdvp_step(mpo, psi, 0.01);
  REQUIRE(std::abs(std::abs(overlap(psi, psi)) - 1.0) < 1e-10);
  REQUIRE(std::abs(mps_energy(mpo, psi) - e0) < 1e-8);
  REQUIRE(canonical_residual(psi) < 1e-10);
}

TEST_CASE("TDVP at full bond dimension matches exact evolution", "[mps]") {
  auto inst = sample_spin_glass(6, 41);
  Mpo mpo = spin_glass_mpo(inst, 0.45);
  MatrixXcd H = mpo_to_dense(mpo);
  MpsState psi = product_mps(6, 8);
  VectorXcd v = mps_to_dense(psi).amplitudes;
  double dt = 0.01;
  for (int step = 0; step < 200; ++step) tdvp_step(mpo, psi, dt);
  // Reference: exact propagator of the frozen Hamiltonian.
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
  VectorXcd phases =
      (Complex(0, -1) * 2.0 * es.eigenvalues()).array().exp().matrix();
  VectorXcd ref = es.eigenvectors() *
                  (phases.asDiagonal() * (es.eigenvectors().adjoint() * v));
  REQUIRE(phase_aligned_distance(mps_to_dense(psi).amplitudes, ref) < 1e-6);
}

TEST_CASE("TDVP self-converges under step halving", "[mps]") {
  auto inst = sample_spin_glass(6, 8);
  Mpo mpo = spin_glass_mpo(inst, 0.3);
  auto run = [&](double dt, int steps) {
    MpsState psi = product_mps(6, 4);
    for (int k = 0; k < steps; ++k) tdvp_step(mpo, psi, dt);
    return mps_to_dense(psi).amplitudes;
  };
  VectorXcd a = run(0.04, 50);
  VectorXcd b = run(0.02, 100);
  VectorXcd c = run(0.01, 200);
  double e1 = (a - b).norm();
  double e2 = (b - c).norm();
  REQUIRE(e2 < e1 / 3.5);  // at least quadratic convergence in dt
}

TEST_CASE("anneal tracks the exact evolution and gap at full D", "[mps]") {
  auto inst = sample_spin_glass(6, 101);
  AnnealOptions opt;
  opt.dt = 0.01;
  opt.exact_columns = true;
  opt.exact_evolution = true;
  auto rec = anneal_mps(inst, 8, 10.0, opt);
  REQUIRE(rec.samples.size() == 101);
  for (const auto& smp : rec.samples) {
    REQUIRE(smp.delta_evolved < 1e-5);  // full D: only the splitting error
    REQUIRE(std::abs(smp.eff_gap - smp.exact_gap) < 1e-5);
    REQUIRE(std::isfinite(smp.delta_exact));
  }
  REQUIRE(rec.min_eff_gap > 0.0);
}

TEST_CASE("ground manifold helpers", "[mps]") {
  SpinGlassInstance inst;
  inst.N = 2;
  inst.J = Eigen::MatrixXd::Zero(2, 2);
  inst.J(0, 1) = inst.J(1, 0) = 0.5;
  inst.h = Eigen::VectorXd::Zero(2);
  // -2 J z1 z2: aligned configurations 00 and 11 are degenerate minima.
  auto mins = classical_ground_manifold(inst);
  REQUIRE(mins == std::vector<Eigen::Index>{0, 3});
  MpsState psi = product_mps(2, 2);  // |++> has half its weight on the manifold
  REQUIRE(ground_manifold_overlap(inst, psi) ==
          Catch::Approx(M_SQRT1_2).margin(1e-12));
}

TEST_CASE("MPS binary save/load round-trips", "[mps]") {
  MpsState psi = random_mps(5, 4, 77);
  auto path = std::filesystem::temp_directory_path() / "vat_test_roundtrip.mps";
  save_mps(psi, path.string());
  MpsState back = load_mps(path.string());
  std::filesystem::remove(path);
  REQUIRE(back.length() == psi.length());
  REQUIRE(back.center == psi.center);
  REQUIRE(back.D_max == psi.D_max);
  REQUIRE((mps_to_dense(back).amplitudes - mps_to_dense(psi).amplitudes).norm() <
          1e-15);
}
