#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include <vat/core.hpp>
#include <vat/models.hpp>
#include <vat/mps.hpp>

using namespace vat;

TEST_CASE("two-qubit target Hamiltonian", "[models]") {
  auto spec = build_protocol(Model::TwoQubit, 2, 0.0);
  DenseOperator H1 = hamiltonian_at(spec, 1.0);
  auto g = ground_state(H1);
  // z z - 2(z1 + z2) is minimized by |00>: 1 - 4 = -3, gap to |01>/|10| is 2.
  REQUIRE(g.energy == Catch::Approx(-3.0).margin(1e-12));
  REQUIRE(std::abs(g.state.amplitudes(0)) == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(spectral_gap(H1) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("two-qubit catalyst is a Bell projector", "[models]") {
  auto spec0 = build_protocol(Model::TwoQubit, 2, 0.0);
  auto spec5 = build_protocol(Model::TwoQubit, 2, 5.0);
  double s = 0.5;
  MatrixXcd diff = hamiltonian_at(spec5, s).mat - hamiltonian_at(spec0, s).mat;
  // s(1-s) (-2A) |Phi><Phi| with |Phi> = (|00> + |11>)/sqrt(2).
  VectorXcd phi = VectorXcd::Zero(4);
  phi(0) = phi(3) = M_SQRT1_2;
  MatrixXcd expect = s * (1 - s) * (-10.0) * (phi * phi.adjoint());
  REQUIRE((diff - expect).norm() < 1e-12);
}

TEST_CASE("LMG target spectrum at small N", "[models]") {
  auto spec = build_protocol(Model::Lmg, 4, 0.0);
  DenseOperator H1 = hamiltonian_at(spec, 1.0);
  // -(sum z)^2 / N is diagonal with entries -m^2/N, m = N, N-2, ..., -N.
  auto g = ground_state(H1);
  REQUIRE(g.energy == Catch::Approx(-4.0).margin(1e-12));
  REQUIRE(g.degeneracy == 2);  // fully polarized up and down
  REQUIRE(spectral_gap(H1) == Catch::Approx(3.0).margin(1e-12));
  for (int b = 0; b < 16; ++b) {
    int m = 4 - 2 * __builtin_popcount(b);
    REQUIRE(H1.mat(b, b).real() == Catch::Approx(-m * m / 4.0).margin(1e-12));
  }
}

TEST_CASE("bipartite local dimension is N + 2", "[models]") {
  for (int N : {0, 3, 14}) {
    auto spec = build_protocol(Model::Bipartite, N, 1.0);
    REQUIRE(spec.local_dims == std::vector<int>{N + 2, N + 2});
    DenseOperator H = hamiltonian_at(spec, 0.37);
    REQUIRE(H.dim() == (N + 2) * (N + 2));
    REQUIRE(H.hermiticity_residual() < 1e-12);
  }
}

TEST_CASE("disorder sampling is deterministic and collision free", "[models]") {
  auto a = sample_spin_glass(8, 42);
  auto b = sample_spin_glass(8, 42);
  REQUIRE((a.J - b.J).norm() == 0.0);
  REQUIRE((a.h - b.h).norm() == 0.0);
  std::set<double> seen;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto inst = sample_spin_glass(8, seed);
    for (int i = 0; i < 8; ++i) {
      for (int j = i + 1; j < 8; ++j) {
        REQUIRE(inst.J(i, j) > 0.0);
        REQUIRE(inst.J(i, j) < 1.0);
        REQUIRE(inst.J(i, j) == inst.J(j, i));
        seen.insert(inst.J(i, j));
      }
      REQUIRE(inst.J(i, i) == 0.0);
      REQUIRE(inst.h(i) > -0.5);
      REQUIRE(inst.h(i) < 0.5);
    }
  }
  REQUIRE(seen.size() == 100 * 28);  // all couplings distinct across seeds
}

TEST_CASE("instance text format round-trips", "[models]") {
  auto inst = sample_spin_glass(5, 123);
  std::stringstream ss;
  save_instance(inst, ss);
  std::string text = ss.str();
  // Header line "N seed", then N(N-1)/2 coupling lines and N field lines.
  std::istringstream count(text);
  std::string line;
  int lines = 0;
  while (std::getline(count, line)) ++lines;
  REQUIRE(lines == 1 + 10 + 5);
  std::istringstream in(text);
  auto back = load_instance(in);
  REQUIRE(back.N == inst.N);
  REQUIRE(back.seed == inst.seed);
  REQUIRE((back.J - inst.J).norm() == 0.0);
  REQUIRE((back.h - inst.h).norm() == 0.0);
}

TEST_CASE("classical energies agree with the dense diagonal", "[models]") {
  auto inst = sample_spin_glass(6, 9);
  auto spec = build_protocol(Model::SpinGlass, 6, 0.0, &inst);
  MatrixXcd H1 = hamiltonian_at(spec, 1.0).mat;
  for (int b = 0; b < 64; ++b)
    REQUIRE(H1(b, b).real() == Catch::Approx(inst.basis_energy(b)).margin(1e-12));
}

TEST_CASE("spin-glass MPO bond dimensions and dense reconstruction", "[models]") {
  auto inst = sample_spin_glass(8, 3);
  Mpo mpo = spin_glass_mpo(inst, 0.41);
  // All-to-all couplings need min(k, N-k) + 2 channels across bond k.
  REQUIRE(mpo.sites[3].right_dim == 6);
  for (int N : {2, 4, 6, 8, 10}) {
    auto small = sample_spin_glass(N, 100 + N);
    auto spec = build_protocol(Model::SpinGlass, N, 0.0, &small);
    for (double s : {0.0, 0.3, 1.0}) {
      MatrixXcd dense = hamiltonian_at(spec, s).mat;
      MatrixXcd rebuilt = mpo_to_dense(spin_glass_mpo(small, s));
      REQUIRE((dense - rebuilt).norm() < 1e-10);
    }
  }
}
