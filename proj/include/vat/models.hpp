#pragma once

// Hamiltonian families of the annealing protocol
//   H(s) = (1-s) H0 + s H1 + s(1-s) H2,   H0 = -sum_j sigma^x_j,
// in dense form for every model and in exact MPO form for the spin glass.

#include "vat/core.hpp"
#include "vat/rng.hpp"

#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace vat {

enum class Model { TwoQubit, Bipartite, Lmg, SpinGlass };

inline const char* model_name(Model m) {
  switch (m) {
    case Model::TwoQubit: return "two-qubit";
    case Model::Bipartite: return "bipartite";
    case Model::Lmg: return "lmg";
    case Model::SpinGlass: return "spin-glass";
  }
  return "?";
}

// Qubit convention: sigma^z|0> = +|0>, |+> = (|0>+|1>)/sqrt(2).
inline Matrix2cd pauli_x() {
  Matrix2cd m; m << 0, 1, 1, 0; return m;
}
inline Matrix2cd pauli_y() {
  Matrix2cd m; m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}
inline Matrix2cd pauli_z() {
  Matrix2cd m; m << 1, 0, 0, -1; return m;
}

inline MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
  MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// sum over sites of a single-site operator on N qubits (site 0 most
/// significant).
inline MatrixXcd sum_single_site(const Matrix2cd& op, int N) {
  Eigen::Index dim = 1LL << N;
  MatrixXcd out = MatrixXcd::Zero(dim, dim);
  for (int j = 0; j < N; ++j) {
    MatrixXcd t = MatrixXcd::Identity(1, 1);
    for (int k = 0; k < N; ++k)
      t = kron(t, k == j ? MatrixXcd(op) : MatrixXcd(Matrix2cd::Identity()));
    out += t;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spin-glass disorder
// ---------------------------------------------------------------------------

/// Fully connected random Ising instance:
///   H1 = -sum_{i != j} J_ij sz_i sz_j + sum_i h_i sz_i,
/// J symmetric with entries in (0,1), h entries in (-0.5, 0.5).
struct SpinGlassInstance {
  int N = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd J;  // symmetric, zero diagonal
  Eigen::VectorXd h;

  /// Classical energy of the configuration z in {+1,-1}^N.
  double classical_energy(const std::vector<int>& z) const {
    double e = 0.0;
    for (int i = 0; i < N; ++i) {
      e += h(i) * z[i];
      for (int j = i + 1; j < N; ++j) e -= 2.0 * J(i, j) * z[i] * z[j];
    }
    return e;
  }

  /// Energy of the computational basis state with index `idx`
  /// (bit 0 of site 0 in the most significant position).
  double basis_energy(long long idx) const {
    std::vector<int> z(N);
    for (int i = 0; i < N; ++i)
      z[i] = ((idx >> (N - 1 - i)) & 1) ? -1 : 1;
    return classical_energy(z);
  }
};

/// Deterministic disorder sampling. Draw order: upper-triangle J row-major,
/// then h, all from one splitmix64 stream of `seed`.
inline SpinGlassInstance sample_spin_glass(int N, std::uint64_t seed) {
  if (N < 2) throw std::invalid_argument("sample_spin_glass: N >= 2");
  SpinGlassInstance inst;
  inst.N = N;
  inst.seed = seed;
  inst.J = Eigen::MatrixXd::Zero(N, N);
  inst.h = Eigen::VectorXd::Zero(N);
  SplitMix64 g(seed);
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j) inst.J(i, j) = inst.J(j, i) = g.next_open01();
  for (int i = 0; i < N; ++i) inst.h(i) = g.next_open01() - 0.5;
  return inst;
}

/// Plain-text coefficient file: `N seed`, then N(N-1)/2 lines `i j J_ij`,
/// then N lines `i h_i` (0-based, 17 significant digits).
inline void save_instance(const SpinGlassInstance& inst, std::ostream& os) {
  os << inst.N << ' ' << inst.seed << '\n';
  os << std::setprecision(17);
  for (int i = 0; i < inst.N; ++i)
    for (int j = i + 1; j < inst.N; ++j)
      os << i << ' ' << j << ' ' << inst.J(i, j) << '\n';
  for (int i = 0; i < inst.N; ++i) os << i << ' ' << inst.h(i) << '\n';
}

inline void save_instance(const SpinGlassInstance& inst,
                          const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("instance file: cannot open " + path);
  save_instance(inst, f);
}

inline SpinGlassInstance load_instance(std::istream& is) {
  SpinGlassInstance inst;
  if (!(is >> inst.N >> inst.seed))
    throw std::runtime_error("instance file: bad header");
  if (inst.N < 2) throw std::runtime_error("instance file: N >= 2 required");
  inst.J = Eigen::MatrixXd::Zero(inst.N, inst.N);
  inst.h = Eigen::VectorXd::Zero(inst.N);
  for (int k = 0; k < inst.N * (inst.N - 1) / 2; ++k) {
    int i, j; double v;
    if (!(is >> i >> j >> v)) throw std::runtime_error("instance file: bad J line");
    inst.J(i, j) = inst.J(j, i) = v;
  }
  for (int k = 0; k < inst.N; ++k) {
    int i; double v;
    if (!(is >> i >> v)) throw std::runtime_error("instance file: bad h line");
    inst.h(i) = v;
  }
  return inst;
}

inline SpinGlassInstance load_instance(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("instance file: cannot open " + path);
  return load_instance(f);
}

// ---------------------------------------------------------------------------
// ProtocolSpec
// ---------------------------------------------------------------------------

struct ProtocolSpec {
  Model model = Model::TwoQubit;
  int N = 2;
  double catalyst = 0.0;  // A, for TwoQubit/Bipartite
  SpinGlassInstance instance;
  std::vector<int> local_dims;
};

inline ProtocolSpec build_protocol(Model model, int N, double catalyst = 0.0,
                                   const SpinGlassInstance* inst = nullptr) {
  if (catalyst < 0) throw std::invalid_argument("build_protocol: A >= 0");
  ProtocolSpec spec;
  spec.model = model;
  spec.catalyst = catalyst;
  switch (model) {
    case Model::TwoQubit:
      spec.N = 2;
      spec.local_dims = {2, 2};
      break;
    case Model::Bipartite:
      if (N < 0) throw std::invalid_argument("build_protocol: N >= 0");
      spec.N = N;
      spec.local_dims = {N + 2, N + 2};
      break;
    case Model::Lmg:
      if (N < 1) throw std::invalid_argument("build_protocol: N >= 1");
      spec.N = N;
      spec.local_dims.assign(N, 2);
      break;
    case Model::SpinGlass:
      if (!inst) throw std::invalid_argument("build_protocol: instance required");
      spec.N = inst->N;
      spec.instance = *inst;
      spec.local_dims.assign(inst->N, 2);
      break;
  }
  return spec;
}

namespace detail {

inline void protocol_terms(const ProtocolSpec& spec, MatrixXcd& H0,
                           MatrixXcd& H1, MatrixXcd& H2) {
  switch (spec.model) {
    case Model::TwoQubit: {
      const MatrixXcd sx = pauli_x(), sz = pauli_z(),
                      id = Matrix2cd::Identity();
      H0 = -(kron(sx, id) + kron(id, sx));
      H1 = kron(sz, sz) - 2.0 * (kron(sz, id) + kron(id, sz));
      VectorXcd bell = VectorXcd::Zero(4);
      bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
      H2 = -2.0 * spec.catalyst * (bell * bell.adjoint());
      break;
    }
    case Model::Bipartite: {
      // Two (N+2)-level subsystems; H0, H1 act on the {|0>,|1>} block.
      int d = spec.N + 2;
      MatrixXcd x = MatrixXcd::Zero(d, d), z = MatrixXcd::Zero(d, d),
                id = MatrixXcd::Identity(d, d);
      x(0, 1) = x(1, 0) = 1.0;
      z(0, 0) = 1.0;
      z(1, 1) = -1.0;
      H0 = -(kron(x, id) + kron(id, x));
      H1 = kron(z, z) - 2.0 * (kron(z, id) + kron(id, z));
      VectorXcd psip = VectorXcd::Zero(d * d);
      for (int i = 0; i < d; ++i) psip(i * d + i) = 1.0 / std::sqrt(double(d));
      H2 = -spec.catalyst * double(d) * (psip * psip.adjoint());
      break;
    }
    case Model::Lmg: {
      MatrixXcd Sz = sum_single_site(pauli_z(), spec.N);
      H0 = -sum_single_site(pauli_x(), spec.N);
      H1 = -(Sz * Sz) / double(spec.N);
      H2 = MatrixXcd::Zero(H0.rows(), H0.cols());
      break;
    }
    case Model::SpinGlass: {
      const auto& inst = spec.instance;
      int N = inst.N;
      H0 = -sum_single_site(pauli_x(), N);
      Eigen::Index dim = 1LL << N;
      VectorXd diag(dim);
      for (long long idx = 0; idx < dim; ++idx)
        diag(idx) = inst.basis_energy(idx);
      H1 = diag.cast<Complex>().asDiagonal();
      H2 = MatrixXcd::Zero(dim, dim);
      break;
    }
  }
}

}  // namespace detail

/// Dense H(s) = (1-s) H0 + s H1 + s(1-s) H2.
inline DenseOperator hamiltonian_at(const ProtocolSpec& spec, double s) {
  if (s < 0.0 || s > 1.0)
    throw std::invalid_argument("hamiltonian_at: s outside [0,1]");
  MatrixXcd H0, H1, H2;
  detail::protocol_terms(spec, H0, H1, H2);
  DenseOperator H;
  H.mat = (1.0 - s) * H0 + s * H1 + s * (1.0 - s) * H2;
  H.local_dims = spec.local_dims;
  return H;
}

/// Callback form used by evolve_exact; builds the three terms once.
inline std::function<MatrixXcd(double)> hamiltonian_fn(const ProtocolSpec& spec) {
  auto H0 = std::make_shared<MatrixXcd>();
  auto H1 = std::make_shared<MatrixXcd>();
  auto H2 = std::make_shared<MatrixXcd>();
  detail::protocol_terms(spec, *H0, *H1, *H2);
  bool catalyst = spec.model == Model::TwoQubit || spec.model == Model::Bipartite;
  return [=](double s) -> MatrixXcd {
    MatrixXcd H = (1.0 - s) * (*H0) + s * (*H1);
    if (catalyst) H += s * (1.0 - s) * (*H2);
    return H;
  };
}

// ---------------------------------------------------------------------------
// Spin-glass MPO
// ---------------------------------------------------------------------------

struct MpoEntry {
  int left = 0;
  int right = 0;
  Matrix2cd op;
};

struct MpoSite {
  int left_dim = 1;
  int right_dim = 1;
  std::vector<MpoEntry> entries;
};

struct Mpo {
  std::vector<MpoSite> sites;
  int length() const { return static_cast<int>(sites.size()); }
};

/// Exact MPO of (1-s) H0 + s H1 for the fully connected couplings. Channel
/// bookkeeping switches from "earlier sites still coupled" to "sums awaiting
/// later sites" at the middle, giving bond dimension min(k, N-k) + 2 at
/// cut k.
inline Mpo spin_glass_mpo(const SpinGlassInstance& inst, double s) {
  if (s < 0.0 || s > 1.0)
    throw std::invalid_argument("spin_glass_mpo: s outside [0,1]");
  const int N = inst.N;
  const int m = N / 2;  // cuts k <= m use left channels, k > m right channels
  const Matrix2cd sx = pauli_x(), sz = pauli_z(), id = Matrix2cd::Identity();

  auto onsite = [&](int j) -> Matrix2cd {
    return -(1.0 - s) * sx + s * inst.h(j) * sz;
  };
  auto coupling = [&](int i, int j) { return s * (-2.0) * inst.J(i, j); };
  auto cut_dim = [&](int k) -> int {
    if (k == 0 || k == N) return 1;
    return std::min(k, N - k) + 2;
  };
  // Left-mode basis at cut k: [unit, c_0..c_{k-1}, full]; right-mode basis:
  // [unit, d_k..d_{N-1}, full].
  auto L_one = [](int) { return 0; };
  auto L_c = [](int, int i) { return 1 + i; };
  auto L_full = [](int k) { return k + 1; };
  auto R_one = [](int) { return 0; };
  auto R_d = [](int k, int q) { return 1 + (q - k); };
  auto R_full = [&](int k) { return N - k + 1; };

  Mpo mpo;
  mpo.sites.resize(N);
  for (int j = 0; j < N; ++j) {
    MpoSite& W = mpo.sites[j];
    const int kl = j, kr = j + 1;
    const bool l_is_left = kl <= m, r_is_left = kr <= m;
    W.left_dim = cut_dim(kl);
    W.right_dim = cut_dim(kr);
    auto add = [&](int a, int b, const Matrix2cd& op) {
      if (op.cwiseAbs().maxCoeff() == 0.0) return;
      W.entries.push_back({a, b, op});
    };
    if (j == 0) {
      if (N == 1) { add(0, 0, onsite(0)); continue; }
      if (r_is_left) {
        add(0, L_one(kr), id);
        add(0, L_c(kr, 0), sz);
        add(0, L_full(kr), onsite(0));
      } else {  // N == 2 with m = 1 never lands here; guard anyway
        add(0, R_one(kr), id);
        add(0, R_full(kr), onsite(0));
        for (int q = kr; q < N; ++q) add(0, R_d(kr, q), coupling(0, q) * sz);
      }
    } else if (j == N - 1) {
      if (l_is_left) {
        add(L_one(kl), 0, onsite(j));
        for (int i = 0; i < kl; ++i) add(L_c(kl, i), 0, coupling(i, j) * sz);
        add(L_full(kl), 0, id);
      } else {
        add(R_one(kl), 0, onsite(j));
        add(R_d(kl, j), 0, sz);
        add(R_full(kl), 0, id);
      }
    } else if (l_is_left && r_is_left) {
      add(L_one(kl), L_one(kr), id);
      add(L_one(kl), L_c(kr, j), sz);
      add(L_one(kl), L_full(kr), onsite(j));
      for (int i = 0; i < kl; ++i) {
        add(L_c(kl, i), L_c(kr, i), id);
        add(L_c(kl, i), L_full(kr), coupling(i, j) * sz);
      }
      add(L_full(kl), L_full(kr), id);
    } else if (l_is_left && !r_is_left) {
      // channel handover at the middle site
      add(L_one(kl), R_one(kr), id);
      add(L_one(kl), R_full(kr), onsite(j));
      for (int q = kr; q < N; ++q)
        add(L_one(kl), R_d(kr, q), coupling(j, q) * sz);
      for (int i = 0; i < kl; ++i) {
        add(L_c(kl, i), R_full(kr), coupling(i, j) * sz);
        for (int q = kr; q < N; ++q)
          add(L_c(kl, i), R_d(kr, q), coupling(i, q) * id);
      }
      add(L_full(kl), R_full(kr), id);
    } else {
      add(R_one(kl), R_one(kr), id);
      add(R_one(kl), R_full(kr), onsite(j));
      add(R_d(kl, j), R_full(kr), sz);
      for (int q = kr; q < N; ++q) {
        add(R_d(kl, q), R_d(kr, q), id);
        add(R_one(kl), R_d(kr, q), coupling(j, q) * sz);
      }
      add(R_full(kl), R_full(kr), id);
    }
  }
  return mpo;
}

/// Dense reconstruction (testing aid, N <= 12 or so).
inline MatrixXcd mpo_to_dense(const Mpo& mpo) {
  const int N = mpo.length();
  // cur[w] is the operator on sites 0..j with open right MPO index w
  std::vector<MatrixXcd> cur(mpo.sites[0].right_dim);
  for (auto& c : cur) c = MatrixXcd::Zero(2, 2);
  for (const auto& e : mpo.sites[0].entries) cur[e.right] += e.op;
  for (int j = 1; j < N; ++j) {
    const auto& W = mpo.sites[j];
    Eigen::Index dim = cur[0].rows() * 2;
    std::vector<MatrixXcd> nxt(W.right_dim, MatrixXcd::Zero(dim, dim));
    for (const auto& e : W.entries)
      nxt[e.right] += kron(cur[e.left], MatrixXcd(e.op));
    cur = std::move(nxt);
  }
  return cur[0];
}

}  // namespace vat
