#pragma once

// Matrix-product-state machinery for the spin-glass anneals: canonical
// forms, MPO environments, single-site DMRG with subspace expansion,
// inverse-free single-site TDVP (projector splitting), effective gaps and
// checkpoint serialization. Local dimension is fixed to 2.

#include "vat/core.hpp"
#include "vat/models.hpp"

#include <cstdint>
#include <fstream>

namespace vat {

using SiteTensor = std::array<MatrixXcd, 2>;  // A[p] is Dl x Dr

struct MpsState {
  std::vector<SiteTensor> sites;
  int center = 0;
  int D_max = 1;

  int length() const { return static_cast<int>(sites.size()); }
  Eigen::Index bond_left(int k) const { return sites[k][0].rows(); }
  Eigen::Index bond_right(int k) const { return sites[k][0].cols(); }
  double norm() const {
    double n2 = 0.0;
    for (int p = 0; p < 2; ++p) n2 += sites[center][p].squaredNorm();
    return std::sqrt(n2);
  }
};

namespace detail {

// Stacks for canonical checks and decompositions.
inline MatrixXcd stack_vertical(const SiteTensor& A) {
  MatrixXcd M(2 * A[0].rows(), A[0].cols());
  M << A[0], A[1];
  return M;
}

inline MatrixXcd stack_horizontal(const SiteTensor& A) {
  MatrixXcd M(A[0].rows(), 2 * A[0].cols());
  M << A[0], A[1];
  return M;
}

inline SiteTensor unstack_vertical(const MatrixXcd& M) {
  Eigen::Index dl = M.rows() / 2;
  return {M.topRows(dl), M.bottomRows(dl)};
}

inline SiteTensor unstack_horizontal(const MatrixXcd& M) {
  Eigen::Index dr = M.cols() / 2;
  return {M.leftCols(dr), M.rightCols(dr)};
}

/// Thin QR with R forced to have a nonnegative real diagonal (uniqueness).
inline std::pair<MatrixXcd, MatrixXcd> thin_qr(const MatrixXcd& M) {
  Eigen::HouseholderQR<MatrixXcd> qr(M);
  Eigen::Index k = std::min(M.rows(), M.cols());
  MatrixXcd Q = qr.householderQ() * MatrixXcd::Identity(M.rows(), k);
  MatrixXcd R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < k; ++i) {
    Complex d = R(i, i);
    if (std::abs(d) > 1e-300) {
      Complex ph = d / std::abs(d);
      R.row(i) *= std::conj(ph);
      Q.col(i) *= ph;
    }
  }
  return {Q, R};
}

/// Thin LQ, M = L Q with Q having orthonormal rows.
inline std::pair<MatrixXcd, MatrixXcd> thin_lq(const MatrixXcd& M) {
  auto [Q, R] = thin_qr(M.adjoint());
  return {R.adjoint(), Q.adjoint()};
}

}  // namespace detail

inline double left_canonical_residual(const SiteTensor& A) {
  MatrixXcd M = detail::stack_vertical(A);
  return (M.adjoint() * M - MatrixXcd::Identity(M.cols(), M.cols()))
      .cwiseAbs()
      .maxCoeff();
}

inline double right_canonical_residual(const SiteTensor& A) {
  MatrixXcd M = detail::stack_horizontal(A);
  return (M * M.adjoint() - MatrixXcd::Identity(M.rows(), M.rows()))
      .cwiseAbs()
      .maxCoeff();
}

/// Largest canonical-form violation outside the center site.
inline double canonical_residual(const MpsState& psi) {
  double r = 0.0;
  for (int k = 0; k < psi.length(); ++k) {
    if (k < psi.center) r = std::max(r, left_canonical_residual(psi.sites[k]));
    if (k > psi.center) r = std::max(r, right_canonical_residual(psi.sites[k]));
  }
  return r;
}

/// Move the orthogonality center one site right (QR, absorb R).
inline void move_center_right(MpsState& psi) {
  int k = psi.center;
  if (k + 1 >= psi.length()) throw std::out_of_range("move_center_right");
  auto [Q, R] = detail::thin_qr(detail::stack_vertical(psi.sites[k]));
  psi.sites[k] = detail::unstack_vertical(Q);
  for (int p = 0; p < 2; ++p)
    psi.sites[k + 1][p] = (R * psi.sites[k + 1][p]).eval();
  psi.center = k + 1;
}

inline void move_center_left(MpsState& psi) {
  int k = psi.center;
  if (k == 0) throw std::out_of_range("move_center_left");
  auto [L, Q] = detail::thin_lq(detail::stack_horizontal(psi.sites[k]));
  psi.sites[k] = detail::unstack_horizontal(Q);
  for (int p = 0; p < 2; ++p)
    psi.sites[k - 1][p] = (psi.sites[k - 1][p] * L).eval();
  psi.center = k - 1;
}

inline void move_center_to(MpsState& psi, int k) {
  while (psi.center < k) move_center_right(psi);
  while (psi.center > k) move_center_left(psi);
}

/// Dense amplitudes, site 0 most significant. Guarded to 2^14.
inline StateVector mps_to_dense(const MpsState& psi) {
  int n = psi.length();
  if (n > 14) throw std::invalid_argument("mps_to_dense: chain too long");
  MatrixXcd acc = MatrixXcd::Ones(1, 1);  // (configurations) x bond
  for (int k = 0; k < n; ++k) {
    Eigen::Index rows = acc.rows(), dr = psi.bond_right(k);
    MatrixXcd nxt(rows * 2, dr);
    for (int p = 0; p < 2; ++p)
      nxt.block(p == 0 ? 0 : rows, 0, rows, dr) = acc * psi.sites[k][p];
    // interleave so that site k is less significant than the prefix
    MatrixXcd shuffled(rows * 2, dr);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (int p = 0; p < 2; ++p)
        shuffled.row(2 * r + p) = nxt.row(p == 0 ? r : rows + r);
    acc = shuffled;
  }
  StateVector out;
  out.amplitudes = acc.col(0);
  out.local_dims.assign(n, 2);
  return out;
}

/// <a|b> via the transfer matrix.
inline Complex overlap(const MpsState& a, const MpsState& b) {
  if (a.length() != b.length()) throw std::invalid_argument("overlap: lengths differ");
  MatrixXcd E = MatrixXcd::Ones(1, 1);  // (a bond) x (b bond), bra = a
  for (int k = 0; k < a.length(); ++k) {
    MatrixXcd En = MatrixXcd::Zero(a.bond_right(k), b.bond_right(k));
    for (int p = 0; p < 2; ++p)
      En += a.sites[k][p].adjoint() * E * b.sites[k][p];
    E = En;
  }
  return E(0, 0);
}

/// Entanglement entropy across bond (k | k+1).
inline double mps_entropy(MpsState psi, int bond_left_site) {
  if (bond_left_site < 0 || bond_left_site + 1 >= psi.length())
    throw std::out_of_range("mps_entropy: bond index");
  move_center_to(psi, bond_left_site);
  auto [Q, R] = detail::thin_qr(detail::stack_vertical(psi.sites[bond_left_site]));
  Eigen::JacobiSVD<MatrixXcd> svd(R);
  double s = 0.0;
  double n2 = svd.singularValues().squaredNorm();
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    double p = svd.singularValues()(i) * svd.singularValues()(i) / n2;
    if (p > 1e-14) s -= p * std::log(p);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Product-state preparation with padded effective spaces
// ---------------------------------------------------------------------------

namespace detail {

/// Orthonormal completion of the rows of `rows0` to `target` rows inside
/// C^{cols}, built deterministically from the identity basis.
inline MatrixXcd complete_rows(const MatrixXcd& rows0, Eigen::Index target) {
  Eigen::Index cols = rows0.cols();
  MatrixXcd out(target, cols);
  Eigen::Index have = rows0.rows();
  out.topRows(have) = rows0;
  for (Eigen::Index cand = 0; cand < cols && have < target; ++cand) {
    // project e_cand off the conjugated row space; two passes for stability
    VectorXcd v = VectorXcd::Unit(cols, cand);
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index r = 0; r < have; ++r) {
        VectorXcd w = out.row(r).transpose();
        v -= w.dot(v) * w;
      }
    if (v.norm() > 1e-8) {
      out.row(have) = (v / v.norm()).transpose();
      ++have;
    }
  }
  if (have < target)
    throw std::runtime_error("complete_rows: completion failed");
  return out;
}

}  // namespace detail

/// |+>^N as an MPS whose bond profile is pre-inflated to
/// min(2^k, 2^{N-k}, D); the extra channels are orthonormal completions
/// that carry zero amplitude, so the represented state is exact while the
/// single-site effective spaces have full dimension from the start.
/// Right canonical with the center at site 0.
inline MpsState product_mps(const std::vector<Eigen::Vector2cd>& locals, int D) {
  int N = static_cast<int>(locals.size());
  if (N < 2 || D < 1) throw std::invalid_argument("product_mps: N >= 2, D >= 1");
  for (const auto& v : locals)
    if (std::abs(v.norm() - 1.0) > 1e-12)
      throw std::invalid_argument("product_mps: local states must be normalized");
  auto bond = [&](int k) -> Eigen::Index {
    double a = std::min(std::pow(2.0, k), std::pow(2.0, N - k));
    return static_cast<Eigen::Index>(std::min<double>(a, D));
  };
  MpsState psi;
  psi.D_max = D;
  psi.center = 0;
  psi.sites.resize(N);
  for (int k = 0; k < N; ++k) {
    Eigen::Index dl = bond(k), dr = bond(k + 1);
    MatrixXcd row0 = MatrixXcd::Zero(1, 2 * dr);
    row0(0, 0) = locals[k](0);
    row0(0, dr) = locals[k](1);  // horizontal stacking [B[0] B[1]]
    MatrixXcd M;
    if (k == 0) {
      // center site: only the physical row matters, pad with zeros
      M = MatrixXcd::Zero(dl, 2 * dr);
      M.row(0) = row0;
    } else {
      M = detail::complete_rows(row0, dl);
    }
    psi.sites[k] = detail::unstack_horizontal(M);
  }
  return psi;
}

/// |+>^N convenience form.
inline MpsState product_mps(int N, int D) {
  const double amp = 1.0 / std::sqrt(2.0);
  return product_mps(
      std::vector<Eigen::Vector2cd>(N, Eigen::Vector2cd(amp, amp)), D);
}

// ---------------------------------------------------------------------------
// Environments and effective Hamiltonians
// ---------------------------------------------------------------------------

using Environment = std::vector<MatrixXcd>;  // one block per MPO channel

namespace detail {

inline Environment left_boundary() { return {MatrixXcd::Ones(1, 1)}; }
inline Environment right_boundary() { return {MatrixXcd::Ones(1, 1)}; }

/// Push a left environment through a (left-canonical) site tensor.
inline Environment advance_left(const Environment& L, const MpoSite& W,
                                const SiteTensor& A) {
  Environment out(W.right_dim);
  for (int v = 0; v < W.right_dim; ++v)
    out[v] = MatrixXcd::Zero(A[0].cols(), A[0].cols());
  for (const auto& e : W.entries)
    for (int q = 0; q < 2; ++q)
      for (int p = 0; p < 2; ++p) {
        Complex c = e.op(q, p);
        if (c == Complex(0, 0)) continue;
        out[e.right] += c * (A[p].transpose() * L[e.left] * A[q].conjugate());
      }
  return out;
}

/// Push a right environment through a (right-canonical) site tensor.
inline Environment advance_right(const Environment& R, const MpoSite& W,
                                 const SiteTensor& A) {
  Environment out(W.left_dim);
  for (int w = 0; w < W.left_dim; ++w)
    out[w] = MatrixXcd::Zero(A[0].rows(), A[0].rows());
  for (const auto& e : W.entries)
    for (int q = 0; q < 2; ++q)
      for (int p = 0; p < 2; ++p) {
        Complex c = e.op(q, p);
        if (c == Complex(0, 0)) continue;
        out[e.left] += c * (A[p] * R[e.right] * A[q].adjoint());
      }
  return out;
}

/// One-site effective Hamiltonian applied to a center tensor.
inline SiteTensor heff_apply(const Environment& L, const MpoSite& W,
                             const Environment& R, const SiteTensor& C) {
  SiteTensor Y = {MatrixXcd::Zero(C[0].rows(), C[0].cols()),
                  MatrixXcd::Zero(C[0].rows(), C[0].cols())};
  for (const auto& e : W.entries)
    for (int q = 0; q < 2; ++q)
      for (int p = 0; p < 2; ++p) {
        Complex c = e.op(q, p);
        if (c == Complex(0, 0)) continue;
        Y[q] += c * (L[e.left].transpose() * C[p] * R[e.right]);
      }
  return Y;
}

/// Zero-site (bond) effective Hamiltonian.
inline MatrixXcd bond_apply(const Environment& L, const Environment& R,
                            const MatrixXcd& C) {
  MatrixXcd Y = MatrixXcd::Zero(C.rows(), C.cols());
  for (std::size_t w = 0; w < L.size(); ++w)
    Y += L[w].transpose() * C * R[w];
  return Y;
}

inline VectorXcd flatten(const SiteTensor& C) {
  VectorXcd v(2 * C[0].size());
  v << Eigen::Map<const VectorXcd>(C[0].data(), C[0].size()),
      Eigen::Map<const VectorXcd>(C[1].data(), C[1].size());
  return v;
}

inline SiteTensor unflatten(const VectorXcd& v, Eigen::Index dl, Eigen::Index dr) {
  SiteTensor C;
  C[0] = Eigen::Map<const MatrixXcd>(v.data(), dl, dr);
  C[1] = Eigen::Map<const MatrixXcd>(v.data() + dl * dr, dl, dr);
  return C;
}

inline Complex inner(const SiteTensor& a, const SiteTensor& b) {
  Complex s = 0.0;
  for (int p = 0; p < 2; ++p)
    s += (a[p].conjugate().array() * b[p].array()).sum();
  return s;
}

/// exp(-i dt H) v for Hermitian H via Lanczos with full reorthogonalization.
inline VectorXcd krylov_evolve(
    const std::function<VectorXcd(const VectorXcd&)>& apply, VectorXcd v,
    double dt, double tol = 1e-12, int max_dim = 60) {
  double vnorm = v.norm();
  if (vnorm < 1e-300) return v;
  std::vector<VectorXcd> basis;
  std::vector<double> alpha, beta;
  basis.push_back(v / vnorm);
  int m = std::min<int>(max_dim, static_cast<int>(v.size()));
  VectorXcd result;
  for (int k = 0; k < m; ++k) {
    VectorXcd w = apply(basis[k]);
    double a = std::real(basis[k].dot(w));
    alpha.push_back(a);
    w -= a * basis[k];
    if (k > 0) w -= beta[k - 1] * basis[k - 1];
    for (const auto& q : basis) w -= q.dot(w) * q;
    double b = w.norm();
    int kk = k + 1;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(kk, kk);
    for (int i = 0; i < kk; ++i) {
      T(i, i) = alpha[i];
      if (i > 0) T(i, i - 1) = T(i - 1, i) = beta[i - 1];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    Eigen::VectorXcd coef = Eigen::VectorXcd::Zero(kk);
    for (int i = 0; i < kk; ++i) {
      Complex acc = 0.0;
      for (int j = 0; j < kk; ++j)
        acc += es.eigenvectors()(i, j) *
               std::exp(Complex(0, -dt * es.eigenvalues()(j))) *
               es.eigenvectors()(0, j);
      coef(i) = acc;
    }
    double err = (kk > 1) ? b * std::abs(coef(kk - 1)) * std::abs(dt) : 1.0;
    if (err < tol || b < 1e-13 || k == m - 1) {
      result = VectorXcd::Zero(v.size());
      for (int i = 0; i < kk; ++i) result += coef(i) * basis[i];
      return vnorm * result;
    }
    beta.push_back(b);
    basis.push_back(w / b);
  }
  return v;  // unreachable
}

}  // namespace detail

/// Dense one-site effective Hamiltonian at the canonical center (testing
/// and gap extraction; dimension 2 * Dl * Dr).
inline MatrixXcd dense_heff(const Mpo& mpo, const MpsState& psi, int site) {
  if (psi.center != site) throw std::invalid_argument("dense_heff: center mismatch");
  Environment L = detail::left_boundary();
  for (int k = 0; k < site; ++k)
    L = detail::advance_left(L, mpo.sites[k], psi.sites[k]);
  Environment R = detail::right_boundary();
  for (int k = psi.length() - 1; k > site; --k)
    R = detail::advance_right(R, mpo.sites[k], psi.sites[k]);
  Eigen::Index dl = psi.bond_left(site), dr = psi.bond_right(site);
  Eigen::Index dim = 2 * dl * dr;
  MatrixXcd H(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    SiteTensor e = detail::unflatten(VectorXcd::Unit(dim, j), dl, dr);
    H.col(j) = detail::flatten(detail::heff_apply(L, mpo.sites[site], R, e));
  }
  return H;
}

/// Gap of the one-site effective Hamiltonian at the center: second level
/// strictly above the ground manifold (degeneracy tolerance 1e-9).
inline double effective_gap(const Mpo& mpo, const MpsState& psi) {
  MatrixXcd H = dense_heff(mpo, psi, psi.center);
  if (H.rows() < 2)
    throw std::runtime_error("effective_gap: insufficient effective space");
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
  double e0 = es.eigenvalues()(0);
  for (Eigen::Index k = 1; k < es.eigenvalues().size(); ++k)
    if (es.eigenvalues()(k) - e0 > kDegeneracyTol) return es.eigenvalues()(k) - e0;
  throw std::runtime_error("effective_gap: insufficient effective space");
}

/// <psi| H |psi> for a normalized state with any center position.
inline double mps_energy(const Mpo& mpo, const MpsState& psi) {
  Environment L = detail::left_boundary();
  for (int k = 0; k < psi.length(); ++k)
    L = detail::advance_left(L, mpo.sites[k], psi.sites[k]);
  return std::real(L[0](0, 0)) / std::pow(psi.norm(), 2);
}

// ---------------------------------------------------------------------------
// DMRG (single site, subspace expansion)
// ---------------------------------------------------------------------------

struct DmrgOptions {
  int max_sweeps = 200;
  double energy_tol = 1e-12;
  double alpha0 = 1e-4;   // initial expansion weight, halved each sweep
  int polish_sweeps = 2;  // trailing sweeps with expansion off
};

struct DmrgResult {
  MpsState state;
  double energy = 0.0;
  int sweeps = 0;
  bool converged = false;
  std::vector<double> sweep_energies;
};

namespace detail {

/// Truncated SVD split, left-canonical part and the carry S V^H.
inline std::pair<MatrixXcd, MatrixXcd> split_left(const MatrixXcd& M,
                                                  Eigen::Index keep) {
  Eigen::JacobiSVD<MatrixXcd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::Index k = std::min<Eigen::Index>(keep, svd.singularValues().size());
  MatrixXcd U = svd.matrixU().leftCols(k);
  MatrixXcd C = svd.singularValues().head(k).asDiagonal() *
                svd.matrixV().leftCols(k).adjoint();
  return {U, C};
}

inline std::pair<MatrixXcd, MatrixXcd> split_right(const MatrixXcd& M,
                                                   Eigen::Index keep) {
  Eigen::JacobiSVD<MatrixXcd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::Index k = std::min<Eigen::Index>(keep, svd.singularValues().size());
  MatrixXcd V = svd.matrixV().leftCols(k).adjoint();
  MatrixXcd C = svd.matrixU().leftCols(k) *
                MatrixXcd(svd.singularValues().head(k).asDiagonal());
  return {C, V};
}

}  // namespace detail

/// Single-site DMRG with subspace expansion. Warm-startable: pass any
/// normalized state; its bond dimensions may grow up to D.
inline DmrgResult dmrg(const Mpo& mpo, MpsState psi, int D,
                       const DmrgOptions& opt = {}) {
  int n = psi.length();
  if (static_cast<int>(mpo.sites.size()) != n)
    throw std::invalid_argument("dmrg: operator and state lengths differ");
  move_center_to(psi, 0);
  psi.D_max = std::max(psi.D_max, D);

  std::vector<Environment> Ls(n + 1), Rs(n + 1);
  Ls[0] = detail::left_boundary();
  Rs[n] = detail::right_boundary();
  for (int k = n - 1; k >= 1; --k)
    Rs[k] = detail::advance_right(Rs[k + 1], mpo.sites[k], psi.sites[k]);

  auto solve_site = [&](int k) {
    Eigen::Index dl = psi.bond_left(k), dr = psi.bond_right(k);
    Eigen::Index dim = 2 * dl * dr;
    auto apply = [&](const VectorXcd& v) {
      return detail::flatten(detail::heff_apply(
          Ls[k], mpo.sites[k], Rs[k + 1], detail::unflatten(v, dl, dr)));
    };
    VectorXcd start = detail::flatten(psi.sites[k]);
    auto lr = detail::lanczos_lowest(apply, dim, 1, 1e-13,
                                     std::min<Eigen::Index>(dim, 200), start);
    psi.sites[k] = detail::unflatten(lr.ritz_vectors.col(0), dl, dr);
    return lr.ritz_values(0);
  };

  DmrgResult res;
  double e_prev = std::numeric_limits<double>::infinity();
  double alpha = opt.alpha0;
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    bool expanding = alpha > 0 &&
                     sweep < opt.max_sweeps - opt.polish_sweeps;
    double e_last = 0.0;
    // left-to-right half sweep
    for (int k = 0; k < n; ++k) {
      e_last = solve_site(k);
      if (k == n - 1) break;
      Eigen::Index dl = psi.bond_left(k), dr = psi.bond_right(k);
      MatrixXcd M = detail::stack_vertical(psi.sites[k]);  // 2dl x dr
      Eigen::Index pad = 0;
      if (expanding) {
        const auto& W = mpo.sites[k];
        MatrixXcd P = MatrixXcd::Zero(2 * dl, W.right_dim * dr);
        for (const auto& e : W.entries)
          for (int q = 0; q < 2; ++q)
            for (int p = 0; p < 2; ++p) {
              Complex c = e.op(q, p);
              if (c == Complex(0, 0)) continue;
              P.block(q * dl, e.right * dr, dl, dr) +=
                  c * (Ls[k][e.left].transpose() * psi.sites[k][p]);
            }
        pad = P.cols();
        MatrixXcd Me(2 * dl, dr + pad);
        Me << M, alpha * P;
        M = Me;
      }
      Eigen::Index keep = std::min<Eigen::Index>({2 * dl, M.cols(), D});
      auto [U, C] = detail::split_left(M, keep);
      psi.sites[k] = detail::unstack_vertical(U);
      Ls[k + 1] = detail::advance_left(Ls[k], mpo.sites[k], psi.sites[k]);
      // absorb the carry, zero-padding the neighbor if the bond grew
      for (int p = 0; p < 2; ++p) {
        MatrixXcd nb = MatrixXcd::Zero(dr + pad, psi.bond_right(k + 1));
        nb.topRows(dr) = psi.sites[k + 1][p];
        psi.sites[k + 1][p] = C * nb;
      }
      psi.center = k + 1;
    }
    // right-to-left half sweep
    for (int k = n - 1; k >= 0; --k) {
      e_last = solve_site(k);
      if (k == 0) break;
      Eigen::Index dl = psi.bond_left(k), dr = psi.bond_right(k);
      MatrixXcd M = detail::stack_horizontal(psi.sites[k]);  // dl x 2dr
      Eigen::Index pad = 0;
      if (expanding) {
        const auto& W = mpo.sites[k];
        MatrixXcd P = MatrixXcd::Zero(W.left_dim * dl, 2 * dr);
        for (const auto& e : W.entries)
          for (int q = 0; q < 2; ++q)
            for (int p = 0; p < 2; ++p) {
              Complex c = e.op(q, p);
              if (c == Complex(0, 0)) continue;
              P.block(e.left * dl, q * dr, dl, dr) +=
                  c * (psi.sites[k][p] * Rs[k + 1][e.right]);
            }
        pad = P.rows();
        MatrixXcd Me(dl + pad, 2 * dr);
        Me << M, alpha * P;
        M = Me;
      }
      Eigen::Index keep = std::min<Eigen::Index>({2 * dr, M.rows(), D});
      auto [C, V] = detail::split_right(M, keep);
      psi.sites[k] = detail::unstack_horizontal(V);
      Rs[k] = detail::advance_right(Rs[k + 1], mpo.sites[k], psi.sites[k]);
      for (int p = 0; p < 2; ++p) {
        MatrixXcd nb = MatrixXcd::Zero(psi.bond_left(k - 1), dl + pad);
        nb.leftCols(dl) = psi.sites[k - 1][p];
        psi.sites[k - 1][p] = nb * C;
      }
      psi.center = k - 1;
    }
    res.sweep_energies.push_back(e_last);
    res.sweeps = sweep + 1;
    if (std::abs(e_prev - e_last) < opt.energy_tol && !expanding) {
      res.converged = true;
      e_prev = e_last;
      break;
    }
    if (std::abs(e_prev - e_last) < opt.energy_tol) alpha = 0.0;  // switch to polish
    e_prev = e_last;
    alpha *= 0.5;
    if (alpha < 1e-12) alpha = 0.0;
  }
  // normalize the center
  double nrm = psi.norm();
  for (int p = 0; p < 2; ++p) psi.sites[psi.center][p] /= nrm;
  res.state = std::move(psi);
  res.energy = e_prev;
  return res;
}

// ---------------------------------------------------------------------------
// TDVP (single-site projector splitting, symmetric sweep)
// ---------------------------------------------------------------------------

namespace detail {

inline void evolve_site(const Environment& L, const MpoSite& W,
                        const Environment& R, SiteTensor& C, double dt) {
  Eigen::Index dl = C[0].rows(), dr = C[0].cols();
  // energy shift removes the fast global phase
  SiteTensor HC = heff_apply(L, W, R, C);
  double n2 = std::real(inner(C, C));
  double E = std::real(inner(C, HC)) / n2;
  auto apply = [&](const VectorXcd& v) {
    SiteTensor X = unflatten(v, dl, dr);
    SiteTensor Y = heff_apply(L, W, R, X);
    for (int p = 0; p < 2; ++p) Y[p] -= E * X[p];
    return flatten(Y);
  };
  VectorXcd v = krylov_evolve(apply, flatten(C), dt);
  C = unflatten(v, dl, dr);
}

inline void evolve_bond(const Environment& L, const Environment& R,
                        MatrixXcd& C, double dt) {
  MatrixXcd HC = bond_apply(L, R, C);
  double E = std::real((C.conjugate().array() * HC.array()).sum()) /
             C.squaredNorm();
  auto apply = [&](const VectorXcd& v) {
    MatrixXcd X = Eigen::Map<const MatrixXcd>(v.data(), C.rows(), C.cols());
    MatrixXcd Y = bond_apply(L, R, X) - E * X;
    return VectorXcd(Eigen::Map<const VectorXcd>(Y.data(), Y.size()));
  };
  VectorXcd v = krylov_evolve(
      apply, Eigen::Map<const VectorXcd>(C.data(), C.size()), dt);
  C = Eigen::Map<const MatrixXcd>(v.data(), C.rows(), C.cols());
}

}  // namespace detail

/// One symmetric projector-splitting step of duration dt under the frozen
/// MPO (caller evaluates the MPO at the step midpoint). The state must be
/// right-canonical with center 0 on entry; it is returned in the same form.
inline void tdvp_step(const Mpo& mpo, MpsState& psi, double dt) {
  int n = psi.length();
  if (psi.center != 0) throw std::invalid_argument("tdvp_step: center must be 0");
  std::vector<Environment> Ls(n + 1), Rs(n + 1);
  Ls[0] = detail::left_boundary();
  Rs[n] = detail::right_boundary();
  for (int k = n - 1; k >= 1; --k)
    Rs[k] = detail::advance_right(Rs[k + 1], mpo.sites[k], psi.sites[k]);

  // left-to-right half step
  for (int k = 0; k < n; ++k) {
    detail::evolve_site(Ls[k], mpo.sites[k], Rs[k + 1], psi.sites[k], dt / 2);
    if (k == n - 1) break;
    auto [Q, R] = detail::thin_qr(detail::stack_vertical(psi.sites[k]));
    psi.sites[k] = detail::unstack_vertical(Q);
    Ls[k + 1] = detail::advance_left(Ls[k], mpo.sites[k], psi.sites[k]);
    detail::evolve_bond(Ls[k + 1], Rs[k + 1], R, -dt / 2);
    for (int p = 0; p < 2; ++p)
      psi.sites[k + 1][p] = (R * psi.sites[k + 1][p]).eval();
    psi.center = k + 1;
  }
  // right-to-left half step
  for (int k = n - 1; k >= 0; --k) {
    detail::evolve_site(Ls[k], mpo.sites[k], Rs[k + 1], psi.sites[k], dt / 2);
    if (k == 0) break;
    auto [L, Q] = detail::thin_lq(detail::stack_horizontal(psi.sites[k]));
    psi.sites[k] = detail::unstack_horizontal(Q);
    Rs[k] = detail::advance_right(Rs[k + 1], mpo.sites[k], psi.sites[k]);
    detail::evolve_bond(Ls[k], Rs[k], L, -dt / 2);
    for (int p = 0; p < 2; ++p)
      psi.sites[k - 1][p] = (psi.sites[k - 1][p] * L).eval();
    psi.center = k - 1;
  }
}

// ---------------------------------------------------------------------------
// Annealing driver
// ---------------------------------------------------------------------------

struct AnnealSample {
  double s = 0.0;
  double delta_vgs = std::numeric_limits<double>::quiet_NaN();
  double delta_exact = std::numeric_limits<double>::quiet_NaN();
  double delta_evolved = std::numeric_limits<double>::quiet_NaN();
  double eff_gap = std::numeric_limits<double>::quiet_NaN();
  double exact_gap = std::numeric_limits<double>::quiet_NaN();
  double entropy = 0.0;
  double energy = 0.0;
  bool vgs_jump = false;  // first-order jump of the variational ground state
};

struct AnnealRecord {
  std::vector<AnnealSample> samples;
  MpsState final_state;
  double min_eff_gap = std::numeric_limits<double>::infinity();
};

struct AnnealOptions {
  double dt = 0.05;
  double record_ds = 0.01;
  bool vgs_dmrg = true;        // instantaneous variational ground states
  bool exact_columns = false;  // dense ground state / gap columns
  bool exact_evolution = false;  // dense time-evolved reference column
  bool effective_gaps = true;
};

/// Anneal from |+>^N under the spin-glass protocol, MPO rebuilt at every
/// step midpoint. Records every record_ds in s; the variational ground
/// state is tracked by DMRG warm-started from the previous grid point.
inline AnnealRecord anneal_mps(const SpinGlassInstance& inst, int D, double T,
                               const AnnealOptions& opt = {}) {
  if (D < 1 || T <= 0 || opt.dt <= 0)
    throw std::invalid_argument("anneal_mps: D >= 1, T > 0, dt > 0");
  int n = inst.N;
  MpsState psi = product_mps(n, D);
  MpsState vgs = product_mps(n, D);
  long long nsteps = std::llround(T / opt.dt);
  if (nsteps < 1) throw std::invalid_argument("anneal_mps: step exceeds horizon");
  double h = T / static_cast<double>(nsteps);
  long long record_every =
      std::max<long long>(1, std::llround(opt.record_ds * T / h));

  ProtocolSpec spec;
  if (opt.exact_columns || opt.exact_evolution)
    spec = build_protocol(Model::SpinGlass, n, 0, &inst);
  std::function<MatrixXcd(double)> hfn;
  VectorXcd ref;
  if (opt.exact_evolution) {
    if (n > 14) throw std::invalid_argument("anneal_mps: exact reference needs N <= 14");
    hfn = hamiltonian_fn(spec);
    ref = mps_to_dense(psi).amplitudes;
  }

  AnnealRecord rec;
  bool have_prev_vgs = false;
  auto record = [&](double s) {
    Mpo mpo = spin_glass_mpo(inst, s);
    AnnealSample smp;
    smp.s = s;
    smp.entropy = mps_entropy(psi, n / 2 - 1);
    smp.energy = mps_energy(mpo, psi);
    if (opt.vgs_dmrg) {
      MpsState prev = vgs;
      auto res = dmrg(mpo, vgs, D);
      vgs = res.state;
      Complex ov = overlap(vgs, psi);
      smp.delta_vgs = std::sqrt(std::max(0.0, 2.0 - 2.0 * std::abs(ov)));
      if (have_prev_vgs)
        smp.vgs_jump = std::abs(overlap(prev, vgs)) < 0.9;
      have_prev_vgs = true;
    }
    if (opt.effective_gaps) {
      MpsState centered = opt.vgs_dmrg ? vgs : psi;
      move_center_to(centered, n / 2);
      smp.eff_gap = effective_gap(mpo, centered);
      rec.min_eff_gap = std::min(rec.min_eff_gap, smp.eff_gap);
    }
    if (opt.exact_columns) {
      DenseOperator H = hamiltonian_at(spec, s);
      auto gs = ground_state(H);
      smp.delta_exact =
          phase_aligned_distance(mps_to_dense(psi).amplitudes, gs.state.amplitudes);
      smp.exact_gap = spectral_gap(H);
    }
    if (opt.exact_evolution)
      smp.delta_evolved =
          phase_aligned_distance(mps_to_dense(psi).amplitudes, ref);
    rec.samples.push_back(smp);
  };
  // RK4 advance of the dense reference across one physical step, substepped
  // so the reference error stays far below the TDVP splitting error.
  auto advance_ref = [&](double t0, double dt_step) {
    int m = std::max(1, static_cast<int>(std::ceil(dt_step / 5e-4)));
    double dh = dt_step / m;
    for (int k = 0; k < m; ++k) {
      double t = t0 + k * dh;
      auto rhs = [&](double tt, const VectorXcd& v) -> VectorXcd {
        MatrixXcd H = hfn(std::min(1.0, tt / T));
        Complex e = v.dot(H * v);
        return Complex(0, -1) * (H * v - e * v);
      };
      VectorXcd k1 = rhs(t, ref);
      VectorXcd k2 = rhs(t + dh / 2, ref + 0.5 * dh * k1);
      VectorXcd k3 = rhs(t + dh / 2, ref + 0.5 * dh * k2);
      VectorXcd k4 = rhs(t + dh, ref + dh * k3);
      ref += dh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      ref.normalize();
    }
  };
  record(0.0);
  for (long long step = 0; step < nsteps; ++step) {
    double smid = (static_cast<double>(step) + 0.5) * h / T;
    tdvp_step(spin_glass_mpo(inst, smid), psi, h);
    if (opt.exact_evolution) advance_ref(static_cast<double>(step) * h, h);
    if ((step + 1) % record_every == 0 || step + 1 == nsteps)
      record(static_cast<double>(step + 1) * h / T);
  }
  rec.final_state = std::move(psi);
  return rec;
}

/// Indices of the classical ground manifold (exhaustive enumeration).
inline std::vector<Eigen::Index> classical_ground_manifold(
    const SpinGlassInstance& inst, double tol = 1e-12) {
  Eigen::Index dim = 1;
  for (int i = 0; i < inst.N; ++i) dim *= 2;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> e(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    e[k] = inst.basis_energy(k);
    best = std::min(best, e[k]);
  }
  std::vector<Eigen::Index> out;
  for (Eigen::Index k = 0; k < dim; ++k)
    if (e[k] - best <= tol) out.push_back(k);
  return out;
}

/// sqrt(sum of squared overlaps) with the classical ground manifold.
inline double ground_manifold_overlap(const SpinGlassInstance& inst,
                                      const MpsState& psi) {
  StateVector v = mps_to_dense(psi);
  double acc = 0.0;
  for (Eigen::Index k : classical_ground_manifold(inst))
    acc += std::norm(v.amplitudes(k));
  return std::sqrt(acc) / v.norm();
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

inline void save_mps(const MpsState& psi, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_mps: cannot open " + path);
  const char magic[8] = {'V', 'A', 'T', 'M', 'P', 'S', '1', '\n'};
  f.write(magic, 8);
  std::int64_t hdr[3] = {psi.length(), psi.center, psi.D_max};
  f.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
  for (const auto& A : psi.sites) {
    std::int64_t sh[2] = {A[0].rows(), A[0].cols()};
    f.write(reinterpret_cast<const char*>(sh), sizeof(sh));
    for (int p = 0; p < 2; ++p)
      for (Eigen::Index i = 0; i < A[p].rows(); ++i)
        for (Eigen::Index j = 0; j < A[p].cols(); ++j) {
          double re = A[p](i, j).real(), im = A[p](i, j).imag();
          f.write(reinterpret_cast<const char*>(&re), sizeof(double));
          f.write(reinterpret_cast<const char*>(&im), sizeof(double));
        }
  }
  if (!f) throw std::runtime_error("save_mps: write failed for " + path);
}

inline MpsState load_mps(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_mps: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::string(magic, 8) != "VATMPS1\n")
    throw std::runtime_error("load_mps: bad header in " + path);
  std::int64_t hdr[3];
  f.read(reinterpret_cast<char*>(hdr), sizeof(hdr));
  MpsState psi;
  psi.center = static_cast<int>(hdr[1]);
  psi.D_max = static_cast<int>(hdr[2]);
  psi.sites.resize(hdr[0]);
  for (auto& A : psi.sites) {
    std::int64_t sh[2];
    f.read(reinterpret_cast<char*>(sh), sizeof(sh));
    for (int p = 0; p < 2; ++p) {
      A[p].resize(sh[0], sh[1]);
      for (Eigen::Index i = 0; i < sh[0]; ++i)
        for (Eigen::Index j = 0; j < sh[1]; ++j) {
          double re, im;
          f.read(reinterpret_cast<char*>(&re), sizeof(double));
          f.read(reinterpret_cast<char*>(&im), sizeof(double));
          A[p](i, j) = Complex(re, im);
        }
    }
  }
  if (!f) throw std::runtime_error("load_mps: truncated file " + path);
  return psi;
}

}  // namespace vat
