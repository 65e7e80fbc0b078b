#pragma once

// Dense complex linear algebra for small Hilbert spaces: operator
// construction helpers, eigensolving, exact Schrodinger propagation,
// entanglement entropy and phase-robust state distances.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace vat {

using Complex = std::complex<double>;
using MatrixXcd = Eigen::MatrixXcd;
using VectorXcd = Eigen::VectorXcd;
using VectorXd = Eigen::VectorXd;
using Matrix2cd = Eigen::Matrix2cd;

constexpr double kHermitianTol = 1e-12;
constexpr double kDegeneracyTol = 1e-9;

/// Hermitian operator on a tensor-product Hilbert space.
struct DenseOperator {
  MatrixXcd mat;
  std::vector<int> local_dims;

  Eigen::Index dim() const { return mat.rows(); }

  double hermiticity_residual() const {
    return (mat - mat.adjoint()).cwiseAbs().maxCoeff();
  }
};

struct StateVector {
  VectorXcd amplitudes;
  std::vector<int> local_dims;

  Eigen::Index dim() const { return amplitudes.size(); }
  double norm() const { return amplitudes.norm(); }
};

inline long long product_of(const std::vector<int>& dims) {
  long long p = 1;
  for (int d : dims) p *= d;
  return p;
}

inline void check_hermitian(const DenseOperator& H, const char* where) {
  if (H.mat.rows() != H.mat.cols())
    throw std::invalid_argument(std::string(where) + ": operator not square");
  double r = H.hermiticity_residual();
  if (r > kHermitianTol)
    throw std::invalid_argument(std::string(where) +
                                ": operator not Hermitian, residual " +
                                std::to_string(r));
}

struct GroundState {
  double energy = 0.0;
  StateVector state;
  int degeneracy = 1;
};

namespace detail {

// Lanczos with full reorthogonalization for the extremal (lowest) part of
// the spectrum of a Hermitian operator given as a matvec.
struct LanczosResult {
  VectorXd ritz_values;
  MatrixXcd ritz_vectors;  // columns
  bool converged = false;
  double residual = 0.0;
};

inline LanczosResult lanczos_lowest(
    const std::function<VectorXcd(const VectorXcd&)>& apply, Eigen::Index dim,
    int nev, double tol, int max_iter, const VectorXcd& start) {
  LanczosResult out;
  int m = std::min<Eigen::Index>(max_iter, dim);
  std::vector<VectorXcd> basis;
  std::vector<double> alpha, beta;
  VectorXcd v = start;
  if (v.norm() < 1e-14) v = VectorXcd::Ones(dim);
  v.normalize();
  basis.push_back(v);
  VectorXcd w;
  for (int k = 0; k < m; ++k) {
    w = apply(basis[k]);
    double a = std::real(basis[k].dot(w));
    alpha.push_back(a);
    w -= a * basis[k];
    if (k > 0) w -= beta[k - 1] * basis[k - 1];
    for (const auto& q : basis) w -= q.dot(w) * q;  // full reorth
    double b = w.norm();

    int kk = k + 1;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(kk, kk);
    for (int i = 0; i < kk; ++i) {
      T(i, i) = alpha[i];
      if (i > 0) T(i, i - 1) = T(i - 1, i) = beta[i - 1];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    int have = std::min(nev, kk);
    double resid = 0.0;
    for (int j = 0; j < have; ++j) resid = std::max(resid, b * std::abs(es.eigenvectors()(kk - 1, j)));
    if ((kk >= nev && resid < tol) || b < 1e-14 || k == m - 1) {
      out.ritz_values = es.eigenvalues().head(have);
      out.ritz_vectors = MatrixXcd::Zero(dim, have);
      for (int j = 0; j < have; ++j)
        for (int i = 0; i < kk; ++i)
          out.ritz_vectors.col(j) += es.eigenvectors()(i, j) * basis[i];
      out.converged = resid < tol || b < 1e-14;
      out.residual = resid;
      return out;
    }
    beta.push_back(b);
    basis.push_back(w / b);
  }
  return out;  // unreachable
}

}  // namespace detail

constexpr Eigen::Index kDenseEigLimit = 4096;

/// Lowest eigenpair plus ground-manifold degeneracy count.
inline GroundState ground_state(const DenseOperator& H) {
  check_hermitian(H, "ground_state");
  if (H.dim() > (1 << 14))
    throw std::invalid_argument("ground_state: dimension exceeds 2^14");
  GroundState g;
  if (H.dim() <= kDenseEigLimit) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H.mat);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("ground_state: dense eigensolver failed");
    g.energy = es.eigenvalues()(0);
    g.state.amplitudes = es.eigenvectors().col(0);
    g.state.local_dims = H.local_dims;
    g.degeneracy = 0;
    for (Eigen::Index k = 0; k < H.dim(); ++k)
      if (es.eigenvalues()(k) - g.energy < kDegeneracyTol) ++g.degeneracy;
  } else {
    auto apply = [&](const VectorXcd& x) { return VectorXcd(H.mat * x); };
    auto lr = detail::lanczos_lowest(apply, H.dim(), 4, 1e-10, 400,
                                     VectorXcd::Random(H.dim()));
    if (!lr.converged)
      throw std::runtime_error(
          "ground_state: Lanczos did not converge, residual " +
          std::to_string(lr.residual));
    g.energy = lr.ritz_values(0);
    g.state.amplitudes = lr.ritz_vectors.col(0);
    g.state.local_dims = H.local_dims;
    g.degeneracy = 0;
    for (Eigen::Index k = 0; k < lr.ritz_values.size(); ++k)
      if (lr.ritz_values(k) - g.energy < kDegeneracyTol) ++g.degeneracy;
  }
  g.state.amplitudes.normalize();
  return g;
}

/// Gap to the first level strictly above the (possibly degenerate) ground
/// manifold.
inline double spectral_gap(const DenseOperator& H) {
  check_hermitian(H, "spectral_gap");
  VectorXd evals;
  if (H.dim() <= kDenseEigLimit) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H.mat, Eigen::EigenvaluesOnly);
    evals = es.eigenvalues();
  } else {
    auto apply = [&](const VectorXcd& x) { return VectorXcd(H.mat * x); };
    auto lr = detail::lanczos_lowest(apply, H.dim(), 8, 1e-10, 500,
                                     VectorXcd::Random(H.dim()));
    if (!lr.converged)
      throw std::runtime_error("spectral_gap: Lanczos did not converge");
    evals = lr.ritz_values;
  }
  double e0 = evals(0);
  for (Eigen::Index k = 1; k < evals.size(); ++k)
    if (evals(k) - e0 > kDegeneracyTol) return evals(k) - e0;
  throw std::runtime_error("spectral_gap: flat spectrum");
}

/// min over a global phase of ||a - e^{i alpha} b||_2 = sqrt(2 - 2|<a|b>|).
inline double phase_aligned_distance(const StateVector& a,
                                     const StateVector& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("phase_aligned_distance: dimension mismatch");
  double ov = std::abs(a.amplitudes.dot(b.amplitudes));
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * ov));
}

inline double phase_aligned_distance(const VectorXcd& a, const VectorXcd& b) {
  double ov = std::abs(a.dot(b));
  return std::sqrt(std::max(0.0, 2.0 - 2.0 * ov));
}

/// Von Neumann entropy (natural log) across a left/right split with the
/// first `dim_a` basis labels on the left.
inline double entanglement_entropy_dims(const StateVector& psi,
                                        Eigen::Index dim_a) {
  Eigen::Index dim = psi.dim();
  if (dim_a <= 0 || dim % dim_a != 0)
    throw std::invalid_argument("entanglement_entropy: cut does not factorize");
  Eigen::Index dim_b = dim / dim_a;
  // Site 0 is the most significant label; row-major reshape.
  Eigen::Map<const Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      M(psi.amplitudes.data(), dim_a, dim_b);
  Eigen::JacobiSVD<MatrixXcd> svd(M);
  double S = 0.0;
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
    double p = svd.singularValues()(k);
    p *= p;
    if (p > 1e-14) S -= p * std::log(p);
  }
  return S;
}

/// Entropy for a cut after the first `sites_left` sites of the declared
/// local dimensions.
inline double entanglement_entropy(const StateVector& psi, int sites_left) {
  if (psi.local_dims.empty())
    throw std::invalid_argument("entanglement_entropy: no local dimensions");
  if (sites_left <= 0 || sites_left >= static_cast<int>(psi.local_dims.size()))
    throw std::invalid_argument("entanglement_entropy: cut out of range");
  long long da = 1;
  for (int i = 0; i < sites_left; ++i) da *= psi.local_dims[i];
  return entanglement_entropy_dims(psi, da);
}

// ---------------------------------------------------------------------------
// Exact propagation
// ---------------------------------------------------------------------------

struct TrajectorySample {
  double s = 0.0;
  double energy = 0.0;
  double norm_drift = 0.0;
  VectorXcd state;  // filled only when states are kept
};

struct Trajectory {
  std::vector<double> grid;
  std::vector<TrajectorySample> samples;
  VectorXcd final_state;
};

/// Exact RK4 propagation of d/ds |psi> = -i T H(s) |psi>, fixed physical
/// step dt. H(s) is supplied as a callback so any protocol can be evolved.
/// The instantaneous mean energy is subtracted inside the stepper; this is
/// a pure global-phase gauge.
inline Trajectory evolve_exact(
    const std::function<MatrixXcd(double)>& hamiltonian_at, double T,
    double dt, const StateVector& psi0, double record_ds = 0.01,
    bool keep_states = false) {
  if (T <= 0 || dt <= 0) throw std::invalid_argument("evolve_exact: T, dt > 0");
  if (dt >= T) throw std::invalid_argument("evolve_exact: step exceeds horizon");
  if (std::abs(psi0.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("evolve_exact: psi0 not normalized");

  long long nsteps = std::llround(T / dt);
  double h = T / static_cast<double>(nsteps);  // physical step
  VectorXcd psi = psi0.amplitudes;

  Trajectory traj;
  long long record_every =
      std::max<long long>(1, std::llround(record_ds * T / h));

  MatrixXcd H0m = hamiltonian_at(0.0), Hhm, H1m;
  auto record = [&](double s, const MatrixXcd& H) {
    TrajectorySample smp;
    smp.s = s;
    smp.energy = std::real(psi.dot(H * psi));
    smp.norm_drift = std::abs(psi.norm() - 1.0);
    if (keep_states) smp.state = psi;
    traj.grid.push_back(s);
    traj.samples.push_back(std::move(smp));
  };
  record(0.0, H0m);

  VectorXcd k1, k2, k3, k4;
  for (long long step = 0; step < nsteps; ++step) {
    double s0 = static_cast<double>(step) * h / T;
    double sh = (static_cast<double>(step) + 0.5) * h / T;
    double s1 = static_cast<double>(step + 1) * h / T;
    const MatrixXcd Ha = hamiltonian_at(s0);
    const MatrixXcd Hb = hamiltonian_at(sh);
    const MatrixXcd Hc = hamiltonian_at(s1);
    double E = std::real(psi.dot(Hb * psi));  // phase gauge
    const Complex mi(0.0, -1.0);
    k1 = mi * (Ha * psi - E * psi);
    k2 = mi * (Hb * (psi + 0.5 * h * k1) - E * (psi + 0.5 * h * k1));
    k3 = mi * (Hb * (psi + 0.5 * h * k2) - E * (psi + 0.5 * h * k2));
    k4 = mi * (Hc * (psi + h * k3) - E * (psi + h * k3));
    psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    psi.normalize();
    if ((step + 1) % record_every == 0 || step + 1 == nsteps)
      record(s1, Hc);
  }
  traj.final_state = psi;
  return traj;
}

}  // namespace vat
