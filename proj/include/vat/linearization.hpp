#pragma once

// Linear stability analysis of the variational flow around the instantaneous
// variational ground state: Jacobian of the physical-time vector field,
// biorthogonal eigensystem of iK, induced pseudo-metric, and the adiabatic
// error constant kappa.

#include "vat/core.hpp"
#include "vat/models.hpp"
#include "vat/product_tdvp.hpp"

namespace vat {

struct LinearizedMap {
  Eigen::Matrix2d K;        // Jacobian of the physical-time flow
  double fd_error = 0.0;    // Richardson estimate of the truncation error
  double drift_norm = 0.0;  // |X(x0)|, residual of the stationarity precheck
};

/// Jacobian of the closed-form flow at x0, central differences with
/// Richardson refinement. Warns through fd_error; throws only if x0 is
/// far from stationary (the linearization would be meaningless there).
inline LinearizedMap linearize(const ProductState& x0, double s, double A,
                               double stationarity_tol = 1e-5) {
  Rates r0 = eom_rhs(x0, s, A);
  LinearizedMap out;
  out.drift_norm = std::hypot(r0.dtheta, r0.dphi);
  if (out.drift_norm > stationarity_tol)
    throw std::runtime_error("linearize: base point is not stationary, |X| = " +
                             std::to_string(out.drift_norm));
  auto jac = [&](double h) {
    Eigen::Matrix2d K;
    for (int j = 0; j < 2; ++j) {
      ProductState xp = x0, xm = x0;
      (j == 0 ? xp.theta : xp.phi) += h;
      (j == 0 ? xm.theta : xm.phi) -= h;
      Rates rp = eom_rhs(xp, s, A), rm = eom_rhs(xm, s, A);
      K(0, j) = (rp.dtheta - rm.dtheta) / (2 * h);
      K(1, j) = (rp.dphi - rm.dphi) / (2 * h);
    }
    return K;
  };
  const double h = 1e-5;
  Eigen::Matrix2d Kh = jac(h), K2h = jac(2 * h);
  out.K = (4.0 * Kh - K2h) / 3.0;  // Richardson: cancels the h^2 term
  out.fd_error = (Kh - K2h).cwiseAbs().maxCoeff() / 3.0;
  return out;
}

struct BiorthogonalSpectrum {
  Eigen::Vector2d omega;          // eigenvalues of iK, ascending
  Eigen::Matrix2cd right;         // right eigenvectors, columns
  Eigen::Matrix2cd left;          // left duals, <left_i|right_j> = delta_ij
  double pair_residual = 0.0;     // |omega + reversed(omega)|, +/- pairing
  double realness_residual = 0.0; // max imaginary part of the eigenvalues
};

/// Eigensystem of iK. In the stable phase the eigenvalues are real and come
/// in +/- pairs; both properties are reported as residuals, not enforced.
inline BiorthogonalSpectrum biorthogonal_spectrum(const Eigen::Matrix2d& K) {
  Eigen::Matrix2cd iK = Complex(0, 1) * K.cast<Complex>();
  Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(iK);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("biorthogonal_spectrum: eigensolver failed");
  Eigen::Vector2cd ev = es.eigenvalues();
  Eigen::Matrix2cd R = es.eigenvectors();
  std::array<int, 2> order = {0, 1};
  if (ev(0).real() > ev(1).real()) order = {1, 0};
  BiorthogonalSpectrum out;
  for (int i = 0; i < 2; ++i) {
    out.omega(i) = ev(order[i]).real();
    out.right.col(i) = R.col(order[i]).normalized();
  }
  out.realness_residual = std::max(std::abs(ev(0).imag()), std::abs(ev(1).imag()));
  out.pair_residual = std::abs(out.omega(0) + out.omega(1));
  Eigen::Matrix2cd Rinv = out.right.inverse();
  out.left = Rinv.adjoint();  // columns dual to the right eigenvectors
  return out;
}

/// Pseudo-metric eta = sum_j |left_j><left_j| = (R^{-1})^dagger R^{-1}.
/// Positive definite whenever R is invertible; (iK)^dagger eta = eta (iK).
inline Eigen::Matrix2cd pseudo_metric(const BiorthogonalSpectrum& sp) {
  Eigen::Matrix2cd eta = sp.left * sp.left.adjoint();
  return 0.5 * (eta + eta.adjoint());
}

inline double pseudo_hermiticity_residual(const Eigen::Matrix2d& K,
                                          const Eigen::Matrix2cd& eta) {
  Eigen::Matrix2cd iK = Complex(0, 1) * K.cast<Complex>();
  return (iK.adjoint() * eta - eta * iK).cwiseAbs().maxCoeff();
}

inline double eta_norm(const Eigen::Matrix2cd& eta, const Eigen::Vector2d& v) {
  Eigen::Vector2cd vc = v.cast<Complex>();
  return std::sqrt(std::max(0.0, std::real(vc.dot(eta * vc))));
}

struct KappaSample {
  double s = 0.0;
  ProductState vgs;
  Eigen::Matrix2d K;
  Eigen::Vector2d omega;
  Eigen::Matrix2cd eta;
  double xdot_eta = 0.0;  // eta-norm of the adiabatic drive dx0/ds
};

struct KappaReport {
  std::vector<KappaSample> samples;
  double kappa = 0.0;
  double min_gap = 0.0;        // min over the grid of min_j |omega_j|
  double max_drive = 0.0;      // max over the grid of |dx0/ds|_eta
  double phase_factor = 1.0;   // max |exp(-i DeltaGamma)| over modes
  bool gapless = false;        // min gap below threshold, bound vacuous
};

namespace detail {

/// Reorder the spectrum at grid point k to maximize overlap with the
/// previous point, fixing also the eigenvector phase (gauge continuation).
inline void continue_gauge(const BiorthogonalSpectrum& prev,
                           BiorthogonalSpectrum& cur) {
  Eigen::Matrix2cd R = cur.right;
  Eigen::Vector2d w = cur.omega;
  double keep = std::abs(prev.right.col(0).dot(R.col(0))) +
                std::abs(prev.right.col(1).dot(R.col(1)));
  double swap = std::abs(prev.right.col(0).dot(R.col(1))) +
                std::abs(prev.right.col(1).dot(R.col(0)));
  if (swap > keep) {
    cur.right.col(0) = R.col(1);
    cur.right.col(1) = R.col(0);
    cur.omega(0) = w(1);
    cur.omega(1) = w(0);
  }
  for (int j = 0; j < 2; ++j) {
    Complex ov = prev.right.col(j).dot(cur.right.col(j));
    if (std::abs(ov) > 1e-12) cur.right.col(j) *= ov / std::abs(ov);
  }
  Eigen::Matrix2cd Rinv = cur.right.inverse();
  cur.left = Rinv.adjoint();
}

}  // namespace detail

struct KappaOptions {
  int grid_points = 201;
  double s_min = 0.0;
  double s_max = 1.0;
  double gap_threshold = 1e-6;
};

/// Adiabatic error constant along the variational ground-state path,
///   kappa = 2 max|exp(-i DeltaGamma)| max_s |dx0/ds|_eta / min_s min_j |omega_j|.
/// Gamma_j is the Berry-like phase of mode j accumulated along the path.
/// If the instantaneous spectrum closes (min gap below threshold) the
/// report is flagged gapless and kappa is set to infinity.
inline KappaReport kappa_bound(Model model, int N, double A,
                               const KappaOptions& opt = {}) {
  if (opt.grid_points < 3) throw std::invalid_argument("kappa_bound: grid too small");
  KappaReport rep;
  rep.samples.reserve(opt.grid_points);
  ProductState guess{model, (model == Model::TwoQubit) ? 2 : N, M_PI / 2, 0.0};
  double ds = (opt.s_max - opt.s_min) / (opt.grid_points - 1);

  std::vector<BiorthogonalSpectrum> spectra;
  for (int k = 0; k < opt.grid_points; ++k) {
    double s = opt.s_min + k * ds;
    auto vgs = variational_ground_state(model, guess.N, A, s, guess);
    guess = vgs.x;
    // Chart breakdown: the ground-state path may terminate at the
    // coordinate pole (e.g. full polarization at s = 1). Skip such points;
    // the supremum over the path is unaffected by a measure-zero endpoint.
    if (std::abs(std::sin(vgs.x.theta)) < 1e-4) continue;
    KappaSample smp;
    smp.s = s;
    smp.vgs = vgs.x;
    smp.K = linearize(vgs.x, s, A).K;
    spectra.push_back(biorthogonal_spectrum(smp.K));
    if (spectra.size() > 1)
      detail::continue_gauge(spectra[spectra.size() - 2], spectra.back());
    smp.omega = spectra.back().omega;
    smp.eta = pseudo_metric(spectra.back());
    rep.samples.push_back(smp);
  }
  int npts = static_cast<int>(rep.samples.size());
  if (npts < 3) throw std::runtime_error("kappa_bound: path left the chart");
  // Adiabatic drive dx0/ds by central differences of the VGS path.
  for (int k = 0; k < npts; ++k) {
    int km = std::max(0, k - 1), kp = std::min(npts - 1, k + 1);
    double hs = rep.samples[kp].s - rep.samples[km].s;
    Eigen::Vector2d dx;
    dx(0) = (rep.samples[kp].vgs.theta - rep.samples[km].vgs.theta) / hs;
    dx(1) = (rep.samples[kp].vgs.phi - rep.samples[km].vgs.phi) / hs;
    rep.samples[k].xdot_eta = eta_norm(rep.samples[k].eta, dx);
  }
  rep.min_gap = std::numeric_limits<double>::infinity();
  rep.max_drive = 0.0;
  for (const auto& smp : rep.samples) {
    rep.min_gap = std::min(rep.min_gap,
                           std::min(std::abs(smp.omega(0)), std::abs(smp.omega(1))));
    rep.max_drive = std::max(rep.max_drive, smp.xdot_eta);
  }
  // Gamma_j(s) = int_0^s i <left_j|d/du right_j> du is the biorthogonal
  // geometric phase; it is complex for a non-orthogonal eigenbasis, and its
  // imaginary part drives a real growth of the mode amplitude in the eta
  // norm. Discretized symmetrically; using the biorthonormality identity
  // <d left|right> = -<left|d right> the two halves agree in the continuum.
  std::array<Complex, 2> acc = {Complex(0, 0), Complex(0, 0)};
  // |exp(-i (Gamma_j(s) - Gamma_j(s')))| maximized over all pairs (s, s'):
  // with gamma_j = Re(-i Gamma_j) this is exp(max_s gamma_j - min_s gamma_j).
  std::array<double, 2> gamma_lo = {0.0, 0.0}, gamma_hi = {0.0, 0.0};
  for (int k = 0; k + 1 < npts; ++k) {
    for (int j = 0; j < 2; ++j) {
      Eigen::Vector2cd lj0 = spectra[k].left.col(j);
      Eigen::Vector2cd lj1 = spectra[k + 1].left.col(j);
      Eigen::Vector2cd rj0 = spectra[k].right.col(j);
      Eigen::Vector2cd rj1 = spectra[k + 1].right.col(j);
      Eigen::Vector2cd lm = 0.5 * (lj0 + lj1);
      Eigen::Vector2cd rm = 0.5 * (rj0 + rj1);
      acc[j] += Complex(0, 0.5) * (lm.dot(rj1 - rj0) - (lj1 - lj0).dot(rm));
      double gamma = (Complex(0, -1) * acc[j]).real();
      gamma_lo[j] = std::min(gamma_lo[j], gamma);
      gamma_hi[j] = std::max(gamma_hi[j], gamma);
    }
  }
  rep.phase_factor = std::exp(std::max(gamma_hi[0] - gamma_lo[0],
                                       gamma_hi[1] - gamma_lo[1]));
  if (rep.min_gap < opt.gap_threshold) {
    rep.gapless = true;
    rep.kappa = std::numeric_limits<double>::infinity();
  } else {
    rep.kappa = 2.0 * rep.phase_factor * rep.max_drive / rep.min_gap;
  }
  return rep;
}

}  // namespace vat
