#pragma once

// Variational dynamics on the two-parameter product / mean-field manifolds:
// manifold geometry (g, omega, complex structure), closed-form equations of
// motion, instantaneous variational ground states and Bloch observables.
//
// Bloch-angle convention per model: the local ansatz is
//   |psi> = cos(theta/2)|0> + sin(theta/2) e^{i c phi} |1>
// with c = +1 for TwoQubit/Bipartite and c = -1 for Lmg. These are the
// conventions under which the closed-form equations of motion below agree
// with the generic tangent-space projection of -iH|psi> (the sign of phi is
// a pure relabeling; all phi-even observables are convention independent).

#include "vat/core.hpp"
#include "vat/models.hpp"

#include <optional>

namespace vat {

constexpr double kPoleGuard = 1e-8;

struct ProductState {
  Model model = Model::Lmg;
  int N = 1;       // sites for Lmg; extra levels for Bipartite; 2 for TwoQubit
  double theta = M_PI / 2;
  double phi = 0.0;
};

inline int phi_convention(Model m) {
  return (m == Model::Lmg) ? -1 : +1;
}

/// Angle difference wrapped to (-pi, pi].
inline double wrap_angle(double d) {
  d = std::fmod(d, 2.0 * M_PI);
  if (d > M_PI) d -= 2.0 * M_PI;
  if (d <= -M_PI) d += 2.0 * M_PI;
  return d;
}

/// Single-site (or single-subsystem) state of the ansatz.
inline VectorXcd local_state(const ProductState& x, int local_dim = 2) {
  VectorXcd v = VectorXcd::Zero(local_dim);
  double c = phi_convention(x.model);
  v(0) = std::cos(x.theta / 2);
  v(1) = std::sin(x.theta / 2) * std::exp(Complex(0.0, c * x.phi));
  return v;
}

/// Embedding into the full Hilbert space of the owning model.
inline StateVector embed(const ProductState& x) {
  StateVector out;
  switch (x.model) {
    case Model::TwoQubit: {
      VectorXcd p = local_state(x);
      out.amplitudes = kron(p, p);
      out.local_dims = {2, 2};
      break;
    }
    case Model::Bipartite: {
      VectorXcd p = local_state(x, x.N + 2);
      out.amplitudes = kron(p, p);
      out.local_dims = {x.N + 2, x.N + 2};
      break;
    }
    case Model::Lmg: {
      VectorXcd p = local_state(x);
      VectorXcd acc = VectorXcd::Ones(1);
      for (int k = 0; k < x.N; ++k) acc = kron(acc, p);
      out.amplitudes = acc;
      out.local_dims.assign(x.N, 2);
      break;
    }
    default:
      throw std::invalid_argument("embed: not a product-manifold model");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

struct ManifoldGeometry {
  Eigen::Matrix2d g;      // metric
  Eigen::Matrix2d omega;  // symplectic form
  Eigen::Matrix2d J;      // complex-structure candidate -g^{-1} omega
};

/// Metric, symplectic form and complex structure at x. For n effective
/// sites (n = 2 for TwoQubit/Bipartite, n = N for Lmg):
///   g = (n/2) diag(1, sin^2 theta),  omega = (n/2) [[0, c sin],[ -c sin, 0]]
/// with c the phi sign convention. J = -g^{-1} omega squares to -identity.
inline ManifoldGeometry geometry(const ProductState& x) {
  double st = std::sin(x.theta);
  if (std::abs(st) <= kPoleGuard)
    throw std::runtime_error("geometry: coordinate pole at sin(theta)=0");
  int n = (x.model == Model::Lmg) ? x.N : 2;
  double c = phi_convention(x.model);
  ManifoldGeometry out;
  out.g << 1.0, 0.0, 0.0, st * st;
  out.g *= 0.5 * n;
  out.omega << 0.0, c * st, -c * st, 0.0;
  out.omega *= 0.5 * n;
  out.J = -out.g.inverse() * out.omega;
  return out;
}

// ---------------------------------------------------------------------------
// Equations of motion (physical-time rates; multiply by T for d/ds)
// ---------------------------------------------------------------------------

struct Rates {
  double dtheta = 0.0;
  double dphi = 0.0;
};

/// Closed-form flow, physical-time rates. A is the catalyst strength
/// (ignored by Lmg); the longitudinal field of the target enters as -4s.
inline Rates eom_rhs(const ProductState& x, double s, double A = 0.0) {
  if (s < 0.0 || s > 1.0) throw std::invalid_argument("eom_rhs: s outside [0,1]");
  double st = std::sin(x.theta), ct = std::cos(x.theta);
  if (std::abs(st) <= kPoleGuard)
    throw std::runtime_error("eom_rhs: coordinate pole at sin(theta)=0");
  double sp = std::sin(x.phi), cp = std::cos(x.phi);
  Rates r;
  switch (x.model) {
    case Model::TwoQubit:
    case Model::Bipartite:
      r.dtheta = -2.0 * (s - 1.0) * sp * (A * s * st * cp + 1.0);
      r.dphi = s * ct *
                   (-A * (s - 1.0) * std::cos(2.0 * x.phi) + A * (s - 1.0) + 2.0) -
               4.0 * s - 2.0 * (s - 1.0) * (ct / st) * cp;
      break;
    case Model::Lmg: {
      double n = x.N;
      r.dtheta = 2.0 * (s - 1.0) * sp;
      r.dphi = 2.0 * ct * (2.0 * (n - 1.0) * s / n + (s - 1.0) * cp / st);
      break;
    }
    default:
      throw std::invalid_argument("eom_rhs: not a product-manifold model");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Variational energy and ground states
// ---------------------------------------------------------------------------

/// Mean-field energy for the LMG report:
///   E^VS = -n(1-s) sin cos phi + s ((1-n) cos^2 - 1).
inline double lmg_variational_energy(int N, double s, double theta, double phi) {
  double n = N;
  return -n * (1.0 - s) * std::sin(theta) * std::cos(phi) +
         s * ((1.0 - n) * std::cos(theta) * std::cos(theta) - 1.0);
}

struct BlochVector {
  double Sx = 0.0, Sy = 0.0, Sz = 0.0;
};

/// Bloch components of the local state; for Lmg (e^{-i phi} convention)
/// Sy = -sin(theta) sin(phi).
inline BlochVector bloch(const ProductState& x) {
  double c = phi_convention(x.model);
  BlochVector b;
  b.Sx = std::sin(x.theta) * std::cos(x.phi);
  b.Sy = c * std::sin(x.theta) * std::sin(x.phi);
  b.Sz = std::cos(x.theta);
  return b;
}

/// Mean-field critical point s* = n / (3n - 2).
inline double lmg_critical_s(int N) { return double(N) / (3.0 * N - 2.0); }

struct VgsResult {
  ProductState x;
  double energy = 0.0;
  double grad_norm = 0.0;
  bool converged = true;
};

namespace detail {

inline Eigen::Vector2d energy_gradient(Model model, int N, double A, double s,
                                       double theta, double phi) {
  double st = std::sin(theta), ct = std::cos(theta);
  double sp = std::sin(phi), cp = std::cos(phi);
  Eigen::Vector2d g;
  if (model == Model::Lmg) {
    double n = N;
    g(0) = -n * (1.0 - s) * ct * cp + 2.0 * s * (n - 1.0) * ct * st;
    g(1) = n * (1.0 - s) * st * sp;
  } else {
    // Gradient of variational_energy_pm; ov = |a00 + a11|^2 of the ansatz.
    double c2 = std::cos(theta / 2), s2 = std::sin(theta / 2);
    double dov_dth = 2.0 * std::pow(c2, 3) * (-s2) + 2.0 * std::pow(s2, 3) * c2 +
                     2.0 * c2 * s2 * (c2 * c2 - s2 * s2) * std::cos(2.0 * phi);
    double dov_dph = -4.0 * c2 * c2 * s2 * s2 * std::sin(2.0 * phi);
    g(0) = (1.0 - s) * (-2.0 * ct * cp) + s * (-2.0 * ct * st + 4.0 * st) +
           s * (1.0 - s) * (-A) * dov_dth;
    g(1) = (1.0 - s) * (2.0 * st * sp) + s * (1.0 - s) * (-A) * dov_dph;
  }
  return g;
}

}  // namespace detail

/// Variational energy of the product-manifold models (TwoQubit/Bipartite
/// share one expression; they differ only in embedding dimension).
inline double variational_energy_pm(Model model, int N, double A, double s,
                                    double theta, double phi) {
  if (model == Model::Lmg) {
    double n = N;
    return -n * (1.0 - s) * std::sin(theta) * std::cos(phi) +
           s * (-1.0 - (n - 1.0) * std::pow(std::cos(theta), 2));
  }
  double st = std::sin(theta), ct = std::cos(theta), cp = std::cos(phi);
  double c2 = std::cos(theta / 2), s2 = std::sin(theta / 2);
  double ov = std::pow(c2, 4) + std::pow(s2, 4) +
              2.0 * c2 * c2 * s2 * s2 * std::cos(2.0 * phi);
  return (1.0 - s) * (-2.0 * st * cp) + s * (ct * ct - 4.0 * ct) +
         s * (1.0 - s) * (-A) * ov;
}

/// Instantaneous variational ground state. Lmg uses the closed forms
/// (paramagnetic branch for s < s*, the arcsin branch above); other models
/// run a warm-started damped Newton descent with gradient-norm stop 1e-10.
inline VgsResult variational_ground_state(Model model, int N, double A,
                                          double s, const ProductState& guess) {
  VgsResult res;
  res.x = guess;
  res.x.model = model;
  res.x.N = N;
  if (model == Model::Lmg) {
    double sc = lmg_critical_s(N);
    if (s <= sc) {
      res.x.theta = M_PI / 2;
      res.x.phi = 0.0;
    } else {
      double n = N;
      double a = (n - n * s) / (2.0 * s - 2.0 * n * s);
      res.x.theta = std::asin(a) + M_PI;
      res.x.phi = 0.0;
    }
    res.energy = variational_energy_pm(model, N, A, s, res.x.theta, res.x.phi);
    res.grad_norm =
        detail::energy_gradient(model, N, A, s, res.x.theta, res.x.phi).norm();
    return res;
  }
  double th = guess.theta, ph = guess.phi;
  const int budget = 500;
  double E = variational_energy_pm(model, N, A, s, th, ph);
  for (int it = 0; it < budget; ++it) {
    Eigen::Vector2d g = detail::energy_gradient(model, N, A, s, th, ph);
    if (g.norm() < 1e-12) {
      res.x.theta = th;
      res.x.phi = ph;
      res.energy = E;
      res.grad_norm = g.norm();
      return res;
    }
    // Hessian by central differences of the analytic gradient.
    const double hstep = 1e-6;
    Eigen::Matrix2d H;
    Eigen::Vector2d gp, gm;
    gp = detail::energy_gradient(model, N, A, s, th + hstep, ph);
    gm = detail::energy_gradient(model, N, A, s, th - hstep, ph);
    H.col(0) = (gp - gm) / (2 * hstep);
    gp = detail::energy_gradient(model, N, A, s, th, ph + hstep);
    gm = detail::energy_gradient(model, N, A, s, th, ph - hstep);
    H.col(1) = (gp - gm) / (2 * hstep);
    H = 0.5 * (H + H.transpose()).eval();
    // modified Newton: clamp curvature away from zero so flat or concave
    // directions get a bounded gradient step
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(H);
    Eigen::Vector2d lam = es.eigenvalues().cwiseMax(1e-6);
    Eigen::Vector2d step =
        -(es.eigenvectors() * lam.cwiseInverse().asDiagonal() *
          es.eigenvectors().transpose() * g);
    if (step.norm() > 0.5) step *= 0.5 / step.norm();
    double scale = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 50; ++bt) {
      double thn = th + scale * step(0), phn = ph + scale * step(1);
      double En = variational_energy_pm(model, N, A, s, thn, phn);
      // near the minimum energy differences underflow; accept tiny Newton
      // steps on equal energy so the gradient itself keeps contracting
      bool tiny = scale * step.norm() < 1e-6;
      if (En < E || (En == E && tiny)) {
        th = thn;
        ph = phn;
        E = En;
        moved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!moved) break;
  }
  Eigen::Vector2d g = detail::energy_gradient(model, N, A, s, th, ph);
  res.x.theta = th;
  res.x.phi = ph;
  res.energy = E;
  res.grad_norm = g.norm();
  res.converged = g.norm() < 1e-8;
  if (!res.converged)
    throw std::runtime_error(
        "variational_ground_state: descent stalled, |grad| = " +
        std::to_string(g.norm()));
  return res;
}

inline VgsResult variational_ground_state(Model model, int N, double A,
                                          double s) {
  return variational_ground_state(model, N, A, s,
                                  ProductState{model, N, M_PI / 2, 0.0});
}

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

struct ProductSample {
  double s = 0.0;
  double theta = 0.0;
  double phi = 0.0;
  BlochVector S;
  double energy = 0.0;
  double dist_vgs = 0.0;  // embedded distance to the variational ground state
};

struct ProductTrajectory {
  std::vector<ProductSample> samples;
  ProductState final_state;
};

struct IntegrateOptions {
  double dt = 0.01;       // physical step
  double record_ds = 0.01;
  bool record_vgs_distance = false;
  double catalyst = 0.0;
  double s_begin = 0.0;   // protocol window, physical time T*(s_end - s_begin)
  double s_end = 1.0;
};

/// Fixed-step RK4 in physical time of the closed-form flow. Records angles,
/// Bloch vector and energy on the requested s grid; aborts at a pole.
inline ProductTrajectory integrate(const ProductState& x0, double T,
                                   const IntegrateOptions& opt) {
  if (T <= 0 || opt.dt <= 0) throw std::invalid_argument("integrate: T, dt > 0");
  if (!(opt.s_begin >= 0.0 && opt.s_begin < opt.s_end && opt.s_end <= 1.0))
    throw std::invalid_argument("integrate: bad s window");
  double span = (opt.s_end - opt.s_begin) * T;
  long long nsteps = std::llround(span / opt.dt);
  if (nsteps < 1) throw std::invalid_argument("integrate: step exceeds horizon");
  double h = span / static_cast<double>(nsteps);
  long long record_every =
      std::max<long long>(1, std::llround(opt.record_ds * T / h));

  ProductState x = x0;
  ProductTrajectory traj;
  ProductState vgs_guess = x0;
  auto record = [&](double s) {
    ProductSample smp;
    smp.s = s;
    smp.theta = x.theta;
    smp.phi = x.phi;
    smp.S = bloch(x);
    smp.energy = variational_energy_pm(x.model, x.N, opt.catalyst, s, x.theta, x.phi);
    if (opt.record_vgs_distance) {
      auto vgs = variational_ground_state(x.model, x.N, opt.catalyst, s, vgs_guess);
      vgs_guess = vgs.x;
      smp.dist_vgs = phase_aligned_distance(embed(x), embed(vgs.x));
    }
    traj.samples.push_back(smp);
  };
  record(opt.s_begin);

  auto rhs = [&](double s, const ProductState& y) {
    return eom_rhs(y, s, opt.catalyst);
  };
  for (long long step = 0; step < nsteps; ++step) {
    double s0 = opt.s_begin + static_cast<double>(step) * h / T;
    double sh = opt.s_begin + (static_cast<double>(step) + 0.5) * h / T;
    double s1 = opt.s_begin + static_cast<double>(step + 1) * h / T;
    ProductState y = x;
    Rates k1 = rhs(s0, y);
    y.theta = x.theta + 0.5 * h * k1.dtheta; y.phi = x.phi + 0.5 * h * k1.dphi;
    Rates k2 = rhs(sh, y);
    y.theta = x.theta + 0.5 * h * k2.dtheta; y.phi = x.phi + 0.5 * h * k2.dphi;
    Rates k3 = rhs(sh, y);
    y.theta = x.theta + h * k3.dtheta; y.phi = x.phi + h * k3.dphi;
    Rates k4 = rhs(s1, y);
    x.theta += (h / 6.0) * (k1.dtheta + 2 * k2.dtheta + 2 * k3.dtheta + k4.dtheta);
    x.phi += (h / 6.0) * (k1.dphi + 2 * k2.dphi + 2 * k3.dphi + k4.dphi);
    if (std::abs(std::sin(x.theta)) <= kPoleGuard)
      throw std::runtime_error("integrate: trajectory hit the pole at s = " +
                               std::to_string(s1));
    if ((step + 1) % record_every == 0 || step + 1 == nsteps) record(s1);
  }
  traj.final_state = x;
  return traj;
}

// ---------------------------------------------------------------------------
// Generic tangent-space projection (test oracle for the closed forms)
// ---------------------------------------------------------------------------

/// dx_i/dt = -2 sum_j G_ij Re <V_j| i H |psi> with numerically constructed
/// (projected) tangent vectors. Used to validate eom_rhs; kept here so the
/// CLI can expose it for cross-checks.
inline Rates eom_rhs_generic(const ProductState& x, double s, double A) {
  ProtocolSpec spec = build_protocol(
      x.model, x.model == Model::TwoQubit ? 2 : x.N, A);
  MatrixXcd H = hamiltonian_at(spec, s).mat;
  const double eps = 1e-6;
  auto emb = [&](double th, double ph) {
    ProductState y = x;
    y.theta = th;
    y.phi = ph;
    return embed(y).amplitudes;
  };
  VectorXcd psi = emb(x.theta, x.phi);
  VectorXcd Vt = (emb(x.theta + eps, x.phi) - emb(x.theta - eps, x.phi)) / (2 * eps);
  VectorXcd Vp = (emb(x.theta, x.phi + eps) - emb(x.theta, x.phi - eps)) / (2 * eps);
  Vt -= psi * psi.dot(Vt);
  Vp -= psi * psi.dot(Vp);
  std::array<VectorXcd, 2> V = {Vt, Vp};
  Eigen::Matrix2d g;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) g(i, j) = 2.0 * std::real(V[i].dot(V[j]));
  Eigen::Matrix2d G = g.inverse();
  Eigen::Vector2d r;
  for (int i = 0; i < 2; ++i) {
    double acc = 0.0;
    for (int j = 0; j < 2; ++j)
      acc += G(i, j) * std::real(V[j].dot(Complex(0, 1) * (H * psi)));
    r(i) = -2.0 * acc;
  }
  return {r(0), r(1)};
}

}  // namespace vat
