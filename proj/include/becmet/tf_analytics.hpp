#pragma once

// Thomas-Fermi closed forms: the radial integrals J_l(d, q) over (1 - u^q)^l,
// the density moments I_l (intermediate regime) and K_l (full regime), the
// resulting profiles, and the phase dynamics of a two-mode condensate whose
// modes differ only through their scattering lengths.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "becmet/errors.hpp"
#include "becmet/physical_config.hpp"
#include "becmet/trap_scaling.hpp"

namespace becmet {

namespace detail {

/// J_l with x = d/q: Gamma(l+1) Gamma(x+1) / (d Gamma(x+l+1)). Using
/// Gamma(d/q)/q = Gamma(d/q+1)/d keeps the hard wall (x = 0) finite: J = 1/d.
inline double j_gamma(double l, double d, double x) {
  return std::exp(std::lgamma(l + 1.0) + std::lgamma(x + 1.0) - std::lgamma(x + l + 1.0)) / d;
}

inline void require_l(double l) {
  if (!(l > -1.0)) throw DomainError("J_integral: requires l > -1");
}

}  // namespace detail

/// J_l(d, q) = int_0^1 u^{d-1} (1 - u^q)^l du for real l > -1.
inline double J_integral(double l, int d, Hardness q) {
  detail::require_l(l);
  if (d < 1) throw DomainError("J_integral: d must be positive");
  return detail::j_gamma(l, d, d * q.inverse());
}

/// Factorial form for nonnegative integer l: l! q^l / (d (d+q) ... (d+lq)).
inline double J_factorial(int l, int d, Hardness q) {
  if (l < 0) throw DomainError("J_factorial: l must be a nonnegative integer");
  if (q.is_hard_wall()) return 1.0 / d;
  const double qq = q.q();
  double value = 1.0 / d;
  for (int i = 1; i <= l; ++i) value *= i * qq / (d + i * qq);
  return value;
}

/// Harmonic (q = 2) form Gamma(d/2) Gamma(l+1) / (2 Gamma(d/2+l+1)).
inline double J_harmonic(double l, int d) {
  detail::require_l(l);
  return 0.5 * std::exp(std::lgamma(0.5 * d) + std::lgamma(l + 1.0) - std::lgamma(0.5 * d + l + 1.0));
}

/// Reflection form -pi / (sin(l pi) Gamma(-l)) * Gamma(d/q) / (q Gamma(d/q+l+1)),
/// singular at integer l where the factorial form applies.
inline double J_reflection(double l, int d, Hardness q) {
  detail::require_l(l);
  if (q.is_hard_wall()) throw DomainError("J_reflection: finite q required");
  if (std::abs(l - std::round(l)) < 1e-12) {
    throw DomainError("J_reflection: singular at integer l");
  }
  const double qq = q.q();
  const double x = d / qq;
  return -std::numbers::pi / (std::sin(l * std::numbers::pi) * std::tgamma(-l)) * std::tgamma(x) /
         (qq * std::tgamma(x + l + 1.0));
}

/// Right side of the ratio recursion J_{x+l}/J_x for integer l >= 0.
inline double J_ratio_product(double x, int l, int d, Hardness q) {
  const double s = d * q.inverse();
  double r = 1.0;
  for (int i = 1; i <= l; ++i) r *= (x + i) / (s + x + i);
  return r;
}

/// Intermediate-regime scale A = mu_L / ((N-1) g eta_T) = ((d+q)/q) / (V_d r~^d), m^-d.
struct IntermediateTF {
  double r_tilde;  // TF radius
  double scale;    // A
  int d;
  Hardness q;
};

inline IntermediateTF intermediate_tf(const TrapGeometry& geom, double a, double n_atoms) {
  detail::require_atoms_real(n_atoms);
  if (!(n_atoms > 1.0)) throw DomainError("Thomas-Fermi profile needs N > 1");
  const int d = geom.d();
  const Hardness h = geom.hardness();
  const auto c = critical_numbers(geom, a);
  const double ratio = (n_atoms - 1.0) / (c.n_lower - 1.0);
  const double dq = 1.0 + d * h.inverse();  // (d+q)/q
  const double r_tilde = geom.r0() * std::pow(dq * ratio, detail::radius_exponent(d, h));
  return {r_tilde, dq / (unit_ball_volume(d) * std::pow(r_tilde, d)), d, h};
}

/// I_l = int d^d r |phi_N|^{2l} = A^l r~^d S_{d-1} J_l(d, q); I_1 = 1.
inline double I_integral(double l, const IntermediateTF& tf) {
  const double S = tf.d * unit_ball_volume(tf.d);
  return std::pow(tf.scale, l) * std::pow(tf.r_tilde, tf.d) * S * J_integral(l, tf.d, tf.q);
}

inline double I_integral(double l, double n_atoms, const TrapGeometry& geom, double a) {
  return I_integral(l, intermediate_tf(geom, a, n_atoms));
}

/// eta_L = I_2 in closed form: (2q/(d+2q)) ((d+q)/q)^{q/(d+q)} ((N_L-1)/(N-1))^{d/(d+q)} / (V_d r0^d).
inline double eta_L_closed_form(const TrapGeometry& geom, double a, double n_atoms) {
  const int d = geom.d();
  const Hardness h = geom.hardness();
  const auto c = critical_numbers(geom, a);
  const double base = eta_longitudinal_bare(geom);
  if (h.is_hard_wall()) return base;
  const double q = h.q();
  return base * (2.0 * q / (d + 2.0 * q)) * std::pow((d + q) / q, q / (d + q)) *
         std::pow((c.n_lower - 1.0) / (n_atoms - 1.0), d / (d + q));
}

/// Full-regime density |psi|^2 = (mu_N - m w_T^2 rho^2/2 - k r^q/2) / ((N-1) g).
struct FullTF {
  double rho_tilde;
  double r_tilde;
  double mu;          // mu_N
  double mu_over_ng;  // mu_N / ((N-1) g), m^-3
  double c_factor;    // (m w_T^2 / k)^{d/q}
  int d;
  Hardness q;
};

namespace detail {
/// (m w_T^2 / k)^{d/q} = (r0^{q+2} / (4 rho0^4))^{d/q}; r0^d for the hard wall.
inline double transverse_longitudinal_factor(const TrapGeometry& geom) {
  const int d = geom.d();
  const double x = d * geom.hardness().inverse();
  return std::exp(d * std::log(geom.r0()) +
                  x * (2.0 * std::log(geom.r0()) - std::log(4.0 * std::pow(geom.rho0(), 4))));
}

inline double k_shape(double l, int d, Hardness q) {
  const int D = 3 - d;
  const double x = d * q.inverse();
  return D * unit_ball_volume(D) * d * unit_ball_volume(d) * J_integral(l + x, D, Hardness::power(2)) *
         J_integral(l, d, q);
}
}  // namespace detail

/// Solves K_1 = 1 for rho~_N with mu_N = m w_T^2 rho~^2 / 2.
inline FullTF full_tf(const TrapGeometry& geom, double a, double n_atoms) {
  if (geom.d() == 3) throw DomainError("full Thomas-Fermi regime: not applicable for d = 3");
  if (!(n_atoms > 1.0)) throw DomainError("Thomas-Fermi profile needs N > 1");
  const int d = geom.d();
  const Hardness h = geom.hardness();
  const double m = geom.mass();
  const double g = coupling_constant(a, m);
  const double w2 = geom.omega_T() * geom.omega_T();
  const double cf = detail::transverse_longitudinal_factor(geom);
  const double x = d * h.inverse();
  const double power = 5.0 - d + 2.0 * x;
  // K_1 = (m w^2 / (2 (N-1) g)) cf rho~^{power} S S J J = 1
  const double coeff = m * w2 / (2.0 * (n_atoms - 1.0) * g) * cf * detail::k_shape(1.0, d, h);
  const double rho_t = std::pow(coeff, -1.0 / power);
  const double mu = 0.5 * m * w2 * rho_t * rho_t;
  double r_t = geom.r0();
  if (!h.is_hard_wall()) r_t = std::pow(2.0 * mu / geom.k(), 1.0 / h.q());
  return {rho_t, r_t, mu, mu / ((n_atoms - 1.0) * g), cf, d, h};
}

/// K_l = (mu_N/((N-1)g))^l (m w_T^2/k)^{d/q} rho~^{D+2d/q} S_{D-1} S_{d-1} J_{l+d/q}(D,2) J_l(d,q).
inline double K_integral(double l, const FullTF& tf) {
  const int D = 3 - tf.d;
  const double x = tf.d * tf.q.inverse();
  return std::pow(tf.mu_over_ng, l) * tf.c_factor * std::pow(tf.rho_tilde, D + 2.0 * x) *
         detail::k_shape(l, tf.d, tf.q);
}

inline double K_integral(double l, double n_atoms, const TrapGeometry& geom, double a) {
  return K_integral(l, full_tf(geom, a, n_atoms));
}

/// K_2 / (mu_N / ((N-1) g)) = 2 / (D/2 + d/q + 2).
inline double K2_prefactor(int d, Hardness q) {
  return 2.0 / (0.5 * (3 - d) + d * q.inverse() + 2.0);
}

struct TFProfile {
  Regime regime;
  double mu;         // mu_L (intermediate) or mu_N (full), J
  double r_tilde;    // m
  double rho_tilde;  // m, full regime only (NaN otherwise)
  double eta_L;      // m^-d, intermediate only (NaN otherwise)
  double eta_T;      // m^-D, intermediate only (NaN otherwise)
  double eta_N;      // m^-3
  std::vector<std::string> warnings;
};

/// Ground-state TF profile of the condensate before the pulse (all atoms in |1>, g = g11).
inline TFProfile tf_profile(const TrapGeometry& geom, const Species& species, double n_atoms,
                            Regime regime) {
  if (!(n_atoms > 1.0)) throw DomainError("tf_profile: needs N > 1");
  const double a = species.a11();
  const auto cls = classify(geom, a, n_atoms);
  TFProfile p{};
  p.regime = regime;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (cls.regime != regime || cls.near_boundary) {
    p.warnings.push_back("N = " + std::to_string(n_atoms) + " lies in the " + regime_name(cls.regime) +
                         " regime" + (cls.near_boundary ? " near a boundary" : "") +
                         "; Thomas-Fermi " + regime_name(regime) + " forms are marginal");
  }
  if (regime == Regime::intermediate) {
    const auto tf = intermediate_tf(geom, a, n_atoms);
    p.eta_T = eta_transverse(geom);
    p.eta_L = I_integral(2.0, tf);
    p.eta_N = p.eta_T * p.eta_L;
    p.mu = tf.scale * (n_atoms - 1.0) * species.g11() * p.eta_T;
    p.r_tilde = tf.r_tilde;
    p.rho_tilde = nan;
    return p;
  }
  if (regime == Regime::full) {
    const auto tf = full_tf(geom, a, n_atoms);
    p.mu = tf.mu;
    p.r_tilde = tf.r_tilde;
    p.rho_tilde = tf.rho_tilde;
    p.eta_L = nan;
    p.eta_T = nan;
    p.eta_N = K_integral(2.0, tf);
    return p;
  }
  throw DomainError("tf_profile: Thomas-Fermi forms need the intermediate or full regime");
}

struct PhaseDynamics {
  double omega_N;  // rad/s
  double tau_pd;   // s; infinite for the hard wall, NaN when omega_N = 0
  double delta_g;  // J m^3
};

/// Delta g = c1^2 (g11 - g12) - c2^2 (g22 - g12).
inline double delta_g(const Species& s, const Superposition& sup) {
  return sup.c1() * sup.c1() * (s.g11() - s.g12()) - sup.c2() * sup.c2() * (s.g22() - s.g12());
}

/// Omega_N tau_pd = sqrt(2 (d + 3q) / d); infinite for the hard wall.
inline double omega_tau_product(int d, Hardness q) {
  if (q.is_hard_wall()) return std::numeric_limits<double>::infinity();
  return std::sqrt(2.0 * (d + 3.0 * q.q()) / d);
}

/// Same product from the density moments: eta_L / sqrt(I_3 - 2 eta_L I_2 + eta_L^2 I_1).
inline double omega_tau_from_moments(const IntermediateTF& tf) {
  const double i1 = I_integral(1.0, tf), i2 = I_integral(2.0, tf), i3 = I_integral(3.0, tf);
  const double m = i3 - 2.0 * i2 * i2 + i2 * i2 * i1;
  if (!(m > 0.0)) return std::numeric_limits<double>::infinity();
  return i2 / std::sqrt(m);
}

/// Omega_N = (N-1) eta_N Delta g / hbar with the intermediate TF eta_N.
inline PhaseDynamics phase_dynamics(const TrapGeometry& geom, const Species& species,
                                    double n_atoms, const Superposition& sup) {
  const auto prof = tf_profile(geom, species, n_atoms, Regime::intermediate);
  PhaseDynamics p{};
  p.delta_g = delta_g(species, sup);
  p.omega_N = (n_atoms - 1.0) * prof.eta_N * p.delta_g / kSI.hbar;
  if (p.omega_N == 0.0) {
    p.tau_pd = std::numeric_limits<double>::quiet_NaN();
  } else {
    p.tau_pd = omega_tau_product(geom.d(), geom.hardness()) / std::abs(p.omega_N);
  }
  return p;
}

/// omega_L (Delta g / g11) (q/(d+2q)) ((d+q)/q (N-1)/(N_L-1))^{q/(d+q)}.
inline double omega_N_closed_form(const TrapGeometry& geom, const Species& species, double n_atoms,
                                  const Superposition& sup) {
  const int d = geom.d();
  const Hardness h = geom.hardness();
  const auto c = critical_numbers(geom, species.a11());
  const double ratio = (n_atoms - 1.0) / (c.n_lower - 1.0);
  const double dg = delta_g(species, sup) / species.g11();
  if (h.is_hard_wall()) return geom.omega_L() * dg * 0.5 * ratio;
  const double q = h.q();
  return geom.omega_L() * dg * (q / (d + 2.0 * q)) * std::pow((d + q) / q * ratio, q / (d + q));
}

/// exp(-i Omega_N t - t^2 / (2 tau_pd^2)).
inline std::complex<double> overlap_gaussian(const PhaseDynamics& p, double t) {
  if (t < 0.0) throw DomainError("overlap_gaussian: t must be non-negative");
  double decay = 0.0;
  if (std::isfinite(p.tau_pd)) decay = -0.5 * (t / p.tau_pd) * (t / p.tau_pd);
  return std::exp(std::complex<double>(decay, -p.omega_N * t));
}

struct FringeProbabilities {
  double p1;
  double p2;
};

/// p_{1,2} = (1 -+ 2 c1 c2 Im <psi_2|psi_1>) / 2.
inline FringeProbabilities fringe_probabilities(const Superposition& sup,
                                                std::complex<double> overlap) {
  if (std::abs(overlap) > 1.0 + 1e-9) throw DomainError("fringe_probabilities: |overlap| exceeds 1");
  const double v = 2.0 * sup.c1() * sup.c2() * overlap.imag();
  return {0.5 * (1.0 - v), 0.5 * (1.0 + v)};
}

}  // namespace becmet
