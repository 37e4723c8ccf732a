#pragma once

// Physical constants, atomic species, trap geometry and the derived
// coupling constants shared by every other module. SI units throughout;
// the helpers in `units` convert quoted lab units at the boundary.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "becmet/errors.hpp"

namespace becmet {

struct PhysicalConstants {
  double hbar;              // J s
  double atomic_mass_unit;  // kg
};

/// CODATA 2018 values.
inline constexpr PhysicalConstants kSI{1.054571817e-34, 1.66053906660e-27};

namespace units {
inline constexpr double nm = 1e-9;
inline constexpr double um = 1e-6;
inline constexpr double cm3 = 1e-6;  // cm^3 expressed in m^3
inline constexpr double u = kSI.atomic_mass_unit;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
}  // namespace units

/// g = 4 pi hbar^2 a / m.
inline double coupling_constant(double a, double mass) {
  if (!(a > 0.0) || !(mass > 0.0)) {
    throw DomainError("coupling_constant: scattering length and mass must be positive");
  }
  return 4.0 * std::numbers::pi * kSI.hbar * kSI.hbar * a / mass;
}

class Species {
 public:
  /// Loss constants are volume rates in m^3/s.
  Species(double mass, double a11, double a22, double a12, double gamma12_loss = 0.0,
          double gamma22_loss = 0.0)
      : mass_(mass), a11_(a11), a22_(a22), a12_(a12), loss12_(gamma12_loss), loss22_(gamma22_loss) {
    if (!(mass > 0.0)) throw DomainError("Species: mass must be positive");
    if (!(a11 > 0.0) || !(a22 > 0.0) || !(a12 > 0.0)) {
      throw DomainError("Species: scattering lengths must be positive");
    }
    if (!(gamma12_loss >= 0.0) || !(gamma22_loss >= 0.0)) {
      throw DomainError("Species: loss constants must be non-negative");
    }
  }

  double mass() const { return mass_; }
  double a11() const { return a11_; }
  double a22() const { return a22_; }
  double a12() const { return a12_; }
  double gamma12_loss() const { return loss12_; }
  double gamma22_loss() const { return loss22_; }

  double g11() const { return coupling_constant(a11_, mass_); }
  double g22() const { return coupling_constant(a22_, mass_); }
  double g12() const { return coupling_constant(a12_, mass_); }

  /// g_{alpha beta} with 1-based state labels; symmetric in its arguments.
  double g(int alpha, int beta) const {
    if (alpha == 1 && beta == 1) return g11();
    if (alpha == 2 && beta == 2) return g22();
    if ((alpha == 1 && beta == 2) || (alpha == 2 && beta == 1)) return g12();
    throw DomainError("Species::g: state labels must be 1 or 2");
  }

 private:
  double mass_, a11_, a22_, a12_, loss12_, loss22_;
};

/// 87Rb in |F=1,M=-1> and |F=2,M=+1>: a22 : a12 : a11 = 0.97 : 1 : 1.03 with
/// a11 = 5.31 nm, and the measured spin-exchange loss constants.
inline Species rb87() {
  const double a11 = 5.31 * units::nm;
  const double a12 = a11 / 1.03;
  const double a22 = 0.97 * a12;
  return Species(86.909180527 * units::u, a11, a22, a12, 0.780e-13 * units::cm3,
                 1.194e-13 * units::cm3);
}

/// Generic estimate species: a = 10 nm in every channel, 87Rb mass, no loss.
inline Species typical_species() {
  const double a = 10.0 * units::nm;
  return Species(86.909180527 * units::u, a, a, a);
}

struct JosephsonCouplings {
  double gamma1;  // (g11 - g22) / 2
  double gamma2;  // (g11 + g22) / 2 - g12
};

inline JosephsonCouplings josephson_couplings(const Species& s) {
  const double g11 = s.g11();
  const double g22 = s.g22();
  const double g12 = s.g12();
  return {0.5 * (g11 - g22), 0.5 * (g11 + g22) - g12};
}

/// Longitudinal trap hardness: V_L = k r^q / 2, or the hard-wall limit
/// q -> infinity taken at fixed r0.
class Hardness {
 public:
  static Hardness power(int q) {
    if (q < 1) throw DomainError("Hardness: exponent q must be a positive integer");
    return Hardness(q);
  }
  static Hardness hard_wall() { return Hardness(0); }

  bool is_hard_wall() const { return q_ == 0; }
  int q() const {
    if (is_hard_wall()) throw DomainError("Hardness: hard wall has no finite exponent");
    return q_;
  }
  /// 1/q, zero for the hard wall.
  double inverse() const { return is_hard_wall() ? 0.0 : 1.0 / q_; }
  std::string label() const { return is_hard_wall() ? "inf" : std::to_string(q_); }

  friend bool operator==(Hardness, Hardness) = default;

 private:
  explicit Hardness(int q) : q_(q) {}
  int q_;
};

class TrapGeometry {
 public:
  int d() const { return d_; }
  int D() const { return 3 - d_; }
  Hardness hardness() const { return hardness_; }
  /// J / m^q; zero for the hard wall.
  double k() const { return k_; }
  double omega_T() const { return omega_T_; }
  double omega_L() const { return omega_L_; }
  double rho0() const { return rho0_; }
  double r0() const { return r0_; }
  double mass() const { return mass_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  friend TrapGeometry trap_from_lengths(int d, Hardness hardness, double rho0, double r0,
                                        double mass);
  friend TrapGeometry trap_from_strengths(int d, Hardness hardness, double k, double omega_T,
                                          double mass);

 private:
  TrapGeometry() = default;
  void finish() {
    omega_L_ = kSI.hbar / (mass_ * r0_ * r0_);
    if (!(r0_ > rho0_)) {
      warnings_.push_back("r0 does not exceed rho0; longitudinal/transverse separation is invalid");
    }
  }

  int d_ = 1;
  Hardness hardness_ = Hardness::power(2);
  double k_ = 0.0, omega_T_ = 0.0, omega_L_ = 0.0, rho0_ = 0.0, r0_ = 0.0, mass_ = 0.0;
  std::vector<std::string> warnings_;
};

inline void check_dimension(int d) {
  if (d < 1 || d > 3) throw DomainError("trap dimension d must be 1, 2 or 3");
}

/// rho0^2 = hbar / (2 m omega_T), r0^{q+2} = hbar^2 / (m k), omega_L = hbar / (m r0^2).
inline TrapGeometry trap_from_lengths(int d, Hardness hardness, double rho0, double r0,
                                      double mass) {
  check_dimension(d);
  if (!(rho0 > 0.0) || !(r0 > 0.0) || !(mass > 0.0)) {
    throw DomainError("trap_from_lengths: lengths and mass must be positive");
  }
  TrapGeometry g;
  g.d_ = d;
  g.hardness_ = hardness;
  g.rho0_ = rho0;
  g.r0_ = r0;
  g.mass_ = mass;
  g.omega_T_ = kSI.hbar / (2.0 * mass * rho0 * rho0);
  g.k_ = hardness.is_hard_wall()
             ? 0.0
             : kSI.hbar * kSI.hbar / (mass * std::pow(r0, hardness.q() + 2));
  g.finish();
  return g;
}

inline TrapGeometry trap_from_strengths(int d, Hardness hardness, double k, double omega_T,
                                        double mass) {
  check_dimension(d);
  if (hardness.is_hard_wall()) {
    throw DomainError("trap_from_strengths: a hard wall is specified by r0, not k");
  }
  if (!(k > 0.0) || !(omega_T > 0.0) || !(mass > 0.0)) {
    throw DomainError("trap_from_strengths: k, omega_T and mass must be positive");
  }
  TrapGeometry g;
  g.d_ = d;
  g.hardness_ = hardness;
  g.k_ = k;
  g.omega_T_ = omega_T;
  g.mass_ = mass;
  g.rho0_ = std::sqrt(kSI.hbar / (2.0 * mass * omega_T));
  g.r0_ = std::pow(kSI.hbar * kSI.hbar / (mass * k), 1.0 / (hardness.q() + 2));
  g.finish();
  return g;
}

/// The typical estimate lengths: rho0 = 1 um, r0 = 100 um.
inline TrapGeometry typical_trap(int d, Hardness hardness, double mass) {
  return trap_from_lengths(d, hardness, 1.0 * units::um, 100.0 * units::um, mass);
}

/// Single-atom amplitudes c1|1> + c2|2>, real.
class Superposition {
 public:
  Superposition(double c1, double c2) : c1_(c1), c2_(c2) {
    if (std::abs(c1 * c1 + c2 * c2 - 1.0) > 1e-12) {
      throw DomainError("Superposition: c1^2 + c2^2 must equal 1");
    }
  }
  static Superposition equal() { return {std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0}; }
  /// cos(theta/2)|1> + sin(theta/2)|2>, theta the Bloch polar angle.
  static Superposition from_polar(double theta) {
    return {std::cos(0.5 * theta), std::sin(0.5 * theta)};
  }

  double c1() const { return c1_; }
  double c2() const { return c2_; }

 private:
  double c1_, c2_;
};

}  // namespace becmet
