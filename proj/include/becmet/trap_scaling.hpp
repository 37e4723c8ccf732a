#pragma once

// Order-of-magnitude condensate scaling in a trap that is tight in D = 3 - d
// transverse dimensions and a power law r^q in d longitudinal ones: critical
// atom numbers, cloud radii, eta_N = int |psi|^4 and the exponent xi of
// delta_gamma ~ N^-xi. The "-1" in N - 1 is kept throughout.

#include <boost/rational.hpp>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "becmet/errors.hpp"
#include "becmet/physical_config.hpp"

namespace becmet {

struct GeometryFactors {
  double V_d;        // unit-ball volume
  double S_dminus1;  // unit-sphere area, d V_d
  double beta_d;     // V_d / (2 (4 pi)^((d-1)/2))
};

inline double unit_ball_volume(int d) {
  switch (d) {
    case 0: return 1.0;
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
  }
  throw DomainError("unit_ball_volume: dimension must be 0..3");
}

inline GeometryFactors geometry_factors(int d) {
  check_dimension(d);
  const double v = unit_ball_volume(d);
  return {v, d * v, v / (2.0 * std::pow(4.0 * std::numbers::pi, 0.5 * (d - 1)))};
}

struct CriticalNumbers {
  double n_lower;
  std::optional<double> n_upper;  // empty for d = 3
};

namespace detail {
/// d (q + 2) / q, or d for the hard wall.
inline double upper_exponent(int d, Hardness h) { return d * (1.0 + 2.0 * h.inverse()); }
/// 1 / (d + q), zero for the hard wall.
inline double radius_exponent(int d, Hardness h) {
  return h.is_hard_wall() ? 0.0 : 1.0 / (d + h.q());
}
inline void require_scattering_length(double a) {
  if (!(a > 0.0)) throw DomainError("scattering length must be positive");
}
inline void require_atoms_real(double n) {
  if (!(n >= 1.0)) throw DomainError("atom number must be at least 1");
}
}  // namespace detail

/// N_L - 1 = beta_d (r0/a)(rho0/r0)^D, N_T - 1 = beta_d (rho0/a)(r0/rho0)^{d(q+2)/q}.
inline CriticalNumbers critical_numbers(const TrapGeometry& geom, double a) {
  detail::require_scattering_length(a);
  const int d = geom.d();
  const double beta = geometry_factors(d).beta_d;
  const double rho0 = geom.rho0(), r0 = geom.r0();
  CriticalNumbers c{1.0 + beta * (r0 / a) * std::pow(rho0 / r0, geom.D()), std::nullopt};
  if (d < 3) {
    c.n_upper = 1.0 + beta * (rho0 / a) * std::pow(r0 / rho0, detail::upper_exponent(d, geom.hardness()));
  }
  return c;
}

/// r_N / r0 = ((N-1)/(N_L-1))^{1/(d+q)}; equals r0 for the hard wall.
inline double longitudinal_radius(const TrapGeometry& geom, double a, double n_atoms) {
  detail::require_atoms_real(n_atoms);
  const auto c = critical_numbers(geom, a);
  return geom.r0() * std::pow((n_atoms - 1.0) / (c.n_lower - 1.0),
                              detail::radius_exponent(geom.d(), geom.hardness()));
}

/// Same radius written against N_T: (r0/rho0)^{2/q} ((N-1)/(N_T-1))^{1/(d+q)}.
inline double longitudinal_radius_via_upper(const TrapGeometry& geom, double a, double n_atoms) {
  detail::require_atoms_real(n_atoms);
  const auto c = critical_numbers(geom, a);
  if (!c.n_upper) throw DomainError("longitudinal_radius_via_upper: no upper critical number for d = 3");
  return geom.r0() * std::pow(geom.r0() / geom.rho0(), 2.0 * geom.hardness().inverse()) *
         std::pow((n_atoms - 1.0) / (*c.n_upper - 1.0), detail::radius_exponent(geom.d(), geom.hardness()));
}

/// Longitudinal half-width at N = N_T.
inline double upper_radius(const TrapGeometry& geom, double a) {
  const auto c = critical_numbers(geom, a);
  if (!c.n_upper) throw DomainError("upper_radius: no upper critical number for d = 3");
  return longitudinal_radius(geom, a, *c.n_upper);
}

struct FullRadii {
  double r_N;
  double rho_N;
};

/// Exponent 5 - d + 2d/q of the transverse radius law.
inline double full_radius_power(int d, Hardness h) { return 5.0 - d + 2.0 * d * h.inverse(); }

/// Radii for N above N_T, where the cloud spreads in every direction.
inline FullRadii radii_full(const TrapGeometry& geom, double a, double n_atoms) {
  detail::require_atoms_real(n_atoms);
  const int d = geom.d(), D = geom.D();
  if (d == 3) throw DomainError("radii_full: not applicable for d = 3");
  const auto c = critical_numbers(geom, a);
  const Hardness h = geom.hardness();
  const double pref = 4.0 * std::pow(4.0 * std::numbers::pi, 0.5 * D) *
                      std::pow(2.0, 2.0 * d * h.inverse()) / unit_ball_volume(D);
  const double rho_ratio =
      std::pow(pref * (n_atoms - 1.0) / (*c.n_upper - 1.0), 1.0 / full_radius_power(d, h));
  const double r_ratio =
      std::pow(geom.r0() / (2.0 * geom.rho0()) * rho_ratio, 2.0 * h.inverse());
  return {geom.r0() * r_ratio, geom.rho0() * rho_ratio};
}

enum class Regime { bare, intermediate, full };

inline std::string regime_name(Regime r) {
  switch (r) {
    case Regime::bare: return "bare";
    case Regime::intermediate: return "intermediate";
    case Regime::full: return "full_TF";
  }
  return "?";
}

struct RegimeClassification {
  Regime regime;
  /// Within `band` of a boundary, where the asymptotic forms are marginal.
  bool near_boundary;
};

/// bare if N <= N_L, intermediate if N_L < N <= N_T, full otherwise.
inline RegimeClassification classify(const TrapGeometry& geom, double a, double n_atoms,
                                     double band = 10.0) {
  detail::require_atoms_real(n_atoms);
  const auto c = critical_numbers(geom, a);
  auto near = [&](double boundary) { return n_atoms < band * boundary && n_atoms > boundary / band; };
  bool marginal = near(c.n_lower);
  Regime r = Regime::bare;
  if (n_atoms > c.n_lower) r = Regime::intermediate;
  if (c.n_upper) {
    marginal = marginal || near(*c.n_upper);
    if (n_atoms > *c.n_upper) r = Regime::full;
  }
  return {r, marginal};
}

/// eta_T = (4 pi)^{-D/2} rho0^{-D}: Gaussian transverse ground state.
inline double eta_transverse(const TrapGeometry& geom) {
  return std::pow(4.0 * std::numbers::pi, -0.5 * geom.D()) * std::pow(geom.rho0(), -geom.D());
}

/// Bare longitudinal estimate 1 / (V_d r0^d).
inline double eta_longitudinal_bare(const TrapGeometry& geom) {
  return 1.0 / (unit_ball_volume(geom.d()) * std::pow(geom.r0(), geom.d()));
}

/// Piecewise power-law eta_N in m^-3. The full-regime branch is anchored to
/// the intermediate value at N_T so eta is continuous.
inline double eta_estimate(const TrapGeometry& geom, double a, double n_atoms) {
  const auto cls = classify(geom, a, n_atoms);
  const auto c = critical_numbers(geom, a);
  const int d = geom.d();
  const Hardness h = geom.hardness();
  const double eta0 = eta_transverse(geom) * eta_longitudinal_bare(geom);
  const double int_exp = h.is_hard_wall() ? 0.0 : static_cast<double>(d) / (d + h.q());
  auto intermediate = [&](double n) { return eta0 * std::pow((c.n_lower - 1.0) / (n - 1.0), int_exp); };
  switch (cls.regime) {
    case Regime::bare: return eta0;
    case Regime::intermediate: return intermediate(n_atoms);
    case Regime::full: {
      const double p = full_radius_power(d, h);
      const double full_exp = (p - 2.0) / p;  // (3 - d + 2d/q) / (5 - d + 2d/q)
      return intermediate(*c.n_upper) * std::pow((*c.n_upper - 1.0) / (n_atoms - 1.0), full_exp);
    }
  }
  return eta0;
}

using Rational = boost::rational<std::int64_t>;

/// Sensitivity exponent xi, exact.
inline Rational scaling_exponent(int d, Hardness h, Regime regime) {
  check_dimension(d);
  const Rational three_halves(3, 2);
  switch (regime) {
    case Regime::bare: return three_halves;
    case Regime::intermediate: {
      if (h.is_hard_wall()) return three_halves;
      const std::int64_t q = h.q();
      return Rational(d + 3 * q, 2 * (d + q));
    }
    case Regime::full: {
      if (d == 3) throw DomainError("scaling_exponent: no full regime above N_T for d = 3");
      // (3 - d + 2d/q) / (5 - d + 2d/q) = ((3-d) q + 2d) / ((5-d) q + 2d).
      if (h.is_hard_wall()) return three_halves - Rational(3 - d, 5 - d);
      const std::int64_t q = h.q();
      return three_halves - Rational((3 - d) * q + 2 * d, (5 - d) * q + 2 * d);
    }
  }
  return three_halves;
}

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

struct Fig1Row {
  Hardness q;
  Rational xi_1d, xi_2d, xi_3d;
};

/// Intermediate-regime exponent versus hardness for d = 1, 2, 3.
inline std::vector<Fig1Row> fig1_table(const std::vector<Hardness>& q_values) {
  std::vector<Fig1Row> rows;
  rows.reserve(q_values.size());
  for (Hardness h : q_values) {
    rows.push_back({h, scaling_exponent(1, h, Regime::intermediate),
                    scaling_exponent(2, h, Regime::intermediate),
                    scaling_exponent(3, h, Regime::intermediate)});
  }
  return rows;
}

}  // namespace becmet
