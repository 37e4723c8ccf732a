#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

#include "becmet/tf_analytics.hpp"

using namespace becmet;

namespace {
const Species kRb = rb87();
TrapGeometry typical(int d, Hardness h) { return typical_trap(d, h, kRb.mass()); }

double J_quadrature(double l, int d, int q) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(
      [&](double u) { return std::pow(u, d - 1) * std::pow(1.0 - std::pow(u, q), l); }, 0.0, 1.0);
}
}  // namespace

TEST(JIntegral, FormsAgree) {
  for (int d : {1, 2, 3}) {
    for (int q : {1, 2, 4, 10}) {
      const Hardness h = Hardness::power(q);
      EXPECT_NEAR(J_integral(0.0, d, h), 1.0 / d, 1e-15);
      for (double l : {0.0, 0.5, 1.0, 2.0, 3.0}) {
        const double j = J_integral(l, d, h);
        EXPECT_NEAR(j, J_quadrature(l, d, q), 1e-10) << d << " " << q << " " << l;
        if (l == std::floor(l)) {
          EXPECT_NEAR(j, J_factorial(static_cast<int>(l), d, h), 1e-12 * j);
        } else {
          EXPECT_NEAR(j, J_reflection(l, d, h), 1e-12 * j);
        }
        if (q == 2) EXPECT_NEAR(j, J_harmonic(l, d), 1e-12 * j);
      }
    }
  }
}

TEST(JIntegral, KnownValues) {
  EXPECT_NEAR(J_integral(1.0, 1, Hardness::power(2)), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(J_integral(2.0, 1, Hardness::power(2)), 8.0 / 15.0, 1e-15);
  EXPECT_NEAR(J_harmonic(2.0, 1), 8.0 / 15.0, 1e-15);
  EXPECT_NEAR(J_integral(2.5, 2, Hardness::hard_wall()), 0.5, 1e-15);
  EXPECT_NEAR(J_integral(2.0, 2, Hardness::power(1000000)), 0.5, 1e-5);
  EXPECT_THROW(J_integral(-1.0, 1, Hardness::power(2)), DomainError);
  EXPECT_THROW(J_reflection(2.0, 1, Hardness::power(2)), DomainError);
}

TEST(JIntegral, RatioIdentity) {
  for (int d : {1, 2, 3}) {
    for (int q : {1, 2, 4, 10}) {
      const Hardness h = Hardness::power(q);
      for (double x : {0.0, 1.0, double(d) / q}) {
        for (int l : {1, 2}) {
          EXPECT_NEAR(J_integral(x + l, d, h) / J_integral(x, d, h), J_ratio_product(x, l, d, h), 1e-12);
        }
      }
    }
  }
}

TEST(IIntegral, NormalizationAndEtaL) {
  for (int d : {1, 2, 3}) {
    for (Hardness h : {Hardness::power(1), Hardness::power(2), Hardness::power(6), Hardness::hard_wall()}) {
      const auto g = typical(d, h);
      const double n = 1.0 + 300.0 * (critical_numbers(g, kRb.a11()).n_lower - 1.0);
      EXPECT_NEAR(I_integral(1.0, n, g, kRb.a11()), 1.0, 1e-12);
      EXPECT_NEAR(I_integral(2.0, n, g, kRb.a11()) / eta_L_closed_form(g, kRb.a11(), n), 1.0, 1e-12);
      // Ratio recursion: I_3/I_2 over I_2/I_1 equals J_3 J_1 / J_2^2.
      const auto tf = intermediate_tf(g, kRb.a11(), n);
      const double lhs = (I_integral(3.0, tf) / I_integral(2.0, tf)) / (I_integral(2.0, tf) / I_integral(1.0, tf));
      const double rhs = J_integral(3, d, h) * J_integral(1, d, h) / std::pow(J_integral(2, d, h), 2);
      EXPECT_NEAR(lhs, rhs, 1e-12);
    }
  }
}

TEST(IIntegral, ChemicalPotentialMatchesTrapEdge) {
  for (int q : {1, 2, 5}) {
    const auto g = typical(1, Hardness::power(q));
    const double n = 5000.0;
    const auto prof = tf_profile(g, kRb, n, Regime::intermediate);
    EXPECT_NEAR(prof.mu / (0.5 * g.k() * std::pow(prof.r_tilde, q)), 1.0, 1e-12);
  }
}

TEST(Profile, RadiusRatioAndEtaExample) {
  const auto g = typical(1, Hardness::power(2));
  const double a = kRb.a11();
  const double nl = critical_numbers(g, a).n_lower;
  const double n = 1.0 + 1000.0 * (nl - 1.0);
  const auto prof = tf_profile(g, kRb, n, Regime::intermediate);
  EXPECT_NEAR(prof.r_tilde / longitudinal_radius(g, a, n), std::pow(1.5, 1.0 / 3.0), 1e-12);
  EXPECT_NEAR(prof.eta_L / eta_longitudinal_bare(g), 0.8 * std::pow(1.5, 2.0 / 3.0) * 0.1, 1e-12);
  EXPECT_NEAR(prof.eta_N, prof.eta_T * prof.eta_L, 1e-12 * prof.eta_N);
  EXPECT_TRUE(prof.warnings.empty());
}

TEST(Profile, WeakInteractionWarns) {
  const Species weak(kRb.mass(), 1e-15, 1e-15, 1e-15);
  const auto g = typical(1, Hardness::power(2));
  EXPECT_FALSE(tf_profile(g, weak, 100.0, Regime::intermediate).warnings.empty());
  EXPECT_THROW(tf_profile(g, kRb, 1.0, Regime::intermediate), DomainError);
  EXPECT_THROW(tf_profile(g, kRb, 100.0, Regime::bare), DomainError);
}

TEST(KIntegral, NormalizationAndPrefactor) {
  for (int d : {1, 2}) {
    for (Hardness h : {Hardness::power(1), Hardness::power(2), Hardness::power(4), Hardness::hard_wall()}) {
      const auto g = typical(d, h);
      const double a = kRb.a11();
      const double n = 50.0 * *critical_numbers(g, a).n_upper;
      const auto tf = full_tf(g, a, n);
      EXPECT_NEAR(K_integral(1.0, tf), 1.0, 1e-12);
      EXPECT_NEAR(K_integral(2.0, tf) / tf.mu_over_ng, K2_prefactor(d, h), 1e-12);
    }
  }
  EXPECT_NEAR(K2_prefactor(1, Hardness::power(2)), 4.0 / 7.0, 1e-15);
  EXPECT_THROW(full_tf(typical(3, Hardness::power(2)), 1e-8, 1e6), DomainError);
}

TEST(KIntegral, HarmonicIsotropicLimit) {
  // 3D harmonic TF: eta = (15/(14 pi)) / R^3 for the inverted-parabola density; here
  // K_2 / (mu/((N-1)g)) = 4/7 independently of the trap split.
  boost::math::quadrature::tanh_sinh<double> integrator;
  const double num = integrator.integrate([](double r) { return r * r * std::pow(1 - r * r, 2); }, 0.0, 1.0);
  const double den = integrator.integrate([](double r) { return r * r * (1 - r * r); }, 0.0, 1.0);
  EXPECT_NEAR(num / den, 4.0 / 7.0, 1e-12);
}

TEST(KIntegral, RadiusAndEtaExponents) {
  const auto g = typical(1, Hardness::power(2));
  const double a = kRb.a11();
  const double nt = *critical_numbers(g, a).n_upper;
  const double n1 = 1.0 + 10.0 * (nt - 1.0), n2 = 1.0 + 80.0 * (nt - 1.0);
  const auto t1 = full_tf(g, a, n1), t2 = full_tf(g, a, n2);
  EXPECT_NEAR(std::log(t2.rho_tilde / t1.rho_tilde) / std::log(8.0), 0.2, 1e-12);
  const double slope = std::log(K_integral(2.0, t2) / K_integral(2.0, t1)) / std::log(8.0);
  EXPECT_NEAR(slope, -3.0 / 5.0, 1e-12);
  // The transverse radius tracks the order-of-magnitude estimate up to an O(1) constant.
  EXPECT_NEAR(t1.rho_tilde / radii_full(g, a, n1).rho_N, t2.rho_tilde / radii_full(g, a, n2).rho_N, 1e-12);
}

TEST(Phase, OmegaTauProduct) {
  EXPECT_NEAR(omega_tau_product(1, Hardness::power(10)), std::sqrt(62.0), 1e-14);
  EXPECT_NEAR(omega_tau_product(1, Hardness::power(10)), 7.87, 0.005);
  EXPECT_NEAR(omega_tau_product(1, Hardness::power(2)), std::sqrt(14.0), 1e-14);
  EXPECT_TRUE(std::isinf(omega_tau_product(2, Hardness::hard_wall())));
  boost::math::quadrature::tanh_sinh<double> integrator;
  for (int d : {1, 2, 3}) {
    for (int q : {1, 2, 4, 10}) {
      const auto g = typical(d, Hardness::power(q));
      const auto tf = intermediate_tf(g, kRb.a11(), 1e4);
      EXPECT_NEAR(omega_tau_from_moments(tf), omega_tau_product(d, Hardness::power(q)), 1e-9);
      // Direct quadrature of the TF density in units of the TF radius.
      const double S = d * unit_ball_volume(d);
      auto q0 = [&](double u) { return 1.0 - std::pow(u, q); };
      const double norm = S * integrator.integrate([&](double u) { return std::pow(u, d - 1) * q0(u); }, 0.0, 1.0);
      const double eta = S * integrator.integrate([&](double u) { return std::pow(u, d - 1) * q0(u) * q0(u); }, 0.0, 1.0) / (norm * norm);
      const double m = S * integrator.integrate([&](double u) {
        const double p = q0(u) / norm;
        return std::pow(u, d - 1) * p * (p - eta) * (p - eta);
      }, 0.0, 1.0);
      EXPECT_NEAR(eta / std::sqrt(m), omega_tau_product(d, Hardness::power(q)), 1e-6);
    }
  }
}

TEST(Phase, DeltaGAndOmega) {
  EXPECT_NEAR(delta_g(kRb, Superposition::equal()), josephson_couplings(kRb).gamma1, 1e-66);
  const Species s(kRb.mass(), 5e-9, 4.5e-9, 4.6e-9);
  const auto jc = josephson_couplings(s);
  const auto sup = Superposition::from_polar(1.1);
  EXPECT_NEAR(delta_g(s, sup), jc.gamma1 + (sup.c1() * sup.c1() - sup.c2() * sup.c2()) * jc.gamma2,
              1e-12 * std::abs(jc.gamma1));
  for (int d : {1, 2}) {
    for (Hardness h : {Hardness::power(2), Hardness::power(5), Hardness::hard_wall()}) {
      const auto g = typical(d, h);
      const double n = 1e4;
      const auto ph = phase_dynamics(g, kRb, n, Superposition::equal());
      EXPECT_NEAR(ph.omega_N / omega_N_closed_form(g, kRb, n, Superposition::equal()), 1.0, 1e-12);
      if (!h.is_hard_wall()) EXPECT_NEAR(ph.omega_N * ph.tau_pd, omega_tau_product(d, h), 1e-12);
    }
  }
  const auto sym = phase_dynamics(typical(1, Hardness::power(2)), typical_species(), 1000.0, Superposition::equal());
  EXPECT_EQ(sym.omega_N, 0.0);
  EXPECT_TRUE(std::isnan(sym.tau_pd));
}

TEST(Phase, RubidiumOmegaMagnitude) {
  // 1D harmonic, (N-1)/(N_L-1) = 1000: about 0.11 rad/s.
  const auto g = typical(1, Hardness::power(2));
  const double n = 1.0 + 1000.0 * (critical_numbers(g, kRb.a11()).n_lower - 1.0);
  EXPECT_NEAR(phase_dynamics(g, kRb, n, Superposition::equal()).omega_N, 0.111, 0.002);
}

TEST(Overlap, GaussianForm) {
  const PhaseDynamics p{2.0, 0.5, 1.0};
  EXPECT_NEAR(std::abs(overlap_gaussian(p, 0.0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(overlap_gaussian(p, 0.5)), std::exp(-0.5), 1e-15);
  for (double t : {0.1, 0.3, 0.7}) EXPECT_NEAR(std::arg(overlap_gaussian(p, t)), -2.0 * t, 1e-14);
  EXPECT_THROW(overlap_gaussian(p, -1.0), DomainError);
}

TEST(Fringe, Probabilities) {
  const auto eq = Superposition::equal();
  auto f = fringe_probabilities(eq, {1.0, 0.0});
  EXPECT_NEAR(f.p1, 0.5, 1e-15);
  f = fringe_probabilities(eq, {0.0, -1.0});
  EXPECT_NEAR(f.p1, 1.0, 1e-15);
  EXPECT_NEAR(f.p2, 0.0, 1e-15);
  f = fringe_probabilities(Superposition(1.0, 0.0), {0.3, -0.8});
  EXPECT_DOUBLE_EQ(f.p1, 0.5);
  f = fringe_probabilities(Superposition::from_polar(0.4), {0.2, 0.6});
  EXPECT_DOUBLE_EQ(f.p1 + f.p2, 1.0);
  EXPECT_THROW(fringe_probabilities(eq, {1.0, 0.1}), DomainError);
  double best = 0.0, best_theta = 0.0;
  for (int i = 1; i < 100; ++i) {
    const double th = std::numbers::pi * i / 100;
    const auto s = Superposition::from_polar(th);
    if (2 * s.c1() * s.c2() > best) best = 2 * s.c1() * s.c2(), best_theta = th;
  }
  EXPECT_NEAR(best_theta, std::numbers::pi / 2, 1e-12);
}
