#pragma once

// Sensitivity of collective-spin interferometers: analytic Ramsey and cat
// signals, simulated protocols with exact error propagation, quantum and
// classical Fisher information, and the Cramer-Rao family of bounds.
// hbar = 1 here: gamma is an angular frequency per unit of the generator.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "becmet/dicke.hpp"
#include "becmet/errors.hpp"

namespace becmet {

struct SensitivityResult {
  double delta_gamma;
  /// Exponent xi of delta_gamma ~ N^-xi when known, NaN otherwise.
  double scaling_exponent_estimate = std::numeric_limits<double>::quiet_NaN();
};

struct SignalPair {
  double mean;
  double variance;
};

namespace detail {
inline void require_positive_time(double t, const char* who) {
  if (!(t > 0.0)) throw DomainError(std::string(who) + ": time must be positive");
}
inline void require_atoms(int n, const char* who) {
  if (n < 1) throw DomainError(std::string(who) + ": need at least one atom");
}
}  // namespace detail

/// delta_gamma = 1/(t sqrt(N)).
inline SensitivityResult ramsey_uncertainty(int n_atoms, double t) {
  detail::require_atoms(n_atoms, "ramsey_uncertainty");
  detail::require_positive_time(t, "ramsey_uncertainty");
  return {1.0 / (t * std::sqrt(static_cast<double>(n_atoms))), 0.5};
}

/// <J_z> = N cos(phi)/2, <Delta^2 J_z> = N sin^2(phi)/4.
inline SignalPair ramsey_signal(int n_atoms, double phi) {
  const double s = std::sin(phi);
  return {0.5 * n_atoms * std::cos(phi), 0.25 * n_atoms * s * s};
}

/// delta_gamma = 1/(t N).
inline SensitivityResult cat_uncertainty(int n_atoms, double t) {
  detail::require_atoms(n_atoms, "cat_uncertainty");
  detail::require_positive_time(t, "cat_uncertainty");
  return {1.0 / (t * n_atoms), 1.0};
}

/// Fringe cos(N phi) with variance sin^2(N phi).
inline SignalPair cat_signal(int n_atoms, double phi) {
  const double s = std::sin(n_atoms * phi);
  return {std::cos(n_atoms * phi), s * s};
}

/// Quantum Fisher information of a pure state under K = t h: 4 t^2 <Delta^2 h>.
inline double qfi_pure(const DickeState& state, CollectiveHamiltonian generator, double t) {
  return 4.0 * t * t * generator_moments(state, generator).variance;
}

struct FisherEstimate {
  double value;
  /// Outcomes dropped because p fell below the floor while dp/dgamma did not vanish.
  std::size_t excluded_outcomes = 0;
};

/// Classical Fisher information sum_z (d_gamma p)^2 / p from a family of
/// outcome distributions. Central differences at step h and h/2 are combined
/// by one Richardson step.
inline FisherEstimate classical_fisher(
    const std::function<std::vector<double>(double)>& outcome_dist, double gamma, double step,
    double probability_floor = 1e-14) {
  if (!(step > 0.0)) throw DomainError("classical_fisher: step must be positive");
  const auto p0 = outcome_dist(gamma);
  const auto p_plus = outcome_dist(gamma + step);
  const auto p_minus = outcome_dist(gamma - step);
  const auto p_plus_half = outcome_dist(gamma + 0.5 * step);
  const auto p_minus_half = outcome_dist(gamma - 0.5 * step);
  const std::size_t n = p0.size();
  if (p_plus.size() != n || p_minus.size() != n || p_plus_half.size() != n ||
      p_minus_half.size() != n) {
    throw DomainError("classical_fisher: distributions must share one outcome space");
  }
  auto normalized = [](const std::vector<double>& p) {
    double s = 0.0;
    for (double v : p) {
      if (v < -1e-12) return false;
      s += v;
    }
    return std::abs(s - 1.0) < 1e-9;
  };
  if (!normalized(p0) || !normalized(p_plus) || !normalized(p_minus)) {
    throw DomainError("classical_fisher: outcome distribution is not normalized");
  }
  FisherEstimate out{0.0, 0};
  for (std::size_t z = 0; z < n; ++z) {
    const double coarse = (p_plus[z] - p_minus[z]) / (2.0 * step);
    const double fine = (p_plus_half[z] - p_minus_half[z]) / step;
    const double deriv = (4.0 * fine - coarse) / 3.0;
    if (p0[z] < probability_floor) {
      if (std::abs(deriv) > std::sqrt(probability_floor)) ++out.excluded_outcomes;
      continue;
    }
    out.value += deriv * deriv / p0[z];
  }
  return out;
}

/// Eigenvalue extremes of a single-unit coupling h_j, for k-body generators (sum h_j)^k.
struct SpectrumBound {
  double Lambda;
  double lambda;
  int k_body = 1;

  SpectrumBound(double largest, double smallest, int k = 1)
      : Lambda(largest), lambda(smallest), k_body(k) {
    if (largest < smallest) throw DomainError("SpectrumBound: Lambda must be >= lambda");
    if (k < 1) throw DomainError("SpectrumBound: k_body must be positive");
  }
  static SpectrumBound qubit(int k = 1) { return {0.5, -0.5, k}; }
};

struct LinearBounds {
  SensitivityResult heisenberg;     // 1/(t N (Lambda - lambda))
  SensitivityResult quantum_noise;  // 1/(t sqrt(N) (Lambda - lambda))
};

inline LinearBounds crb_linear(const SpectrumBound& bound, int n_atoms, double t) {
  detail::require_atoms(n_atoms, "crb_linear");
  detail::require_positive_time(t, "crb_linear");
  if (bound.k_body != 1) throw DomainError("crb_linear: requires k_body = 1");
  const double gap = bound.Lambda - bound.lambda;
  if (!(gap > 0.0)) throw DomainError("crb_linear: degenerate spectrum gives unbounded sensitivity");
  const double n = n_atoms;
  return {{1.0 / (t * n * gap), 1.0}, {1.0 / (t * std::sqrt(n) * gap), 0.5}};
}

struct NonlinearBound {
  double seminorm;                    // ||(sum h_j)^k||
  SensitivityResult bound;            // 1/(t ||.||)
  SensitivityResult product_scaling;  // t^-1 N^-(k - 1/2), prefactor-free reference
};

/// Seminorm of (sum_j h_j)^k: max minus min of s^k over s in [N lambda, N Lambda].
inline NonlinearBound crb_nonlinear(const SpectrumBound& bound, int n_atoms, double t) {
  detail::require_atoms(n_atoms, "crb_nonlinear");
  detail::require_positive_time(t, "crb_nonlinear");
  if (!(bound.Lambda > bound.lambda)) {
    throw DomainError("crb_nonlinear: degenerate spectrum gives unbounded sensitivity");
  }
  const double lo = n_atoms * bound.lambda;
  const double hi = n_atoms * bound.Lambda;
  const int k = bound.k_body;
  const double a = std::pow(lo, k);
  const double b = std::pow(hi, k);
  double vmax = std::max(a, b);
  double vmin = std::min(a, b);
  if (k % 2 == 0 && lo < 0.0 && hi > 0.0) vmin = 0.0;
  const double norm = vmax - vmin;
  const double kk = k;
  return {norm,
          {1.0 / (t * norm), kk},
          {1.0 / (t * std::pow(static_cast<double>(n_atoms), kk - 0.5)), kk - 0.5}};
}

/// Final readout: a pulse exp(-i angle J_axis) followed by counting J_z.
struct Readout {
  Axis axis = Axis::z;
  double angle = 0.0;

  /// Readout equivalent to measuring `component` before the pulse.
  static Readout of(Axis component) {
    switch (component) {
      case Axis::x: return {Axis::y, -std::numbers::pi / 2.0};
      case Axis::y: return {Axis::x, std::numbers::pi / 2.0};
      case Axis::z: return {Axis::z, 0.0};
    }
    return {};
  }
};

/// One evaluated protocol point.
struct ProtocolPoint {
  double t;
  double gamma;
  double signal;      // <J_z> after readout
  double variance;    // <Delta^2 J_z> after readout
  double slope;       // d<J_z>/dgamma
  std::optional<double> delta_gamma;  // empty where the slope vanishes
  double qfi;         // 4 t^2 <Delta^2 h> on the probe state
  double purity;      // single-atom purity before readout
};

namespace detail {
inline Amplitudes apply_generator(const DickeState& s, CollectiveHamiltonian kind) {
  Amplitudes out(s.amplitudes().begin(), s.amplitudes().end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] *= generator_eigenvalue(kind, s.n_atoms(), s.m(i));
  }
  return out;
}

inline std::optional<double> propagate_error(double variance, double slope, double scale) {
  if (std::abs(slope) <= 1e-13 * scale) return std::nullopt;
  return std::sqrt(variance) / std::abs(slope);
}
}  // namespace detail

/// prepare -> exp(-i gamma t h) -> readout -> count J_z, with the slope
/// d<J_z>/dgamma = 2 t Im <J_z R phi | R h phi> evaluated exactly on the
/// propagated state phi (h is diagonal, so it commutes with the evolution).
inline ProtocolPoint simulate_protocol(const DickeState& probe, CollectiveHamiltonian kind,
                                       double gamma, double t, Readout readout) {
  const DickeState evolved = evolve(probe, kind, gamma, t);
  const DickeState measured = rotate(evolved, readout.axis, readout.angle);
  const Moments jz = expectation(measured, Axis::z);

  const Amplitudes h_phi = detail::apply_generator(evolved, kind);
  const double h_norm = std::sqrt(detail::norm2(h_phi));
  double slope = 0.0;
  if (h_norm > 0.0) {
    Amplitudes unit(h_phi);
    for (auto& a : unit) a /= h_norm;
    const DickeState r_h_phi = rotate(DickeState(probe.n_atoms(), std::move(unit)), readout.axis,
                                      readout.angle);
    const Amplitudes jz_w = detail::apply_component(probe.n_atoms(), measured.amplitudes(), Axis::z);
    slope = 2.0 * t * h_norm * detail::inner(jz_w, r_h_phi.amplitudes()).imag();
  }
  ProtocolPoint p{};
  p.t = t;
  p.gamma = gamma;
  p.signal = jz.mean;
  p.variance = jz.variance;
  p.slope = slope;
  p.delta_gamma = detail::propagate_error(jz.variance, slope, t * probe.n_atoms() * probe.n_atoms());
  p.qfi = qfi_pure(probe, kind, t);
  p.purity = single_qubit_purity(evolved);
  return p;
}

/// Ramsey: equatorial product state, gamma J_z, readout of J_x (signal N cos(gamma t)/2).
inline ProtocolPoint simulate_ramsey(int n_atoms, double gamma, double t) {
  return simulate_protocol(prepare_product(n_atoms, Superposition::equal()),
                           CollectiveHamiltonian::linear_Jz, gamma, t, Readout::of(Axis::x));
}

/// N J_z coupling on the equatorial product state: a linear rotation at rate gamma N.
inline ProtocolPoint simulate_enhanced(int n_atoms, double gamma, double t) {
  return simulate_protocol(prepare_product(n_atoms, Superposition::equal()),
                           CollectiveHamiltonian::enhanced_NJz, gamma, t, Readout::of(Axis::x));
}

/// Cat-state interferometer. The single-qubit phase kick-back readout is not
/// representable on the symmetric subspace, so the fringe is read from the
/// collective coherence P = |N/2><-N/2| + h.c., whose mean cos(N gamma t) and
/// variance sin^2(N gamma t) equal the kicked-back qubit's sigma_z moments.
inline ProtocolPoint simulate_cat(int n_atoms, double gamma, double t) {
  const DickeState probe = cat_state(n_atoms);
  const DickeState evolved = evolve(probe, CollectiveHamiltonian::linear_Jz, gamma, t);
  const cplx top = evolved.amplitudes().back();
  const cplx bottom = evolved.amplitudes().front();
  const double mean = 2.0 * (std::conj(top) * bottom).real();
  const double second = std::norm(top) + std::norm(bottom);
  // d<P>/dgamma = 2 t Im <P phi | h phi>, h = J_z.
  const double j = 0.5 * n_atoms;
  const cplx p_top = bottom, p_bottom = top;  // P swaps the extreme amplitudes
  const double slope = 2.0 * t * (std::conj(p_top) * (j * top) + std::conj(p_bottom) * (-j * bottom)).imag();
  ProtocolPoint p{};
  p.t = t;
  p.gamma = gamma;
  p.signal = mean;
  p.variance = std::max(0.0, second - mean * mean);
  p.slope = slope;
  p.delta_gamma = detail::propagate_error(p.variance, slope, t * n_atoms);
  p.qfi = qfi_pure(probe, CollectiveHamiltonian::linear_Jz, t);
  p.purity = single_qubit_purity(evolved);
  return p;
}

/// Optimal product probe for the J_z^2 coupling.
inline Superposition twisting_probe() {
  return {std::cos(std::numbers::pi / 8.0), std::sin(std::numbers::pi / 8.0)};
}

/// [cos(pi/8)|1> + sin(pi/8)|2>]^N -> exp(-i gamma t J_z^2) -> measure J_y, at each time.
inline std::vector<ProtocolPoint> product_nonlinear_protocol(int n_atoms, double gamma,
                                                             std::span<const double> t_grid) {
  if (n_atoms < 2) throw DomainError("product_nonlinear_protocol: need at least two atoms");
  const DickeState probe = prepare_product(n_atoms, twisting_probe());
  std::vector<ProtocolPoint> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    detail::require_positive_time(t, "product_nonlinear_protocol");
    out.push_back(simulate_protocol(probe, CollectiveHamiltonian::quadratic_Jz2, gamma, t,
                                    Readout::of(Axis::y)));
  }
  return out;
}

/// delta_gamma * sqrt(<Delta^2 K>) with K = t h; never below 1/2.
inline double mandelstam_tamm_product(const ProtocolPoint& p) {
  return p.delta_gamma.value_or(std::numeric_limits<double>::infinity()) * 0.5 * std::sqrt(p.qfi);
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("loglog_slope: need at least two matching points");
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace becmet
