#pragma once

// Permutation-symmetric states of N qubits in the Dicke basis |j=N/2, m>,
// m = -N/2 ... N/2. Index i = N/2 + m counts atoms in |1> (the +1/2
// eigenstate of sigma_z / 2), so the state space has N+1 amplitudes and the
// collective operators J_x, J_y, J_z act tridiagonally.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "becmet/errors.hpp"
#include "becmet/physical_config.hpp"

namespace becmet {

using cplx = std::complex<double>;
using Amplitudes = std::vector<cplx>;

enum class Axis { x, y, z };

class DickeState {
 public:
  DickeState(int n_atoms, Amplitudes amplitudes) : n_(n_atoms), amps_(std::move(amplitudes)) {
    if (n_atoms < 1) throw DomainError("DickeState: need at least one atom");
    if (amps_.size() != static_cast<std::size_t>(n_atoms) + 1) {
      throw DomainError("DickeState: amplitude vector must have N+1 entries");
    }
    double norm2 = 0.0;
    for (const auto& a : amps_) norm2 += std::norm(a);
    if (std::abs(norm2 - 1.0) > 1e-10) throw DomainError("DickeState: state is not normalized");
  }

  int n_atoms() const { return n_; }
  double j() const { return 0.5 * n_; }
  std::size_t size() const { return amps_.size(); }
  /// J_z eigenvalue of basis index i.
  double m(std::size_t i) const { return static_cast<double>(i) - 0.5 * n_; }
  std::span<const cplx> amplitudes() const { return amps_; }
  const cplx& operator[](std::size_t i) const { return amps_[i]; }

 private:
  int n_;
  Amplitudes amps_;
};

namespace detail {

/// Matrix element <i+1| J_+ |i> = sqrt((N - i)(i + 1)).
inline double ladder(int n, std::size_t i) {
  return std::sqrt(static_cast<double>(n - static_cast<int>(i)) * static_cast<double>(i + 1));
}

inline cplx inner(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline double norm2(std::span<const cplx> a) {
  double s = 0.0;
  for (const auto& x : a) s += std::norm(x);
  return s;
}

/// J_axis v.
inline Amplitudes apply_component(int n, std::span<const cplx> v, Axis axis) {
  const std::size_t size = v.size();
  Amplitudes out(size, cplx{0.0, 0.0});
  if (axis == Axis::z) {
    for (std::size_t i = 0; i < size; ++i) out[i] = (static_cast<double>(i) - 0.5 * n) * v[i];
    return out;
  }
  // J_+ v and J_- v assembled into J_x = (J_+ + J_-)/2, J_y = (J_+ - J_-)/(2i).
  const cplx minus_half_i{0.0, -0.5};
  for (std::size_t i = 0; i + 1 < size; ++i) {
    const double c = ladder(n, i);
    const cplx raise = c * v[i];      // lands on i+1
    const cplx lower = c * v[i + 1];  // lands on i
    if (axis == Axis::x) {
      out[i + 1] += 0.5 * raise;
      out[i] += 0.5 * lower;
    } else {
      out[i + 1] += minus_half_i * raise;
      out[i] -= minus_half_i * lower;
    }
  }
  return out;
}

/// Bessel J_k(x) for k = 0..kmax by Miller's backward recursion, normalised
/// with J_0 + 2 sum_{k>=1} J_{2k} = 1.
inline std::vector<double> bessel_j_sequence(double x, int kmax) {
  std::vector<double> out(static_cast<std::size_t>(kmax) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const double ax = std::abs(x);
  std::size_t start = static_cast<std::size_t>(kmax) + 40 +
                      static_cast<std::size_t>(std::sqrt(40.0 * std::max(ax, 1.0)));
  if (start % 2 != 0) ++start;
  std::vector<double> vals(start + 2, 0.0);
  vals[start] = 1e-300;
  for (std::size_t k = start; k > 0; --k) {
    vals[k - 1] = (2.0 * static_cast<double>(k) / ax) * vals[k] - vals[k + 1];
    if (std::abs(vals[k - 1]) > 1e250) {
      for (std::size_t i = k - 1; i <= start; ++i) vals[i] *= 1e-250;
    }
  }
  double norm = vals[0];
  for (std::size_t k = 2; k <= start; k += 2) norm += 2.0 * vals[k];
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = vals[k] / norm;
    if (x < 0.0 && k % 2 == 1) out[k] = -out[k];
  }
  return out;
}

/// exp(-i angle J_axis) v for axis x or y by a Chebyshev expansion of the
/// tridiagonal generator scaled to spectrum [-1, 1].
inline Amplitudes chebyshev_rotate(int n, std::span<const cplx> v, Axis axis, double angle) {
  const double j = 0.5 * n;
  const double x = angle * j;
  const double ax = std::abs(x);
  const int kmax = static_cast<int>(std::ceil(ax + 15.0 * std::cbrt(ax) + 30.0));
  const auto bessel = bessel_j_sequence(x, kmax);

  auto apply_b = [&](const Amplitudes& u) {
    Amplitudes r = apply_component(n, u, axis);
    for (auto& e : r) e /= j;
    return r;
  };

  Amplitudes t_prev(v.begin(), v.end());
  Amplitudes result(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) result[i] = bessel[0] * t_prev[i];
  Amplitudes t_cur = apply_b(t_prev);
  cplx phase{0.0, -1.0};  // (-i)^k
  for (int k = 1; k <= kmax; ++k) {
    const cplx coeff = 2.0 * bessel[static_cast<std::size_t>(k)] * phase;
    for (std::size_t i = 0; i < v.size(); ++i) result[i] += coeff * t_cur[i];
    if (k == kmax) break;
    Amplitudes bt = apply_b(t_cur);
    for (std::size_t i = 0; i < v.size(); ++i) bt[i] = 2.0 * bt[i] - t_prev[i];
    t_prev = std::move(t_cur);
    t_cur = std::move(bt);
    phase *= cplx{0.0, -1.0};
  }
  return result;
}

/// Log-domain sqrt(C(N, i)) |c1|^i |c2|^(N-i); -inf when the amplitude vanishes.
inline double log_binomial_amplitude(int n, int i, double c1, double c2) {
  auto term = [](int power, double c) {
    if (power == 0) return 0.0;
    return c == 0.0 ? -INFINITY : power * std::log(std::abs(c));
  };
  return 0.5 * (std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0)) +
         term(i, c1) + term(n - i, c2);
}

}  // namespace detail

/// (c1|1> + c2|2>)^{(x)N} in the Dicke basis.
inline DickeState prepare_product(int n_atoms, const Superposition& sup) {
  if (n_atoms < 1) throw DomainError("prepare_product: need at least one atom");
  Amplitudes amps(static_cast<std::size_t>(n_atoms) + 1);
  double norm2 = 0.0;
  for (int i = 0; i <= n_atoms; ++i) {
    const double log_mag = detail::log_binomial_amplitude(n_atoms, i, sup.c1(), sup.c2());
    double mag = std::isinf(log_mag) ? 0.0 : std::exp(log_mag);
    const bool negative = (sup.c1() < 0.0 && i % 2 == 1) != (sup.c2() < 0.0 && (n_atoms - i) % 2 == 1);
    if (negative) mag = -mag;
    amps[static_cast<std::size_t>(i)] = mag;
    norm2 += mag * mag;
  }
  const double scale = 1.0 / std::sqrt(norm2);
  for (auto& a : amps) a *= scale;
  return DickeState(n_atoms, std::move(amps));
}

/// (|m=N/2> + |m=-N/2>)/sqrt(2).
inline DickeState cat_state(int n_atoms) {
  if (n_atoms < 1) throw DomainError("cat_state: need at least one atom");
  Amplitudes amps(static_cast<std::size_t>(n_atoms) + 1, cplx{0.0, 0.0});
  amps.front() = std::numbers::sqrt2 / 2.0;
  amps.back() = std::numbers::sqrt2 / 2.0;
  return DickeState(n_atoms, std::move(amps));
}

/// exp(-i angle J_axis) |state>.
inline DickeState rotate(const DickeState& state, Axis axis, double angle) {
  const int n = state.n_atoms();
  if (angle == 0.0) return state;
  if (axis == Axis::z) {
    Amplitudes out(state.amplitudes().begin(), state.amplitudes().end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= std::polar(1.0, -angle * state.m(i));
    return DickeState(n, std::move(out));
  }
  return DickeState(n, detail::chebyshev_rotate(n, state.amplitudes(), axis, angle));
}

/// Parameter-coupling generators: gamma J_z, gamma J_z^2, gamma N J_z.
enum class CollectiveHamiltonian { linear_Jz, quadratic_Jz2, enhanced_NJz };

/// Eigenvalue of the generator h (H = gamma h) on |m>.
inline double generator_eigenvalue(CollectiveHamiltonian kind, int n_atoms, double m) {
  switch (kind) {
    case CollectiveHamiltonian::linear_Jz: return m;
    case CollectiveHamiltonian::quadratic_Jz2: return m * m;
    case CollectiveHamiltonian::enhanced_NJz: return n_atoms * m;
  }
  return 0.0;
}

/// exp(-i gamma t h) |state>; hbar = 1, gamma an angular frequency.
inline DickeState evolve(const DickeState& state, CollectiveHamiltonian kind, double gamma,
                         double t) {
  if (t < 0.0) throw DomainError("evolve: time must be non-negative");
  Amplitudes out(state.amplitudes().begin(), state.amplitudes().end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] *= std::polar(1.0, -gamma * t * generator_eigenvalue(kind, state.n_atoms(), state.m(i)));
  }
  return DickeState(state.n_atoms(), std::move(out));
}

struct Moments {
  double mean;
  double variance;
};

inline Moments expectation(const DickeState& state, Axis axis) {
  const auto applied = detail::apply_component(state.n_atoms(), state.amplitudes(), axis);
  const double mean = detail::inner(state.amplitudes(), applied).real();
  const double second = detail::norm2(applied);
  return {mean, std::max(0.0, second - mean * mean)};
}

/// Moments of the generator h in the given state.
inline Moments generator_moments(const DickeState& state, CollectiveHamiltonian kind) {
  double mean = 0.0, second = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    const double h = generator_eigenvalue(kind, state.n_atoms(), state.m(i));
    const double p = std::norm(state[i]);
    mean += p * h;
    second += p * h * h;
  }
  return {mean, std::max(0.0, second - mean * mean)};
}

/// Probability of each J_z outcome m, indexed like the amplitudes.
inline std::vector<double> jz_distribution(const DickeState& state) {
  std::vector<double> p(state.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(state[i]);
  return p;
}

/// Purity of the single-atom reduced state, (1 + |v|^2)/2 with v = 2<J>/N.
/// Equals 1 exactly for product states.
inline double single_qubit_purity(const DickeState& state) {
  const double n = state.n_atoms();
  double v2 = 0.0;
  for (Axis a : {Axis::x, Axis::y, Axis::z}) {
    const double v = 2.0 * expectation(state, a).mean / n;
    v2 += v * v;
  }
  return 0.5 * (1.0 + v2);
}

}  // namespace becmet
