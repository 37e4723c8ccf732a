#pragma once

// Gross-Pitaevskii solver for the longitudinal condensate wave function.
// Work units: length r0, time 1/omega_L, energy hbar omega_L, where the trap
// reads x^q / 2 and the reduced nonlinearity is
//   beta = (N-1) g11 eta_T r0^{2-d} m / hbar^2 = V_d (N-1) / (2 (N_L-1)).
// d = 1, 2 use Cartesian FFT grids; d = 3 uses u = r psi on an odd-extended
// radial line. Time stepping is second-order Strang splitting.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "becmet/errors.hpp"
#include "becmet/parallel.hpp"
#include "becmet/physical_config.hpp"
#include "becmet/tf_analytics.hpp"
#include "becmet/trap_scaling.hpp"

namespace becmet {

using cplx = std::complex<double>;

namespace detail {
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// In-place FFTW plan pair for one grid shape. Plans are made under a global
/// lock (the planner is not re-entrant); execution is thread-safe.
class FftPlan {
 public:
  FftPlan(int dims, int points) : size_(static_cast<std::size_t>(dims == 2 ? points * points : points)) {
    buffer_ = fftw_alloc_complex(size_);
    std::lock_guard lock(detail::fftw_planner_mutex());
    if (dims == 2) {
      fwd_ = fftw_plan_dft_2d(points, points, buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_2d(points, points, buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
    } else {
      fwd_ = fftw_plan_dft_1d(points, buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
      bwd_ = fftw_plan_dft_1d(points, buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buffer_);
  }

  void forward(std::vector<cplx>& v) const { run(fwd_, v); }
  /// Unnormalized inverse (FFTW convention).
  void backward(std::vector<cplx>& v) const { run(bwd_, v); }

 private:
  void run(fftw_plan p, std::vector<cplx>& v) const {
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(v.data()),
                     reinterpret_cast<fftw_complex*>(v.data()));
  }
  std::size_t size_;
  fftw_complex* buffer_;
  fftw_plan fwd_, bwd_;
};

/// Uniform grid on [-L, L)^n with cell-centred points (no point at the origin).
class Grid {
 public:
  Grid(int d, int points, double half_extent) : d_(d), n_(points), L_(half_extent) {
    check_dimension(d);
    if (points < 64 || points % 2 != 0) throw DomainError("Grid: need an even number >= 64 points per axis");
    if (!(half_extent > 0.0)) throw DomainError("Grid: extent must be positive");
    dx_ = 2.0 * L_ / n_;
    axis_.resize(static_cast<std::size_t>(n_));
    k_axis_.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      axis_[i] = -L_ + (i + 0.5) * dx_;
      const int m = i < n_ / 2 ? i : i - n_;
      k_axis_[i] = std::numbers::pi * m / L_;
    }
    const std::size_t total = size();
    radius_.resize(total);
    k2_.resize(total);
    weight_.resize(total);
    density_factor_.resize(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
      if (d_ == 2) {
        const std::size_t i = idx / n_, j = idx % n_;
        radius_[idx] = std::hypot(axis_[i], axis_[j]);
        k2_[idx] = k_axis_[i] * k_axis_[i] + k_axis_[j] * k_axis_[j];
        weight_[idx] = dx_ * dx_;
        density_factor_[idx] = 1.0;
      } else {
        radius_[idx] = std::abs(axis_[idx]);
        k2_[idx] = k_axis_[idx] * k_axis_[idx];
        if (d_ == 3) {
          // Both halves of the odd extension carry half of 4 pi r^2 dr.
          weight_[idx] = 2.0 * std::numbers::pi * radius_[idx] * radius_[idx] * dx_;
          density_factor_[idx] = 1.0 / (radius_[idx] * radius_[idx]);
        } else {
          weight_[idx] = dx_;
          density_factor_[idx] = 1.0;
        }
      }
    }
    kinetic_weight_ = (d_ == 3 ? 2.0 * std::numbers::pi * dx_ : std::pow(dx_, d_ == 2 ? 2 : 1)) /
                      static_cast<double>(total);
    plan_ = std::make_shared<FftPlan>(d_ == 2 ? 2 : 1, n_);
  }

  int dimension() const { return d_; }
  bool radial() const { return d_ == 3; }
  int points() const { return n_; }
  double half_extent() const { return L_; }
  double spacing() const { return dx_; }
  std::size_t size() const { return d_ == 2 ? static_cast<std::size_t>(n_) * n_ : n_; }
  double k_max() const { return std::numbers::pi / dx_; }

  const std::vector<double>& radius() const { return radius_; }
  const std::vector<double>& k2() const { return k2_; }
  /// Quadrature weight: sum_j w_j f(density_j) approximates int d^d r f.
  const std::vector<double>& weight() const { return weight_; }
  /// Density is |v|^2 times this factor (1/r^2 on the radial line, else 1).
  const std::vector<double>& density_factor() const { return density_factor_; }
  double kinetic_weight() const { return kinetic_weight_; }
  const FftPlan& fft() const { return *plan_; }

 private:
  int d_, n_;
  double L_, dx_ = 0.0, kinetic_weight_ = 0.0;
  std::vector<double> axis_, k_axis_, radius_, k2_, weight_, density_factor_;
  std::shared_ptr<FftPlan> plan_;
};

/// Grid values (work units) plus the atom number they describe. On the d = 3
/// radial line the stored values are u = r psi.
struct Field {
  std::shared_ptr<const Grid> grid;
  std::vector<cplx> values;
  double n_atoms = 0.0;

  double density(std::size_t j) const { return std::norm(values[j]) * grid->density_factor()[j]; }
  double norm() const {
    double s = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) s += grid->weight()[j] * density(j);
    return s;
  }
  void normalize() {
    const double s = 1.0 / std::sqrt(norm());
    for (auto& v : values) v *= s;
  }
};

/// <a|b> = int conj(psi_a) psi_b.
inline cplx overlap(const Field& a, const Field& b) {
  cplx s{0.0, 0.0};
  const auto& w = a.grid->weight();
  const auto& f = a.grid->density_factor();
  for (std::size_t j = 0; j < a.values.size(); ++j) s += w[j] * f[j] * std::conj(a.values[j]) * b.values[j];
  return s;
}

/// Physical scales and dimensionless couplings of one (trap, species, N) problem.
struct GpModel {
  int d;
  Hardness q = Hardness::power(2);
  double n_atoms;
  double r0, omega_L, eta_T;  // SI
  double beta11;              // reduced g11 nonlinearity
  double beta12_ratio, beta22_ratio;  // g12/g11, g22/g11
  double loss12, loss22;              // (N-1) Gamma eta_T r0^-d / omega_L
  double wall_height;                 // hard-wall barrier in work units

  /// Bare longitudinal potential.
  double potential(double r) const {
    if (q.is_hard_wall()) return r < 1.0 ? 0.0 : wall_height;
    return 0.5 * std::pow(r, q.q());
  }
  /// TF radius of the single-mode ground state, work units.
  double tf_radius() const {
    const double dq = 1.0 + d * q.inverse();
    if (q.is_hard_wall()) return 1.0;
    return std::pow(dq * 2.0 * beta11 / unit_ball_volume(d), 1.0 / (d + q.q()));
  }
  /// TF chemical potential estimate (at least the bare trap scale).
  double mu_estimate() const {
    if (q.is_hard_wall()) {
      return std::max(0.5 * d * std::pow(std::numbers::pi / 2.0, 2), beta11 / unit_ball_volume(d));
    }
    return std::max(0.5 * d, 0.5 * std::pow(tf_radius(), q.q()));
  }
  double beta(int a, int b) const {
    if (a == 1 && b == 1) return beta11;
    if (a == 2 && b == 2) return beta11 * beta22_ratio;
    return beta11 * beta12_ratio;
  }
};

inline GpModel make_gp_model(const TrapGeometry& geom, const Species& species, double n_atoms) {
  if (!(n_atoms >= 1.0)) throw DomainError("GP model: atom number must be at least 1");
  GpModel m{};
  m.d = geom.d();
  m.q = geom.hardness();
  m.n_atoms = n_atoms;
  m.r0 = geom.r0();
  m.omega_L = geom.omega_L();
  m.eta_T = geom.D() == 0 ? 1.0 : eta_transverse(geom);
  const double to_work = geom.mass() / (kSI.hbar * kSI.hbar) * std::pow(m.r0, 2 - m.d);
  m.beta11 = (n_atoms - 1.0) * species.g11() * m.eta_T * to_work;
  m.beta12_ratio = species.g12() / species.g11();
  m.beta22_ratio = species.g22() / species.g11();
  const double loss_scale = (n_atoms - 1.0) * m.eta_T * std::pow(m.r0, -m.d) / m.omega_L;
  m.loss12 = species.gamma12_loss() * loss_scale;
  m.loss22 = species.gamma22_loss() * loss_scale;
  m.wall_height = 0.0;
  if (m.q.is_hard_wall()) m.wall_height = 200.0 * m.mu_estimate();
  return m;
}

struct GridPolicy {
  int min_points = 512;
  /// Grid half-width in units of the TF radius (or the bare width when larger).
  double extent_factor = 2.0;
  /// Grow the grid until the spacing is at most this fraction of the healing length.
  double healing_fraction = 0.5;
  int max_points = 1 << 14;
};

struct GridReport {
  std::shared_ptr<const Grid> grid;
  std::vector<std::string> warnings;
};

/// Grid sized to the TF radius and the healing length 1/sqrt(2 mu).
inline GridReport make_grid(const GpModel& m, const GridPolicy& policy = {}) {
  const double bare_width = m.q.is_hard_wall() ? 1.0 : 4.0;  // a few oscillator lengths
  const double L = policy.extent_factor * std::max(m.tf_radius(), bare_width / policy.extent_factor * 1.5);
  const double healing = 1.0 / std::sqrt(2.0 * m.mu_estimate());
  int n = policy.min_points;
  while (2.0 * L / n > policy.healing_fraction * healing && n < policy.max_points) n *= 2;
  if (m.d == 2) n = std::min(n, 1024);
  GridReport r{std::make_shared<const Grid>(m.d, n, L), {}};
  if (r.grid->spacing() > healing) r.warnings.push_back("grid spacing exceeds the healing length");
  if (L < 1.5 * m.tf_radius()) r.warnings.push_back("grid extent below 1.5 TF radii");
  return r;
}

namespace detail {

inline void kinetic_multiply(const Grid& g, std::vector<cplx>& v, const std::vector<cplx>& factor) {
  g.fft().forward(v);
  const double inv = 1.0 / static_cast<double>(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] *= factor[j] * inv;
  g.fft().backward(v);
}

/// Per-atom energies of one normalized field: kinetic, trap, interaction (beta/2 int rho^2).
struct EnergyParts {
  double kinetic, trap, interaction;
};

inline EnergyParts energy_parts(const GpModel& m, const Field& f, double beta) {
  const Grid& g = *f.grid;
  std::vector<cplx> hat = f.values;
  g.fft().forward(hat);
  double kin = 0.0;
  for (std::size_t j = 0; j < hat.size(); ++j) kin += 0.5 * g.k2()[j] * std::norm(hat[j]);
  kin *= g.kinetic_weight();
  double trap = 0.0, inter = 0.0;
  for (std::size_t j = 0; j < f.values.size(); ++j) {
    const double rho = f.density(j);
    trap += g.weight()[j] * m.potential(g.radius()[j]) * rho;
    inter += g.weight()[j] * 0.5 * beta * rho * rho;
  }
  return {kin, trap, inter};
}

inline double eta_of(const Field& f) {
  double s = 0.0;
  for (std::size_t j = 0; j < f.values.size(); ++j) {
    const double rho = f.density(j);
    s += f.grid->weight()[j] * rho * rho;
  }
  return s;
}

}  // namespace detail

struct GroundStateOptions {
  double tolerance = 1e-10;      // relative energy change per unit imaginary time
  double initial_step = 0.0;     // 0: choose from mu
  int refinements = 2;           // step divided by 3 this many times
  long max_steps = 2'000'000;
  int check_every = 20;
};

struct GroundStateResult {
  Field field;
  double mu = 0.0;        // J
  double e0 = 0.0;        // kinetic + trap per atom, J (longitudinal)
  double energy = 0.0;    // GP energy per atom, J (longitudinal)
  double eta_L = 0.0;     // m^-d
  double eta_N = 0.0;     // m^-3
  double residual = 0.0;  // final relative energy change per unit imaginary time
  long steps = 0;
  std::vector<std::string> warnings;
};

/// Normalized ground state by imaginary-time split-step propagation.
inline GroundStateResult ground_state(const GpModel& m, std::shared_ptr<const Grid> grid,
                                      const GroundStateOptions& opt = {}) {
  if (m.beta11 < 0.0) throw DomainError("ground_state: attractive interactions are not supported");
  if (grid->dimension() != m.d) throw DomainError("ground_state: grid dimension does not match the trap");
  const Grid& g = *grid;
  const std::size_t size = g.size();

  // Start from the TF profile (plus a Gaussian floor so the tails fill in).
  Field f{grid, std::vector<cplx>(size), m.n_atoms};
  const double rt = m.tf_radius();
  for (std::size_t j = 0; j < size; ++j) {
    const double r = g.radius()[j];
    double amp = std::sqrt(std::max(0.0, 1.0 - std::pow(r / rt, m.q.is_hard_wall() ? 2 : m.q.q())));
    amp += 1e-3 * std::exp(-0.5 * r * r);
    // Radial storage is u = r psi, odd on the extended line.
    if (g.radial()) amp *= (j < size / 2 ? -r : r);
    f.values[j] = amp;
  }
  f.normalize();

  double dt = opt.initial_step > 0.0 ? opt.initial_step : std::min(0.01, 0.2 / m.mu_estimate());
  GroundStateResult res;
  std::vector<double> v_bare(size);
  for (std::size_t j = 0; j < size; ++j) v_bare[j] = m.potential(g.radius()[j]);
  auto energy = [&] {
    const auto e = detail::energy_parts(m, f, m.beta11);
    return e.kinetic + e.trap + e.interaction;
  };

  long steps = 0;
  double residual = std::numeric_limits<double>::infinity();
  for (int level = 0; level <= opt.refinements; ++level, dt /= 3.0) {
    std::vector<cplx> half_kin(size);
    for (std::size_t j = 0; j < size; ++j) half_kin[j] = std::exp(-0.25 * dt * g.k2()[j]);
    double e_prev = energy();
    residual = std::numeric_limits<double>::infinity();
    while (residual > opt.tolerance) {
      for (int s = 0; s < opt.check_every; ++s) {
        detail::kinetic_multiply(g, f.values, half_kin);
        for (std::size_t j = 0; j < size; ++j) {
          f.values[j] *= std::exp(-dt * (v_bare[j] + m.beta11 * f.density(j)));
        }
        detail::kinetic_multiply(g, f.values, half_kin);
        f.normalize();
      }
      steps += opt.check_every;
      const double e = energy();
      residual = std::abs(e - e_prev) / (std::abs(e) * dt * opt.check_every);
      e_prev = e;
      if (!std::isfinite(e)) throw InstabilityError("ground_state: energy became non-finite");
      if (steps > opt.max_steps) throw ConvergenceError("ground_state: step budget exhausted", residual);
    }
  }

  const auto parts = detail::energy_parts(m, f, m.beta11);
  const double unit_energy = kSI.hbar * m.omega_L;
  res.field = std::move(f);
  res.residual = residual;
  res.steps = steps;
  res.e0 = (parts.kinetic + parts.trap) * unit_energy;
  res.energy = (parts.kinetic + parts.trap + parts.interaction) * unit_energy;
  res.mu = (parts.kinetic + parts.trap + 2.0 * parts.interaction) * unit_energy;
  const double eta_work = detail::eta_of(res.field);
  res.eta_L = eta_work / std::pow(m.r0, m.d);
  res.eta_N = res.eta_L * m.eta_T;
  return res;
}

inline GroundStateResult ground_state(const TrapGeometry& geom, const Species& species, double n_atoms,
                                      const GridPolicy& policy = {}, const GroundStateOptions& opt = {}) {
  const auto m = make_gp_model(geom, species, n_atoms);
  auto grid = make_grid(m, policy);
  auto res = ground_state(m, grid.grid, opt);
  res.warnings.insert(res.warnings.end(), grid.warnings.begin(), grid.warnings.end());
  return res;
}

struct EtaSweepRow {
  double n_atoms = 0.0;
  double eta_N = 0.0;        // m^-3
  double eta_N_tf = 0.0;     // intermediate TF prediction, m^-3
  double local_slope = std::numeric_limits<double>::quiet_NaN();  // d ln eta / d ln (N-1)
  double residual = 0.0;
};

/// Ground states across ascending N with centred log-log slopes.
inline std::vector<EtaSweepRow> eta_sweep(const TrapGeometry& geom, const Species& species,
                                          const std::vector<double>& n_list, const GridPolicy& policy = {},
                                          const GroundStateOptions& opt = {}, unsigned threads = 1) {
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (!(n_list[i] > n_list[i - 1])) throw DomainError("eta_sweep: N list must be ascending");
  }
  auto rows = parallel_map(n_list, threads, [&](double n) {
    const auto gs = ground_state(geom, species, n, policy, opt);
    EtaSweepRow r;
    r.n_atoms = n;
    r.eta_N = gs.eta_N;
    r.residual = gs.residual;
    if (n > 1.0) r.eta_N_tf = tf_profile(geom, species, n, Regime::intermediate).eta_N;
    return r;
  });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == rows.size() ? i : i + 1;
    if (lo == hi || rows[lo].n_atoms <= 1.0) continue;
    rows[i].local_slope = std::log(rows[hi].eta_N / rows[lo].eta_N) /
                          std::log((rows[hi].n_atoms - 1.0) / (rows[lo].n_atoms - 1.0));
  }
  return rows;
}

struct EvolutionRecord {
  std::vector<double> times;  // s
  std::vector<cplx> overlap;  // <psi_2|psi_1>
  std::vector<double> p1, p2;
  std::vector<double> norm1, norm2;
  std::vector<double> energy;  // coupled energy functional per atom, J
};

struct EvolutionOptions {
  bool loss = false;
  int record_every = 1;
  /// Largest allowed phase advance of the potential substep per step (rad).
  double max_phase_per_step = 0.1;
  /// Largest kinetic phase k_max^2 dt / 2 per step; beyond about pi the
  /// splitting excites a high-k parametric instability.
  double max_kinetic_phase = 0.5 * std::numbers::pi;
};

namespace detail {

/// Largest potential-substep phase rate over the occupied grid (work units).
inline double phase_rate(const GpModel& m, const Field& f) {
  const Grid& g = *f.grid;
  double peak = 0.0, v_max = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) peak = std::max(peak, f.density(j));
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (f.density(j) > 1e-12 * peak) v_max = std::max(v_max, m.potential(g.radius()[j]));
  }
  return v_max + std::max({m.beta(1, 1), m.beta(1, 2), m.beta(2, 2)}) * peak;
}

inline double coupled_energy(const GpModel& m, const Field& f1, const Field& f2, const Superposition& sup) {
  const double w1 = sup.c1() * sup.c1(), w2 = sup.c2() * sup.c2();
  const auto e1 = energy_parts(m, f1, 0.0);
  const auto e2 = energy_parts(m, f2, 0.0);
  double inter = 0.0;
  const Grid& g = *f1.grid;
  for (std::size_t j = 0; j < f1.values.size(); ++j) {
    const double r1 = f1.density(j), r2 = f2.density(j);
    inter += g.weight()[j] * 0.5 *
             (m.beta(1, 1) * w1 * w1 * r1 * r1 + 2.0 * m.beta(1, 2) * w1 * w2 * r1 * r2 +
              m.beta(2, 2) * w2 * w2 * r2 * r2);
  }
  return w1 * (e1.kinetic + e1.trap) + w2 * (e2.kinetic + e2.trap) + inter;
}

}  // namespace detail

/// Real-time coupled two-mode evolution from a single-mode ground state.
/// Each mode feels V + sum_b beta_ab c_b^2 |phi_b|^2; with loss on, mode 1
/// gains -i/2 l12 c2^2 |phi_2|^2 and mode 2 -i/2 (l12 c1^2 |phi_1|^2 + l22 c2^2 |phi_2|^2).
inline EvolutionRecord evolve_two_mode(const Field& initial, const Superposition& sup, const Species& species,
                                       const TrapGeometry& geom, double t_final, long steps,
                                       const EvolutionOptions& opt = {}) {
  if (!(t_final > 0.0) || steps < 1) throw DomainError("evolve_two_mode: need t_final > 0 and steps >= 1");
  const GpModel m = make_gp_model(geom, species, initial.n_atoms);
  const Grid& g = *initial.grid;
  if (g.dimension() != m.d) throw DomainError("evolve_two_mode: field grid does not match the trap");
  const std::size_t size = g.size();
  const double dt = t_final * m.omega_L / static_cast<double>(steps);
  const double w1 = sup.c1() * sup.c1(), w2 = sup.c2() * sup.c2();

  std::vector<double> v_bare(size);
  for (std::size_t j = 0; j < size; ++j) v_bare[j] = m.potential(g.radius()[j]);
  const double phase_scale = detail::phase_rate(m, initial);
  if (phase_scale * dt > opt.max_phase_per_step) {
    throw InstabilityError("evolve_two_mode: step too large (phase advance " +
                           std::to_string(phase_scale * dt) + " rad per step)");
  }
  const double kinetic_phase = 0.5 * g.k_max() * g.k_max() * dt;
  if (kinetic_phase > opt.max_kinetic_phase) {
    throw InstabilityError("evolve_two_mode: step too large for the grid (kinetic phase " +
                           std::to_string(kinetic_phase) + " rad per step)");
  }

  std::vector<cplx> half_kin(size);
  for (std::size_t j = 0; j < size; ++j) half_kin[j] = std::polar(1.0, -0.25 * dt * g.k2()[j]);

  Field f1 = initial, f2 = initial;
  f1.normalize();
  f2.normalize();
  EvolutionRecord rec;
  auto record = [&](double tau) {
    const cplx ov = overlap(f2, f1);
    const auto p = fringe_probabilities(sup, ov);
    rec.times.push_back(tau / m.omega_L);
    rec.overlap.push_back(ov);
    rec.p1.push_back(p.p1);
    rec.p2.push_back(p.p2);
    rec.norm1.push_back(f1.norm());
    rec.norm2.push_back(f2.norm());
    rec.energy.push_back(detail::coupled_energy(m, f1, f2, sup) * kSI.hbar * m.omega_L);
  };
  record(0.0);

  std::vector<double> rho1(size), rho2(size);
  auto potential_step = [&](double h, const std::vector<double>& d1, const std::vector<double>& d2) {
    for (std::size_t j = 0; j < size; ++j) {
      const double u1 = v_bare[j] + m.beta(1, 1) * w1 * d1[j] + m.beta(1, 2) * w2 * d2[j];
      const double u2 = v_bare[j] + m.beta(2, 1) * w1 * d1[j] + m.beta(2, 2) * w2 * d2[j];
      double a1 = 0.0, a2 = 0.0;
      if (opt.loss) {
        a1 = 0.5 * m.loss12 * w2 * d2[j];
        a2 = 0.5 * (m.loss12 * w1 * d1[j] + m.loss22 * w2 * d2[j]);
      }
      f1.values[j] *= std::exp(cplx(-a1 * h, -u1 * h));
      f2.values[j] *= std::exp(cplx(-a2 * h, -u2 * h));
    }
  };

  const double n1_start = f1.norm(), n2_start = f2.norm();
  for (long s = 1; s <= steps; ++s) {
    detail::kinetic_multiply(g, f1.values, half_kin);
    detail::kinetic_multiply(g, f2.values, half_kin);
    for (std::size_t j = 0; j < size; ++j) {
      rho1[j] = f1.density(j);
      rho2[j] = f2.density(j);
    }
    if (opt.loss) {
      // Midpoint densities keep the lossy substep second order.
      const Field s1 = f1, s2 = f2;
      potential_step(0.5 * dt, rho1, rho2);
      std::vector<double> m1(size), m2(size);
      for (std::size_t j = 0; j < size; ++j) {
        m1[j] = f1.density(j);
        m2[j] = f2.density(j);
      }
      f1 = s1;
      f2 = s2;
      potential_step(dt, m1, m2);
    } else {
      potential_step(dt, rho1, rho2);
    }
    detail::kinetic_multiply(g, f1.values, half_kin);
    detail::kinetic_multiply(g, f2.values, half_kin);
    if (s % opt.record_every == 0 || s == steps) {
      record(s * dt);
      if (!opt.loss && (rec.norm1.back() > n1_start * (1.0 + 1e-6) || rec.norm2.back() > n2_start * (1.0 + 1e-6))) {
        throw InstabilityError("evolve_two_mode: norm growth in lossless evolution");
      }
      if (!std::isfinite(rec.norm1.back())) throw InstabilityError("evolve_two_mode: non-finite field");
    }
  }
  return rec;
}

/// Real-time single-mode GP propagation with g11 (no second component).
inline Field evolve_single_mode(const Field& initial, const Species& species, const TrapGeometry& geom,
                                double t_final, long steps) {
  if (!(t_final > 0.0) || steps < 1) throw DomainError("evolve_single_mode: need t_final > 0 and steps >= 1");
  const GpModel m = make_gp_model(geom, species, initial.n_atoms);
  const Grid& g = *initial.grid;
  const std::size_t size = g.size();
  const double dt = t_final * m.omega_L / static_cast<double>(steps);
  std::vector<cplx> half_kin(size);
  for (std::size_t j = 0; j < size; ++j) half_kin[j] = std::polar(1.0, -0.25 * dt * g.k2()[j]);
  Field f = initial;
  for (long s = 0; s < steps; ++s) {
    detail::kinetic_multiply(g, f.values, half_kin);
    for (std::size_t j = 0; j < size; ++j) {
      f.values[j] *= std::polar(1.0, -dt * (m.potential(g.radius()[j]) + m.beta11 * f.density(j)));
    }
    detail::kinetic_multiply(g, f.values, half_kin);
  }
  return f;
}

/// Smallest step count meeting both the potential and kinetic phase limits.
inline long recommended_steps(const GroundStateResult& gs, const Species& species, const TrapGeometry& geom,
                              double t_final, const EvolutionOptions& opt = {}) {
  const GpModel m = make_gp_model(geom, species, gs.field.n_atoms);
  const double k_max = gs.field.grid->k_max();
  const double rate = std::max(detail::phase_rate(m, gs.field) / opt.max_phase_per_step,
                               0.5 * k_max * k_max / opt.max_kinetic_phase);
  return std::max(1L, static_cast<long>(std::ceil(rate * t_final * m.omega_L / 0.9)));
}

struct LossBudget {
  double gamma;  // decay constant, 1/s
  double ratio;  // Gamma / Omega_N
  double ratio_closed_form;  // m (G12 + G22/2) / (4 pi hbar (a11 - a22)), equal-weight case
};

/// Gamma = (N-1) eta_N (G12 + G22 c2^2) / 2 against the phase frequency Omega_N.
inline LossBudget loss_budget(const Species& species, const TrapGeometry& geom, double n_atoms,
                              const Superposition& sup) {
  const double dg = delta_g(species, sup);
  if (dg == 0.0) throw DomainError("loss_budget: Delta g = 0, no signal to compare against");
  const auto prof = tf_profile(geom, species, n_atoms, Regime::intermediate);
  LossBudget b{};
  b.gamma = 0.5 * (n_atoms - 1.0) * prof.eta_N *
            (species.gamma12_loss() + species.gamma22_loss() * sup.c2() * sup.c2());
  const double omega = (n_atoms - 1.0) * prof.eta_N * dg / kSI.hbar;
  b.ratio = b.gamma / std::abs(omega);
  const double da = species.a11() - species.a22();
  b.ratio_closed_form = da == 0.0 ? std::numeric_limits<double>::infinity()
                                  : species.mass() / (4.0 * std::numbers::pi * kSI.hbar) *
                                        (species.gamma12_loss() + 0.5 * species.gamma22_loss()) / da;
  return b;
}

/// Text snapshot: "# becmet-field 1", then key value lines (dimension, radial,
/// points, spacing_m, half_extent_m, n_atoms, length_unit_m), a "data" line,
/// and one "re im" pair per grid point in row-major order (work units).
inline void write_snapshot(std::ostream& out, const Field& f, double length_unit) {
  const Grid& g = *f.grid;
  out << "# becmet-field 1\n"
      << "dimension " << g.dimension() << '\n'
      << "radial " << (g.radial() ? 1 : 0) << '\n'
      << "points " << g.points() << '\n'
      << std::setprecision(17) << "spacing_m " << g.spacing() * length_unit << '\n'
      << "half_extent_m " << g.half_extent() * length_unit << '\n'
      << "n_atoms " << f.n_atoms << '\n'
      << "length_unit_m " << length_unit << '\n'
      << "data\n";
  for (const auto& v : f.values) out << v.real() << ' ' << v.imag() << '\n';
}

inline Field read_snapshot(std::istream& in, double* length_unit = nullptr) {
  std::string line;
  if (!std::getline(in, line) || line != "# becmet-field 1") throw ConfigError("snapshot: bad header");
  int d = 0, points = 0;
  double half = 0.0, unit = 0.0, n = 0.0;
  while (std::getline(in, line) && line != "data") {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "dimension") ls >> d;
    else if (key == "points") ls >> points;
    else if (key == "half_extent_m") ls >> half;
    else if (key == "n_atoms") ls >> n;
    else if (key == "length_unit_m") ls >> unit;
  }
  if (d == 0 || points == 0 || !(unit > 0.0)) throw ConfigError("snapshot: incomplete header");
  auto grid = std::make_shared<const Grid>(d, points, half / unit);
  Field f{grid, std::vector<cplx>(grid->size()), n};
  for (auto& v : f.values) {
    double re = 0.0, im = 0.0;
    if (!(in >> re >> im)) throw ConfigError("snapshot: truncated payload");
    v = {re, im};
  }
  if (length_unit) *length_unit = unit;
  return f;
}

}  // namespace becmet
