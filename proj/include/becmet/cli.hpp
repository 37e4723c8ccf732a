#pragma once

// Command implementations behind tools/becmet_cli. Each command reads its
// settings from a KeyValueConfig, fills in every default it used (so the
// header of each output file records the fully resolved configuration), and
// writes CSV tables into the output directory.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "becmet/becmet.hpp"

namespace becmet::cli {

namespace fs = std::filesystem;

struct RunOptions {
  KeyValueConfig config;
  fs::path out_dir = "out";
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::optional<std::string> preset;  // overrides [species] preset
  bool json_index = false;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Reads settings and records the defaults it falls back on.
class Settings {
 public:
  explicit Settings(KeyValueConfig& cfg) : cfg_(cfg) {}

  double number(const std::string& sec, const std::string& key, double fallback) {
    const double v = cfg_.number_or(sec, key, fallback);
    if (!cfg_.has(sec, key)) cfg_.set(sec, key, fmt(v));
    return v;
  }
  long long integer(const std::string& sec, const std::string& key, long long fallback) {
    const long long v = cfg_.integer_or(sec, key, fallback);
    if (!cfg_.has(sec, key)) cfg_.set(sec, key, std::to_string(v));
    return v;
  }
  std::vector<double> numbers(const std::string& sec, const std::string& key, const std::vector<double>& fallback) {
    auto v = cfg_.numbers(sec, key);
    if (v.empty()) {
      v = fallback;
      std::string joined;
      for (std::size_t i = 0; i < v.size(); ++i) joined += (i ? "," : "") + fmt(v[i]);
      cfg_.set(sec, key, joined);
    }
    return v;
  }
  std::string text(const std::string& sec, const std::string& key, const std::string& fallback) {
    const auto v = cfg_.get_or(sec, key, fallback);
    if (!cfg_.has(sec, key)) cfg_.set(sec, key, v);
    return v;
  }
  KeyValueConfig& config() { return cfg_; }

 private:
  KeyValueConfig& cfg_;
};

inline std::vector<int> to_counts(const std::vector<double>& v, const char* what) {
  std::vector<int> out;
  for (double x : v) {
    if (!(x >= 1.0) || x != std::floor(x)) throw ConfigError(std::string(what) + ": atom numbers must be positive integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

inline void require_ascending(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw ConfigError(std::string(what) + ": empty range");
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) throw ConfigError(std::string(what) + ": values must be ascending");
  }
}

inline Species species(Settings& s, const RunOptions& opt, const std::string& default_preset) {
  if (opt.preset) s.config().set("species", "preset", *opt.preset);
  s.text("species", "preset", default_preset);
  return species_from_config(s.config(), default_preset);
}

inline TrapGeometry trap(Settings& s, const Species& sp) {
  s.integer("trap", "d", 1);
  s.text("trap", "q", "2");
  s.number("trap", "rho0_um", 1.0);
  s.number("trap", "r0_um", 100.0);
  return trap_from_config(s.config(), sp.mass());
}

class Writer {
 public:
  Writer(const RunOptions& opt, std::string command) : opt_(opt), command_(std::move(command)) {
    std::error_code ec;
    fs::create_directories(opt_.out_dir, ec);
    if (ec || !fs::is_directory(opt_.out_dir)) {
      throw ConfigError("cannot create output directory " + opt_.out_dir.string());
    }
  }

  void emit(const std::string& name, CsvTable table, const std::string& description) {
    table.comment("becmet " + command_ + " / " + name);
    table.comment("seed = " + std::to_string(opt_.seed));
    table.comment(opt_.config.serialize());
    const fs::path path = opt_.out_dir / name;
    write_file_atomic(path, table.str());
    files_.push_back({name, description, table.rows()});
  }

  const RunOptions& options() const { return opt_; }

  std::vector<fs::path> finish() {
    std::vector<fs::path> out;
    for (const auto& f : files_) out.push_back(opt_.out_dir / f.name);
    if (opt_.json_index) {
      nlohmann::json index;
      index["command"] = command_;
      index["seed"] = opt_.seed;
      index["config"] = opt_.config.serialize();
      for (const auto& f : files_) index["files"].push_back({{"name", f.name}, {"description", f.description}, {"rows", f.rows}});
      const fs::path path = opt_.out_dir / (command_ + "_index.json");
      write_file_atomic(path, index.dump(2) + "\n");
      out.push_back(path);
    }
    return out;
  }

 private:
  struct Entry {
    std::string name, description;
    std::size_t rows;
  };
  const RunOptions& opt_;
  std::string command_;
  std::vector<Entry> files_;
};

inline std::vector<double> powers_of_two(int lo, int hi) {
  std::vector<double> v;
  for (int n = lo; n <= hi; n *= 2) v.push_back(n);
  return v;
}

}  // namespace detail

/// Sensitivity tables: simulated protocols against the linear and nonlinear bounds.
inline std::vector<fs::path> cmd_bounds(RunOptions& opt) {
  detail::Settings s(opt.config);
  const auto n_list = detail::to_counts(s.numbers("sweep", "n", detail::powers_of_two(8, 1024)), "[sweep] n");
  const double t = s.number("protocol", "t", 1.0);
  const double phase = s.number("protocol", "phase", 0.25 * std::numbers::pi);
  const auto product_n = detail::to_counts(s.numbers("protocol", "product_n", {10, 100, 1000}), "[protocol] product_n");
  const auto product_gtn = s.numbers("protocol", "product_gamma_t_n", {1e-1, 1e-2, 1e-3, 1e-4});
  const int purity_n = static_cast<int>(s.integer("protocol", "purity_n", 10));
  const int purity_steps = static_cast<int>(s.integer("protocol", "purity_steps", 40));
  if (!(t > 0.0)) throw ConfigError("[protocol] t must be positive");
  detail::Writer w(opt, "bounds");

  CsvTable table({"N", "t", "ramsey", "cat", "enhanced_NJz", "qnl", "heisenberg", "nonlinear_k2", "product_k2",
                  "ramsey_qcrb", "cat_qcrb", "enhanced_qcrb"});
  std::vector<double> ns, ramsey, cat, enh;
  for (int n : n_list) {
    const double dn = n;
    const auto r = simulate_ramsey(n, phase / t, t);
    const auto c = simulate_cat(n, phase / (dn * t), t);
    const auto e = simulate_enhanced(n, phase / (dn * t), t);
    const auto lin = crb_linear(SpectrumBound::qubit(), n, t);
    const auto nl = crb_nonlinear(SpectrumBound::qubit(2), n, t);
    auto dg = [](const ProtocolPoint& p) { return p.delta_gamma.value_or(std::nan("")); };
    table.add_row({static_cast<long long>(n), t, dg(r), dg(c), dg(e), lin.quantum_noise.delta_gamma,
                   lin.heisenberg.delta_gamma, nl.bound.delta_gamma, nl.product_scaling.delta_gamma,
                   1.0 / std::sqrt(r.qfi), 1.0 / std::sqrt(c.qfi), 1.0 / std::sqrt(e.qfi)});
    ns.push_back(dn);
    ramsey.push_back(dg(r));
    cat.push_back(dg(c));
    enh.push_back(dg(e));
  }
  w.emit("bounds.csv", table, "delta_gamma versus N for simulated protocols and bounds");

  CsvTable slopes({"protocol", "loglog_slope", "expected"});
  if (ns.size() >= 2) {
    slopes.add_row({std::string("ramsey"), loglog_slope(ns, ramsey), -0.5});
    slopes.add_row({std::string("cat"), loglog_slope(ns, cat), -1.0});
    slopes.add_row({std::string("enhanced_NJz"), loglog_slope(ns, enh), -1.5});
  }
  w.emit("slopes.csv", slopes, "log-log slopes of delta_gamma against N");

  CsvTable product({"N", "gamma_t_N", "t", "delta_gamma", "delta_gamma_t_N32", "finite_N_limit", "purity",
                    "mandelstam_tamm"});
  for (int n : product_n) {
    for (double gtn : product_gtn) {
      const double gamma = 1.0;
      const double tt = gtn / (gamma * n);
      const double grid[] = {tt};
      const auto p = product_nonlinear_protocol(n, gamma, grid).front();
      const double dg = p.delta_gamma.value_or(std::nan(""));
      product.add_row({static_cast<long long>(n), gtn, tt, dg, dg * tt * std::pow(n, 1.5), 2.0 * n / (n - 1.0),
                       p.purity, mandelstam_tamm_product(p)});
    }
  }
  w.emit("product_nonlinear.csv", product, "J_z^2 coupling on the product probe, short-time limit");

  CsvTable purity({"N", "gamma_t", "purity_NJz", "purity_Jz2"});
  const DickeState equal = prepare_product(purity_n, Superposition::equal());
  const DickeState twist = prepare_product(purity_n, twisting_probe());
  for (int k = 0; k <= purity_steps; ++k) {
    const double gt = std::numbers::pi * k / purity_steps;
    purity.add_row({static_cast<long long>(purity_n), gt,
                    single_qubit_purity(evolve(equal, CollectiveHamiltonian::enhanced_NJz, gt, 1.0)),
                    single_qubit_purity(evolve(twist, CollectiveHamiltonian::quadratic_Jz2, gt, 1.0))});
  }
  w.emit("purity.csv", purity, "single-atom purity under N J_z and J_z^2 couplings");
  return w.finish();
}

/// Scaling-exponent table versus hardness and the critical-number report.
inline std::vector<fs::path> cmd_scaling(RunOptions& opt) {
  detail::Settings s(opt.config);
  const Species sp = detail::species(s, opt, "typical");
  const double rho0 = s.number("trap", "rho0_um", 1.0) * units::um;
  const double r0 = s.number("trap", "r0_um", 100.0) * units::um;
  const auto q_list = s.numbers("sweep", "q", {1, 2, 3, 4, 5, 6, 8, 10, 20, 50});
  detail::Writer w(opt, "scaling");

  auto rational_text = [](const Rational& r) {
    return std::to_string(r.numerator()) + (r.denominator() == 1 ? "" : "/" + std::to_string(r.denominator()));
  };
  std::vector<Hardness> hs;
  for (double q : q_list) {
    if (!(q >= 1.0) || q != std::floor(q)) throw ConfigError("[sweep] q: hardness values must be positive integers");
    hs.push_back(Hardness::power(static_cast<int>(q)));
  }
  hs.push_back(Hardness::hard_wall());
  CsvTable fig({"q", "xi_1d", "xi_2d", "xi_3d", "xi_1d_value", "xi_2d_value", "xi_3d_value"});
  for (const auto& row : fig1_table(hs)) {
    fig.add_row({row.q.label(), rational_text(row.xi_1d), rational_text(row.xi_2d), rational_text(row.xi_3d),
                 to_double(row.xi_1d), to_double(row.xi_2d), to_double(row.xi_3d)});
  }
  w.emit("fig1_exponents.csv", fig, "intermediate-regime exponent xi versus trap hardness");

  CsvTable crit({"d", "q", "N_L", "N_T", "xi_bare", "xi_intermediate", "xi_full"});
  for (int d = 1; d <= 3; ++d) {
    const auto geom = trap_from_lengths(d, Hardness::power(2), rho0, r0, sp.mass());
    const auto c = critical_numbers(geom, sp.a11());
    const std::string full = d == 3 ? "" : rational_text(scaling_exponent(d, Hardness::power(2), Regime::full));
    crit.add_row({static_cast<long long>(d), std::string("2"), c.n_lower, c.n_upper.value_or(std::nan("")),
                  rational_text(scaling_exponent(d, Hardness::power(2), Regime::bare)),
                  rational_text(scaling_exponent(d, Hardness::power(2), Regime::intermediate)), full});
  }
  w.emit("critical_numbers.csv", crit, "critical atom numbers and exponents for harmonic traps");
  return w.finish();
}

/// Ground-state sweep, two-mode overlap against the Gaussian form, loss budget.
inline std::vector<fs::path> cmd_condensate(RunOptions& opt) {
  detail::Settings s(opt.config);
  const Species sp = detail::species(s, opt, "rb87");
  const TrapGeometry geom = detail::trap(s, sp);
  GridPolicy policy;
  policy.min_points = static_cast<int>(s.integer("grid", "min_points", policy.min_points));
  policy.extent_factor = s.number("grid", "extent_factor", policy.extent_factor);
  GroundStateOptions gso;
  gso.tolerance = s.number("grid", "tolerance", gso.tolerance);
  gso.max_steps = s.integer("grid", "max_steps", gso.max_steps);
  const auto ratios = s.numbers("sweep", "n_over_nl", {100, 200, 500, 1000});
  detail::require_ascending(ratios, "[sweep] n_over_nl");
  const double evolve_ratio = s.number("protocol", "evolve_n_over_nl", 1000.0);
  const double omega_t_max = s.number("protocol", "omega_t_max", 0.5);
  const double loss_gamma_t = s.number("protocol", "loss_gamma_t", 0.3);
  const double theta = s.number("protocol", "theta", 0.5 * std::numbers::pi);
  const long records = s.integer("protocol", "records", 50);
  if (records < 1) throw ConfigError("[protocol] records must be positive");
  const Superposition sup = Superposition::from_polar(theta);
  const double nl = critical_numbers(geom, sp.a11()).n_lower;
  detail::Writer w(opt, "condensate");

  std::vector<double> n_list;
  for (double r : ratios) n_list.push_back(1.0 + r * (nl - 1.0));
  const auto rows = eta_sweep(geom, sp, n_list, policy, gso, opt.threads);
  CsvTable eta({"N", "n_over_nl", "eta_N_gp", "eta_N_tf", "gp_over_tf", "local_slope", "residual"});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    eta.add_row({rows[i].n_atoms, ratios[i], rows[i].eta_N, rows[i].eta_N_tf, rows[i].eta_N / rows[i].eta_N_tf,
                 rows[i].local_slope, rows[i].residual});
  }
  if (rows.size() >= 2) {
    const double slope = std::log(rows.back().eta_N / rows.front().eta_N) /
                         std::log((rows.back().n_atoms - 1.0) / (rows.front().n_atoms - 1.0));
    eta.comment("end-to-end log slope = " + detail::fmt(slope));
  }
  w.emit("eta_sweep.csv", eta, "numerical eta_N against the Thomas-Fermi prediction");

  const double n_evolve = 1.0 + evolve_ratio * (nl - 1.0);
  const auto gs = ground_state(geom, sp, n_evolve, policy, gso);
  {
    std::ostringstream snap;
    write_snapshot(snap, gs.field, geom.r0());
    write_file_atomic(opt.out_dir / "ground_state.field", snap.str());
  }
  const auto ph = phase_dynamics(geom, sp, n_evolve, sup);
  const auto budget = loss_budget(sp, geom, n_evolve, sup);

  CsvTable ov({"t_s", "omega_t", "overlap_abs", "overlap_arg", "gaussian_abs", "gaussian_arg", "p1", "p2", "norm1",
               "norm2"});
  if (omega_t_max > 0.0) {
    const double t = omega_t_max / std::abs(ph.omega_N);
    const long steps = recommended_steps(gs, sp, geom, t);
    EvolutionOptions eo;
    eo.record_every = std::max(1L, steps / records);
    const auto rec = evolve_two_mode(gs.field, sup, sp, geom, t, steps, eo);
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
      const auto g = overlap_gaussian(ph, rec.times[i]);
      ov.add_row({rec.times[i], ph.omega_N * rec.times[i], std::abs(rec.overlap[i]), std::arg(rec.overlap[i]),
                  std::abs(g), std::arg(g), rec.p1[i], rec.p2[i], rec.norm1[i], rec.norm2[i]});
    }
  }
  w.emit("overlap.csv", ov, "coupled two-mode overlap against the Gaussian form");

  CsvTable loss({"N", "Gamma_per_s", "Omega_N_per_s", "Gamma_over_Omega", "closed_form", "tau_pd_s"});
  loss.add_row({n_evolve, budget.gamma, ph.omega_N, budget.ratio, budget.ratio_closed_form, ph.tau_pd});
  w.emit("loss_budget.csv", loss, "spin-exchange loss rate against the phase frequency");

  CsvTable decay({"t_s", "gamma_t", "amplitude_ratio", "exp_minus_gamma_t", "norm1", "norm2"});
  if (loss_gamma_t > 0.0 && budget.gamma > 0.0) {
    const double t = loss_gamma_t / budget.gamma;
    const long steps = recommended_steps(gs, sp, geom, t);
    EvolutionOptions lossy, clean;
    lossy.loss = true;
    lossy.record_every = clean.record_every = std::max(1L, steps / records);
    const auto a = evolve_two_mode(gs.field, sup, sp, geom, t, steps, lossy);
    const auto b = evolve_two_mode(gs.field, sup, sp, geom, t, steps, clean);
    for (std::size_t i = 0; i < a.times.size(); ++i) {
      decay.add_row({a.times[i], budget.gamma * a.times[i], std::abs(a.overlap[i]) / std::abs(b.overlap[i]),
                     std::exp(-budget.gamma * a.times[i]), a.norm1[i], a.norm2[i]});
    }
  }
  w.emit("loss_decay.csv", decay, "fringe amplitude with loss relative to the lossless run");
  return w.finish();
}

/// Analytic and Monte Carlo delta_gamma under counting noise.
inline std::vector<fs::path> cmd_counting(RunOptions& opt) {
  detail::Settings s(opt.config);
  const auto n_list = detail::to_counts(s.numbers("sweep", "n", {100, 1000}), "[sweep] n");
  const auto sigma_rel = s.numbers("sweep", "sigma_over_sqrt_n", {0.0, 0.25, 0.5, 1.0});
  const double t = s.number("protocol", "t", 1.0);
  const double phase = s.number("protocol", "phase", 0.5 * std::numbers::pi);
  const long long trials = s.integer("protocol", "trials", 100000);
  const double prior_fraction = s.number("protocol", "prior_fraction", 0.1);
  if (trials < 1) throw ConfigError("[protocol] trials must be positive");
  if (!(t > 0.0)) throw ConfigError("[protocol] t must be positive");
  detail::Writer w(opt, "counting");

  CsvTable table({"sigma", "N", "gamma", "delta_gamma_analytic", "delta_gamma_mc", "mc_stderr",
                  "delta_gamma_mc_linear", "mc_linear_stderr", "penalty", "penalty_law", "quantum_limit"});
  const auto model = ramsey_model(t);
  const double gamma = phase / t;
  std::uint64_t stream = 0;
  for (int n : n_list) {
    for (double rel : sigma_rel) {
      if (!(rel >= 0.0)) throw ConfigError("[sweep] sigma_over_sqrt_n must be non-negative");
      const CountingNoise noise(rel * std::sqrt(static_cast<double>(n)));
      const auto post = posterior_n0(NumberPrior::flat(n, prior_fraction), n, noise);
      const double analytic = corrected_uncertainty(model, post, noise, gamma).delta_gamma;
      const double quantum = corrected_uncertainty(model, post, CountingNoise(0.0), gamma).delta_gamma;
      const std::uint64_t seed = opt.seed + 0x9E3779B97F4A7C15ULL * ++stream;
      const auto mc = simulate_counts(model, post, noise, gamma, static_cast<std::size_t>(trials), seed, opt.threads);
      const auto lin = simulate_counts(model, post, noise, gamma, static_cast<std::size_t>(trials), seed, opt.threads,
                                       Inversion::linear);
      const double var = ramsey_signal(n, phase).variance;
      table.add_row({noise.sigma, static_cast<long long>(n), gamma, analytic, mc.delta_gamma, mc.stderr_delta,
                     lin.delta_gamma, lin.stderr_delta, analytic / quantum, counting_penalty(noise.sigma, var),
                     ramsey_uncertainty(n, t).delta_gamma});
    }
  }
  w.emit("counting.csv", table, "delta_gamma with atom-counting noise, analytic and Monte Carlo");
  return w.finish();
}

/// Parses argv and dispatches; returns the process exit code.
inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"becmet: condensate interferometer sensitivity toolkit"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out", preset;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool index = false;
  app.add_option("--config", config_path, "key-value config file ([species] [trap] [grid] [sweep] [protocol])");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "Monte Carlo seed");
  app.add_option("--threads", threads, "worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--preset", preset, "species preset")->check(CLI::IsMember({"rb87", "typical"}));
  app.add_flag("--json-index", index, "also write a JSON index of the emitted files");
  auto* bounds = app.add_subcommand("bounds", "sensitivity of simulated protocols against the bounds");
  auto* scaling = app.add_subcommand("scaling", "exponent table and critical atom numbers");
  auto* condensate = app.add_subcommand("condensate", "GP ground states, overlaps and loss budget");
  auto* counting = app.add_subcommand("counting", "sensitivity with atom-counting noise");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    RunOptions opt;
    if (!config_path.empty()) opt.config = KeyValueConfig::load(config_path);
    opt.out_dir = out_dir;
    opt.seed = seed;
    opt.threads = threads;
    opt.json_index = index;
    if (!preset.empty()) opt.preset = preset;
    std::vector<fs::path> files;
    if (bounds->parsed()) files = cmd_bounds(opt);
    if (scaling->parsed()) files = cmd_scaling(opt);
    if (condensate->parsed()) files = cmd_condensate(opt);
    if (counting->parsed()) files = cmd_counting(opt);
    for (const auto& f : files) out << f.string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ConvergenceError& e) {
    err << "solver did not converge: " << e.what() << '\n';
    return 3;
  } catch (const InstabilityError& e) {
    err << "solver unstable: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace becmet::cli
