#pragma once

// Imperfect atom counting. Each level count picks up independent Gaussian
// noise of width sigma, so the measured N carries variance 2 sigma^2 and
// m = (n1 - n2)/2 carries sigma^2/2. The participating number N0 is only
// known through a prior, refined by the measured N.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "becmet/errors.hpp"
#include "becmet/metrology.hpp"
#include "becmet/parallel.hpp"

namespace becmet {

struct CountingNoise {
  double sigma = 0.0;

  explicit CountingNoise(double s = 0.0) : sigma(s) {
    if (!(s >= 0.0)) throw DomainError("CountingNoise: sigma must be non-negative");
  }
  double number_variance() const { return 2.0 * sigma * sigma; }
  double difference_variance() const { return 0.5 * sigma * sigma; }
};

/// Discrete distribution over atom counts.
class NumberPrior {
 public:
  NumberPrior(std::vector<int> support, std::vector<double> probabilities)
      : support_(std::move(support)), p_(std::move(probabilities)) {
    if (support_.empty() || support_.size() != p_.size()) {
      throw DomainError("NumberPrior: support and probabilities must be non-empty and the same length");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) {
      if (!(p_[i] >= 0.0)) throw DomainError("NumberPrior: probabilities must be non-negative");
      if (support_[i] < 1) throw DomainError("NumberPrior: atom counts must be positive");
      total += p_[i];
    }
    if (!(total > 0.0)) throw DomainError("NumberPrior: zero total probability");
    for (auto& v : p_) v /= total;
  }

  static NumberPrior point(int n) { return NumberPrior({n}, {1.0}); }

  /// Flat over the integers in [N(1-f), N(1+f)].
  static NumberPrior flat(int n, double fraction = 0.1) {
    if (!(fraction >= 0.0 && fraction < 1.0)) throw DomainError("NumberPrior::flat: fraction must lie in [0, 1)");
    const int lo = std::max(1, static_cast<int>(std::ceil(n * (1.0 - fraction))));
    const int hi = static_cast<int>(std::floor(n * (1.0 + fraction)));
    std::vector<int> s;
    for (int k = lo; k <= hi; ++k) s.push_back(k);
    return NumberPrior(s, std::vector<double>(s.size(), 1.0));
  }

  const std::vector<int>& support() const { return support_; }
  const std::vector<double>& probabilities() const { return p_; }
  std::size_t size() const { return support_.size(); }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) m += p_[i] * support_[i];
    return m;
  }
  double variance() const {
    const double m = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) v += p_[i] * (support_[i] - m) * (support_[i] - m);
    return v;
  }
  /// Half-width at half maximum, interpolated between support points.
  double half_width() const {
    const auto peak = std::max_element(p_.begin(), p_.end());
    const double half = 0.5 * *peak;
    const std::size_t c = static_cast<std::size_t>(peak - p_.begin());
    auto edge = [&](int dir) {
      std::size_t i = c;
      while (true) {
        const std::size_t next = i + dir;
        if (next >= p_.size()) return static_cast<double>(support_[i]);
        if (p_[next] < half) {
          const double f = (p_[i] - half) / (p_[i] - p_[next]);
          return support_[i] + f * (support_[next] - support_[i]);
        }
        i = next;
      }
    };
    return 0.5 * (edge(1) - edge(-1));
  }

 private:
  std::vector<int> support_;
  std::vector<double> p_;
};

/// p(N0 | N) proportional to exp(-(N - N0)^2 / (4 sigma^2)) p(N0).
inline NumberPrior posterior_n0(const NumberPrior& prior, double measured_n, const CountingNoise& noise) {
  std::vector<int> s;
  std::vector<double> p;
  if (noise.sigma == 0.0) {
    for (std::size_t i = 0; i < prior.size(); ++i) {
      if (prior.support()[i] == measured_n && prior.probabilities()[i] > 0.0) return NumberPrior::point(prior.support()[i]);
    }
    throw DomainError("posterior_n0: measured N has zero prior probability");
  }
  const double var2 = 2.0 * noise.number_variance();
  // Work relative to the largest exponent so narrow likelihoods do not underflow.
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (prior.probabilities()[i] <= 0.0) continue;
    const double d = measured_n - prior.support()[i];
    best = std::max(best, -d * d / var2);
  }
  for (std::size_t i = 0; i < prior.size(); ++i) {
    if (prior.probabilities()[i] <= 0.0) continue;
    const double d = measured_n - prior.support()[i];
    const double w = std::exp(-d * d / var2 - best) * prior.probabilities()[i];
    if (w > 0.0) {
      s.push_back(prior.support()[i]);
      p.push_back(w);
    }
  }
  if (s.empty()) throw DomainError("posterior_n0: empty support");
  return NumberPrior(s, p);
}

/// <J_z>, Delta^2 J_z and d<J_z>/dgamma as functions of (N0, gamma), with an
/// optional exact sampler for the readout difference m.
struct QuantumSignalModel {
  std::function<double(int, double)> mean;
  std::function<double(int, double)> variance;
  std::function<double(int, double)> derivative;
  std::function<double(int, double, std::mt19937_64&)> sample;
  /// Inverse of mean(N, .) on the operating branch, if known in closed form.
  std::function<double(double, double)> invert;
};

/// Product-state Ramsey readout after phase gamma t.
inline QuantumSignalModel ramsey_model(double t) {
  detail::require_positive_time(t, "ramsey_model");
  QuantumSignalModel m;
  m.mean = [t](int n, double g) { return ramsey_signal(n, g * t).mean; };
  m.variance = [t](int n, double g) { return ramsey_signal(n, g * t).variance; };
  m.derivative = [t](int n, double g) { return -0.5 * n * t * std::sin(g * t); };
  // n1 ~ Binomial(N0, cos^2(phi/2)); m = n1 - N0/2.
  m.sample = [t](int n, double g, std::mt19937_64& rng) {
    const double c = std::cos(0.5 * g * t);
    std::binomial_distribution<int> draw(n, c * c);
    return draw(rng) - 0.5 * n;
  };
  m.invert = [t](double n, double signal) { return std::acos(std::clamp(2.0 * signal / n, -1.0, 1.0)) / t; };
  return m;
}

struct CorrectedMoments {
  double mean;
  double variance;
  double slope;  // posterior-averaged d<m>/dgamma
};

enum class PosteriorAverage { exact, at_mean };

/// Moments of the noisy difference m' averaged over p(N0 | N). The at_mean
/// path evaluates everything at the (rounded) posterior mean instead.
inline CorrectedMoments corrected_moments(const QuantumSignalModel& model, const NumberPrior& posterior,
                                          const CountingNoise& noise, double gamma,
                                          PosteriorAverage mode = PosteriorAverage::exact) {
  if (mode == PosteriorAverage::at_mean) {
    return corrected_moments(model, NumberPrior::point(static_cast<int>(std::lround(posterior.mean()))), noise, gamma);
  }
  double mean = 0.0, second = 0.0, slope = 0.0;
  for (std::size_t i = 0; i < posterior.size(); ++i) {
    const int n = posterior.support()[i];
    const double p = posterior.probabilities()[i];
    const double mu = model.mean(n, gamma);
    mean += p * mu;
    second += p * (mu * mu + model.variance(n, gamma));
    slope += p * model.derivative(n, gamma);
  }
  return {mean, noise.difference_variance() + second - mean * mean, slope};
}

/// delta_gamma^2 = (sigma^2/2 + Delta^2 J_z) / |d<J_z>/dgamma|^2 with posterior-averaged moments.
inline SensitivityResult corrected_uncertainty(const QuantumSignalModel& model, const NumberPrior& posterior,
                                               const CountingNoise& noise, double gamma,
                                               PosteriorAverage mode = PosteriorAverage::exact) {
  const auto m = corrected_moments(model, posterior, noise, gamma, mode);
  if (m.slope == 0.0) throw DomainError("corrected_uncertainty: signal slope vanishes, sensitivity undefined");
  return {std::sqrt(std::max(0.0, m.variance)) / std::abs(m.slope)};
}

/// Ramsey penalty factor sqrt(1 + sigma^2 / (2 Delta^2 J_z)).
inline double counting_penalty(double sigma, double quantum_variance) {
  if (!(quantum_variance > 0.0)) throw DomainError("counting_penalty: quantum variance must be positive");
  return std::sqrt(1.0 + sigma * sigma / (2.0 * quantum_variance));
}

struct MonteCarloResult {
  std::vector<double> estimates;  // gamma estimates, one per trial
  double mean = 0.0;
  double delta_gamma = 0.0;  // sample standard deviation
  double stderr_delta = 0.0;  // standard error of delta_gamma
  std::size_t clipped = 0;   // trials whose signal fell outside the invertible range
};

namespace detail {
inline constexpr std::size_t kTrialsPerChunk = 4096;
}

/// exact: invert the mean signal in closed form when the model provides it.
/// linear: first-order inversion about the operating point, which isolates
/// the moment propagation from estimator curvature.
enum class Inversion { exact, linear };

/// Monte Carlo of the counting pipeline: N0 from `numbers`, m from the exact
/// sampler (Gaussian surrogate otherwise), counting noise sigma/sqrt(2) on m,
/// gamma recovered by inverting the number-averaged mean signal. Trials are
/// split into fixed chunks seeded by (seed, chunk index), so results do not
/// depend on the thread count.
inline MonteCarloResult simulate_counts(const QuantumSignalModel& model, const NumberPrior& numbers,
                                        const CountingNoise& noise, double gamma, std::size_t trials,
                                        std::uint64_t seed, unsigned threads = 1,
                                        Inversion inversion = Inversion::exact) {
  if (trials < 1) throw DomainError("simulate_counts: need at least one trial");
  const double n_bar = numbers.mean();
  const auto moments = corrected_moments(model, numbers, CountingNoise(0.0), gamma);
  if (moments.slope == 0.0) throw DomainError("simulate_counts: signal slope vanishes");

  std::vector<std::size_t> chunks((trials + detail::kTrialsPerChunk - 1) / detail::kTrialsPerChunk);
  std::iota(chunks.begin(), chunks.end(), std::size_t{0});
  std::discrete_distribution<std::size_t> pick_template(numbers.probabilities().begin(), numbers.probabilities().end());

  struct Chunk {
    std::vector<double> est;
    std::size_t clipped = 0;
  };
  auto run = [&](std::size_t chunk) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk)};
    std::mt19937_64 rng(seq);
    auto pick = pick_template;
    std::normal_distribution<double> unit(0.0, 1.0);
    const std::size_t begin = chunk * detail::kTrialsPerChunk;
    const std::size_t end = std::min(trials, begin + detail::kTrialsPerChunk);
    Chunk out;
    out.est.reserve(end - begin);
    for (std::size_t k = begin; k < end; ++k) {
      const int n0 = numbers.support()[pick(rng)];
      double m;
      if (model.sample) {
        m = model.sample(n0, gamma, rng);
      } else {
        m = model.mean(n0, gamma) + std::sqrt(model.variance(n0, gamma)) * unit(rng);
      }
      m += std::sqrt(noise.difference_variance()) * unit(rng);
      double est;
      if (model.invert && inversion == Inversion::exact) {
        if (std::abs(2.0 * m / n_bar) > 1.0) ++out.clipped;
        est = model.invert(n_bar, m);
      } else {
        est = gamma + (m - moments.mean) / moments.slope;
      }
      out.est.push_back(est);
    }
    return out;
  };
  const auto parts = parallel_map(chunks, threads, run);

  MonteCarloResult r;
  r.estimates.reserve(trials);
  for (const auto& c : parts) {
    r.estimates.insert(r.estimates.end(), c.est.begin(), c.est.end());
    r.clipped += c.clipped;
  }
  const double n = static_cast<double>(r.estimates.size());
  r.mean = std::accumulate(r.estimates.begin(), r.estimates.end(), 0.0) / n;
  double m2 = 0.0, m4 = 0.0;
  for (double e : r.estimates) {
    const double d = (e - r.mean) * (e - r.mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  r.delta_gamma = std::sqrt(m2 * n / std::max(1.0, n - 1.0));
  // Var(s^2) ~ (m4 - m2^2)/n, then the delta method for s.
  r.stderr_delta = n > 1.0 ? std::sqrt(std::max(0.0, m4 - m2 * m2) / n) / (2.0 * std::sqrt(m2)) : 0.0;
  return r;
}

}  // namespace becmet
