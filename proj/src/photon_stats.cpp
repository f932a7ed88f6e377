#include "hdqkd/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hdqkd {

namespace {

constexpr int kMaxTerms = 512;

struct ChannelView {
  double eta_a;
  double eta_bp;
  double p_d;
};

ChannelView channel_of(const Scenario& scn) {
  return {scn.eta_a(), scn.eta_bp(), scn.dark_prob()};
}

double coincidence_prob(int n, const ChannelView& ch) {
  double q = 1.0 - ch.p_d;
  double miss_a = std::pow(1.0 - ch.eta_a, n);
  double miss_b = std::pow(1.0 - ch.eta_bp, n);
  return (1.0 - miss_a * q) * (1.0 - miss_b * q);
}

}  // namespace

double poisson_pmf(double lambda, int n) {
  if (lambda < 0.0) throw std::invalid_argument("poisson_pmf: lambda < 0");
  if (n < 0) throw std::invalid_argument("poisson_pmf: n < 0");
  if (lambda == 0.0) return n == 0 ? 1.0 : 0.0;
  if (n > 20) {
    return std::exp(n * std::log(lambda) - lambda - std::lgamma(n + 1.0));
  }
  double pmf = std::exp(-lambda);
  for (int k = 1; k <= n; ++k) pmf *= lambda / k;
  return pmf;
}

int poisson_truncation(double lambda, double tail_mass) {
  if (lambda < 0.0) throw std::invalid_argument("poisson_truncation: lambda < 0");
  if (lambda == 0.0) return 0;
  double pmf = std::exp(-lambda);
  double cdf = pmf;
  int n = 0;
  while (1.0 - cdf >= tail_mass && n < kMaxTerms) {
    ++n;
    pmf *= lambda / n;
    cdf += pmf;
  }
  return n;
}

double coincidence_prob_no_eve(int n, const Scenario& scn) {
  if (n < 0) throw std::invalid_argument("coincidence_prob_no_eve: n < 0");
  return coincidence_prob(n, channel_of(scn));
}

namespace {

// Truncation for the emission-number series: the spec'd absolute tail-mass
// policy, extended until the remaining mass is also negligible relative to
// the accumulated sum (the absolute policy alone cannot reach 1e-10 relative
// accuracy when P itself is small).
int series_truncation(double lambda, const ChannelView& ch) {
  if (lambda == 0.0) return 0;
  double pmf = std::exp(-lambda);
  double cdf = pmf;
  double partial = pmf * coincidence_prob(0, ch);
  int n = 0;
  while (n < kMaxTerms) {
    double tail = 1.0 - cdf;
    if (tail < kPoissonTailMass && tail <= 1e-12 * partial) break;
    ++n;
    pmf *= lambda / n;
    cdf += pmf;
    partial += pmf * coincidence_prob(n, ch);
  }
  return n;
}

}  // namespace

double postselect_prob(double lambda, const Scenario& scn) {
  if (lambda < 0.0) throw std::invalid_argument("postselect_prob: lambda < 0");
  const ChannelView ch = channel_of(scn);
  const int n_max = series_truncation(lambda, ch);
  double total = 0.0;
  double pmf = std::exp(-lambda);
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) pmf *= lambda / n;
    total += pmf * coincidence_prob(n, ch);
  }
  return total;
}

double postselect_prob_closed_form(double lambda, const Scenario& scn) {
  if (lambda < 0.0) throw std::invalid_argument("postselect_prob_closed_form: lambda < 0");
  const ChannelView ch = channel_of(scn);
  const double a = ch.eta_a, b = ch.eta_bp, q = 1.0 - ch.p_d;
  // P = [1 - q e^{-la}] [1 - q e^{-lb}] + q^2 e^{-l(a+b)} (e^{lab} - 1),
  // arranged so every term is positive (no cancellation at small lambda).
  double ta = -std::expm1(-lambda * a) + ch.p_d * std::exp(-lambda * a);
  double tb = -std::expm1(-lambda * b) + ch.p_d * std::exp(-lambda * b);
  return ta * tb + q * q * std::exp(-lambda * (a + b)) * std::expm1(lambda * a * b);
}

double single_pair_fraction(double lambda, const Scenario& scn) {
  double p = postselect_prob(lambda, scn);
  if (p <= 0.0) {
    throw std::domain_error("single_pair_fraction: P_lambda = 0 (degenerate scenario)");
  }
  return lambda * std::exp(-lambda) * coincidence_prob_no_eve(1, scn) / p;
}

CaseWeights case_probabilities(double mu, const Scenario& scn) {
  const ChannelView ch = channel_of(scn);
  const double a = 1.0 - ch.eta_a;   // Alice per-photon miss
  const double b = 1.0 - ch.eta_bp;  // Bob per-photon miss
  const double pd = ch.p_d;
  const double q = 1.0 - pd;
  const int n_max = series_truncation(mu, ch);

  // One truncation for every series, and the same truncated P_mu as the
  // denominator: the five numerators then telescope to P_mu exactly and the
  // weights form a partition to fp roundoff.
  double p_mu = 0.0;
  double multi_pair = 0.0, alice_only = 0.0, bob_only = 0.0, double_dark = 0.0;
  double pmf = std::exp(-mu);
  double an = 1.0, bn = 1.0;  // a^n, b^n
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) {
      pmf *= mu / n;
      an *= a;
      bn *= b;
    }
    p_mu += pmf * (1.0 - an * q) * (1.0 - bn * q);
    if (n >= 2) multi_pair += pmf * (1.0 - an) * (1.0 - bn);
    if (n >= 1) {
      alice_only += pmf * (1.0 - an) * (pd * bn);
      bob_only += pmf * (pd * an) * (1.0 - bn);
    }
    double_dark += pmf * pd * pd * an * bn;
  }
  if (p_mu <= 0.0) throw std::domain_error("case_probabilities: P_mu = 0");

  const double single = mu * std::exp(-mu) * ch.eta_a * ch.eta_bp;
  CaseWeights w;
  w.pi1 = single * q * q / p_mu;
  w.pi2_multi_pair = multi_pair / p_mu;
  w.pi2_single_pair_dark = single * pd * (2.0 - pd) / p_mu;
  w.pi3 = alice_only / p_mu;
  w.pi4 = bob_only / p_mu;
  w.pi5 = double_dark / p_mu;
  return w;
}

const Observables::Entry& Observables::at(double intensity) const {
  for (const auto& e : entries) {
    if (e.intensity == intensity) return e;
  }
  throw std::invalid_argument("Observables: no entry for requested intensity");
}

bool Observables::has(double intensity) const {
  return std::any_of(entries.begin(), entries.end(),
                     [&](const Entry& e) { return e.intensity == intensity; });
}

Observables simulated_observables(std::span<const double> intensities, const Scenario& scn) {
  if (intensities.empty()) {
    throw std::invalid_argument("simulated_observables: no intensities");
  }
  Observables obs;
  obs.entries.reserve(intensities.size());
  for (double lambda : intensities) {
    if (lambda < 0.0) throw std::invalid_argument("simulated_observables: lambda < 0");
    Observables::Entry e;
    e.intensity = lambda;
    e.postselect = postselect_prob(lambda, scn);
    double f = lambda > 0.0 ? single_pair_fraction(lambda, scn) : 0.0;
    e.xi_mult_t = f * (1.0 + scn.noise.xi_t) + (1.0 - f) * scn.noise.delta_xi_t;
    e.xi_mult_omega = f * (1.0 + scn.noise.xi_omega) + (1.0 - f) * scn.noise.delta_xi_omega;
    obs.entries.push_back(e);
  }
  return obs;
}

}  // namespace hdqkd
