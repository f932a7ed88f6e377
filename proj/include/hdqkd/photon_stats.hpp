#pragma once

#include <array>
#include <span>
#include <vector>

#include "hdqkd/scenario.hpp"

namespace hdqkd {

// Poisson tail mass below which the emission-number series are truncated.
inline constexpr double kPoissonTailMass = 1e-12;

double poisson_pmf(double lambda, int n);

/// Smallest N whose Poisson upper-tail mass is below `tail_mass`.
int poisson_truncation(double lambda, double tail_mass = kPoissonTailMass);

/// C_n: probability both sides register >= 1 detection given n pairs, no Eve.
double coincidence_prob_no_eve(int n, const Scenario& scn);

/// P_lambda as the truncated emission-number series.
double postselect_prob(double lambda, const Scenario& scn);

/// Cancellation-safe closed form of P_lambda (series resummation).
double postselect_prob_closed_form(double lambda, const Scenario& scn);

/// F_lambda: fraction of postselected frames due to single-pair emissions.
double single_pair_fraction(double lambda, const Scenario& scn);

/// Conditional probabilities of the five arrival-time cases, given
/// postselection: (1) true coincidence, (2) multi-pair or single-pair with a
/// dark count, (3) Alice photon / Bob dark, (4) Bob photon / Alice dark,
/// (5) double dark. pi2 is kept as its two separately inspectable terms.
struct CaseWeights {
  double pi1 = 0.0;
  double pi2_multi_pair = 0.0;
  double pi2_single_pair_dark = 0.0;
  double pi3 = 0.0;
  double pi4 = 0.0;
  double pi5 = 0.0;

  double pi2() const { return pi2_multi_pair + pi2_single_pair_dark; }
  double sum() const { return pi1 + pi2() + pi3 + pi4 + pi5; }
  std::array<double, 5> as_array() const { return {pi1, pi2(), pi3, pi4, pi5}; }
};

CaseWeights case_probabilities(double mu, const Scenario& scn);

/// What Alice and Bob measure per intensity: the postselection probability
/// and the averaged excess-noise multipliers.
struct Observables {
  struct Entry {
    double intensity = 0.0;
    double postselect = 0.0;   // P_lambda
    double xi_mult_t = 0.0;    // Xi_{t,lambda}
    double xi_mult_omega = 0.0;
  };
  std::vector<Entry> entries;

  const Entry& at(double intensity) const;
  bool has(double intensity) const;
};

/// Simulate the measured observables with the channel set by the scenario
/// (counting statistics Eve-absent) and the noise multipliers built from the
/// scenario's xi and delta-Xi.
Observables simulated_observables(std::span<const double> intensities, const Scenario& scn);

}  // namespace hdqkd
