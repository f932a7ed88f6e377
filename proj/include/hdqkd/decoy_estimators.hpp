#pragma once

#include <string>

#include "hdqkd/photon_stats.hpp"

namespace hdqkd {

enum class Protocol {
  infinite_decoy,
  two_decoy,
  one_decoy,
  no_decoy,
  ideal_single_photon,  // reference: unit single-pair fraction
};

std::string protocol_name(Protocol p);
Protocol protocol_from_name(const std::string& name);

/// Channel-parameter bounds a given decoy protocol can certify from the
/// measured observables alone. Estimators read nothing of the scenario
/// beyond (p_d, eta_A): Eve cannot touch those.
struct BoundSet {
  Protocol protocol = Protocol::infinite_decoy;
  double c0_lb = 0.0;
  double c0_ub = 1.0;
  double c1_lb = 0.0;
  double single_pair_fraction_lb = 0.0;  // F_mu lower bound, clamped to [0,1]
  double excess_noise_t_ub = 0.0;        // xi_t upper bound, clamped to >= 0
  double excess_noise_omega_ub = 0.0;
  bool security_derivable = true;

  struct Diagnostics {
    int f_branch = -1;        // which max-branch won the F bound
    int xi_branch_t = -1;     // which min-expression won the xi bound
    int xi_branch_omega = -1;
    bool f_clamped = false;
    bool xi_clamped = false;
    double f_raw = 0.0;       // pre-clamp F bound
    std::string note;
  } diag;
};

// Postselection probabilities below this are treated as "no signal":
// estimators return the no-security marker instead of amplified fp noise.
inline constexpr double kMinPostselectProb = 1e-14;

BoundSet bounds_two_decoy(const Observables& obs, double mu, double nu1, double nu2,
                          double p_dark);
BoundSet bounds_one_decoy(const Observables& obs, double mu, double nu, double p_dark);
BoundSet bounds_no_decoy(const Observables& obs, double mu, double eta_a, double p_dark);

/// Infinite-decoy limit: the true values, usable as the estimator oracle.
BoundSet exact_reference_infinite(const Scenario& scn);

}  // namespace hdqkd
