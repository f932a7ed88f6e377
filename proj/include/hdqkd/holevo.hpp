#pragma once

#include "hdqkd/covariance.hpp"

namespace hdqkd {

struct SymplecticData {
  double i1 = 0.0;      // det[g'_AA] + det[g'_BB] + 2 det[g'_AB]
  double i2 = 0.0;      // det Gamma'
  double d_plus = 0.0;
  double d_minus = 0.0;
};

/// f(x) = (x+1/2) log2(x+1/2) - (x-1/2) log2(x-1/2); 0 at x = 1/2 and within
/// the 1e-9 tolerance band below it. Throws below 1/2 - 1e-9.
double entropy_f(double x);

SymplecticData symplectic_data(const CovMatrix4& gamma);

/// S(rho_AB) = f(d+) + f(d-); requires a physical matrix.
double joint_entropy(const CovMatrix4& gamma_prime);

/// S(rho_B|T_A) = f(sqrt(det of the t_A-conditioned Bob block)).
double conditional_entropy_given_ta(const CovMatrix4& gamma_prime);

/// chi = S(rho_AB) - S(rho_B|T_A), floored at 0.
double holevo_given_noise(const EveNoise& noise, const CovParams& params);

struct HolevoBound {
  bool defined = false;  // false when no feasible attack exists
  double chi = 0.0;
  EveNoise argmax;       // (eta*, eps*) attaining the maximum
  EtaInterval interval;
};

/// Maximize Eve's Holevo information over the feasible eta interval
/// (200-point grid + golden-section to |d eta| < 1e-7, ties to smaller eta).
/// Symmetric case only: xi_t must equal xi_omega.
HolevoBound holevo_upper_bound(double xi_t, double xi_omega, const CovParams& params);

}  // namespace hdqkd
