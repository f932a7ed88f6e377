#include "hdqkd/holevo.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hdqkd {

namespace {

constexpr double kEigenvalueTol = 1e-9;

double golden_max(double lo, double hi, const std::function<double(double)>& f) {
  constexpr double kGr = 0.6180339887498949;  // (sqrt(5)-1)/2
  double a = lo, b = hi;
  double x1 = b - kGr * (b - a);
  double x2 = a + kGr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-7) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGr * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGr * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double entropy_f(double x) {
  if (x < 0.5 - kEigenvalueTol) {
    throw std::domain_error("entropy_f: symplectic eigenvalue below 1/2");
  }
  if (x <= 0.5) return 0.0;  // tolerance band and the pure-mode limit
  return (x + 0.5) * std::log2(x + 0.5) - (x - 0.5) * std::log2(x - 0.5);
}

SymplecticData symplectic_data(const CovMatrix4& gamma) {
  SymplecticData out;
  out.i1 = gamma.det_aa() + gamma.det_bb() + 2.0 * gamma.det_ab();
  out.i2 = gamma.det_full();
  auto [dp, dm] = gamma.symplectic_eigenvalues();
  out.d_plus = dp;
  out.d_minus = dm;
  return out;
}

double joint_entropy(const CovMatrix4& gamma_prime) {
  auto [dp, dm] = gamma_prime.symplectic_eigenvalues();
  return entropy_f(dp) + entropy_f(dm);
}

double conditional_entropy_given_ta(const CovMatrix4& gamma_prime) {
  double det = gamma_prime.conditional_det_given_ta();
  if (det < 0.25 * (1.0 - 4.0 * kEigenvalueTol)) {
    throw std::domain_error("conditional_entropy_given_ta: non-physical conditional state");
  }
  return entropy_f(std::sqrt(std::max(det, 0.0)));
}

double holevo_given_noise(const EveNoise& noise, const CovParams& params) {
  const CovMatrix4 attacked = attacked_covariance(base_covariance(params), noise);
  double chi = joint_entropy(attacked) - conditional_entropy_given_ta(attacked);
  return std::max(chi, 0.0);  // negative only from pure-boundary roundoff
}

HolevoBound holevo_upper_bound(double xi_t, double xi_omega, const CovParams& params) {
  if (xi_t != xi_omega) {
    throw std::invalid_argument("holevo_upper_bound: symmetric case requires xi_t == xi_omega");
  }
  const double xi = xi_t;
  const double d = params.schmidt_d();

  HolevoBound out;
  out.interval = feasible_eta_interval(xi, d, params);
  if (out.interval.empty) return out;  // undefined: caller yields zero key

  auto chi_at = [&](double eta) {
    return holevo_given_noise(eve_noise_from_eta(eta, xi, d), params);
  };

  const double lo = out.interval.lo, hi = out.interval.hi;
  constexpr int kGridPoints = 200;
  double best_eta = lo;
  double best_chi = chi_at(lo);
  int best_idx = 0;
  for (int i = 1; i < kGridPoints; ++i) {
    double eta = lo + (hi - lo) * i / (kGridPoints - 1);
    double chi = chi_at(eta);
    if (chi > best_chi) {  // strict: ties keep the smaller eta
      best_chi = chi;
      best_eta = eta;
      best_idx = i;
    }
  }
  // refine around the best grid sample
  double span = (hi - lo) / (kGridPoints - 1);
  double rlo = std::max(lo, best_eta - span);
  double rhi = std::min(hi, best_eta + span);
  (void)best_idx;
  std::function<double(double)> f = chi_at;
  double refined = golden_max(rlo, rhi, f);
  double refined_chi = chi_at(refined);
  if (refined_chi > best_chi || (refined_chi == best_chi && refined < best_eta)) {
    best_chi = refined_chi;
    best_eta = refined;
  }

  out.defined = true;
  out.chi = best_chi;
  out.argmax = eve_noise_from_eta(best_eta, xi, d);
  return out;
}

}  // namespace hdqkd
