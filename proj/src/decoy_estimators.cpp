#include "hdqkd/decoy_estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hdqkd {

namespace {

void require_arg(bool ok, const std::string& violated) {
  if (!ok) throw std::invalid_argument("decoy bounds precondition violated: " + violated);
}

BoundSet no_security(Protocol p, const std::string& why, double f_raw = 0.0) {
  BoundSet b;
  b.protocol = p;
  b.security_derivable = false;
  b.single_pair_fraction_lb = 0.0;
  b.diag.f_raw = f_raw;
  b.diag.note = why;
  return b;
}

struct FClamp {
  double value;
  bool clamped;
};

FClamp clamp_fraction(double f) {
  if (f > 1.0) return {1.0, true};
  if (f < 0.0) return {0.0, true};
  return {f, false};
}

// A sound single-pair bound can never exceed the true fraction, which is
// itself below 1; a raw value above 1 means the formula degenerated (e.g.
// nu1 - nu2 so small that the difference quotients are roundoff noise).
bool numerically_degenerate(double f_raw) { return f_raw > 1.0 + 1e-9; }

// min over the pair-difference and single-intensity expressions; the winning
// branch index is recorded for diagnostics (pairs first, then singles).
struct XiBound {
  double value;
  int branch;
  bool clamped;
};

XiBound xi_upper_bound(const std::vector<std::pair<double, double>>& pairs,
                       const std::vector<double>& singles, const Observables& obs, double mu,
                       double p_mu, double f_lb, bool omega) {
  double best = std::numeric_limits<double>::infinity();
  int branch = -1;
  int idx = 0;
  auto xi_of = [&](const Observables::Entry& e) {
    return omega ? e.xi_mult_omega : e.xi_mult_t;
  };
  for (auto [l1, l2] : pairs) {
    const auto& e1 = obs.at(l1);
    const auto& e2 = obs.at(l2);
    double value = mu * std::exp(-mu) / ((l1 - l2) * f_lb) *
                   (xi_of(e1) * e1.postselect * std::exp(l1) -
                    xi_of(e2) * e2.postselect * std::exp(l2)) /
                   p_mu;
    if (value < best) {
      best = value;
      branch = idx;
    }
    ++idx;
  }
  for (double lambda : singles) {
    if (lambda <= 0.0) {
      ++idx;  // vacuum intensity: the single-lambda expression diverges
      continue;
    }
    const auto& e = obs.at(lambda);
    double value =
        std::exp(lambda - mu) * (mu * e.postselect) / (lambda * p_mu) * xi_of(e) / f_lb;
    if (value < best) {
      best = value;
      branch = idx;
    }
    ++idx;
  }
  double xi = best - 1.0;
  bool clamped = xi < 0.0;
  return {std::max(xi, 0.0), branch, clamped};
}

// F lower bound from a single decoy intensity and an upper bound on C_0.
double f_single_lambda(double mu, double lambda, double p_lambda, double p_mu, double c0_ub) {
  return (mu * mu / (mu * lambda - lambda * lambda)) *
         ((p_lambda / p_mu) * std::exp(lambda - mu) - lambda * lambda / (mu * mu) -
          ((mu * mu - lambda * lambda) / (mu * mu)) * c0_ub * std::exp(-mu) / p_mu);
}

}  // namespace

std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::infinite_decoy: return "infinite";
    case Protocol::two_decoy: return "two-decoy";
    case Protocol::one_decoy: return "one-decoy";
    case Protocol::no_decoy: return "no-decoy";
    case Protocol::ideal_single_photon: return "ideal";
  }
  return "?";
}

Protocol protocol_from_name(const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '_', '-');
  if (n == "infinite" || n == "infinite-decoy") return Protocol::infinite_decoy;
  if (n == "two-decoy" || n == "two") return Protocol::two_decoy;
  if (n == "one-decoy" || n == "one") return Protocol::one_decoy;
  if (n == "no-decoy" || n == "none" || n == "no") return Protocol::no_decoy;
  if (n == "ideal" || n == "ideal-single-photon") return Protocol::ideal_single_photon;
  throw std::invalid_argument("unknown protocol: " + name);
}

BoundSet bounds_two_decoy(const Observables& obs, double mu, double nu1, double nu2,
                          double p_dark) {
  require_arg(nu2 >= 0.0, "nu2 < 0");
  require_arg(nu2 < nu1, "nu2 >= nu1");
  require_arg(nu1 + nu2 < mu, "nu1 + nu2 >= mu");
  const double p_mu = obs.at(mu).postselect;
  const double p1 = obs.at(nu1).postselect;
  const double p2 = obs.at(nu2).postselect;
  if (p_mu < kMinPostselectProb) {
    return no_security(Protocol::two_decoy, "P_mu below noise floor");
  }

  BoundSet b;
  b.protocol = Protocol::two_decoy;
  const double c0_diff =
      (nu1 * p2 * std::exp(nu2) - nu2 * p1 * std::exp(nu1)) / (nu1 - nu2);
  b.c0_lb = std::max(c0_diff, p_dark * p_dark);
  b.c0_ub = p_dark;

  // two-intensity difference bound
  const double denom = mu * nu1 - mu * nu2 - nu1 * nu1 + nu2 * nu2;
  const double f_diff =
      (mu * mu / denom) *
      ((p1 / p_mu) * std::exp(nu1 - mu) - (p2 / p_mu) * std::exp(nu2 - mu) -
       ((nu1 * nu1 - nu2 * nu2) / (mu * mu)) * (1.0 - b.c0_lb * std::exp(-mu) / p_mu));

  double f_raw = f_diff;
  int f_branch = 0;
  const double f_nu1 = f_single_lambda(mu, nu1, p1, p_mu, b.c0_ub);
  if (f_nu1 > f_raw) {
    f_raw = f_nu1;
    f_branch = 1;
  }
  if (nu2 != 0.0) {
    const double f_nu2 = f_single_lambda(mu, nu2, p2, p_mu, b.c0_ub);
    if (f_nu2 > f_raw) {
      f_raw = f_nu2;
      f_branch = 2;
    }
  }
  b.diag.f_raw = f_raw;
  b.diag.f_branch = f_branch;
  if (f_raw <= 0.0) return no_security(Protocol::two_decoy, "F_mu lower bound <= 0", f_raw);
  if (numerically_degenerate(f_raw)) {
    return no_security(Protocol::two_decoy, "bound numerically degenerate (decoy spacing)",
                       f_raw);
  }

  auto fc = clamp_fraction(f_raw);
  b.single_pair_fraction_lb = fc.value;
  b.diag.f_clamped = fc.clamped;
  b.c1_lb = std::clamp(fc.value * p_mu * std::exp(mu) / mu, 0.0, 1.0);

  const std::vector<std::pair<double, double>> pairs = {{mu, nu1}, {mu, nu2}, {nu1, nu2}};
  const std::vector<double> singles = {mu, nu1, nu2};
  auto xt = xi_upper_bound(pairs, singles, obs, mu, p_mu, fc.value, false);
  auto xw = xi_upper_bound(pairs, singles, obs, mu, p_mu, fc.value, true);
  b.excess_noise_t_ub = xt.value;
  b.excess_noise_omega_ub = xw.value;
  b.diag.xi_branch_t = xt.branch;
  b.diag.xi_branch_omega = xw.branch;
  b.diag.xi_clamped = xt.clamped || xw.clamped;
  return b;
}

BoundSet bounds_one_decoy(const Observables& obs, double mu, double nu, double p_dark) {
  require_arg(nu > 0.0, "nu <= 0");
  require_arg(nu < mu, "nu >= mu");
  const double p_mu = obs.at(mu).postselect;
  const double p_nu = obs.at(nu).postselect;
  if (p_mu < kMinPostselectProb) {
    return no_security(Protocol::one_decoy, "P_mu below noise floor");
  }

  BoundSet b;
  b.protocol = Protocol::one_decoy;
  b.c0_ub = p_dark;
  const double f_raw = f_single_lambda(mu, nu, p_nu, p_mu, b.c0_ub);
  b.diag.f_raw = f_raw;
  b.diag.f_branch = 0;
  if (f_raw <= 0.0) return no_security(Protocol::one_decoy, "F_mu lower bound <= 0", f_raw);
  if (numerically_degenerate(f_raw)) {
    return no_security(Protocol::one_decoy, "bound numerically degenerate (decoy spacing)",
                       f_raw);
  }

  auto fc = clamp_fraction(f_raw);
  b.single_pair_fraction_lb = fc.value;
  b.diag.f_clamped = fc.clamped;
  b.c1_lb = std::clamp(fc.value * p_mu * std::exp(mu) / mu, 0.0, 1.0);

  const std::vector<std::pair<double, double>> pairs = {{mu, nu}};
  const std::vector<double> singles = {mu, nu};
  auto xt = xi_upper_bound(pairs, singles, obs, mu, p_mu, fc.value, false);
  auto xw = xi_upper_bound(pairs, singles, obs, mu, p_mu, fc.value, true);
  b.excess_noise_t_ub = xt.value;
  b.excess_noise_omega_ub = xw.value;
  b.diag.xi_branch_t = xt.branch;
  b.diag.xi_branch_omega = xw.branch;
  b.diag.xi_clamped = xt.clamped || xw.clamped;
  return b;
}

BoundSet bounds_no_decoy(const Observables& obs, double mu, double eta_a, double p_dark) {
  require_arg(mu > 0.0, "mu <= 0");
  const auto& e_mu = obs.at(mu);
  const double p_mu = e_mu.postselect;
  if (p_mu < kMinPostselectProb) {
    return no_security(Protocol::no_decoy, "P_mu below noise floor");
  }

  BoundSet b;
  b.protocol = Protocol::no_decoy;
  b.c0_ub = p_dark;  // C_0^UB = 1 - (1 - p_d) with n = 0

  // sum_{n>=2} mu^n/n! C_n^UB, C_n^UB = 1 - (1-eta_A)^n (1-p_d), truncated by
  // the shared Poisson tail policy
  const int n_max = poisson_truncation(mu);
  double tail = 0.0;
  double mu_pow = mu;  // mu^n / n!
  double miss = 1.0 - eta_a;
  double miss_pow = miss;
  for (int n = 2; n <= n_max; ++n) {
    mu_pow *= mu / n;
    miss_pow *= miss;
    tail += mu_pow * (1.0 - miss_pow * (1.0 - p_dark));
  }

  const double f_raw =
      1.0 - b.c0_ub * std::exp(-mu) / p_mu - tail * std::exp(-mu) / p_mu;
  b.diag.f_raw = f_raw;
  b.diag.f_branch = 0;
  if (f_raw <= 0.0) return no_security(Protocol::no_decoy, "F_mu lower bound <= 0", f_raw);
  if (numerically_degenerate(f_raw)) {
    return no_security(Protocol::no_decoy, "bound numerically degenerate", f_raw);
  }

  auto fc = clamp_fraction(f_raw);
  b.single_pair_fraction_lb = fc.value;
  b.diag.f_clamped = fc.clamped;
  b.c1_lb = std::clamp(fc.value * p_mu * std::exp(mu) / mu, 0.0, 1.0);

  double xi_t = e_mu.xi_mult_t / fc.value - 1.0;
  double xi_w = e_mu.xi_mult_omega / fc.value - 1.0;
  b.diag.xi_clamped = xi_t < 0.0 || xi_w < 0.0;
  b.excess_noise_t_ub = std::max(xi_t, 0.0);
  b.excess_noise_omega_ub = std::max(xi_w, 0.0);
  b.diag.xi_branch_t = 0;
  b.diag.xi_branch_omega = 0;
  return b;
}

BoundSet exact_reference_infinite(const Scenario& scn) {
  const double mu = scn.source.mu;
  BoundSet b;
  b.protocol = Protocol::infinite_decoy;
  const double p_mu = postselect_prob(mu, scn);
  if (p_mu < kMinPostselectProb) {
    return no_security(Protocol::infinite_decoy, "P_mu below noise floor");
  }
  b.c0_lb = b.c0_ub = coincidence_prob_no_eve(0, scn);
  b.c1_lb = coincidence_prob_no_eve(1, scn);
  b.single_pair_fraction_lb = single_pair_fraction(mu, scn);
  b.excess_noise_t_ub = scn.noise.xi_t;
  b.excess_noise_omega_ub = scn.noise.xi_omega;
  b.diag.note = "exact reference";
  return b;
}

}  // namespace hdqkd
