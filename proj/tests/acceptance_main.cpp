// Acceptance suite: every release criterion evaluated at its stated
// tolerance, one PASS/FAIL line each. Exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "hdqkd/keyrate.hpp"
#include "hdqkd/monte_carlo.hpp"
#include "test_support.hpp"

using namespace hdqkd;
using hdqkd::test::ScenarioParams;
using hdqkd::test::make_scenario;

namespace {

int g_failures = 0;
std::chrono::steady_clock::time_point g_t0;

void start_clock() { g_t0 = std::chrono::steady_clock::now(); }

double elapsed_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - g_t0).count();
}

void report(const std::string& id, bool pass, const std::string& detail) {
  std::printf("%s %-4s %s  [%.1fs]\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str(),
              elapsed_s());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

Scenario paper_link(double d, double mu, double length, std::vector<double> decoys) {
  ScenarioParams p;
  p.schmidt_d = d;
  p.mu = mu;
  p.length_km = length;
  p.decoys = std::move(decoys);
  return make_scenario(p);
}

std::vector<double> grid_0_200() {
  std::vector<double> lengths;
  for (double l = 0.0; l <= 200.0; l += 10.0) lengths.push_back(l);
  return lengths;
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

MiCache g_cache;

std::vector<double> nu2_curve(double d, double mu, const std::vector<double>& lengths) {
  Scenario base = paper_link(d, mu, 0.0, {mu / 2.0, mu / 20.0});
  std::vector<double> nu2s;
  for (double l : lengths) {
    nu2s.push_back(optimize_nu2(scenario_at_length(base, l), &g_cache).nu2);
  }
  return nu2s;
}

// ---- criteria ----

void criterion_1() {
  start_clock();
  Scenario scn = paper_link(32, 0.25, 100.0, {0.125});
  KeyRateResult r = secure_key_capacity(scn, Protocol::one_decoy, &g_cache);
  double t = elapsed_s();
  bool pass = std::fabs(r.delta_i - 0.45) <= 0.10 && t < 30.0;
  report("1", pass,
         fmt("one-decoy mu=0.25 d=32 nu=mu/2 @100km: dI=%.4f bpc (target 0.45 +- 0.10), "
             "runtime %.2fs (< 30s)",
             r.delta_i, t));
}

void criterion_2() {
  start_clock();
  double min_rate = 1e300, min_at = -1.0;
  for (double l : grid_0_200()) {
    Scenario scn = paper_link(32, 0.25, l, {0.125, 0.0125});
    Nu2Optimum opt = optimize_nu2(scn, &g_cache);
    if (opt.result.delta_i < min_rate) {
      min_rate = opt.result.delta_i;
      min_at = l;
    }
  }
  bool pass = min_rate >= 0.52 - 0.10;
  report("2", pass,
         fmt("two-decoy mu=0.25 d=32 nu2-optimized: min dI=%.4f bpc at %g km over L<=200 "
             "(threshold 0.42)",
             min_rate, min_at));
}

void criterion_3() {
  start_clock();
  KeyRateResult r8 =
      secure_key_capacity(paper_link(8, 0.01, 100.0, {0.005}), Protocol::one_decoy, &g_cache);
  KeyRateResult r32 =
      secure_key_capacity(paper_link(32, 0.01, 100.0, {0.005}), Protocol::one_decoy, &g_cache);
  bool pass = std::fabs(r8.delta_i - 1.22) <= 0.15 && std::fabs(r32.delta_i - 2.57) <= 0.15;
  report("3", pass,
         fmt("one-decoy mu=0.01 @100km: dI=%.4f (d=8, target 1.22 +- 0.15), dI=%.4f "
             "(d=32, target 2.57 +- 0.15)",
             r8.delta_i, r32.delta_i));
}

void criterion_4() {
  start_clock();
  double min8 = 1e300, min32 = 1e300;
  for (double l : grid_0_200()) {
    min8 = std::min(
        min8, optimize_nu2(paper_link(8, 0.01, l, {0.005, 0.0005}), &g_cache).result.delta_i);
    min32 = std::min(
        min32, optimize_nu2(paper_link(32, 0.01, l, {0.005, 0.0005}), &g_cache).result.delta_i);
  }
  bool pass = min8 >= 1.26 - 0.15 && min32 >= 2.83 - 0.20;
  report("4", pass,
         fmt("two-decoy mu=0.01 up to 200km: min dI=%.4f (d=8, threshold 1.11), min "
             "dI=%.4f (d=32, threshold 2.63)",
             min8, min32));
}

void criterion_5() {
  start_clock();
  double l_a =
      max_secure_distance(paper_link(32, 0.25, 0.0, {}), Protocol::no_decoy, 100.0, &g_cache);
  double l_b = max_secure_distance(paper_link(8, 0.25, 0.0, {}), Protocol::infinite_decoy, 150.0,
                                   &g_cache);
  double l_c =
      max_secure_distance(paper_link(8, 0.01, 0.0, {}), Protocol::no_decoy, 200.0, &g_cache);
  bool pass = std::fabs(l_a - 25.0) <= 10.0 && std::fabs(l_b - 50.0) <= 10.0 &&
              std::fabs(l_c - 100.0) <= 15.0;
  report("5", pass,
         fmt("secure-distance landmarks: no-decoy mu=.25 d=32 -> %.1f km (25 +- 10); "
             "infinite mu=.25 d=8 -> %.1f km (50 +- 10); no-decoy mu=.01 d=8 -> %.1f km "
             "(100 +- 15)",
             l_a, l_b, l_c));
}

void criterion_6() {
  start_clock();
  const std::vector<double> lengths = grid_0_200();

  // mu = 0.01: the optimum stays interior (meaningfully above the search
  // floor 1e-6 mu) and positive at every distance
  std::vector<double> small_mu = nu2_curve(8, 0.01, lengths);
  bool positive = true;
  for (double nu2 : small_mu) positive = positive && nu2 > 2e-6 * 0.01;

  auto drop_at = [&](const std::vector<double>& curve) {
    for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
      if (curve[i + 1] < 0.1 * curve[i]) return lengths[i + 1];
    }
    return -1.0;
  };
  // the drop position depends on d: mu=0.10 drops within the window at d=8,
  // mu=0.25 at d=32 (where the two-decoy link stays secure through 200 km)
  double drop10 = drop_at(nu2_curve(8, 0.10, lengths));
  double drop25 = drop_at(nu2_curve(32, 0.25, lengths));
  bool pass = positive && std::fabs(drop10 - 50.0) <= 20.0 && std::fabs(drop25 - 100.0) <= 20.0;
  report("6", pass,
         fmt("optimal nu2: positive at all L for mu=0.01 (min %.3g); sharp drop at %g km "
             "for mu=0.10 (50 +- 20) and %g km for mu=0.25 (100 +- 20)",
             *std::min_element(small_mu.begin(), small_mu.end()), drop10, drop25));
}

void criterion_7() {
  start_clock();
  double worst = 0.0;
  std::string where;
  for (double d : {8.0, 32.0}) {
    for (double mu : {0.01, 0.10}) {
      for (double l : grid_0_200()) {
        Scenario scn = paper_link(d, mu, l, {mu / 2.0, mu / 20.0});
        double two = optimize_nu2(scn, &g_cache).result.clamped_delta_i();
        double inf =
            secure_key_capacity(scn, Protocol::infinite_decoy, &g_cache).clamped_delta_i();
        double gap = std::fabs(two - inf);
        if (gap > worst) {
          worst = gap;
          char buf[64];
          std::snprintf(buf, sizeof buf, "d=%g mu=%g L=%g", d, mu, l);
          where = buf;
        }
      }
    }
  }
  bool pass = worst < 0.05;
  report("7", pass,
         fmt("two-decoy vs infinite: max |dI_two - dI_inf| = %.4f bpc (< 0.05), at ", worst) +
             where);
}

// ---- property suite ----

void property_a_soundness(bool& all_pass, std::string& note) {
  int checked = 0;
  bool ok = true;
  for (double d : {8.0, 16.0, 32.0}) {
    for (double mu : {0.01, 0.10, 0.25}) {
      for (double l : {0.0, 40.0, 80.0, 120.0, 160.0, 200.0}) {
        Scenario scn = paper_link(d, mu, l, {mu / 2.0, mu / 20.0});
        Observables obs =
            simulated_observables(std::vector<double>{mu, mu / 2.0, mu / 20.0}, scn);
        BoundSet truth = exact_reference_infinite(scn);
        BoundSet sets[3] = {bounds_two_decoy(obs, mu, mu / 2.0, mu / 20.0, scn.dark_prob()),
                            bounds_one_decoy(obs, mu, mu / 2.0, scn.dark_prob()),
                            bounds_no_decoy(obs, mu, scn.eta_a(), scn.dark_prob())};
        for (const BoundSet& b : sets) {
          if (!b.security_derivable) continue;
          ++checked;
          ok = ok && b.single_pair_fraction_lb <= truth.single_pair_fraction_lb + 1e-9 &&
               b.excess_noise_t_ub >= truth.excess_noise_t_ub - 1e-9 &&
               b.excess_noise_omega_ub >= truth.excess_noise_omega_ub - 1e-9;
        }
      }
    }
  }
  all_pass = all_pass && ok;
  note += std::string("(a) estimator soundness on the 3x3x6 grid: ") +
          (ok ? "holds" : "VIOLATED") +
          fmt(" (%g derivable bound sets); ", static_cast<double>(checked));
}

void property_bc(bool& all_pass, std::string& note) {
  double worst_pi = 0.0;
  for (double d : {8.0, 16.0, 32.0}) {
    for (double mu : {0.01, 0.10, 0.25}) {
      for (double l : {0.0, 40.0, 80.0, 120.0, 160.0, 200.0}) {
        Scenario scn = paper_link(d, mu, l, {});
        worst_pi = std::max(worst_pi, std::fabs(case_probabilities(mu, scn).sum() - 1.0));
      }
    }
  }
  all_pass = all_pass && worst_pi < 1e-10;

  double worst_p = 0.0;
  for (double l : {0.0, 25.0}) {
    Scenario scn = paper_link(8, 0.25, l, {});
    for (double lambda : {0.0, 1e-6, 1e-3, 0.01, 0.1, 0.25, 0.5, 1.0}) {
      double series = postselect_prob(lambda, scn);
      double closed = postselect_prob_closed_form(lambda, scn);
      if (closed > 0.0) worst_p = std::max(worst_p, std::fabs(series - closed) / closed);
    }
  }
  all_pass = all_pass && worst_p < 1e-10;
  note += fmt("(b) max |sum pi - 1| = %.1e (< 1e-10); (c) max series-vs-closed-form "
              "deviation = %.1e (< 1e-10 rel); ",
              worst_pi, worst_p);
}

void property_d(bool& all_pass, std::string& note) {
  double chi_zero = 0.0, worst_k = 0.0;
  for (double d : {8.0, 32.0}) {
    CovParams p1 = CovParams::from_times(d * 30.0, 30.0, 1.0);
    chi_zero = std::max(chi_zero, holevo_upper_bound(0.0, 0.0, p1).chi);
    double ref = holevo_upper_bound(7.0 / 9.0, 7.0 / 9.0, p1).chi;
    for (double k : {0.1, 10.0}) {
      CovParams pk = CovParams::from_times(d * 30.0, 30.0, k);
      double chi = holevo_upper_bound(7.0 / 9.0, 7.0 / 9.0, pk).chi;
      worst_k = std::max(worst_k, std::fabs(chi - ref) / ref);
    }
  }
  all_pass = all_pass && chi_zero <= 1e-5 && worst_k <= 1e-9;
  note += fmt("(d) chi(xi=0) = %.1e (<= 1e-5; the 1e-9 eigenvalue tolerance admits "
              "boundary attacks of this size), k-invariance %.1e (<= 1e-9); ",
              chi_zero, worst_k);
}

void property_e(bool& all_pass, std::string& note) {
  Scenario scn = paper_link(8, 0.25, 0.0, {});
  CovParams params =
      CovParams::from_times(scn.source.sigma_coh_ps, scn.source.sigma_cor_ps, scn.covariance_k);
  ArrivalMixture mix = build_mixture(scn, base_covariance(params));
  mix.weights = {};
  mix.weights.pi1 = 1.0;
  double got = mutual_info(mix);
  double expect = gaussian_mi_closed_form(mix.sigma_a2, mix.sigma_b2, mix.cov_ab);
  all_pass = all_pass && std::fabs(got - expect) < 2e-3;
  note += fmt("(e) correlated-case MI %.5f vs closed form %.5f (|diff| < 2e-3); ", got, expect);
}

void property_f(bool& all_pass, std::string& note) {
  Scenario scn = paper_link(32, 0.25, 100.0, {});
  const std::uint64_t frames = 10'000'000;
  McEstimates mc = estimate_observables(0.25, scn, 8675309, frames, 4);
  double worst_pull = 0.0;

  auto pull = [&](double analytic, double empirical, double n) {
    double sigma = std::sqrt(std::max(analytic * (1.0 - analytic), 0.0) / n);
    return sigma > 0.0 ? std::fabs(empirical - analytic) / sigma : 0.0;
  };
  worst_pull = std::max(
      worst_pull, pull(postselect_prob(0.25, scn), mc.p_post, static_cast<double>(frames)));
  worst_pull = std::max(worst_pull, pull(coincidence_prob_no_eve(1, scn), mc.c1,
                                         frames * 0.25 * std::exp(-0.25)));
  auto pis = case_probabilities(0.25, scn).as_array();
  for (int i = 0; i < 5; ++i) {
    worst_pull =
        std::max(worst_pull, pull(pis[i], mc.pi[i], static_cast<double>(mc.postselected)));
  }
  all_pass = all_pass && worst_pull <= 4.0;
  note += fmt("(f) Monte Carlo at 1e7 frames: worst pull %.2f sigma (<= 4); ", worst_pull);
}

void property_g(bool& all_pass, std::string& note) {
  double worst_chain = -1e300;
  double worst_slope = -1e300;
  for (double d : {8.0, 32.0}) {
    for (double mu : {0.01, 0.10, 0.25}) {
      Scenario base = paper_link(d, mu, 0.0, {mu / 2.0, mu / 20.0});
      double prev[4] = {1e300, 1e300, 1e300, 1e300};
      for (double l : {0.0, 40.0, 80.0, 120.0, 160.0, 200.0}) {
        Scenario scn = scenario_at_length(base, l);
        double rate[4];
        rate[0] = secure_key_capacity(scn, Protocol::infinite_decoy, &g_cache).clamped_delta_i();
        rate[1] = optimize_nu2(scn, &g_cache).result.clamped_delta_i();
        rate[2] = secure_key_capacity(scn, Protocol::one_decoy, &g_cache).clamped_delta_i();
        rate[3] = secure_key_capacity(scn, Protocol::no_decoy, &g_cache).clamped_delta_i();
        worst_chain =
            std::max({worst_chain, rate[1] - rate[0], rate[2] - rate[1], rate[3] - rate[2]});
        for (int i = 0; i < 4; ++i) {
          worst_slope = std::max(worst_slope, rate[i] - prev[i]);
          prev[i] = rate[i];
        }
      }
    }
  }
  all_pass = all_pass && worst_chain <= 1e-9 && worst_slope <= 2e-4;
  note += fmt("(g) dominance-chain slack %.1e (<= 1e-9), dI growth along L %.1e (<= 2e-4, "
              "quadrature tolerance)",
              worst_chain, worst_slope);
}

void criterion_8() {
  start_clock();
  bool pass = true;
  std::string note;
  property_a_soundness(pass, note);
  property_bc(pass, note);
  property_d(pass, note);
  property_e(pass, note);
  property_f(pass, note);
  property_g(pass, note);
  bool in_budget = elapsed_s() < 600.0;
  report("8", pass && in_budget, note + fmt("  [runtime %.0fs < 600s]", elapsed_s()));
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  std::printf("%s: %d criterion(s) failed\n",
              g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", g_failures);
  return g_failures == 0 ? 0 : 1;
}
