#include "hdqkd/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <thread>

namespace hdqkd {

namespace {

CovParams cov_params_of(const Scenario& scn) {
  return CovParams::from_times(scn.source.sigma_coh_ps, scn.source.sigma_cor_ps,
                               scn.covariance_k);
}

KeyRateResult insecure_result(Protocol protocol, const BoundSet& bounds,
                              const std::string& reason) {
  KeyRateResult r;
  r.protocol = protocol;
  r.bounds = bounds;
  r.secure = false;
  r.failure_reason = reason;
  return r;
}

BoundSet bounds_for(const Scenario& scn, Protocol protocol, const Observables& obs) {
  const double mu = scn.source.mu;
  const auto& decoys = scn.protocol.decoy_levels;
  switch (protocol) {
    case Protocol::two_decoy:
      return bounds_two_decoy(obs, mu, decoys[0], decoys[1], scn.dark_prob());
    case Protocol::one_decoy:
      return bounds_one_decoy(obs, mu, decoys[0], scn.dark_prob());
    case Protocol::no_decoy:
      return bounds_no_decoy(obs, mu, scn.eta_a(), scn.dark_prob());
    case Protocol::infinite_decoy:
    case Protocol::ideal_single_photon:
      return exact_reference_infinite(scn);
  }
  throw std::logic_error("bounds_for: unhandled protocol");
}

std::vector<double> intensities_for(const Scenario& scn, Protocol protocol) {
  const double mu = scn.source.mu;
  const auto& decoys = scn.protocol.decoy_levels;
  switch (protocol) {
    case Protocol::two_decoy:
      if (decoys.size() != 2) {
        throw std::invalid_argument("two-decoy protocol requires two decoy intensities");
      }
      return {mu, decoys[0], decoys[1]};
    case Protocol::one_decoy:
      if (decoys.empty()) {
        throw std::invalid_argument("one-decoy protocol requires a decoy intensity");
      }
      return {mu, decoys[0]};
    default:
      return {mu};
  }
}

}  // namespace

double MiCache::mutual_info_for(const ArrivalMixture& mix, const MiOptions& options) {
  double raw[13] = {mix.weights.pi1,
                    mix.weights.pi2_multi_pair,
                    mix.weights.pi2_single_pair_dark,
                    mix.weights.pi3,
                    mix.weights.pi4,
                    mix.weights.pi5,
                    mix.sigma_a2,
                    mix.sigma_b2,
                    mix.cov_ab,
                    mix.frame_time,
                    options.abs_tol,
                    static_cast<double>(options.min_depth),
                    static_cast<double>(options.extra_depth)};
  std::string key(reinterpret_cast<const char*>(raw), sizeof raw);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = values_.find(key);
    if (it != values_.end()) return it->second;
  }
  double value = mutual_info(mix, options);
  std::lock_guard<std::mutex> lock(mutex_);
  values_.emplace(std::move(key), value);
  return value;
}

std::size_t MiCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return values_.size();
}

KeyRateResult secure_key_capacity(const Scenario& scn, Protocol protocol, MiCache* cache,
                                  const MiOptions& mi_options) {
  const Observables obs = simulated_observables(intensities_for(scn, protocol), scn);
  const BoundSet bounds = bounds_for(scn, protocol, obs);
  if (!bounds.security_derivable) {
    return insecure_result(protocol, bounds, bounds.diag.note);
  }

  const CovParams params = cov_params_of(scn);
  const HolevoBound holevo =
      holevo_upper_bound(bounds.excess_noise_t_ub, bounds.excess_noise_omega_ub, params);
  if (!holevo.defined) {
    return insecure_result(protocol, bounds,
                           "no physical attack consistent with the excess-noise bound");
  }

  const CovMatrix4 attacked =
      attacked_covariance(base_covariance(params), holevo.argmax);
  const ArrivalMixture mixture = build_mixture(scn, attacked);
  const double mi =
      cache ? cache->mutual_info_for(mixture, mi_options) : mutual_info(mixture, mi_options);

  const double f_lb = protocol == Protocol::ideal_single_photon
                          ? 1.0
                          : bounds.single_pair_fraction_lb;
  const double n_r = scn.protocol.n_random_bits;

  KeyRateResult r;
  r.protocol = protocol;
  r.bounds = bounds;
  r.eve_noise = holevo.argmax;
  r.mutual_info = mi;
  r.chi_ub = holevo.chi;
  r.mutual_info_term = scn.protocol.beta * mi;
  r.multiphoton_penalty = (1.0 - f_lb) * n_r;
  r.holevo_penalty = f_lb * holevo.chi;
  r.delta_i = r.mutual_info_term - r.multiphoton_penalty - r.holevo_penalty;
  r.n_ecc_bits = n_r - scn.protocol.beta * mi;
  r.secure = r.delta_i > 0.0;
  return r;
}

Nu2Optimum optimize_nu2(const Scenario& scn, MiCache* cache) {
  const auto& decoys = scn.protocol.decoy_levels;
  if (decoys.size() != 2) {
    throw std::invalid_argument("optimize_nu2: scenario must carry two decoy intensities");
  }
  const double mu = scn.source.mu;
  const double nu1 = decoys[0];
  const double floor = 1e-6 * mu;
  // stay clear of nu2 -> nu1, where the difference bounds lose all precision
  const double top = std::min(nu1, mu - nu1) * (1.0 - 1e-3);
  if (!(floor < top)) {
    throw std::invalid_argument("optimize_nu2: empty nu2 search interval");
  }

  MiCache local_cache;
  MiCache* use_cache = cache ? cache : &local_cache;

  auto evaluate = [&](double nu2) {
    Scenario s = scn;
    s.protocol.decoy_levels = {nu1, nu2};
    return secure_key_capacity(s, Protocol::two_decoy, use_cache);
  };
  // rank by pre-clamp delta_i; underivable bounds rank below everything
  auto score = [](const KeyRateResult& r) {
    return r.failure_reason.empty() ? r.delta_i : -1e300;
  };

  constexpr int kGridPoints = 60;
  const double log_lo = std::log(floor);
  const double log_hi = std::log(top);
  double best_nu2 = floor;
  KeyRateResult best = evaluate(floor);
  for (int i = 1; i < kGridPoints; ++i) {
    double nu2 = std::exp(log_lo + (log_hi - log_lo) * i / (kGridPoints - 1));
    KeyRateResult r = evaluate(nu2);
    if (score(r) > score(best)) {  // strict: ties keep the smaller nu2
      best = r;
      best_nu2 = nu2;
    }
  }

  // golden-section in log(nu2) around the best grid sample
  const double step = (log_hi - log_lo) / (kGridPoints - 1);
  double a = std::max(log_lo, std::log(best_nu2) - step);
  double b = std::min(log_hi, std::log(best_nu2) + step);
  constexpr double kGr = 0.6180339887498949;
  double x1 = b - kGr * (b - a);
  double x2 = a + kGr * (b - a);
  KeyRateResult r1 = evaluate(std::exp(x1));
  KeyRateResult r2 = evaluate(std::exp(x2));
  while (b - a > 1e-4) {  // relative: the variable is log(nu2)
    if (score(r1) < score(r2)) {
      a = x1;
      x1 = x2;
      r1 = r2;
      x2 = a + kGr * (b - a);
      r2 = evaluate(std::exp(x2));
    } else {
      b = x2;
      x2 = x1;
      r2 = r1;
      x1 = b - kGr * (b - a);
      r1 = evaluate(std::exp(x1));
    }
  }
  double refined_nu2 = std::exp(0.5 * (a + b));
  KeyRateResult refined = evaluate(refined_nu2);
  if (score(refined) > score(best) ||
      (score(refined) == score(best) && refined_nu2 < best_nu2)) {
    best = refined;
    best_nu2 = refined_nu2;
  }
  return {best_nu2, best};
}

std::vector<SweepRow> sweep_distance(const Scenario& scn, const std::vector<double>& lengths_km,
                                     const std::vector<Protocol>& protocols, int threads,
                                     MiCache* cache) {
  if (protocols.empty()) throw std::invalid_argument("sweep_distance: empty protocols list");
  for (std::size_t i = 1; i < lengths_km.size(); ++i) {
    if (!(lengths_km[i] > lengths_km[i - 1])) {
      throw std::invalid_argument("sweep_distance: lengths must be strictly increasing");
    }
  }

  MiCache local_cache;
  MiCache* use_cache = cache ? cache : &local_cache;
  std::vector<SweepRow> rows(lengths_km.size());

  auto compute_row = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.length_km = lengths_km[i];
    Scenario at_l = scenario_at_length(scn, lengths_km[i]);
    for (Protocol p : protocols) {
      try {
        if (p == Protocol::two_decoy) {
          Nu2Optimum opt = optimize_nu2(at_l, use_cache);
          row.optimal_nu2 = opt.nu2;
          row.results[p] = opt.result;
        } else {
          row.results[p] = secure_key_capacity(at_l, p, use_cache);
        }
      } catch (const std::exception& ex) {
        if (!row.error.empty()) row.error += "; ";
        row.error += protocol_name(p) + std::string(": ") + ex.what();
      }
    }
  };

  if (threads <= 1 || rows.size() <= 1) {
    for (std::size_t i = 0; i < rows.size(); ++i) compute_row(i);
  } else {
    const int n_threads = std::min<std::size_t>(threads, rows.size());
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < rows.size(); i += n_threads) compute_row(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return rows;
}

double max_secure_distance(const Scenario& scn, Protocol protocol, double max_length_km,
                           MiCache* cache) {
  MiCache local_cache;
  MiCache* use_cache = cache ? cache : &local_cache;

  auto delta_at = [&](double length) {
    Scenario at_l = scenario_at_length(scn, length);
    if (protocol == Protocol::two_decoy) {
      return optimize_nu2(at_l, use_cache).result;
    }
    return secure_key_capacity(at_l, protocol, use_cache);
  };

  if (!delta_at(0.0).secure) return 0.0;

  constexpr double kStep = 10.0;
  double last_secure = 0.0;
  double first_insecure = -1.0;
  for (double length = kStep; length <= max_length_km + 1e-9; length += kStep) {
    if (delta_at(length).secure) {
      if (first_insecure >= 0.0) {
        throw std::runtime_error("max_secure_distance: non-monotone secure/insecure pattern");
      }
      last_secure = length;
    } else {
      first_insecure = length;
      // spot-check the pattern a little beyond the first sign change
      if (delta_at(std::min(length + 2.0 * kStep, max_length_km)).secure) {
        throw std::runtime_error("max_secure_distance: non-monotone secure/insecure pattern");
      }
      break;
    }
  }
  if (first_insecure < 0.0) return max_length_km;  // secure through the whole probe range

  double lo = last_secure, hi = first_insecure;
  while (hi - lo > 0.5) {
    double mid = 0.5 * (lo + hi);
    if (delta_at(mid).secure) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace hdqkd
