#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hdqkd/decoy_estimators.hpp"
#include "hdqkd/holevo.hpp"
#include "hdqkd/mutual_information.hpp"

namespace hdqkd {

/// Secure-key capacity decomposition, bits per coincidence.
/// delta_i = mutual_info_term - multiphoton_penalty - holevo_penalty, exactly.
struct KeyRateResult {
  Protocol protocol = Protocol::infinite_decoy;
  double delta_i = 0.0;             // pre-clamp
  double mutual_info_term = 0.0;    // beta * I(A;B)
  double multiphoton_penalty = 0.0; // (1 - F_lb) * n_R
  double holevo_penalty = 0.0;      // F_lb * chi_ub
  double mutual_info = 0.0;         // I(A;B), bits
  double chi_ub = 0.0;
  double n_ecc_bits = 0.0;          // n_R - beta * I(A;B), informational
  BoundSet bounds;
  EveNoise eve_noise;               // (eta*, eps*) behind chi_ub and the mixture
  bool secure = false;              // delta_i > 0 and bounds derivable
  std::string failure_reason;

  double clamped_delta_i() const { return delta_i > 0.0 ? delta_i : 0.0; }
};

/// Memoizes I(A;B) keyed by the exact mixture parameters; safe for
/// concurrent readers/writers.
class MiCache {
 public:
  double mutual_info_for(const ArrivalMixture& mix, const MiOptions& options);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::string, double> values_;
};

/// Full pipeline for one (scenario, protocol): simulate observables, estimate
/// bounds, maximize Eve's Holevo information, integrate I(A;B) at Eve's
/// argmax noise, assemble the rate.
KeyRateResult secure_key_capacity(const Scenario& scn, Protocol protocol,
                                  MiCache* cache = nullptr,
                                  const MiOptions& mi_options = {});

struct Nu2Optimum {
  double nu2 = 0.0;
  KeyRateResult result;
};

/// argmax of the two-decoy rate over nu2 in (1e-6 mu, min(nu1, mu - nu1));
/// 60-point log grid then golden-section to relative 1e-4, ties to smaller.
Nu2Optimum optimize_nu2(const Scenario& scn, MiCache* cache = nullptr);

struct SweepRow {
  double length_km = 0.0;
  std::map<Protocol, KeyRateResult> results;
  std::optional<double> optimal_nu2;
  std::string error;  // per-row failure, never aborts the sweep
};

/// One row per length; nu2 re-optimized per distance for the two-decoy
/// protocol. Rows are computed in parallel but ordered by the input grid.
std::vector<SweepRow> sweep_distance(const Scenario& scn, const std::vector<double>& lengths_km,
                                     const std::vector<Protocol>& protocols, int threads = 1,
                                     MiCache* cache = nullptr);

/// Largest L with a positive rate, by 10 km bracketing + bisection to 0.5 km.
/// Returns 0 when already insecure at L = 0. Throws on a non-monotone
/// secure/insecure pattern.
double max_secure_distance(const Scenario& scn, Protocol protocol, double max_length_km = 500.0,
                           MiCache* cache = nullptr);

}  // namespace hdqkd
