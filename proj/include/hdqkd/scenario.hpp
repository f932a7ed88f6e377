#pragma once

#include <string>
#include <vector>

#include "hdqkd/config.hpp"

namespace hdqkd {

// Internal unit system: time in ps, rates in 1/ps, frequencies in rad/ps.
// Config files use ps / km / dB/km / Hz and are converted on load.

/// Entangled-pair source: correlation/coherence times and signal intensity.
struct SourceSpec {
  double sigma_cor_ps = 0.0;   // correlation time
  double schmidt_d = 0.0;      // alphabet size d = sigma_coh / sigma_cor
  double sigma_coh_ps = 0.0;   // derived: d * sigma_cor
  double frame_time_ps = 0.0;  // derived: 2 sqrt(2 ln 2) * sigma_coh
  double mu = 0.0;             // mean photon pairs per frame (signal)
};

struct DetectorSpec {
  double eta_a = 0.0;
  double eta_b = 0.0;
  double dark_rate_hz = 0.0;
  double jitter_ps = 0.0;
  double dark_count_prob = 0.0;  // derived: dark_rate * frame_time, linearized
};

struct ChannelSpec {
  double alpha_db_per_km = 0.0;
  double length_km = 0.0;
  double transmittance = 1.0;  // derived: 10^(-alpha L / 10)
};

struct NoiseSpec {
  double sigma_delta_ps = 0.0;  // Eve-induced correlation-time increase
  double xi_t = 0.0;            // derived: (1 + sigma_delta/sigma_cor)^2 - 1
  double xi_omega = 0.0;
  double delta_xi_t = 1.0;      // multiphoton/dark excess-noise multiplier
  double delta_xi_omega = 1.0;
};

struct ProtocolSpec {
  std::vector<double> decoy_levels;  // 0, 1 or 2 intensities, descending
  double beta = 1.0;                 // reconciliation efficiency
  double n_random_bits = 0.0;        // derived: log2(d)
};

struct Scenario {
  SourceSpec source;
  DetectorSpec detectors;
  ChannelSpec channel;
  NoiseSpec noise;
  ProtocolSpec protocol;
  double covariance_k = 1.0;  // dispersion conversion coefficient, ps^2

  double eta_a() const { return detectors.eta_a; }
  /// Bob-side end-to-end efficiency eta_B * eta_P.
  double eta_bp() const { return detectors.eta_b * channel.transmittance; }
  double dark_prob() const { return detectors.dark_count_prob; }
};

/// xi = (1 + sigma_delta/sigma_cor)^2 - 1.
double excess_noise_from_sigma_delta(double sigma_delta_ps, double sigma_cor_ps);

/// Parse + validate a config document and derive all secondary quantities.
/// Throws ConfigError naming the violated inequality.
Scenario derive_scenario(const Config& config);

/// Same scenario with the channel length replaced and derived fields updated.
Scenario scenario_at_length(const Scenario& scn, double length_km);

/// Full-precision config text that derives back to an identical Scenario.
std::string to_config_text(const Scenario& scn);

}  // namespace hdqkd
