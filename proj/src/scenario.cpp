#include "hdqkd/scenario.hpp"

#include <cmath>
#include <sstream>

namespace hdqkd {

namespace {

constexpr double kHzToPerPs = 1e-12;

void require(bool ok, const std::string& violated) {
  if (!ok) throw ConfigError("scenario invariant violated: " + violated);
}

void validate_decoys(const std::vector<double>& decoys, double mu) {
  if (decoys.size() > 2) throw ConfigError("protocol.decoys: at most two decoy intensities");
  if (decoys.size() == 2) {
    require(decoys[1] >= 0.0, "nu2 < 0");
    require(decoys[1] < decoys[0], "nu2 >= nu1");
    require(decoys[0] + decoys[1] < mu, "nu1 + nu2 >= mu");
  } else if (decoys.size() == 1) {
    require(decoys[0] > 0.0, "nu <= 0");
    require(decoys[0] < mu, "nu >= mu");
  }
}

}  // namespace

double excess_noise_from_sigma_delta(double sigma_delta_ps, double sigma_cor_ps) {
  if (sigma_cor_ps <= 0.0) throw ConfigError("scenario invariant violated: sigma_cor <= 0");
  if (sigma_delta_ps < 0.0) throw ConfigError("scenario invariant violated: sigma_delta < 0");
  double r = 1.0 + sigma_delta_ps / sigma_cor_ps;
  return r * r - 1.0;
}

Scenario derive_scenario(const Config& config) {
  Scenario scn;

  scn.source.sigma_cor_ps = config.number("source.sigma_cor_ps");
  scn.source.schmidt_d = config.number("source.schmidt_d");
  scn.source.mu = config.number("source.mu");
  require(scn.source.sigma_cor_ps > 0.0, "sigma_cor <= 0");
  require(scn.source.schmidt_d >= 1.0, "schmidt_d < 1");
  require(scn.source.mu > 0.0 && scn.source.mu < 1.0, "mu outside (0, 1)");
  scn.source.sigma_coh_ps = scn.source.schmidt_d * scn.source.sigma_cor_ps;
  scn.source.frame_time_ps = 2.0 * std::sqrt(2.0 * std::log(2.0)) * scn.source.sigma_coh_ps;

  scn.detectors.eta_a = config.number("detectors.eta_a");
  scn.detectors.eta_b = config.number("detectors.eta_b");
  scn.detectors.dark_rate_hz = config.number("detectors.dark_rate_hz");
  scn.detectors.jitter_ps = config.number("detectors.jitter_ps");
  require(scn.detectors.eta_a >= 0.0 && scn.detectors.eta_a <= 1.0, "eta_a outside [0, 1]");
  require(scn.detectors.eta_b >= 0.0 && scn.detectors.eta_b <= 1.0, "eta_b outside [0, 1]");
  require(scn.detectors.dark_rate_hz >= 0.0, "dark_rate < 0");
  require(scn.detectors.jitter_ps >= 0.0, "jitter < 0");
  // Linearized single-dark-count model; the cap keeps it honest.
  scn.detectors.dark_count_prob =
      scn.detectors.dark_rate_hz * kHzToPerPs * scn.source.frame_time_ps;
  require(scn.detectors.dark_count_prob < 0.01, "p_d >= 0.01");

  scn.channel.alpha_db_per_km = config.number("channel.alpha_db_per_km");
  scn.channel.length_km = config.number("channel.length_km");
  require(scn.channel.alpha_db_per_km >= 0.0, "alpha < 0");
  require(scn.channel.length_km >= 0.0, "length < 0");
  scn.channel.transmittance =
      std::pow(10.0, -scn.channel.alpha_db_per_km * scn.channel.length_km / 10.0);
  require(scn.channel.transmittance > 0.0 && scn.channel.transmittance <= 1.0,
          "transmittance outside (0, 1]");

  scn.noise.sigma_delta_ps = config.number("noise.sigma_delta_ps");
  double xi = excess_noise_from_sigma_delta(scn.noise.sigma_delta_ps, scn.source.sigma_cor_ps);
  scn.noise.xi_t = xi;
  scn.noise.xi_omega = xi;
  scn.noise.delta_xi_t = config.number_or("noise.delta_xi_t", 1.0 + xi);
  scn.noise.delta_xi_omega = config.number_or("noise.delta_xi_omega", 1.0 + xi);
  require(scn.noise.delta_xi_t >= 0.0 && scn.noise.delta_xi_omega >= 0.0, "delta_xi < 0");

  scn.protocol.decoy_levels = config.number_list("protocol.decoys");
  validate_decoys(scn.protocol.decoy_levels, scn.source.mu);
  scn.protocol.beta = config.number("protocol.beta");
  require(scn.protocol.beta > 0.0 && scn.protocol.beta <= 1.0, "beta outside (0, 1]");
  scn.protocol.n_random_bits = std::log2(scn.source.schmidt_d);

  scn.covariance_k = config.number_or("covariance.k", 1.0);
  require(scn.covariance_k > 0.0, "covariance.k <= 0");

  return scn;
}

Scenario scenario_at_length(const Scenario& scn, double length_km) {
  if (length_km < 0.0) throw ConfigError("scenario invariant violated: length < 0");
  Scenario out = scn;
  out.channel.length_km = length_km;
  out.channel.transmittance =
      std::pow(10.0, -out.channel.alpha_db_per_km * length_km / 10.0);
  return out;
}

std::string to_config_text(const Scenario& scn) {
  std::ostringstream out;
  out << "source.sigma_cor_ps = " << format_double(scn.source.sigma_cor_ps) << "\n";
  out << "source.schmidt_d = " << format_double(scn.source.schmidt_d) << "\n";
  out << "source.mu = " << format_double(scn.source.mu) << "\n";
  out << "detectors.eta_a = " << format_double(scn.detectors.eta_a) << "\n";
  out << "detectors.eta_b = " << format_double(scn.detectors.eta_b) << "\n";
  out << "detectors.dark_rate_hz = " << format_double(scn.detectors.dark_rate_hz) << "\n";
  out << "detectors.jitter_ps = " << format_double(scn.detectors.jitter_ps) << "\n";
  out << "channel.alpha_db_per_km = " << format_double(scn.channel.alpha_db_per_km) << "\n";
  out << "channel.length_km = " << format_double(scn.channel.length_km) << "\n";
  out << "noise.sigma_delta_ps = " << format_double(scn.noise.sigma_delta_ps) << "\n";
  out << "noise.delta_xi_t = " << format_double(scn.noise.delta_xi_t) << "\n";
  out << "noise.delta_xi_omega = " << format_double(scn.noise.delta_xi_omega) << "\n";
  std::string decoys;
  for (double nu : scn.protocol.decoy_levels) {
    if (!decoys.empty()) decoys += ", ";
    decoys += format_double(nu);
  }
  out << "protocol.decoys = " << decoys << "\n";
  out << "protocol.beta = " << format_double(scn.protocol.beta) << "\n";
  out << "covariance.k = " << format_double(scn.covariance_k) << "\n";
  return out.str();
}

}  // namespace hdqkd
