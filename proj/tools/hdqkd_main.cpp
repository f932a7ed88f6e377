#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "hdqkd/config.hpp"
#include "hdqkd/keyrate.hpp"
#include "hdqkd/monte_carlo.hpp"
#include "hdqkd/report.hpp"
#include "hdqkd/scenario.hpp"

namespace {

using namespace hdqkd;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInsecure = 2;

struct GlobalOptions {
  std::string config_path;
  int threads = 1;
  std::uint64_t seed = 20260810;
};

std::string join_args(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i) out += ' ';
    out += argv[i];
  }
  return out;
}

Protocol default_protocol(const Scenario& scn) {
  switch (scn.protocol.decoy_levels.size()) {
    case 2: return Protocol::two_decoy;
    case 1: return Protocol::one_decoy;
    default: return Protocol::no_decoy;
  }
}

std::vector<Protocol> parse_protocols(const std::string& csv) {
  std::vector<Protocol> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(protocol_from_name(item.substr(b, e - b + 1)));
  }
  return out;
}

std::vector<double> length_grid(double lmin, double lmax, double step) {
  if (step <= 0.0) throw std::invalid_argument("step must be > 0");
  if (lmax < lmin) throw std::invalid_argument("lmax < lmin");
  std::vector<double> lengths;
  for (double l = lmin; l <= lmax + 1e-9; l += step) lengths.push_back(l);
  return lengths;
}

int run_keyrate(const GlobalOptions& global, const std::string& protocol_name_opt,
                double length_override, bool has_length, const std::string& command) {
  Config cfg = Config::load(global.config_path);
  std::vector<std::string> overrides;
  if (has_length) {
    cfg.set_number("channel.length_km", length_override);
    overrides.push_back("channel.length_km=" + format_double(length_override));
  }
  Scenario scn = derive_scenario(cfg);
  Protocol protocol = protocol_name_opt.empty() ? default_protocol(scn)
                                                : protocol_from_name(protocol_name_opt);

  KeyRateResult r = secure_key_capacity(scn, protocol);

  RunManifest manifest = RunManifest::make(cfg.digest(), command, overrides);
  std::cout << manifest.header_lines();
  std::cout << "protocol: " << protocol_name(protocol) << "\n";
  std::cout << "length_km: " << format_double(scn.channel.length_km) << "\n";
  std::cout << "delta_i_bpc: " << format_double(r.clamped_delta_i()) << "\n";
  std::cout << "  mutual_info_term: " << format_double(r.mutual_info_term) << "\n";
  std::cout << "  multiphoton_penalty: " << format_double(r.multiphoton_penalty) << "\n";
  std::cout << "  holevo_penalty: " << format_double(r.holevo_penalty) << "\n";
  std::cout << "mutual_info_bpc: " << format_double(r.mutual_info) << "\n";
  std::cout << "chi_ub_bits: " << format_double(r.chi_ub) << "\n";
  std::cout << "f_mu_lb: " << format_double(r.bounds.single_pair_fraction_lb) << "\n";
  std::cout << "xi_t_ub: " << format_double(r.bounds.excess_noise_t_ub) << "\n";
  std::cout << "eve_eta: " << format_double(r.eve_noise.eta) << "\n";
  std::cout << "eve_epsilon: " << format_double(r.eve_noise.epsilon) << "\n";
  std::cout << "n_ecc_bits: " << format_double(r.n_ecc_bits) << "\n";
  std::cout << "delta_i_preclamp: " << format_double(r.delta_i) << "\n";
  std::cout << "secure: " << (r.secure ? "yes" : "no") << "\n";
  if (!r.failure_reason.empty()) std::cout << "reason: " << r.failure_reason << "\n";
  return r.secure ? kExitOk : kExitInsecure;
}

int run_sweep(const GlobalOptions& global, double lmin, double lmax, double step,
              const std::string& protocols_csv, const std::string& out_path,
              const std::string& command) {
  Config cfg = Config::load(global.config_path);
  Scenario scn = derive_scenario(cfg);
  std::vector<Protocol> protocols = parse_protocols(protocols_csv);
  std::vector<double> lengths = length_grid(lmin, lmax, step);

  std::vector<SweepRow> rows = sweep_distance(scn, lengths, protocols, global.threads);

  std::ostringstream csv;
  csv << RunManifest::make(cfg.digest(), command).header_lines();
  csv << "length_km";
  for (Protocol p : protocols) {
    const std::string n = protocol_name(p);
    csv << ',' << n << ".delta_i_bpc" << ',' << n << ".mi_term" << ',' << n
        << ".multiphoton_penalty" << ',' << n << ".holevo_penalty" << ',' << n << ".f_mu_lb"
        << ',' << n << ".xi_ub" << ',' << n << ".nu2_opt";
  }
  csv << '\n';
  for (const auto& row : rows) {
    csv << csv_cell(row.length_km);
    for (Protocol p : protocols) {
      auto it = row.results.find(p);
      if (it == row.results.end()) {
        csv << ",,,,,,,";
        continue;
      }
      const KeyRateResult& r = it->second;
      csv << ',' << csv_cell(r.clamped_delta_i()) << ',' << csv_cell(r.mutual_info_term)
          << ',' << csv_cell(r.multiphoton_penalty) << ',' << csv_cell(r.holevo_penalty)
          << ',' << csv_cell(r.bounds.single_pair_fraction_lb) << ','
          << csv_cell(r.bounds.excess_noise_t_ub) << ',';
      if (p == Protocol::two_decoy && row.optimal_nu2) {
        csv << csv_cell(*row.optimal_nu2);
      }
    }
    csv << '\n';
    if (!row.error.empty()) {
      std::cerr << "warning: L=" << row.length_km << ": " << row.error << "\n";
    }
  }
  atomic_write_file(out_path, csv.str());
  std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
  return kExitOk;
}

int run_optimize_nu2(const GlobalOptions& global, double lmin, double lmax, double step,
                     const std::string& out_path, const std::string& command) {
  Config cfg = Config::load(global.config_path);
  Scenario scn = derive_scenario(cfg);
  if (scn.protocol.decoy_levels.size() != 2) {
    throw std::invalid_argument("optimize-nu2 requires a two-decoy config");
  }
  std::vector<double> lengths = length_grid(lmin, lmax, step);
  std::vector<SweepRow> rows =
      sweep_distance(scn, lengths, {Protocol::two_decoy}, global.threads);

  std::ostringstream csv;
  csv << RunManifest::make(cfg.digest(), command).header_lines();
  csv << "length_km,nu2_opt,delta_i_bpc\n";
  for (const auto& row : rows) {
    const auto it = row.results.find(Protocol::two_decoy);
    csv << csv_cell(row.length_km) << ',';
    if (row.optimal_nu2) csv << csv_cell(*row.optimal_nu2);
    csv << ',';
    if (it != row.results.end()) csv << csv_cell(it->second.clamped_delta_i());
    csv << '\n';
    if (!row.error.empty()) {
      std::cerr << "warning: L=" << row.length_km << ": " << row.error << "\n";
    }
  }
  atomic_write_file(out_path, csv.str());
  std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
  return kExitOk;
}

int run_mc_validate(const GlobalOptions& global, std::uint64_t frames, double intensity,
                    bool has_intensity, const std::string& out_path,
                    const std::string& command) {
  Config cfg = Config::load(global.config_path);
  Scenario scn = derive_scenario(cfg);
  const double lambda = has_intensity ? intensity : scn.source.mu;

  McEstimates mc = estimate_observables(lambda, scn, global.seed, frames, global.threads);

  const double p_analytic = postselect_prob(lambda, scn);
  const double c1_analytic = coincidence_prob_no_eve(1, scn);
  const CaseWeights w = case_probabilities(lambda, scn);
  const auto pis = w.as_array();

  std::ostringstream out;
  out << RunManifest::make(cfg.digest(), command).header_lines();
  out << "# frames: " << frames << ", intensity: " << format_double(lambda) << "\n";
  out << "quantity,analytic,empirical,sigma,pull\n";
  bool all_ok = true;
  auto emit = [&](const std::string& name, double analytic, double empirical, double n) {
    // binomial sigma from the analytic rate; robust when counts are zero
    double sigma = std::sqrt(std::max(analytic * (1.0 - analytic), 0.0) / n);
    double pull = sigma > 0.0 ? (empirical - analytic) / sigma : 0.0;
    bool ok = std::fabs(empirical - analytic) <= 4.0 * sigma ||
              std::fabs(empirical - analytic) < 1e-15;
    all_ok = all_ok && ok;
    out << name << ',' << csv_cell(analytic) << ',' << csv_cell(empirical) << ','
        << csv_cell(sigma) << ',' << csv_cell(pull) << '\n';
  };
  emit("P_lambda", p_analytic, mc.p_post, static_cast<double>(frames));
  emit("C_1", c1_analytic, mc.c1,
       static_cast<double>(frames) * lambda * std::exp(-lambda));
  for (int i = 0; i < 5; ++i) {
    emit("pi_" + std::to_string(i + 1), pis[i], mc.pi[i],
         static_cast<double>(mc.postselected));
  }
  out << "verdict: " << (all_ok ? "all within 4 sigma" : "DEVIATION beyond 4 sigma") << "\n";

  if (!out_path.empty()) {
    atomic_write_file(out_path, out.str());
  }
  std::cout << out.str();
  return all_ok ? kExitOk : kExitInsecure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decoy-state HD-QKD secure-key capacity calculator"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path, "scenario config file")->required();
  app.add_option("--threads", global.threads, "worker threads for sweeps and sampling");
  app.add_option("--seed", global.seed, "random seed for mc-validate");

  auto* keyrate = app.add_subcommand("keyrate", "single-point secure-key capacity");
  std::string protocol_opt;
  double length_opt = 0.0;
  keyrate->add_option("--protocol", protocol_opt,
                      "infinite | two-decoy | one-decoy | no-decoy | ideal");
  auto* length_flag = keyrate->add_option("--length-km", length_opt, "override channel length");

  auto* sweep = app.add_subcommand("sweep", "distance sweep to CSV");
  double lmin = 0.0, lmax = 200.0, step = 10.0;
  std::string protocols_csv = "infinite,two-decoy,one-decoy,no-decoy";
  std::string out_path = "sweep.csv";
  sweep->add_option("--lmin", lmin, "start length, km");
  sweep->add_option("--lmax", lmax, "end length, km");
  sweep->add_option("--step", step, "grid step, km");
  sweep->add_option("--protocols", protocols_csv, "comma-separated protocol list");
  sweep->add_option("--out", out_path, "output CSV path")->required();

  auto* optimize = app.add_subcommand("optimize-nu2", "optimal nu2 per distance to CSV");
  double o_lmin = 0.0, o_lmax = 200.0, o_step = 10.0;
  std::string o_out = "nu2.csv";
  optimize->add_option("--lmin", o_lmin, "start length, km");
  optimize->add_option("--lmax", o_lmax, "end length, km");
  optimize->add_option("--step", o_step, "grid step, km");
  optimize->add_option("--out", o_out, "output CSV path")->required();

  auto* mc = app.add_subcommand("mc-validate", "Monte Carlo check of the counting statistics");
  std::uint64_t frames = 10'000'000;
  double intensity = 0.0;
  std::string mc_out;
  mc->add_option("--frames", frames, "frames to sample");
  auto* intensity_flag = mc->add_option("--intensity", intensity, "pair intensity (default mu)");
  mc->add_option("--out", mc_out, "also write the table to this path");

  CLI11_PARSE(app, argc, argv);

  const std::string command = join_args(argc, argv);
  try {
    if (keyrate->parsed()) {
      return run_keyrate(global, protocol_opt, length_opt, length_flag->count() > 0, command);
    }
    if (sweep->parsed()) {
      return run_sweep(global, lmin, lmax, step, protocols_csv, out_path, command);
    }
    if (optimize->parsed()) {
      return run_optimize_nu2(global, o_lmin, o_lmax, o_step, o_out, command);
    }
    if (mc->parsed()) {
      return run_mc_validate(global, frames, intensity, intensity_flag->count() > 0, mc_out,
                             command);
    }
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
