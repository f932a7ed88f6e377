#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hdqkd/scenario.hpp"

namespace hdqkd {

/// Deterministic generator (splitmix64 core) so sample streams are
/// reproducible across platforms and standard-library versions.
class FrameRng {
 public:
  explicit FrameRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64();
  double next_unit();  // [0, 1)

 private:
  std::uint64_t state_;
};

struct FrameSample {
  int n_pairs = 0;
  bool alice_photon = false;
  bool bob_photon = false;
  bool alice_dark = false;
  bool bob_dark = false;
  int case_label = 0;  // 1..5 per the arrival-time taxonomy, 0 = not postselected

  bool postselected() const { return case_label != 0; }
};

FrameSample sample_frame(double lambda, const Scenario& scn, FrameRng& rng);

/// Deterministic stream of `count` frames for (seed).
std::vector<FrameSample> sample_frames(double lambda, const Scenario& scn, std::uint64_t seed,
                                       std::uint64_t count);

/// Empirical frequencies with binomial standard errors.
struct McEstimates {
  std::uint64_t frames = 0;
  std::uint64_t postselected = 0;
  double p_post = 0.0;  // postselection probability estimate
  double se_p_post = 0.0;
  std::array<double, 5> pi{};     // conditional case probabilities
  std::array<double, 5> se_pi{};  // standard errors
  double c1 = 0.0;                // coincidence probability given one pair
  double se_c1 = 0.0;
  double single_pair_fraction = 0.0;  // share of postselected frames with n = 1
  double se_single_pair_fraction = 0.0;
};

McEstimates estimate_observables(std::span<const FrameSample> samples);

/// Streamed variant: workers sample disjoint sub-streams (seed + worker index)
/// and tallies merge in worker order, so the result is scheduling-independent.
McEstimates estimate_observables(double lambda, const Scenario& scn, std::uint64_t seed,
                                 std::uint64_t count, int workers = 1);

}  // namespace hdqkd
