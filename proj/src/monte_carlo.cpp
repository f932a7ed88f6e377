#include "hdqkd/monte_carlo.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace hdqkd {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct Tally {
  std::uint64_t frames = 0;
  std::uint64_t postselected = 0;
  std::uint64_t cases[6] = {0, 0, 0, 0, 0, 0};
  std::uint64_t single_pair_frames = 0;        // n == 1
  std::uint64_t single_pair_postselected = 0;  // n == 1 and postselected

  void add(const FrameSample& s) {
    ++frames;
    if (s.postselected()) {
      ++postselected;
      ++cases[s.case_label];
    }
    if (s.n_pairs == 1) {
      ++single_pair_frames;
      if (s.postselected()) ++single_pair_postselected;
    }
  }

  void merge(const Tally& other) {
    frames += other.frames;
    postselected += other.postselected;
    for (int i = 0; i < 6; ++i) cases[i] += other.cases[i];
    single_pair_frames += other.single_pair_frames;
    single_pair_postselected += other.single_pair_postselected;
  }
};

McEstimates estimates_from(const Tally& t) {
  if (t.postselected == 0) {
    throw std::runtime_error("estimate_observables: zero postselected frames");
  }
  McEstimates out;
  out.frames = t.frames;
  out.postselected = t.postselected;
  const double n = static_cast<double>(t.frames);
  const double np = static_cast<double>(t.postselected);
  out.p_post = np / n;
  out.se_p_post = std::sqrt(out.p_post * (1.0 - out.p_post) / n);
  for (int i = 0; i < 5; ++i) {
    double pi = static_cast<double>(t.cases[i + 1]) / np;
    out.pi[i] = pi;
    out.se_pi[i] = std::sqrt(pi * (1.0 - pi) / np);
  }
  if (t.single_pair_frames > 0) {
    const double n1 = static_cast<double>(t.single_pair_frames);
    out.c1 = static_cast<double>(t.single_pair_postselected) / n1;
    out.se_c1 = std::sqrt(out.c1 * (1.0 - out.c1) / n1);
  }
  out.single_pair_fraction = static_cast<double>(t.single_pair_postselected) / np;
  out.se_single_pair_fraction =
      std::sqrt(out.single_pair_fraction * (1.0 - out.single_pair_fraction) / np);
  return out;
}

}  // namespace

std::uint64_t FrameRng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t x = state_;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double FrameRng::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

FrameSample sample_frame(double lambda, const Scenario& scn, FrameRng& rng) {
  FrameSample s;

  // Poisson by inversion; lambda stays small in this model
  double u = rng.next_unit();
  double pmf = std::exp(-lambda);
  double cdf = pmf;
  int n = 0;
  while (u >= cdf && n < 200) {
    ++n;
    pmf *= lambda / n;
    cdf += pmf;
  }
  s.n_pairs = n;

  const double p_d = scn.dark_prob();
  s.alice_photon = rng.next_unit() < 1.0 - std::pow(1.0 - scn.eta_a(), n);
  s.bob_photon = rng.next_unit() < 1.0 - std::pow(1.0 - scn.eta_bp(), n);
  s.alice_dark = rng.next_unit() < p_d;
  s.bob_dark = rng.next_unit() < p_d;

  const bool alice_click = s.alice_photon || s.alice_dark;
  const bool bob_click = s.bob_photon || s.bob_dark;
  if (alice_click && bob_click) {
    if (s.alice_photon && s.bob_photon) {
      if (s.n_pairs == 1 && !s.alice_dark && !s.bob_dark) {
        s.case_label = 1;
      } else {
        s.case_label = 2;  // multi-pair, or single pair with a dark count
      }
    } else if (s.alice_photon) {
      s.case_label = 3;  // Bob clicked on a dark count only
    } else if (s.bob_photon) {
      s.case_label = 4;
    } else {
      s.case_label = 5;  // both clicked on dark counts
    }
  }
  return s;
}

std::vector<FrameSample> sample_frames(double lambda, const Scenario& scn, std::uint64_t seed,
                                       std::uint64_t count) {
  if (count < 1) throw std::invalid_argument("sample_frames: count < 1");
  std::vector<FrameSample> out;
  out.reserve(count);
  FrameRng rng(splitmix64(seed));
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(sample_frame(lambda, scn, rng));
  return out;
}

McEstimates estimate_observables(std::span<const FrameSample> samples) {
  if (samples.empty()) throw std::invalid_argument("estimate_observables: empty sample stream");
  Tally t;
  for (const auto& s : samples) t.add(s);
  return estimates_from(t);
}

McEstimates estimate_observables(double lambda, const Scenario& scn, std::uint64_t seed,
                                 std::uint64_t count, int workers) {
  if (count < 1) throw std::invalid_argument("estimate_observables: count < 1");
  if (workers < 1) workers = 1;
  if (static_cast<std::uint64_t>(workers) > count) workers = static_cast<int>(count);

  std::vector<Tally> tallies(workers);
  auto run_worker = [&](int w) {
    const std::uint64_t base = count / workers;
    const std::uint64_t extra = static_cast<std::uint64_t>(w) < count % workers ? 1 : 0;
    const std::uint64_t mine = base + extra;
    FrameRng rng(splitmix64(seed + static_cast<std::uint64_t>(w)));
    Tally t;
    for (std::uint64_t i = 0; i < mine; ++i) t.add(sample_frame(lambda, scn, rng));
    tallies[w] = t;
  };

  if (workers == 1) {
    run_worker(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) threads.emplace_back(run_worker, w);
    for (auto& th : threads) th.join();
  }

  Tally total;
  for (int w = 0; w < workers; ++w) total.merge(tallies[w]);  // fixed worker order
  return estimates_from(total);
}

}  // namespace hdqkd
