#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hdqkd/covariance.hpp"

using namespace hdqkd;

namespace {

CovParams paper_params(double d, double k = 1.0) {
  return CovParams::from_times(d * 30.0, 30.0, k);
}

constexpr double kXiPaper = 7.0 / 9.0;

// 4x4 products for the shear-identity check
using M4 = std::array<std::array<double, 4>, 4>;

M4 to_m4(const CovMatrix4& g) {
  M4 m{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m[r][c] = g.entry(r, c);
  return m;
}

M4 mul(const M4& a, const M4& b) {
  M4 out{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += a[r][k] * b[k][c];
      out[r][c] = s;
    }
  return out;
}

M4 transpose(const M4& a) {
  M4 out{};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) out[r][c] = a[c][r];
  return out;
}

}  // namespace

TEST_CASE("base covariance entries") {
  const double d = 8.0, scor = 30.0, scoh = d * scor;
  CovParams params = paper_params(d);
  CovMatrix4 gamma = base_covariance(params);

  const double u = params.u, v = params.v;
  CHECK(u == 16.0 * scoh * scoh);
  CHECK(v == 4.0 * scor * scor);

  // Var[T_A] = (u+v)/16 = sigma_coh^2 + sigma_cor^2/4
  CHECK(gamma.var_ta() == doctest::Approx((u + v) / 16.0).epsilon(1e-15));
  CHECK(gamma.var_ta() == doctest::Approx(scoh * scoh + scor * scor / 4.0).epsilon(1e-15));

  // Var[T_A - T_B] from the entries equals v/4 = sigma_cor^2
  const double var_diff = gamma.var_ta() + gamma.var_tb() - 2.0 * gamma.cov_ta_tb();
  CHECK(var_diff == doctest::Approx(v / 4.0).epsilon(1e-12));
  CHECK(var_diff == doctest::Approx(scor * scor).epsilon(1e-12));

  CHECK(gamma.symmetric());
  CHECK(gamma.entry(0, 1) == doctest::Approx(-(u + v) / 8.0).epsilon(1e-15));  // k = 1
  CHECK(gamma.entry(0, 2) == doctest::Approx((u - v) / 16.0).epsilon(1e-15));
  CHECK(gamma.entry(2, 3) == doctest::Approx((u + v) / 8.0).epsilon(1e-15));
}

TEST_CASE("pure state has symplectic eigenvalues 1/2 for any (u, v, k)") {
  for (double d : {2.0, 8.0, 32.0}) {
    for (double k : {0.1, 1.0, 10.0}) {
      auto [dp, dm] = base_covariance(paper_params(d, k)).symplectic_eigenvalues();
      CHECK(std::fabs(dp - 0.5) < 1e-9);
      CHECK(std::fabs(dm - 0.5) < 1e-9);
      CHECK(base_covariance(paper_params(d, k)).physical());
    }
  }
}

TEST_CASE("attack scales the blocks and never touches Alice") {
  CovParams params = paper_params(8.0);
  CovMatrix4 gamma = base_covariance(params);

  CovMatrix4 same = attacked_covariance(gamma, {0.0, 0.0, 0.0});
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) CHECK(same.entry(r, c) == gamma.entry(r, c));

  CovMatrix4 cut = attacked_covariance(gamma, {1.0, 0.0, 0.0});
  CHECK(cut.ab().m00 == 0.0);
  CHECK(cut.ab().m11 == 0.0);

  EveNoise noise = eve_noise_from_eta(0.01, kXiPaper, 8.0);
  CovMatrix4 attacked = attacked_covariance(gamma, noise);
  CHECK(attacked.aa().m00 == gamma.aa().m00);
  CHECK(attacked.aa().m01 == gamma.aa().m01);
  CHECK(attacked.aa().m11 == gamma.aa().m11);

  // Var[T'_A - T'_B] / Var[T_A - T_B] = 1 + xi when eps follows the relation
  const double var0 = gamma.var_ta() + gamma.var_tb() - 2.0 * gamma.cov_ta_tb();
  const double var1 = attacked.var_ta() + attacked.var_tb() - 2.0 * attacked.cov_ta_tb();
  CHECK(var1 / var0 == doctest::Approx(1.0 + kXiPaper).epsilon(1e-12));
}

TEST_CASE("epsilon-eta-xi relation") {
  const double d = 8.0;
  CHECK(epsilon_from_eta(0.0, kXiPaper, d) ==
        doctest::Approx(kXiPaper / (d * d + 0.25)).epsilon(1e-15));
  CHECK(epsilon_from_eta(0.1, 0.0, d) < 0.0);

  // round trip: xi = eps (d^2 + 1/4) + 2 eta (d^2 - 1/4)
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    double eta = unit(rng);
    double xi = 3.0 * unit(rng);
    double dd = 2.0 + 40.0 * unit(rng);
    double eps = epsilon_from_eta(eta, xi, dd);
    double back = eps * (dd * dd + 0.25) + 2.0 * eta * (dd * dd - 0.25);
    CHECK(back == doctest::Approx(xi).epsilon(1e-12));
  }
}

TEST_CASE("constraint (c) reduces to eps (u+v) + 2 eta (u-v) >= 0") {
  CovParams params = paper_params(8.0);
  CovMatrix4 gamma = base_covariance(params);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    EveNoise noise{unit(rng), 0.4 * (unit(rng) - 0.5), 0.0};
    CovMatrix4 attacked = attacked_covariance(gamma, noise);
    double lhs = (attacked.var_ta() + attacked.var_tb() - 2.0 * attacked.cov_ta_tb()) -
                 (gamma.var_ta() + gamma.var_tb() - 2.0 * gamma.cov_ta_tb());
    double rhs = (noise.epsilon * (params.u + params.v) +
                  2.0 * noise.eta * (params.u - params.v)) /
                 16.0;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
}

TEST_CASE("feasible interval") {
  CovParams params = paper_params(8.0);

  EtaInterval at_zero = feasible_eta_interval(0.0, 8.0, params);
  CHECK(!at_zero.empty);
  CHECK(at_zero.lo == 0.0);  // the no-attack point is always admissible

  EtaInterval paper = feasible_eta_interval(kXiPaper, 8.0, params);
  CHECK(!paper.empty);
  CHECK(paper.lo == 0.0);
  CHECK(paper.hi > 0.01);
  CHECK(paper.hi < 0.1);

  // eta beyond the boundary squeezes Bob below the vacuum floor
  CHECK(!eve_noise_feasible(paper.hi + 1e-3, kXiPaper, params));
  CHECK(eve_noise_feasible(0.5 * paper.hi, kXiPaper, params));

  // a deep-squeeze attack (1 + eps < 0) is never a covariance matrix
  EveNoise bogus{0.9, -1.5, 0.0};
  CHECK(!attacked_covariance(base_covariance(params), bogus).positive_definite());
}

TEST_CASE("dispersion shear identity: Gamma(k) = S Gamma(inf) S^T") {
  for (double d : {8.0, 32.0}) {
    for (double k : {0.1, 1.0, 10.0}) {
      CovParams params = paper_params(d, k);
      const double u = params.u, v = params.v;

      // k->inf representative: diagonal blocks
      Mat2 aa{(u + v) / 16.0, 0.0, 0.0, (u + v) / (u * v)};
      Mat2 ab{(u - v) / 16.0, 0.0, 0.0, -(u - v) / (u * v)};
      CovMatrix4 rep = CovMatrix4::from_blocks(aa, ab, aa);

      M4 s{};  // S_A = [[1,0],[-2/k,1]], S_B = [[1,0],[2/k,1]]
      s[0][0] = 1.0;
      s[1][0] = -2.0 / k;
      s[1][1] = 1.0;
      s[2][2] = 1.0;
      s[3][2] = 2.0 / k;
      s[3][3] = 1.0;

      M4 expected = mul(mul(s, to_m4(rep)), transpose(s));
      CovMatrix4 gamma = base_covariance(params);
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
          double scale = std::max(1.0, std::fabs(expected[r][c]));
          CHECK(std::fabs(gamma.entry(r, c) - expected[r][c]) < 1e-12 * scale);
        }
      }
    }
  }
}

TEST_CASE("factored spectral path agrees with the raw-entry route at k = 1") {
  CovParams params = paper_params(8.0, 1.0);
  EveNoise noise = eve_noise_from_eta(0.02, kXiPaper, 8.0);
  CovMatrix4 fast = attacked_covariance(base_covariance(params), noise);
  REQUIRE(fast.has_factored_form());

  CovMatrix4 raw = CovMatrix4::from_blocks(fast.aa(), fast.ab(), fast.bb());
  REQUIRE(!raw.has_factored_form());

  CHECK(raw.det_aa() == doctest::Approx(fast.det_aa()).epsilon(1e-6));
  CHECK(raw.det_bb() == doctest::Approx(fast.det_bb()).epsilon(1e-6));
  CHECK(raw.det_ab() == doctest::Approx(fast.det_ab()).epsilon(1e-6));
  CHECK(raw.det_full() == doctest::Approx(fast.det_full()).epsilon(1e-4));
  CHECK(raw.conditional_det_given_ta() ==
        doctest::Approx(fast.conditional_det_given_ta()).epsilon(1e-6));

  // the raw finite-k entries carry ~1e10 cancellation in the block
  // determinants, which is why the factored path exists; agreement here is
  // limited by that conditioning
  auto [dp_raw, dm_raw] = raw.symplectic_eigenvalues();
  auto [dp, dm] = fast.symplectic_eigenvalues();
  CHECK(dp_raw == doctest::Approx(dp).epsilon(1e-3));
  CHECK(dm_raw == doctest::Approx(dm).epsilon(1e-3));
}
