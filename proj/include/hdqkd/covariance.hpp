#pragma once

#include <stdexcept>

namespace hdqkd {

// Dimensionless convention: [t, omega] = i with t in ps, omega in rad/ps,
// so symplectic eigenvalues are dimensionless with vacuum floor 1/2.

/// 2x2 real matrix with a compensated determinant.
struct Mat2 {
  double m00 = 0.0, m01 = 0.0, m10 = 0.0, m11 = 0.0;

  double det() const;
  Mat2 transpose() const { return {m00, m10, m01, m11}; }
  Mat2 scaled(double s) const { return {s * m00, s * m01, s * m10, s * m11}; }
};

struct CovParams {
  double u = 0.0;  // 16 sigma_coh^2, ps^2
  double v = 0.0;  // 4 sigma_cor^2, ps^2
  double k = 1.0;  // dispersion conversion coefficient, ps^2

  static CovParams from_times(double sigma_coh_ps, double sigma_cor_ps, double k = 1.0);
  double schmidt_d() const;
};

struct EveNoise {
  double eta = 0.0;      // correlation decrease
  double epsilon = 0.0;  // excess noise on Bob's block
  double xi = 0.0;       // excess-noise factor the pair realizes
};

struct SymplecticPair {
  double d_plus = 0.0;
  double d_minus = 0.0;
};

/// 4x4 time-frequency covariance over (t_A, w_A, t_B, w_B), stored as the
/// three independent 2x2 blocks. Matrices built by base_covariance /
/// attacked_covariance additionally carry the dispersion-free diagonal
/// representative (the k->inf form, reachable by a unit-determinant per-party
/// shear), from which all spectral quantities are computed without the
/// catastrophic cancellation the finite-k entries exhibit.
class CovMatrix4 {
 public:
  static CovMatrix4 from_blocks(const Mat2& aa, const Mat2& ab, const Mat2& bb);

  const Mat2& aa() const { return aa_; }
  const Mat2& ab() const { return ab_; }
  Mat2 ba() const { return ab_.transpose(); }
  const Mat2& bb() const { return bb_; }
  double entry(int row, int col) const;

  bool symmetric(double tol = 1e-12) const;

  double var_ta() const { return aa_.m00; }
  double var_tb() const { return bb_.m00; }
  double cov_ta_tb() const { return ab_.m00; }

  double det_aa() const;
  double det_ab() const;
  double det_bb() const;
  double det_full() const;

  /// det of gamma_BB - c c^T / gamma_AA(0,0), c the first column of gamma_BA
  /// (the Moore-Penrose conditioning on a t_A measurement).
  double conditional_det_given_ta() const;

  SymplecticPair symplectic_eigenvalues() const;
  bool positive_definite() const;
  /// Positive definite and both symplectic eigenvalues >= 1/2 - tol.
  bool physical(double tol = 1e-9) const;

  bool has_factored_form() const { return factored_; }

 private:
  friend CovMatrix4 base_covariance(const CovParams& params);
  friend CovMatrix4 attacked_covariance(const CovMatrix4& gamma, const EveNoise& noise);

  Mat2 aa_, ab_, bb_;
  // Diagonal representative: gAA~ = diag(pt, pw), gAB~ = s_ab * diag(gt, gw),
  // gBB~ = s_bb * diag(pt, pw).
  bool factored_ = false;
  double pt_ = 0.0, pw_ = 0.0, gt_ = 0.0, gw_ = 0.0;
  double s_ab_ = 1.0, s_bb_ = 1.0;
};

/// Pre-attack covariance with the paper's entries at the given k.
CovMatrix4 base_covariance(const CovParams& params);

/// gamma'_AA = gamma_AA, gamma'_AB = (1-eta) gamma_AB, gamma'_BB = (1+eps) gamma_BB.
CovMatrix4 attacked_covariance(const CovMatrix4& gamma, const EveNoise& noise);

/// eps pinned to eta so that Var[T'_A - T'_B] = (1+xi) Var[T_A - T_B].
double epsilon_from_eta(double eta, double xi, double schmidt_d);

EveNoise eve_noise_from_eta(double eta, double xi, double schmidt_d);

struct EtaInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty = true;
};

/// True when the attack (eta, epsilon_from_eta(eta)) satisfies all of:
/// (a) Gaussian mutual information of Gamma' does not exceed Gamma's,
/// (b) Gamma' is a physical covariance matrix (PSD, eigenvalues >= 1/2 - tol),
/// (c) the arrival-time difference variance does not decrease.
bool eve_noise_feasible(double eta, double xi, const CovParams& params, double tol = 1e-9);

/// Largest closed interval of feasible eta in [0, 1]; 1e-3 scan, boundaries
/// bisected to 1e-9. empty=true when no grid point is feasible.
EtaInterval feasible_eta_interval(double xi, double schmidt_d, const CovParams& params);

}  // namespace hdqkd
