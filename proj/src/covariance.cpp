#include "hdqkd/covariance.hpp"

#include <algorithm>
#include <cmath>

#include "hdqkd/holevo.hpp"

namespace hdqkd {

namespace {

// a*d - b*c with an fma correction term (Kahan), ~1.5 ulp of the true
// determinant of the stored entries.
double det2_compensated(double a, double b, double c, double d) {
  double w = b * c;
  double e = std::fma(-b, c, w);
  double f = std::fma(a, d, -w);
  return f + e;
}

double det3(const double m[4][4], int r0, int r1, int r2, int c0, int c1, int c2) {
  return m[r0][c0] * (m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]) -
         m[r0][c1] * (m[r1][c0] * m[r2][c2] - m[r1][c2] * m[r2][c0]) +
         m[r0][c2] * (m[r1][c0] * m[r2][c1] - m[r1][c1] * m[r2][c0]);
}

}  // namespace

double Mat2::det() const { return det2_compensated(m00, m01, m10, m11); }

CovParams CovParams::from_times(double sigma_coh_ps, double sigma_cor_ps, double k) {
  if (sigma_coh_ps <= sigma_cor_ps || sigma_cor_ps <= 0.0) {
    throw std::invalid_argument("CovParams: need sigma_coh > sigma_cor > 0");
  }
  if (k <= 0.0) throw std::invalid_argument("CovParams: k <= 0");
  return {16.0 * sigma_coh_ps * sigma_coh_ps, 4.0 * sigma_cor_ps * sigma_cor_ps, k};
}

double CovParams::schmidt_d() const { return std::sqrt(u / (4.0 * v)); }

CovMatrix4 CovMatrix4::from_blocks(const Mat2& aa, const Mat2& ab, const Mat2& bb) {
  CovMatrix4 g;
  g.aa_ = aa;
  g.ab_ = ab;
  g.bb_ = bb;
  g.factored_ = false;
  return g;
}

double CovMatrix4::entry(int row, int col) const {
  if (row < 0 || row > 3 || col < 0 || col > 3) {
    throw std::out_of_range("CovMatrix4::entry");
  }
  const Mat2& blk = (row < 2) ? (col < 2 ? aa_ : ab_) : (col < 2 ? ba() : bb_);
  Mat2 copy = blk;
  int r = row % 2, c = col % 2;
  return r == 0 ? (c == 0 ? copy.m00 : copy.m01) : (c == 0 ? copy.m10 : copy.m11);
}

bool CovMatrix4::symmetric(double tol) const {
  auto close = [tol](double x, double y) {
    double scale = std::max({1.0, std::fabs(x), std::fabs(y)});
    return std::fabs(x - y) <= tol * scale;
  };
  return close(aa_.m01, aa_.m10) && close(bb_.m01, bb_.m10);
}

double CovMatrix4::det_aa() const {
  return factored_ ? pt_ * pw_ : aa_.det();
}

double CovMatrix4::det_ab() const {
  return factored_ ? s_ab_ * s_ab_ * gt_ * gw_ : ab_.det();
}

double CovMatrix4::det_bb() const {
  return factored_ ? s_bb_ * s_bb_ * pt_ * pw_ : bb_.det();
}

double CovMatrix4::det_full() const {
  if (factored_) {
    const double c = s_ab_, e = s_bb_;
    double det_t = det2_compensated(pt_, c * gt_, c * gt_, e * pt_);
    double det_w = det2_compensated(pw_, c * gw_, c * gw_, e * pw_);
    return det_t * det_w;
  }
  double m[4][4];
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m[r][c] = entry(r, c);
  double det = 0.0;
  for (int c = 0; c < 4; ++c) {
    int cc[3], idx = 0;
    for (int j = 0; j < 4; ++j)
      if (j != c) cc[idx++] = j;
    double minor = det3(m, 1, 2, 3, cc[0], cc[1], cc[2]);
    det += ((c % 2 == 0) ? 1.0 : -1.0) * m[0][c] * minor;
  }
  return det;
}

double CovMatrix4::conditional_det_given_ta() const {
  if (factored_) {
    const double c = s_ab_, e = s_bb_;
    return (e * pt_ - c * c * gt_ * gt_ / pt_) * (e * pw_);
  }
  if (aa_.m00 <= 0.0) {
    throw std::domain_error("conditional_det_given_ta: gamma_AA(0,0) <= 0");
  }
  // rank-1 update: gamma_BB - c c^T / gamma_AA(0,0), c = first row of gamma_AB
  double c0 = ab_.m00, c1 = ab_.m01;
  double inv = 1.0 / aa_.m00;
  Mat2 cond{bb_.m00 - c0 * c0 * inv, bb_.m01 - c0 * c1 * inv,
            bb_.m10 - c1 * c0 * inv, bb_.m11 - c1 * c1 * inv};
  return cond.det();
}

SymplecticPair CovMatrix4::symplectic_eigenvalues() const {
  double i1 = det_aa() + det_bb() + 2.0 * det_ab();
  double i2 = det_full();
  double disc = i1 * i1 - 4.0 * i2;
  if (disc < 0.0) disc = 0.0;  // pure-state boundary roundoff
  double root = std::sqrt(disc);
  double dp2 = 0.5 * (i1 + root);
  double dm2 = 0.5 * (i1 - root);
  return {std::sqrt(std::max(dp2, 0.0)), std::sqrt(std::max(dm2, 0.0))};
}

bool CovMatrix4::positive_definite() const {
  if (factored_) {
    const double c = s_ab_, e = s_bb_;
    if (!(pt_ > 0.0 && pw_ > 0.0 && e > 0.0)) return false;
    // (t_A, t_B) and (w_A, w_B) subproblems of the diagonal representative
    double det_t = det2_compensated(pt_, c * gt_, c * gt_, e * pt_);
    double det_w = det2_compensated(pw_, c * gw_, c * gw_, e * pw_);
    return det_t > 0.0 && det_w > 0.0;
  }
  double m[4][4];
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m[r][c] = entry(r, c);
  if (!(m[0][0] > 0.0)) return false;
  if (!(aa_.det() > 0.0)) return false;
  if (!(det3(m, 0, 1, 2, 0, 1, 2) > 0.0)) return false;
  return det_full() > 0.0;
}

bool CovMatrix4::physical(double tol) const {
  if (!positive_definite()) return false;
  return symplectic_eigenvalues().d_minus >= 0.5 - tol;
}

CovMatrix4 base_covariance(const CovParams& params) {
  const double u = params.u, v = params.v, k = params.k;
  if (!(u > v && v > 0.0)) throw std::invalid_argument("base_covariance: need u > v > 0");
  if (!(k > 0.0)) throw std::invalid_argument("base_covariance: need k > 0");

  const double sp = (u + v) / 16.0;
  const double sm = (u - v) / 16.0;
  const double cp = (u + v) / (8.0 * k);
  const double cm = (u - v) / (8.0 * k);
  const double wp = (u + v) * (4.0 * k * k + u * v) / (4.0 * k * k * u * v);
  const double wm = (u - v) * (4.0 * k * k + u * v) / (4.0 * k * k * u * v);

  CovMatrix4 g;
  g.aa_ = {sp, -cp, -cp, wp};
  g.ab_ = {sm, cm, -cm, -wm};
  g.bb_ = {sp, cp, cp, wp};
  g.factored_ = true;
  g.pt_ = sp;
  g.pw_ = (u + v) / (u * v);
  g.gt_ = sm;
  g.gw_ = -(u - v) / (u * v);
  g.s_ab_ = 1.0;
  g.s_bb_ = 1.0;
  return g;
}

CovMatrix4 attacked_covariance(const CovMatrix4& gamma, const EveNoise& noise) {
  CovMatrix4 g = gamma;
  const double c = 1.0 - noise.eta;
  const double e = 1.0 + noise.epsilon;
  g.ab_ = gamma.ab_.scaled(c);
  g.bb_ = gamma.bb_.scaled(e);
  if (gamma.factored_) {
    g.s_ab_ = gamma.s_ab_ * c;
    g.s_bb_ = gamma.s_bb_ * e;
  }
  return g;
}

double epsilon_from_eta(double eta, double xi, double schmidt_d) {
  const double d2 = schmidt_d * schmidt_d;
  return (-2.0 * eta * (d2 - 0.25) + xi) / (d2 + 0.25);
}

EveNoise eve_noise_from_eta(double eta, double xi, double schmidt_d) {
  return {eta, epsilon_from_eta(eta, xi, schmidt_d), xi};
}

bool eve_noise_feasible(double eta, double xi, const CovParams& params, double tol) {
  if (eta < 0.0 || eta > 1.0 || xi < 0.0) return false;
  const EveNoise noise = eve_noise_from_eta(eta, xi, params.schmidt_d());
  const CovMatrix4 base = base_covariance(params);
  const CovMatrix4 attacked = attacked_covariance(base, noise);

  // (b) physical covariance matrix, including the state left after a t_A
  // measurement (the d_minus tolerance band alone admits states whose
  // conditional determinant dips further below the vacuum floor)
  if (!attacked.positive_definite()) return false;
  if (attacked.symplectic_eigenvalues().d_minus < 0.5 - tol) return false;
  if (attacked.conditional_det_given_ta() < 0.25 * (1.0 - 2.0 * tol)) return false;

  // (a) Gaussian mutual information cannot increase
  const double iq_base = entropy_f(std::sqrt(base.det_aa())) +
                         entropy_f(std::sqrt(base.det_bb())) - joint_entropy(base);
  const double iq_attacked = entropy_f(std::sqrt(attacked.det_aa())) +
                             entropy_f(std::sqrt(attacked.det_bb())) - joint_entropy(attacked);
  if (iq_attacked > iq_base + 1e-9) return false;

  // (c) Eve can only degrade the arrival-time correlation:
  // eps (u+v) + 2 eta (u-v) >= 0, via the (1,1) entries
  const double var_base = base.var_ta() + base.var_tb() - 2.0 * base.cov_ta_tb();
  const double var_attacked =
      attacked.var_ta() + attacked.var_tb() - 2.0 * attacked.cov_ta_tb();
  if (var_attacked < var_base * (1.0 - 1e-12)) return false;

  return true;
}

EtaInterval feasible_eta_interval(double xi, double schmidt_d, const CovParams& params) {
  if (xi < 0.0) throw std::invalid_argument("feasible_eta_interval: xi < 0");
  if (std::fabs(schmidt_d - params.schmidt_d()) > 1e-9 * schmidt_d) {
    throw std::invalid_argument("feasible_eta_interval: schmidt_d inconsistent with params");
  }
  constexpr int kGrid = 1001;  // 1e-3 scan
  const double step = 1.0 / (kGrid - 1);

  bool feas[kGrid];
  for (int i = 0; i < kGrid; ++i) feas[i] = eve_noise_feasible(i * step, xi, params);

  int best_lo = -1, best_hi = -1;
  for (int i = 0; i < kGrid;) {
    if (!feas[i]) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < kGrid && feas[j + 1]) ++j;
    if (best_lo < 0 || (j - i) > (best_hi - best_lo)) {
      best_lo = i;
      best_hi = j;
    }
    i = j + 1;
  }
  if (best_lo < 0) return {};

  auto bisect = [&](double inside, double outside) {
    // constraints are continuous in eta; resolve the boundary to 1e-9
    while (std::fabs(outside - inside) > 1e-9) {
      double mid = 0.5 * (inside + outside);
      if (eve_noise_feasible(mid, xi, params)) {
        inside = mid;
      } else {
        outside = mid;
      }
    }
    return inside;
  };

  EtaInterval out;
  out.empty = false;
  out.lo = best_lo > 0 ? bisect(best_lo * step, (best_lo - 1) * step) : 0.0;
  out.hi = best_hi < kGrid - 1 ? bisect(best_hi * step, (best_hi + 1) * step) : 1.0;
  return out;
}

}  // namespace hdqkd
