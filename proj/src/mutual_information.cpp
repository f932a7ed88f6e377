#include "hdqkd/mutual_information.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

namespace hdqkd {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDensityFloor = 1e-300;

// 7-point Gauss-Legendre nodes/weights on [-1, 1]
constexpr std::array<double, 7> kGlNodes = {
    -0.9491079123427585, -0.7415311855993945, -0.4058451513773972, 0.0,
    0.4058451513773972, 0.7415311855993945, 0.9491079123427585};
constexpr std::array<double, 7> kGlWeights = {
    0.1294849661688697, 0.2797053914892766, 0.3818300505051189, 0.4179591836734694,
    0.3818300505051189, 0.2797053914892766, 0.1294849661688697};

struct MixtureEval {
  // bivariate component: exp(-(q11 tA^2 + 2 q12 tA tB + q22 tB^2)/2) * bg_norm
  double q11, q12, q22, bg_norm;
  double inv_sa2, na;  // Gaussian A: na * exp(-tA^2 * inv_sa2 / 2)
  double inv_sb2, nb;
  double uniform;      // 1 / T_f
  double w1, w2, w3, w4, w5;
  double wa_gauss, wa_unif;  // marginal A composition
  double wb_gauss, wb_unif;

  explicit MixtureEval(const ArrivalMixture& mix) {
    const double det = mix.sigma_a2 * mix.sigma_b2 - mix.cov_ab * mix.cov_ab;
    if (det <= 0.0 || mix.sigma_a2 <= 0.0 || mix.sigma_b2 <= 0.0) {
      throw std::invalid_argument("mutual_info: mixture covariance not positive definite");
    }
    q11 = mix.sigma_b2 / det;
    q12 = -mix.cov_ab / det;
    q22 = mix.sigma_a2 / det;
    bg_norm = 1.0 / (2.0 * kPi * std::sqrt(det));
    inv_sa2 = 1.0 / mix.sigma_a2;
    na = 1.0 / std::sqrt(2.0 * kPi * mix.sigma_a2);
    inv_sb2 = 1.0 / mix.sigma_b2;
    nb = 1.0 / std::sqrt(2.0 * kPi * mix.sigma_b2);
    uniform = 1.0 / mix.frame_time;
    w1 = mix.weights.pi1;
    w2 = mix.weights.pi2();
    w3 = mix.weights.pi3;
    w4 = mix.weights.pi4;
    w5 = mix.weights.pi5;
    wa_gauss = w1 + w2 + w3;
    wa_unif = w4 + w5;
    wb_gauss = w1 + w2 + w4;
    wb_unif = w3 + w5;
  }

  // p log2(p / (pA pB)) with the frame membership fixed per tile
  double integrand(double ta, double tb, bool in_frame_a, bool in_frame_b) const {
    const double ga = na * std::exp(-0.5 * ta * ta * inv_sa2);
    const double gb = nb * std::exp(-0.5 * tb * tb * inv_sb2);
    const double bg =
        bg_norm * std::exp(-0.5 * (q11 * ta * ta + 2.0 * q12 * ta * tb + q22 * tb * tb));
    const double ua = in_frame_a ? uniform : 0.0;
    const double ub = in_frame_b ? uniform : 0.0;
    double p = w1 * bg + w2 * ga * gb + w3 * ga * ub + w4 * ua * gb + w5 * ua * ub;
    double pa = wa_gauss * ga + wa_unif * ua;
    double pb = wb_gauss * gb + wb_unif * ub;
    p = std::max(p, kDensityFloor);
    const double papb = std::max(pa * pb, kDensityFloor);
    return p * std::log2(p / papb);
  }
};

struct PanelState {
  const MixtureEval* eval;
  bool in_frame_a, in_frame_b;
  long panels = 0;
  long budget = 0;
  double unresolved = 0.0;  // accumulated |children - parent| of forced accepts
};

double panel_estimate(PanelState& st, double ax, double bx, double ay, double by) {
  ++st.panels;
  const double xm = 0.5 * (ax + bx), xr = 0.5 * (bx - ax);
  const double ym = 0.5 * (ay + by), yr = 0.5 * (by - ay);
  double sum = 0.0;
  for (int i = 0; i < 7; ++i) {
    const double x = xm + xr * kGlNodes[i];
    double row = 0.0;
    for (int j = 0; j < 7; ++j) {
      const double y = ym + yr * kGlNodes[j];
      row += kGlWeights[j] * st.eval->integrand(x, y, st.in_frame_a, st.in_frame_b);
    }
    sum += kGlWeights[i] * row;
  }
  return xr * yr * sum;
}

double refine(PanelState& st, double ax, double bx, double ay, double by, double parent,
              double tol, int depth, int min_depth) {
  const double xm = 0.5 * (ax + bx), ym = 0.5 * (ay + by);
  const double q0 = panel_estimate(st, ax, xm, ay, ym);
  const double q1 = panel_estimate(st, xm, bx, ay, ym);
  const double q2 = panel_estimate(st, ax, xm, ym, by);
  const double q3 = panel_estimate(st, xm, bx, ym, by);
  const double children = q0 + q1 + q2 + q3;
  const double diff = std::fabs(children - parent);
  if (depth >= min_depth && diff <= tol) return children;
  if (depth >= 40 || st.panels > st.budget) {
    st.unresolved += diff;
    return children;
  }
  const double ctol = 0.25 * tol;
  return refine(st, ax, xm, ay, ym, q0, ctol, depth + 1, min_depth) +
         refine(st, xm, bx, ay, ym, q1, ctol, depth + 1, min_depth) +
         refine(st, ax, xm, ym, by, q2, ctol, depth + 1, min_depth) +
         refine(st, xm, bx, ym, by, q3, ctol, depth + 1, min_depth);
}

}  // namespace

double ArrivalMixture::correlation() const {
  return cov_ab / std::sqrt(sigma_a2 * sigma_b2);
}

ArrivalMixture build_mixture(const Scenario& scn, const CovMatrix4& attacked_cov) {
  ArrivalMixture mix;
  mix.weights = case_probabilities(scn.source.mu, scn);
  const double jitter2 = scn.detectors.jitter_ps * scn.detectors.jitter_ps;
  mix.sigma_a2 = attacked_cov.var_ta() + jitter2;
  mix.sigma_b2 = attacked_cov.var_tb() + jitter2;
  mix.cov_ab = attacked_cov.cov_ta_tb();
  mix.frame_time = scn.source.frame_time_ps;
  if (mix.cov_ab * mix.cov_ab >= mix.sigma_a2 * mix.sigma_b2) {
    throw std::invalid_argument("build_mixture: |Cov| >= sigma_A sigma_B");
  }
  return mix;
}

double joint_density(const ArrivalMixture& mix, double t_a, double t_b) {
  if (!std::isfinite(t_a) || !std::isfinite(t_b)) {
    throw std::invalid_argument("joint_density: non-finite coordinate");
  }
  MixtureEval ev(mix);
  const double half = 0.5 * mix.frame_time;
  const double ga = ev.na * std::exp(-0.5 * t_a * t_a * ev.inv_sa2);
  const double gb = ev.nb * std::exp(-0.5 * t_b * t_b * ev.inv_sb2);
  const double bg = ev.bg_norm * std::exp(-0.5 * (ev.q11 * t_a * t_a +
                                                  2.0 * ev.q12 * t_a * t_b +
                                                  ev.q22 * t_b * t_b));
  const double ua = std::fabs(t_a) <= half ? ev.uniform : 0.0;
  const double ub = std::fabs(t_b) <= half ? ev.uniform : 0.0;
  return ev.w1 * bg + ev.w2 * ga * gb + ev.w3 * ga * ub + ev.w4 * ua * gb + ev.w5 * ua * ub;
}

MiToleranceError::MiToleranceError(double est, double err)
    : std::runtime_error("mutual_info: tolerance not reached (estimate " +
                         std::to_string(est) + ", error bound " + std::to_string(err) + ")"),
      estimate(est),
      error_bound(err) {}

double mutual_info(const ArrivalMixture& mix, const MiOptions& options) {
  const MixtureEval ev(mix);
  const double half = 0.5 * mix.frame_time;
  const double sigma_max = std::sqrt(std::max(mix.sigma_a2, mix.sigma_b2));
  const double wide = std::max(8.0 * sigma_max, half);

  // Tile edges on +-T_f/2 where the uniform components cut off; each tile's
  // integrand is then smooth. Gaussian tails beyond 8 sigma are negligible
  // against the 1e-4 bit tolerance.
  std::vector<double> cuts;
  if (wide > half * (1.0 + 1e-12)) {
    cuts = {-wide, -half, half, wide};
  } else {
    cuts = {-half, half};
  }
  const int tiles_per_axis = static_cast<int>(cuts.size()) - 1;
  const int tile_count = tiles_per_axis * tiles_per_axis;

  // Resolve the correlated ridge: panels at the forced depth must be finer
  // than a few conditional widths, or coarse panels straddle it undetected.
  const double rho = mix.correlation();
  const double ridge = std::sqrt(std::max(mix.sigma_b2 * (1.0 - rho * rho), 1e-12));
  int central_depth = options.min_depth;
  if (mix.weights.pi1 > 0.0) {
    double need = std::log2(mix.frame_time / (4.0 * ridge));
    central_depth = std::max(central_depth, std::min(7, static_cast<int>(std::ceil(need))));
  }

  PanelState st;
  st.eval = &ev;
  st.budget = options.max_panels;

  double total = 0.0;
  const double tile_tol = options.abs_tol / tile_count;
  for (int ix = 0; ix < tiles_per_axis; ++ix) {
    for (int iy = 0; iy < tiles_per_axis; ++iy) {
      const double ax = cuts[ix], bx = cuts[ix + 1];
      const double ay = cuts[iy], by = cuts[iy + 1];
      st.in_frame_a = (ax >= -half - 1e-9 && bx <= half + 1e-9);
      st.in_frame_b = (ay >= -half - 1e-9 && by <= half + 1e-9);
      const bool central = st.in_frame_a && st.in_frame_b;
      const int min_depth =
          (central ? central_depth : options.min_depth) + options.extra_depth;
      const double parent = panel_estimate(st, ax, bx, ay, by);
      total += refine(st, ax, bx, ay, by, parent, tile_tol, 0, min_depth);
    }
  }
  if (st.unresolved > options.abs_tol) {
    throw MiToleranceError(total, st.unresolved);
  }
  return total;
}

double gaussian_mi_closed_form(double sigma_a2, double sigma_b2, double cov_ab) {
  if (sigma_a2 <= 0.0 || sigma_b2 <= 0.0) {
    throw std::invalid_argument("gaussian_mi_closed_form: degenerate covariance");
  }
  const double rho2 = cov_ab * cov_ab / (sigma_a2 * sigma_b2);
  if (rho2 >= 1.0) {
    throw std::invalid_argument("gaussian_mi_closed_form: |rho| >= 1");
  }
  return -0.5 * std::log2(1.0 - rho2);
}

}  // namespace hdqkd
