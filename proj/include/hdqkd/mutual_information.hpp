#pragma once

#include <stdexcept>

#include "hdqkd/covariance.hpp"
#include "hdqkd/photon_stats.hpp"

namespace hdqkd {

/// Five-case arrival-time mixture: correlated bivariate Gaussian, independent
/// Gaussians, Gaussian x uniform, uniform x Gaussian, uniform x uniform.
/// Variances are jitter-inflated; uniforms live on [-T_f/2, T_f/2].
struct ArrivalMixture {
  CaseWeights weights;
  double sigma_a2 = 0.0;    // Var[T'_A] + sigma_J^2, ps^2
  double sigma_b2 = 0.0;    // Var[T'_B] + sigma_J^2, ps^2
  double cov_ab = 0.0;      // Cov[T'_A, T'_B], ps^2
  double frame_time = 0.0;  // ps

  double correlation() const;
};

ArrivalMixture build_mixture(const Scenario& scn, const CovMatrix4& attacked_cov);

/// Joint arrival-time density (1/ps^2) at (t_a, t_b).
double joint_density(const ArrivalMixture& mix, double t_a, double t_b);

struct MiOptions {
  double abs_tol = 1e-4;        // bits
  int min_depth = 3;            // force this many subdivision levels per tile
  int extra_depth = 0;          // extra forced levels (refinement studies)
  long max_panels = 4'000'000;  // evaluation budget
};

/// Raised when the evaluation budget is exhausted before reaching abs_tol.
class MiToleranceError : public std::runtime_error {
 public:
  MiToleranceError(double estimate, double error_bound);
  double estimate = 0.0;
  double error_bound = 0.0;
};

/// I(A;B) in bits by adaptive tensor-product Gauss-Legendre panels. The
/// domain is partitioned at the frame edges (+-T_f/2), where the uniform
/// components cut off, and extends to 8 sigma for the Gaussian tails;
/// marginals are the exact component closed forms. Result is deterministic:
/// panels are accumulated in recursion order.
double mutual_info(const ArrivalMixture& mix, const MiOptions& options = {});

/// -1/2 log2(1 - rho^2) for a bivariate Gaussian (test oracle / ideal limit).
double gaussian_mi_closed_form(double sigma_a2, double sigma_b2, double cov_ab);

}  // namespace hdqkd
