#pragma once

#include <Eigen/Core>

#include "hybridloc/rng.hpp"

namespace hybridloc {

/// Concentration parameter equivalent to a bearing noise std given in
/// degrees: kappa = 1 / variance-in-radians.
double kappa_from_bearing_sigma_deg(double deg);

/// Noisy range: true_dist + N(0, sigma^2), resampled until positive.
/// (Negative ranges are physically meaningless; at the regimes of interest
/// the truncation bias is negligible.)
double sample_range(double true_dist, double sigma, Rng& rng);

/// Draw a unit vector from the von Mises-Fisher distribution with the given
/// mean direction (unit norm) and concentration kappa > 0.
///   p = 2  -> Best-Fisher rejection sampling of the von Mises angle offset
///   p >= 3 -> Wood's algorithm on the tangent-normal decomposition
Eigen::VectorXd sample_bearing_vmf(const Eigen::VectorXd& mean_dir,
                                   double kappa, Rng& rng);

/// Analytic mean resultant length A_p(kappa) = I_{p/2}(kappa) /
/// I_{p/2-1}(kappa), evaluated with a continued fraction so it stays finite
/// for large kappa where the Bessel functions themselves overflow.
double vmf_mean_resultant_length(int p, double kappa);

}  // namespace hybridloc
