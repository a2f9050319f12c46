#include "hybridloc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hybridloc {

namespace {

constexpr double kPi = std::numbers::pi;

// Below this concentration the distribution is numerically uniform (and the
// envelope constants underflow), so sample the sphere/circle directly.
constexpr double kUniformKappa = 1e-6;
// Above this the rejection-sampler constants round to their degenerate
// limits (Best-Fisher r -> 1, Wood x0 -> 1) and the accept tests hit
// log(0); the Gaussian/Gamma tail approximations are exact to O(1/kappa).
constexpr double kGaussianKappa = 1e8;

// von Mises angle offset from the mean, Best-Fisher rejection sampling.
double sample_von_mises_offset(double kappa, Rng& rng) {
  if (kappa < kUniformKappa) return rng.uniform(-kPi, kPi);
  if (kappa > kGaussianKappa) {
    // VM(kappa) ~ N(0, 1/kappa); the wrap probability underflows here
    return rng.normal(0.0, 1.0 / std::sqrt(kappa));
  }
  const double a = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double b = (a - std::sqrt(2.0 * a)) / (2.0 * kappa);
  const double r = (1.0 + b * b) / (2.0 * b);
  for (;;) {
    const double z = std::cos(kPi * rng.uniform01());
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    const double u2 = rng.uniform01();
    if (c * (2.0 - c) - u2 > 0.0 ||
        (u2 > 0.0 && std::log(c / u2) + 1.0 - c >= 0.0)) {
      const double theta = std::acos(std::clamp(f, -1.0, 1.0));
      return rng.uniform01() < 0.5 ? -theta : theta;
    }
  }
}

// Cosine of the angle to the mean direction for p >= 3 (Wood's algorithm).
double sample_vmf_cosine(int p, double kappa, Rng& rng) {
  const double pm1 = static_cast<double>(p - 1);
  const double m = pm1 / 2.0;
  if (kappa > kGaussianKappa) {
    // substituting w = 1 - s/kappa in the density (1-w^2)^((p-3)/2) e^(kw)
    // leaves s ~ Gamma((p-1)/2, 1) up to O(s/kappa) corrections
    return std::clamp(1.0 - rng.gamma(m) / kappa, -1.0, 1.0);
  }
  // conjugate form of (-2k + sqrt(4k^2 + pm1^2))/pm1; the direct expression
  // cancels to zero once kappa exceeds ~1e8 and poisons the envelope
  const double b =
      pm1 / (2.0 * kappa + std::sqrt(4.0 * kappa * kappa + pm1 * pm1));
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + pm1 * std::log(1.0 - x0 * x0);
  for (;;) {
    const double g1 = rng.gamma(m);
    const double g2 = rng.gamma(m);
    const double z = g1 / (g1 + g2);  // Beta(m, m)
    const double w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    double u = rng.uniform01();
    if (u == 0.0) u = 0x1.0p-53;
    if (kappa * w + pm1 * std::log(1.0 - x0 * w) - c >= std::log(u)) {
      return std::clamp(w, -1.0, 1.0);
    }
  }
}

}  // namespace

double kappa_from_bearing_sigma_deg(double deg) {
  const double rad = deg * kPi / 180.0;
  return 1.0 / (rad * rad);
}

double sample_range(double true_dist, double sigma, Rng& rng) {
  if (!(true_dist > 0)) throw std::invalid_argument("sample_range: true_dist <= 0");
  if (!(sigma > 0)) throw std::invalid_argument("sample_range: sigma <= 0");
  double d;
  do {
    d = true_dist + sigma * rng.normal();
  } while (d <= 0.0);
  return d;
}

Eigen::VectorXd sample_bearing_vmf(const Eigen::VectorXd& mean_dir,
                                   double kappa, Rng& rng) {
  const int p = static_cast<int>(mean_dir.size());
  if (p < 2) throw std::invalid_argument("sample_bearing_vmf: dimension < 2");
  if (std::abs(mean_dir.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("sample_bearing_vmf: mean_dir not unit norm");
  }
  if (!(kappa > 0)) throw std::invalid_argument("sample_bearing_vmf: kappa <= 0");

  if (p == 2) {
    const double theta = sample_von_mises_offset(kappa, rng);
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::VectorXd out(2);
    out[0] = c * mean_dir[0] - s * mean_dir[1];
    out[1] = s * mean_dir[0] + c * mean_dir[1];
    return out;
  }

  if (kappa < kUniformKappa) {
    // vMF degenerates to the uniform distribution on the sphere.
    Eigen::VectorXd g(p);
    for (int i = 0; i < p; ++i) g[i] = rng.normal();
    return g.normalized();
  }
  const double w = sample_vmf_cosine(p, kappa, rng);

  // Tangent direction uniform on S^{p-2}.
  Eigen::VectorXd t(p - 1);
  double nrm;
  do {
    for (int i = 0; i < p - 1; ++i) t[i] = rng.normal();
    nrm = t.norm();
  } while (nrm == 0.0);
  t /= nrm;

  Eigen::VectorXd sample(p);
  sample[0] = w;
  sample.tail(p - 1) = std::sqrt(std::max(0.0, 1.0 - w * w)) * t;

  // Householder reflection carrying e_1 to mean_dir.
  Eigen::VectorXd v = Eigen::VectorXd::Zero(p);
  v[0] = 1.0;
  v -= mean_dir;
  const double vn = v.norm();
  if (vn < 1e-14) return sample;  // mean_dir == e_1
  v /= vn;
  return sample - 2.0 * v.dot(sample) * v;
}

double vmf_mean_resultant_length(int p, double kappa) {
  if (p < 2) throw std::invalid_argument("vmf_mean_resultant_length: p < 2");
  if (!(kappa > 0)) return 0.0;
  // Gauss continued fraction for I_nu(x)/I_{nu-1}(x) with nu = p/2,
  // evaluated by the modified Lentz method.
  const double nu = p / 2.0;
  const double tiny = 1e-300;
  double f = tiny, C = f, D = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double a = (k == 0) ? 1.0 : 1.0;
    const double b = 2.0 * (nu + k) / kappa;
    D = b + a * D;
    if (D == 0.0) D = tiny;
    C = b + a / C;
    if (C == 0.0) C = tiny;
    D = 1.0 / D;
    const double delta = C * D;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-15) break;
  }
  return f;
}

}  // namespace hybridloc
