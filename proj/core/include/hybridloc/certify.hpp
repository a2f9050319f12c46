#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hybridloc/types.hpp"

namespace hybridloc {

/// Suboptimality certificates and error metrics for a Solution.
/// e1/e2 are per-measurement averages (all edge and anchor-link residual
/// norms pooled); e1_node_grouped/e2_node_grouped use the alternative
/// normalization that averages anchor terms per node and sums over nodes.
struct CertificateReport {
  double e1 = 0.0;
  double e2 = 0.0;
  double e1_node_grouped = 0.0;
  double e2_node_grouped = 0.0;
  std::vector<double> thetas_deg;  // per-edge suboptimality angles
  std::vector<double> betas_deg;   // per-anchor-link angles
  int undefined_angles = 0;        // zero-norm inputs, excluded from the lists
  std::optional<double> loc_error;      // mean per-node error, meters
  std::optional<double> loc_error_max;  // max per-node error, meters
  std::vector<double> per_node_error;
};

/// Average p1-residual per measurement: mean over all edges and anchor
/// links of || y_e - d_e (x_i-x_j)/||x_i-x_j|| || and the anchor analogue.
/// Requires non-coincident estimated positions on measured pairs.
double residual_e1(const Solution& sol, const ProblemInstance& inst);

/// Same residuals, grouped normalization: edge average plus the sum over
/// nodes of per-node anchor-link averages.
double residual_e1_node_grouped(const Solution& sol,
                                const ProblemInstance& inst);

/// Average p2-residual per measurement: mean of | ||y_e|| - d_e | and
/// | ||w_l|| - r_l | over all measurements.
double residual_e2(const Solution& sol, const ProblemInstance& inst);
double residual_e2_node_grouped(const Solution& sol,
                                const ProblemInstance& inst);

/// Angles between the optimal auxiliaries and the estimated displacement
/// directions, in degrees (arccos of the clamped inner product of unit
/// vectors). Zero-norm inputs are excluded and counted in *undefined.
std::pair<std::vector<double>, std::vector<double>> suboptimality_angles(
    const Solution& sol, const ProblemInstance& inst,
    int* undefined = nullptr);

struct LocalizationError {
  double mean = 0.0;
  double max = 0.0;
  std::vector<double> per_node;
};

LocalizationError localization_error(const Eigen::MatrixXd& x_hat,
                                     const GroundTruth& truth);

/// Full report; loc_error fields filled when truth is given.
CertificateReport certify(const Solution& sol, const ProblemInstance& inst,
                          const GroundTruth* truth = nullptr);

std::string certificate_to_json(const CertificateReport& rep);
CertificateReport certificate_from_json(const std::string& doc);

}  // namespace hybridloc
