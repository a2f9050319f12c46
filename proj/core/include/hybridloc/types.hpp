#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

namespace hybridloc {

/// Dimension of the ambient space. Any p >= 2 is accepted; localization
/// scenarios normally use 2 or 3.
class AmbientDim {
 public:
  explicit AmbientDim(int p) : p_(p) {
    if (p < 2) throw std::invalid_argument("AmbientDim: p must be >= 2");
  }
  int value() const { return p_; }
  friend bool operator==(AmbientDim a, AmbientDim b) { return a.p_ == b.p_; }

 private:
  int p_;
};

/// A noisy direction measurement: unit vector in the world frame plus the
/// von Mises-Fisher concentration of its noise.
struct Bearing {
  Eigen::VectorXd dir;  // unit vector, world frame
  double kappa = 0.0;   // concentration, dimensionless
};

/// Noisy range (and optional bearing) between two agents. Node ids are
/// 1-based. The bearing, when present, measures (x_i - x_j)/||x_i - x_j||.
struct EdgeMeasurement {
  int i = 0;
  int j = 0;
  double d = 0.0;      // measured range, meters
  double sigma = 0.0;  // range noise std, meters
  std::optional<Bearing> bearing;

  int idx_i() const { return i - 1; }
  int idx_j() const { return j - 1; }
};

/// Noisy range (and optional bearing) between an agent and an anchor.
/// Agent and anchor ids are 1-based. The bearing measures
/// (x_i - a_k)/||x_i - a_k||.
struct AnchorMeasurement {
  int i = 0;
  int k = 0;
  double r = 0.0;      // measured range, meters
  double sigma = 0.0;  // range noise std, meters
  std::optional<Bearing> bearing;

  int idx_node() const { return i - 1; }
  int idx_anchor() const { return k - 1; }
};

/// The measurement graph: agents with unknown positions, anchors with known
/// positions, and the noisy observations connecting them. Immutable by
/// convention after construction; safe to share across threads.
struct ProblemInstance {
  AmbientDim dim{2};
  int num_agents = 0;
  std::vector<Eigen::VectorXd> anchors;     // known positions, meters
  std::vector<EdgeMeasurement> edges;       // agent-agent, unordered pairs
  std::vector<AnchorMeasurement> anchor_links;

  int num_anchors() const { return static_cast<int>(anchors.size()); }

  /// max(1, largest measured range); used to scale solver tolerances.
  double scale() const {
    double s = 1.0;
    for (const auto& e : edges) s = std::max(s, e.d);
    for (const auto& a : anchor_links) s = std::max(s, a.r);
    return s;
  }
};

/// True agent positions (one row per agent), used for synthesis and error
/// metrics only.
struct GroundTruth {
  Eigen::MatrixXd positions;  // n x p
};

/// Result of solving the relaxed program: position estimates plus the edge
/// and anchor auxiliary variables and solver diagnostics.
struct Solution {
  Eigen::MatrixXd x;  // n x p agent estimates
  Eigen::MatrixXd y;  // |E| x p edge auxiliaries, ||y_e|| <= d_e
  Eigen::MatrixXd w;  // |L| x p anchor auxiliaries, ||w_l|| <= r_l
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double pg_residual = 0.0;
};

}  // namespace hybridloc
