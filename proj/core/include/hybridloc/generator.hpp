#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hybridloc/rigidity.hpp"
#include "hybridloc/rng.hpp"
#include "hybridloc/types.hpp"

namespace hybridloc {

/// Configuration for synthetic network generation. comm_radius left empty
/// means "calibrate per campaign" (see calibrate_comm_radius).
struct GenConfig {
  int dim = 2;
  int n = 10;
  int num_anchors = 3;
  double region_side = 7.0;               // meters, square/cube side
  std::optional<double> comm_radius;      // meters
  double bearing_edge_fraction = 1.0;     // fraction of edges with bearings
  double bearing_anchor_fraction = 1.0;   // fraction of anchor links with bearings
  double sigma = 0.5;                     // range noise std, meters
  double bearing_sigma_deg = 2.0;         // bearing noise std, degrees
  std::uint64_t seed = 1;
  int max_regen_attempts = 1000;
};

/// Empty when valid; otherwise one message per violated constraint.
std::vector<std::string> validate_gen_config(const GenConfig& cfg);

struct Placement {
  Eigen::MatrixXd agents;   // n x p
  Eigen::MatrixXd anchors;  // num_anchors x p
};

/// n + num_anchors points i.i.d. uniform over [0, region_side]^p.
Placement gen_positions(const GenConfig& cfg, Rng& rng);

struct GraphTopology {
  std::vector<std::pair<int, int>> edges;         // 1-based (i, j), i < j
  std::vector<std::pair<int, int>> anchor_links;  // 1-based (agent, anchor)
  std::vector<bool> edge_has_bearing;
  std::vector<bool> link_has_bearing;
};

/// Geometric graph: an edge/link exists iff the true distance is within
/// comm_radius. Bearing flags go to a uniformly random subset of the
/// configured fraction (rounded to the nearest count).
GraphTopology build_geometric_graph(const Eigen::MatrixXd& agents,
                                    const Eigen::MatrixXd& anchors,
                                    const GenConfig& cfg, Rng& rng);

struct GenResult {
  ProblemInstance instance;
  GroundTruth truth;
  int attempts = 0;  // networks drawn until one passed localizability
};

/// Draw placements and graphs until check_localizability accepts, then
/// sample noisy measurements (kappa = 1/variance-in-radians from
/// bearing_sigma_deg). Throws std::runtime_error after max_regen_attempts.
/// Requires cfg.comm_radius to be set.
GenResult make_instance(const GenConfig& cfg, Rng& rng);

/// Smallest communication radius, searched upward in 0.5 m steps, for which
/// at least pass_target of `probes` random networks pass localizability.
/// Falls back to the region diagonal (complete graph) if no smaller radius
/// qualifies.
double calibrate_comm_radius(const GenConfig& cfg, Rng& rng, int probes = 20,
                             double pass_target = 0.95);

}  // namespace hybridloc
