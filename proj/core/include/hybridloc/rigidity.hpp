#pragma once

#include <utility>
#include <vector>

#include "hybridloc/rng.hpp"
#include "hybridloc/types.hpp"

namespace hybridloc {

struct RigidityOptions {
  /// Rank decisions use singular values above rank_rel_tol * sigma_max.
  double rank_rel_tol = 1e-9;
  /// Independent repetitions of the randomized test; all must accept.
  /// Bounds the false-accept probability (each repetition's accept path can
  /// only be fooled by near-threshold rank overestimation, < 1e-3 per draw).
  int repetitions = 3;
  /// Retries with fresh randomness when a rank subtest fails, guarding
  /// against a degenerate random configuration causing a false reject.
  int degenerate_retries = 2;
};

/// Decide unique localizability of a measurement graph: the grounded graph
/// (agents + anchors, anchors pairwise connected) must be generically
/// globally rigid in dimension p, and there must be at least p+1 anchors to
/// pin the global frame. Randomized test: (a) rigidity matrix of a random
/// generic configuration has rank p*m - p(p+1)/2; (b) a random equilibrium
/// stress matrix has rank m - p - 1. Ids in agent_edges / anchor_links are
/// 1-based.
bool check_localizability(int num_agents, int num_anchors,
                          const std::vector<std::pair<int, int>>& agent_edges,
                          const std::vector<std::pair<int, int>>& anchor_links,
                          int dim, Rng& rng,
                          const RigidityOptions& opts = {});

bool check_localizability(const ProblemInstance& inst, Rng& rng,
                          const RigidityOptions& opts = {});

}  // namespace hybridloc
