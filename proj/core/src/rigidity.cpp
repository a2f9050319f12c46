#include "hybridloc/rigidity.hpp"

#include <algorithm>
#include <set>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace hybridloc {

namespace {

using EdgeList = std::vector<std::pair<int, int>>;  // 0-based vertex pairs

// Rows of the rigidity matrix: one per edge, d/dq of ||q_i - q_j||^2 / 2.
Eigen::MatrixXd rigidity_matrix(const EdgeList& edges,
                                const Eigen::MatrixXd& q) {
  const int p = static_cast<int>(q.cols());
  Eigen::MatrixXd R =
      Eigen::MatrixXd::Zero(static_cast<int>(edges.size()), q.rows() * p);
  for (size_t row = 0; row < edges.size(); ++row) {
    const auto [i, j] = edges[row];
    const Eigen::RowVectorXd diff = q.row(i) - q.row(j);
    R.block(static_cast<int>(row), i * p, 1, p) = diff;
    R.block(static_cast<int>(row), j * p, 1, p) = -diff;
  }
  return R;
}

int rank_from_singular_values(const Eigen::VectorXd& sv, double rel_tol) {
  if (sv.size() == 0 || sv[0] <= 0.0) return 0;
  const double thresh = rel_tol * sv[0];
  int r = 0;
  while (r < sv.size() && sv[r] > thresh) ++r;
  return r;
}

Eigen::MatrixXd random_configuration(int m, int p, Rng& rng) {
  Eigen::MatrixXd q(m, p);
  for (int i = 0; i < m; ++i) {
    for (int c = 0; c < p; ++c) q(i, c) = rng.normal();
  }
  return q;
}

// One repetition of the randomized generic-global-rigidity test.
bool ggr_once(const EdgeList& edges, int m, int p, Rng& rng,
              const RigidityOptions& opts) {
  const int target_rank = p * m - p * (p + 1) / 2;
  if (static_cast<int>(edges.size()) < target_rank) return false;

  for (int attempt = 0; attempt <= opts.degenerate_retries; ++attempt) {
    const Eigen::MatrixXd q = random_configuration(m, p, rng);
    const Eigen::MatrixXd R = rigidity_matrix(edges, q);

    Eigen::BDCSVD<Eigen::MatrixXd> svd(R);
    if (rank_from_singular_values(svd.singularValues(), opts.rank_rel_tol) !=
        target_rank) {
      continue;  // non-rigid graph, or (rarely) a degenerate draw
    }

    // Random equilibrium stress: project a random vector onto null(R^T)
    // via the least-squares residual, then test the stress matrix rank.
    Eigen::VectorXd g(edges.size());
    for (Eigen::Index k = 0; k < g.size(); ++k) g[k] = rng.normal();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(R);
    const Eigen::VectorXd omega = g - R * cod.solve(g);

    Eigen::MatrixXd stress = Eigen::MatrixXd::Zero(m, m);
    for (size_t k = 0; k < edges.size(); ++k) {
      const auto [i, j] = edges[k];
      stress(i, j) -= omega[static_cast<Eigen::Index>(k)];
      stress(j, i) -= omega[static_cast<Eigen::Index>(k)];
      stress(i, i) += omega[static_cast<Eigen::Index>(k)];
      stress(j, j) += omega[static_cast<Eigen::Index>(k)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(stress,
                                                      Eigen::EigenvaluesOnly);
    Eigen::VectorXd abs_ev = es.eigenvalues().cwiseAbs();
    std::sort(abs_ev.data(), abs_ev.data() + abs_ev.size(),
              std::greater<double>());
    if (rank_from_singular_values(abs_ev, opts.rank_rel_tol) == m - p - 1) {
      return true;
    }
  }
  return false;
}

}  // namespace

bool check_localizability(int num_agents, int num_anchors,
                          const std::vector<std::pair<int, int>>& agent_edges,
                          const std::vector<std::pair<int, int>>& anchor_links,
                          int dim, Rng& rng, const RigidityOptions& opts) {
  const int p = dim;
  if (num_agents < 1 || p < 2) return false;
  // A global frame needs at least p+1 anchors (fewer leaves a reflection
  // or rotation ambiguity even when the grounded graph is rigid).
  if (num_anchors < p + 1) return false;

  const int m = num_agents + num_anchors;
  std::set<std::pair<int, int>> dedup;
  for (const auto& [i, j] : agent_edges) {
    if (i == j) continue;
    dedup.insert(std::minmax(i - 1, j - 1));
  }
  for (const auto& [i, k] : anchor_links) {
    dedup.insert(std::minmax(i - 1, num_agents + k - 1));
  }
  // Anchors form a mutually rigid block: connect them pairwise.
  for (int a = 0; a < num_anchors; ++a) {
    for (int b = a + 1; b < num_anchors; ++b) {
      dedup.insert({num_agents + a, num_agents + b});
    }
  }
  const EdgeList edges(dedup.begin(), dedup.end());

  // Connectivity is necessary; also gives a fast reject.
  {
    std::vector<std::vector<int>> adj(m);
    for (const auto& [i, j] : edges) {
      adj[i].push_back(j);
      adj[j].push_back(i);
    }
    std::vector<char> seen(m, 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : adj[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    if (count != m) return false;
  }

  const bool complete =
      static_cast<int>(edges.size()) == m * (m - 1) / 2;
  if (complete) return true;  // complete graphs are globally rigid
  if (m <= p + 1) return false;

  for (int rep = 0; rep < opts.repetitions; ++rep) {
    if (!ggr_once(edges, m, p, rng, opts)) return false;
  }
  return true;
}

bool check_localizability(const ProblemInstance& inst, Rng& rng,
                          const RigidityOptions& opts) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(inst.edges.size());
  for (const auto& e : inst.edges) edges.emplace_back(e.i, e.j);
  std::vector<std::pair<int, int>> links;
  links.reserve(inst.anchor_links.size());
  for (const auto& l : inst.anchor_links) links.emplace_back(l.i, l.k);
  return check_localizability(inst.num_agents, inst.num_anchors(), edges,
                              links, inst.dim.value(), rng, opts);
}

}  // namespace hybridloc
