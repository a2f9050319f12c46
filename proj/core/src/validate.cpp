#include "hybridloc/validate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace hybridloc {

namespace {

std::string pair_str(int a, int b) {
  std::ostringstream os;
  os << "{" << a << "," << b << "}";
  return os.str();
}

}  // namespace

ValidationResult validate_instance(const ProblemInstance& inst) {
  ValidationResult res;
  auto add = [&res](const std::string& msg) { res.violations.push_back(msg); };

  const int p = inst.dim.value();
  const int n = inst.num_agents;
  const int num_anchors = inst.num_anchors();

  if (n < 1) add("instance must have at least one agent");

  for (int k = 0; k < num_anchors; ++k) {
    if (inst.anchors[k].size() != p) {
      add("anchor " + std::to_string(k + 1) + ": position dimension != dim");
    }
  }

  std::set<std::pair<int, int>> seen_edges;
  for (size_t e = 0; e < inst.edges.size(); ++e) {
    const auto& m = inst.edges[e];
    const std::string tag = "edge " + pair_str(m.i, m.j);
    if (m.i == m.j) add(tag + ": self-loop");
    if (m.i < 1 || m.i > n || m.j < 1 || m.j > n) {
      add(tag + ": node id out of range [1," + std::to_string(n) + "]");
    }
    if (!(m.d > 0)) add(tag + ": non-positive range");
    if (!(m.sigma > 0)) add(tag + ": non-positive sigma");
    auto key = std::minmax(m.i, m.j);
    if (!seen_edges.insert(key).second) {
      add(tag + ": duplicate measurement for unordered pair");
    }
    if (m.bearing) {
      if (m.bearing->dir.size() != p) {
        add(tag + ": bearing dimension != dim");
      } else if (std::abs(m.bearing->dir.norm() - 1.0) > 1e-12) {
        add(tag + ": non-unit bearing");
      }
      if (!(m.bearing->kappa > 0)) add(tag + ": non-positive kappa");
    }
  }

  std::set<std::pair<int, int>> seen_links;
  for (size_t l = 0; l < inst.anchor_links.size(); ++l) {
    const auto& m = inst.anchor_links[l];
    const std::string tag = "anchor_link (" + std::to_string(m.i) + "," +
                            std::to_string(m.k) + ")";
    if (m.i < 1 || m.i > n) {
      add(tag + ": node id out of range [1," + std::to_string(n) + "]");
    }
    if (m.k < 1 || m.k > num_anchors) {
      add(tag + ": anchor id out of range [1," + std::to_string(num_anchors) +
          "]");
    }
    if (!(m.r > 0)) add(tag + ": non-positive range");
    if (!(m.sigma > 0)) add(tag + ": non-positive varsigma");
    if (!seen_links.insert({m.i, m.k}).second) {
      add(tag + ": duplicate measurement for pair");
    }
    if (m.bearing) {
      if (m.bearing->dir.size() != p) {
        add(tag + ": bearing dimension != dim");
      } else if (std::abs(m.bearing->dir.norm() - 1.0) > 1e-12) {
        add(tag + ": non-unit bearing");
      }
      if (!(m.bearing->kappa > 0)) add(tag + ": non-positive varkappa");
    }
  }

  // Connectivity of the union graph over agents and anchors. Anchors count
  // as a mutually connected block (their relative geometry is known).
  if (n >= 1 && res.violations.empty()) {
    const int m_total = n + std::max(num_anchors, 0);
    std::vector<std::vector<int>> adj(m_total);
    for (const auto& e : inst.edges) {
      adj[e.idx_i()].push_back(e.idx_j());
      adj[e.idx_j()].push_back(e.idx_i());
    }
    for (const auto& l : inst.anchor_links) {
      adj[l.idx_node()].push_back(n + l.idx_anchor());
      adj[n + l.idx_anchor()].push_back(l.idx_node());
    }
    for (int a = 0; a + 1 < num_anchors; ++a) {
      adj[n + a].push_back(n + a + 1);
      adj[n + a + 1].push_back(n + a);
    }
    std::vector<char> seen(m_total, 0);
    std::vector<int> stack = {0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : adj[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    if (count != m_total) add("union graph over agents+anchors is disconnected");
  }

  return res;
}

}  // namespace hybridloc
