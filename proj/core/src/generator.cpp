#include "hybridloc/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hybridloc/sampling.hpp"

namespace hybridloc {

std::vector<std::string> validate_gen_config(const GenConfig& cfg) {
  std::vector<std::string> bad;
  if (cfg.dim < 2) bad.push_back("dim must be >= 2");
  if (cfg.n < 1) bad.push_back("n must be >= 1");
  if (cfg.num_anchors < 1) bad.push_back("num_anchors must be >= 1");
  if (!(cfg.region_side > 0)) bad.push_back("region_side must be > 0");
  if (cfg.comm_radius && !(*cfg.comm_radius > 0)) {
    bad.push_back("comm_radius must be > 0");
  }
  if (cfg.bearing_edge_fraction < 0 || cfg.bearing_edge_fraction > 1) {
    bad.push_back("bearing_edge_fraction must be in [0,1]");
  }
  if (cfg.bearing_anchor_fraction < 0 || cfg.bearing_anchor_fraction > 1) {
    bad.push_back("bearing_anchor_fraction must be in [0,1]");
  }
  if (!(cfg.sigma > 0)) bad.push_back("sigma must be > 0");
  if (!(cfg.bearing_sigma_deg > 0)) bad.push_back("bearing_sigma_deg must be > 0");
  if (cfg.max_regen_attempts < 1) bad.push_back("max_regen_attempts must be >= 1");
  return bad;
}

namespace {

void require_valid(const GenConfig& cfg, bool need_radius) {
  auto bad = validate_gen_config(cfg);
  if (need_radius && !cfg.comm_radius) {
    bad.push_back("comm_radius is unset (calibrate or pass one explicitly)");
  }
  if (!bad.empty()) {
    std::ostringstream os;
    os << "invalid GenConfig:";
    for (const auto& b : bad) os << "\n  - " << b;
    throw std::invalid_argument(os.str());
  }
}

// Uniformly random subset of the given size: bearing flags.
std::vector<bool> random_subset_flags(int count, double fraction, Rng& rng) {
  std::vector<bool> flags(count, false);
  const int take = static_cast<int>(
      std::llround(fraction * static_cast<double>(count)));
  if (take >= count) {
    std::fill(flags.begin(), flags.end(), true);
    return flags;
  }
  if (take <= 0) return flags;
  std::vector<int> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  for (int t = 0; t < take; ++t) {
    const int pick = t + rng.uniform_int(count - t);
    std::swap(idx[t], idx[pick]);
    flags[idx[t]] = true;
  }
  return flags;
}

}  // namespace

Placement gen_positions(const GenConfig& cfg, Rng& rng) {
  require_valid(cfg, /*need_radius=*/false);
  const int p = cfg.dim;
  Placement out;
  out.agents.resize(cfg.n, p);
  for (int i = 0; i < cfg.n; ++i) {
    for (int c = 0; c < p; ++c) out.agents(i, c) = rng.uniform(0, cfg.region_side);
  }
  out.anchors.resize(cfg.num_anchors, p);
  for (int k = 0; k < cfg.num_anchors; ++k) {
    for (int c = 0; c < p; ++c) out.anchors(k, c) = rng.uniform(0, cfg.region_side);
  }
  return out;
}

GraphTopology build_geometric_graph(const Eigen::MatrixXd& agents,
                                    const Eigen::MatrixXd& anchors,
                                    const GenConfig& cfg, Rng& rng) {
  require_valid(cfg, /*need_radius=*/true);
  const double radius = *cfg.comm_radius;
  GraphTopology g;
  const int n = static_cast<int>(agents.rows());
  const int num_anchors = static_cast<int>(anchors.rows());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if ((agents.row(i) - agents.row(j)).norm() <= radius) {
        g.edges.emplace_back(i + 1, j + 1);
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < num_anchors; ++k) {
      if ((agents.row(i) - anchors.row(k)).norm() <= radius) {
        g.anchor_links.emplace_back(i + 1, k + 1);
      }
    }
  }
  g.edge_has_bearing = random_subset_flags(static_cast<int>(g.edges.size()),
                                           cfg.bearing_edge_fraction, rng);
  g.link_has_bearing =
      random_subset_flags(static_cast<int>(g.anchor_links.size()),
                          cfg.bearing_anchor_fraction, rng);
  return g;
}

GenResult make_instance(const GenConfig& cfg, Rng& rng) {
  require_valid(cfg, /*need_radius=*/true);
  const int p = cfg.dim;
  const double kappa = kappa_from_bearing_sigma_deg(cfg.bearing_sigma_deg);

  for (int attempt = 1; attempt <= cfg.max_regen_attempts; ++attempt) {
    Placement pl = gen_positions(cfg, rng);
    GraphTopology g = build_geometric_graph(pl.agents, pl.anchors, cfg, rng);
    if (!check_localizability(cfg.n, cfg.num_anchors, g.edges, g.anchor_links,
                              p, rng)) {
      continue;
    }

    ProblemInstance inst{AmbientDim(p), cfg.n, {}, {}, {}};
    inst.anchors.reserve(cfg.num_anchors);
    for (int k = 0; k < cfg.num_anchors; ++k) {
      inst.anchors.push_back(pl.anchors.row(k).transpose());
    }
    for (size_t e = 0; e < g.edges.size(); ++e) {
      const auto [i, j] = g.edges[e];
      const Eigen::VectorXd diff =
          (pl.agents.row(i - 1) - pl.agents.row(j - 1)).transpose();
      const double true_dist = diff.norm();
      EdgeMeasurement m;
      m.i = i;
      m.j = j;
      m.d = sample_range(true_dist, cfg.sigma, rng);
      m.sigma = cfg.sigma;
      if (g.edge_has_bearing[e]) {
        m.bearing = Bearing{sample_bearing_vmf(diff / true_dist, kappa, rng),
                            kappa};
      }
      inst.edges.push_back(std::move(m));
    }
    for (size_t l = 0; l < g.anchor_links.size(); ++l) {
      const auto [i, k] = g.anchor_links[l];
      const Eigen::VectorXd diff =
          (pl.agents.row(i - 1) - pl.anchors.row(k - 1)).transpose();
      const double true_dist = diff.norm();
      AnchorMeasurement m;
      m.i = i;
      m.k = k;
      m.r = sample_range(true_dist, cfg.sigma, rng);
      m.sigma = cfg.sigma;
      if (g.link_has_bearing[l]) {
        m.bearing = Bearing{sample_bearing_vmf(diff / true_dist, kappa, rng),
                            kappa};
      }
      inst.anchor_links.push_back(std::move(m));
    }
    return GenResult{std::move(inst), GroundTruth{std::move(pl.agents)},
                     attempt};
  }
  throw std::runtime_error(
      "make_instance: no localizable network within " +
      std::to_string(cfg.max_regen_attempts) +
      " attempts (n=" + std::to_string(cfg.n) +
      ", comm_radius=" + std::to_string(*cfg.comm_radius) +
      "); try a larger comm_radius or more anchors");
}

double calibrate_comm_radius(const GenConfig& cfg, Rng& rng, int probes,
                             double pass_target) {
  require_valid(cfg, /*need_radius=*/false);
  const double diag = cfg.region_side * std::sqrt(static_cast<double>(cfg.dim));
  for (double radius = 0.5; radius < diag; radius += 0.5) {
    GenConfig probe_cfg = cfg;
    probe_cfg.comm_radius = radius;
    int pass = 0;
    for (int t = 0; t < probes; ++t) {
      Placement pl = gen_positions(probe_cfg, rng);
      GraphTopology g =
          build_geometric_graph(pl.agents, pl.anchors, probe_cfg, rng);
      if (check_localizability(cfg.n, cfg.num_anchors, g.edges, g.anchor_links,
                               cfg.dim, rng)) {
        ++pass;
      }
    }
    if (pass >= static_cast<int>(std::ceil(pass_target * probes))) {
      return radius;
    }
  }
  return diag;  // complete graph; always localizable with >= p+1 anchors
}

}  // namespace hybridloc
