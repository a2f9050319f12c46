#include <doctest.h>

#include <cmath>

#include "hybridloc/generator.hpp"
#include "hybridloc/sampling.hpp"
#include "hybridloc/validate.hpp"

using namespace hybridloc;

namespace {

GenConfig reference_cfg(double radius) {
  GenConfig cfg;
  cfg.n = 10;
  cfg.num_anchors = 3;
  cfg.region_side = 7.0;
  cfg.comm_radius = radius;
  cfg.sigma = 0.5;
  cfg.bearing_sigma_deg = 2.0;
  return cfg;
}

}  // namespace

TEST_CASE("gen_positions: counts and region bounds") {
  GenConfig cfg = reference_cfg(3.0);
  Rng rng(cfg.seed);
  Placement pl = gen_positions(cfg, rng);
  CHECK(pl.agents.rows() == 10);
  CHECK(pl.anchors.rows() == 3);
  CHECK(pl.agents.cols() == 2);
  CHECK(pl.agents.minCoeff() >= 0.0);
  CHECK(pl.agents.maxCoeff() <= 7.0);
  CHECK(pl.anchors.minCoeff() >= 0.0);
  CHECK(pl.anchors.maxCoeff() <= 7.0);
}

TEST_CASE("gen_positions: zero region rejected") {
  GenConfig cfg = reference_cfg(3.0);
  cfg.region_side = 0.0;
  Rng rng(1);
  CHECK_THROWS_AS(gen_positions(cfg, rng), std::invalid_argument);
  CHECK(!validate_gen_config(cfg).empty());
}

TEST_CASE("gen_positions: fixed seed reproduces exactly") {
  GenConfig cfg = reference_cfg(3.0);
  Rng r1(99), r2(99);
  Placement a = gen_positions(cfg, r1);
  Placement b = gen_positions(cfg, r2);
  CHECK(a.agents == b.agents);
  CHECK(a.anchors == b.anchors);
}

TEST_CASE("build_geometric_graph: radius thresholding") {
  GenConfig cfg = reference_cfg(2.0);
  cfg.n = 2;
  cfg.num_anchors = 1;
  Eigen::MatrixXd agents(2, 2), anchors(1, 2);
  anchors << 100, 100;  // out of range of everything

  agents << 0, 0, 3, 0;  // distance 3 > radius 2
  Rng rng(1);
  CHECK(build_geometric_graph(agents, anchors, cfg, rng).edges.empty());

  agents << 0, 0, 1, 0;  // distance 1 <= radius 2
  auto g = build_geometric_graph(agents, anchors, cfg, rng);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0] == std::pair<int, int>{1, 2});
}

TEST_CASE("build_geometric_graph: bearing fraction one marks every edge") {
  GenConfig cfg = reference_cfg(10.0);
  cfg.bearing_edge_fraction = 1.0;
  cfg.bearing_anchor_fraction = 0.0;
  Rng rng(2);
  Placement pl = gen_positions(cfg, rng);
  auto g = build_geometric_graph(pl.agents, pl.anchors, cfg, rng);
  CHECK(g.edges.size() == 45);  // complete: radius covers the region
  for (bool f : g.edge_has_bearing) CHECK(f);
  for (bool f : g.link_has_bearing) CHECK_FALSE(f);
}

TEST_CASE("build_geometric_graph: half fraction marks half the edges") {
  GenConfig cfg = reference_cfg(10.0);
  cfg.bearing_edge_fraction = 0.5;
  Rng rng(3);
  Placement pl = gen_positions(cfg, rng);
  auto g = build_geometric_graph(pl.agents, pl.anchors, cfg, rng);
  int marked = 0;
  for (bool f : g.edge_has_bearing) marked += f ? 1 : 0;
  CHECK(marked == static_cast<int>(std::llround(0.5 * g.edges.size())));
}

TEST_CASE("make_instance: valid localizable instance under reference config") {
  GenConfig cfg = reference_cfg(5.0);
  cfg.seed = 7;
  Rng rng(cfg.seed);
  GenResult res = make_instance(cfg, rng);
  CHECK(validate_instance(res.instance).ok());
  CHECK(res.instance.num_agents == 10);
  CHECK(res.truth.positions.rows() == 10);
  CHECK(res.attempts >= 1);
  Rng check_rng(123);
  CHECK(check_localizability(res.instance, check_rng));
}

TEST_CASE("make_instance: kappa set from bearing noise") {
  GenConfig cfg = reference_cfg(5.0);
  Rng rng(11);
  GenResult res = make_instance(cfg, rng);
  const double expect = kappa_from_bearing_sigma_deg(2.0);
  CHECK(expect == doctest::Approx(820.7).epsilon(1e-3));
  int bearings = 0;
  for (const auto& e : res.instance.edges) {
    REQUIRE(e.bearing.has_value());
    CHECK(e.bearing->kappa == expect);
    ++bearings;
  }
  CHECK(bearings > 0);
}

TEST_CASE("make_instance: noiseless limit matches true geometry") {
  GenConfig cfg = reference_cfg(5.0);
  cfg.sigma = 1e-12;
  cfg.bearing_sigma_deg = 1e-6;  // kappa ~ 3.3e21 -> tiny angular noise
  cfg.seed = 21;
  Rng rng(cfg.seed);
  GenResult res = make_instance(cfg, rng);
  for (const auto& e : res.instance.edges) {
    const Eigen::VectorXd diff = (res.truth.positions.row(e.idx_i()) -
                                  res.truth.positions.row(e.idx_j()))
                                     .transpose();
    CHECK(std::abs(e.d - diff.norm()) < 1e-6);
    if (e.bearing) {
      CHECK((e.bearing->dir - diff / diff.norm()).norm() < 1e-6);
    }
  }
}

TEST_CASE("make_instance: every generated instance validates (property)") {
  GenConfig cfg = reference_cfg(5.0);
  for (int rep = 0; rep < 10; ++rep) {
    Rng rng(1000 + rep);
    GenResult res = make_instance(cfg, rng);
    CHECK(validate_instance(res.instance).ok());
  }
}

TEST_CASE("make_instance: impossible config exhausts attempts") {
  GenConfig cfg = reference_cfg(0.05);  // far too small to connect anything
  cfg.max_regen_attempts = 5;
  Rng rng(1);
  CHECK_THROWS_WITH_AS(make_instance(cfg, rng), doctest::Contains("attempts"),
                       std::runtime_error);
}

TEST_CASE("calibrate_comm_radius: small instance lands on a sane radius") {
  GenConfig cfg = reference_cfg(0.0);
  cfg.comm_radius.reset();
  cfg.n = 4;
  Rng rng(5);
  const double r = calibrate_comm_radius(cfg, rng, /*probes=*/10);
  CHECK(r > 0.5);
  CHECK(r <= 7.0 * std::sqrt(2.0));
  // networks at the calibrated radius should mostly pass
  GenConfig at = cfg;
  at.comm_radius = r;
  int pass = 0;
  for (int t = 0; t < 10; ++t) {
    Placement pl = gen_positions(at, rng);
    auto g = build_geometric_graph(pl.agents, pl.anchors, at, rng);
    if (check_localizability(at.n, at.num_anchors, g.edges, g.anchor_links,
                             at.dim, rng)) {
      ++pass;
    }
  }
  CHECK(pass >= 8);
}
