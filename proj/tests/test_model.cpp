#include <doctest.h>

#include <cmath>

#include "hybridloc/io.hpp"
#include "hybridloc/rng.hpp"
#include "hybridloc/validate.hpp"

using namespace hybridloc;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// One agent, three anchors, valid unit bearings on every link.
ProblemInstance minimal_instance() {
  ProblemInstance inst{AmbientDim(2), 1, {}, {}, {}};
  inst.anchors = {vec2(0, 0), vec2(7, 0), vec2(0, 7)};
  for (int k = 1; k <= 3; ++k) {
    AnchorMeasurement m;
    m.i = 1;
    m.k = k;
    m.r = 2.0 + k;
    m.sigma = 0.5;
    Eigen::VectorXd dir = vec2(std::cos(0.3 * k), std::sin(0.3 * k));
    m.bearing = Bearing{dir, 820.7};
    inst.anchor_links.push_back(m);
  }
  return inst;
}

// Random valid instance for property tests.
ProblemInstance random_instance(Rng& rng, int n = 10) {
  ProblemInstance inst{AmbientDim(2), n, {}, {}, {}};
  inst.anchors = {vec2(rng.uniform(0, 7), rng.uniform(0, 7)),
                  vec2(rng.uniform(0, 7), rng.uniform(0, 7)),
                  vec2(rng.uniform(0, 7), rng.uniform(0, 7))};
  for (int i = 1; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      if (rng.uniform01() < 0.5) continue;
      EdgeMeasurement m;
      m.i = i;
      m.j = j;
      m.d = rng.uniform(0.1, 8.0);
      m.sigma = rng.uniform(0.1, 1.0);
      if (rng.uniform01() < 0.7) {
        const double a = rng.uniform(0, 2 * 3.14159);
        m.bearing = Bearing{vec2(std::cos(a), std::sin(a)),
                            rng.uniform(1.0, 1000.0)};
      }
      inst.edges.push_back(m);
    }
  }
  for (int i = 1; i <= n; ++i) {
    AnchorMeasurement m;
    m.i = i;
    m.k = 1 + rng.uniform_int(3);
    m.r = rng.uniform(0.1, 8.0);
    m.sigma = rng.uniform(0.1, 1.0);
    if (rng.uniform01() < 0.7) {
      const double a = rng.uniform(0, 2 * 3.14159);
      m.bearing =
          Bearing{vec2(std::cos(a), std::sin(a)), rng.uniform(1.0, 1000.0)};
    }
    inst.anchor_links.push_back(m);
  }
  return inst;
}

bool bit_equal(double a, double b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

bool instances_equal(const ProblemInstance& a, const ProblemInstance& b) {
  if (!(a.dim == b.dim) || a.num_agents != b.num_agents) return false;
  if (a.anchors.size() != b.anchors.size()) return false;
  for (size_t k = 0; k < a.anchors.size(); ++k) {
    for (Eigen::Index c = 0; c < a.anchors[k].size(); ++c) {
      if (!bit_equal(a.anchors[k][c], b.anchors[k][c])) return false;
    }
  }
  if (a.edges.size() != b.edges.size()) return false;
  for (size_t e = 0; e < a.edges.size(); ++e) {
    const auto &x = a.edges[e], &y = b.edges[e];
    if (x.i != y.i || x.j != y.j || !bit_equal(x.d, y.d) ||
        !bit_equal(x.sigma, y.sigma) ||
        x.bearing.has_value() != y.bearing.has_value()) {
      return false;
    }
    if (x.bearing) {
      if (!bit_equal(x.bearing->kappa, y.bearing->kappa)) return false;
      for (Eigen::Index c = 0; c < x.bearing->dir.size(); ++c) {
        if (!bit_equal(x.bearing->dir[c], y.bearing->dir[c])) return false;
      }
    }
  }
  if (a.anchor_links.size() != b.anchor_links.size()) return false;
  for (size_t l = 0; l < a.anchor_links.size(); ++l) {
    const auto &x = a.anchor_links[l], &y = b.anchor_links[l];
    if (x.i != y.i || x.k != y.k || !bit_equal(x.r, y.r) ||
        !bit_equal(x.sigma, y.sigma) ||
        x.bearing.has_value() != y.bearing.has_value()) {
      return false;
    }
    if (x.bearing && !bit_equal(x.bearing->kappa, y.bearing->kappa)) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("AmbientDim rejects p < 2") {
  CHECK_THROWS_AS(AmbientDim(1), std::invalid_argument);
  CHECK_THROWS_AS(AmbientDim(0), std::invalid_argument);
  CHECK(AmbientDim(2).value() == 2);
  CHECK(AmbientDim(5).value() == 5);
}

TEST_CASE("validate: minimal well-formed instance is ok") {
  CHECK(validate_instance(minimal_instance()).ok());
}

TEST_CASE("validate: self-loop") {
  auto inst = minimal_instance();
  inst.num_agents = 2;
  EdgeMeasurement m;
  m.i = 1;
  m.j = 1;
  m.d = 1.0;
  m.sigma = 0.5;
  inst.edges.push_back(m);
  auto res = validate_instance(inst);
  CHECK(!res.ok());
  bool found = false;
  for (const auto& v : res.violations) {
    if (v.find("self-loop") != std::string::npos) found = true;
  }
  CHECK(found);
}

TEST_CASE("validate: non-unit bearing") {
  auto inst = minimal_instance();
  inst.anchor_links[0].bearing->dir = vec2(1, 1);  // norm sqrt(2)
  auto res = validate_instance(inst);
  CHECK(!res.ok());
  bool found = false;
  for (const auto& v : res.violations) {
    if (v.find("non-unit bearing") != std::string::npos) found = true;
  }
  CHECK(found);
}

TEST_CASE("validate: duplicate unordered pair, id range, disconnection") {
  ProblemInstance inst{AmbientDim(2), 3, {vec2(0, 0)}, {}, {}};
  EdgeMeasurement e;
  e.i = 1;
  e.j = 2;
  e.d = 1;
  e.sigma = 1;
  inst.edges.push_back(e);
  std::swap(e.i, e.j);
  inst.edges.push_back(e);  // duplicate {1,2}
  EdgeMeasurement bad;
  bad.i = 1;
  bad.j = 9;
  bad.d = 1;
  bad.sigma = 1;
  inst.edges.push_back(bad);  // id out of range; node 3 disconnected
  auto res = validate_instance(inst);
  REQUIRE(!res.ok());
  int dup = 0, range = 0;
  for (const auto& v : res.violations) {
    if (v.find("duplicate") != std::string::npos) ++dup;
    if (v.find("out of range") != std::string::npos) ++range;
  }
  CHECK(dup == 1);
  CHECK(range == 1);
}

TEST_CASE("serialize/parse round-trip on a fixed instance") {
  auto inst = minimal_instance();
  GroundTruth t{Eigen::MatrixXd::Zero(1, 2)};
  t.positions(0, 0) = 1.234567890123456789;
  t.positions(0, 1) = 0.1;
  auto parsed = parse(serialize(inst, t));
  CHECK(instances_equal(inst, parsed.instance));
  REQUIRE(parsed.truth.has_value());
  CHECK(bit_equal(parsed.truth->positions(0, 0), t.positions(0, 0)));
  CHECK(bit_equal(parsed.truth->positions(0, 1), t.positions(0, 1)));
}

TEST_CASE("round-trip is lossless for random instances") {
  Rng rng(1234);
  for (int rep = 0; rep < 25; ++rep) {
    auto inst = random_instance(rng);
    if (!validate_instance(inst).ok()) continue;  // e.g. disconnected draw
    GroundTruth t{Eigen::MatrixXd::Zero(inst.num_agents, 2)};
    for (int i = 0; i < inst.num_agents; ++i) {
      t.positions(i, 0) = rng.normal(0, 3);
      t.positions(i, 1) = rng.normal(0, 3);
    }
    auto parsed = parse(serialize(inst, t));
    CHECK(instances_equal(inst, parsed.instance));
    REQUIRE(parsed.truth.has_value());
    for (int i = 0; i < inst.num_agents; ++i) {
      CHECK(bit_equal(parsed.truth->positions(i, 0), t.positions(i, 0)));
      CHECK(bit_equal(parsed.truth->positions(i, 1), t.positions(i, 1)));
    }
  }
}

TEST_CASE("parse: missing dim field") {
  CHECK_THROWS_WITH_AS(parse(R"({"n": 1, "anchors": []})"),
                       doctest::Contains("dim"), ParseError);
}

TEST_CASE("parse: negative range surfaces as validation error") {
  auto inst = minimal_instance();
  std::string doc = serialize(inst, std::nullopt);
  auto pos = doc.find("\"r\": 3");
  REQUIRE(pos != std::string::npos);
  doc.replace(pos, 6, "\"r\": -1");
  CHECK_THROWS_WITH_AS(parse(doc), doctest::Contains("non-positive range"),
                       ParseError);
}

TEST_CASE("parse: not JSON at all") {
  CHECK_THROWS_AS(parse("not json {"), ParseError);
}
