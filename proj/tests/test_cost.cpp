#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hybridloc/cost.hpp"
#include "hybridloc/generator.hpp"
#include "hybridloc/rng.hpp"

using namespace hybridloc;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

// Single edge between two agents; u, kappa optional.
ProblemInstance one_edge(double d, double sigma,
                         std::optional<Eigen::VectorXd> u = std::nullopt,
                         double kappa = 1.0) {
  ProblemInstance inst{AmbientDim(2), 2, {}, {}, {}};
  EdgeMeasurement m;
  m.i = 1;
  m.j = 2;
  m.d = d;
  m.sigma = sigma;
  if (u) m.bearing = Bearing{*u, kappa};
  inst.edges.push_back(m);
  return inst;
}

ProblemInstance random_noisy_instance(std::uint64_t seed, int n = 5) {
  GenConfig cfg;
  cfg.n = n;
  cfg.num_anchors = 3;
  cfg.comm_radius = 6.0;
  cfg.seed = seed;
  Rng rng(seed);
  return make_instance(cfg, rng).instance;
}

Eigen::MatrixXd random_positions(int n, int p, Rng& rng, double scale = 3.0) {
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < p; ++c) x(i, c) = rng.normal(3.0, scale);
  }
  return x;
}

// central finite differences of ml_cost
Eigen::MatrixXd fd_ml_gradient(const Eigen::MatrixXd& x,
                               const ProblemInstance& inst, WeightMode mode,
                               double h) {
  Eigen::MatrixXd g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      Eigen::MatrixXd xp = x, xm = x;
      xp(i, c) += h;
      xm(i, c) -= h;
      g(i, c) = (ml_cost(xp, inst, mode) - ml_cost(xm, inst, mode)) / (2 * h);
    }
  }
  return g;
}

}  // namespace

TEST_CASE("ml_cost: aligned bearing gives cost -1, anti-aligned +1") {
  // x_i=(0,0), x_j=(1,0): displacement (-1,0); d=1, sigma=1, kappa=1
  Eigen::MatrixXd x(2, 2);
  x << 0, 0, 1, 0;
  auto aligned = one_edge(1.0, 1.0, vec2(-1, 0), 1.0);
  CHECK(ml_cost(x, aligned) == doctest::Approx(-1.0).epsilon(1e-15));
  auto anti = one_edge(1.0, 1.0, vec2(1, 0), 1.0);
  CHECK(ml_cost(x, anti) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("ml_cost: 1/sigma^2 weighting in FullML, unit in UnitQuadratic") {
  Eigen::MatrixXd x(2, 2);
  x << 0, 0, 3, 0;  // ||z|| = 3, d = 1 -> residual 2
  auto inst = one_edge(1.0, 0.5);
  CHECK(ml_cost(x, inst, WeightMode::FullML) ==
        doctest::Approx(4.0 * 4.0).epsilon(1e-14));
  CHECK(ml_cost(x, inst, WeightMode::UnitQuadratic) ==
        doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("ml_cost: coincident points on a bearing edge raise EvalError") {
  Eigen::MatrixXd x(2, 2);
  x << 1, 1, 1, 1;
  auto inst = one_edge(1.0, 1.0, vec2(1, 0), 2.0);
  CHECK_THROWS_WITH_AS(ml_cost(x, inst), doctest::Contains("(1,2)"),
                       EvalError);
}

TEST_CASE("ml_gradient: zero at a consistent configuration") {
  // residual zero and bearing aligned -> gradient vanishes
  Eigen::MatrixXd x(2, 2);
  x << 0, 0, 1, 0;
  auto inst = one_edge(1.0, 1.0, vec2(-1, 0), 5.0);
  CHECK(ml_gradient(x, inst).norm() < 1e-14);
}

TEST_CASE("ml_gradient matches finite differences on random instances") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const ProblemInstance inst = random_noisy_instance(seed);
    Rng rng(seed + 100);
    const Eigen::MatrixXd x = random_positions(inst.num_agents, 2, rng);
    for (WeightMode mode : {WeightMode::UnitQuadratic, WeightMode::FullML}) {
      const Eigen::MatrixXd g = ml_gradient(x, inst, mode);
      const Eigen::MatrixXd fd = fd_ml_gradient(x, inst, mode, 1e-6);
      CHECK((g - fd).norm() / std::max(1.0, fd.norm()) < 1e-5);
    }
  }
}

TEST_CASE("ml translation invariance without anchors") {
  ProblemInstance inst{AmbientDim(2), 3, {}, {}, {}};
  for (auto [i, j] : {std::pair{1, 2}, {2, 3}, {1, 3}}) {
    EdgeMeasurement m;
    m.i = i;
    m.j = j;
    m.d = 1.5;
    m.sigma = 0.5;
    m.bearing = Bearing{vec2(0, 1), 10.0};
    inst.edges.push_back(m);
  }
  Rng rng(4);
  const Eigen::MatrixXd x = random_positions(3, 2, rng);
  Eigen::MatrixXd shifted = x;
  shifted.rowwise() += Eigen::RowVector2d(2.5, -1.0);
  CHECK(ml_cost(x, inst) == doctest::Approx(ml_cost(shifted, inst)).epsilon(1e-12));
  // edge-term gradients sum to zero across nodes
  const Eigen::MatrixXd g = ml_gradient(x, inst);
  CHECK(g.colwise().sum().norm() < 1e-10);
}

TEST_CASE("relaxed_cost: exact single-edge examples") {
  Eigen::MatrixXd x(2, 2);
  x << 0, 0, 1, 0;  // x_i - x_j = (-1, 0)
  Eigen::MatrixXd y(1, 2);
  y << -1, 0;
  Eigen::MatrixXd w(0, 2);

  auto no_bearing = one_edge(1.0, 1.0);
  CHECK(relaxed_cost(x, y, w, no_bearing, WeightMode::UnitQuadratic) ==
        doctest::Approx(0.0).epsilon(1e-15));

  // u=(-1,0), kappa=2, d=1 -> utilde=(-2,0); -utilde.y = -2
  auto with_bearing = one_edge(1.0, 1.0, vec2(-1, 0), 2.0);
  CHECK(relaxed_cost(x, y, w, with_bearing, WeightMode::UnitQuadratic) ==
        doctest::Approx(-2.0).epsilon(1e-14));
}

TEST_CASE("relaxed_gradient: stationary in y at z + utilde/2") {
  auto inst = one_edge(3.0, 1.0, vec2(0, 1), 4.0);
  Eigen::MatrixXd x(2, 2);
  x << 1, 1, 0.5, -0.3;
  const Eigen::VectorXd z = (x.row(0) - x.row(1)).transpose();
  Eigen::MatrixXd y(1, 2);
  y.row(0) = (z + scaled_bearing(inst.edges[0], 2) / 2.0).transpose();
  Eigen::MatrixXd w(0, 2);
  const auto g = relaxed_gradient(x, y, w, inst, WeightMode::UnitQuadratic);
  CHECK(g.y.norm() < 1e-13);
}

TEST_CASE("relaxed_gradient: zero everywhere with no measurements") {
  ProblemInstance inst{AmbientDim(2), 2, {}, {}, {}};
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd y(0, 2), w(0, 2);
  const auto g = relaxed_gradient(x, y, w, inst, WeightMode::UnitQuadratic);
  CHECK(g.x.norm() == 0.0);
  CHECK(relaxed_cost(x, y, w, inst, WeightMode::UnitQuadratic) == 0.0);
}

TEST_CASE("relaxed_gradient matches finite differences (quadratic: 1e-8)") {
  const ProblemInstance inst = random_noisy_instance(21);
  const int E = static_cast<int>(inst.edges.size());
  const int A = static_cast<int>(inst.anchor_links.size());
  Rng rng(22);
  Eigen::MatrixXd x = random_positions(inst.num_agents, 2, rng);
  Eigen::MatrixXd y = random_positions(E, 2, rng);
  Eigen::MatrixXd w = random_positions(A, 2, rng);
  for (WeightMode mode : {WeightMode::UnitQuadratic, WeightMode::FullML}) {
    const auto g = relaxed_gradient(x, y, w, inst, mode);
    const double h = 1e-4;  // exact for quadratics up to roundoff
    auto fd_at = [&](Eigen::MatrixXd& block, Eigen::Index i, Eigen::Index c) {
      const double keep = block(i, c);
      block(i, c) = keep + h;
      const double fp = relaxed_cost(x, y, w, inst, mode);
      block(i, c) = keep - h;
      const double fm = relaxed_cost(x, y, w, inst, mode);
      block(i, c) = keep;
      return (fp - fm) / (2 * h);
    };
    double err = 0, norm = 0;
    auto acc = [&](const Eigen::MatrixXd& gb, Eigen::MatrixXd& block) {
      for (Eigen::Index i = 0; i < block.rows(); ++i) {
        for (Eigen::Index c = 0; c < block.cols(); ++c) {
          const double fd = fd_at(block, i, c);
          err += (gb(i, c) - fd) * (gb(i, c) - fd);
          norm += fd * fd;
        }
      }
    };
    acc(g.x, x);
    acc(g.y, y);
    acc(g.w, w);
    CHECK(std::sqrt(err) / std::max(1.0, std::sqrt(norm)) < 1e-8);
  }
}

TEST_CASE("eval_variational: closed form and brute-force sphere oracle") {
  CHECK(eval_variational(vec2(3, 4), 2.0) == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(eval_variational(vec2(0, 0), 2.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK_THROWS_AS(eval_variational(vec2(1, 0), 0.0), std::invalid_argument);

  Rng rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::VectorXd z = vec2(rng.normal(0, 2), rng.normal(0, 2));
    const double d = rng.uniform(0.5, 3.0);
    const double closed = eval_variational(z, d);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 100000; ++k) {
      const double a = rng.uniform(0, 2 * std::numbers::pi);
      best = std::min(best, (z - d * vec2(std::cos(a), std::sin(a))).squaredNorm());
    }
    CHECK(best >= closed - 1e-12);      // approaches from above
    CHECK(best - closed < 1e-6 * (1 + closed));
  }
}

TEST_CASE("relaxed cost p1 parameterization reproduces ml_cost") {
  // with y,w on the spheres along the estimated directions, the relaxed
  // objective equals the nonconvex one at the same x (any weight mode)
  const ProblemInstance inst = random_noisy_instance(41);
  Rng rng(42);
  const Eigen::MatrixXd x = random_positions(inst.num_agents, 2, rng);
  Eigen::MatrixXd y(inst.edges.size(), 2), w(inst.anchor_links.size(), 2);
  for (size_t e = 0; e < inst.edges.size(); ++e) {
    const auto& m = inst.edges[e];
    const Eigen::VectorXd z = (x.row(m.idx_i()) - x.row(m.idx_j())).transpose();
    y.row(static_cast<Eigen::Index>(e)) = (m.d * z / z.norm()).transpose();
  }
  for (size_t l = 0; l < inst.anchor_links.size(); ++l) {
    const auto& m = inst.anchor_links[l];
    const Eigen::VectorXd z =
        x.row(m.idx_node()).transpose() - inst.anchors[m.idx_anchor()];
    w.row(static_cast<Eigen::Index>(l)) = (m.r * z / z.norm()).transpose();
  }
  for (WeightMode mode : {WeightMode::UnitQuadratic, WeightMode::FullML}) {
    CHECK(relaxed_cost(x, y, w, inst, mode) ==
          doctest::Approx(ml_cost(x, inst, mode)).epsilon(1e-10));
  }
}

TEST_CASE("relaxed_cost is jointly convex (midpoint property)") {
  const ProblemInstance inst = random_noisy_instance(51);
  Rng rng(52);
  const int E = static_cast<int>(inst.edges.size());
  const int A = static_cast<int>(inst.anchor_links.size());
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::MatrixXd xa = random_positions(inst.num_agents, 2, rng);
    const Eigen::MatrixXd xb = random_positions(inst.num_agents, 2, rng);
    const Eigen::MatrixXd ya = random_positions(E, 2, rng);
    const Eigen::MatrixXd yb = random_positions(E, 2, rng);
    const Eigen::MatrixXd wa = random_positions(A, 2, rng);
    const Eigen::MatrixXd wb = random_positions(A, 2, rng);
    const double fa = relaxed_cost(xa, ya, wa, inst, WeightMode::UnitQuadratic);
    const double fb = relaxed_cost(xb, yb, wb, inst, WeightMode::UnitQuadratic);
    const double fm = relaxed_cost(0.5 * (xa + xb), 0.5 * (ya + yb),
                                   0.5 * (wa + wb), inst, WeightMode::UnitQuadratic);
    const double scale = std::abs(fa) + std::abs(fb) + 1.0;
    CHECK(fm <= 0.5 * (fa + fb) + 1e-10 * scale);
  }
}

TEST_CASE("rigid-motion invariance of anchor-free quadratic edge terms") {
  ProblemInstance inst{AmbientDim(2), 3, {}, {}, {}};
  for (auto [i, j] : {std::pair{1, 2}, {2, 3}}) {
    EdgeMeasurement m;
    m.i = i;
    m.j = j;
    m.d = 2.0;
    m.sigma = 1.0;
    inst.edges.push_back(m);  // no bearings: linear terms absent
  }
  Rng rng(61);
  const Eigen::MatrixXd x = random_positions(3, 2, rng);
  const Eigen::MatrixXd y = random_positions(2, 2, rng);
  Eigen::MatrixXd w(0, 2);
  const double angle = 1.1;
  Eigen::Matrix2d R;
  R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  const Eigen::MatrixXd xr = x * R.transpose();
  const Eigen::MatrixXd yr = y * R.transpose();
  CHECK(relaxed_cost(x, y, w, inst, WeightMode::UnitQuadratic) ==
        doctest::Approx(relaxed_cost(xr, yr, w, inst, WeightMode::UnitQuadratic))
            .epsilon(1e-12));
}
