#include "hybridloc/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>

#include "hybridloc/rng.hpp"

namespace hybridloc {

namespace {

// Flattened measurement terms for the hot loops; built once per solve.
struct Terms {
  int n = 0;
  int p = 0;
  struct Edge {
    int i, j;  // 0-based
    double d, wq;
    Eigen::VectorXd ut;  // scaled bearing (zero when absent)
  };
  struct Link {
    int i;  // 0-based agent
    Eigen::VectorXd a;
    double r, wq;
    Eigen::VectorXd vt;
  };
  std::vector<Edge> edges;
  std::vector<Link> links;

  bool empty() const { return edges.empty() && links.empty(); }
};

Terms build_terms(const ProblemInstance& inst, WeightMode mode) {
  Terms t;
  t.n = inst.num_agents;
  t.p = inst.dim.value();
  t.edges.reserve(inst.edges.size());
  for (const auto& e : inst.edges) {
    t.edges.push_back({e.idx_i(), e.idx_j(), e.d, quad_weight(e.sigma, mode),
                       scaled_bearing(e, t.p)});
  }
  t.links.reserve(inst.anchor_links.size());
  for (const auto& l : inst.anchor_links) {
    t.links.push_back({l.idx_node(), inst.anchors[l.idx_anchor()], l.r,
                       quad_weight(l.sigma, mode), scaled_bearing(l, t.p)});
  }
  return t;
}

struct State {
  Eigen::MatrixXd x, y, w;
};

double objective(const Terms& t, const State& s) {
  double f = 0.0;
  for (size_t e = 0; e < t.edges.size(); ++e) {
    const auto& m = t.edges[e];
    const Eigen::Index row = static_cast<Eigen::Index>(e);
    const Eigen::VectorXd diff =
        (s.x.row(m.i) - s.x.row(m.j)).transpose() - s.y.row(row).transpose();
    f += m.wq * diff.squaredNorm() - m.ut.dot(s.y.row(row));
  }
  for (size_t l = 0; l < t.links.size(); ++l) {
    const auto& m = t.links[l];
    const Eigen::Index row = static_cast<Eigen::Index>(l);
    const Eigen::VectorXd diff =
        s.x.row(m.i).transpose() - m.a - s.w.row(row).transpose();
    f += m.wq * diff.squaredNorm() - m.vt.dot(s.w.row(row));
  }
  return f;
}

void gradient(const Terms& t, const State& s, State& g) {
  g.x.setZero();
  g.y.setZero();
  g.w.setZero();
  for (size_t e = 0; e < t.edges.size(); ++e) {
    const auto& m = t.edges[e];
    const Eigen::Index row = static_cast<Eigen::Index>(e);
    const Eigen::RowVectorXd diff =
        s.x.row(m.i) - s.x.row(m.j) - s.y.row(row);
    const Eigen::RowVectorXd tv = (2.0 * m.wq) * diff;
    g.x.row(m.i) += tv;
    g.x.row(m.j) -= tv;
    g.y.row(row) = -tv - m.ut.transpose();
  }
  for (size_t l = 0; l < t.links.size(); ++l) {
    const auto& m = t.links[l];
    const Eigen::Index row = static_cast<Eigen::Index>(l);
    const Eigen::RowVectorXd diff =
        s.x.row(m.i) - m.a.transpose() - s.w.row(row);
    const Eigen::RowVectorXd tv = (2.0 * m.wq) * diff;
    g.x.row(m.i) += tv;
    g.w.row(row) = -tv - m.vt.transpose();
  }
}

// Projected step z = Proj(s - step*g): x free, y/w onto their balls.
void prox_step(const Terms& t, const State& s, const State& g, double step,
               State& out) {
  out.x = s.x - step * g.x;
  out.y = s.y - step * g.y;
  out.w = s.w - step * g.w;
  for (size_t e = 0; e < t.edges.size(); ++e) {
    const Eigen::Index row = static_cast<Eigen::Index>(e);
    const double nrm = out.y.row(row).norm();
    if (nrm > t.edges[e].d) out.y.row(row) *= t.edges[e].d / nrm;
  }
  for (size_t l = 0; l < t.links.size(); ++l) {
    const Eigen::Index row = static_cast<Eigen::Index>(l);
    const double nrm = out.w.row(row).norm();
    if (nrm > t.links[l].r) out.w.row(row) *= t.links[l].r / nrm;
  }
}

double state_dist(const State& a, const State& b) {
  return std::sqrt((a.x - b.x).squaredNorm() + (a.y - b.y).squaredNorm() +
                   (a.w - b.w).squaredNorm());
}

Eigen::MatrixXd initial_x(const ProblemInstance& inst,
                          const SolverConfig& cfg) {
  const int n = inst.num_agents;
  const int p = inst.dim.value();
  switch (cfg.init) {
    case InitStrategy::Given:
      if (cfg.x0.rows() != n || cfg.x0.cols() != p) {
        throw std::invalid_argument("solver init: x0 has the wrong shape");
      }
      return cfg.x0;
    case InitStrategy::Zeros:
      return Eigen::MatrixXd::Zero(n, p);
    case InitStrategy::AnchorCentroid:
    default: {
      Eigen::RowVectorXd centroid = Eigen::RowVectorXd::Zero(p);
      if (!inst.anchors.empty()) {
        for (const auto& a : inst.anchors) centroid += a.transpose();
        centroid /= static_cast<double>(inst.anchors.size());
      }
      Eigen::MatrixXd x(n, p);
      for (int i = 0; i < n; ++i) {
        // tiny per-node offset breaks exact coincidence for the refiner
        x.row(i) = centroid.array() + 1e-6 * static_cast<double>(i + 1);
      }
      return x;
    }
  }
}

// Power iteration on the constant Hessian of the relaxed quadratic. The p
// coordinates decouple into identical blocks, so iterate on the scalar
// (per-node/per-edge/per-link) structure.
double hessian_max_eigenvalue(const Terms& t) {
  if (t.empty()) return 0.0;
  const int N = t.n + static_cast<int>(t.edges.size()) +
                static_cast<int>(t.links.size());
  const int y_off = t.n;
  const int w_off = t.n + static_cast<int>(t.edges.size());

  auto apply = [&](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
    out.setZero();
    for (size_t e = 0; e < t.edges.size(); ++e) {
      const auto& m = t.edges[e];
      const double d = v[m.i] - v[m.j] - v[y_off + static_cast<int>(e)];
      const double c = 2.0 * m.wq * d;
      out[m.i] += c;
      out[m.j] -= c;
      out[y_off + static_cast<int>(e)] -= c;
    }
    for (size_t l = 0; l < t.links.size(); ++l) {
      const auto& m = t.links[l];
      const double d = v[m.i] - v[w_off + static_cast<int>(l)];
      const double c = 2.0 * m.wq * d;
      out[m.i] += c;
      out[w_off + static_cast<int>(l)] -= c;
    }
  };

  Rng rng(0x5EEDF00DULL);  // fixed seed keeps solves deterministic
  Eigen::VectorXd v(N), hv(N);
  for (int i = 0; i < N; ++i) v[i] = rng.normal();
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 20000; ++it) {
    apply(v, hv);
    const double next = v.dot(hv);  // Rayleigh quotient
    const double nrm = hv.norm();
    if (nrm == 0.0) return 0.0;
    v = hv / nrm;
    if (it > 0 && std::abs(next - lambda) <= 1e-9 * std::abs(next)) {
      return next;
    }
    lambda = next;
  }
  return lambda;
}

// Laplacian of the x-block quadratic; shared by x_update and the
// alternating solver (which factorizes it once).
Eigen::MatrixXd x_block_laplacian(const Terms& t) {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(t.n, t.n);
  for (const auto& m : t.edges) {
    L(m.i, m.i) += m.wq;
    L(m.j, m.j) += m.wq;
    L(m.i, m.j) -= m.wq;
    L(m.j, m.i) -= m.wq;
  }
  for (const auto& m : t.links) L(m.i, m.i) += m.wq;
  return L;
}

Eigen::MatrixXd x_block_rhs(const Terms& t, const Eigen::MatrixXd& y,
                            const Eigen::MatrixXd& w) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(t.n, t.p);
  for (size_t e = 0; e < t.edges.size(); ++e) {
    const auto& m = t.edges[e];
    const Eigen::Index row = static_cast<Eigen::Index>(e);
    b.row(m.i) += m.wq * y.row(row);
    b.row(m.j) -= m.wq * y.row(row);
  }
  for (size_t l = 0; l < t.links.size(); ++l) {
    const auto& m = t.links[l];
    const Eigen::Index row = static_cast<Eigen::Index>(l);
    b.row(m.i) += m.wq * (m.a.transpose() + w.row(row));
  }
  return b;
}

// Every agent must reach an anchor-linked agent through the edge set,
// otherwise the x-block system is singular.
void require_anchor_paths(const Terms& t) {
  std::vector<char> seen(t.n, 0);
  std::vector<int> stack;
  for (const auto& m : t.links) {
    if (!seen[m.i]) {
      seen[m.i] = 1;
      stack.push_back(m.i);
    }
  }
  std::vector<std::vector<int>> adj(t.n);
  for (const auto& m : t.edges) {
    adj[m.i].push_back(m.j);
    adj[m.j].push_back(m.i);
  }
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
  for (int i = 0; i < t.n; ++i) {
    if (!seen[i]) throw std::runtime_error("component with no anchor path");
  }
}

void exact_yw_update(const Terms& t, State& s) {
  for (size_t e = 0; e < t.edges.size(); ++e) {
    const auto& m = t.edges[e];
    const Eigen::Index row = static_cast<Eigen::Index>(e);
    const Eigen::VectorXd z =
        (s.x.row(m.i) - s.x.row(m.j)).transpose() + m.ut / (2.0 * m.wq);
    const double nrm = z.norm();
    s.y.row(row) =
        (nrm <= m.d ? z : (m.d / nrm) * z).transpose();
  }
  for (size_t l = 0; l < t.links.size(); ++l) {
    const auto& m = t.links[l];
    const Eigen::Index row = static_cast<Eigen::Index>(l);
    const Eigen::VectorXd z =
        s.x.row(m.i).transpose() - m.a + m.vt / (2.0 * m.wq);
    const double nrm = z.norm();
    s.w.row(row) = (nrm <= m.r ? z : (m.r / nrm) * z).transpose();
  }
}

Solution to_solution(const Terms& t, const State& s, int iters, bool converged,
                     double pg_residual) {
  Solution sol;
  sol.x = s.x;
  sol.y = s.y;
  sol.w = s.w;
  sol.objective = objective(t, s);
  sol.iterations = iters;
  sol.converged = converged;
  sol.pg_residual = pg_residual;
  return sol;
}

double pg_residual_at(const Terms& t, const State& s, double L, State& g,
                      State& scratch) {
  gradient(t, s, g);
  prox_step(t, s, g, 1.0 / L, scratch);
  return L * state_dist(s, scratch);
}

}  // namespace

Eigen::VectorXd project_ball(const Eigen::VectorXd& v, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("project_ball: radius <= 0");
  const double nrm = v.norm();
  if (nrm <= radius) return v;
  return (radius / nrm) * v;
}

Eigen::VectorXd y_update(const Eigen::VectorXd& z,
                         const Eigen::VectorXd& utilde, double d, double w_q) {
  return project_ball(z + utilde / (2.0 * w_q), d);
}

Eigen::VectorXd y_update(const Eigen::VectorXd& x_i, const Eigen::VectorXd& x_j,
                         const Eigen::VectorXd& utilde, double d, double w_q) {
  return y_update(Eigen::VectorXd(x_i - x_j), utilde, d, w_q);
}

Eigen::MatrixXd x_update(const Eigen::MatrixXd& y, const Eigen::MatrixXd& w,
                         const ProblemInstance& inst, WeightMode mode) {
  const Terms t = build_terms(inst, mode);
  if (y.rows() != static_cast<Eigen::Index>(t.edges.size()) ||
      w.rows() != static_cast<Eigen::Index>(t.links.size())) {
    throw std::invalid_argument("x_update: y/w size mismatch");
  }
  require_anchor_paths(t);
  const Eigen::MatrixXd L = x_block_laplacian(t);
  Eigen::LLT<Eigen::MatrixXd> llt(L);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("component with no anchor path");
  }
  return llt.solve(x_block_rhs(t, y, w));
}

double hessian_max_eigenvalue(const ProblemInstance& inst, WeightMode mode) {
  return hessian_max_eigenvalue(build_terms(inst, mode));
}

double lipschitz_estimate(const ProblemInstance& inst, WeightMode mode) {
  return 1.01 * hessian_max_eigenvalue(inst, mode);
}

Solution solve_convex(const ProblemInstance& inst, const SolverConfig& cfg,
                      WeightMode mode) {
  if (!(cfg.tol_pg > 0) || cfg.max_iters < 1) {
    throw std::invalid_argument("solve_convex: invalid SolverConfig");
  }
  const Terms t = build_terms(inst, mode);
  State cur{initial_x(inst, cfg),
            Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.edges.size()), t.p),
            Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.links.size()), t.p)};

  const double L = 1.01 * hessian_max_eigenvalue(t);
  if (L == 0.0) return to_solution(t, cur, 0, true, 0.0);

  const double tol = cfg.tol_pg * inst.scale();
  const double step = 1.0 / L;

  State v = cur, next = cur, g = cur, scratch = cur;
  double f_cur = objective(t, cur);
  double theta = 1.0;
  double res = std::numeric_limits<double>::infinity();
  int iter = 0;
  bool converged = false;

  while (iter < cfg.max_iters) {
    ++iter;
    gradient(t, v, g);
    prox_step(t, v, g, step, next);
    double f_next = objective(t, next);
    double theta_eff = theta;
    if (cfg.use_acceleration && f_next > f_cur) {
      // function-value restart: discard the extrapolated step and take a
      // plain descent step from the current iterate
      gradient(t, cur, g);
      prox_step(t, cur, g, step, next);
      f_next = objective(t, next);
      theta_eff = 1.0;
    }

    res = pg_residual_at(t, next, L, g, scratch);
    if (res <= tol) {
      cur = next;
      f_cur = f_next;
      converged = true;
      break;
    }

    if (cfg.use_acceleration) {
      const double theta_next =
          0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta_eff * theta_eff));
      const double mom = (theta_eff - 1.0) / theta_next;
      v.x = next.x + mom * (next.x - cur.x);
      v.y = next.y + mom * (next.y - cur.y);
      v.w = next.w + mom * (next.w - cur.w);
      theta = theta_next;
    } else {
      v = next;
    }
    cur = next;
    f_cur = f_next;
  }
  return to_solution(t, cur, iter, converged, res);
}

Solution solve_alternating(const ProblemInstance& inst,
                           const SolverConfig& cfg, WeightMode mode) {
  if (cfg.max_iters < 1) {
    throw std::invalid_argument("solve_alternating: invalid SolverConfig");
  }
  const Terms t = build_terms(inst, mode);
  State cur{initial_x(inst, cfg),
            Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.edges.size()), t.p),
            Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.links.size()), t.p)};
  if (t.empty()) return to_solution(t, cur, 0, true, 0.0);

  require_anchor_paths(t);
  const Eigen::MatrixXd L_lap = x_block_laplacian(t);
  Eigen::LLT<Eigen::MatrixXd> llt(L_lap);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("component with no anchor path");
  }

  double f_prev = objective(t, cur);
  int sweep = 0;
  bool converged = false;
  while (sweep < cfg.max_iters) {
    ++sweep;
    exact_yw_update(t, cur);
    cur.x = llt.solve(x_block_rhs(t, cur.y, cur.w));
    const double f = objective(t, cur);
    if (std::abs(f_prev - f) <= 1e-12 * (1.0 + std::abs(f))) {
      converged = true;
      f_prev = f;
      break;
    }
    f_prev = f;
  }

  double res = 0.0;
  const double L = 1.01 * hessian_max_eigenvalue(t);
  if (L > 0.0) {
    State g = cur, scratch = cur;
    res = pg_residual_at(t, cur, L, g, scratch);
  }
  return to_solution(t, cur, sweep, converged, res);
}

RefineResult refine_nonconvex(const Eigen::MatrixXd& x0,
                              const ProblemInstance& inst,
                              const RefineOptions& opts) {
  const double tol = opts.tol * inst.scale();

  RefineResult out;
  out.x = x0;
  double f = ml_cost(out.x, inst, opts.mode);  // throws on coincident pairs
  Eigen::MatrixXd g = ml_gradient(out.x, inst, opts.mode);
  out.grad_norm = g.norm();
  if (out.grad_norm <= tol) {
    out.converged = true;
    return out;
  }

  // crude curvature bound for the initial step
  double curv = 1.0;
  for (const auto& e : inst.edges) {
    curv += 2.0 * quad_weight(e.sigma, opts.mode);
    if (e.bearing) curv += 2.0 * e.bearing->kappa / (e.d * e.d);
  }
  for (const auto& a : inst.anchor_links) {
    curv += 2.0 * quad_weight(a.sigma, opts.mode);
    if (a.bearing) curv += 2.0 * a.bearing->kappa / (a.r * a.r);
  }
  double alpha = 1.0 / curv;
  const double alpha_max = 1e4 / curv;

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    const double gsq = g.squaredNorm();
    bool accepted = false;
    Eigen::MatrixXd cand;
    double f_cand = 0.0;
    for (int ls = 0; ls < 64; ++ls) {
      cand = out.x - alpha * g;
      try {
        f_cand = ml_cost(cand, inst, opts.mode);
      } catch (const EvalError&) {
        alpha *= 0.5;
        continue;
      }
      if (f_cand <= f - 1e-4 * alpha * gsq) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      out.iterations = iter - 1;
      out.line_search_failed = true;
      return out;
    }
    out.x = cand;
    f = f_cand;
    g = ml_gradient(out.x, inst, opts.mode);
    out.grad_norm = g.norm();
    out.iterations = iter;
    if (out.grad_norm <= tol) {
      out.converged = true;
      return out;
    }
    alpha = std::min(alpha * 1.5, alpha_max);
  }
  return out;
}

}  // namespace hybridloc
