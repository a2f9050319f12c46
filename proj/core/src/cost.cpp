#include "hybridloc/cost.hpp"

#include <cmath>
#include <sstream>

namespace hybridloc {

namespace {

constexpr double kEpsDiv = 1e-12;

[[noreturn]] void throw_coincident(int a, int b, const char* kind) {
  std::ostringstream os;
  os << "coincident points on measured " << kind << " (" << a << "," << b
     << "): distance below 1e-12";
  throw EvalError(os.str());
}

}  // namespace

double quad_weight(double sigma, WeightMode mode) {
  return mode == WeightMode::UnitQuadratic ? 1.0 : 1.0 / (sigma * sigma);
}

Eigen::VectorXd scaled_bearing(const EdgeMeasurement& e, int p) {
  if (!e.bearing) return Eigen::VectorXd::Zero(p);
  return (e.bearing->kappa / e.d) * e.bearing->dir;
}

Eigen::VectorXd scaled_bearing(const AnchorMeasurement& a, int p) {
  if (!a.bearing) return Eigen::VectorXd::Zero(p);
  return (a.bearing->kappa / a.r) * a.bearing->dir;
}

double ml_cost(const Eigen::MatrixXd& x, const ProblemInstance& inst,
               WeightMode mode) {
  double f = 0.0;
  for (const auto& e : inst.edges) {
    const Eigen::VectorXd z =
        (x.row(e.idx_i()) - x.row(e.idx_j())).transpose();
    const double nz = z.norm();
    const double res = nz - e.d;
    f += quad_weight(e.sigma, mode) * res * res;
    if (e.bearing) {
      if (nz < kEpsDiv) throw_coincident(e.i, e.j, "edge");
      f -= e.bearing->kappa * e.bearing->dir.dot(z) / nz;
    }
  }
  for (const auto& a : inst.anchor_links) {
    const Eigen::VectorXd z =
        x.row(a.idx_node()).transpose() - inst.anchors[a.idx_anchor()];
    const double nz = z.norm();
    const double res = nz - a.r;
    f += quad_weight(a.sigma, mode) * res * res;
    if (a.bearing) {
      if (nz < kEpsDiv) throw_coincident(a.i, a.k, "anchor link");
      f -= a.bearing->kappa * a.bearing->dir.dot(z) / nz;
    }
  }
  return f;
}

Eigen::MatrixXd ml_gradient(const Eigen::MatrixXd& x,
                            const ProblemInstance& inst, WeightMode mode) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  for (const auto& e : inst.edges) {
    const Eigen::VectorXd z =
        (x.row(e.idx_i()) - x.row(e.idx_j())).transpose();
    const double nz = z.norm();
    if (nz < kEpsDiv) throw_coincident(e.i, e.j, "edge");
    const Eigen::VectorXd zh = z / nz;
    Eigen::VectorXd term =
        2.0 * quad_weight(e.sigma, mode) * (nz - e.d) * zh;
    if (e.bearing) {
      const Eigen::VectorXd& u = e.bearing->dir;
      // d/dz [u.z/||z||] = (u - (u.zh) zh) / ||z||
      term -= e.bearing->kappa * (u - u.dot(zh) * zh) / nz;
    }
    g.row(e.idx_i()) += term.transpose();
    g.row(e.idx_j()) -= term.transpose();
  }
  for (const auto& a : inst.anchor_links) {
    const Eigen::VectorXd z =
        x.row(a.idx_node()).transpose() - inst.anchors[a.idx_anchor()];
    const double nz = z.norm();
    if (nz < kEpsDiv) throw_coincident(a.i, a.k, "anchor link");
    const Eigen::VectorXd zh = z / nz;
    Eigen::VectorXd term =
        2.0 * quad_weight(a.sigma, mode) * (nz - a.r) * zh;
    if (a.bearing) {
      const Eigen::VectorXd& v = a.bearing->dir;
      term -= a.bearing->kappa * (v - v.dot(zh) * zh) / nz;
    }
    g.row(a.idx_node()) += term.transpose();
  }
  return g;
}

double relaxed_cost(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                    const Eigen::MatrixXd& w, const ProblemInstance& inst,
                    WeightMode mode) {
  if (y.rows() != static_cast<Eigen::Index>(inst.edges.size()) ||
      w.rows() != static_cast<Eigen::Index>(inst.anchor_links.size())) {
    throw std::invalid_argument("relaxed_cost: y/w size mismatch");
  }
  const int p = inst.dim.value();
  double f = 0.0;
  for (size_t e = 0; e < inst.edges.size(); ++e) {
    const auto& m = inst.edges[e];
    const Eigen::VectorXd diff =
        (x.row(m.idx_i()) - x.row(m.idx_j())).transpose() -
        y.row(static_cast<Eigen::Index>(e)).transpose();
    f += quad_weight(m.sigma, mode) * diff.squaredNorm();
    f -= scaled_bearing(m, p).dot(y.row(static_cast<Eigen::Index>(e)));
  }
  for (size_t l = 0; l < inst.anchor_links.size(); ++l) {
    const auto& m = inst.anchor_links[l];
    const Eigen::VectorXd diff = x.row(m.idx_node()).transpose() -
                                 inst.anchors[m.idx_anchor()] -
                                 w.row(static_cast<Eigen::Index>(l)).transpose();
    f += quad_weight(m.sigma, mode) * diff.squaredNorm();
    f -= scaled_bearing(m, p).dot(w.row(static_cast<Eigen::Index>(l)));
  }
  return f;
}

RelaxedGradient relaxed_gradient(const Eigen::MatrixXd& x,
                                 const Eigen::MatrixXd& y,
                                 const Eigen::MatrixXd& w,
                                 const ProblemInstance& inst,
                                 WeightMode mode) {
  if (y.rows() != static_cast<Eigen::Index>(inst.edges.size()) ||
      w.rows() != static_cast<Eigen::Index>(inst.anchor_links.size())) {
    throw std::invalid_argument("relaxed_gradient: y/w size mismatch");
  }
  const int p = inst.dim.value();
  RelaxedGradient g;
  g.x = Eigen::MatrixXd::Zero(x.rows(), p);
  g.y = Eigen::MatrixXd::Zero(y.rows(), p);
  g.w = Eigen::MatrixXd::Zero(w.rows(), p);
  for (size_t e = 0; e < inst.edges.size(); ++e) {
    const auto& m = inst.edges[e];
    const Eigen::Index row = static_cast<Eigen::Index>(e);
    const Eigen::VectorXd diff =
        (x.row(m.idx_i()) - x.row(m.idx_j())).transpose() -
        y.row(row).transpose();
    const Eigen::VectorXd t = 2.0 * quad_weight(m.sigma, mode) * diff;
    g.x.row(m.idx_i()) += t.transpose();
    g.x.row(m.idx_j()) -= t.transpose();
    g.y.row(row) = (-t - scaled_bearing(m, p)).transpose();
  }
  for (size_t l = 0; l < inst.anchor_links.size(); ++l) {
    const auto& m = inst.anchor_links[l];
    const Eigen::Index row = static_cast<Eigen::Index>(l);
    const Eigen::VectorXd diff = x.row(m.idx_node()).transpose() -
                                 inst.anchors[m.idx_anchor()] -
                                 w.row(row).transpose();
    const Eigen::VectorXd t = 2.0 * quad_weight(m.sigma, mode) * diff;
    g.x.row(m.idx_node()) += t.transpose();
    g.w.row(row) = (-t - scaled_bearing(m, p)).transpose();
  }
  return g;
}

double eval_variational(const Eigen::VectorXd& z, double d) {
  if (!(d > 0)) throw std::invalid_argument("eval_variational: d <= 0");
  const double res = z.norm() - d;
  return res * res;
}

}  // namespace hybridloc
