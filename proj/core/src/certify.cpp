#include "hybridloc/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "hybridloc/cost.hpp"

namespace hybridloc {

namespace {

constexpr double kEps = 1e-12;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Residual norm lists shared by both E1 normalizations.
struct ResidualTerms {
  std::vector<double> edge;              // per edge
  std::vector<double> link;              // per anchor link
  std::map<int, std::vector<size_t>> by_node;  // link indices per agent
};

ResidualTerms e1_terms(const Solution& sol, const ProblemInstance& inst) {
  ResidualTerms t;
  for (size_t e = 0; e < inst.edges.size(); ++e) {
    const auto& m = inst.edges[e];
    const Eigen::VectorXd z =
        (sol.x.row(m.idx_i()) - sol.x.row(m.idx_j())).transpose();
    const double nz = z.norm();
    if (nz < kEps) {
      std::ostringstream os;
      os << "coincident estimated positions on edge {" << m.i << "," << m.j
         << "}";
      throw EvalError(os.str());
    }
    t.edge.push_back(
        (sol.y.row(static_cast<Eigen::Index>(e)).transpose() - m.d * z / nz)
            .norm());
  }
  for (size_t l = 0; l < inst.anchor_links.size(); ++l) {
    const auto& m = inst.anchor_links[l];
    const Eigen::VectorXd z =
        sol.x.row(m.idx_node()).transpose() - inst.anchors[m.idx_anchor()];
    const double nz = z.norm();
    if (nz < kEps) {
      std::ostringstream os;
      os << "coincident estimated position and anchor on link (" << m.i << ","
         << m.k << ")";
      throw EvalError(os.str());
    }
    t.link.push_back(
        (sol.w.row(static_cast<Eigen::Index>(l)).transpose() - m.r * z / nz)
            .norm());
    t.by_node[m.i].push_back(l);
  }
  return t;
}

ResidualTerms e2_terms(const Solution& sol, const ProblemInstance& inst) {
  ResidualTerms t;
  for (size_t e = 0; e < inst.edges.size(); ++e) {
    t.edge.push_back(std::abs(
        sol.y.row(static_cast<Eigen::Index>(e)).norm() - inst.edges[e].d));
  }
  for (size_t l = 0; l < inst.anchor_links.size(); ++l) {
    t.link.push_back(
        std::abs(sol.w.row(static_cast<Eigen::Index>(l)).norm() -
                 inst.anchor_links[l].r));
    t.by_node[inst.anchor_links[l].i].push_back(l);
  }
  return t;
}

double pooled_mean(const ResidualTerms& t) {
  const size_t count = t.edge.size() + t.link.size();
  if (count == 0) return 0.0;
  double s = 0.0;
  for (double v : t.edge) s += v;
  for (double v : t.link) s += v;
  return s / static_cast<double>(count);
}

double node_grouped(const ResidualTerms& t) {
  double out = 0.0;
  if (!t.edge.empty()) {
    double s = 0.0;
    for (double v : t.edge) s += v;
    out += s / static_cast<double>(t.edge.size());
  }
  for (const auto& [node, idxs] : t.by_node) {
    double s = 0.0;
    for (size_t l : idxs) s += t.link[l];
    out += s / static_cast<double>(idxs.size());
  }
  return out;
}

double angle_deg(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double raw = a.dot(b) / (a.norm() * b.norm());
  if (std::abs(raw) > 1.0 + 1e-12) {
    std::fprintf(stderr,
                 "hybridloc: clamping cosine %.17g beyond roundoff tolerance\n",
                 raw);
  }
  return std::acos(std::clamp(raw, -1.0, 1.0)) * kRadToDeg;
}

}  // namespace

double residual_e1(const Solution& sol, const ProblemInstance& inst) {
  return pooled_mean(e1_terms(sol, inst));
}

double residual_e1_node_grouped(const Solution& sol,
                                const ProblemInstance& inst) {
  return node_grouped(e1_terms(sol, inst));
}

double residual_e2(const Solution& sol, const ProblemInstance& inst) {
  return pooled_mean(e2_terms(sol, inst));
}

double residual_e2_node_grouped(const Solution& sol,
                                const ProblemInstance& inst) {
  return node_grouped(e2_terms(sol, inst));
}

std::pair<std::vector<double>, std::vector<double>> suboptimality_angles(
    const Solution& sol, const ProblemInstance& inst, int* undefined) {
  std::vector<double> thetas, betas;
  int undef = 0;
  for (size_t e = 0; e < inst.edges.size(); ++e) {
    const auto& m = inst.edges[e];
    const Eigen::VectorXd y = sol.y.row(static_cast<Eigen::Index>(e));
    const Eigen::VectorXd z =
        (sol.x.row(m.idx_i()) - sol.x.row(m.idx_j())).transpose();
    if (y.norm() < kEps || z.norm() < kEps) {
      ++undef;
      continue;
    }
    thetas.push_back(angle_deg(y, z));
  }
  for (size_t l = 0; l < inst.anchor_links.size(); ++l) {
    const auto& m = inst.anchor_links[l];
    const Eigen::VectorXd w = sol.w.row(static_cast<Eigen::Index>(l));
    const Eigen::VectorXd z =
        sol.x.row(m.idx_node()).transpose() - inst.anchors[m.idx_anchor()];
    if (w.norm() < kEps || z.norm() < kEps) {
      ++undef;
      continue;
    }
    betas.push_back(angle_deg(w, z));
  }
  if (undefined) *undefined = undef;
  return {std::move(thetas), std::move(betas)};
}

LocalizationError localization_error(const Eigen::MatrixXd& x_hat,
                                     const GroundTruth& truth) {
  if (x_hat.rows() != truth.positions.rows() ||
      x_hat.cols() != truth.positions.cols()) {
    throw std::invalid_argument("localization_error: size mismatch");
  }
  LocalizationError out;
  for (Eigen::Index i = 0; i < x_hat.rows(); ++i) {
    const double d = (x_hat.row(i) - truth.positions.row(i)).norm();
    out.per_node.push_back(d);
    out.mean += d;
    out.max = std::max(out.max, d);
  }
  out.mean /= static_cast<double>(x_hat.rows());
  return out;
}

CertificateReport certify(const Solution& sol, const ProblemInstance& inst,
                          const GroundTruth* truth) {
  CertificateReport rep;
  const ResidualTerms t1 = e1_terms(sol, inst);
  const ResidualTerms t2 = e2_terms(sol, inst);
  rep.e1 = pooled_mean(t1);
  rep.e2 = pooled_mean(t2);
  rep.e1_node_grouped = node_grouped(t1);
  rep.e2_node_grouped = node_grouped(t2);
  auto [thetas, betas] = suboptimality_angles(sol, inst, &rep.undefined_angles);
  rep.thetas_deg = std::move(thetas);
  rep.betas_deg = std::move(betas);
  if (truth) {
    LocalizationError le = localization_error(sol.x, *truth);
    rep.loc_error = le.mean;
    rep.loc_error_max = le.max;
    rep.per_node_error = std::move(le.per_node);
  }
  return rep;
}

std::string certificate_to_json(const CertificateReport& rep) {
  nlohmann::json doc;
  doc["e1"] = rep.e1;
  doc["e2"] = rep.e2;
  doc["e1_node_grouped"] = rep.e1_node_grouped;
  doc["e2_node_grouped"] = rep.e2_node_grouped;
  doc["thetas_deg"] = rep.thetas_deg;
  doc["betas_deg"] = rep.betas_deg;
  doc["undefined_angles"] = rep.undefined_angles;
  if (rep.loc_error) {
    doc["loc_error"] = *rep.loc_error;
    doc["loc_error_max"] = *rep.loc_error_max;
    doc["per_node_error"] = rep.per_node_error;
  }
  return doc.dump(2);
}

CertificateReport certificate_from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  CertificateReport rep;
  rep.e1 = doc.at("e1").get<double>();
  rep.e2 = doc.at("e2").get<double>();
  rep.e1_node_grouped = doc.value("e1_node_grouped", 0.0);
  rep.e2_node_grouped = doc.value("e2_node_grouped", 0.0);
  rep.thetas_deg = doc.value("thetas_deg", std::vector<double>{});
  rep.betas_deg = doc.value("betas_deg", std::vector<double>{});
  rep.undefined_angles = doc.value("undefined_angles", 0);
  if (doc.contains("loc_error")) {
    rep.loc_error = doc["loc_error"].get<double>();
    rep.loc_error_max = doc.value("loc_error_max", 0.0);
    rep.per_node_error = doc.value("per_node_error", std::vector<double>{});
  }
  return rep;
}

}  // namespace hybridloc
