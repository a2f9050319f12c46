#include "hybridloc/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hybridloc/validate.hpp"

namespace hybridloc {

namespace {

using nlohmann::json;

json vec_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vec_from_json(const json& arr, int expect_dim,
                              const std::string& where) {
  if (!arr.is_array()) throw ParseError(where + ": expected an array");
  if (expect_dim >= 0 && static_cast<int>(arr.size()) != expect_dim) {
    throw ParseError(where + ": expected " + std::to_string(expect_dim) +
                     " components, got " + std::to_string(arr.size()));
  }
  Eigen::VectorXd v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw ParseError(where + ": non-numeric entry");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

template <typename T>
T require(const json& obj, const char* field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw ParseError(where + ": missing field \"" + field + "\"");
  }
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": field \"" + field + "\" has the wrong type");
  }
}

}  // namespace

std::string serialize(const ProblemInstance& inst,
                      const std::optional<GroundTruth>& truth) {
  json doc;
  doc["dim"] = inst.dim.value();
  doc["n"] = inst.num_agents;
  json anchors = json::array();
  for (const auto& a : inst.anchors) anchors.push_back(vec_to_json(a));
  doc["anchors"] = std::move(anchors);

  json edges = json::array();
  for (const auto& e : inst.edges) {
    json je;
    je["i"] = e.i;
    je["j"] = e.j;
    je["d"] = e.d;
    je["sigma"] = e.sigma;
    if (e.bearing) {
      je["u"] = vec_to_json(e.bearing->dir);
      je["kappa"] = e.bearing->kappa;
    }
    edges.push_back(std::move(je));
  }
  doc["edges"] = std::move(edges);

  json links = json::array();
  for (const auto& l : inst.anchor_links) {
    json jl;
    jl["i"] = l.i;
    jl["k"] = l.k;
    jl["r"] = l.r;
    jl["varsigma"] = l.sigma;
    if (l.bearing) {
      jl["v"] = vec_to_json(l.bearing->dir);
      jl["varkappa"] = l.bearing->kappa;
    }
    links.push_back(std::move(jl));
  }
  doc["anchor_links"] = std::move(links);

  if (truth) {
    json t = json::array();
    for (Eigen::Index i = 0; i < truth->positions.rows(); ++i) {
      t.push_back(vec_to_json(truth->positions.row(i).transpose()));
    }
    doc["truth"] = std::move(t);
  }
  return doc.dump(2);
}

ParsedDocument parse(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ParseError(std::string("document is not valid JSON: ") + err.what());
  }
  if (!doc.is_object()) throw ParseError("top level: expected an object");

  ParsedDocument out{ProblemInstance{AmbientDim(2), 0, {}, {}, {}},
                     std::nullopt};
  const int p = require<int>(doc, "dim", "top level");
  if (p < 2) throw ParseError("top level: dim must be >= 2");
  out.instance.dim = AmbientDim(p);
  out.instance.num_agents = require<int>(doc, "n", "top level");

  const json& anchors = doc.contains("anchors") ? doc["anchors"] : json::array();
  if (!anchors.is_array()) throw ParseError("anchors: expected an array");
  for (size_t k = 0; k < anchors.size(); ++k) {
    out.instance.anchors.push_back(
        vec_from_json(anchors[k], p, "anchors[" + std::to_string(k) + "]"));
  }

  const json& edges = doc.contains("edges") ? doc["edges"] : json::array();
  if (!edges.is_array()) throw ParseError("edges: expected an array");
  for (size_t e = 0; e < edges.size(); ++e) {
    const std::string where = "edges[" + std::to_string(e) + "]";
    const json& je = edges[e];
    if (!je.is_object()) throw ParseError(where + ": expected an object");
    EdgeMeasurement m;
    m.i = require<int>(je, "i", where);
    m.j = require<int>(je, "j", where);
    m.d = require<double>(je, "d", where);
    m.sigma = require<double>(je, "sigma", where);
    if (je.contains("u") != je.contains("kappa")) {
      throw ParseError(where + ": bearing requires both \"u\" and \"kappa\"");
    }
    if (je.contains("u")) {
      m.bearing = Bearing{vec_from_json(je["u"], p, where + ".u"),
                          require<double>(je, "kappa", where)};
    }
    out.instance.edges.push_back(std::move(m));
  }

  const json& links =
      doc.contains("anchor_links") ? doc["anchor_links"] : json::array();
  if (!links.is_array()) throw ParseError("anchor_links: expected an array");
  for (size_t l = 0; l < links.size(); ++l) {
    const std::string where = "anchor_links[" + std::to_string(l) + "]";
    const json& jl = links[l];
    if (!jl.is_object()) throw ParseError(where + ": expected an object");
    AnchorMeasurement m;
    m.i = require<int>(jl, "i", where);
    m.k = require<int>(jl, "k", where);
    m.r = require<double>(jl, "r", where);
    m.sigma = require<double>(jl, "varsigma", where);
    if (jl.contains("v") != jl.contains("varkappa")) {
      throw ParseError(where + ": bearing requires both \"v\" and \"varkappa\"");
    }
    if (jl.contains("v")) {
      m.bearing = Bearing{vec_from_json(jl["v"], p, where + ".v"),
                          require<double>(jl, "varkappa", where)};
    }
    out.instance.anchor_links.push_back(std::move(m));
  }

  if (doc.contains("truth")) {
    const json& t = doc["truth"];
    if (!t.is_array()) throw ParseError("truth: expected an array");
    if (static_cast<int>(t.size()) != out.instance.num_agents) {
      throw ParseError("truth: expected n = " +
                       std::to_string(out.instance.num_agents) + " positions");
    }
    Eigen::MatrixXd pos(t.size(), p);
    for (size_t i = 0; i < t.size(); ++i) {
      pos.row(static_cast<Eigen::Index>(i)) =
          vec_from_json(t[i], p, "truth[" + std::to_string(i) + "]")
              .transpose();
    }
    out.truth = GroundTruth{std::move(pos)};
  }

  ValidationResult val = validate_instance(out.instance);
  if (!val.ok()) {
    std::ostringstream os;
    os << "instance violates invariants:";
    for (const auto& v : val.violations) os << "\n  - " << v;
    throw ParseError(os.str());
  }
  return out;
}

void save_instance(const std::string& path, const ProblemInstance& inst,
                   const std::optional<GroundTruth>& truth) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << serialize(inst, truth) << "\n";
}

ParsedDocument load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace hybridloc
