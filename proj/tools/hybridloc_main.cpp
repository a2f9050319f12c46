// hybridloc command line: generate / solve / certify / mc / report.
//
// Exit codes: 0 success; 1 I/O or data error; 2 usage error;
// 3 acceptance-check failure (report --check); 4 solver non-convergence.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hybridloc/certify.hpp"
#include "hybridloc/io.hpp"
#include "hybridloc/mc.hpp"

namespace {

using namespace hybridloc;
using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t c = 0; c < rows[i].size(); ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          rows[i][c].get<double>();
    }
  }
  return m;
}

struct SolutionFile {
  Solution sol;
  std::optional<Eigen::MatrixXd> x_refined;
};

void write_solution(const std::string& path, const Solution& sol,
                    WeightMode mode, const std::string& algorithm,
                    const std::optional<Eigen::MatrixXd>& x_refined) {
  json doc;
  doc["x"] = matrix_to_json(sol.x);
  doc["y"] = matrix_to_json(sol.y);
  doc["w"] = matrix_to_json(sol.w);
  doc["objective"] = sol.objective;
  doc["iterations"] = sol.iterations;
  doc["converged"] = sol.converged;
  doc["pg_residual"] = sol.pg_residual;
  doc["mode"] = mode_name(mode);
  doc["algorithm"] = algorithm;
  if (x_refined) doc["x_refined"] = matrix_to_json(*x_refined);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << doc.dump(2) << "\n";
}

SolutionFile read_solution(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  json doc = json::parse(in);
  SolutionFile out;
  out.sol.x = matrix_from_json(doc.at("x"));
  out.sol.y = matrix_from_json(doc.at("y"));
  out.sol.w = matrix_from_json(doc.at("w"));
  out.sol.objective = doc.value("objective", 0.0);
  out.sol.iterations = doc.value("iterations", 0);
  out.sol.converged = doc.value("converged", false);
  out.sol.pg_residual = doc.value("pg_residual", 0.0);
  if (doc.contains("x_refined")) {
    out.x_refined = matrix_from_json(doc["x_refined"]);
  }
  return out;
}

WeightMode parse_mode(const std::string& s) {
  if (s == "unit") return WeightMode::UnitQuadratic;
  if (s == "full-ml") return WeightMode::FullML;
  throw CLI::ValidationError("--mode", "expected unit or full-ml");
}

int cmd_generate(const GenConfig& cfg_in, bool radius_set,
                 const std::string& out_path) {
  GenConfig cfg = cfg_in;
  Rng rng(cfg.seed);
  if (!radius_set) {
    cfg.comm_radius = calibrate_comm_radius(cfg, rng);
    std::cout << "calibrated comm_radius: " << *cfg.comm_radius << " m\n";
  }
  GenResult res = make_instance(cfg, rng);
  save_instance(out_path, res.instance, res.truth);
  std::cout << "instance: " << res.instance.num_agents << " agents, "
            << res.instance.num_anchors() << " anchors, "
            << res.instance.edges.size() << " edges, "
            << res.instance.anchor_links.size() << " anchor links\n"
            << "localizable after " << res.attempts << " attempt(s), "
            << "comm_radius " << *cfg.comm_radius << " m\n"
            << "wrote " << out_path << "\n";
  return 0;
}

int cmd_solve(const std::string& in_path, const std::string& out_path,
              const std::string& mode_str, const std::string& algorithm,
              SolverConfig scfg, const std::string& init, bool refine) {
  ParsedDocument doc = load_instance(in_path);
  const WeightMode mode = parse_mode(mode_str);
  if (init == "zeros") {
    scfg.init = InitStrategy::Zeros;
  } else if (init == "anchor-centroid") {
    scfg.init = InitStrategy::AnchorCentroid;
  } else {
    throw CLI::ValidationError("--init", "expected zeros or anchor-centroid");
  }
  Solution sol = algorithm == "alternating"
                     ? solve_alternating(doc.instance, scfg, mode)
                     : solve_convex(doc.instance, scfg, mode);
  std::optional<Eigen::MatrixXd> x_refined;
  if (refine) {
    x_refined = refine_nonconvex(sol.x, doc.instance).x;
  }
  write_solution(out_path, sol, mode, algorithm, x_refined);
  std::cout << "objective " << sol.objective << ", iterations "
            << sol.iterations << ", pg_residual " << sol.pg_residual
            << ", converged " << (sol.converged ? "yes" : "no") << "\n"
            << "wrote " << out_path << "\n";
  return sol.converged ? 0 : 4;
}

int cmd_certify(const std::string& inst_path, const std::string& sol_path,
                const std::string& out_path) {
  ParsedDocument doc = load_instance(inst_path);
  SolutionFile sf = read_solution(sol_path);
  const int p = doc.instance.dim.value();
  if (sf.sol.x.rows() != doc.instance.num_agents || sf.sol.x.cols() != p ||
      sf.sol.y.rows() != static_cast<Eigen::Index>(doc.instance.edges.size()) ||
      sf.sol.w.rows() !=
          static_cast<Eigen::Index>(doc.instance.anchor_links.size())) {
    throw std::runtime_error("certify: solution does not match instance");
  }
  CertificateReport rep =
      certify(sf.sol, doc.instance, doc.truth ? &*doc.truth : nullptr);
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open for writing: " + out_path);
  out << certificate_to_json(rep) << "\n";
  std::cout << "E1 " << rep.e1 << "  E2 " << rep.e2;
  if (rep.loc_error) std::cout << "  loc_error " << *rep.loc_error;
  std::cout << "\nwrote " << out_path << "\n";
  return 0;
}

int cmd_mc(McConfig cfg, const std::string& out_dir) {
  McSummary summary = run_mc(cfg);
  write_results(summary, out_dir);
  std::cout << summarize(summary);
  std::cout << "wrote results to " << out_dir << "\n";
  return 0;
}

int cmd_report(const std::string& dir, bool check) {
  McSummary summary = load_results(dir);
  std::cout << summarize(summary);
  if (!check) return 0;
  CampaignCheck chk = check_campaign(summary);
  for (const auto& item : chk.items) {
    std::cout << (item.pass ? "PASS" : "FAIL") << "  " << item.name << ": "
              << item.detail << "\n";
  }
  return chk.all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid range+bearing network localization via a convex relaxation"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "generate a random localizable instance");
  GenConfig gcfg;
  double radius = 0.0;
  std::string gen_out;
  gen->add_option("--n", gcfg.n, "number of agents");
  gen->add_option("--anchors", gcfg.num_anchors, "number of anchors");
  gen->add_option("--dim", gcfg.dim, "ambient dimension (>= 2)");
  gen->add_option("--region", gcfg.region_side, "region side, meters");
  auto* ropt = gen->add_option("--radius", radius,
                               "communication radius, meters (default: calibrated)");
  gen->add_option("--bearing-edge-frac", gcfg.bearing_edge_fraction,
                  "fraction of edges with bearings");
  gen->add_option("--bearing-anchor-frac", gcfg.bearing_anchor_fraction,
                  "fraction of anchor links with bearings");
  gen->add_option("--sigma", gcfg.sigma, "range noise std, meters");
  gen->add_option("--bearing-deg", gcfg.bearing_sigma_deg,
                  "bearing noise std, degrees");
  gen->add_option("--seed", gcfg.seed, "RNG seed");
  gen->add_option("--max-attempts", gcfg.max_regen_attempts,
                  "regeneration attempts before giving up");
  gen->add_option("-o,--out", gen_out, "output instance file")->required();

  // solve
  auto* slv = app.add_subcommand("solve", "solve the relaxed convex program");
  std::string solve_in, solve_out, mode_str = "unit",
              algorithm = "fista", init = "anchor-centroid";
  SolverConfig scfg;
  bool no_accel = false, refine = false;
  slv->add_option("-i,--instance", solve_in, "instance file")->required();
  slv->add_option("-o,--out", solve_out, "output solution file")->required();
  slv->add_option("--mode", mode_str, "weighting: unit | full-ml");
  slv->add_option("--algorithm", algorithm,
                  "fista | alternating (exact block minimization)");
  slv->add_option("--tol", scfg.tol_pg, "projected-gradient stop threshold");
  slv->add_option("--max-iters", scfg.max_iters, "iteration cap");
  slv->add_flag("--no-accel", no_accel, "disable momentum acceleration");
  slv->add_option("--init", init, "zeros | anchor-centroid");
  slv->add_flag("--refine", refine,
                "also polish the estimate on the nonconvex objective");

  // certify
  auto* cert = app.add_subcommand("certify", "compute suboptimality certificates");
  std::string cert_inst, cert_sol, cert_out;
  cert->add_option("-i,--instance", cert_inst, "instance file")->required();
  cert->add_option("-s,--solution", cert_sol, "solution file")->required();
  cert->add_option("-o,--out", cert_out, "output report file")->required();

  // mc
  auto* mc = app.add_subcommand("mc", "run a Monte Carlo campaign");
  std::string mc_config_path, mc_out;
  McConfig mcfg;
  double mc_radius = 0.0;
  std::string mc_mode = "unit", mc_algorithm = "fista", mc_metrics;
  mc->add_option("--config", mc_config_path, "JSON config file (flags override)");
  mc->add_option("--n", mcfg.gen.n, "agents per network");
  mc->add_option("--anchors", mcfg.gen.num_anchors, "anchors per network");
  mc->add_option("--dim", mcfg.gen.dim, "ambient dimension");
  mc->add_option("--region", mcfg.gen.region_side, "region side, meters");
  auto* mc_ropt = mc->add_option("--radius", mc_radius,
                                 "communication radius (default: calibrated)");
  mc->add_option("--sigma", mcfg.gen.sigma, "range noise std, meters");
  mc->add_option("--bearing-deg", mcfg.gen.bearing_sigma_deg,
                 "bearing noise std, degrees");
  mc->add_option("--seed", mcfg.base_seed, "campaign base seed");
  mc->add_option("--min-trials", mcfg.min_trials, "minimum trials");
  mc->add_option("--max-trials", mcfg.max_trials, "maximum trials");
  mc->add_option("--window", mcfg.stability_window, "stability window W");
  mc->add_option("--stab-tol", mcfg.stability_rel_tol,
                 "stability relative tolerance");
  mc->add_option("--mode", mc_mode, "unit | full-ml");
  mc->add_option("--algorithm", mc_algorithm, "fista | alternating");
  mc->add_option("--tol", mcfg.solver.tol_pg, "solver stop threshold");
  mc->add_option("--metrics", mc_metrics,
                 "comma list of E1,E2,angles,loc_error,ml_gap");
  mc->add_flag("--refine", mcfg.refine, "record refined localization error");
  mc->add_option("--jobs", mcfg.jobs, "parallel trial workers");
  mc->add_option("-o,--out", mc_out, "results directory")->required();

  // report
  auto* rep = app.add_subcommand("report", "summarize a results directory");
  std::string rep_dir;
  bool rep_check = false;
  rep->add_option("dir", rep_dir, "results directory")->required();
  rep->add_flag("--check", rep_check,
                "compare against acceptance thresholds; exit 3 on failure");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed()) {
      if (ropt->count()) gcfg.comm_radius = radius;
      const auto bad = validate_gen_config(gcfg);
      if (!bad.empty()) {
        for (const auto& b : bad) std::cerr << "config error: " << b << "\n";
        return 2;
      }
      return cmd_generate(gcfg, ropt->count() > 0, gen_out);
    }
    if (slv->parsed()) {
      scfg.use_acceleration = !no_accel;
      return cmd_solve(solve_in, solve_out, mode_str, algorithm, scfg, init,
                       refine);
    }
    if (cert->parsed()) return cmd_certify(cert_inst, cert_sol, cert_out);
    if (mc->parsed()) {
      if (!mc_config_path.empty()) {
        std::ifstream f(mc_config_path);
        if (!f) throw std::runtime_error("cannot open: " + mc_config_path);
        std::ostringstream buf;
        buf << f.rdbuf();
        McConfig file_cfg = mc_config_from_json(buf.str());
        // flags given on the command line override the file
        McConfig flag_cfg = mcfg;
        mcfg = file_cfg;
        if (mc->count("--n")) mcfg.gen.n = flag_cfg.gen.n;
        if (mc->count("--anchors")) mcfg.gen.num_anchors = flag_cfg.gen.num_anchors;
        if (mc->count("--dim")) mcfg.gen.dim = flag_cfg.gen.dim;
        if (mc->count("--region")) mcfg.gen.region_side = flag_cfg.gen.region_side;
        if (mc->count("--sigma")) mcfg.gen.sigma = flag_cfg.gen.sigma;
        if (mc->count("--bearing-deg")) {
          mcfg.gen.bearing_sigma_deg = flag_cfg.gen.bearing_sigma_deg;
        }
        if (mc->count("--seed")) mcfg.base_seed = flag_cfg.base_seed;
        if (mc->count("--min-trials")) mcfg.min_trials = flag_cfg.min_trials;
        if (mc->count("--max-trials")) mcfg.max_trials = flag_cfg.max_trials;
        if (mc->count("--window")) mcfg.stability_window = flag_cfg.stability_window;
        if (mc->count("--stab-tol")) {
          mcfg.stability_rel_tol = flag_cfg.stability_rel_tol;
        }
        if (mc->count("--tol")) mcfg.solver.tol_pg = flag_cfg.solver.tol_pg;
        if (mc->count("--refine")) mcfg.refine = flag_cfg.refine;
        if (mc->count("--jobs")) mcfg.jobs = flag_cfg.jobs;
      }
      if (mc_ropt->count()) mcfg.gen.comm_radius = mc_radius;
      if (mc->count("--mode")) mcfg.mode = parse_mode(mc_mode);
      if (mc->count("--algorithm")) {
        mcfg.algorithm = mc_algorithm == "alternating" ? Algorithm::Alternating
                                                       : Algorithm::Fista;
      }
      if (!mc_metrics.empty()) {
        mcfg.metrics.clear();
        std::istringstream ms(mc_metrics);
        std::string tok;
        while (std::getline(ms, tok, ',')) {
          bool known = false;
          for (Metric m : {Metric::E1, Metric::E2, Metric::Angles,
                           Metric::LocError, Metric::MlGap}) {
            if (metric_name(m) == tok) {
              mcfg.metrics.insert(m);
              known = true;
            }
          }
          if (!known) {
            std::cerr << "unknown metric: " << tok << "\n";
            return 2;
          }
        }
      }
      return cmd_mc(mcfg, mc_out);
    }
    if (rep->parsed()) return cmd_report(rep_dir, rep_check);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
