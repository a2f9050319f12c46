#include "hybridloc/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "hybridloc/certify.hpp"

namespace hybridloc {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::vector<Metric> kAllMetrics = {Metric::E1, Metric::E2, Metric::Angles,
                                         Metric::LocError, Metric::MlGap};

double scalar_metric(const TrialRecord& r, Metric m) {
  switch (m) {
    case Metric::E1:
      return r.e1;
    case Metric::E2:
      return r.e2;
    case Metric::Angles:
      return r.mean_angle_deg;
    case Metric::LocError:
      return r.loc_error;
    case Metric::MlGap:
      return r.ml_gap;
  }
  return kNaN;
}

json gen_config_to_json(const GenConfig& g) {
  json j;
  j["dim"] = g.dim;
  j["n"] = g.n;
  j["num_anchors"] = g.num_anchors;
  j["region_side"] = g.region_side;
  if (g.comm_radius) j["comm_radius"] = *g.comm_radius;
  j["bearing_edge_fraction"] = g.bearing_edge_fraction;
  j["bearing_anchor_fraction"] = g.bearing_anchor_fraction;
  j["sigma"] = g.sigma;
  j["bearing_sigma_deg"] = g.bearing_sigma_deg;
  j["seed"] = g.seed;
  j["max_regen_attempts"] = g.max_regen_attempts;
  return j;
}

GenConfig gen_config_from_json(const json& j) {
  GenConfig g;
  g.dim = j.value("dim", g.dim);
  g.n = j.value("n", g.n);
  g.num_anchors = j.value("num_anchors", g.num_anchors);
  g.region_side = j.value("region_side", g.region_side);
  if (j.contains("comm_radius")) g.comm_radius = j["comm_radius"].get<double>();
  g.bearing_edge_fraction = j.value("bearing_edge_fraction", g.bearing_edge_fraction);
  g.bearing_anchor_fraction = j.value("bearing_anchor_fraction", g.bearing_anchor_fraction);
  g.sigma = j.value("sigma", g.sigma);
  g.bearing_sigma_deg = j.value("bearing_sigma_deg", g.bearing_sigma_deg);
  g.seed = j.value("seed", g.seed);
  g.max_regen_attempts = j.value("max_regen_attempts", g.max_regen_attempts);
  return g;
}

}  // namespace

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::E1:
      return "E1";
    case Metric::E2:
      return "E2";
    case Metric::Angles:
      return "angles";
    case Metric::LocError:
      return "loc_error";
    case Metric::MlGap:
      return "ml_gap";
  }
  return "?";
}

std::string mode_name(WeightMode m) {
  return m == WeightMode::UnitQuadratic ? "unit" : "full-ml";
}

std::string algorithm_name(Algorithm a) {
  return a == Algorithm::Fista ? "fista" : "alternating";
}

json mc_config_to_json_impl(const McConfig& c) {
  json j;
  j["gen"] = gen_config_to_json(c.gen);
  j["solver"] = {{"tol_pg", c.solver.tol_pg},
                 {"max_iters", c.solver.max_iters},
                 {"use_acceleration", c.solver.use_acceleration}};
  j["mode"] = mode_name(c.mode);
  j["algorithm"] = algorithm_name(c.algorithm);
  j["min_trials"] = c.min_trials;
  j["max_trials"] = c.max_trials;
  j["stability_window"] = c.stability_window;
  j["stability_rel_tol"] = c.stability_rel_tol;
  std::vector<std::string> names;
  for (Metric m : kAllMetrics) {
    if (c.metrics.count(m)) names.push_back(metric_name(m));
  }
  j["metrics"] = names;
  j["refine"] = c.refine;
  j["base_seed"] = c.base_seed;
  j["jobs"] = c.jobs;
  return j;
}

std::string mc_config_to_json(const McConfig& c) {
  return mc_config_to_json_impl(c).dump(2);
}

McConfig mc_config_from_json_impl(const json& j) {
  McConfig c;
  if (j.contains("gen")) c.gen = gen_config_from_json(j["gen"]);
  if (j.contains("solver")) {
    const json& s = j["solver"];
    c.solver.tol_pg = s.value("tol_pg", c.solver.tol_pg);
    c.solver.max_iters = s.value("max_iters", c.solver.max_iters);
    c.solver.use_acceleration =
        s.value("use_acceleration", c.solver.use_acceleration);
  }
  if (j.contains("mode")) {
    c.mode = j["mode"].get<std::string>() == "full-ml" ? WeightMode::FullML
                                                       : WeightMode::UnitQuadratic;
  }
  if (j.contains("algorithm")) {
    c.algorithm = j["algorithm"].get<std::string>() == "alternating"
                      ? Algorithm::Alternating
                      : Algorithm::Fista;
  }
  c.min_trials = j.value("min_trials", c.min_trials);
  c.max_trials = j.value("max_trials", c.max_trials);
  c.stability_window = j.value("stability_window", c.stability_window);
  c.stability_rel_tol = j.value("stability_rel_tol", c.stability_rel_tol);
  if (j.contains("metrics")) {
    c.metrics.clear();
    for (const auto& name : j["metrics"]) {
      for (Metric m : kAllMetrics) {
        if (metric_name(m) == name.get<std::string>()) c.metrics.insert(m);
      }
    }
  }
  c.refine = j.value("refine", c.refine);
  c.base_seed = j.value("base_seed", c.base_seed);
  c.jobs = j.value("jobs", c.jobs);
  return c;
}

McConfig mc_config_from_json(const std::string& text) {
  return mc_config_from_json_impl(json::parse(text));
}

namespace {

TrialRecord run_trial(const McConfig& cfg, double comm_radius, int trial) {
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(trial));
  rec.e1 = rec.e2 = rec.mean_angle_deg = kNaN;
  rec.loc_error = rec.loc_error_refined = rec.ml_gap = kNaN;
  rec.e1_node_grouped = rec.e2_node_grouped = kNaN;
  try {
    Rng rng(rec.seed);
    GenConfig gen = cfg.gen;
    gen.comm_radius = comm_radius;
    gen.seed = rec.seed;
    GenResult gr = make_instance(gen, rng);
    const ProblemInstance& inst = gr.instance;

    Solution sol = cfg.algorithm == Algorithm::Fista
                       ? solve_convex(inst, cfg.solver, cfg.mode)
                       : solve_alternating(inst, cfg.solver, cfg.mode);
    rec.iterations = sol.iterations;
    rec.converged = sol.converged;
    if (!sol.converged) {
      rec.failed = true;
      rec.fail_reason = "solver did not converge";
      return rec;
    }

    CertificateReport cert = certify(sol, inst, &gr.truth);
    rec.e1 = cert.e1;
    rec.e2 = cert.e2;
    rec.e1_node_grouped = cert.e1_node_grouped;
    rec.e2_node_grouped = cert.e2_node_grouped;
    rec.angles_deg = cert.thetas_deg;
    rec.angles_deg.insert(rec.angles_deg.end(), cert.betas_deg.begin(),
                          cert.betas_deg.end());
    if (!rec.angles_deg.empty()) {
      double s = 0.0;
      for (double a : rec.angles_deg) s += a;
      rec.mean_angle_deg = s / static_cast<double>(rec.angles_deg.size());
    }
    rec.loc_error = cert.loc_error.value_or(kNaN);

    double sum_range = 0.0;
    const size_t num_meas = inst.edges.size() + inst.anchor_links.size();
    for (const auto& e : inst.edges) sum_range += e.d;
    for (const auto& a : inst.anchor_links) sum_range += a.r;
    rec.mean_range = num_meas ? sum_range / static_cast<double>(num_meas) : 0.0;
    rec.range_scale = inst.scale();

    if (cfg.metrics.count(Metric::MlGap)) {
      RefineResult ref = refine_nonconvex(gr.truth.positions, inst);
      double gap = 0.0;
      for (Eigen::Index i = 0; i < sol.x.rows(); ++i) {
        gap += (sol.x.row(i) - ref.x.row(i)).norm();
      }
      rec.ml_gap = gap / static_cast<double>(sol.x.rows());
    }
    if (cfg.refine) {
      RefineResult pol = refine_nonconvex(sol.x, inst);
      rec.loc_error_refined = localization_error(pol.x, gr.truth).mean;
    }
  } catch (const std::exception& ex) {
    rec.failed = true;
    rec.fail_reason = ex.what();
  }
  return rec;
}

}  // namespace

McSummary run_mc(const McConfig& cfg) {
  if (cfg.min_trials < 1 || cfg.max_trials < cfg.min_trials) {
    throw std::invalid_argument("run_mc: need 1 <= min_trials <= max_trials");
  }
  if (cfg.stability_window < 2) {
    throw std::invalid_argument("run_mc: stability_window must be >= 2");
  }
  {
    const auto bad = validate_gen_config(cfg.gen);
    if (!bad.empty()) {
      throw std::invalid_argument("run_mc: invalid gen config: " + bad.front());
    }
  }

  McSummary out;
  out.config = cfg;
  if (cfg.gen.comm_radius) {
    out.comm_radius_used = *cfg.gen.comm_radius;
  } else {
    Rng rng(derive_seed(cfg.base_seed, 0));
    out.comm_radius_used = calibrate_comm_radius(cfg.gen, rng);
  }

  std::vector<Metric> tracked;
  for (Metric m : kAllMetrics) {
    if (cfg.metrics.count(m)) tracked.push_back(m);
  }

  std::map<std::string, double> sums;
  std::map<std::string, int> counts;
  for (Metric m : tracked) {
    out.running_averages[metric_name(m)] = {};
    sums[metric_name(m)] = 0.0;
    counts[metric_name(m)] = 0;
  }

  const int jobs = std::max(1, cfg.jobs);
  bool stop = false;
  int next_trial = 1;
  while (!stop && next_trial <= cfg.max_trials) {
    // one wave of independent trials; aggregation stays in trial order so
    // parallel and serial campaigns are identical
    const int wave = std::min(jobs, cfg.max_trials - next_trial + 1);
    std::vector<std::future<TrialRecord>> futs;
    futs.reserve(wave);
    for (int k = 0; k < wave; ++k) {
      const int trial = next_trial + k;
      futs.push_back(jobs == 1
                         ? std::async(std::launch::deferred, run_trial,
                                      std::cref(cfg), out.comm_radius_used,
                                      trial)
                         : std::async(std::launch::async, run_trial,
                                      std::cref(cfg), out.comm_radius_used,
                                      trial));
    }
    for (auto& fut : futs) {
      TrialRecord rec = fut.get();
      if (stop) break;  // decided mid-wave: drop the remainder
      const int attempted = rec.trial;
      if (rec.failed) ++out.failed_trials;
      if (!rec.failed) {
        for (Metric m : tracked) {
          const std::string name = metric_name(m);
          const double h = scalar_metric(rec, m);
          sums[name] += h;
          counts[name] += 1;
          out.running_averages[name].push_back(sums[name] / counts[name]);
        }
      }
      out.trials.push_back(std::move(rec));
      out.trials_run = attempted;

      if (out.failed_trials * 10 > attempted && attempted >= 10) {
        throw std::runtime_error(
            "run_mc: more than 10% of trials failed (" +
            std::to_string(out.failed_trials) + "/" + std::to_string(attempted) +
            "); first failure: " + [&] {
              for (const auto& t : out.trials) {
                if (t.failed) return t.fail_reason;
              }
              return std::string("?");
            }());
      }

      // stability: first eligible at min_trials + W, over the last W
      // running-average values of every tracked metric
      if (attempted >= cfg.min_trials + cfg.stability_window) {
        bool all_stable = true;
        for (Metric m : tracked) {
          const auto& avg = out.running_averages[metric_name(m)];
          if (static_cast<int>(avg.size()) < cfg.stability_window) {
            all_stable = false;
            break;
          }
          const auto first = avg.end() - cfg.stability_window;
          double lo = *first, hi = *first, mean = 0.0;
          for (auto it = first; it != avg.end(); ++it) {
            lo = std::min(lo, *it);
            hi = std::max(hi, *it);
            mean += *it;
          }
          mean /= cfg.stability_window;
          const double span = (hi - lo) / std::max(std::abs(mean), 1e-12);
          if (!(span < cfg.stability_rel_tol)) {
            all_stable = false;
            break;
          }
        }
        if (all_stable) {
          out.stopped_by = StopReason::Stability;
          stop = true;
        }
      }
    }
    next_trial += wave;
  }
  if (!stop) out.stopped_by = StopReason::MaxTrials;
  return out;
}

std::vector<std::pair<double, double>> export_cdf(std::vector<double> values) {
  if (values.empty()) {
    throw std::invalid_argument("export_cdf: empty value list");
  }
  std::sort(values.begin(), values.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(values.size());
  const double N = static_cast<double>(values.size());
  for (size_t k = 0; k < values.size(); ++k) {
    out.emplace_back(values[k], static_cast<double>(k + 1) / N);
  }
  return out;
}

namespace {

struct Stats {
  double min = 0, median = 0, mean = 0, max = 0;
  int count = 0;
};

Stats stats_of(std::vector<double> v) {
  Stats s;
  v.erase(std::remove_if(v.begin(), v.end(),
                         [](double x) { return std::isnan(x); }),
          v.end());
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.count = static_cast<int>(v.size());
  s.min = v.front();
  s.max = v.back();
  s.median = v.size() % 2 ? v[v.size() / 2]
                          : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  return s;
}

std::vector<double> collect(const McSummary& s, Metric m) {
  std::vector<double> v;
  for (const auto& t : s.trials) {
    if (!t.failed) v.push_back(scalar_metric(t, m));
  }
  return v;
}

std::vector<double> pooled_angles(const McSummary& s) {
  std::vector<double> v;
  for (const auto& t : s.trials) {
    if (!t.failed) {
      v.insert(v.end(), t.angles_deg.begin(), t.angles_deg.end());
    }
  }
  return v;
}

double fraction_below(const std::vector<double>& v, double bound) {
  if (v.empty()) return 0.0;
  int c = 0;
  for (double x : v) {
    if (x < bound) ++c;
  }
  return static_cast<double>(c) / static_cast<double>(v.size());
}

}  // namespace

std::string summarize(const McSummary& s) {
  std::ostringstream os;
  os.precision(6);
  os << "campaign: n=" << s.config.gen.n
     << " anchors=" << s.config.gen.num_anchors
     << " region=" << s.config.gen.region_side
     << " comm_radius=" << s.comm_radius_used
     << " sigma=" << s.config.gen.sigma
     << " bearing_deg=" << s.config.gen.bearing_sigma_deg
     << " mode=" << mode_name(s.config.mode)
     << " algorithm=" << algorithm_name(s.config.algorithm) << "\n";
  os << "trials: " << s.trials_run << " (failed " << s.failed_trials << "), "
     << "stopped by "
     << (s.stopped_by == StopReason::Stability ? "stability" : "max_trials")
     << " (window=" << s.config.stability_window
     << ", rel_tol=" << s.config.stability_rel_tol << ")\n";
  os << "base_seed: " << s.config.base_seed << "\n";

  int converged = 0, ok = 0;
  long long iters = 0;
  for (const auto& t : s.trials) {
    if (!t.failed) {
      ++ok;
      iters += t.iterations;
      if (t.converged) ++converged;
    }
  }
  if (ok > 0) {
    os << "solver: " << converged << "/" << ok << " converged, mean iterations "
       << (iters / std::max(1, ok)) << "\n";
  }

  auto line = [&os](const std::string& name, const Stats& st) {
    os << "  " << name << ": min " << st.min << "  median " << st.median
       << "  mean " << st.mean << "  max " << st.max << "  (" << st.count
       << " values)\n";
  };
  os << "metrics (per trial):\n";
  for (Metric m :
       {Metric::E1, Metric::E2, Metric::LocError, Metric::MlGap}) {
    if (!s.config.metrics.count(m)) continue;
    line(metric_name(m), stats_of(collect(s, m)));
  }
  if (s.config.refine) {
    std::vector<double> v;
    for (const auto& t : s.trials) {
      if (!t.failed) v.push_back(t.loc_error_refined);
    }
    line("loc_error_refined", stats_of(v));
  }
  if (s.config.metrics.count(Metric::Angles)) {
    const auto ang = pooled_angles(s);
    line("angles(pooled, deg)", stats_of(ang));
    os << "    fraction below 4 deg: " << fraction_below(ang, 4.0)
       << ", below 10 deg: " << fraction_below(ang, 10.0) << "\n";
  }
  if (s.config.metrics.count(Metric::E1)) {
    const auto e1 = collect(s, Metric::E1);
    os << "  E1 max per-trial average residual: " << stats_of(e1).max << "\n";
  }
  if (s.config.metrics.count(Metric::LocError)) {
    const auto le = collect(s, Metric::LocError);
    os << "  loc_error median " << stats_of(le).median
       << " (0.1 m reference bound; fraction <= 0.12: "
       << fraction_below(le, 0.12 + 1e-15) << ")\n";
  }
  if (s.config.metrics.count(Metric::E1) &&
      s.config.metrics.count(Metric::MlGap)) {
    os << "  corr(E1, ml_gap): "
       << pearson_correlation(collect(s, Metric::E1),
                              collect(s, Metric::MlGap))
       << "\n";
  }
  os << "cdf tables: cdf_<metric>.csv (value, cdf)\n";
  return os.str();
}

void write_results(const McSummary& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  {
    json j;
    j["config"] = mc_config_to_json_impl(s.config);
    j["comm_radius_used"] = s.comm_radius_used;
    j["trials_run"] = s.trials_run;
    j["failed_trials"] = s.failed_trials;
    j["stopped_by"] =
        s.stopped_by == StopReason::Stability ? "stability" : "max_trials";
    j["environment"] = {
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)}};
    std::ofstream f(dir / "campaign.json");
    f << j.dump(2) << "\n";
  }

  {
    std::ofstream f(dir / "trials.csv");
    f << "trial,seed,e1,e2,e1_node_grouped,e2_node_grouped,mean_angle_deg,"
         "loc_error,loc_error_refined,ml_gap,mean_range,range_scale,"
         "iterations,converged,failed\n";
    for (const auto& t : s.trials) {
      f << t.trial << "," << t.seed << "," << fmt17(t.e1) << ","
        << fmt17(t.e2) << "," << fmt17(t.e1_node_grouped) << ","
        << fmt17(t.e2_node_grouped) << "," << fmt17(t.mean_angle_deg) << ","
        << fmt17(t.loc_error) << "," << fmt17(t.loc_error_refined) << ","
        << fmt17(t.ml_gap) << "," << fmt17(t.mean_range) << ","
        << fmt17(t.range_scale) << "," << t.iterations << ","
        << (t.converged ? 1 : 0) << "," << (t.failed ? 1 : 0) << "\n";
    }
  }

  auto write_cdf = [&dir](const std::string& name,
                          const std::vector<double>& values) {
    if (values.empty()) return;
    std::ofstream f(dir / ("cdf_" + name + ".csv"));
    f << "value,cdf\n";
    for (const auto& [v, c] : export_cdf(values)) {
      f << fmt17(v) << "," << fmt17(c) << "\n";
    }
  };
  for (Metric m :
       {Metric::E1, Metric::E2, Metric::LocError, Metric::MlGap}) {
    if (s.config.metrics.count(m)) write_cdf(metric_name(m), collect(s, m));
  }
  if (s.config.metrics.count(Metric::Angles)) {
    write_cdf("angles", pooled_angles(s));
  }
  if (s.config.refine) {
    std::vector<double> v;
    for (const auto& t : s.trials) {
      if (!t.failed && !std::isnan(t.loc_error_refined)) {
        v.push_back(t.loc_error_refined);
      }
    }
    write_cdf("loc_error_refined", v);
  }
}

McSummary load_results(const std::filesystem::path& dir) {
  std::ifstream cf(dir / "campaign.json");
  if (!cf) {
    throw std::runtime_error("load_results: missing campaign.json in " +
                             dir.string());
  }
  json j = json::parse(cf);
  McSummary s;
  s.config = mc_config_from_json_impl(j.at("config"));
  s.comm_radius_used = j.value("comm_radius_used", 0.0);
  s.trials_run = j.value("trials_run", 0);
  s.failed_trials = j.value("failed_trials", 0);
  s.stopped_by = j.value("stopped_by", std::string("max_trials")) == "stability"
                     ? StopReason::Stability
                     : StopReason::MaxTrials;

  std::ifstream tf(dir / "trials.csv");
  if (!tf) {
    throw std::runtime_error("load_results: missing trials.csv in " +
                             dir.string());
  }
  std::string line;
  std::getline(tf, line);  // header
  while (std::getline(tf, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 15) {
      throw std::runtime_error("load_results: malformed trials.csv row: " +
                               line);
    }
    TrialRecord t;
    t.trial = std::stoi(fields[0]);
    t.seed = std::stoull(fields[1]);
    t.e1 = std::strtod(fields[2].c_str(), nullptr);
    t.e2 = std::strtod(fields[3].c_str(), nullptr);
    t.e1_node_grouped = std::strtod(fields[4].c_str(), nullptr);
    t.e2_node_grouped = std::strtod(fields[5].c_str(), nullptr);
    t.mean_angle_deg = std::strtod(fields[6].c_str(), nullptr);
    t.loc_error = std::strtod(fields[7].c_str(), nullptr);
    t.loc_error_refined = std::strtod(fields[8].c_str(), nullptr);
    t.ml_gap = std::strtod(fields[9].c_str(), nullptr);
    t.mean_range = std::strtod(fields[10].c_str(), nullptr);
    t.range_scale = std::strtod(fields[11].c_str(), nullptr);
    t.iterations = std::stoi(fields[12]);
    t.converged = fields[13] == "1";
    t.failed = fields[14] == "1";
    s.trials.push_back(std::move(t));
  }

  // pooled angles live in their CDF table
  std::ifstream af(dir / "cdf_angles.csv");
  if (af && !s.trials.empty()) {
    std::getline(af, line);
    std::vector<double> angles;
    while (std::getline(af, line)) {
      if (line.empty()) continue;
      angles.push_back(std::strtod(line.c_str(), nullptr));
    }
    if (!angles.empty()) s.trials.front().angles_deg = std::move(angles);
  }
  return s;
}

double pearson_correlation(const std::vector<double>& a,
                           const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) return kNaN;
  double ma = 0, mb = 0;
  int n = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) continue;
    ma += a[i];
    mb += b[i];
    ++n;
  }
  if (n < 2) return kNaN;
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) continue;
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) return kNaN;
  return sab / std::sqrt(saa * sbb);
}

CampaignCheck check_campaign(const McSummary& s) {
  CampaignCheck out;
  auto add = [&out](const std::string& name, bool pass,
                    const std::string& detail) {
    out.items.push_back({name, pass, detail});
    out.all_pass = out.all_pass && pass;
  };
  std::ostringstream d;
  d.precision(4);

  const auto e2 = collect(s, Metric::E2);
  {
    int ok_abs = 0, ok_rel = 0, n = 0;
    for (const auto& t : s.trials) {
      if (t.failed) continue;
      ++n;
      if (t.e2 <= 1e-9) ++ok_abs;
      const double bound =
          10.0 * s.config.solver.tol_pg * t.range_scale * t.mean_range;
      if (t.e2 <= bound) ++ok_rel;
    }
    const double fa = n ? static_cast<double>(ok_abs) / n : 0.0;
    const double fr = n ? static_cast<double>(ok_rel) / n : 0.0;
    d.str("");
    d << "frac(E2<=1e-9)=" << fa << ", frac(E2<=10*tol_pg*scale*mean_d)=" << fr
      << ", max E2=" << (e2.empty() ? 0.0 : stats_of(e2).max);
    add("E2 tightness", fa >= 0.99 && fr >= 0.99, d.str());
  }

  const auto e1 = collect(s, Metric::E1);
  const Stats e1s = stats_of(e1);
  if (s.config.gen.n < 50) {
    d.str("");
    d << "max E1=" << e1s.max << " (<=0.12), median=" << e1s.median
      << " (<=0.06)";
    add("E1 magnitude", e1s.max <= 0.12 && e1s.median <= 0.06, d.str());

    const auto ang = pooled_angles(s);
    const double f4 = fraction_below(ang, 4.0);
    const double f10 = fraction_below(ang, 10.0);
    d.str("");
    d << "frac(<4deg)=" << f4 << " (>=0.75), frac(<10deg)=" << f10
      << " (>=0.95), pooled " << ang.size() << " angles";
    add("suboptimality angles", f4 >= 0.75 && f10 >= 0.95, d.str());

    const auto le = collect(s, Metric::LocError);
    const Stats les = stats_of(le);
    const double f12 = fraction_below(le, 0.12 + 1e-15);
    d.str("");
    d << "frac(loc<=0.12)=" << f12 << " (>=0.95), median=" << les.median
      << " (<=0.05)";
    add("localization accuracy", f12 >= 0.95 && les.median <= 0.05, d.str());

    if (s.config.metrics.count(Metric::MlGap)) {
      const double corr =
          pearson_correlation(e1, collect(s, Metric::MlGap));
      d.str("");
      d << "pearson corr(E1, ml_gap)=" << corr << " (>=0.8)";
      add("E1/ml_gap correlation", corr >= 0.8, d.str());
    }
  } else {
    d.str("");
    d << "max E1=" << e1s.max << " (<=0.05), trials=" << s.trials_run
      << " (>=50)";
    add("E1 scalability", e1s.max <= 0.05 && s.trials_run >= 50, d.str());
  }
  return out;
}

}  // namespace hybridloc
