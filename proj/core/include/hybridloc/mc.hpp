#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hybridloc/generator.hpp"
#include "hybridloc/solver.hpp"

namespace hybridloc {

enum class Metric { E1, E2, Angles, LocError, MlGap };
enum class Algorithm { Fista, Alternating };

std::string metric_name(Metric m);

struct McConfig {
  GenConfig gen;
  SolverConfig solver;
  WeightMode mode = WeightMode::UnitQuadratic;
  Algorithm algorithm = Algorithm::Fista;
  int min_trials = 50;
  int max_trials = 1000;
  int stability_window = 20;      // W
  double stability_rel_tol = 1e-3;
  std::set<Metric> metrics = {Metric::E1, Metric::E2, Metric::Angles,
                              Metric::LocError, Metric::MlGap};
  /// Also refine the convex estimate on the nonconvex objective and record
  /// its localization error (loc_error_refined).
  bool refine = false;
  std::uint64_t base_seed = 1;
  int jobs = 1;
};

struct TrialRecord {
  int trial = 0;           // 1-based index
  std::uint64_t seed = 0;  // derived instance seed
  bool failed = false;
  std::string fail_reason;
  double e1 = 0, e2 = 0;
  double e1_node_grouped = 0, e2_node_grouped = 0;
  double mean_angle_deg = 0;
  double loc_error = 0, loc_error_refined = 0;
  double ml_gap = 0;
  double mean_range = 0;   // mean measured range (for E2 bound checks)
  double range_scale = 0;  // max(1, max range): solver tolerance scale
  int iterations = 0;
  bool converged = false;
  std::vector<double> angles_deg;  // pooled thetas+betas (CDF export)
};

enum class StopReason { Stability, MaxTrials };

struct McSummary {
  McConfig config;
  double comm_radius_used = 0.0;
  std::vector<TrialRecord> trials;
  int trials_run = 0;
  int failed_trials = 0;
  StopReason stopped_by = StopReason::MaxTrials;
  /// Running averages <H>_M per scalar metric, one value per successful
  /// trial, in trial order.
  std::map<std::string, std::vector<double>> running_averages;
};

/// Run the Monte Carlo campaign: per trial, generate an instance with a seed
/// derived from (base_seed, trial), solve, certify, record metrics. The
/// campaign stops once all tracked running averages are stable over the
/// last W checks (first possible stop at min_trials + W), or at max_trials.
/// Trials may run in parallel (config.jobs); aggregation is an ordered
/// reduction by trial index so results are identical to a serial run.
/// Throws std::runtime_error if more than 10% of trials fail.
McSummary run_mc(const McConfig& cfg);

/// Sorted (value, k/N) pairs of the empirical CDF. Throws on empty input.
std::vector<std::pair<double, double>> export_cdf(std::vector<double> values);

/// Human-readable report: per-metric min/median/mean/max, trial counts,
/// convergence stats, stopping rule, CDF pointers.
std::string summarize(const McSummary& summary);

/// Results directory layout: campaign.json (config + environment + seeds),
/// trials.csv (one row per trial), cdf_<metric>.csv (value, cdf). CSV
/// numbers use 17 significant digits.
void write_results(const McSummary& summary, const std::filesystem::path& dir);
McSummary load_results(const std::filesystem::path& dir);

struct CampaignCheck {
  struct Item {
    std::string name;
    bool pass = false;
    std::string detail;
  };
  std::vector<Item> items;
  bool all_pass = true;
};

/// Fixed acceptance thresholds for a campaign's metrics. Small-network
/// profile (n < 50): E2 tightness, E1 magnitude, pooled angle fractions,
/// localization error, and (when ml_gap was recorded) the E1/ml_gap
/// correlation. Large-network profile (n >= 50): E2 tightness and the E1
/// scalability bound.
CampaignCheck check_campaign(const McSummary& summary);

double pearson_correlation(const std::vector<double>& a,
                           const std::vector<double>& b);

std::string mode_name(WeightMode m);
std::string algorithm_name(Algorithm a);

/// McConfig <-> JSON (the same schema used in campaign.json and accepted by
/// the CLI's --config).
std::string mc_config_to_json(const McConfig& c);
McConfig mc_config_from_json(const std::string& text);

}  // namespace hybridloc
