#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "probetopo/feeder.hpp"
#include "probetopo/probing.hpp"
#include "probetopo/reduced_grid.hpp"
#include "probetopo/resistance.hpp"

namespace probetopo {

enum class LoadVariation {
  /// Load deviations are drawn once per trial. Under the linear model they
  /// cancel in voltage differences, so only measurement noise remains.
  PerTrial,
  /// Load deviations are redrawn every probing period (sigma_p, sigma_q > 0).
  PerPeriod,
};

std::string to_string(LoadVariation v);
/// Accepts "per_trial" and "per_period". Throws ConfigError.
LoadVariation parse_load_variation(std::string_view text);

struct ExperimentConfig {
  std::filesystem::path feeder;
  std::filesystem::path loads;              // optional
  std::vector<NodeId> probing;              // empty: all leaves
  double delta_factor = 1.0;                // delta_m = factor * rated load
  std::optional<double> delta_pu;           // fixed magnitude instead
  std::vector<int> sweep{1, 10, 20, 40, 90};
  bool design_row = false;                  // extra row with design-rule T_m
  double load_sigma_factor = 0.067;         // x average nominal load
  LoadVariation load_variation = LoadVariation::PerTrial;
  std::optional<double> sigma_p;            // explicit overrides
  std::optional<double> sigma_q;
  double sigma_w = 1e-4 / 3.0;              // 3 sigma = 0.01% pu
  std::optional<double> r_min;              // default: from the feeder
  std::optional<double> rho_r;              // default: from the feeder
  std::optional<double> rho_x;
  int trials = 1000;
  std::uint64_t seed = 1;
  Mode mode = Mode::Complete;
  int threads = 0;                          // 0: hardware concurrency
  bool record_timing = true;
  std::filesystem::path out = ".";

  /// Throws ConfigError.
  void validate() const;
};

/// Reads a JSON config. Relative paths resolve against the file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& json_text,
                              const std::filesystem::path& base_dir);

struct SweepRow {
  int periods = 0;                    // uniform T_m, or the largest designed T_m
  bool designed = false;
  int trials = 0;
  int topology_errors = 0;
  int level_sets_correct = 0;
  double error_pct = 0.0;
  double error_se_pct = 0.0;
  std::optional<double> mpe_pct;
  std::optional<double> mpe_se_pct;
  double seconds = 0.0;
};

struct ExperimentResult {
  std::vector<SweepRow> rows;
  double r_min = 0.0;
  std::string r_min_source;
  double sigma = 0.0;
  std::string rho_source;
  double rho_r = 0.0;
  double rho_x = 0.0;
  NoiseModel noise;
  std::vector<NodeId> probing;
  std::vector<double> delta;
  std::vector<int> designed_periods;
};

/// Resolved experiment inputs: feeder, probing set, magnitudes and noise.
struct ExperimentSetup {
  FeederGraph feeder;
  std::vector<NodeId> probing;
  std::vector<double> delta;
  NoiseModel noise;
  double r_min = 0.0;
  std::string r_min_source;
  double rho_r = 0.0;
  double rho_x = 0.0;
  std::string rho_source;
  double sigma = 0.0;

  ResistanceMatrix model;
  ReducedGrid reduced;
  using Sets = std::vector<std::vector<NodeId>>;
  std::map<NodeId, Sets> complete_sets;  // N_m^k, k = 0..d_m
  std::map<NodeId, Sets> partial_sets;   // non-empty metered sets by reduced depth
};

/// Throws ConfigError, IoError, ParseError or feeder validation errors.
ExperimentSetup prepare_experiment(const ExperimentConfig& config);

/// Outcome of one simulate -> estimate -> group -> recover -> compare pass.
struct TrialOutcome {
  bool topology_correct = false;
  bool level_sets_correct = false;
  std::optional<double> mpe;
  std::string error;  // error code name when the pipeline threw
};

TrialOutcome run_trial(const ExperimentSetup& setup, const ProbingPlan& plan, Mode mode,
                       std::uint64_t seed);

/// Per-trial seed derived from the experiment seed, sweep row and trial index.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t row, std::size_t trial);

/// Runs the sweep. Trial failures count as topology errors; only config or
/// IO problems throw.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes results.csv and results.json under config.out.
void write_results(const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace probetopo
