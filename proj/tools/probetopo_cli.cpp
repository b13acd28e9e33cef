// probetopo: command line front end for topology recovery experiments.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "probetopo/errors.hpp"
#include "probetopo/experiment.hpp"
#include "probetopo/grouping.hpp"
#include "probetopo/io.hpp"
#include "probetopo/recovery.hpp"
#include "probetopo/reduced_grid.hpp"

namespace {

using namespace probetopo;
using nlohmann::json;

constexpr int kDataError = 1;
constexpr int kUsageError = 2;

void report_error(std::string_view code, std::string_view message) {
  std::cerr << json{{"error", std::string(code)}, {"message", std::string(message)}}.dump() << '\n';
}

// Writes to `path`, or stdout when it is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out || !(out << text)) throw Error(ErrorCode::IoError, "cannot write " + path);
}

std::vector<NodeId> probing_set(const FeederGraph& g, const std::vector<NodeId>& probing,
                                bool all_leaves) {
  if (all_leaves || probing.empty()) return g.leaves();
  return probing;
}

int cmd_validate(const std::string& feeder_path) {
  const FeederGraph g = read_feeder_csv(feeder_path);
  double r_min = std::numeric_limits<double>::infinity();
  for (const auto& line : g.lines()) r_min = std::min(r_min, line.r);
  json doc{{"valid", true},
           {"nodes", g.size()},
           {"lines", g.lines().size()},
           {"depth", g.tree_depth()},
           {"leaves", g.leaves()},
           {"r_min_pu", r_min}};
  std::cout << doc.dump(2) << '\n';
  return 0;
}

int cmd_reduce(const std::string& feeder_path, const std::vector<NodeId>& probing,
               bool all_leaves, const std::string& out) {
  const FeederGraph g = read_feeder_csv(feeder_path);
  emit(out, reduced_grid_json(reduce_grid(g, probing_set(g, probing, all_leaves))));
  return 0;
}

struct ProbeOptions {
  std::string feeder;
  std::string config;
  std::string loads;
  std::vector<NodeId> probing;
  std::optional<std::string> mode;
  std::optional<double> delta;
  std::optional<int> periods;
  std::optional<std::uint64_t> seed;
  bool noiseless = false;
  std::string out;
};

int cmd_probe(const ProbeOptions& o) {
  ExperimentConfig config;
  if (!o.config.empty()) config = load_config(o.config);
  config.feeder = o.feeder;
  if (!o.loads.empty()) config.loads = o.loads;
  if (!o.probing.empty()) config.probing = o.probing;
  if (o.mode) config.mode = parse_mode(*o.mode);
  if (o.delta) config.delta_pu = *o.delta;
  if (o.seed) config.seed = *o.seed;
  if (o.noiseless) {
    config.load_variation = LoadVariation::PerTrial;
    config.sigma_p = 0.0;
    config.sigma_q = 0.0;
    config.sigma_w = 0.0;
  }
  const ExperimentSetup setup = prepare_experiment(config);
  const ProbingPlan plan =
      o.periods ? ProbingPlan::sequential(setup.probing, setup.delta, *o.periods)
                : design_plan(setup.r_min, std::max(setup.sigma, 0.0), setup.probing, setup.delta);
  NoiseModel noise = setup.noise;
  noise.seed = config.seed;
  std::ostringstream text;
  write_record(text, simulate_probing(setup.model, plan, noise, config.mode));
  emit(o.out, text.str());
  return 0;
}

struct RecoverOptions {
  std::string record;
  std::optional<double> r_min;
  std::string truth;
  std::string out;
  std::string diagnostics;
};

int cmd_recover(const RecoverOptions& o) {
  const ProbingRecord record = load_record(o.record);
  const EstimatedMatrix estimate = estimate_R(record);
  const double r_min = o.r_min.value_or(0.0);
  const auto groupings = group_columns(estimate, r_min, record.mode);

  if (!o.diagnostics.empty()) {
    std::vector<GroupingDiagnostics> diag;
    for (std::size_t j = 0; j < estimate.cols.size(); ++j) {
      const Eigen::VectorXd col = estimate.values.col(static_cast<Eigen::Index>(j));
      diag.push_back(diagnose_column(estimate.rows, {col.data(), static_cast<std::size_t>(col.size())},
                                     estimate.cols[j], r_min, record.mode));
    }
    std::ostringstream text;
    write_diagnostics_json(text, diag);
    emit(o.diagnostics, text.str());
  }

  const auto families = assemble_family(groupings, record.mode);
  const RecoveryReport report = record.mode == Mode::Complete
                                    ? recover_full(families, record.probing)
                                    : recover_partial(families, record.probing);
  std::optional<Comparison> cmp;
  if (!o.truth.empty()) {
    const FeederGraph g = read_feeder_csv(o.truth);
    cmp = record.mode == Mode::Complete ? compare_graphs(report, g)
                                        : compare_graphs(report, reduce_grid(g, record.probing));
  }
  const Comparison* c = cmp ? &*cmp : nullptr;
  if (o.out.empty()) {
    std::ostringstream text;
    write_feeder_csv(text, report.edge_list());
    std::cout << text.str();
    std::cerr << report_metadata_json(report, c);
  } else {
    write_report(o.out, report, c);
  }
  return 0;
}

struct MonteCarloOptions {
  std::string config;
  std::string out;
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> mode;
  bool no_timing = false;
};

int cmd_montecarlo(const MonteCarloOptions& o) {
  ExperimentConfig config = load_config(o.config);
  if (!o.out.empty()) config.out = o.out;
  if (o.trials) config.trials = *o.trials;
  if (o.seed) config.seed = *o.seed;
  if (o.threads) config.threads = *o.threads;
  if (o.mode) config.mode = parse_mode(*o.mode);
  if (o.no_timing) config.record_timing = false;
  config.validate();
  const ExperimentResult result = run_experiment(config);
  write_results(config, result);
  for (const auto& r : result.rows) {
    std::cout << "T_m=" << r.periods << (r.designed ? " (designed)" : "")
              << " error_pct=" << r.error_pct;
    if (r.mpe_pct) std::cout << " mpe_pct=" << *r.mpe_pct;
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topology and line resistance recovery of radial feeders by probing"};
  app.require_subcommand(1);

  std::string validate_feeder;
  auto* validate = app.add_subcommand("validate", "Check that a feeder file is a valid tree");
  validate->add_option("feeder", validate_feeder, "Feeder CSV")->required();

  std::string reduce_feeder;
  std::vector<NodeId> reduce_probing;
  bool reduce_leaves = false;
  std::string reduce_out;
  auto* reduce = app.add_subcommand("reduce", "Emit the reduced grid of a probing set");
  reduce->add_option("feeder", reduce_feeder, "Feeder CSV")->required();
  auto* probing_opt = reduce->add_option("--probing", reduce_probing, "Probing buses");
  reduce->add_flag("--all-leaves", reduce_leaves, "Probe every leaf")->excludes(probing_opt);
  reduce->add_option("--out", reduce_out, "Output JSON file (default stdout)");

  ProbeOptions po;
  auto* probe = app.add_subcommand("probe", "Simulate probing and emit a probing record");
  probe->add_option("feeder", po.feeder, "Feeder CSV")->required();
  probe->add_option("--config", po.config, "Experiment config (JSON)");
  probe->add_option("--loads", po.loads, "Loads CSV");
  probe->add_option("--probing", po.probing, "Probing buses (default: leaves)");
  probe->add_option("--mode", po.mode, "complete or partial");
  probe->add_option("--delta", po.delta, "Probing magnitude in pu for every bus");
  probe->add_option("--periods", po.periods, "Periods per bus (default: design rule)")
      ->check(CLI::PositiveNumber);
  probe->add_option("--seed", po.seed, "Noise seed");
  probe->add_flag("--noiseless", po.noiseless, "Disable all noise");
  probe->add_option("--out", po.out, "Output record (default stdout)");

  RecoverOptions ro;
  auto* recover = app.add_subcommand("recover", "Recover the topology from a probing record");
  recover->add_option("record", ro.record, "Probing record")->required();
  recover->add_option("--r-min", ro.r_min, "Gap threshold scale; exact grouping when omitted")
      ->check(CLI::PositiveNumber);
  recover->add_option("--truth", ro.truth, "Feeder CSV to compare against");
  recover->add_option("--out", ro.out, "Report directory (default: edges on stdout)");
  recover->add_option("--diagnostics", ro.diagnostics, "Grouping diagnostics JSON file");

  MonteCarloOptions mo;
  auto* mc = app.add_subcommand("montecarlo", "Run a Monte Carlo sweep");
  mc->add_option("--config", mo.config, "Experiment config (JSON)")->required();
  mc->add_option("--out", mo.out, "Output directory");
  mc->add_option("--trials", mo.trials, "Trials per sweep row")->check(CLI::PositiveNumber);
  mc->add_option("--seed", mo.seed, "Experiment seed");
  mc->add_option("--threads", mo.threads, "Worker threads (0: all cores)")
      ->check(CLI::NonNegativeNumber);
  mc->add_option("--mode", mo.mode, "complete or partial");
  mc->add_flag("--no-timing", mo.no_timing, "Write 0 for row timings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("UsageError", e.what());
    return kUsageError;
  }

  try {
    if (*validate) return cmd_validate(validate_feeder);
    if (*reduce) return cmd_reduce(reduce_feeder, reduce_probing, reduce_leaves, reduce_out);
    if (*probe) return cmd_probe(po);
    if (*recover) return cmd_recover(ro);
    if (*mc) return cmd_montecarlo(mo);
  } catch (const Error& e) {
    report_error(to_string(e.code()), e.what());
    return e.code() == ErrorCode::ConfigError ? kUsageError : kDataError;
  } catch (const std::exception& e) {
    report_error("InternalError", e.what());
    return kDataError;
  }
  return kUsageError;
}
