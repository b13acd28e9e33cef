#include "probetopo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "probetopo/errors.hpp"
#include "probetopo/grouping.hpp"
#include "probetopo/level_sets.hpp"
#include "probetopo/recovery.hpp"
#include "text.hpp"

#ifndef PROBETOPO_VERSION
#define PROBETOPO_VERSION "unknown"
#endif

namespace probetopo {
namespace {

using detail::format_number;
using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigError, what);
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("config key '") + key + "' has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json config_json(const ExperimentConfig& c) {
  json j;
  j["feeder"] = c.feeder.string();
  j["loads"] = c.loads.empty() ? json(nullptr) : json(c.loads.string());
  j["probing"] = c.probing.empty() ? json("leaves") : json(c.probing);
  j["delta_factor"] = c.delta_factor;
  j["delta_pu"] = optional_number(c.delta_pu);
  j["sweep"] = c.sweep;
  j["design_row"] = c.design_row;
  j["load_sigma_factor"] = c.load_sigma_factor;
  j["load_variation"] = to_string(c.load_variation);
  j["sigma_p"] = optional_number(c.sigma_p);
  j["sigma_q"] = optional_number(c.sigma_q);
  j["sigma_w"] = c.sigma_w;
  j["r_min"] = optional_number(c.r_min);
  j["rho_r"] = optional_number(c.rho_r);
  j["rho_x"] = optional_number(c.rho_x);
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["mode"] = to_string(c.mode);
  j["threads"] = c.threads;
  j["record_timing"] = c.record_timing;
  return j;
}

ExperimentSetup::Sets sorted_sets(ExperimentSetup::Sets sets) {
  for (auto& s : sets) std::sort(s.begin(), s.end());
  return sets;
}

}  // namespace

std::string to_string(LoadVariation v) {
  return v == LoadVariation::PerTrial ? "per_trial" : "per_period";
}

LoadVariation parse_load_variation(std::string_view text) {
  if (text == "per_trial") return LoadVariation::PerTrial;
  if (text == "per_period") return LoadVariation::PerPeriod;
  config_error("unknown load_variation '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
  if (feeder.empty()) config_error("config needs a feeder file");
  if (sweep.empty() && !design_row) config_error("config needs a sweep or design_row");
  for (int t : sweep) {
    if (t < 1) config_error("sweep periods must be at least 1");
  }
  if (trials < 1) config_error("trials must be at least 1");
  if (threads < 0) config_error("threads must be non-negative");
  if (!(delta_factor > 0.0)) config_error("delta_factor must be positive");
  if (delta_pu && !(*delta_pu > 0.0)) config_error("delta_pu must be positive");
  if (!(load_sigma_factor >= 0.0)) config_error("load_sigma_factor must be non-negative");
  if (!(sigma_w >= 0.0)) config_error("sigma_w must be non-negative");
  if (sigma_p && !(*sigma_p >= 0.0)) config_error("sigma_p must be non-negative");
  if (sigma_q && !(*sigma_q >= 0.0)) config_error("sigma_q must be non-negative");
  if (r_min && !(*r_min > 0.0)) config_error("r_min must be positive");
  if (rho_r && !(*rho_r >= 0.0)) config_error("rho_r must be non-negative");
  if (rho_x && !(*rho_x >= 0.0)) config_error("rho_x must be non-negative");
  if (std::find(probing.begin(), probing.end(), kSubstation) != probing.end()) {
    config_error("the substation cannot be a probing bus");
  }
}

ExperimentConfig parse_config(const std::string& json_text,
                              const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) config_error("config must be a JSON object");

  ExperimentConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "feeder") {
      c.feeder = resolve(base_dir, get<std::string>(j, "feeder"));
    } else if (key == "loads") {
      if (!value.is_null()) c.loads = resolve(base_dir, get<std::string>(j, "loads"));
    } else if (key == "probing") {
      if (!(value.is_string() && value.get<std::string>() == "leaves")) {
        c.probing = get<std::vector<NodeId>>(j, "probing");
      }
    } else if (key == "delta_factor") {
      c.delta_factor = get<double>(j, "delta_factor");
    } else if (key == "delta_pu") {
      if (!value.is_null()) c.delta_pu = get<double>(j, "delta_pu");
    } else if (key == "sweep") {
      c.sweep = get<std::vector<int>>(j, "sweep");
    } else if (key == "design_row") {
      c.design_row = get<bool>(j, "design_row");
    } else if (key == "load_sigma_factor") {
      c.load_sigma_factor = get<double>(j, "load_sigma_factor");
    } else if (key == "load_variation") {
      c.load_variation = parse_load_variation(get<std::string>(j, "load_variation"));
    } else if (key == "sigma_p") {
      if (!value.is_null()) c.sigma_p = get<double>(j, "sigma_p");
    } else if (key == "sigma_q") {
      if (!value.is_null()) c.sigma_q = get<double>(j, "sigma_q");
    } else if (key == "sigma_w") {
      c.sigma_w = get<double>(j, "sigma_w");
    } else if (key == "r_min") {
      if (!value.is_null()) c.r_min = get<double>(j, "r_min");
    } else if (key == "rho_r") {
      if (!value.is_null()) c.rho_r = get<double>(j, "rho_r");
    } else if (key == "rho_x") {
      if (!value.is_null()) c.rho_x = get<double>(j, "rho_x");
    } else if (key == "trials") {
      c.trials = get<int>(j, "trials");
    } else if (key == "seed") {
      c.seed = get<std::uint64_t>(j, "seed");
    } else if (key == "mode") {
      try {
        c.mode = parse_mode(get<std::string>(j, "mode"));
      } catch (const Error& e) {
        config_error(e.what());
      }
    } else if (key == "threads") {
      c.threads = get<int>(j, "threads");
    } else if (key == "record_timing") {
      c.record_timing = get<bool>(j, "record_timing");
    } else if (key == "out") {
      c.out = get<std::string>(j, "out");
    } else {
      config_error("unknown config key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

ExperimentSetup prepare_experiment(const ExperimentConfig& config) {
  config.validate();
  ExperimentSetup s;
  s.feeder = read_feeder_csv(config.feeder);
  s.probing = config.probing.empty() ? s.feeder.leaves() : config.probing;
  std::sort(s.probing.begin(), s.probing.end());
  s.probing.erase(std::unique(s.probing.begin(), s.probing.end()), s.probing.end());
  s.reduced = reduce_grid(s.feeder, s.probing);
  s.model = resistance_matrix(s.feeder);

  std::map<NodeId, BusLoad> loads;
  if (!config.loads.empty()) loads = read_loads_csv(config.loads);
  for (const auto& [bus, load] : loads) {
    if (!s.feeder.contains(bus)) {
      config_error("load bus " + std::to_string(bus) + " is not in the feeder");
    }
  }

  // Probing magnitudes: rated load of the bus; unloaded buses borrow the
  // smallest rated load among the probing buses.
  if (config.delta_pu) {
    s.delta.assign(s.probing.size(), *config.delta_pu);
  } else {
    double smallest = std::numeric_limits<double>::infinity();
    for (NodeId m : s.probing) {
      auto it = loads.find(m);
      if (it != loads.end() && it->second.p > 0.0) smallest = std::min(smallest, it->second.p);
    }
    if (!std::isfinite(smallest)) {
      config_error("no rated loads at the probing buses; set delta_pu");
    }
    for (NodeId m : s.probing) {
      auto it = loads.find(m);
      const double rated = it != loads.end() && it->second.p > 0.0 ? it->second.p : smallest;
      s.delta.push_back(config.delta_factor * rated);
    }
  }

  s.noise.sigma_w = config.sigma_w;
  if (config.load_variation == LoadVariation::PerPeriod &&
      (!config.sigma_p || !config.sigma_q)) {
    double p = 0.0;
    double q = 0.0;
    int loaded = 0;
    for (const auto& [bus, load] : loads) {
      if (load.p == 0.0 && load.q == 0.0) continue;
      p += load.p;
      q += load.q;
      ++loaded;
    }
    if (loaded == 0) config_error("per_period load variation needs a loads file");
    s.noise.sigma_p = config.load_sigma_factor * p / loaded;
    s.noise.sigma_q = config.load_sigma_factor * q / loaded;
  }
  if (config.sigma_p) s.noise.sigma_p = *config.sigma_p;
  if (config.sigma_q) s.noise.sigma_q = *config.sigma_q;
  s.noise.seed = config.seed;

  if (config.rho_r || config.rho_x) {
    s.rho_r = config.rho_r.value_or(spectral_radius(s.model.r()));
    s.rho_x = config.rho_x.value_or(spectral_radius(s.model.x()));
    s.rho_source = "config";
  } else {
    s.rho_r = spectral_radius(s.model.r());
    s.rho_x = spectral_radius(s.model.x());
    s.rho_source = "feeder";
  }

  if (config.r_min) {
    s.r_min = *config.r_min;
    s.r_min_source = "config";
  } else {
    s.r_min = std::numeric_limits<double>::infinity();
    if (config.mode == Mode::Complete) {
      for (const auto& line : s.feeder.lines()) s.r_min = std::min(s.r_min, line.r);
      s.r_min_source = "smallest line resistance of the feeder";
    } else {
      for (const auto& line : s.reduced.lines) s.r_min = std::min(s.r_min, line.r);
      s.r_min_source = "smallest line resistance of the reduced grid";
    }
    if (!std::isfinite(s.r_min)) config_error("cannot derive r_min; set it in the config");
  }
  s.sigma = noise_scale(s.noise, s.rho_r, s.rho_x);

  for (NodeId m : s.probing) {
    s.complete_sets[m] = sorted_sets(level_sets(s.feeder, m).sets);
    s.partial_sets[m] =
        sorted_sets(observed_metered_view(metered_level_sets(s.feeder, m, s.probing)).sets);
  }
  return s;
}

TrialOutcome run_trial(const ExperimentSetup& setup, const ProbingPlan& plan, Mode mode,
                       std::uint64_t seed) {
  TrialOutcome out;
  try {
    NoiseModel noise = setup.noise;
    noise.seed = seed;
    const ProbingRecord record = simulate_probing(setup.model, plan, noise, mode);
    const EstimatedMatrix estimate = estimate_R(record);
    const auto groupings = group_columns(estimate, setup.r_min, mode);

    const auto& truth = mode == Mode::Complete ? setup.complete_sets : setup.partial_sets;
    out.level_sets_correct = std::all_of(groupings.begin(), groupings.end(), [&](const auto& g) {
      auto it = truth.find(g.owner);
      return it != truth.end() && sorted_sets(g.groups) == it->second;
    });

    const auto families = assemble_family(groupings, mode);
    Comparison cmp;
    if (mode == Mode::Complete) {
      cmp = compare_graphs(recover_full(families, setup.probing), setup.feeder);
    } else {
      cmp = compare_graphs(recover_partial(families, setup.probing), setup.reduced);
    }
    out.topology_correct = cmp.topology_correct;
    out.mpe = cmp.resistance_mpe;
  } catch (const Error& e) {
    out.topology_correct = false;
    out.mpe.reset();
    out.error = to_string(e.code());
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t row, std::size_t trial) {
  std::uint64_t x = splitmix64(seed);
  x = splitmix64(x ^ (0x632be59bd9b4e019ULL * (row + 1)));
  return splitmix64(x ^ (0x8cb92ba72f3d8dd7ULL * (trial + 1)));
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  const ExperimentSetup setup = prepare_experiment(config);

  ExperimentResult result;
  result.r_min = setup.r_min;
  result.r_min_source = setup.r_min_source;
  result.sigma = setup.sigma;
  result.rho_source = setup.rho_source;
  result.rho_r = setup.rho_r;
  result.rho_x = setup.rho_x;
  result.noise = setup.noise;
  result.probing = setup.probing;
  result.delta = setup.delta;
  const ProbingPlan designed = design_plan(setup.r_min, setup.sigma, setup.probing, setup.delta);
  result.designed_periods = designed.periods;

  std::vector<std::pair<ProbingPlan, bool>> plans;
  for (int t : config.sweep) {
    plans.emplace_back(ProbingPlan::sequential(setup.probing, setup.delta, t), false);
  }
  if (config.design_row) plans.emplace_back(designed, true);

  // Each trial holds several dense rows x T matrices per thread.
  constexpr double kMaxEntries = 2e7;
  const std::size_t metered = config.mode == Mode::Complete ? setup.model.buses().size()
                                                            : setup.probing.size();
  for (const auto& [plan, is_designed] : plans) {
    const double entries =
        static_cast<double>(plan.total_periods()) * static_cast<double>(metered);
    if (entries > kMaxEntries) {
      config_error((is_designed ? "designed windows need " : "sweep windows need ") +
                   std::to_string(plan.total_periods()) + " periods (" +
                   std::to_string(static_cast<long long>(entries)) +
                   " voltage samples per trial), above the simulation limit");
    }
  }

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned threads =
      std::min<unsigned>(config.threads > 0 ? static_cast<unsigned>(config.threads) : hw,
                         static_cast<unsigned>(config.trials));

  for (std::size_t row = 0; row < plans.size(); ++row) {
    const auto& [plan, is_designed] = plans[row];
    const auto start = std::chrono::steady_clock::now();

    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(config.trials));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < outcomes.size(); i = next++) {
        outcomes[i] = run_trial(setup, plan, config.mode, trial_seed(config.seed, row, i));
      }
    };
    if (threads <= 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work);
    }

    SweepRow r;
    r.periods = *std::max_element(plan.periods.begin(), plan.periods.end());
    r.designed = is_designed;
    r.trials = config.trials;
    std::vector<double> mpes;
    for (const auto& o : outcomes) {
      if (!o.topology_correct) ++r.topology_errors;
      if (o.level_sets_correct) ++r.level_sets_correct;
      if (o.topology_correct && o.mpe) mpes.push_back(100.0 * *o.mpe);
    }
    const double n = r.trials;
    const double p = r.topology_errors / n;
    r.error_pct = 100.0 * p;
    r.error_se_pct = 100.0 * std::sqrt(p * (1.0 - p) / n);
    if (!mpes.empty()) {
      double sum = 0.0;
      for (double v : mpes) sum += v;
      const double mean = sum / mpes.size();
      double ss = 0.0;
      for (double v : mpes) ss += (v - mean) * (v - mean);
      r.mpe_pct = mean;
      r.mpe_se_pct = mpes.size() > 1 ? std::sqrt(ss / (mpes.size() - 1) / mpes.size()) : 0.0;
    }
    if (config.record_timing) {
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    result.rows.push_back(r);
  }
  return result;
}

void write_results(const ExperimentConfig& config, const ExperimentResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(config.out, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + config.out.string());

  const auto csv_path = config.out / "results.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw Error(ErrorCode::IoError, "cannot write " + csv_path.string());
  csv << "T_m,designed,trials,topology_errors,error_pct,error_se_pct,mpe_pct,mpe_se_pct,"
         "level_sets_correct,seconds\n";
  for (const auto& r : result.rows) {
    csv << r.periods << ',' << (r.designed ? 1 : 0) << ',' << r.trials << ','
        << r.topology_errors << ',' << format_number(r.error_pct) << ','
        << format_number(r.error_se_pct) << ',' << (r.mpe_pct ? format_number(*r.mpe_pct) : "")
        << ',' << (r.mpe_se_pct ? format_number(*r.mpe_se_pct) : "") << ','
        << r.level_sets_correct << ',' << format_number(r.seconds) << '\n';
  }

  json rows = json::array();
  for (const auto& r : result.rows) {
    rows.push_back({{"T_m", r.periods},
                    {"designed", r.designed},
                    {"trials", r.trials},
                    {"topology_errors", r.topology_errors},
                    {"error_pct", r.error_pct},
                    {"error_se_pct", r.error_se_pct},
                    {"mpe_pct", optional_number(r.mpe_pct)},
                    {"mpe_se_pct", optional_number(r.mpe_se_pct)},
                    {"level_sets_correct", r.level_sets_correct},
                    {"seconds", r.seconds}});
  }
  json doc;
  doc["version"] = PROBETOPO_VERSION;
  doc["config"] = config_json(config);
  doc["seeds"] = {{"base", config.seed},
                  {"derivation", "splitmix64 of (seed, sweep row, trial index)"}};
  doc["probing"] = result.probing;
  doc["delta_pu"] = result.delta;
  doc["designed_periods"] = result.designed_periods;
  doc["r_min"] = {{"value", result.r_min}, {"source", result.r_min_source}};
  doc["spectral_radius"] = {
      {"R", result.rho_r}, {"X", result.rho_x}, {"source", result.rho_source}};
  doc["noise"] = {{"sigma_p", result.noise.sigma_p},
                  {"sigma_q", result.noise.sigma_q},
                  {"sigma_w", result.noise.sigma_w},
                  {"sigma", result.sigma},
                  {"load_variation", to_string(config.load_variation)}};
  doc["rows"] = std::move(rows);

  const auto json_path = config.out / "results.json";
  std::ofstream js(json_path);
  if (!js) throw Error(ErrorCode::IoError, "cannot write " + json_path.string());
  js << doc.dump(2) << '\n';
  if (!csv || !js) throw Error(ErrorCode::IoError, "failed writing results");
}

}  // namespace probetopo
