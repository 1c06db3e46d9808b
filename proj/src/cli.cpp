#include "blockcm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "blockcm/errors.hpp"
#include "blockcm/experiments.hpp"

namespace blockcm::cli {

namespace {

using json = nlohmann::ordered_json;
constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kCommands{"scan",    "blocksize", "trace",
                                         "entangle", "damping",  "measure"};

class HelpRequested : public UsageError {
 public:
  using UsageError::UsageError;
};

void build_app(CLI::App& app, RunConfig& cfg) {
  app.set_config("--config", "", "Read `key = value` lines; flags override");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.add_option("command,--command", cfg.command, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(kCommands));

  const auto angle = CLI::Range(0.0, 0.5);
  app.add_option("--theta1-pi", cfg.theta1_pi, "BS1 angle / pi")->check(angle);
  app.add_option("--theta2-pi", cfg.theta2_pi, "BS2 angle / pi")->check(angle);
  app.add_option("--L", cfg.blocks, "Number of environment blocks")
      ->check(CLI::PositiveNumber);
  app.add_option("--LB", cfg.block_size, "Particles per block")
      ->check(CLI::PositiveNumber);
  app.add_option("--strategy", cfg.strategy, "1 (same order) or 2 (alternating)")
      ->check(CLI::IsMember({1, 2}));
  app.add_flag("--normalize,!--no-normalize", cfg.normalize,
               "Use BS1 reflectivity r1^(1/L_B) (default on)");

  app.add_option("--env", cfg.env, "vacuum|thermal|gaussian|tmsv|product")
      ->check(CLI::IsMember({"vacuum", "thermal", "gaussian", "tmsv", "product"}));
  app.add_option("--n-env", cfg.n_env, "Thermal photon number")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--r-env", cfg.r_env, "Squeezing strength")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--phi-env", cfg.phi_env, "Squeezing angle (radians)");
  app.add_option("--xi", cfg.xi, "TMSV squeezing parameter");

  app.add_option("--theta1-pi-list", cfg.theta1_pi_list, "theta1/pi grid (scan)")
      ->delimiter(',')
      ->check(angle);
  app.add_option("--LB-list", cfg.block_size_list, "Block sizes (scan, blocksize)")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  app.add_option("--xi-list", cfg.xi_list, "xi values (entangle)")->delimiter(',');
  app.add_option("--strategy-list", cfg.strategy_list, "Strategies (entangle)")
      ->delimiter(',')
      ->check(CLI::IsMember({1, 2}));
  app.add_option("--resolution-pi", cfg.resolution_pi, "Boundary bisection step / pi")
      ->check(CLI::PositiveNumber);

  app.add_option("--min-L", cfg.min_blocks, "Adaptive L lower bound")
      ->check(CLI::PositiveNumber);
  app.add_option("--max-L", cfg.max_blocks, "Adaptive L cap")
      ->check(CLI::Range(2, 100000));
  app.add_option("--window", cfg.window, "Adaptive L quiet window")
      ->check(CLI::PositiveNumber);
  app.add_option("--convergence-tol", cfg.convergence_tol,
                 "Adaptive L per-block increment tolerance")
      ->check(CLI::PositiveNumber);

  app.add_option("--g", cfg.g, "Damping coupling scale")->check(CLI::PositiveNumber);
  app.add_option("--tau", cfg.tau, "Collision interval")->check(CLI::PositiveNumber);

  app.add_option("-o,--output", cfg.output, "Output file (default stdout)");
  std::map<std::string, Format> formats{{"csv", Format::Csv}, {"json", Format::Json}};
  app.add_option("--format", cfg.format, "csv|json")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  app.add_option("--workers", cfg.workers, "Worker threads (default: all cores)")
      ->check(CLI::NonNegativeNumber);
}

void validate(const RunConfig& cfg) {
  if (cfg.env == "tmsv" && cfg.block_size != 2 && cfg.command != "entangle") {
    throw UsageError("--env tmsv requires --LB 2 (got " +
                     std::to_string(cfg.block_size) + ")");
  }
  if (cfg.min_blocks > cfg.max_blocks) {
    throw UsageError("--min-L must not exceed --max-L");
  }
  if ((cfg.command == "measure") && cfg.blocks < 2) {
    throw UsageError("--L must be >= 2 for measure");
  }
}

double radians(double in_pi) { return in_pi * kPi; }

EnvironmentSpec environment(const RunConfig& cfg) {
  if (cfg.env == "thermal") return GenericGaussianEnv{{cfg.n_env, 0.0, 0.0, {}}};
  if (cfg.env == "gaussian") {
    return GenericGaussianEnv{{cfg.n_env, cfg.r_env, cfg.phi_env, {}}};
  }
  if (cfg.env == "tmsv") return TmsvEnv{cfg.xi};
  if (cfg.env == "product") return ProductThermalEnv{cfg.n_env};
  return VacuumEnv{};
}

ModelConfig model_config(const RunConfig& cfg) {
  ModelConfig m;
  m.shape = {cfg.blocks, cfg.block_size};
  m.theta1 = radians(cfg.theta1_pi);
  m.theta2 = radians(cfg.theta2_pi);
  m.strategy = strategy_from_int(cfg.strategy);
  m.env = environment(cfg);
  m.normalize_coupling = cfg.normalize;
  return m;
}

template <class T>
std::vector<T> or_default(const std::vector<T>& values, std::vector<T> fallback) {
  return values.empty() ? fallback : values;
}

std::vector<double> default_theta1_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 10; ++k) grid.push_back(0.05 * k);
  return grid;
}

json tolerances() {
  return json{{"negativity_relative", kNegativityTolerance},
              {"singular_c11", kSingularThreshold}};
}

ResultTable make_table(const RunConfig& cfg, std::vector<std::string> columns) {
  ResultTable table;
  table.columns = std::move(columns);
  table.metadata = json{{"tool", kToolName},
                        {"version", kToolVersion},
                        {"command", cfg.command},
                        {"parameters", cfg.parameters()},
                        {"tolerances", tolerances()},
                        {"warnings", json::array()}};
  return table;
}

void warn(ResultTable& table, const std::string& message) {
  table.metadata["warnings"].push_back(message);
}

void report_singular(ResultTable& table, const NMResult& result) {
  for (int step : result.singular_steps) {
    warn(table, fmt::format("singular step l={} (|c11(l-1)| <= {:g}); excluded from N",
                            step, kSingularThreshold));
  }
}

ResultTable run_measure(const RunConfig& cfg) {
  ResultTable table =
      make_table(cfg, {"l", "lambda_plus", "lambda_minus", "N_cumulative"});
  const ModelRun run = run_model(model_config(cfg));
  double cumulative = 0.0;
  for (const auto& step : run.result.per_step) {
    cumulative += negative_part({step.lambda_plus, step.lambda_minus});
    table.rows.push_back({static_cast<double>(step.step), step.lambda_plus,
                          step.lambda_minus, cumulative});
  }
  table.metadata["N"] = run.result.N;
  report_singular(table, run.result);
  return table;
}

ResultTable run_trace(const RunConfig& cfg) {
  ResultTable table = make_table(cfg, {"l", "c11_abs", "lambda_plus", "lambda_minus"});
  for (const auto& row : stroboscopic_trace(model_config(cfg))) {
    if (std::isnan(row.lambda_plus)) {
      warn(table, fmt::format("singular step l={}; eigenvalues reported as NaN",
                              row.step));
    }
    table.rows.push_back({static_cast<double>(row.step), row.c11_abs,
                          row.lambda_plus, row.lambda_minus});
  }
  return table;
}

ResultTable run_scan(const RunConfig& cfg) {
  ResultTable table = make_table(cfg, {"theta1_pi", "L_B", "theta2_critical_pi"});
  SweepGrid grid;
  for (double t : or_default(cfg.theta1_pi_list, default_theta1_grid())) {
    grid.theta1_values.push_back(radians(t));
  }
  grid.block_sizes = or_default(cfg.block_size_list, {1, 2, 4, 8, 16});
  grid.blocks = cfg.blocks;
  grid.strategy = strategy_from_int(cfg.strategy);
  grid.env = environment(cfg);
  grid.normalize_coupling = cfg.normalize;
  ScanOptions options;
  options.resolution = radians(cfg.resolution_pi);
  options.workers = cfg.workers;
  const BoundaryResult result = boundary_scan(grid, options);
  for (const auto& row : result.rows) {
    const double theta1_pi = row.theta1 / kPi;
    if (!row.theta2_critical) {
      warn(table, fmt::format("no boundary for theta1_pi={:.17g}, L_B={}",
                              theta1_pi, row.block_size));
    }
    table.rows.push_back({theta1_pi, static_cast<double>(row.block_size),
                          row.theta2_critical ? *row.theta2_critical / kPi : kNaN});
  }
  return table;
}

ResultTable run_blocksize(const RunConfig& cfg) {
  ResultTable table = make_table(cfg, {"L_B", "N"});
  const auto rows = measure_vs_blocksize(
      radians(cfg.theta1_pi), radians(cfg.theta2_pi), cfg.blocks,
      or_default(cfg.block_size_list, {1, 2, 4, 8, 16}),
      strategy_from_int(cfg.strategy), cfg.workers);
  for (const auto& row : rows) {
    table.rows.push_back({static_cast<double>(row.block_size), row.N});
  }
  return table;
}

ResultTable run_entangle(const RunConfig& cfg) {
  ResultTable table = make_table(
      cfg, {"xi", "strategy", "N_tmsv", "N_prod", "delta_N", "L_used", "converged"});
  std::vector<Strategy> strategies;
  for (int s : or_default(cfg.strategy_list, {1, 2})) {
    strategies.push_back(strategy_from_int(s));
  }
  AdaptivePolicy policy{cfg.min_blocks, cfg.max_blocks, cfg.window,
                        cfg.convergence_tol};
  const auto result = entanglement_comparison(
      or_default(cfg.xi_list, {0.25, 0.5, 1.0}), radians(cfg.theta1_pi),
      radians(cfg.theta2_pi), strategies, policy, cfg.workers, cfg.normalize);
  for (const auto& row : result.rows) {
    if (!row.converged) {
      warn(table, fmt::format("xi={:.17g} strategy={} hit the L cap {} unconverged",
                              row.xi, strategy_tag(row.strategy), row.L_used));
    }
    table.rows.push_back({row.xi, static_cast<double>(strategy_tag(row.strategy)),
                          row.N_tmsv, row.N_prod, row.delta_N,
                          static_cast<double>(row.L_used), row.converged ? 1.0 : 0.0});
  }
  return table;
}

ResultTable run_damping(const RunConfig& cfg) {
  ResultTable table =
      make_table(cfg, {"l", "Gamma", "gamma_step_sign", "gamma_step_value"});
  const DampingTrace trace = damping_experiment(model_config(cfg), cfg.g, cfg.tau);
  for (std::size_t k = 0; k < trace.Gamma.size(); ++k) {
    const double rate = trace.gamma_rate[k].second;
    const double sign = rate > 0.0 ? 1.0 : (rate < 0.0 ? -1.0 : 0.0);
    table.rows.push_back(
        {static_cast<double>(trace.Gamma[k].first), trace.Gamma[k].second, sign, rate});
  }
  table.metadata["N_PD"] = trace.N_PD;
  return table;
}

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

json RunConfig::parameters() const {
  return json{{"theta1_pi", theta1_pi},
              {"theta2_pi", theta2_pi},
              {"L", blocks},
              {"L_B", block_size},
              {"strategy", strategy},
              {"normalize", normalize},
              {"env", env},
              {"n_env", n_env},
              {"r_env", r_env},
              {"phi_env", phi_env},
              {"xi", xi},
              {"theta1_pi_list", theta1_pi_list},
              {"LB_list", block_size_list},
              {"xi_list", xi_list},
              {"strategy_list", strategy_list},
              {"resolution_pi", resolution_pi},
              {"min_L", min_blocks},
              {"max_L", max_blocks},
              {"window", window},
              {"convergence_tol", convergence_tol},
              {"g", g},
              {"tau", tau},
              {"format", format == Format::Csv ? "csv" : "json"}};
}

RunConfig parse_config(const std::vector<std::string>& args) {
  RunConfig cfg;
  CLI::App app{"Collision model with environmental blocks"};
  app.name(kToolName);
  build_app(app, cfg);
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  validate(cfg);
  return cfg;
}

ResultTable execute(const RunConfig& cfg) {
  if (cfg.command == "measure") return run_measure(cfg);
  if (cfg.command == "trace") return run_trace(cfg);
  if (cfg.command == "scan") return run_scan(cfg);
  if (cfg.command == "blocksize") return run_blocksize(cfg);
  if (cfg.command == "entangle") return run_entangle(cfg);
  if (cfg.command == "damping") return run_damping(cfg);
  throw UsageError("unknown command: " + cfg.command);
}

std::string render_csv(const ResultTable& table) {
  std::string out;
  out += fmt::format("# {} {}\n", kToolName, kToolVersion);
  out += "# metadata: " + table.metadata.dump() + "\n";
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out += (c ? "," : "") + table.columns[c];
  }
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_number(row[c]);
    }
    out += "\n";
  }
  return out;
}

std::string render_json(const ResultTable& table) {
  json doc{{"metadata", table.metadata}, {"columns", table.columns}};
  json rows = json::array();
  for (const auto& row : table.rows) {
    json r = json::array();
    for (double v : row) {
      if (std::isfinite(v)) {
        r.push_back(v);
      } else {
        r.push_back(nullptr);
      }
    }
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

ResultTable table_from_json(const std::string& text) {
  const json doc = json::parse(text);
  ResultTable table;
  table.metadata = doc.at("metadata");
  table.columns = doc.at("columns").get<std::vector<std::string>>();
  for (const auto& r : doc.at("rows")) {
    std::vector<double> row;
    for (const auto& v : r) row.push_back(v.is_null() ? kNaN : v.get<double>());
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_table(const ResultTable& table, const RunConfig& cfg) {
  const std::string payload =
      cfg.format == Format::Csv ? render_csv(table) : render_json(table);
  if (cfg.output.empty()) {
    std::cout << payload;
    return;
  }
  std::ofstream file(cfg.output, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open output file " + cfg.output);
  file << payload;
  if (!file.flush()) throw std::runtime_error("failed writing " + cfg.output);
}

int main_entry(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  RunConfig cfg;
  try {
    cfg = parse_config(args);
  } catch (const HelpRequested& help) {
    std::cout << help.what();
    return 0;
  } catch (const UsageError& e) {
    std::cerr << kToolName << ": usage error: " << e.what() << "\n"
              << "run `" << kToolName << " --help` for options\n";
    return 1;
  }
  try {
    const ResultTable table = execute(cfg);
    write_table(table, cfg);
    if (!cfg.output.empty()) {
      if (table.metadata.contains("N")) {
        std::cout << "N = " << format_number(table.metadata["N"].get<double>()) << "\n";
      }
      for (const auto& w : table.metadata["warnings"]) {
        std::cerr << "warning: " << w.get<std::string>() << "\n";
      }
    }
  } catch (const UsageError& e) {
    std::cerr << kToolName << ": usage error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << kToolName << ": invalid parameter: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << kToolName << ": error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace blockcm::cli
