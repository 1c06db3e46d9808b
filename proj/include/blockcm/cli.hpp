#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace blockcm::cli {

inline constexpr const char* kToolName = "blockcm";
inline constexpr const char* kToolVersion = "1.0.0";

/// Bad flags, config keys or values. Exit status 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { Csv, Json };

/// Parsed command line. Angles are in units of pi.
struct RunConfig {
  std::string command;  // scan | blocksize | trace | entangle | damping | measure

  double theta1_pi = 1.0 / 6.0;
  double theta2_pi = 1.0 / 6.0;
  int blocks = 50;
  int block_size = 1;
  int strategy = 1;
  bool normalize = true;

  std::string env = "vacuum";  // vacuum | thermal | gaussian | tmsv | product
  double n_env = 0.0;
  double r_env = 0.0;
  double phi_env = 0.0;
  double xi = 0.0;

  std::vector<double> theta1_pi_list;
  std::vector<int> block_size_list;
  std::vector<double> xi_list;
  std::vector<int> strategy_list;
  double resolution_pi = 1e-5;

  int min_blocks = 50;
  int max_blocks = 500;
  int window = 25;
  double convergence_tol = 1e-6;

  double g = 1.0;
  double tau = 1.0;

  std::string output;  // empty: stdout
  Format format = Format::Csv;
  int workers = 0;

  /// Every parameter that affects the payload, for the metadata block.
  nlohmann::ordered_json parameters() const;
};

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::ordered_json metadata;
};

/// Flags override values read from `--config <file>` (`key = value` lines,
/// keys are the long flag names). Throws UsageError.
RunConfig parse_config(const std::vector<std::string>& args);

/// Runs the experiment behind `config.command`.
ResultTable execute(const RunConfig& config);

std::string render_csv(const ResultTable& table);
std::string render_json(const ResultTable& table);
ResultTable table_from_json(const std::string& text);

/// Writes the table to config.output (stdout when empty). Throws
/// std::runtime_error on I/O failure.
void write_table(const ResultTable& table, const RunConfig& config);

/// Entry point: 0 success, 1 usage error, 2 runtime error.
int main_entry(int argc, const char* const* argv);

}  // namespace blockcm::cli
