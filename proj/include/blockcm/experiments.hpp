#pragma once

#include <numbers>
#include <optional>
#include <vector>

#include "blockcm/gaussian.hpp"
#include "blockcm/nonmarkov.hpp"
#include "blockcm/scattering.hpp"

namespace blockcm {

/// One fully specified collision-model run.
struct ModelConfig {
  NetworkShape shape;
  double theta1 = std::numbers::pi / 6.0;
  double theta2 = std::numbers::pi / 6.0;
  Strategy strategy = Strategy::Sequential;
  EnvironmentSpec env = VacuumEnv{};
  /// Use BS1 reflectivity sin(theta1)^(1/L_B) so that one block collision
  /// has the same effective strength for every L_B.
  bool normalize_coupling = false;
};

/// arcsin(sin(theta1)^(1/L_B)).
double effective_theta1(double theta1, int block_size);

struct ModelRun {
  ScatteringMatrix scattering;
  std::vector<ChannelMap> maps;  // maps[l-1] is (X_l, Y_l)
  NMResult result;
};

ModelRun run_model(const ModelConfig& config);

/// N(L) of a configuration.
double nonmarkovianity(const ModelConfig& config);

/// |c_{1,1}(l)| for l = 1..L.
std::vector<double> c11_trace(const ScatteringMatrix& s);

struct SweepGrid {
  std::vector<double> theta1_values;
  /// Coarse bracket grid over theta2, ascending. Empty means 51 points on
  /// [0, pi/2].
  std::vector<double> theta2_values;
  std::vector<int> block_sizes{1};
  int blocks = 50;
  Strategy strategy = Strategy::Sequential;
  EnvironmentSpec env = VacuumEnv{};
  bool normalize_coupling = true;
};

struct BoundaryRow {
  double theta1 = 0.0;
  int block_size = 1;
  /// Lower edge of the Markovian theta2 interval reaching pi/2; nullopt when
  /// the column is Markovian on the whole grid.
  std::optional<double> theta2_critical;
  /// Largest bracketing theta2 found non-Markovian.
  std::optional<double> theta2_nonmarkov;
};

struct BoundaryResult {
  std::vector<BoundaryRow> rows;
  double resolution = 0.0;
};

struct ScanOptions {
  double resolution = 1e-5 * std::numbers::pi;
  int workers = 0;
};

BoundaryResult boundary_scan(const SweepGrid& grid, const ScanOptions& options = {});

struct BlocksizeRow {
  int block_size = 1;
  double N = 0.0;
};

/// Vacuum environment, coupling normalization on.
std::vector<BlocksizeRow> measure_vs_blocksize(double theta1, double theta2,
                                               int blocks,
                                               const std::vector<int>& block_sizes,
                                               Strategy strategy, int workers = 0);

struct TraceRow {
  int step = 0;
  double c11_abs = 0.0;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
};

/// Per-collision |c11| and Lambda eigenvalues. The l = 1 row uses the map
/// from the identity channel; singular steps carry NaN eigenvalues.
std::vector<TraceRow> stroboscopic_trace(const ModelConfig& config);

/// Convergence rule for the entanglement experiments: the network is built
/// with max_blocks blocks and the accumulated measure is cut at the first
/// L >= min_blocks whose last `window` per-block increments are all below
/// `tolerance`.
struct AdaptivePolicy {
  int min_blocks = 50;
  int max_blocks = 500;
  int window = 25;
  double tolerance = 1e-6;
};

struct DiscrepancyRow {
  double parameter = 0.0;  // xi, or theta1 for inset scans
  double theta1 = 0.0;
  double theta2 = 0.0;
  double xi = 0.0;
  Strategy strategy = Strategy::Sequential;
  double N_tmsv = 0.0;
  double N_prod = 0.0;
  double delta_N = 0.0;
  int L_used = 0;
  bool converged = false;
};

struct DiscrepancyResult {
  std::vector<DiscrepancyRow> rows;
};

/// N for TMSV(xi) blocks versus thermal product blocks with
/// n_th = sinh^2(xi), L_B = 2. Rows are ordered strategy-major.
DiscrepancyResult entanglement_comparison(const std::vector<double>& xi_values,
                                          double theta1, double theta2,
                                          const std::vector<Strategy>& strategies,
                                          const AdaptivePolicy& policy = {},
                                          int workers = 0,
                                          bool normalize_coupling = true);

/// delta N as a function of theta1 for each theta2, strategy 1, fixed xi.
/// Rows are ordered theta2-major.
DiscrepancyResult inset_scan(const std::vector<double>& theta1_values,
                             const std::vector<double>& theta2_values,
                             double xi, const AdaptivePolicy& policy = {},
                             int workers = 0, bool normalize_coupling = true);

/// Damping-rate extraction from the model's |c11| trace.
DampingTrace damping_experiment(const ModelConfig& config, double g = 1.0,
                                double tau = 1.0);

}  // namespace blockcm
