#include "blockcm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blockcm/errors.hpp"
#include "blockcm/parallel.hpp"

namespace blockcm {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

std::vector<double> default_theta2_grid() {
  std::vector<double> grid(51);
  for (int k = 0; k <= 50; ++k) grid[k] = kHalfPi * k / 50.0;
  return grid;
}

bool is_non_markovian(const ModelConfig& config) {
  return nonmarkovianity(config) > 0.0;
}

std::vector<ChannelMap> channel_maps(const ScatteringMatrix& s,
                                     const EnvironmentSpec& env) {
  std::vector<ChannelMap> maps;
  maps.reserve(s.blocks());
  for (int l = 1; l <= s.blocks(); ++l) {
    maps.push_back(system_channel(s.prefix_row(l), l, env, s.shape()));
  }
  return maps;
}

// Per-step negative parts (index l-1; zero at l = 1 and at singular steps).
std::vector<double> measure_increments(const std::vector<ChannelMap>& maps) {
  std::vector<double> inc(maps.size(), 0.0);
  for (std::size_t k = 1; k < maps.size(); ++k) {
    try {
      inc[k] = negative_part(lambda_step(maps[k], maps[k - 1]).eigenvalues);
    } catch (const SingularStepError&) {
    }
  }
  return inc;
}

struct AdaptiveOutcome {
  double N_a = 0.0;
  double N_b = 0.0;
  int L_used = 0;
  bool converged = false;
};

AdaptiveOutcome adaptive_cut(const std::vector<double>& inc_a,
                             const std::vector<double>& inc_b,
                             const AdaptivePolicy& policy) {
  const int cap = static_cast<int>(inc_a.size());
  int quiet = 0;  // consecutive trailing steps with both increments small
  AdaptiveOutcome out;
  out.L_used = cap;
  for (int l = 1; l <= cap; ++l) {
    const bool small = inc_a[l - 1] < policy.tolerance &&
                       inc_b[l - 1] < policy.tolerance;
    quiet = small ? quiet + 1 : 0;
    if (l >= policy.min_blocks && quiet >= policy.window) {
      out.L_used = l;
      out.converged = true;
      break;
    }
  }
  for (int l = 1; l <= out.L_used; ++l) {
    out.N_a += inc_a[l - 1];
    out.N_b += inc_b[l - 1];
  }
  return out;
}

DiscrepancyRow compare_environments(const ScatteringMatrix& s, double xi,
                                    const AdaptivePolicy& policy) {
  const EnvironmentSpec tmsv = TmsvEnv{xi};
  const double n_th = std::sinh(xi) * std::sinh(xi);
  const EnvironmentSpec product = ProductThermalEnv{n_th};
  const auto inc_tmsv = measure_increments(channel_maps(s, tmsv));
  const auto inc_prod = measure_increments(channel_maps(s, product));
  const AdaptiveOutcome cut = adaptive_cut(inc_tmsv, inc_prod, policy);
  DiscrepancyRow row;
  row.xi = xi;
  row.N_tmsv = cut.N_a;
  row.N_prod = cut.N_b;
  row.delta_N = cut.N_a - cut.N_b;
  row.L_used = cut.L_used;
  row.converged = cut.converged;
  return row;
}

void validate_policy(const AdaptivePolicy& policy) {
  if (policy.max_blocks < 2 || policy.min_blocks < 1 || policy.window < 1 ||
      policy.min_blocks > policy.max_blocks || !(policy.tolerance > 0.0)) {
    throw DomainError("invalid adaptive-L policy");
  }
}

}  // namespace

double effective_theta1(double theta1, int block_size) {
  const BeamSplitter bs = BeamSplitter::from_angle(theta1);
  if (block_size < 1) throw DomainError("block size must be >= 1");
  if (block_size == 1) return bs.theta;
  return std::asin(std::pow(bs.r, 1.0 / block_size));
}

ModelRun run_model(const ModelConfig& config) {
  config.shape.validate();
  validate_environment(config.env, config.shape);
  const double theta1 = config.normalize_coupling
                            ? effective_theta1(config.theta1, config.shape.block_size)
                            : config.theta1;
  ScatteringMatrix s =
      build_scattering(config.shape, theta1, config.theta2, config.strategy);
  std::vector<ChannelMap> maps = channel_maps(s, config.env);
  NMResult result;
  if (maps.size() >= 2) {
    result = measure(maps);
  } else {
    for (const auto& map : maps) {
      result.condition_trace.emplace_back(map.step, std::abs(map.X(0, 0)));
    }
  }
  return ModelRun{std::move(s), std::move(maps), std::move(result)};
}

double nonmarkovianity(const ModelConfig& config) {
  return run_model(config).result.N;
}

std::vector<double> c11_trace(const ScatteringMatrix& s) {
  std::vector<double> trace;
  trace.reserve(s.blocks());
  for (int l = 1; l <= s.blocks(); ++l) trace.push_back(std::abs(s.c11(l)));
  return trace;
}

BoundaryResult boundary_scan(const SweepGrid& grid, const ScanOptions& options) {
  const std::vector<double> coarse =
      grid.theta2_values.empty() ? default_theta2_grid() : grid.theta2_values;
  if (!std::is_sorted(coarse.begin(), coarse.end())) {
    throw DomainError("theta2 grid must be ascending");
  }
  if (!(options.resolution > 0.0)) {
    throw DomainError("boundary resolution must be > 0");
  }

  struct Task {
    double theta1;
    int block_size;
  };
  std::vector<Task> tasks;
  for (int lb : grid.block_sizes) {
    for (double t1 : grid.theta1_values) tasks.push_back({t1, lb});
  }

  auto locate = [&](std::size_t i) {
    const Task& task = tasks[i];
    ModelConfig config;
    config.shape = {grid.blocks, task.block_size};
    config.theta1 = task.theta1;
    config.strategy = grid.strategy;
    config.env = grid.env;
    config.normalize_coupling = grid.normalize_coupling;
    auto nm_at = [&](double theta2) {
      config.theta2 = theta2;
      return is_non_markovian(config);
    };

    BoundaryRow row{task.theta1, task.block_size, std::nullopt, std::nullopt};
    std::optional<double> hi;  // Markovian side
    std::optional<double> lo;  // non-Markovian side
    for (auto it = coarse.rbegin(); it != coarse.rend(); ++it) {
      if (nm_at(*it)) {
        lo = *it;
        break;
      }
      hi = *it;
    }
    if (!lo || !hi) return row;  // no sign change on the grid
    double a = *lo;
    double b = *hi;
    while (b - a > options.resolution) {
      const double mid = 0.5 * (a + b);
      (nm_at(mid) ? a : b) = mid;
    }
    row.theta2_critical = b;
    row.theta2_nonmarkov = a;
    return row;
  };

  BoundaryResult result;
  result.resolution = options.resolution;
  result.rows = parallel_map(tasks.size(), options.workers, locate);
  return result;
}

std::vector<BlocksizeRow> measure_vs_blocksize(double theta1, double theta2,
                                               int blocks,
                                               const std::vector<int>& block_sizes,
                                               Strategy strategy, int workers) {
  return parallel_map(block_sizes.size(), workers, [&](std::size_t i) {
    ModelConfig config;
    config.shape = {blocks, block_sizes[i]};
    config.theta1 = theta1;
    config.theta2 = theta2;
    config.strategy = strategy;
    config.normalize_coupling = true;
    return BlocksizeRow{block_sizes[i], nonmarkovianity(config)};
  });
}

std::vector<TraceRow> stroboscopic_trace(const ModelConfig& config) {
  const ModelRun run = run_model(config);
  const ChannelMap identity{Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Zero(), 0};
  std::vector<TraceRow> rows;
  rows.reserve(run.maps.size());
  for (std::size_t k = 0; k < run.maps.size(); ++k) {
    TraceRow row;
    row.step = run.maps[k].step;
    row.c11_abs = std::abs(run.maps[k].X(0, 0));
    try {
      const auto ev =
          lambda_step(run.maps[k], k == 0 ? identity : run.maps[k - 1]).eigenvalues;
      row.lambda_plus = ev.plus;
      row.lambda_minus = ev.minus;
    } catch (const SingularStepError&) {
      row.lambda_plus = std::numeric_limits<double>::quiet_NaN();
      row.lambda_minus = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

DiscrepancyResult entanglement_comparison(const std::vector<double>& xi_values,
                                          double theta1, double theta2,
                                          const std::vector<Strategy>& strategies,
                                          const AdaptivePolicy& policy,
                                          int workers, bool normalize_coupling) {
  validate_policy(policy);
  const NetworkShape shape{policy.max_blocks, 2};
  const double t1 = normalize_coupling ? effective_theta1(theta1, 2)
                                       : BeamSplitter::from_angle(theta1).theta;
  const auto networks =
      parallel_map(strategies.size(), workers, [&](std::size_t i) {
        return std::optional<ScatteringMatrix>(
            build_scattering(shape, t1, theta2, strategies[i]));
      });

  const std::size_t nxi = xi_values.size();
  DiscrepancyResult result;
  result.rows = parallel_map(strategies.size() * nxi, workers, [&](std::size_t i) {
    const std::size_t si = i / nxi;
    DiscrepancyRow row = compare_environments(*networks[si], xi_values[i % nxi], policy);
    row.parameter = row.xi;
    row.theta1 = theta1;
    row.theta2 = theta2;
    row.strategy = strategies[si];
    return row;
  });
  return result;
}

DiscrepancyResult inset_scan(const std::vector<double>& theta1_values,
                             const std::vector<double>& theta2_values,
                             double xi, const AdaptivePolicy& policy,
                             int workers, bool normalize_coupling) {
  validate_policy(policy);
  const NetworkShape shape{policy.max_blocks, 2};
  const std::size_t n1 = theta1_values.size();
  DiscrepancyResult result;
  result.rows =
      parallel_map(theta2_values.size() * n1, workers, [&](std::size_t i) {
        const double theta1 = theta1_values[i % n1];
        const double theta2 = theta2_values[i / n1];
        const double t1 = normalize_coupling ? effective_theta1(theta1, 2)
                                             : BeamSplitter::from_angle(theta1).theta;
        const ScatteringMatrix s =
            build_scattering(shape, t1, theta2, Strategy::Sequential);
        DiscrepancyRow row = compare_environments(s, xi, policy);
        row.parameter = theta1;
        row.theta1 = theta1;
        row.theta2 = theta2;
        row.strategy = Strategy::Sequential;
        return row;
      });
  return result;
}

DampingTrace damping_experiment(const ModelConfig& config, double g, double tau) {
  config.shape.validate();
  const double theta1 = config.normalize_coupling
                            ? effective_theta1(config.theta1, config.shape.block_size)
                            : config.theta1;
  const ScatteringMatrix s =
      build_scattering(config.shape, theta1, config.theta2, config.strategy);
  return damping_correspondence(c11_trace(s), g, tau);
}

}  // namespace blockcm
