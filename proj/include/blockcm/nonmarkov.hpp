#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "blockcm/gaussian.hpp"

namespace blockcm {

/// |c_{1,1}(l-1)| at or below this makes X_{l-1} singular.
inline constexpr double kSingularThreshold = 1e-12;

/// Relative threshold below which an eigenvalue counts as negative:
/// lambda < -kNegativityTolerance * max(1, |lambda_+| + |lambda_-|).
inline constexpr double kNegativityTolerance = 1e-12;

struct EigenPair {
  double plus = 0.0;
  double minus = 0.0;
};

/// Phi_{l,l-1}: sigma -> X_step sigma X_step^T + Y_step.
struct IntermediateMap {
  Eigen::Matrix2d X_step = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d Y_step = Eigen::Matrix2d::Zero();
  int step = 0;
};

struct LambdaMatrix {
  Eigen::Matrix2cd value = Eigen::Matrix2cd::Zero();
  EigenPair eigenvalues;
  int step = 0;
};

struct StepEigenvalues {
  int step = 0;
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
};

struct NMResult {
  std::vector<StepEigenvalues> per_step;
  double N = 0.0;
  /// (l, |c_{1,1}(l)|) for l = 1..L.
  std::vector<std::pair<int, double>> condition_trace;
  /// Steps whose intermediate map does not exist; excluded from N.
  std::vector<int> singular_steps;
};

struct ConditionResult {
  /// (l, |c(l)| > |c(l-1)|) for l = 2..L.
  std::vector<std::pair<int, bool>> flags;
  bool non_markovian = false;
};

struct DampingTrace {
  /// (l, Gamma(l)) for l = 1..L with Gamma(l) = -2 log|c(l)|.
  std::vector<std::pair<int, double>> Gamma;
  /// (l, gamma_l) where gamma_l g tau = Gamma(l) - Gamma(l-1), Gamma(0) = 0.
  std::vector<std::pair<int, double>> gamma_rate;
  /// Gamma(l) - Gamma(l-1) for l = 1..L.
  std::vector<double> increments;
  double N_PD = 0.0;
  double g = 1.0;
  double tau = 1.0;
};

/// Omega = [[0, 1], [-1, 0]].
Eigen::Matrix2d symplectic_form();

/// Eigenvalues of a 2x2 Hermitian matrix, plus >= minus.
EigenPair hermitian_eigenvalues(const Eigen::Matrix2cd& m);

/// Throws SingularStepError when X_{l-1} is singular.
IntermediateMap intermediate_map(const ChannelMap& map_l,
                                 const ChannelMap& map_lm1);

/// Lambda_l = Y_step - (i/2) Omega + (i/2) X_step Omega X_step^T.
LambdaMatrix lambda_step(const ChannelMap& map_l, const ChannelMap& map_lm1);

/// Lambda eigenvalues for identical uncorrelated environment modes (A_E, B_E).
EigenPair eigenvalues_closed_form(double A_E, Complex B_E, double c_l,
                                  double c_lm1);

/// Sum of (|lambda| - lambda)/2 over both eigenvalues, with the negativity
/// tolerance applied.
double negative_part(const EigenPair& ev);

/// Accumulated measure over maps for l = 1..L (maps[0] is l = 1).
NMResult measure(std::span<const ChannelMap> maps);

/// Vacuum specialization: sum over l >= 2 of max(0, c(l)^2/c(l-1)^2 - 1).
/// c_trace[0] is c_{1,1}(1).
double vacuum_measure(std::span<const double> c_trace);

ConditionResult nm_condition(std::span<const double> c_trace);

/// (2 n_E + 1) cosh(2 r_E) N_vac.
double generic_gaussian_measure(double n_E, double r_E, double N_vac);

/// Eigenvalues of Lambda_l for TMSV blocks (L_B = 2) as printed in closed
/// form; `plus` is the branch with +sqrt inside the bracket, which carries
/// an overall minus sign.
EigenPair tmsv_eigenvalues_closed_form(double xi,
                                       std::span<const double> row_lm1,
                                       std::span<const double> row_l, int l);

/// Pure-damping correspondence of a |c_{1,1}| trace (c_trace[0] is l = 1).
DampingTrace damping_correspondence(std::span<const double> c_trace, double g,
                                    double tau);

}  // namespace blockcm
