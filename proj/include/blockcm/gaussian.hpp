#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include <Eigen/Dense>

#include "blockcm/scattering.hpp"

namespace blockcm {

using Complex = std::complex<double>;

/// Single-mode Gaussian state through its characteristic function
///   chi(nu) = exp[-(A + 1/2)|nu|^2 - (B* nu^2 + B nu*^2)/2 + C nu* - C* nu].
struct GaussianParams {
  double A = 0.0;
  Complex B{};
  Complex C{};

  /// (A + 1/2)^2 - |B|^2 >= 1/4 within `tol`.
  bool is_physical(double tol = 1e-12) const;
};

/// Thermal photon number n, squeezing r, squeezing angle phi, displacement
/// alpha.
struct PhysicalGaussianSpec {
  double n = 0.0;
  double r = 0.0;
  double phi = 0.0;
  Complex alpha{};
};

struct VacuumEnv {};
struct GenericGaussianEnv {
  PhysicalGaussianSpec state;
};
/// Two-mode squeezed vacuum on modes (l,1)-(l,2) of every block.
struct TmsvEnv {
  double xi = 0.0;
};
/// Thermal product state, n_th photons in every mode.
struct ProductThermalEnv {
  double n_th = 0.0;
};

/// State of every (identical) environment block.
using EnvironmentSpec =
    std::variant<VacuumEnv, GenericGaussianEnv, TmsvEnv, ProductThermalEnv>;

std::string environment_name(const EnvironmentSpec& env);

/// Throws DomainError when the spec is unphysical or incompatible with the
/// block size (TMSV needs L_B = 2).
void validate_environment(const EnvironmentSpec& env, const NetworkShape& shape);

/// Per-mode parameters of an uncorrelated environment; nullopt for TMSV.
std::optional<GaussianParams> mode_params(const EnvironmentSpec& env);

/// Single-mode covariance matrix, vacuum = I/2.
using CovMatrix2 = Eigen::Matrix2d;

bool is_physical_covariance(const CovMatrix2& sigma, double tol = 1e-12);

/// Covariance-level channel sigma -> X sigma X^T + Y after l collisions.
struct ChannelMap {
  Eigen::Matrix2d X = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d Y = Eigen::Matrix2d::Zero();
  int step = 0;
};

GaussianParams params_from_physical(const PhysicalGaussianSpec& spec);

CovMatrix2 covariance_from_params(const GaussianParams& p);

/// Closed-form system state after l collisions with an uncorrelated
/// environment whose modes all carry `env`. `row` is c(l).
GaussianParams evolve_system_params(std::span<const double> row,
                                    const GaussianParams& sys,
                                    const GaussianParams& env);

/// Closed-form (X_l, Y_l) for an uncorrelated environment.
ChannelMap channel_xy(std::span<const double> row, const GaussianParams& env,
                      int step = 0);

/// 2 L_B x 2 L_B covariance of one block, quadratures ordered
/// (x_1..x_LB, p_1..p_LB).
Eigen::MatrixXd block_covariance(const EnvironmentSpec& env, int block_size);

/// Covariance of TMSV(xi) in (x1, x2, p1, p2) ordering: cosh(2xi)/2 on the
/// diagonal, +sinh(2xi)/2 between x1 and x2, -sinh(2xi)/2 between p1 and p2.
Eigen::Matrix4d tmsv_block_covariance(double xi);

/// Logarithmic negativity (natural log) of a two-mode covariance matrix in
/// (x1, x2, p1, p2) ordering.
double logarithmic_negativity(const Eigen::Matrix4d& sigma);

struct PropagationResult {
  CovMatrix2 sigma_out;
  Complex mean_out{};  // <a_S> after the channel
  ChannelMap channel;
};

/// Ground-truth moment propagation through a dense prefix matrix S(l):
/// builds the joint covariance of all modes in (x..., p...) ordering, acts
/// with S (+) S and reads off the system block. O(dim^3); meant for
/// validation and small networks.
PropagationResult joint_covariance_oracle(const RealMatrix& prefix,
                                          int step,
                                          const GaussianParams& sys,
                                          const EnvironmentSpec& env,
                                          const NetworkShape& shape);

/// Same quantity as joint_covariance_oracle computed from c(l) alone, using
/// the block-diagonal structure of the input covariance. O(dim).
PropagationResult propagate_system(std::span<const double> row, int step,
                                   const GaussianParams& sys,
                                   const EnvironmentSpec& env,
                                   const NetworkShape& shape);

/// (X_l, Y_l) for any environment: the closed form for uncorrelated blocks,
/// block-structured propagation for correlated ones.
ChannelMap system_channel(std::span<const double> row, int step,
                          const EnvironmentSpec& env,
                          const NetworkShape& shape);

}  // namespace blockcm
