#include "blockcm/gaussian.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "blockcm/errors.hpp"

namespace blockcm {

namespace {

constexpr double kNormTolerance = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Quadrature means (x, p) of a mode with <a> = C.
Eigen::Vector2d quadrature_mean(Complex c) {
  return {std::numbers::sqrt2 * c.real(), std::numbers::sqrt2 * c.imag()};
}

Complex amplitude_from_quadratures(double x, double p) {
  return Complex(x, p) / std::numbers::sqrt2;
}

void check_normalized(std::span<const double> row) {
  double norm2 = 0.0;
  for (double c : row) norm2 += c * c;
  if (std::abs(norm2 - 1.0) > kNormTolerance) {
    throw DomainError("prefix row is not normalized: sum c^2 = " +
                      std::to_string(norm2));
  }
}

Eigen::Matrix2d y_from_params(double a, Complex b) {
  Eigen::Matrix2d y;
  y << a - b.real(), -b.imag(), -b.imag(), a + b.real();
  return y;
}

// Displacement of each mode of a block, same ordering as block_covariance.
Eigen::VectorXd block_mean(const EnvironmentSpec& env, int block_size) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2 * block_size);
  if (const auto* g = std::get_if<GenericGaussianEnv>(&env)) {
    const Eigen::Vector2d q = quadrature_mean(g->state.alpha);
    for (int j = 0; j < block_size; ++j) {
      mean[j] = q[0];
      mean[block_size + j] = q[1];
    }
  }
  return mean;
}

ChannelMap channel_from_propagation(const CovMatrix2& sigma_in,
                                    const CovMatrix2& sigma_out, double c11,
                                    int step) {
  ChannelMap map;
  map.X = c11 * Eigen::Matrix2d::Identity();
  map.Y = sigma_out - map.X * sigma_in * map.X.transpose();
  map.step = step;
  return map;
}

}  // namespace

bool GaussianParams::is_physical(double tol) const {
  const double a = A + 0.5;
  return A >= -tol && a * a - std::norm(B) >= 0.25 - tol;
}

std::string environment_name(const EnvironmentSpec& env) {
  return std::visit(
      Overloaded{[](const VacuumEnv&) { return std::string("vacuum"); },
                 [](const GenericGaussianEnv&) { return std::string("gaussian"); },
                 [](const TmsvEnv&) { return std::string("tmsv"); },
                 [](const ProductThermalEnv&) { return std::string("product"); }},
      env);
}

void validate_environment(const EnvironmentSpec& env,
                          const NetworkShape& shape) {
  std::visit(
      Overloaded{
          [](const VacuumEnv&) {},
          [](const GenericGaussianEnv& g) { params_from_physical(g.state); },
          [&](const TmsvEnv& t) {
            if (shape.block_size != 2) {
              throw DomainError("TMSV environment requires L_B = 2, got L_B = " +
                                std::to_string(shape.block_size));
            }
            if (!std::isfinite(t.xi)) throw DomainError("TMSV xi must be finite");
          },
          [](const ProductThermalEnv& p) {
            if (!(p.n_th >= 0.0)) {
              throw DomainError("thermal photon number must be >= 0");
            }
          }},
      env);
}

std::optional<GaussianParams> mode_params(const EnvironmentSpec& env) {
  return std::visit(
      Overloaded{
          [](const VacuumEnv&) -> std::optional<GaussianParams> {
            return GaussianParams{};
          },
          [](const GenericGaussianEnv& g) -> std::optional<GaussianParams> {
            return params_from_physical(g.state);
          },
          [](const TmsvEnv&) -> std::optional<GaussianParams> {
            return std::nullopt;
          },
          [](const ProductThermalEnv& p) -> std::optional<GaussianParams> {
            return params_from_physical({p.n_th, 0.0, 0.0, {}});
          }},
      env);
}

bool is_physical_covariance(const CovMatrix2& sigma, double tol) {
  return std::abs(sigma(0, 1) - sigma(1, 0)) <= tol &&
         sigma.determinant() >= 0.25 - tol && sigma(0, 0) > 0.0;
}

GaussianParams params_from_physical(const PhysicalGaussianSpec& spec) {
  if (!(spec.n >= 0.0)) {
    throw DomainError("thermal photon number n must be >= 0, got " +
                      std::to_string(spec.n));
  }
  if (!(spec.r >= 0.0)) {
    throw DomainError("squeezing strength r must be >= 0, got " +
                      std::to_string(spec.r));
  }
  const double nh = spec.n + 0.5;
  GaussianParams p;
  p.A = nh * std::cosh(2.0 * spec.r) - 0.5;
  p.B = -nh * std::sinh(2.0 * spec.r) * std::polar(1.0, spec.phi);
  p.C = spec.alpha;
  return p;
}

CovMatrix2 covariance_from_params(const GaussianParams& p) {
  return y_from_params(p.A + 0.5, p.B);
}

GaussianParams evolve_system_params(std::span<const double> row,
                                    const GaussianParams& sys,
                                    const GaussianParams& env) {
  check_normalized(row);
  const double c = row[0];
  const double c2 = c * c;
  double env_weight2 = 0.0;
  double env_weight = 0.0;
  for (std::size_t k = 1; k < row.size(); ++k) {
    env_weight2 += row[k] * row[k];
    env_weight += row[k];
  }
  const double a_l = (env.A + 0.5) * (1.0 - c2);
  const Complex b_l = env.B * env_weight2;

  GaussianParams out;
  out.A = (sys.A + 0.5) * c2 + a_l - 0.5;
  out.B = sys.B * c2 + b_l;
  out.C = sys.C * c + env.C * env_weight;
  return out;
}

ChannelMap channel_xy(std::span<const double> row, const GaussianParams& env,
                      int step) {
  const double c = row[0];
  double env_weight2 = 0.0;
  for (std::size_t k = 1; k < row.size(); ++k) env_weight2 += row[k] * row[k];
  ChannelMap map;
  map.X = c * Eigen::Matrix2d::Identity();
  map.Y = y_from_params((env.A + 0.5) * (1.0 - c * c), env.B * env_weight2);
  map.step = step;
  return map;
}

Eigen::MatrixXd block_covariance(const EnvironmentSpec& env, int block_size) {
  if (const auto* t = std::get_if<TmsvEnv>(&env)) {
    if (block_size != 2) {
      throw DomainError("TMSV environment requires L_B = 2");
    }
    return tmsv_block_covariance(t->xi);
  }
  const CovMatrix2 mode = covariance_from_params(*mode_params(env));
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2 * block_size, 2 * block_size);
  for (int j = 0; j < block_size; ++j) {
    cov(j, j) = mode(0, 0);
    cov(j, block_size + j) = mode(0, 1);
    cov(block_size + j, j) = mode(1, 0);
    cov(block_size + j, block_size + j) = mode(1, 1);
  }
  return cov;
}

Eigen::Matrix4d tmsv_block_covariance(double xi) {
  const double d = std::cosh(2.0 * xi) / 2.0;
  const double s = std::sinh(2.0 * xi) / 2.0;
  Eigen::Matrix4d cov;
  // clang-format off
  cov << d, s, 0,  0,
         s, d, 0,  0,
         0, 0, d, -s,
         0, 0, -s, d;
  // clang-format on
  return cov;
}

double logarithmic_negativity(const Eigen::Matrix4d& sigma) {
  // Partial transposition of mode 2 flips the sign of p2.
  const Eigen::Vector4d flip(1.0, 1.0, 1.0, -1.0);
  const Eigen::Matrix4d pt = flip.asDiagonal() * sigma * flip.asDiagonal();
  Eigen::Matrix4d omega = Eigen::Matrix4d::Zero();
  omega.topRightCorner<2, 2>() = Eigen::Matrix2d::Identity();
  omega.bottomLeftCorner<2, 2>() = -Eigen::Matrix2d::Identity();
  const Eigen::Matrix4d m = omega * pt;
  // Eigenvalues of -(Omega sigma)^2 are the squared symplectic eigenvalues,
  // each twice.
  Eigen::EigenSolver<Eigen::Matrix4d> solver(-m * m, false);
  std::array<double, 4> nu2{};
  for (int k = 0; k < 4; ++k) nu2[k] = solver.eigenvalues()[k].real();
  std::sort(nu2.begin(), nu2.end());
  double en = 0.0;
  for (double v : {nu2[0], nu2[2]}) {
    const double nu = std::sqrt(std::max(v, 0.0));
    en += std::max(0.0, -std::log(2.0 * nu));
  }
  return en;
}

PropagationResult joint_covariance_oracle(const RealMatrix& prefix, int step,
                                          const GaussianParams& sys,
                                          const EnvironmentSpec& env,
                                          const NetworkShape& shape) {
  shape.validate();
  validate_environment(env, shape);
  const int dim = shape.dim();
  if (prefix.rows() != dim || prefix.cols() != dim) {
    throw DomainError("prefix matrix has wrong dimension");
  }
  const int lb = shape.block_size;

  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2 * dim, 2 * dim);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2 * dim);

  const CovMatrix2 sys_cov = covariance_from_params(sys);
  sigma(0, 0) = sys_cov(0, 0);
  sigma(0, dim) = sys_cov(0, 1);
  sigma(dim, 0) = sys_cov(1, 0);
  sigma(dim, dim) = sys_cov(1, 1);
  const Eigen::Vector2d sys_mean = quadrature_mean(sys.C);
  mean[0] = sys_mean[0];
  mean[dim] = sys_mean[1];

  const Eigen::MatrixXd block = block_covariance(env, lb);
  const Eigen::VectorXd block_mu = block_mean(env, lb);
  for (int l = 1; l <= shape.blocks; ++l) {
    for (int a = 0; a < 2 * lb; ++a) {
      const int ia = shape.mode_index(l, a % lb + 1) + (a < lb ? 0 : dim);
      mean[ia] = block_mu[a];
      for (int b = 0; b < 2 * lb; ++b) {
        const int ib = shape.mode_index(l, b % lb + 1) + (b < lb ? 0 : dim);
        sigma(ia, ib) = block(a, b);
      }
    }
  }

  Eigen::MatrixXd symplectic = Eigen::MatrixXd::Zero(2 * dim, 2 * dim);
  symplectic.topLeftCorner(dim, dim) = prefix;
  symplectic.bottomRightCorner(dim, dim) = prefix;

  const Eigen::MatrixXd out = symplectic * sigma * symplectic.transpose();
  const Eigen::VectorXd mean_out = symplectic * mean;

  PropagationResult result;
  result.sigma_out << out(0, 0), out(0, dim), out(dim, 0), out(dim, dim);
  result.mean_out = amplitude_from_quadratures(mean_out[0], mean_out[dim]);
  result.channel =
      channel_from_propagation(sys_cov, result.sigma_out, prefix(0, 0), step);
  return result;
}

PropagationResult propagate_system(std::span<const double> row, int step,
                                   const GaussianParams& sys,
                                   const EnvironmentSpec& env,
                                   const NetworkShape& shape) {
  shape.validate();
  validate_environment(env, shape);
  if (static_cast<int>(row.size()) != shape.dim()) {
    throw DomainError("prefix row has wrong length");
  }
  const int lb = shape.block_size;
  const double c = row[0];
  const CovMatrix2 sys_cov = covariance_from_params(sys);

  CovMatrix2 sigma = c * c * sys_cov;
  Eigen::Vector2d mean = c * quadrature_mean(sys.C);

  const Eigen::MatrixXd block = block_covariance(env, lb);
  const Eigen::VectorXd block_mu = block_mean(env, lb);
  Eigen::VectorXd weights(lb);
  for (int l = 1; l <= shape.blocks; ++l) {
    for (int j = 1; j <= lb; ++j) weights[j - 1] = row[shape.mode_index(l, j)];
    if (weights.isZero(0.0)) continue;
    sigma(0, 0) += weights.dot(block.topLeftCorner(lb, lb) * weights);
    sigma(0, 1) += weights.dot(block.topRightCorner(lb, lb) * weights);
    sigma(1, 0) += weights.dot(block.bottomLeftCorner(lb, lb) * weights);
    sigma(1, 1) += weights.dot(block.bottomRightCorner(lb, lb) * weights);
    mean[0] += weights.dot(block_mu.head(lb));
    mean[1] += weights.dot(block_mu.tail(lb));
  }

  PropagationResult result;
  result.sigma_out = sigma;
  result.mean_out = amplitude_from_quadratures(mean[0], mean[1]);
  result.channel = channel_from_propagation(sys_cov, sigma, c, step);
  return result;
}

ChannelMap system_channel(std::span<const double> row, int step,
                          const EnvironmentSpec& env,
                          const NetworkShape& shape) {
  if (const auto env_mode = mode_params(env)) {
    return channel_xy(row, *env_mode, step);
  }
  return propagate_system(row, step, GaussianParams{}, env, shape).channel;
}

}  // namespace blockcm
