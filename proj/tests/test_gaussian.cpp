#include <cmath>
#include <numbers>
#include <random>

#include "blockcm/errors.hpp"
#include "blockcm/gaussian.hpp"
#include "doctest.h"

using namespace blockcm;

namespace {
constexpr double kPi = std::numbers::pi;

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

GaussianParams random_system(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return params_from_physical({2.0 * u(rng), u(rng), 2 * kPi * u(rng),
                               Complex(u(rng) - 0.5, u(rng) - 0.5)});
}
}  // namespace

TEST_CASE("params_from_physical") {
  const GaussianParams vac = params_from_physical({});
  CHECK(vac.A == 0.0);
  CHECK(vac.B == Complex(0.0, 0.0));
  CHECK(vac.C == Complex(0.0, 0.0));

  const GaussianParams thermal = params_from_physical({1.0, 0.0, 0.0, {}});
  CHECK(thermal.A == doctest::Approx(1.0));
  CHECK(std::abs(thermal.B) == 0.0);

  const GaussianParams squeezed = params_from_physical({0.0, 1.0, 0.0, {}});
  CHECK(squeezed.A == doctest::Approx(1.3810978455418157).epsilon(1e-14));
  CHECK(squeezed.B.real() == doctest::Approx(-1.8134302039235095).epsilon(1e-14));
  CHECK(squeezed.B.imag() == doctest::Approx(0.0));
  CHECK(squeezed.is_physical());

  const GaussianParams displaced = params_from_physical({0.0, 0.0, 0.0, {0.3, -0.2}});
  CHECK(displaced.C == Complex(0.3, -0.2));

  CHECK_THROWS_AS(params_from_physical({-0.1, 0.0, 0.0, {}}), DomainError);
  CHECK_THROWS_AS(params_from_physical({0.0, -0.1, 0.0, {}}), DomainError);
}

TEST_CASE("covariance_from_params") {
  CHECK(covariance_from_params({}).isApprox(0.5 * Eigen::Matrix2d::Identity()));
  CHECK(covariance_from_params({1.0, {}, {}}).isApprox(1.5 * Eigen::Matrix2d::Identity()));

  const CovMatrix2 sq = covariance_from_params(params_from_physical({0.0, 1.0, 0.0, {}}));
  CHECK(sq(0, 0) == doctest::Approx(std::exp(2.0) / 2).epsilon(1e-14));
  CHECK(sq(1, 1) == doctest::Approx(std::exp(-2.0) / 2).epsilon(1e-12));
  CHECK(sq(0, 0) == doctest::Approx(3.69453).epsilon(1e-5));
  CHECK(sq(1, 1) == doctest::Approx(0.06767).epsilon(1e-4));
  CHECK(sq(0, 1) == 0.0);
  CHECK(sq.determinant() == doctest::Approx(0.25));
}

TEST_CASE("evolve_system_params closed form") {
  const auto s = build_scattering({4, 2}, 0.7, 0.3, Strategy::Sequential);
  SUBCASE("vacuum stays vacuum") {
    for (int l = 1; l <= 4; ++l) {
      const GaussianParams out = evolve_system_params(s.prefix_row(l), {}, {});
      CHECK(std::abs(out.A) < 1e-15);
      CHECK(std::abs(out.B) == 0.0);
    }
  }
  SUBCASE("isolated system is the identity channel") {
    const std::vector<double> row{1.0, 0.0, 0.0};
    const GaussianParams in{0.7, {0.2, -0.1}, {0.5, 0.5}};
    const GaussianParams out =
        evolve_system_params(row, in, params_from_physical({2.0, 0.3, 0.1, {1.0, 0.0}}));
    CHECK(out.A == doctest::Approx(in.A));
    CHECK(std::abs(out.B - in.B) < 1e-15);
    CHECK(std::abs(out.C - in.C) < 1e-15);
  }
  SUBCASE("thermal environment, half transmitted") {
    const double h = std::sqrt(0.5);
    const std::vector<double> row{h, h};
    const GaussianParams out = evolve_system_params(row, {}, {1.0, {}, {}});
    CHECK(out.A == doctest::Approx(0.5));
  }
  SUBCASE("non-normalized row is rejected") {
    const std::vector<double> row{0.5, 0.5};
    CHECK_THROWS_AS(evolve_system_params(row, {}, {}), DomainError);
  }
}

TEST_CASE("channel_xy") {
  const double c = 0.6;
  const std::vector<double> row{c, 0.8};
  const ChannelMap vac = channel_xy(row, {});
  CHECK(vac.X.isApprox(c * Eigen::Matrix2d::Identity()));
  CHECK(vac.Y.isApprox((1 - c * c) / 2 * Eigen::Matrix2d::Identity()));

  const ChannelMap thermal = channel_xy(row, {2.0, {}, {}});
  CHECK(thermal.Y.isApprox(2.5 * (1 - c * c) * Eigen::Matrix2d::Identity()));

  const std::vector<double> isolated{1.0, 0.0};
  const ChannelMap id = channel_xy(isolated, {3.0, {0.5, 0.5}, {}});
  CHECK(id.X.isIdentity(0.0));
  CHECK(id.Y.isZero(1e-15));
  CHECK(vac.Y.isApprox(vac.Y.transpose()));
}

TEST_CASE("TMSV block covariance") {
  CHECK(tmsv_block_covariance(0.0).isApprox(0.5 * Eigen::Matrix4d::Identity()));
  const Eigen::Matrix4d s = tmsv_block_covariance(1.0);
  CHECK(s(0, 0) == doctest::Approx(1.8810978455418157).epsilon(1e-14));
  CHECK(s(0, 1) > 0.0);
  CHECK(s(2, 3) < 0.0);
  // Reduced state of either mode is thermal with n = sinh^2(xi).
  for (double xi : {0.25, 0.5, 1.0, 1.7}) {
    const Eigen::Matrix4d t = tmsv_block_covariance(xi);
    const double n = std::sinh(xi) * std::sinh(xi);
    CHECK(t(0, 0) == doctest::Approx(n + 0.5).epsilon(1e-13));
    CHECK(t(1, 1) == doctest::Approx(n + 0.5).epsilon(1e-13));
    CHECK(t(0, 2) == 0.0);
  }
}

TEST_CASE("TMSV logarithmic negativity is 2 xi") {
  for (double xi : {0.0, 0.1, 0.5, 1.0, 2.0}) {
    CHECK(logarithmic_negativity(tmsv_block_covariance(xi)) ==
          doctest::Approx(2.0 * xi).epsilon(1e-9));
  }
  // A product of thermal states is separable.
  CHECK(logarithmic_negativity(1.3 * Eigen::Matrix4d::Identity()) == 0.0);
}

TEST_CASE("joint covariance oracle agrees with closed forms") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(0.0, kPi / 2), u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const NetworkShape shape{1 + trial % 7, 1 + trial % 4};
    const Strategy strategy = trial % 3 ? Strategy::Sequential : Strategy::Alternating;
    const double t1 = angle(rng), t2 = angle(rng);
    const GaussianParams sys = random_system(rng);
    const PhysicalGaussianSpec env_state{3.0 * u(rng), 1.5 * u(rng), 2 * kPi * u(rng),
                                         Complex(u(rng), -u(rng))};
    const EnvironmentSpec env = GenericGaussianEnv{env_state};
    const GaussianParams env_params = params_from_physical(env_state);
    const auto s = build_scattering(shape, t1, t2, strategy);
    for (int l = 1; l <= shape.blocks; ++l) {
      const RealMatrix prefix = prefix_matrix(shape, t1, t2, strategy, l);
      const PropagationResult dense = joint_covariance_oracle(prefix, l, sys, env, shape);
      const PropagationResult fast = propagate_system(s.prefix_row(l), l, sys, env, shape);
      const GaussianParams closed = evolve_system_params(s.prefix_row(l), sys, env_params);
      CHECK(max_abs(dense.sigma_out - covariance_from_params(closed)) < 1e-10);
      CHECK(max_abs(fast.sigma_out - dense.sigma_out) < 1e-10);
      // First moments: only environment modes (k >= 2) feed the env term.
      CHECK(std::abs(dense.mean_out - closed.C) < 1e-10);
      CHECK(std::abs(fast.mean_out - dense.mean_out) < 1e-10);
      const ChannelMap xy = channel_xy(s.prefix_row(l), env_params, l);
      CHECK(max_abs(dense.channel.Y - xy.Y) < 1e-10);
      CHECK(dense.channel.X.isApprox(s.c11(l) * Eigen::Matrix2d::Identity(), 1e-14));
      CHECK(is_physical_covariance(dense.sigma_out));
    }
  }
}

TEST_CASE("oracle edge cases") {
  const NetworkShape shape{3, 2};
  const GaussianParams sys{0.4, {0.1, 0.2}, {}};
  SUBCASE("identity network") {
    const RealMatrix eye = RealMatrix::Identity(shape.dim(), shape.dim());
    const auto out = joint_covariance_oracle(eye, 0, sys, TmsvEnv{0.8}, shape);
    CHECK(max_abs(out.sigma_out - covariance_from_params(sys)) < 1e-15);
    CHECK(out.channel.Y.isZero(1e-15));
  }
  SUBCASE("TMSV with xi = 0 is the vacuum") {
    const RealMatrix p = prefix_matrix(shape, 0.4, 0.2, Strategy::Sequential, 3);
    const auto a = joint_covariance_oracle(p, 3, sys, TmsvEnv{0.0}, shape);
    const auto b = joint_covariance_oracle(p, 3, sys, VacuumEnv{}, shape);
    CHECK(max_abs(a.sigma_out - b.sigma_out) < 1e-14);
  }
  SUBCASE("TMSV needs L_B = 2") {
    const NetworkShape three{2, 3};
    const RealMatrix eye = RealMatrix::Identity(three.dim(), three.dim());
    CHECK_THROWS_AS(joint_covariance_oracle(eye, 0, sys, TmsvEnv{0.5}, three), DomainError);
    CHECK_THROWS_AS(validate_environment(TmsvEnv{0.5}, three), DomainError);
  }
}

TEST_CASE("environment never changes X, correlated blocks stay physical") {
  const NetworkShape shape{6, 2};
  std::mt19937_64 rng(5);
  for (const EnvironmentSpec& env :
       {EnvironmentSpec{VacuumEnv{}}, EnvironmentSpec{TmsvEnv{1.2}},
        EnvironmentSpec{ProductThermalEnv{0.7}},
        EnvironmentSpec{GenericGaussianEnv{{0.5, 0.4, 0.3, {}}}}}) {
    const auto s = build_scattering(shape, 0.5, 0.2, Strategy::Sequential);
    for (int l = 1; l <= shape.blocks; ++l) {
      const GaussianParams sys = random_system(rng);
      const RealMatrix p = prefix_matrix(shape, 0.5, 0.2, Strategy::Sequential, l);
      const auto dense = joint_covariance_oracle(p, l, sys, env, shape);
      CHECK(dense.channel.X.isApprox(s.c11(l) * Eigen::Matrix2d::Identity(), 1e-14));
      CHECK(is_physical_covariance(dense.sigma_out));
      CHECK(dense.channel.Y.isApprox(dense.channel.Y.transpose(), 1e-14));
      const ChannelMap map = system_channel(s.prefix_row(l), l, env, shape);
      CHECK(max_abs(map.Y - dense.channel.Y) < 1e-10);
    }
  }
}

TEST_CASE("displacement is linear and vanishes with C_E = 0") {
  const auto s = build_scattering({5, 3}, 0.6, 0.4, Strategy::Alternating);
  const GaussianParams env = params_from_physical({0.3, 0.0, 0.0, {}});
  for (int l = 1; l <= 5; ++l) {
    const GaussianParams out = evolve_system_params(s.prefix_row(l), {0.0, {}, {0.4, -0.3}}, env);
    CHECK(std::abs(out.C - Complex(0.4, -0.3) * s.c11(l)) < 1e-15);
    const GaussianParams env_shift{env.A, env.B, {1.0, 2.0}};
    const auto a = evolve_system_params(s.prefix_row(l), {0.0, {}, {0.4, -0.3}}, env_shift);
    const auto b = evolve_system_params(s.prefix_row(l), {0.0, {}, {0.8, -0.6}}, env_shift);
    const auto zero = evolve_system_params(s.prefix_row(l), {0.0, {}, {}}, env_shift);
    CHECK(std::abs((b.C - zero.C) - 2.0 * (a.C - zero.C)) < 1e-14);
  }
}
