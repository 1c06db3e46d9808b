#include "blockcm/nonmarkov.hpp"

#include <cmath>
#include <string>

#include "blockcm/errors.hpp"

namespace blockcm {

namespace {

const Complex kI(0.0, 1.0);

void check_nonsingular(double c_lm1, int step) {
  if (!(std::abs(c_lm1) > kSingularThreshold)) {
    throw SingularStepError(
        step, "singular step l = " + std::to_string(step) +
                  ": |c11(l-1)| = " + std::to_string(std::abs(c_lm1)));
  }
}

// Ratio |c(l)| / |c(l-1)| with c(l-1) = 0 mapped to +inf (or 1 if both 0).
double revival_ratio(double c_l, double c_lm1) {
  const double num = std::abs(c_l);
  const double den = std::abs(c_lm1);
  if (den == 0.0) return num == 0.0 ? 1.0 : INFINITY;
  return num / den;
}

}  // namespace

Eigen::Matrix2d symplectic_form() {
  Eigen::Matrix2d omega;
  omega << 0.0, 1.0, -1.0, 0.0;
  return omega;
}

EigenPair hermitian_eigenvalues(const Eigen::Matrix2cd& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const double half_gap = 0.5 * (a - d);
  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(half_gap, std::abs(m(0, 1)));
  return {mean + radius, mean - radius};
}

IntermediateMap intermediate_map(const ChannelMap& map_l,
                                 const ChannelMap& map_lm1) {
  const double det = map_lm1.X.determinant();
  check_nonsingular(std::sqrt(std::abs(det)), map_l.step);
  IntermediateMap phi;
  phi.X_step = map_l.X * map_lm1.X.inverse();
  phi.Y_step = map_l.Y - phi.X_step * map_lm1.Y * phi.X_step.transpose();
  phi.step = map_l.step;
  return phi;
}

LambdaMatrix lambda_step(const ChannelMap& map_l, const ChannelMap& map_lm1) {
  const IntermediateMap phi = intermediate_map(map_l, map_lm1);
  const Eigen::Matrix2cd omega = symplectic_form().cast<Complex>();
  const Eigen::Matrix2cd x = phi.X_step.cast<Complex>();
  LambdaMatrix lambda;
  lambda.value = phi.Y_step.cast<Complex>() - 0.5 * kI * omega +
                 0.5 * kI * x * omega * x.transpose();
  lambda.eigenvalues = hermitian_eigenvalues(lambda.value);
  lambda.step = phi.step;
  return lambda;
}

EigenPair eigenvalues_closed_form(double A_E, Complex B_E, double c_l,
                                  double c_lm1) {
  check_nonsingular(c_lm1, 0);
  const double factor = 1.0 - (c_l * c_l) / (c_lm1 * c_lm1);
  const double root = std::sqrt(4.0 * std::norm(B_E) + 1.0);
  const double plus = 0.5 * (2.0 * A_E + 1.0 + root) * factor;
  const double minus = 0.5 * (2.0 * A_E + 1.0 - root) * factor;
  // For factor < 0 the "+" branch is the smaller one.
  return plus >= minus ? EigenPair{plus, minus} : EigenPair{minus, plus};
}

double negative_part(const EigenPair& ev) {
  const double threshold =
      -kNegativityTolerance *
      std::max(1.0, std::abs(ev.plus) + std::abs(ev.minus));
  double sum = 0.0;
  for (double lambda : {ev.plus, ev.minus}) {
    if (lambda < threshold) sum += -lambda;
  }
  return sum;
}

NMResult measure(std::span<const ChannelMap> maps) {
  if (maps.size() < 2) {
    throw DomainError("measure needs the channel maps of at least 2 steps");
  }
  NMResult result;
  result.condition_trace.reserve(maps.size());
  for (const auto& map : maps) {
    result.condition_trace.emplace_back(map.step, std::abs(map.X(0, 0)));
  }
  for (std::size_t k = 1; k < maps.size(); ++k) {
    try {
      const LambdaMatrix lambda = lambda_step(maps[k], maps[k - 1]);
      result.per_step.push_back(
          {maps[k].step, lambda.eigenvalues.plus, lambda.eigenvalues.minus});
      result.N += negative_part(lambda.eigenvalues);
    } catch (const SingularStepError& e) {
      result.singular_steps.push_back(e.step());
    }
  }
  return result;
}

double vacuum_measure(std::span<const double> c_trace) {
  double n = 0.0;
  for (std::size_t k = 1; k < c_trace.size(); ++k) {
    check_nonsingular(c_trace[k - 1], static_cast<int>(k) + 1);
    const double rho =
        (c_trace[k] * c_trace[k]) / (c_trace[k - 1] * c_trace[k - 1]);
    n += negative_part({0.0, 1.0 - rho});
  }
  return n;
}

ConditionResult nm_condition(std::span<const double> c_trace) {
  ConditionResult result;
  for (std::size_t k = 1; k < c_trace.size(); ++k) {
    const bool revival = revival_ratio(c_trace[k], c_trace[k - 1]) > 1.0;
    result.flags.emplace_back(static_cast<int>(k) + 1, revival);
    result.non_markovian = result.non_markovian || revival;
  }
  return result;
}

double generic_gaussian_measure(double n_E, double r_E, double N_vac) {
  if (!(n_E >= 0.0) || !(r_E >= 0.0)) {
    throw DomainError("n_E and r_E must be >= 0");
  }
  return (2.0 * n_E + 1.0) * std::cosh(2.0 * r_E) * N_vac;
}

EigenPair tmsv_eigenvalues_closed_form(double xi,
                                       std::span<const double> row_lm1,
                                       std::span<const double> row_l, int l) {
  if (l < 2) throw DomainError("TMSV closed form needs l >= 2");
  const double c_l = row_l[0];
  const double c_lm1 = row_lm1[0];
  check_nonsingular(c_lm1, l);
  // Block l' occupies one-based columns 2l' and 2l'+1.
  auto pair_sum = [](std::span<const double> row, int blocks) {
    double s = 0.0;
    for (int b = 1; b <= blocks; ++b) {
      const std::size_t k = 2 * static_cast<std::size_t>(b) - 1;
      if (k + 1 >= row.size()) break;
      s += row[k] * row[k + 1];
    }
    return s;
  };
  const double sh = std::sinh(2.0 * xi);
  const double ch = std::cosh(2.0 * xi);
  const double c_l2 = c_l * c_l;
  const double c_lm12 = c_lm1 * c_lm1;
  const double gamma_lm1 = sh * c_lm12 * pair_sum(row_l, l);
  const double gamma_l = sh * c_l2 * pair_sum(row_lm1, l - 1);
  const double diff = c_l2 - c_lm12;
  const double root =
      std::sqrt(4.0 * std::pow(gamma_l - gamma_lm1, 2) + diff * diff);
  const double prefactor = -0.5 / c_lm12;
  return {prefactor * (ch * diff + root), prefactor * (ch * diff - root)};
}

DampingTrace damping_correspondence(std::span<const double> c_trace, double g,
                                    double tau) {
  if (!(g > 0.0) || !(tau > 0.0)) {
    throw DomainError("damping coupling g and interval tau must be > 0");
  }
  DampingTrace trace;
  trace.g = g;
  trace.tau = tau;
  double previous = 1.0;  // |c_{1,1}(0)|: S(0) is the identity
  for (std::size_t k = 0; k < c_trace.size(); ++k) {
    const int l = static_cast<int>(k) + 1;
    const double magnitude = std::abs(c_trace[k]);
    if (magnitude == 0.0) {
      throw SingularStepError(l, "damping correspondence: c11(" +
                                     std::to_string(l) + ") = 0");
    }
    const double increment = -2.0 * std::log(revival_ratio(magnitude, previous));
    trace.Gamma.emplace_back(l, -2.0 * std::log(magnitude));
    trace.increments.push_back(increment);
    trace.gamma_rate.emplace_back(l, increment / (g * tau));
    if (increment < 0.0) trace.N_PD += -increment;
    previous = magnitude;
  }
  return trace;
}

}  // namespace blockcm
