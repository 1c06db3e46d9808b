#include "blockcm/scattering.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "blockcm/errors.hpp"

namespace blockcm {

namespace {

constexpr double kAngleSlack = 1e-12;

void check_block_index(int l, const NetworkShape& shape, const char* what) {
  if (l < 1 || l > shape.blocks) {
    throw DomainError(std::string(what) + ": block index " +
                      std::to_string(l) + " outside [1, " +
                      std::to_string(shape.blocks) + "]");
  }
}

// Left-multiplies rows a and b of m by [[r, t], [-t, r]], touching only the
// leading `ncols` columns (the rest are zero in both rows).
void rotate_rows(RealMatrix& m, int a, int b, double r, double t, int ncols) {
  auto row_a = m.row(a).head(ncols);
  auto row_b = m.row(b).head(ncols);
  for (int k = 0; k < ncols; ++k) {
    const double x = row_a[k];
    const double y = row_b[k];
    row_a[k] = r * x + t * y;
    row_b[k] = -t * x + r * y;
  }
}

// Applies the collisions up to and including block `upto` to `m`, which must
// start as the identity. Calls `snapshot(l, m)` after each block.
template <class Snapshot>
void evolve_network(RealMatrix& m, const NetworkShape& shape, double theta1,
                    double theta2, Strategy strategy, int upto,
                    Snapshot&& snapshot) {
  const BeamSplitter bs1 = BeamSplitter::from_angle(theta1);
  const BeamSplitter bs2 = BeamSplitter::from_angle(theta2);
  const int lb = shape.block_size;
  for (int l = 1; l <= upto; ++l) {
    const int ncols = lb * l + 1;
    if (l >= 2) {
      for (int j = 1; j <= lb; ++j) {
        rotate_rows(m, shape.mode_index(l - 1, j), shape.mode_index(l, j),
                    bs2.r, bs2.t, ncols);
      }
    }
    const bool ascending = collision_order(strategy, l) == Order::Ascending;
    for (int step = 0; step < lb; ++step) {
      const int j = ascending ? step + 1 : lb - step;
      rotate_rows(m, 0, shape.mode_index(l, j), bs1.r, bs1.t, ncols);
    }
    snapshot(l, m);
  }
}

}  // namespace

BeamSplitter BeamSplitter::from_angle(double theta) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (!(theta >= -kAngleSlack && theta <= half_pi + kAngleSlack)) {
    throw DomainError("beam splitter angle " + std::to_string(theta) +
                      " outside [0, pi/2]");
  }
  // Exact endpoints keep r = 1, t = 0 at pi/2 instead of t = 6e-17.
  if (theta <= 0.0) return {0.0, 0.0, 1.0};
  if (theta >= half_pi) return {half_pi, 1.0, 0.0};
  return {theta, std::sin(theta), std::cos(theta)};
}

Strategy strategy_from_int(int tag) {
  switch (tag) {
    case 1:
      return Strategy::Sequential;
    case 2:
      return Strategy::Alternating;
    default:
      throw DomainError("strategy must be 1 or 2, got " + std::to_string(tag));
  }
}

int strategy_tag(Strategy s) noexcept { return static_cast<int>(s); }

std::string_view strategy_name(Strategy s) noexcept {
  return s == Strategy::Sequential ? "sequential" : "alternating";
}

void NetworkShape::validate() const {
  if (blocks < 1) {
    throw DomainError("number of blocks L must be >= 1, got " +
                      std::to_string(blocks));
  }
  if (block_size < 1) {
    throw DomainError("block size L_B must be >= 1, got " +
                      std::to_string(block_size));
  }
}

Eigen::Matrix2d bs_matrix(double theta) {
  const BeamSplitter bs = BeamSplitter::from_angle(theta);
  Eigen::Matrix2d m;
  m << bs.r, bs.t, -bs.t, bs.r;
  return m;
}

RealMatrix embed_system_env(int l, int j, const NetworkShape& shape,
                            double theta1) {
  shape.validate();
  check_block_index(l, shape, "embed_system_env");
  if (j < 1 || j > shape.block_size) {
    throw DomainError("embed_system_env: particle index " + std::to_string(j) +
                      " outside [1, " + std::to_string(shape.block_size) + "]");
  }
  const BeamSplitter bs = BeamSplitter::from_angle(theta1);
  const int k = shape.mode_index(l, j);
  RealMatrix m = RealMatrix::Identity(shape.dim(), shape.dim());
  m(0, 0) = bs.r;
  m(0, k) = bs.t;
  m(k, 0) = -bs.t;
  m(k, k) = bs.r;
  return m;
}

RealMatrix block_collision_matrix(int l, const NetworkShape& shape,
                                  double theta2) {
  shape.validate();
  if (l < 1 || l > shape.blocks - 1) {
    throw DomainError("block_collision_matrix: block " + std::to_string(l) +
                      " has no successor (L = " + std::to_string(shape.blocks) +
                      ")");
  }
  const BeamSplitter bs = BeamSplitter::from_angle(theta2);
  RealMatrix m = RealMatrix::Identity(shape.dim(), shape.dim());
  for (int j = 1; j <= shape.block_size; ++j) {
    const int a = shape.mode_index(l, j);
    const int b = shape.mode_index(l + 1, j);
    m(a, a) = bs.r;
    m(a, b) = bs.t;
    m(b, a) = -bs.t;
    m(b, b) = bs.r;
  }
  return m;
}

RealMatrix system_block_matrix(int l, const NetworkShape& shape, double theta1,
                               Order order) {
  shape.validate();
  check_block_index(l, shape, "system_block_matrix");
  RealMatrix product = RealMatrix::Identity(shape.dim(), shape.dim());
  for (int step = 0; step < shape.block_size; ++step) {
    const int j =
        order == Order::Ascending ? step + 1 : shape.block_size - step;
    product = embed_system_env(l, j, shape, theta1) * product;
  }
  return product;
}

Order collision_order(Strategy strategy, int l) noexcept {
  if (strategy == Strategy::Alternating && l % 2 == 0) return Order::Descending;
  return Order::Ascending;
}

ScatteringMatrix::ScatteringMatrix(NetworkShape shape, RealMatrix full,
                                   RealMatrix prefix_rows)
    : shape_(shape), full_(std::move(full)), prefix_rows_(std::move(prefix_rows)) {}

std::span<const double> ScatteringMatrix::prefix_row(int l) const {
  check_block_index(l, shape_, "prefix_row");
  return {prefix_rows_.row(l - 1).data(),
          static_cast<std::size_t>(prefix_rows_.cols())};
}

ScatteringMatrix build_scattering(const NetworkShape& shape, double theta1,
                                  double theta2, Strategy strategy) {
  shape.validate();
  const int dim = shape.dim();
  RealMatrix m = RealMatrix::Identity(dim, dim);
  RealMatrix rows = RealMatrix::Zero(shape.blocks, dim);
  evolve_network(m, shape, theta1, theta2, strategy, shape.blocks,
                 [&](int l, const RealMatrix& s) { rows.row(l - 1) = s.row(0); });
  return ScatteringMatrix(shape, std::move(m), std::move(rows));
}

RealMatrix prefix_matrix(const NetworkShape& shape, double theta1,
                         double theta2, Strategy strategy, int l) {
  shape.validate();
  check_block_index(l, shape, "prefix_matrix");
  RealMatrix m = RealMatrix::Identity(shape.dim(), shape.dim());
  evolve_network(m, shape, theta1, theta2, strategy, l,
                 [](int, const RealMatrix&) {});
  return m;
}

}  // namespace blockcm
