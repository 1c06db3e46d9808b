#pragma once

#include <span>
#include <string_view>

#include <Eigen/Dense>

namespace blockcm {

using RealMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Lossless beam splitter with reflectivity r = sin(theta) and
/// transmissivity t = cos(theta). The reflected mode is the output mode.
struct BeamSplitter {
  double theta = 0.0;
  double r = 0.0;
  double t = 1.0;

  /// Throws DomainError unless 0 <= theta <= pi/2.
  static BeamSplitter from_angle(double theta);
};

/// Order in which the system meets the particles of one block.
/// Sequential: ascending j in every block (first in, first out).
/// Alternating: ascending j for odd l, descending j for even l
/// (first in, last out).
enum class Strategy { Sequential = 1, Alternating = 2 };

enum class Order { Ascending, Descending };

Strategy strategy_from_int(int tag);
int strategy_tag(Strategy s) noexcept;
std::string_view strategy_name(Strategy s) noexcept;

struct NetworkShape {
  int blocks = 1;      // L
  int block_size = 1;  // L_B

  int dim() const noexcept { return block_size * blocks + 1; }

  /// Zero-based matrix index of environment mode (l, j), both one-based.
  /// Mode (l, j) sits at one-based position (l-1)*L_B + j + 1.
  int mode_index(int l, int j) const noexcept {
    return (l - 1) * block_size + j;
  }

  void validate() const;
};

/// 2x2 beam-splitter matrix [[r, t], [-t, r]].
Eigen::Matrix2d bs_matrix(double theta);

/// S_{l,j}: system mode mixed with environment mode (l, j) at BS1.
RealMatrix embed_system_env(int l, int j, const NetworkShape& shape,
                            double theta1);

/// S_{B_l B_{l+1}}: pairwise mixing of block l with block l+1 at BS2.
RealMatrix block_collision_matrix(int l, const NetworkShape& shape,
                                  double theta2);

/// Product of S_{l,j} over j. Ascending applies S_{l,1} first, i.e. it is
/// the rightmost factor when acting on column mode vectors from the left.
RealMatrix system_block_matrix(int l, const NetworkShape& shape,
                               double theta1, Order order);

/// Which order the system uses for block l under a strategy.
Order collision_order(Strategy strategy, int l) noexcept;

/// Orthogonal scattering matrix of the whole network together with the
/// first rows c(l) of every prefix S(l), l = 1..L.
///
/// S(1) = S~_{SB_1}, S(l) = S~_{SB_l} * S_{B_{l-1} B_l} * S(l-1).
class ScatteringMatrix {
 public:
  ScatteringMatrix(NetworkShape shape, RealMatrix full, RealMatrix prefix_rows);

  const NetworkShape& shape() const noexcept { return shape_; }
  int dim() const noexcept { return shape_.dim(); }
  int blocks() const noexcept { return shape_.blocks; }

  /// S(L).
  const RealMatrix& matrix() const noexcept { return full_; }

  /// First row of S(l) for 1 <= l <= L.
  std::span<const double> prefix_row(int l) const;

  /// c_{1,1}(l).
  double c11(int l) const { return prefix_row(l)[0]; }

 private:
  NetworkShape shape_;
  RealMatrix full_;
  RealMatrix prefix_rows_;  // row l-1 holds c(l)
};

ScatteringMatrix build_scattering(const NetworkShape& shape, double theta1,
                                  double theta2, Strategy strategy);

/// Full prefix matrix S(l) of a network with the given shape.
RealMatrix prefix_matrix(const NetworkShape& shape, double theta1,
                         double theta2, Strategy strategy, int l);

}  // namespace blockcm
