#pragma once

#include <Eigen/Dense>

#include "overloadx/ftsp.hpp"

namespace overloadx::qbd {

/// Generator blocks of a level-independent QBD: transitions one level up,
/// within the level (diagonal included) and one level down.
struct Blocks {
  Eigen::MatrixXd up;
  Eigen::MatrixXd local;
  Eigen::MatrixXd down;
};

/// The lattice walk folded into levels of width b = max(j, k): lattice state
/// s = level * b + phase + 1, so levels >= 0 are exactly the positive region.
struct LevelStructure {
  int block = 1;
  Blocks positive;
  Blocks nonpositive;
};

LevelStructure level_structure(const FtspModel& model);

struct RateMatrix {
  Eigen::MatrixXd G;  ///< first-passage matrix one level down
  Eigen::MatrixXd R;  ///< minimal solution of up + R local + R^2 down = 0
  double spectral_radius = 0.0;
  int iterations = 0;
};

/// Logarithmic reduction for G, then R = up (-(local + up G))^{-1}.
RateMatrix solve_rate_matrix(const Blocks& blocks, double tol = 1e-15, int max_iterations = 200);

struct Stationary {
  bool positive_side_stable = false;
  bool negative_side_stable = false;
  double pi12 = 0.0;
  Eigen::RowVectorXd level0;       ///< stationary vector of level 0 (s = 1..b)
  Eigen::RowVectorXd level_minus1; ///< stationary vector of level -1 (s = 1-b..0)
  RateMatrix plus;
  RateMatrix minus;
};

/// Two-sided matrix-geometric solution. When one side is not stable the
/// mass escapes there and pi12 is 0 or 1 accordingly.
Stationary solve_stationary(const FtspModel& model);

}  // namespace overloadx::qbd
