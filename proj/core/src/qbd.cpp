#include "overloadx/qbd.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace overloadx::qbd {

namespace {

Blocks fold(const std::vector<LatticeJump>& jumps, int b) {
  Blocks out{Eigen::MatrixXd::Zero(b, b), Eigen::MatrixXd::Zero(b, b),
             Eigen::MatrixXd::Zero(b, b)};
  for (int p = 0; p < b; ++p) {
    double total = 0.0;
    for (const auto& j : jumps) {
      const int t = p + j.step;
      const int offset = t >= 0 ? t / b : -((-t + b - 1) / b);
      const int q = t - offset * b;
      Eigen::MatrixXd& target = offset > 0 ? out.up : (offset < 0 ? out.down : out.local);
      target(p, q) += j.rate;
      total += j.rate;
    }
    out.local(p, p) -= total;
  }
  return out;
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.size() == 1) return std::abs(m(0, 0));
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

LevelStructure level_structure(const FtspModel& model) {
  LevelStructure out;
  out.block = model.block_size();
  out.positive = fold(model.jumps(true), out.block);
  out.nonpositive = fold(model.jumps(false), out.block);
  return out;
}

RateMatrix solve_rate_matrix(const Blocks& blocks, double tol, int max_iterations) {
  const auto n = blocks.local.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const auto neg_local = (-blocks.local).partialPivLu();
  Eigen::MatrixXd h = neg_local.solve(blocks.up);
  Eigen::MatrixXd l = neg_local.solve(blocks.down);
  Eigen::MatrixXd g = l;
  Eigen::MatrixXd t = h;

  RateMatrix out;
  for (int it = 1; it <= max_iterations; ++it) {
    out.iterations = it;
    const Eigen::MatrixXd u = h * l + l * h;
    const auto step = (id - u).partialPivLu();
    const Eigen::MatrixXd h2 = step.solve(h * h);
    const Eigen::MatrixXd l2 = step.solve(l * l);
    h = h2;
    l = l2;
    const Eigen::MatrixXd inc = t * l;
    g += inc;
    t = t * h;
    if ((ones - g * ones).cwiseAbs().maxCoeff() < tol) break;
    if (inc.cwiseAbs().maxCoeff() < tol && t.cwiseAbs().maxCoeff() < tol) break;
  }
  out.G = g;
  out.R = blocks.up * (-(blocks.local + blocks.up * g)).inverse();
  out.spectral_radius = spectral_radius(out.R);
  return out;
}

Stationary solve_stationary(const FtspModel& model) {
  const LevelStructure ls = level_structure(model);
  const int b = ls.block;
  const Blocks& pos = ls.positive;
  const Blocks& neg = ls.nonpositive;

  Stationary out;
  out.plus = solve_rate_matrix(pos);
  out.minus = solve_rate_matrix(Blocks{neg.down, neg.local, neg.up});
  constexpr double kStable = 1.0 - 1e-9;
  out.positive_side_stable = out.plus.spectral_radius < kStable;
  out.negative_side_stable = out.minus.spectral_radius < kStable;
  if (!out.positive_side_stable || !out.negative_side_stable) {
    out.pi12 = out.positive_side_stable ? 0.0 : 1.0;
    return out;
  }

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(b, b);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(b);
  const Eigen::VectorXd sum_plus = (id - out.plus.R).partialPivLu().solve(ones);
  const Eigen::VectorXd sum_minus = (id - out.minus.R).partialPivLu().solve(ones);

  Eigen::MatrixXd sys(2 * b, 2 * b);
  sys.topLeftCorner(b, b) = pos.local + out.plus.R * pos.down;
  sys.topRightCorner(b, b) = pos.down;
  sys.bottomLeftCorner(b, b) = neg.up;
  sys.bottomRightCorner(b, b) = neg.local + out.minus.R * neg.up;
  sys.col(2 * b - 1) << sum_plus, sum_minus;

  Eigen::RowVectorXd rhs = Eigen::RowVectorXd::Zero(2 * b);
  rhs(2 * b - 1) = 1.0;
  const Eigen::VectorXd x = sys.transpose().partialPivLu().solve(rhs.transpose());
  out.level0 = x.head(b).transpose();
  out.level_minus1 = x.tail(b).transpose();
  out.pi12 = out.level0.dot(sum_plus);
  return out;
}

}  // namespace overloadx::qbd
