#include "overloadx/diffusion.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace overloadx {

const char* to_string(PsiConvention c) {
  return c == PsiConvention::printed_sum ? "printed_sum" : "sec10_difference";
}

PsiConvention parse_psi_convention(std::string_view text) {
  if (text == "printed_sum" || text == "printed-sum") return PsiConvention::printed_sum;
  if (text == "sec10_difference" || text == "paper-sec10") return PsiConvention::sec10_difference;
  throw std::invalid_argument("unknown psi convention \"" + std::string(text) +
                              "\" (expected printed_sum or paper-sec10)");
}

double psi(const ModelParams& p, const FluidState& x, PsiConvention c) {
  const double own = p.mu22() * (p.m[1] - x.z12);
  const double shared = p.mu12() * x.z12;
  return c == PsiConvention::printed_sum ? own + shared : own - shared;
}

namespace {

struct Split {
  double p1;
  double p2;
};

Split queue_split(const ModelParams& p) {
  const double r = p.r12.value();
  return {r / (1.0 + r), 1.0 / (1.0 + r)};
}

class Sigma2Along {
 public:
  Sigma2Along(const ModelParams& p, const DiffusionOptions& o) : p_(p), o_(o) {}

  double operator()(const FluidState& x, FluidRegime regime) {
    if (regime != FluidRegime::manifold) return 0.0;
    if (!cached_ || max_norm_distance(x, x_) > o_.sigma2_cache_tol) {
      const auto model = ftsp_rates(p_, x);
      value_ = is_positive_recurrent(model) ? asymptotic_variance(model, o_.method, o_.mc) : 0.0;
      x_ = x;
      cached_ = true;
    }
    return value_;
  }

 private:
  const ModelParams& p_;
  const DiffusionOptions& o_;
  bool cached_ = false;
  FluidState x_;
  double value_ = 0.0;
};

struct Rates {
  double gamma1, phi12, phi22, gamma12, gamma22, gamma2, gamma3;
};

Rates rates_at(const ModelParams& p, const FluidState& x, double pi, double sigma2, double ps) {
  const auto [p1, p2] = queue_split(p);
  const double z22 = p.m[1] - x.z12;
  return {
      p.lambda[0] + p.lambda[1] + p.m[0] * p.mu11() +
          (p1 * p.theta[0] + p2 * p.theta[1]) * (x.q1 + x.q2),
      p.mu12() * (1.0 - pi) * x.z12,
      p.mu22() * pi * z22,
      p.mu12() * pi * x.z12,
      p.mu22() * (1.0 - pi) * z22,
      ps * ps * sigma2,
      sigma2,
  };
}

void require_pi(const FluidPath& path) {
  if (path.pi.size() != path.size() || path.regime.size() != path.size() || path.size() == 0) {
    throw std::invalid_argument("fluid path lacks per-step routing shares");
  }
}

}  // namespace

TimeChanges time_changes(const ModelParams& p, const FluidPath& path,
                         const DiffusionOptions& options) {
  require_pi(path);
  Sigma2Along sigma2(p, options);
  TimeChanges out;
  out.method = options.method;
  out.psi_convention = options.psi_convention;
  const std::size_t n = path.size();
  out.t = path.t;
  for (auto* v : {&out.gamma1, &out.phi12, &out.phi22, &out.gamma12, &out.gamma22, &out.gamma2,
                  &out.gamma3, &out.psi, &out.sigma2}) {
    v->assign(n, 0.0);
  }
  Rates prev{};
  for (std::size_t i = 0; i < n; ++i) {
    const double s2 = sigma2(path.x[i], path.regime[i]);
    const double ps = psi(p, path.x[i], options.psi_convention);
    out.psi[i] = ps;
    out.sigma2[i] = s2;
    const Rates cur = rates_at(p, path.x[i], path.pi[i], s2, ps);
    if (i > 0) {
      const double h2 = (path.t[i] - path.t[i - 1]) / 2.0;
      out.gamma1[i] = out.gamma1[i - 1] + h2 * (prev.gamma1 + cur.gamma1);
      out.phi12[i] = out.phi12[i - 1] + h2 * (prev.phi12 + cur.phi12);
      out.phi22[i] = out.phi22[i - 1] + h2 * (prev.phi22 + cur.phi22);
      out.gamma12[i] = out.gamma12[i - 1] + h2 * (prev.gamma12 + cur.gamma12);
      out.gamma22[i] = out.gamma22[i - 1] + h2 * (prev.gamma22 + cur.gamma22);
      out.gamma2[i] = out.gamma2[i - 1] + h2 * (prev.gamma2 + cur.gamma2);
      out.gamma3[i] = out.gamma3[i - 1] + h2 * (prev.gamma3 + cur.gamma3);
    }
    prev = cur;
  }
  return out;
}

BouModel bou_matrices(const ModelParams& p, const DiffusionOptions& options) {
  BouModel b;
  b.xstar = stationary_point(p);
  const double z = b.xstar.z12s;
  const double m2 = p.m[1];
  if (!(z > 0.0 && z < m2)) {
    throw std::domain_error("BOU limit needs an interior stationary point, have z* = " +
                            std::to_string(z));
  }
  b.method = options.method;
  b.psi_convention = options.psi_convention;
  const auto [p1, p2] = queue_split(p);
  b.p1 = p1;
  b.p2 = p2;
  const double pi = b.xstar.piStar;
  const double capacity = p.mu12() * z + p.mu22() * (m2 - z);
  b.psi = psi(p, b.xstar.state(), options.psi_convention);
  b.sigma2 = asymptotic_variance(p, b.xstar.state(), options.method, options.mc);

  XiConstants& xi = b.xi;
  xi.xi1 = 2.0 * (p.lambda[0] + p.lambda[1]) - capacity;
  xi.xi12 = p.mu12() * pi * z;
  xi.xi22 = p.mu22() * (1.0 - pi) * (m2 - z);
  xi.eta12 = p.mu12() * (1.0 - pi) * z;
  xi.eta22 = p.mu22() * pi * (m2 - z);
  xi.xi2 = b.psi * b.psi * b.sigma2;
  xi.xi3 = b.sigma2;
  xi.xi4 = 2.0 * p.mu12() * p.mu22() * z * (m2 - z) / capacity;

  const double m11 = -(p1 * p.theta[0] + p2 * p.theta[1]);
  const double m12 = p.mu22() - p.mu12();
  const double m22 = -p.mu12() * p.mu22() * m2 * z / capacity;
  b.M << m11, m12, 0.0, m22;
  xi.xi5 = m12 / std::abs(m11 + m22);

  const double s11 = std::sqrt(xi.xi1 + xi.xi12 + xi.xi22 + xi.eta12 + xi.eta22);
  const double s22 = std::sqrt(xi.xi2 + xi.xi4);
  b.S << s11, 0.0, 0.0, s22;
  b.V = b.S * b.S.transpose();
  b.A_sde << m11, m12, 0.0, -(m12 * pi + p.mu12());
  return b;
}

Eigen::Matrix2d SteadyStateCov::matrix() const {
  Eigen::Matrix2d m;
  m << varQs, covQZ, covQZ, varZ;
  return m;
}

SteadyStateCov steady_state_covariance(const BouModel& model) {
  const double m11 = model.M(0, 0);
  const double m12 = model.M(0, 1);
  const double m22 = model.M(1, 1);
  if (!(m11 < 0.0 && m22 < 0.0) || model.M(1, 0) != 0.0) {
    throw std::domain_error("steady-state covariance needs M11 < 0, M22 < 0 and M21 = 0");
  }
  SteadyStateCov c;
  c.Z1 = model.xi.xi4 / (2.0 * std::abs(m22));
  c.Z2 = model.xi.xi2 / (2.0 * std::abs(m22));
  c.varZ = c.Z1 + c.Z2;
  c.covQZ = model.xi.xi5 * c.varZ;
  c.Q1 = model.V(0, 0) / (2.0 * std::abs(m11));
  c.Q2 = m12 * c.covQZ / std::abs(m11);
  c.varQs = c.Q1 + c.Q2;
  c.std_qs = std::sqrt(c.varQs);
  c.std_q1 = model.p1 * c.std_qs;
  c.std_q2 = model.p2 * c.std_qs;
  return c;
}

Eigen::Matrix2d solve_lyapunov(const Eigen::Matrix2d& M, const Eigen::Matrix2d& V) {
  const Eigen::Vector2cd ev = M.eigenvalues();
  if (!(ev.real().maxCoeff() < 0.0)) {
    throw std::domain_error("Lyapunov equation needs a stable drift matrix");
  }
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  Eigen::Matrix4d k;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      // Column-major vec: vec(M S) = (I kron M) vec S, vec(S M^T) = (M kron I) vec S.
      k.block<2, 2>(2 * i, 2 * j) = id(i, j) * M + M(i, j) * id;
    }
  }
  const Eigen::Vector4d rhs = -Eigen::Map<const Eigen::Vector4d>(V.data());
  Eigen::FullPivLU<Eigen::Matrix4d> lu(k);
  if (!lu.isInvertible()) throw std::runtime_error("Lyapunov system is singular");
  Eigen::Vector4d s = lu.solve(rhs);
  Eigen::Matrix2d sigma = Eigen::Map<Eigen::Matrix2d>(s.data());
  return (sigma + sigma.transpose()) / 2.0;
}

LinearNoise linear_noise(const ModelParams& p, const FluidState& x, double pi, double sigma2,
                         PsiConvention c) {
  const auto [p1, p2] = queue_split(p);
  const Rates r = rates_at(p, x, pi, sigma2, psi(p, x, c));
  LinearNoise out;
  const double m12 = p.mu22() - p.mu12();
  out.A << -(p1 * p.theta[0] + p2 * p.theta[1]), m12, 0.0, -(m12 * pi + p.mu12());
  // L12 enters both equations negatively; L22 enters q_s negatively and z12 positively.
  const double cross = r.phi12 - r.phi22;
  out.V << r.gamma1 + r.gamma12 + r.gamma22 + r.phi12 + r.phi22, cross, cross,
      r.phi12 + r.phi22 + r.gamma2;
  return out;
}

TransientCovariance transient_covariance(const ModelParams& p, const FluidPath& path,
                                         const Eigen::Matrix2d& sigma0, double T,
                                         const DiffusionOptions& options) {
  require_pi(path);
  if ((sigma0 - sigma0.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(sigma0).eigenvalues().minCoeff() < -1e-12) {
    throw std::invalid_argument("initial covariance must be symmetric positive semidefinite");
  }
  if (T > path.t.back() + 1e-12 || T < 0.0) {
    throw std::invalid_argument("covariance horizon exceeds the fluid path");
  }
  Sigma2Along sigma2(p, options);
  std::vector<LinearNoise> grid;
  const auto steps = static_cast<std::size_t>(std::llround(T / path.h));
  grid.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    grid.push_back(linear_noise(p, path.x[i], path.pi[i], sigma2(path.x[i], path.regime[i]),
                                options.psi_convention));
  }
  auto rhs = [](const LinearNoise& ln, const Eigen::Matrix2d& s) -> Eigen::Matrix2d {
    return ln.A * s + s * ln.A.transpose() + ln.V;
  };

  TransientCovariance out;
  out.t.reserve(steps + 1);
  out.sigma.reserve(steps + 1);
  Eigen::Matrix2d s = sigma0;
  const double h = path.h;
  for (std::size_t i = 0;; ++i) {
    out.t.push_back(path.t[i]);
    out.sigma.push_back(s);
    if (i == steps) break;
    const LinearNoise mid{(grid[i].A + grid[i + 1].A) / 2.0, (grid[i].V + grid[i + 1].V) / 2.0};
    const Eigen::Matrix2d k1 = rhs(grid[i], s);
    const Eigen::Matrix2d k2 = rhs(mid, s + h / 2 * k1);
    const Eigen::Matrix2d k3 = rhs(mid, s + h / 2 * k2);
    const Eigen::Matrix2d k4 = rhs(grid[i + 1], s + h * k3);
    s += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    s = (s + s.transpose()) / 2.0;
  }
  return out;
}

OuParams pool_dependent_reduction(const ModelParams& p, const FluidPath& path,
                                  const DiffusionOptions& options) {
  if (p.mu12() != p.mu22()) {
    throw std::invalid_argument("pool-dependent reduction needs mu12 = mu22");
  }
  require_pi(path);
  const auto [p1, p2] = queue_split(p);
  OuParams o;
  o.nu = p.mu22();
  o.eta1 = p.lambda[0] + p.lambda[1] - p.m[0] * p.mu11() - p.m[1] * o.nu;
  o.eta2 = p1 * p.theta[0] + p2 * p.theta[1];
  const TimeChanges tc = time_changes(p, path, options);
  const double qs0 = path.x.front().q1 + path.x.front().q2;
  const double total = p.lambda[0] + p.lambda[1];
  o.t = path.t;
  o.gamma1.resize(path.size());
  o.gamma2.resize(path.size());
  double occupancy = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double t = path.t[i];
    // The abandonment term integrates q_s(u) = eta1/eta2 + (q_s(0) - eta1/eta2) e^{-eta2 u}.
    o.gamma1[i] = 2.0 * total * t + (qs0 - o.eta1 / o.eta2) * (1.0 - std::exp(-o.eta2 * t));
    const double pi = path.pi[i];
    const double z = path.x[i].z12;
    const double rate = o.nu * (p.m[1] * pi + z - 2.0 * pi * z);
    if (i > 0) {
      const double zp = path.x[i - 1].z12;
      const double pp = path.pi[i - 1];
      const double prev = o.nu * (p.m[1] * pp + zp - 2.0 * pp * zp);
      occupancy += (t - path.t[i - 1]) / 2.0 * (prev + rate);
    }
    o.gamma2[i] = occupancy + tc.gamma2[i];
  }
  return o;
}

GaussianApprox gaussian_queue_approx(const ScaledSystem& sys, const DiffusionOptions& options) {
  const ModelParams eff = sys.effective_params();
  const BouModel bou = bou_matrices(eff, options);
  if (!bou.xstar.inA) throw std::domain_error("stationary point outside the recurrence set");
  const SteadyStateCov cov = steady_state_covariance(bou);
  const StationaryPoint fluid = stationary_point(sys.parent);
  const double n = sys.n;
  const double root = std::sqrt(n);
  GaussianApprox g;
  g.n = sys.n;
  g.mean_q1 = n * bou.xstar.q1s;
  g.mean_q2 = n * bou.xstar.q2s;
  g.mean_z12 = n * bou.xstar.z12s;
  g.mean_q1_scaled = fluid.q1s;
  g.mean_q2_scaled = fluid.q2s;
  g.std_hat_qs = cov.std_qs;
  g.std_hat_q1 = cov.std_q1;
  g.std_hat_q2 = cov.std_q2;
  g.std_qs = root * cov.std_qs;
  g.std_q1 = root * cov.std_q1;
  g.std_q2 = root * cov.std_q2;
  g.std_z12 = root * std::sqrt(cov.varZ);
  return g;
}

GaussianApprox gaussian_queue_approx(const ModelParams& p, int n,
                                     const DiffusionOptions& options) {
  return gaussian_queue_approx(scale(p, n), options);
}

}  // namespace overloadx
