#include "overloadx/ftsp.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "overloadx/qbd.hpp"
#include "overloadx/stats.hpp"

namespace overloadx {

bool in_state_space(const ModelParams& p, const FluidState& x) {
  return std::isfinite(x.q1) && std::isfinite(x.q2) && std::isfinite(x.z12) && x.q1 >= 0.0 &&
         x.q2 >= 0.0 && x.z12 >= 0.0 && x.z12 <= p.m[1];
}

void require_state_space(const ModelParams& p, const FluidState& x) {
  if (!in_state_space(p, x)) {
    throw std::invalid_argument("fluid state (" + std::to_string(x.q1) + ", " +
                                std::to_string(x.q2) + ", " + std::to_string(x.z12) +
                                ") is outside [0,inf)^2 x [0,m2]");
  }
}

double total_event_rate(const ModelParams& p, const FluidState& x) {
  return p.lambda[0] + p.lambda[1] + p.theta[0] * x.q1 + p.theta[1] * x.q2 + p.mu11() * p.m[0] +
         p.mu12() * x.z12 + p.mu22() * (p.m[1] - x.z12);
}

int FtspModel::block_size() const { return std::max(class1_step(), class2_step()); }

FtspRates FtspModel::birth_death() const {
  if (!is_birth_death()) {
    throw std::logic_error("birth-death rates exist only for r = 1, have r = " + r.to_string());
  }
  return FtspRates{
      .lam1 = positive.class1_up + positive.class2_down,
      .mu1 = positive.class1_down + positive.class2_up,
      .lam2 = nonpositive.class1_down + nonpositive.class2_up,
      .mu2 = nonpositive.class1_up + nonpositive.class2_down,
  };
}

std::vector<LatticeJump> FtspModel::jumps(bool positive_regime) const {
  const RegimeRates& g = positive_regime ? positive : nonpositive;
  const int k = class1_step();
  const int j = class2_step();
  return {{+k, g.class1_up}, {-k, g.class1_down}, {-j, g.class2_up}, {+j, g.class2_down}};
}

// Each transition of the SSC representation, classified by its effect on
// D = Q1 - k - r Q2 and divided by n. Pool 1 is saturated with class 1;
// a freed pool-2 agent takes class 1 iff D > 0.
FtspModel ftsp_rates(const ModelParams& p, const FluidState& x) {
  require_state_space(p, x);
  const double pool2_completions = p.mu12() * x.z12 + p.mu22() * (p.m[1] - x.z12);
  const double own1 = p.theta[0] * x.q1 + p.mu11() * p.m[0];
  FtspModel model;
  model.r = p.r12;
  model.positive = RegimeRates{
      .class1_up = p.lambda[0],
      .class1_down = own1 + pool2_completions,
      .class2_up = p.lambda[1],
      .class2_down = p.theta[1] * x.q2,
  };
  model.nonpositive = RegimeRates{
      .class1_up = p.lambda[0],
      .class1_down = own1,
      .class2_up = p.lambda[1],
      .class2_down = p.theta[1] * x.q2 + pool2_completions,
  };
  return model;
}

Drifts drift_rates(const FtspModel& model) {
  const double r = model.r.value();
  auto drift = [r](const RegimeRates& g) {
    return (g.class1_up - g.class1_down) + r * (g.class2_down - g.class2_up);
  };
  return {drift(model.positive), drift(model.nonpositive)};
}

bool is_positive_recurrent(const FtspModel& model) {
  const auto d = drift_rates(model);
  return d.plus < 0.0 && d.minus > 0.0;
}

bool is_positive_recurrent(const ModelParams& p, const FluidState& x) {
  return is_positive_recurrent(ftsp_rates(p, x));
}

BusyPeriodMoments busy_period_moments(double lam, double mu) {
  if (!(lam >= 0.0) || !(mu > 0.0) || !(lam < mu)) {
    throw std::domain_error("busy period needs 0 <= lam < mu, got lam=" + std::to_string(lam) +
                            " mu=" + std::to_string(mu));
  }
  const double mean_service = 1.0 / mu;
  const double rho = lam / mu;
  BusyPeriodMoments out;
  out.mean = mean_service / (1.0 - rho);
  out.second_moment = 2.0 * mean_service * mean_service / std::pow(1.0 - rho, 3);
  out.variance = out.second_moment - out.mean * out.mean;
  return out;
}

namespace {

// Drift away from the boundary on one side sends all mass there. Both
// sides cannot repel at once since delta_minus - delta_plus > 0.
double degenerate_pi(const Drifts& d) { return d.plus < 0.0 ? 0.0 : 1.0; }

double pi_birth_death(const FtspModel& model) {
  const auto d = drift_rates(model);
  if (!(d.plus < 0.0 && d.minus > 0.0)) return degenerate_pi(d);
  const auto bd = model.birth_death();
  const auto t1 = busy_period_moments(bd.lam1, bd.mu1);
  const auto t2 = busy_period_moments(bd.lam2, bd.mu2);
  return t1.mean / (t1.mean + t2.mean);
}

}  // namespace

double pi_12(const FtspModel& model, PiMethod method) {
  switch (method) {
    case PiMethod::automatic:
      return model.is_birth_death() ? pi_birth_death(model) : qbd::solve_stationary(model).pi12;
    case PiMethod::birth_death:
      return pi_birth_death(model);
    case PiMethod::matrix_geometric:
      return qbd::solve_stationary(model).pi12;
    case PiMethod::truncated: {
      const auto d = drift_rates(model);
      if (!(d.plus < 0.0 && d.minus > 0.0)) return degenerate_pi(d);
      return solve_truncated_converged(model).pi12;
    }
  }
  throw std::invalid_argument("unknown pi method");
}

double pi_12(const ModelParams& p, const FluidState& x, PiMethod method) {
  return pi_12(ftsp_rates(p, x), method);
}

double pi_12_stationary(const ModelParams& p, const FluidState& xstar) {
  if (!(xstar.z12 >= 0.0 && xstar.z12 <= p.m[1])) {
    throw std::invalid_argument("stationary z12 must lie in [0, m2]");
  }
  const double share1 = p.mu12() * xstar.z12;
  return share1 / (share1 + p.mu22() * (p.m[1] - xstar.z12));
}

std::string_view to_string(Sigma2Method method) {
  switch (method) {
    case Sigma2Method::paper_r1: return "paper_r1";
    case Sigma2Method::regenerative: return "regenerative";
    case Sigma2Method::poisson_numeric: return "poisson_numeric";
    case Sigma2Method::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

Sigma2Method parse_sigma2_method(std::string_view text) {
  for (auto m : {Sigma2Method::paper_r1, Sigma2Method::regenerative,
                 Sigma2Method::poisson_numeric, Sigma2Method::monte_carlo}) {
    if (text == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown sigma2 method \"" + std::string(text) +
                              "\" (expected paper_r1, regenerative, poisson_numeric, monte_carlo)");
}

TruncatedSolution solve_truncated(const FtspModel& model, int radius, bool solve_poisson) {
  if (radius < 1) throw std::invalid_argument("truncation radius must be >= 1");
  const int n = 2 * radius + 1;
  const int anchor = radius;  // lattice state 0
  const auto pos_jumps = model.jumps(true);
  const auto neg_jumps = model.jumps(false);

  // Generator entries (from, to, rate) with out-of-range jumps suppressed.
  std::vector<Eigen::Triplet<double>> gen;
  gen.reserve(static_cast<std::size_t>(n) * 5);
  for (int i = 0; i < n; ++i) {
    const int s = i - radius;
    const auto& js = s > 0 ? pos_jumps : neg_jumps;
    double out = 0.0;
    for (const auto& jump : js) {
      const int t = i + jump.step;
      if (t < 0 || t >= n || jump.rate == 0.0) continue;
      gen.emplace_back(i, t, jump.rate);
      out += jump.rate;
    }
    gen.emplace_back(i, i, -out);
  }

  // pi Q = 0 with pi(anchor) = 1 fixed and the anchor equation dropped; the
  // reduced system stays banded. Normalized afterwards.
  auto reduced = [anchor](int i) { return i < anchor ? i : i - 1; };
  std::vector<Eigen::Triplet<double>> balance;
  balance.reserve(gen.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n - 1);
  for (const auto& t : gen) {
    if (t.col() == anchor) continue;
    if (t.row() == anchor) {
      rhs(reduced(t.col())) -= t.value();
    } else {
      balance.emplace_back(reduced(t.col()), reduced(t.row()), t.value());
    }
  }
  Eigen::SparseMatrix<double> a(n - 1, n - 1);
  a.setFromTriplets(balance.begin(), balance.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw std::runtime_error("truncated balance equations singular");
  const Eigen::VectorXd rest = lu.solve(rhs);
  Eigen::VectorXd pi(n);
  for (int i = 0; i < n; ++i) pi(i) = i == anchor ? 1.0 : rest(reduced(i));
  pi /= pi.sum();

  TruncatedSolution out;
  out.radius = radius;
  out.stationary.assign(pi.data(), pi.data() + n);
  double positive = 0.0;
  for (int i = anchor + 1; i < n; ++i) positive += pi(i);
  out.pi12 = positive;
  out.boundary_mass = std::abs(pi(0)) + std::abs(pi(n - 1));

  if (solve_poisson) {
    // Q g = -(f - pi12) with g(0) = 0: drop the anchor unknown and equation.
    std::vector<Eigen::Triplet<double>> poisson;
    poisson.reserve(gen.size());
    for (const auto& t : gen) {
      if (t.row() == anchor || t.col() == anchor) continue;
      poisson.emplace_back(reduced(t.row()), reduced(t.col()), t.value());
    }
    Eigen::SparseMatrix<double> q(n - 1, n - 1);
    q.setFromTriplets(poisson.begin(), poisson.end());
    Eigen::VectorXd centered(n - 1);
    for (int i = 0; i < n; ++i) {
      if (i == anchor) continue;
      const double f = (i > anchor) ? 1.0 : 0.0;
      centered(reduced(i)) = -(f - positive);
    }
    Eigen::SparseLU<Eigen::SparseMatrix<double>> plu;
    plu.compute(q);
    if (plu.info() != Eigen::Success) throw std::runtime_error("Poisson equation singular");
    Eigen::VectorXd g = plu.solve(centered);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i == anchor) continue;
      const double f = (i > anchor) ? 1.0 : 0.0;
      acc += pi(i) * (f - positive) * g(reduced(i));
    }
    out.sigma2 = 2.0 * acc;
  }
  return out;
}

namespace {

// Radius at which the slower of the two geometric tails has decayed below
// 1e-16, from the diffusion approximation of each side: rate 2|drift| / var.
int tail_radius(const FtspModel& model) {
  double radius = 0.0;
  for (bool positive : {true, false}) {
    double drift = 0.0, second = 0.0;
    for (const auto& j : model.jumps(positive)) {
      drift += j.step * j.rate;
      second += static_cast<double>(j.step) * j.step * j.rate;
    }
    if (drift == 0.0) return std::numeric_limits<int>::max();
    radius = std::max(radius, 37.0 * second / (2.0 * std::abs(drift)));
  }
  return radius > 1e9 ? std::numeric_limits<int>::max() : static_cast<int>(radius);
}

}  // namespace

TruncatedSolution solve_truncated_converged(const FtspModel& model, double sigma2_tol,
                                            int max_radius) {
  int radius = 64 * model.block_size();
  const int tail = tail_radius(model);
  if (tail > max_radius) {
    throw std::runtime_error("truncated FTSP solve needs radius ~" + std::to_string(tail) +
                             " > " + std::to_string(max_radius) + " (near-null-recurrent state)");
  }
  while (2 * radius < tail) radius *= 2;
  TruncatedSolution prev = solve_truncated(model, radius, true);
  while (true) {
    radius *= 2;
    if (radius > max_radius) {
      throw std::runtime_error("truncated FTSP solve did not converge within radius " +
                               std::to_string(max_radius));
    }
    TruncatedSolution next = solve_truncated(model, radius, true);
    if (std::abs(next.sigma2 - prev.sigma2) < sigma2_tol * std::max(1.0, std::abs(next.sigma2)) &&
        std::abs(next.pi12 - prev.pi12) < 1e-12 && next.boundary_mass < 1e-12) {
      return next;
    }
    prev = std::move(next);
  }
}

FtspMcStats simulate_ftsp(const FtspModel& model, double horizon, std::uint64_t seed,
                          int time_batches) {
  if (!(horizon > 0.0)) throw std::invalid_argument("FTSP simulation horizon must be > 0");
  if (time_batches < 2) throw std::invalid_argument("need at least 2 time batches");

  struct Regime {
    double total;
    double cum[4];
    int step[4];
  };
  auto make = [&](bool pos) {
    Regime g{};
    const auto js = model.jumps(pos);
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
      acc += js[i].rate;
      g.cum[i] = acc;
      g.step[i] = js[i].step;
    }
    g.total = acc;
    return g;
  };
  const Regime pos = make(true);
  const Regime neg = make(false);

  Rng rng(seed);
  std::int64_t s = 0;
  double t = 0.0;
  double positive_time = 0.0;

  // Regeneration cycles: entries into lattice state 0.
  std::vector<double> cycle_len;
  std::vector<double> cycle_pos;
  double cycle_start = 0.0;
  double cycle_pos_acc = 0.0;

  const double batch_len = horizon / time_batches;
  std::vector<double> batch_pos(time_batches, 0.0);
  std::int64_t events = 0;

  auto add_positive = [&](double from, double to) {
    // Splits [from, to) across time batches.
    while (from < to) {
      const int b = std::min(time_batches - 1, static_cast<int>(from / batch_len));
      const double edge = std::min(to, (b + 1) * batch_len);
      batch_pos[b] += edge - from;
      from = edge;
    }
  };

  while (t < horizon) {
    const Regime& g = s > 0 ? pos : neg;
    const double dt = rng.exponential(g.total);
    const double end = std::min(t + dt, horizon);
    if (s > 0) {
      positive_time += end - t;
      cycle_pos_acc += end - t;
      add_positive(t, end);
    }
    t += dt;
    if (t >= horizon) break;
    const double u = rng.uniform() * g.total;
    int e = 0;
    while (e < 3 && u > g.cum[e]) ++e;
    s += g.step[e];
    ++events;
    if (s == 0) {
      cycle_len.push_back(t - cycle_start);
      cycle_pos.push_back(cycle_pos_acc);
      cycle_start = t;
      cycle_pos_acc = 0.0;
    }
  }

  FtspMcStats out;
  out.horizon = horizon;
  out.events = events;
  out.cycles = static_cast<std::int64_t>(cycle_len.size());
  out.time_fraction_positive = positive_time / horizon;

  if (out.cycles >= 40) {
    double sum_len = 0.0, sum_pos = 0.0;
    for (std::size_t c = 0; c < cycle_len.size(); ++c) {
      sum_len += cycle_len[c];
      sum_pos += cycle_pos[c];
    }
    const double pi_hat = sum_pos / sum_len;
    auto sigma2_over = [&](std::size_t lo, std::size_t hi) {
      double num = 0.0, den = 0.0;
      for (std::size_t c = lo; c < hi; ++c) {
        const double y = cycle_pos[c] - pi_hat * cycle_len[c];
        num += y * y;
        den += cycle_len[c];
      }
      return num / den;
    };
    out.sigma2 = sigma2_over(0, cycle_len.size());
    constexpr int kGroups = 20;
    std::vector<double> group(kGroups);
    const std::size_t per = cycle_len.size() / kGroups;
    for (int gi = 0; gi < kGroups; ++gi) {
      group[gi] = sigma2_over(gi * per, (gi + 1) * per);
    }
    out.sigma2_std_error = summarize_replications(group).stddev / std::sqrt(kGroups);
    out.fraction_std_error = std::sqrt(out.sigma2 / horizon);
  }

  double mean_b = 0.0;
  for (double v : batch_pos) mean_b += v;
  mean_b /= time_batches;
  double ss = 0.0;
  for (double v : batch_pos) ss += (v - mean_b) * (v - mean_b);
  out.sigma2_batch_means = ss / (time_batches - 1) / batch_len;
  return out;
}

FtspMcStats simulate_ftsp(const ModelParams& p, const FluidState& x, double horizon,
                          std::uint64_t seed) {
  return simulate_ftsp(ftsp_rates(p, x), horizon, seed);
}

double asymptotic_variance(const FtspModel& model, Sigma2Method method,
                           const MonteCarloSettings& mc) {
  if (!is_positive_recurrent(model)) {
    throw std::domain_error("asymptotic variance requires a positive recurrent FTSP");
  }
  switch (method) {
    case Sigma2Method::paper_r1:
    case Sigma2Method::regenerative: {
      const auto bd = model.birth_death();
      const auto t1 = busy_period_moments(bd.lam1, bd.mu1);
      const auto t2 = busy_period_moments(bd.lam2, bd.mu2);
      const double cycle = t1.mean + t2.mean;
      if (method == Sigma2Method::paper_r1) return t1.variance / cycle;
      const double pi = t1.mean / cycle;
      return ((1.0 - pi) * (1.0 - pi) * t1.variance + pi * pi * t2.variance) / cycle;
    }
    case Sigma2Method::poisson_numeric:
      return solve_truncated_converged(model).sigma2;
    case Sigma2Method::monte_carlo:
      return simulate_ftsp(model, mc.horizon, mc.seed).sigma2;
  }
  throw std::invalid_argument("unknown sigma2 method");
}

double asymptotic_variance(const ModelParams& p, const FluidState& x, Sigma2Method method,
                           const MonteCarloSettings& mc) {
  return asymptotic_variance(ftsp_rates(p, x), method, mc);
}

FtspSummary summarize_ftsp(const ModelParams& p, const FluidState& x, Sigma2Method method,
                           const MonteCarloSettings& mc) {
  FtspSummary out;
  out.state = x;
  out.model = ftsp_rates(p, x);
  const auto d = drift_rates(out.model);
  out.delta_plus = d.plus;
  out.delta_minus = d.minus;
  out.recurrent = d.plus < 0.0 && d.minus > 0.0;
  out.pi12 = pi_12(out.model);
  out.method = method;
  if (out.recurrent) {
    if (out.model.is_birth_death()) {
      const auto bd = out.model.birth_death();
      out.t1 = busy_period_moments(bd.lam1, bd.mu1);
      out.t2 = busy_period_moments(bd.lam2, bd.mu2);
    }
    out.sigma2 = asymptotic_variance(out.model, method, mc);
  }
  return out;
}

}  // namespace overloadx
