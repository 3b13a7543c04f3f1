// Acceptance suite: one PASS/FAIL line per criterion, each pinned at its
// stated tolerance and runtime budget. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "overloadx/config.hpp"
#include "overloadx/diffusion.hpp"
#include "overloadx/fluid.hpp"
#include "overloadx/ftsp.hpp"
#include "overloadx/report.hpp"
#include "overloadx/sim.hpp"
#include "support.hpp"

using namespace overloadx;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Checker {
 public:
  // Fails the criterion if |got - want| > tol and records the worst miss.
  void near(const char* name, double got, double want, double tol) {
    const double diff = std::abs(got - want);
    if (!(diff <= tol)) {
      pass_ = false;
      append(std::string(name) + "=" + fmt(got) + " (want " + fmt(want) + ")");
    }
  }
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      append(what);
    }
  }
  void note(const std::string& what) { append(what); }
  Outcome outcome() const { return {pass_, detail_}; }

  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
  }

 private:
  void append(const std::string& s) {
    if (!detail_.empty()) detail_ += "; ";
    detail_ += s;
  }
  bool pass_ = true;
  std::string detail_;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    o.pass = false;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("over runtime budget");
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %s (%.2fs / %.0fs)%s%s\n", o.pass ? "PASS" : "FAIL", id, title, secs,
              budget_s, o.detail.empty() ? "" : ": ", o.detail.c_str());
  std::fflush(stdout);
}

DiffusionOptions published_conventions() {
  DiffusionOptions o;
  o.method = Sigma2Method::paper_r1;
  o.psi_convention = PsiConvention::sec10_difference;
  return o;
}

Outcome stationary_point_check() {
  Checker c;
  const auto s = stationary_point(base_case());
  c.near("z*", s.z12s, 0.2111, 5e-4);
  c.near("q1*", s.q1s, 0.6556, 5e-4);
  c.near("q2*", s.q2s, 0.5556, 5e-4);
  c.near("pi*", s.piStar, 0.1763, 5e-4);
  c.near("pi12(x*)", pi_12(base_case(), s.state()), 0.1763, 5e-4);
  return c.outcome();
}

Outcome ftsp_check() {
  Checker c;
  const auto p = base_case();
  const auto x = stationary_point(p).state();
  const auto bd = ftsp_rates(p, x).birth_death();
  c.near("lam1", bd.lam1, 1.411, 5e-4);
  c.near("mu1", bd.mu1, 2.989, 5e-4);
  c.near("lam2", bd.lam2, 2.031, 5e-4);
  c.near("mu2", bd.mu2, 2.369, 5e-4);
  const auto t1 = busy_period_moments(bd.lam1, bd.mu1);
  const auto t2 = busy_period_moments(bd.lam2, bd.mu2);
  c.near("E[T1]", t1.mean, 0.6338, 5e-4);
  c.near("E[T2]", t2.mean, 2.9603, 5e-4);
  c.near("Var(T1)", t1.variance, 1.1201, 5e-4);
  c.near("pi", t1.mean / (t1.mean + t2.mean), 0.1763, 5e-4);
  c.near("pi(birth-death)", pi_12(p, x, PiMethod::birth_death), 0.1763, 5e-4);
  return c.outcome();
}

Outcome chain_check() {
  Checker c;
  const auto rows =
      arithmetic_chain(base_case(), Sigma2Method::paper_r1, PsiConvention::sec10_difference);
  const char* required[] = {"psi^2", "sigma2(x*)", "xi2",   "|M22|",       "Z2",
                            "varZ",  "covQZ",      "varQs", "std(qs_hat)", "std(qi_hat)"};
  for (const char* name : required) {
    bool found = false;
    for (const auto& r : rows) found = found || r.name == name;
    c.require(found, std::string("missing chain constant ") + name);
  }
  int passed = 0;
  for (const auto& r : rows) {
    if (r.pass) {
      ++passed;
    } else {
      c.require(false, r.name + "=" + Checker::fmt(r.computed) + " vs " +
                           Checker::fmt(r.expected) + " tol " + Checker::fmt(r.tolerance));
    }
  }
  c.note(std::to_string(passed) + "/" + std::to_string(rows.size()) + " constants");
  return c.outcome();
}

Outcome approximation_check() {
  struct Cell {
    int n;
    double eq1, eq2, std_qs, std_q1, std_q2;
  };
  const Cell table[] = {{25, 16.6, 13.6, 17.1, 8.5, 8.5},
                        {100, 65.6, 55.6, 34.1, 17.0, 17.0},
                        {400, 262.2, 222.2, 68.2, 34.0, 34.0}};
  Checker c;
  const auto o = published_conventions();
  for (const auto& t : table) {
    const auto g = gaussian_queue_approx(base_case(), t.n, o);
    // half a unit of the printed digit; std rows also carry sqrt(n) times the
    // rounding of the two-decimal diffusion-scale value they were built from
    const double half = 0.05;
    const double std_tol = half + std::sqrt(static_cast<double>(t.n)) * 0.005;
    const std::string n = "n=" + std::to_string(t.n) + " ";
    c.near((n + "E[Q1]").c_str(), g.mean_q1, t.eq1, half);
    c.near((n + "E[Q2]").c_str(), g.mean_q2, t.eq2, half);
    c.near((n + "std(Qs)").c_str(), g.std_qs, t.std_qs, std_tol);
    c.near((n + "std(Q1)").c_str(), g.std_q1, t.std_q1, std_tol);
    c.near((n + "std(Q2)").c_str(), g.std_q2, t.std_q2, std_tol);
  }
  return c.outcome();
}

Outcome simulation_check() {
  Checker c;
  const ExperimentConfig cfg;  // 5 runs x 300,000 arrivals, n in {25, 100, 400}
  const auto r = validate_command(cfg);
  const int total = r.stochastic_cells();
  const int hit = r.overlapping_cells();
  c.require(total >= 18, "fewer stochastic cells than published");
  c.require(hit >= 0.9 * total, "CI overlap below 90%");
  c.note(std::to_string(hit) + "/" + std::to_string(total) + " CIs overlap, seed " +
         std::to_string(cfg.seed));
  for (const auto& cell : r.cells) {
    if (cell.overlap && !*cell.overlap) {
      c.note("miss n=" + std::to_string(cell.n) + " " + cell.quantity);
    }
  }
  return c.outcome();
}

Outcome oracle_check() {
  Checker c;
  std::mt19937_64 g(6);

  // birth-death closed form vs matrix-geometric and truncated generator
  double worst_pi = 0.0;
  int states = 0;
  while (states < 100) {
    const auto p = testsupport::random_params(g);
    const auto m = ftsp_rates(p, testsupport::random_state(g, p));
    if (!is_positive_recurrent(m)) continue;
    const double bd = pi_12(m, PiMethod::birth_death);
    worst_pi = std::max({worst_pi, std::abs(pi_12(m, PiMethod::matrix_geometric) - bd),
                         std::abs(pi_12(m, PiMethod::truncated) - bd)});
    ++states;
  }
  c.require(worst_pi < 1e-8, "BD/QBD/truncated pi gap " + Checker::fmt(worst_pi));

  // closed-form steady-state covariance vs Lyapunov solve
  double worst_cov = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto p = testsupport::random_admissible(g);
    DiffusionOptions o;
    o.method = i % 2 ? Sigma2Method::paper_r1 : Sigma2Method::regenerative;
    const auto b = bou_matrices(p, o);
    const Eigen::Matrix2d closed = steady_state_covariance(b).matrix();
    const Eigen::Matrix2d lyap = solve_lyapunov(b.M, b.V);
    worst_cov = std::max(worst_cov,
                         (closed - lyap).cwiseAbs().maxCoeff() / lyap.cwiseAbs().maxCoeff());
  }
  c.require(worst_cov < 1e-10, "covariance relative gap " + Checker::fmt(worst_cov));

  // Poisson-equation sigma2 vs Monte Carlo of the frozen process, and which
  // closed form matches
  const auto p = base_case();
  const auto x = stationary_point(p).state();
  const double poisson = asymptotic_variance(p, x, Sigma2Method::poisson_numeric);
  const double mc = asymptotic_variance(p, x, Sigma2Method::monte_carlo);
  const double printed = asymptotic_variance(p, x, Sigma2Method::paper_r1);
  const double regen = asymptotic_variance(p, x, Sigma2Method::regenerative);
  c.require(std::abs(mc - poisson) <= 0.02 * poisson,
            "sigma2 poisson " + Checker::fmt(poisson) + " vs MC " + Checker::fmt(mc));
  const bool regen_matches = std::abs(regen - poisson) <= 0.02 * poisson;
  const bool printed_matches = std::abs(printed - poisson) <= 0.02 * poisson;
  c.note("sigma2 poisson=" + Checker::fmt(poisson) + " mc=" + Checker::fmt(mc) + "; matches " +
         (regen_matches ? "regenerative" : "") + (printed_matches ? " paper_r1" : "") +
         (!regen_matches && !printed_matches ? "neither" : "") + " (paper_r1=" +
         Checker::fmt(printed) + ")");

  // simulator generator vs frozen-process rates
  int generator_states = 0;
  double worst_rate = 0.0;
  const int n = 200;
  while (generator_states < 50) {
    auto q = testsupport::random_params(g);
    const auto sys = scale(q, n);
    q.m = {static_cast<double>(sys.m[0]) / n, static_cast<double>(sys.m[1]) / n};
    std::uniform_int_distribution<std::int64_t> qd(1, 3 * n);
    std::uniform_int_distribution<std::int64_t> zd(1, sys.m[1] - 1);
    SimState s;
    s.Q1 = qd(g);
    s.Q2 = qd(g);
    s.Z11 = sys.m[0];
    s.Z12 = zd(g);
    s.Z22 = sys.m[1] - s.Z12;
    const FluidState gamma{static_cast<double>(s.Q1) / n, static_cast<double>(s.Q2) / n,
                           static_cast<double>(s.Z12) / n};
    const auto model = ftsp_rates(q, gamma);
    const auto& want = d12_positive(sys, s) ? model.positive : model.nonpositive;
    RegimeRates got;
    const auto rates = event_rates(sys, s);
    for (std::size_t e = 0; e < kEventCount; ++e) {
      if (rates[e] == 0.0) continue;
      auto t = s;
      apply_event(sys, t, static_cast<Event>(e));
      const double rate = rates[e] / n;
      if (t.Q1 > s.Q1) got.class1_up += rate;
      if (t.Q1 < s.Q1) got.class1_down += rate;
      if (t.Q2 > s.Q2) got.class2_up += rate;
      if (t.Q2 < s.Q2) got.class2_down += rate;
    }
    worst_rate = std::max({worst_rate, std::abs(got.class1_up - want.class1_up),
                           std::abs(got.class1_down - want.class1_down),
                           std::abs(got.class2_up - want.class2_up),
                           std::abs(got.class2_down - want.class2_down)});
    ++generator_states;
  }
  c.require(worst_rate < 1e-12, "generator rate gap " + Checker::fmt(worst_rate));
  return c.outcome();
}

Outcome averaging_check() {
  Checker c;
  const auto sys = scale(base_case(), 400);
  const auto est = replicate(sys, 5, {}, 400);
  const double se = est.frac_d12_positive.stddev / std::sqrt(5.0);
  c.near("P(D>0)", est.frac_d12_positive.mean, 0.1763, 3 * se);
  c.note("P(D>0)=" + Checker::fmt(est.frac_d12_positive.mean) + " se " + Checker::fmt(se));
  return c.outcome();
}

Outcome recurrence_check() {
  Checker c;
  std::mt19937_64 g(8);
  const Rational ratios[] = {Rational(1, 1), Rational(2, 1), Rational(1, 2), Rational(3, 2),
                             Rational(2, 3)};
  int agree = 0, recurrent = 0, total = 0;
  while (total < 1000) {
    auto p = testsupport::random_params(g);
    p.r12 = ratios[total % 5];
    p.r21 = Rational(1, 3);
    const auto m = ftsp_rates(p, testsupport::random_state(g, p));
    const double pi = pi_12(m, PiMethod::matrix_geometric);
    const bool drift_test = is_positive_recurrent(m);
    agree += drift_test == (pi > 0.0 && pi < 1.0);
    recurrent += drift_test;
    ++total;
  }
  c.require(agree == total, std::to_string(total - agree) + " disagreements");
  c.note(std::to_string(recurrent) + " of " + std::to_string(total) + " states recurrent");
  return c.outcome();
}

Outcome single_class_check() {
  Checker c;
  auto p = base_case();
  p.mu[0][1] = p.mu22();
  for (auto method : {Sigma2Method::paper_r1, Sigma2Method::poisson_numeric}) {
    DiffusionOptions o;
    o.method = method;
    const auto cov = steady_state_covariance(bou_matrices(p, o));
    c.near("varQs", cov.varQs, (p.lambda[0] + p.lambda[1]) / p.theta[0], 1e-12);
  }
  std::mt19937_64 g(10);
  int sets = 0;
  while (sets < 50) {
    auto q = testsupport::random_admissible(g, true);
    q.theta[1] = q.theta[0];
    const auto xs = stationary_point(q);
    if (!check_overload(q).holds() || !(xs.z12s > 0 && xs.z12s < q.m[1]) || !xs.inA) continue;
    const auto cov = steady_state_covariance(bou_matrices(q, {}));
    c.near("varQs(random)", cov.varQs, (q.lambda[0] + q.lambda[1]) / q.theta[0], 1e-10);
    ++sets;
  }
  return c.outcome();
}

Outcome fclt_check() {
  Checker c;
  const auto p = base_case();
  const auto xs = stationary_point(p);
  const double T = 5.0;
  const auto path = integrate_fluid(p, xs.state(), T, 1e-3);
  DiffusionOptions o;  // poisson_numeric, the method the oracles select
  const double target = time_changes(p, path, o).gamma3.back();
  const auto sys = scale(p, 400);
  const int reps = 1000;
  std::vector<double> v(reps);
  for (int i = 0; i < reps; ++i) {
    v[i] = centered_indicator_integral(sys, T, xs.piStar, split_seed(2025, i));
  }
  double mean = 0.0;
  for (double y : v) mean += y;
  mean /= reps;
  double var = 0.0;
  for (double y : v) var += (y - mean) * (y - mean);
  var /= reps - 1;
  c.require(std::abs(var - target) <= 0.25 * target,
            "variance " + Checker::fmt(var) + " vs gamma3(5) " + Checker::fmt(target));
  c.note("variance " + Checker::fmt(var) + " vs gamma3(5)=" + Checker::fmt(target) + ", " +
         std::to_string(reps) + " reps");
  return c.outcome();
}

}  // namespace

int main() {
  criterion(1, "stationary fluid point", 1, stationary_point_check);
  criterion(2, "FTSP rates and busy-period chain", 1, ftsp_check);
  criterion(3, "diffusion arithmetic chain", 1, chain_check);
  criterion(4, "published approximation columns", 1, approximation_check);
  criterion(5, "published simulation columns", 120, simulation_check);
  criterion(6, "oracle equivalences", 120, oracle_check);
  criterion(7, "averaging principle at n=400", 60, averaging_check);
  criterion(8, "recurrence criterion", 30, recurrence_check);
  criterion(9, "single-class reduction", 5, single_class_check);
  criterion(10, "time-varying FCLT variance spot check", 120, fclt_check);
  std::printf("%d criteria failed\n", failures);
  return failures;
}
