#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "overloadx/params.hpp"

namespace overloadx {

/// Point (q1, q2, z12) of the fluid state space [0, inf)^2 x [0, m2].
struct FluidState {
  double q1 = 0.0;
  double q2 = 0.0;
  double z12 = 0.0;

  friend bool operator==(const FluidState&, const FluidState&) = default;
};

bool in_state_space(const ModelParams& p, const FluidState& x);
void require_state_space(const ModelParams& p, const FluidState& x);

/// Total event rate of the three-dimensional representation at x, per unit
/// fast time: arrivals, abandonments and service completions of both pools.
double total_event_rate(const ModelParams& p, const FluidState& x);

/// Rates of the four event types that move the queue-difference process
/// D = Q1 - k - r Q2, in one regime. A class-1 queue increment moves D by +1,
/// a class-2 queue increment moves D by -r.
struct RegimeRates {
  double class1_up = 0.0;
  double class1_down = 0.0;
  double class2_up = 0.0;
  double class2_down = 0.0;

  double total() const { return class1_up + class1_down + class2_up + class2_down; }
};

/// Birth-death parameters of the r = 1 fast-time-scale process: up/down in
/// the positive region, away/toward the boundary in the non-positive region.
struct FtspRates {
  double lam1 = 0.0;
  double mu1 = 0.0;
  double lam2 = 0.0;
  double mu2 = 0.0;
};

/// A jump of the lattice walk, in units of 1/den(r) of D.
struct LatticeJump {
  int step = 0;
  double rate = 0.0;
};

/// The fast-time-scale process frozen at a fluid state. For r = j/k the
/// walk lives on the integer lattice s = k D; class-1 events jump by +-k,
/// class-2 events by -+j. State 0 belongs to the non-positive regime.
struct FtspModel {
  Rational r;
  RegimeRates positive;
  RegimeRates nonpositive;

  int class1_step() const { return static_cast<int>(r.den()); }
  int class2_step() const { return static_cast<int>(r.num()); }
  int block_size() const;
  bool is_birth_death() const { return r.is_one(); }

  /// Throws std::logic_error unless r = 1.
  FtspRates birth_death() const;
  std::vector<LatticeJump> jumps(bool positive_regime) const;
};

FtspModel ftsp_rates(const ModelParams& p, const FluidState& x);

struct Drifts {
  double plus = 0.0;   ///< drift of D while D > 0
  double minus = 0.0;  ///< drift of D while D <= 0; > 0 means back toward positive
};

Drifts drift_rates(const FtspModel& model);

bool is_positive_recurrent(const FtspModel& model);
bool is_positive_recurrent(const ModelParams& p, const FluidState& x);

struct BusyPeriodMoments {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
};

/// Busy period of an M/M/1 queue started by one customer. Throws
/// std::domain_error unless lam < mu.
BusyPeriodMoments busy_period_moments(double lam, double mu);

enum class PiMethod { automatic, birth_death, matrix_geometric, truncated };

/// Stationary probability that the frozen difference process is strictly
/// positive. Non-recurrent models return exactly 0 or 1.
double pi_12(const FtspModel& model, PiMethod method = PiMethod::automatic);
double pi_12(const ModelParams& p, const FluidState& x, PiMethod method = PiMethod::automatic);

/// Closed form valid at the stationary fluid point:
/// mu12 z / (mu12 z + mu22 (m2 - z)).
double pi_12_stationary(const ModelParams& p, const FluidState& xstar);

enum class Sigma2Method { paper_r1, regenerative, poisson_numeric, monte_carlo };

std::string_view to_string(Sigma2Method method);
Sigma2Method parse_sigma2_method(std::string_view text);

/// Stationary solution of the lattice generator restricted to |s| <= radius,
/// with out-of-range jumps suppressed.
struct TruncatedSolution {
  int radius = 0;
  double pi12 = 0.0;
  double sigma2 = 0.0;          ///< from the Poisson equation; 0 if not requested
  double boundary_mass = 0.0;   ///< stationary mass on the two outermost states
  std::vector<double> stationary;  ///< indexed by s + radius
};

TruncatedSolution solve_truncated(const FtspModel& model, int radius, bool solve_poisson);

/// Starts near the radius where the slower tail falls below 1e-16 and doubles
/// until sigma2 moves less than sigma2_tol (relative once sigma2 > 1), pi12
/// less than 1e-12 and the boundary mass is below 1e-12. Throws
/// std::runtime_error when the required radius exceeds max_radius.
TruncatedSolution solve_truncated_converged(const FtspModel& model, double sigma2_tol = 1e-6,
                                            int max_radius = 1 << 21);

struct FtspMcStats {
  double horizon = 0.0;
  std::int64_t events = 0;
  std::int64_t cycles = 0;            ///< completed regeneration cycles (returns to s = 0)
  double time_fraction_positive = 0.0;
  double fraction_std_error = 0.0;
  double sigma2 = 0.0;                ///< regenerative estimate of the asymptotic variance
  double sigma2_std_error = 0.0;      ///< spread across 20 contiguous cycle batches
  double sigma2_batch_means = 0.0;    ///< time-batch means estimate (cross-check)
};

/// Simulates the frozen process from s = 0 over [0, horizon]. Deterministic
/// given the seed. Throws std::invalid_argument if horizon <= 0.
FtspMcStats simulate_ftsp(const FtspModel& model, double horizon, std::uint64_t seed,
                          int time_batches = 100);
FtspMcStats simulate_ftsp(const ModelParams& p, const FluidState& x, double horizon,
                          std::uint64_t seed);

struct MonteCarloSettings {
  double horizon = 1e7;
  std::uint64_t seed = 20240917;
};

/// Asymptotic variance of the integrated positivity indicator.
///  - paper_r1: Var(T1) / (E T1 + E T2), r = 1 only
///  - regenerative: Var((1 - pi) T1 - pi T2) / (E T1 + E T2), r = 1 only
///  - poisson_numeric: truncated Poisson equation, any rational r
///  - monte_carlo: regenerative estimate from simulate_ftsp
/// Throws std::domain_error at non-recurrent states.
double asymptotic_variance(const ModelParams& p, const FluidState& x, Sigma2Method method,
                           const MonteCarloSettings& mc = {});
double asymptotic_variance(const FtspModel& model, Sigma2Method method,
                           const MonteCarloSettings& mc = {});

struct FtspSummary {
  FluidState state;
  FtspModel model;
  double delta_plus = 0.0;
  double delta_minus = 0.0;
  bool recurrent = false;
  double pi12 = 0.0;
  std::optional<BusyPeriodMoments> t1;  ///< r = 1 and recurrent only
  std::optional<BusyPeriodMoments> t2;
  std::optional<double> sigma2;  ///< absent when not recurrent
  Sigma2Method method = Sigma2Method::poisson_numeric;
};

FtspSummary summarize_ftsp(const ModelParams& p, const FluidState& x, Sigma2Method method,
                           const MonteCarloSettings& mc = {});

}  // namespace overloadx
