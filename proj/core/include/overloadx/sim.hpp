#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "overloadx/ftsp.hpp"
#include "overloadx/params.hpp"
#include "overloadx/stats.hpp"

namespace overloadx {

struct SimState {
  std::int64_t Q1 = 0;
  std::int64_t Q2 = 0;
  std::int64_t Z11 = 0;
  std::int64_t Z12 = 0;
  std::int64_t Z21 = 0;
  std::int64_t Z22 = 0;
  double clock = 0.0;

  friend bool operator==(const SimState&, const SimState&) = default;
};

/// Fixed category order used for event sampling.
enum class Event : std::uint8_t {
  arrival1,
  arrival2,
  abandon1,
  abandon2,
  service11,
  service12,
  service21,
  service22,
};

inline constexpr std::size_t kEventCount = 8;

const char* to_string(Event e);

enum class StartMode { empty, fluid };

StartMode parse_start_mode(std::string_view text);
const char* to_string(StartMode mode);

/// empty: all zero. fluid: both pools full around n x* of the effective
/// parameters, Z21 = 0.
SimState init_state(const ScaledSystem& sys, StartMode mode);

/// Violated invariant, or nullptr if the state is admissible.
const char* check_state(const ScaledSystem& sys, const SimState& s);

/// Sign tests on the queue-difference processes with exact integer arithmetic.
bool d12_positive(const ScaledSystem& sys, const SimState& s);
bool d21_positive(const ScaledSystem& sys, const SimState& s);
double d12_value(const ScaledSystem& sys, const SimState& s);

std::array<double, kEventCount> event_rates(const ScaledSystem& sys, const SimState& s);

/// Applies the routing consequences of one event (clock untouched).
void apply_event(const ScaledSystem& sys, SimState& s, Event e);

class Simulator {
 public:
  Simulator(const ScaledSystem& sys, const SimState& start, std::uint64_t seed);

  struct Step {
    Event event;
    double dt;
  };

  Step step();
  const SimState& state() const { return state_; }

 private:
  const ScaledSystem& sys_;
  SimState state_;
  Rng rng_;
};

struct RunOptions {
  std::int64_t arrivals = 300000;
  double warmup = 0.2;  ///< fraction of elapsed time discarded
  StartMode start = StartMode::fluid;
};

/// Default warm-up for a start mode: 0.2 from the fluid point, 0.5 from empty.
double default_warmup(StartMode mode);

struct RunStats {
  double window_start = 0.0;
  double window_end = 0.0;
  bool degenerate = false;  ///< empty measurement window
  std::int64_t events = 0;

  double mean_q1 = 0.0;
  double mean_q2 = 0.0;
  double mean_qs = 0.0;
  double mean_z12 = 0.0;
  double second_q1 = 0.0;
  double second_q2 = 0.0;
  double second_qs = 0.0;
  double second_z12 = 0.0;

  double frac_d12_positive = 0.0;
  double frac_pools_not_full = 0.0;
  double d12_scaled_std = 0.0;  ///< time std of D12 / sqrt(n)
  std::int64_t one_way_violations = 0;

  std::array<std::int64_t, 2> arrivals{};
  std::array<std::int64_t, 2> abandonments{};
  std::array<std::int64_t, 2> services{};
  std::array<std::int64_t, 2> initial_in_system{};
  std::array<std::int64_t, 2> terminal_in_system{};

  double std_q1() const;
  double std_q2() const;
  double std_qs() const;
  double std_z12() const;
  bool conserves() const;
};

/// Simulates until the total arrival count reaches options.arrivals; the
/// first warmup fraction of elapsed time is discarded. Deterministic in seed.
RunStats run(const ScaledSystem& sys, const RunOptions& options, std::uint64_t seed);

struct SimEstimate {
  int n = 0;
  int runs = 0;
  std::uint64_t base_seed = 0;
  RunOptions options;
  std::vector<RunStats> per_run;
  ReplicationSummary mean_q1;
  ReplicationSummary mean_q2;
  ReplicationSummary mean_q1_scaled;
  ReplicationSummary mean_q2_scaled;
  ReplicationSummary std_qs;
  ReplicationSummary std_q1;
  ReplicationSummary std_q2;
  ReplicationSummary std_hat_qs;
  ReplicationSummary std_hat_q1;
  ReplicationSummary std_hat_q2;
  ReplicationSummary frac_d12_positive;
  ReplicationSummary frac_pools_not_full;
  ReplicationSummary d12_scaled_std;
};

/// Worker threads for replications: OVERLOADX_THREADS if set, else the
/// hardware concurrency.
unsigned worker_threads();

SimEstimate replicate_with_seeds(const ScaledSystem& sys, std::span<const std::uint64_t> seeds,
                                 const RunOptions& options);

/// R runs on streams split_seed(base_seed, i). Throws if R < 2.
SimEstimate replicate(const ScaledSystem& sys, int R, const RunOptions& options,
                      std::uint64_t base_seed);

/// sqrt(n) (int_0^T 1{D12 > 0} ds - pi T) for one path started at the fluid point.
double centered_indicator_integral(const ScaledSystem& sys, double T, double pi,
                                   std::uint64_t seed);

}  // namespace overloadx
