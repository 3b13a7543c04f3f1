#include "overloadx/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

#include "overloadx/fluid.hpp"

namespace overloadx {

const char* to_string(Event e) {
  static constexpr const char* kNames[kEventCount] = {
      "arrival1", "arrival2", "abandon1", "abandon2",
      "service11", "service12", "service21", "service22"};
  return kNames[static_cast<std::size_t>(e)];
}

StartMode parse_start_mode(std::string_view text) {
  if (text == "empty") return StartMode::empty;
  if (text == "fluid") return StartMode::fluid;
  throw std::invalid_argument("unknown start mode \"" + std::string(text) +
                              "\" (expected empty or fluid)");
}

const char* to_string(StartMode mode) { return mode == StartMode::empty ? "empty" : "fluid"; }

double default_warmup(StartMode mode) { return mode == StartMode::empty ? 0.5 : 0.2; }

SimState init_state(const ScaledSystem& sys, StartMode mode) {
  SimState s;
  if (mode == StartMode::empty) return s;
  const StationaryPoint x = stationary_point(sys.effective_params());
  const double n = sys.n;
  s.Z11 = sys.m[0];
  s.Z12 = std::min<std::int64_t>(sys.m[1], round_half_up(n * x.z12s));
  s.Z22 = sys.m[1] - s.Z12;
  s.Q1 = round_half_up(n * x.q1s);
  s.Q2 = round_half_up(n * x.q2s);
  return s;
}

const char* check_state(const ScaledSystem& sys, const SimState& s) {
  if (s.Q1 < 0 || s.Q2 < 0 || s.Z11 < 0 || s.Z12 < 0 || s.Z21 < 0 || s.Z22 < 0) {
    return "negative count";
  }
  if (s.Z11 + s.Z21 > sys.m[0]) return "pool 1 over capacity";
  if (s.Z12 + s.Z22 > sys.m[1]) return "pool 2 over capacity";
  if (s.Z12 > 0 && s.Z21 > 0) return "two-way sharing";
  return nullptr;
}

bool d12_positive(const ScaledSystem& sys, const SimState& s) {
  const Rational& r = sys.parent.r12;
  return r.den() * (s.Q1 - sys.k12) - r.num() * s.Q2 > 0;
}

bool d21_positive(const ScaledSystem& sys, const SimState& s) {
  const Rational& r = sys.parent.r21;
  return r.num() * s.Q2 - r.den() * (sys.k21 + s.Q1) > 0;
}

double d12_value(const ScaledSystem& sys, const SimState& s) {
  return static_cast<double>(s.Q1 - sys.k12) - sys.parent.r12.value() * static_cast<double>(s.Q2);
}

std::array<double, kEventCount> event_rates(const ScaledSystem& sys, const SimState& s) {
  const ModelParams& p = sys.parent;
  return {
      sys.lambda[0],
      sys.lambda[1],
      p.theta[0] * static_cast<double>(s.Q1),
      p.theta[1] * static_cast<double>(s.Q2),
      p.mu11() * static_cast<double>(s.Z11),
      p.mu12() * static_cast<double>(s.Z12),
      p.mu21() * static_cast<double>(s.Z21),
      p.mu22() * static_cast<double>(s.Z22),
  };
}

namespace {

// A freed agent of pool 2 takes class 1 only while D12 > 0 and pool 1 serves
// no class 2; otherwise it takes its own class or idles.
void free_pool2_agent(const ScaledSystem& sys, SimState& s) {
  if (s.Q1 > 0 && s.Z21 == 0 && d12_positive(sys, s)) {
    --s.Q1;
    ++s.Z12;
  } else if (s.Q2 > 0) {
    --s.Q2;
    ++s.Z22;
  }
}

void free_pool1_agent(const ScaledSystem& sys, SimState& s) {
  if (s.Q2 > 0 && s.Z12 == 0 && d21_positive(sys, s)) {
    --s.Q2;
    ++s.Z21;
  } else if (s.Q1 > 0) {
    --s.Q1;
    ++s.Z11;
  }
}

}  // namespace

void apply_event(const ScaledSystem& sys, SimState& s, Event e) {
  const bool pool1_idle = s.Z11 + s.Z21 < sys.m[0];
  const bool pool2_idle = s.Z12 + s.Z22 < sys.m[1];
  switch (e) {
    case Event::arrival1:
      if (pool1_idle) {
        ++s.Z11;
      } else if (pool2_idle && s.Z21 == 0 && d12_positive(sys, s)) {
        ++s.Z12;
      } else {
        ++s.Q1;
      }
      break;
    case Event::arrival2:
      if (pool2_idle) {
        ++s.Z22;
      } else if (pool1_idle && s.Z12 == 0 && d21_positive(sys, s)) {
        ++s.Z21;
      } else {
        ++s.Q2;
      }
      break;
    case Event::abandon1:
      --s.Q1;
      break;
    case Event::abandon2:
      --s.Q2;
      break;
    case Event::service11:
      --s.Z11;
      free_pool1_agent(sys, s);
      break;
    case Event::service21:
      --s.Z21;
      free_pool1_agent(sys, s);
      break;
    case Event::service12:
      --s.Z12;
      free_pool2_agent(sys, s);
      break;
    case Event::service22:
      --s.Z22;
      free_pool2_agent(sys, s);
      break;
  }
}

Simulator::Simulator(const ScaledSystem& sys, const SimState& start, std::uint64_t seed)
    : sys_(sys), state_(start), rng_(seed) {}

Simulator::Step Simulator::step() {
  const auto rates = event_rates(sys_, state_);
  double total = 0.0;
  for (double r : rates) total += r;
  const double dt = rng_.exponential(total);
  const double u = rng_.uniform() * total;
  std::size_t e = 0;
  double acc = rates[0];
  while (e + 1 < kEventCount && (u > acc || rates[e] == 0.0)) acc += rates[++e];
  const auto event = static_cast<Event>(e);
  apply_event(sys_, state_, event);
  state_.clock += dt;
  return {event, dt};
}

double RunStats::std_q1() const { return std::sqrt(std::max(0.0, second_q1 - mean_q1 * mean_q1)); }
double RunStats::std_q2() const { return std::sqrt(std::max(0.0, second_q2 - mean_q2 * mean_q2)); }
double RunStats::std_qs() const { return std::sqrt(std::max(0.0, second_qs - mean_qs * mean_qs)); }
double RunStats::std_z12() const {
  return std::sqrt(std::max(0.0, second_z12 - mean_z12 * mean_z12));
}

bool RunStats::conserves() const {
  for (int i = 0; i < 2; ++i) {
    if (arrivals[i] !=
        services[i] + abandonments[i] + terminal_in_system[i] - initial_in_system[i]) {
      return false;
    }
  }
  return true;
}

namespace {

std::array<std::int64_t, 2> in_system(const SimState& s) {
  return {s.Q1 + s.Z11 + s.Z12, s.Q2 + s.Z21 + s.Z22};
}

struct Accumulator {
  double q1 = 0, q2 = 0, qs = 0, z12 = 0;
  double q1sq = 0, q2sq = 0, qssq = 0, z12sq = 0;
  double d_pos = 0, not_full = 0, d = 0, dsq = 0;

  void add(const ScaledSystem& sys, const SimState& s, double w) {
    const auto Q1 = static_cast<double>(s.Q1);
    const auto Q2 = static_cast<double>(s.Q2);
    const auto Z12 = static_cast<double>(s.Z12);
    q1 += w * Q1;
    q2 += w * Q2;
    qs += w * (Q1 + Q2);
    z12 += w * Z12;
    q1sq += w * Q1 * Q1;
    q2sq += w * Q2 * Q2;
    qssq += w * (Q1 + Q2) * (Q1 + Q2);
    z12sq += w * Z12 * Z12;
    if (d12_positive(sys, s)) d_pos += w;
    if (s.Z11 < sys.m[0] || s.Z12 + s.Z22 < sys.m[1]) not_full += w;
    const double dv = d12_value(sys, s);
    d += w * dv;
    dsq += w * dv * dv;
  }
};

// Runs the chain until the arrival count is reached; accumulates the state
// over [window_start, inf) when a window is given.
RunStats simulate_run(const ScaledSystem& sys, const RunOptions& options, std::uint64_t seed,
                      double window_start) {
  SimState start = init_state(sys, options.start);
  Simulator sim(sys, start, seed);
  RunStats out;
  out.initial_in_system = in_system(start);
  Accumulator acc;
  std::int64_t arrivals = 0;
  while (arrivals < options.arrivals) {
    const SimState before = sim.state();
    const auto step = sim.step();
    ++out.events;
    const double t0 = before.clock;
    const double t1 = sim.state().clock;
    if (t1 > window_start) acc.add(sys, before, t1 - std::max(t0, window_start));
    const SimState& s = sim.state();
    if (s.Z12 > 0 && s.Z21 > 0) ++out.one_way_violations;
    switch (step.event) {
      case Event::arrival1: ++out.arrivals[0]; ++arrivals; break;
      case Event::arrival2: ++out.arrivals[1]; ++arrivals; break;
      case Event::abandon1: ++out.abandonments[0]; break;
      case Event::abandon2: ++out.abandonments[1]; break;
      case Event::service11:
      case Event::service12: ++out.services[0]; break;
      case Event::service21:
      case Event::service22: ++out.services[1]; break;
    }
  }
  out.terminal_in_system = in_system(sim.state());
  out.window_start = window_start;
  out.window_end = sim.state().clock;
  const double len = out.window_end - window_start;
  if (!(len > 0.0)) {
    out.degenerate = true;
    return out;
  }
  out.mean_q1 = acc.q1 / len;
  out.mean_q2 = acc.q2 / len;
  out.mean_qs = acc.qs / len;
  out.mean_z12 = acc.z12 / len;
  out.second_q1 = acc.q1sq / len;
  out.second_q2 = acc.q2sq / len;
  out.second_qs = acc.qssq / len;
  out.second_z12 = acc.z12sq / len;
  out.frac_d12_positive = acc.d_pos / len;
  out.frac_pools_not_full = acc.not_full / len;
  const double dm = acc.d / len;
  out.d12_scaled_std = std::sqrt(std::max(0.0, acc.dsq / len - dm * dm) / sys.n);
  return out;
}

}  // namespace

RunStats run(const ScaledSystem& sys, const RunOptions& options, std::uint64_t seed) {
  if (options.arrivals < 1) throw std::invalid_argument("arrival horizon must be >= 1");
  if (!(options.warmup >= 0.0 && options.warmup <= 1.0)) {
    throw std::invalid_argument("warm-up fraction must lie in [0, 1]");
  }
  // The end time is known only after the fact: replay the same stream.
  const double end = simulate_run(sys, options, seed, INFINITY).window_end;
  const double start = options.warmup >= 1.0 ? end : options.warmup * end;
  return simulate_run(sys, options, seed, start);
}

unsigned worker_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("OVERLOADX_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

SimEstimate replicate_with_seeds(const ScaledSystem& sys, std::span<const std::uint64_t> seeds,
                                 const RunOptions& options) {
  if (seeds.size() < 2) throw std::invalid_argument("need at least 2 replications");
  SimEstimate est;
  est.n = sys.n;
  est.runs = static_cast<int>(seeds.size());
  est.options = options;
  est.per_run.resize(seeds.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < seeds.size();) {
      est.per_run[i] = run(sys, options, seeds[i]);
    }
  };
  const unsigned threads = std::min<unsigned>(worker_threads(), seeds.size());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const double n = sys.n;
  const double root = std::sqrt(n);
  auto summarize = [&](auto field) {
    std::vector<double> v;
    v.reserve(est.per_run.size());
    for (const auto& r : est.per_run) v.push_back(field(r));
    return summarize_replications(v);
  };
  est.mean_q1 = summarize([](const RunStats& r) { return r.mean_q1; });
  est.mean_q2 = summarize([](const RunStats& r) { return r.mean_q2; });
  est.mean_q1_scaled = summarize([n](const RunStats& r) { return r.mean_q1 / n; });
  est.mean_q2_scaled = summarize([n](const RunStats& r) { return r.mean_q2 / n; });
  est.std_qs = summarize([](const RunStats& r) { return r.std_qs(); });
  est.std_q1 = summarize([](const RunStats& r) { return r.std_q1(); });
  est.std_q2 = summarize([](const RunStats& r) { return r.std_q2(); });
  est.std_hat_qs = summarize([root](const RunStats& r) { return r.std_qs() / root; });
  est.std_hat_q1 = summarize([root](const RunStats& r) { return r.std_q1() / root; });
  est.std_hat_q2 = summarize([root](const RunStats& r) { return r.std_q2() / root; });
  est.frac_d12_positive = summarize([](const RunStats& r) { return r.frac_d12_positive; });
  est.frac_pools_not_full = summarize([](const RunStats& r) { return r.frac_pools_not_full; });
  est.d12_scaled_std = summarize([](const RunStats& r) { return r.d12_scaled_std; });
  return est;
}

SimEstimate replicate(const ScaledSystem& sys, int R, const RunOptions& options,
                      std::uint64_t base_seed) {
  if (R < 2) throw std::invalid_argument("need at least 2 replications, got " + std::to_string(R));
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(R));
  for (int i = 0; i < R; ++i) seeds[i] = split_seed(base_seed, static_cast<std::uint64_t>(i));
  SimEstimate est = replicate_with_seeds(sys, seeds, options);
  est.base_seed = base_seed;
  return est;
}

double centered_indicator_integral(const ScaledSystem& sys, double T, double pi,
                                   std::uint64_t seed) {
  if (!(T > 0.0)) throw std::invalid_argument("integration horizon must be > 0");
  Simulator sim(sys, init_state(sys, StartMode::fluid), seed);
  double positive = 0.0;
  while (true) {
    const SimState before = sim.state();
    const bool pos = d12_positive(sys, before);
    const double t1 = before.clock + sim.step().dt;
    if (pos) positive += std::min(t1, T) - before.clock;
    if (t1 >= T) break;
  }
  return std::sqrt(static_cast<double>(sys.n)) * (positive - pi * T);
}

}  // namespace overloadx
