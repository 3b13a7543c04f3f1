#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace overloadx {

/// Derives an independent stream seed from a root seed (splitmix64 finalizer).
std::uint64_t split_seed(std::uint64_t root, std::uint64_t stream);

/// mt19937_64 with explicit uniform/exponential transforms so that sample
/// paths do not depend on the standard library's distribution classes.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on (0, 1].
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }
  double exponential(double rate) { return -std::log(uniform()) / rate; }
  /// Standard normal via Box-Muller (one draw per call, second discarded).
  double normal();

 private:
  std::mt19937_64 engine_;
};

double student_t_quantile(double p, int dof);

struct ReplicationSummary {
  int count = 0;
  double mean = 0.0;
  double stddev = 0.0;      ///< sample standard deviation across replications
  double half_width = 0.0;  ///< t_{(1+c)/2, R-1} * stddev / sqrt(R)
};

/// Cross-replication mean and t-based confidence half-width. Requires R >= 2.
ReplicationSummary summarize_replications(std::span<const double> values,
                                          double confidence = 0.95);

}  // namespace overloadx
