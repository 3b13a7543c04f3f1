#include "overloadx/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <numbers>
#include <stdexcept>

namespace overloadx {

std::uint64_t split_seed(std::uint64_t root, std::uint64_t stream) {
  std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double student_t_quantile(double p, int dof) {
  if (dof < 1) throw std::invalid_argument("t quantile needs dof >= 1");
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, p);
}

ReplicationSummary summarize_replications(std::span<const double> values, double confidence) {
  if (values.size() < 2) {
    throw std::invalid_argument("need at least 2 replications for a confidence interval");
  }
  ReplicationSummary s;
  s.count = static_cast<int>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.count;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / (s.count - 1));
  s.half_width =
      student_t_quantile(0.5 + confidence / 2.0, s.count - 1) * s.stddev / std::sqrt(s.count);
  return s;
}

}  // namespace overloadx
