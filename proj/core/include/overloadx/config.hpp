#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "overloadx/diffusion.hpp"
#include "overloadx/params.hpp"
#include "overloadx/sim.hpp"

namespace overloadx {

/// Config error carrying the JSON pointer of the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct OutputPaths {
  std::string csv;
  std::string markdown;

  friend bool operator==(const OutputPaths&, const OutputPaths&) = default;
};

struct ExperimentConfig {
  ModelParams params = base_case();
  std::vector<int> scales{25, 100, 400};
  int runs = 5;
  std::int64_t arrivals = 300000;
  std::optional<double> warmup;  ///< default depends on the start mode
  StartMode start = StartMode::fluid;
  std::uint64_t seed = 42;
  std::optional<Sigma2Method> sigma2_method;
  std::optional<PsiConvention> psi_convention;
  OutputPaths output;

  RunOptions run_options() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses and validates a JSON config. Unknown keys are rejected. Missing
/// parameter fields keep their base-case values.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical JSON rendering; parse_config(to_json(c)) == c.
std::string to_json(const ExperimentConfig& config);

}  // namespace overloadx
