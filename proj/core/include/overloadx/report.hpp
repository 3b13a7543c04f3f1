#pragma once

#include <optional>
#include <string>
#include <vector>

#include "overloadx/config.hpp"

namespace overloadx {

/// A deterministic constant of the base-case arithmetic chain.
struct ChainRow {
  std::string name;
  double expected = 0.0;   ///< published value
  double computed = 0.0;   ///< full-precision value
  double linkwise = 0.0;   ///< from the published upstream values
  double tolerance = 0.0;  ///< applied to |computed - expected|
  bool pass = false;

  double abs_diff() const;
};

/// One (n, quantity) cell: Gaussian approximation vs. simulation.
struct CellRow {
  int n = 0;
  std::string quantity;
  double approx = 0.0;
  std::optional<double> published_approx;
  double approx_tolerance = 0.0;
  double sim_mean = 0.0;
  double sim_half_width = 0.0;
  std::optional<double> published_sim;
  std::optional<double> published_half_width;
  bool approx_pass = true;
  std::optional<bool> overlap;  ///< CI overlap, when a published CI exists
};

struct ValidationReport {
  ExperimentConfig config;
  Sigma2Method sigma2_method = Sigma2Method::paper_r1;
  PsiConvention psi_convention = PsiConvention::sec10_difference;
  RunOptions run_options;
  std::vector<ChainRow> chain;
  std::vector<CellRow> cells;

  bool chain_pass() const;
  bool approx_pass() const;
  int stochastic_cells() const;
  int overlapping_cells() const;
  bool simulation_pass() const;  ///< >= 90% of the stochastic cells overlap
  bool passed() const;
};

/// Base-case arithmetic chain under the given conventions.
std::vector<ChainRow> arithmetic_chain(const ModelParams& p, Sigma2Method method,
                                       PsiConvention psi);

/// Chain, approximations and replications for every configured scale.
/// Sub-stage failures are rethrown as std::runtime_error naming the stage.
/// Unset conventions default to the published ones (paper_r1, sec10).
ValidationReport validate_command(const ExperimentConfig& config);

std::string render_csv(const ValidationReport& report);
std::string render_markdown(const ValidationReport& report);

/// Writes CSV and Markdown to the configured paths; throws on I/O failure.
void emit_report(const ValidationReport& report, const std::string& csv_path,
                 const std::string& markdown_path);

}  // namespace overloadx
