#pragma once

#include "sensornet/montecarlo.hpp"
#include "sensornet/relax.hpp"
#include "sensornet/rounding.hpp"

#include <cstdint>
#include <exception>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sensornet {

struct RunConfig {
  std::string scenario_path;
  ProblemId problem = ProblemId::StaticLoPS;
  // Cost caps lambda, or error targets xi for the min-cost problems. Strictly increasing.
  std::vector<double> grid;
  Scheme min_cost_scheme = Scheme::digital;
  std::optional<double> resource_cap;  // default: N (LoPS) or W (BLoPS) from the scenario
  RoundingOptions rounding;
  long trials = 0;  // 0 disables the Monte Carlo column
  long steps = 10000;
  int jobs = 1;
  bool timing = false;
  RelaxOptions relax;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

struct ResultRow {
  double lambda = 0.0;
  std::string status = "optimal";  // optimal | infeasible | error
  // Error units (trace or steady-state MSE); cost units for the min-cost problems.
  double relaxed = 0.0;
  double rounded = 0.0;
  double mc = 0.0;  // NaN when no simulation ran
  double mc_ci = 0.0;
  std::vector<int> counts_by_type;  // k = 0..K, including the empty sites
  std::vector<int> counts_by_bw;    // placed sensors per bandwidth column
  double ms = 0.0;                  // 0 unless timing was requested
  bool feasible = false;
  std::string error;

  bool operator==(const ResultRow&) const;
};

struct PointResult {
  SolveReport report;
  std::optional<RoundingOutcome> rounding;
  std::optional<SimReport> sim;
  FeasibilityVerdict verdict;
  CellCosts costs;
  SelectionBudget budget;
  ResultRow row;
};

// Relax, round and (when trials > 0) simulate one grid value.
PointResult run_point(const Scenario& scenario, const LinkTable& link, const RunConfig& config, double value);

struct SweepResult {
  std::vector<ResultRow> rows;  // grid order; stops after the first error row
  std::exception_ptr failure;   // set when a point threw
};

// Runs every grid value on up to config.jobs threads; results come back in grid order.
SweepResult run_sweep(const Scenario& scenario, const RunConfig& config);

enum class OutputFormat { csv, json };
std::optional<OutputFormat> parse_output_format(std::string_view text);

inline constexpr const char* kCsvHeader = "lambda,relaxed,rounded,mc,mc_ci,counts_by_type,counts_by_bw,ms";

void emit_results(std::ostream& out, const std::vector<ResultRow>& rows, OutputFormat format);
// Throws Error when the path cannot be written or rows is empty.
void emit_results(const std::string& path, const std::vector<ResultRow>& rows, OutputFormat format);
std::vector<ResultRow> parse_results_json(std::string_view text);

// ---- proposition checks ----------------------------------------------------------

struct CheckResult {
  std::string name;
  bool passed = true;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  long cases = 0;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  int ranking_selections = 50;
  double tolerance = 1e-9;
};

// Grid-factorization SNR invariance, analog copy invariance, gamma/MMSE ranking and the
// wideband quantization limit, each with its largest observed deviation.
VerificationReport verify_propositions(const Scenario& scenario, const VerifyOptions& options = {});

}  // namespace sensornet
