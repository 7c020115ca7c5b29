#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xlat/matching.hpp"
#include "xlat/metrics.hpp"
#include "xlat/topology.hpp"

namespace xlat {

enum class MatchMode { None, Auto, Fixed };

struct MatchPlan {
  MatchMode mode = MatchMode::Auto;
  /// Port impedances used when mode == Fixed.
  RefPair fixed{cplx{50.0}, cplx{50.0}};
  /// Match frequency override for mode == Auto (default: max |S21|).
  std::optional<double> at_hz;
};

struct Evaluation {
  SweepResponse unmatched;
  SweepResponse response;  // after matching (== unmatched for MatchMode::None)
  FilterMetrics metrics;
  std::optional<MatchSolution> match;
};

/// Build, sweep, match and measure a design. Deterministic.
Evaluation evaluate(const FilterDesign& design, const FrequencyGrid& grid, const MatchPlan& match,
                    const std::vector<Stopband>& stopbands = {}, const MetricsOptions& metrics = {});

/// Names of the resonators a design holds ("A", "B", "A1", ladder names...).
std::vector<std::string> resonator_names(const FilterDesign& design);
MbvdParams& resonator(FilterDesign& design, const std::string& name);
const MbvdParams& resonator(const FilterDesign& design, const std::string& name);

/// Addressable scalar of a design, "<resonator>.<field>". Fields: c0, r0, rs,
/// ls, rm[i], lm[i], cm[i], fs[i] (moves lm at fixed cm) and scale (admittance
/// multiplier applied to the template resonator).
double get_parameter(const FilterDesign& design, const std::string& path);
void set_parameter(FilterDesign& design, const std::string& path, double value);

struct FreeParameter {
  std::string path;
  double lower;
  double upper;
};

struct TargetSpec {
  double f_c_target_hz = 0.0;
  /// Allowed relative centre-frequency error before the f_c term bites.
  double f_c_tolerance = 0.0;
  double fbw_min = 0.1;
  double il_max_db = 1.0;
  double oob_min_db = 0.0;
  std::vector<Stopband> stopbands;
  double w_il = 1.0;
  double w_fbw = 1.0;
  double w_oob = 1.0;
  double w_fc = 1.0;

  void validate() const;
};

/// Hinge-squared cost of measured metrics against a target.
double spec_cost(const FilterMetrics& m, const TargetSpec& spec);

struct OptimizeOptions {
  int starts = 8;
  long budget = 5000;
  std::uint64_t seed = 1;
  MatchPlan match;
  /// Cost assigned when a candidate has no measurable passband.
  double failure_cost = 1e6;
};

struct HistoryEntry {
  long evaluation;
  int start;
  double cost;
  double best_cost;
  std::vector<double> values;
};

struct OptimizeResult {
  FilterDesign best;
  std::vector<double> best_values;
  double best_cost = 0.0;
  std::vector<HistoryEntry> history;
  bool budget_exhausted = false;
};

/// Multi-start Nelder-Mead over the free parameters. Candidates never leave
/// their bounds. Throws InfeasibleBounds for empty or non-finite ranges.
OptimizeResult optimize(const FilterDesign& base, const std::vector<FreeParameter>& free,
                        const TargetSpec& spec, const FrequencyGrid& grid,
                        const OptimizeOptions& options = {});

/// Cost of one parameter vector (used by optimize; exposed for sweeps).
double design_cost(const FilterDesign& base, const std::vector<FreeParameter>& free,
                   const std::vector<double>& values, const TargetSpec& spec, const FrequencyGrid& grid,
                   const OptimizeOptions& options);

FilterDesign apply_parameters(const FilterDesign& base, const std::vector<FreeParameter>& free,
                              const std::vector<double>& values);

}  // namespace xlat
