#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xlat/netcore.hpp"
#include "xlat/resonator.hpp"

namespace xlat {

/// One-port admittance data (measured or synthetic).
struct MeasuredOnePort {
  FrequencyGrid grid;
  std::vector<cplx> admittance;
  std::string source;

  void validate() const;
};

/// Y = (1 - S11) / (Z0 (1 + S11)).
MeasuredOnePort one_port_from_s11(const FrequencyGrid& grid, const std::vector<cplx>& s11, double z0,
                                  std::string source);
std::vector<cplx> s11_from_admittance(const std::vector<cplx>& y, double z0);

/// Synthetic data from a model, with optional multiplicative complex
/// Gaussian noise of relative standard deviation `noise_rel`.
MeasuredOnePort synthesize_one_port(const MbvdParams& p, const FrequencyGrid& grid,
                                    double noise_rel = 0.0, std::uint64_t seed = 0);

struct GuessOptions {
  /// Peaks of log10|Y| smaller than this prominence are ignored.
  double min_prominence_decades = 0.05;
};

/// Seeds for fit_mbvd: branch resonances at the most prominent |Y| peaks,
/// ordered by frequency. Throws InsufficientPeaks.
MbvdParams initial_guess(const MeasuredOnePort& m, std::size_t n_branches,
                         const GuessOptions& options = {});

struct FitOptions {
  int max_iterations = 2000;
  /// Relative objective improvement over 50 iterations that counts as converged.
  double tolerance = 1e-10;
  int restarts = 8;
  std::uint64_t seed = 1;
  /// Weight w(f) on the log-magnitude term within +/-peak_window of each
  /// seeded branch resonance (1 = uniform weighting).
  double peak_weight = 1.0;
  double peak_window = 0.02;
  /// Capacitances are kept within [c_lower, c_upper] x their seed value.
  double c_lower = 0.01;
  double c_upper = 100.0;
};

struct FitResult {
  MbvdParams params;
  double residual_rms = 0.0;
  double objective = 0.0;
  /// |f_s(fit) - f_peak(data)| / f_peak(data) per branch.
  std::vector<double> branch_frequency_errors;
  bool converged = false;
  int iterations = 0;
  int best_restart = 0;
};

/// Minimizes sum w(f)(log|Ym| - log|Yd|)^2 + (arg Ym - arg Yd)^2 by
/// multi-start Nelder-Mead. Non-convergence is reported through the
/// `converged` flag; a non-passive result throws PassivityViolation.
FitResult fit_mbvd(const MeasuredOnePort& m, const MbvdParams& init, const FitOptions& options = {});

/// Objective value of `p` against the data.
double fit_objective(const MeasuredOnePort& m, const MbvdParams& p, const std::vector<double>& weights);

/// One-port passivity margin min_f (1 - |S11|^2) at reference z0.
double one_port_passivity_margin(const MbvdParams& p, const FrequencyGrid& grid, double z0 = 50.0);

/// Standing caveat attached to fit reports.
inline constexpr const char* kFitLossCaveat =
    "series and static loss resistances (rs, r0) come from curve fitting alone and need not "
    "reflect physical loss mechanisms";

}  // namespace xlat
