#pragma once

#include <utility>
#include <vector>

#include "xlat/netcore.hpp"

namespace xlat {

/// IL reported where |S21| == 0.
inline constexpr double kInfiniteLossDb = 1000.0;

struct Stopband {
  double lo_hz;
  double hi_hz;
};

enum class CenterConvention { Arithmetic, Geometric };

struct MetricsOptions {
  /// A sweep counts as having a passband when min IL is below this.
  double il_floor_db = 40.0;
  /// Band edges sit this far above the minimum IL.
  double band_drop_db = 3.0;
  CenterConvention center = CenterConvention::Arithmetic;
};

struct FilterMetrics {
  double f_lo_hz = 0.0;
  double f_hi_hz = 0.0;
  double f_c_hz = 0.0;
  double il_min_db = 0.0;
  double f_il_min_hz = 0.0;
  double fbw_3db = 0.0;
  /// min IL over each declared stopband, in declaration order.
  std::vector<double> oob_rejection_db;
  double ripple_db = 0.0;

  /// Smallest of the stopband rejections (NaN when no stopbands declared).
  double worst_oob_db() const;
};

/// IL(f) = -20 log10 |S21(f)|.
std::vector<double> insertion_loss_trace(const SweepResponse& r);

double insertion_loss_db(cplx s21);

FilterMetrics extract_metrics(const SweepResponse& r, const std::vector<Stopband>& stopbands = {},
                              const MetricsOptions& options = {});

/// Same extraction on a precomputed IL trace.
FilterMetrics extract_metrics(const FrequencyGrid& grid, const std::vector<double>& il_db,
                              const std::vector<Stopband>& stopbands = {},
                              const MetricsOptions& options = {});

/// Edges to metrics, honoring the center convention.
FilterMetrics metrics_from_edges(double f_lo_hz, double f_hi_hz,
                                 CenterConvention center = CenterConvention::Arithmetic);

}  // namespace xlat
