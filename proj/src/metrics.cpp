#include "xlat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "xlat/errors.hpp"

namespace xlat {

double FilterMetrics::worst_oob_db() const {
  if (oob_rejection_db.empty()) return std::numeric_limits<double>::quiet_NaN();
  return *std::min_element(oob_rejection_db.begin(), oob_rejection_db.end());
}

double insertion_loss_db(cplx s21) {
  const double mag = std::abs(s21);
  if (mag == 0.0) return kInfiniteLossDb;
  return std::min(-20.0 * std::log10(mag), kInfiniteLossDb);
}

std::vector<double> insertion_loss_trace(const SweepResponse& r) {
  if (r.kind() != ParamKind::S) fail(ErrorCode::KindMismatch, "insertion loss needs an S sweep");
  std::vector<double> il(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) il[i] = insertion_loss_db(r.matrix(i)(1, 0));
  return il;
}

FilterMetrics metrics_from_edges(double f_lo_hz, double f_hi_hz, CenterConvention center) {
  if (!(f_lo_hz > 0.0) || !(f_hi_hz > f_lo_hz)) {
    fail(ErrorCode::InvalidArgument, "band edges must satisfy 0 < f_lo < f_hi");
  }
  FilterMetrics m;
  m.f_lo_hz = f_lo_hz;
  m.f_hi_hz = f_hi_hz;
  m.f_c_hz = center == CenterConvention::Arithmetic ? 0.5 * (f_lo_hz + f_hi_hz)
                                                   : std::sqrt(f_lo_hz * f_hi_hz);
  m.fbw_3db = (f_hi_hz - f_lo_hz) / m.f_c_hz;
  return m;
}

FilterMetrics extract_metrics(const SweepResponse& r, const std::vector<Stopband>& stopbands,
                              const MetricsOptions& options) {
  return extract_metrics(r.grid(), insertion_loss_trace(r), stopbands, options);
}

FilterMetrics extract_metrics(const FrequencyGrid& grid, const std::vector<double>& il,
                              const std::vector<Stopband>& stopbands, const MetricsOptions& options) {
  if (il.size() != grid.size()) fail(ErrorCode::InvalidArgument, "IL trace length mismatch");
  const std::size_t n = il.size();
  const std::size_t imin = static_cast<std::size_t>(std::min_element(il.begin(), il.end()) - il.begin());
  const double il_min = il[imin];
  if (!(il_min < options.il_floor_db)) {
    std::ostringstream os;
    os << "minimum insertion loss " << il_min << " dB is above the " << options.il_floor_db
       << " dB passband floor";
    fail(ErrorCode::NoPassband, os.str());
  }
  const double level = il_min + options.band_drop_db;

  // Walk outwards from the minimum until IL exceeds the band level.
  std::size_t lo = imin;
  while (lo > 0 && il[lo - 1] <= level) --lo;
  std::size_t hi = imin;
  while (hi + 1 < n && il[hi + 1] <= level) ++hi;
  if (lo == 0 || hi + 1 == n) {
    fail(ErrorCode::BandTouchesSweepEdge, "3-dB band edge lies outside the sweep; widen the grid");
  }
  auto cross = [&](std::size_t inside, std::size_t outside) {
    const double t = (level - il[inside]) / (il[outside] - il[inside]);
    return grid[inside] + t * (grid[outside] - grid[inside]);
  };
  FilterMetrics m = metrics_from_edges(cross(lo, lo - 1), cross(hi, hi + 1), options.center);
  m.il_min_db = il_min;
  m.f_il_min_hz = grid[imin];

  const auto [mn, mx] = std::minmax_element(il.begin() + static_cast<std::ptrdiff_t>(lo),
                                            il.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
  m.ripple_db = *mx - *mn;

  for (const auto& sb : stopbands) {
    if (!(sb.hi_hz > sb.lo_hz)) fail(ErrorCode::InvalidArgument, "stopband must satisfy lo < hi");
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (grid[i] >= sb.lo_hz && grid[i] <= sb.hi_hz) worst = std::min(worst, il[i]);
    }
    if (!std::isfinite(worst)) {
      std::ostringstream os;
      os << "stopband [" << sb.lo_hz << ", " << sb.hi_hz << "] Hz contains no sweep points";
      fail(ErrorCode::InvalidArgument, os.str());
    }
    m.oob_rejection_db.push_back(worst);
  }
  return m;
}

}  // namespace xlat
