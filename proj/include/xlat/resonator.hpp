#pragma once

#include <string>
#include <vector>

#include "xlat/netcore.hpp"

namespace xlat {

enum class ModeFamily { Symmetric, Antisymmetric };

/// Lamb-mode tag such as S2, A1 or A3.
struct ModeLabel {
  ModeFamily family = ModeFamily::Symmetric;
  int order = 1;

  std::string str() const;
  static ModeLabel parse(const std::string& text);

  friend bool operator==(const ModeLabel&, const ModeLabel&) = default;
};

/// One motional R-L-C branch. A branch with cm == 0 is an open (null) branch.
struct MotionalBranch {
  double rm = 0.0;  // ohm
  double lm = 0.0;  // H
  double cm = 0.0;  // F
  ModeLabel mode;

  void validate() const;
  bool is_null() const noexcept { return cm == 0.0; }
};

/// Multi-branch modified Butterworth-Van Dyke model:
/// (rs + ls) in series with [(r0 + c0) || branch_1 || ... || branch_N].
struct MbvdParams {
  double c0 = 0.0;  // F
  double r0 = 0.0;  // ohm
  double rs = 0.0;  // ohm
  double ls = 0.0;  // H
  std::vector<MotionalBranch> branches;

  void validate() const;
};

/// Electrode layout metadata. Only used to express area ratios.
struct ResonatorGeometry {
  int n_e = 0;         // electrode count
  double l_e = 0.0;    // electrode length, m
  double w_e = 0.0;    // electrode width, m
  double w_g = 0.0;    // gap width, m
  double t1 = 0.0;     // bottom film thickness, m
  double t2 = 0.0;     // top film thickness, m

  double pitch() const noexcept { return w_e + w_g; }
  /// Active-area proxy n_e * l_e.
  double active_area() const noexcept { return static_cast<double>(n_e) * l_e; }
  void validate() const;
};

/// Admittance ratio implied by two layouts (proportional to n_e * l_e).
double area_ratio(const ResonatorGeometry& target, const ResonatorGeometry& reference);

/// Admittance in siemens. At an exact lossless series resonance the result is
/// a large finite value rather than infinity.
cplx admittance(const MbvdParams& p, double f_hz);

double series_resonance(const MotionalBranch& b);

/// Branch antiresonance. Closed form seed f_s*sqrt(1 + cm/c0), refined to the
/// nearest rising zero of Im{Y} within +/-10 % of the seed.
double antiresonance(const MbvdParams& p, std::size_t branch);

/// k^2 = (f_p^2 - f_s^2) / f_p^2.
double coupling(const MbvdParams& p, std::size_t branch);

/// Branch quality factor (1/rm) * sqrt(lm/cm); infinite for rm == 0.
double quality_factor(const MotionalBranch& b);

/// Parameters whose admittance is exactly alpha * Y(f).
MbvdParams scale(const MbvdParams& p, double alpha);

/// Append a spurious-mode branch; throws DuplicateResonance when its series
/// resonance sits within 0.1 % of an existing branch.
MbvdParams add_spur(const MbvdParams& p, const MotionalBranch& spur);

/// Motional branch with series resonance f_s and the given cm.
MotionalBranch branch_from_resonance(double f_s_hz, double cm, double q, ModeLabel mode);

}  // namespace xlat
