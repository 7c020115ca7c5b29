#pragma once

#include <array>
#include <optional>

#include "xlat/netcore.hpp"

namespace xlat {

/// Simultaneous conjugate match of a two-port measured against a real Z0.
struct MatchSolution {
  double f_design_hz = 0.0;
  double z0 = 50.0;
  std::array<cplx, 2> gamma_m{};
  /// Source/load impedances Z0 (1 + G) / (1 - G); empty where 1 - G vanishes
  /// (the match degenerates to an open circuit).
  std::array<std::optional<cplx>, 2> z0_match{};
  std::array<double, 2> b{};
  std::array<cplx, 2> c{};
  cplx delta{};
  double rollett_k = 0.0;
  /// B_i^2 - 4|C_i|^2 >= 0 at both ports.
  bool feasible = false;
  /// Both quadratic roots lie on the unit circle (K = 1 boundary).
  bool boundary = false;

  bool degenerate() const noexcept { return !z0_match[0] || !z0_match[1]; }
};

/// Rollett stability factor. Throws UnilateralNetwork when S12*S21 == 0.
double rollett_k(const TwoPortMatrix& s);

/// Maximum available gain |S21/S12| (K - sqrt(K^2 - 1)); requires K >= 1.
double max_available_gain(const TwoPortMatrix& s);

/// Throws InfeasibleMatchError when no simultaneous match exists.
MatchSolution conjugate_match(const TwoPortMatrix& s, double f_design_hz = 0.0);

/// Renormalize a sweep to the matched impedances. Throws DegenerateDenominator
/// or NonPositiveMatchResistance when the solution cannot be applied.
SweepResponse apply_match(const SweepResponse& r, const MatchSolution& sol);

/// Index of the largest |S21| in the sweep (default match frequency).
std::size_t max_transmission_index(const SweepResponse& r);

/// Solve at the max-|S21| point (or the grid point nearest `at_hz`).
MatchSolution conjugate_match(const SweepResponse& r, std::optional<double> at_hz = std::nullopt);

/// Input reflection with port 2 terminated in a load of reflection gamma_l.
cplx input_reflection(const TwoPortMatrix& s, cplx gamma_l);
/// Output reflection with port 1 driven from a source of reflection gamma_s.
cplx output_reflection(const TwoPortMatrix& s, cplx gamma_s);

/// Lossless two-element L-section matching a load to a real source resistance.
struct LSection {
  enum class Element { Inductor, Capacitor };
  /// The element next to the load; `shunt_at_load` tells where it sits.
  bool shunt_at_load = true;
  Element shunt_kind = Element::Capacitor;
  double shunt_value = 0.0;  // H or F
  Element series_kind = Element::Inductor;
  double series_value = 0.0;  // H or F
};

/// One of the (up to two) L-section solutions; throws InvalidArgument when
/// the load has a non-positive real part.
LSection synthesize_l_section(cplx z_load, double r_source, double f_hz);

}  // namespace xlat
