#include "xlat/matching.hpp"

#include <cmath>
#include <limits>

#include "xlat/errors.hpp"

namespace xlat {

namespace {

constexpr double kTinyC = 1e-15;
constexpr double kUnitTol = 1e-12;

double equal_real_reference(const TwoPortMatrix& s) {
  if (s.kind() != ParamKind::S) fail(ErrorCode::KindMismatch, "conjugate match needs an S matrix");
  if (!refs_are_real(s.refs()) || s.refs()[0] != s.refs()[1]) {
    fail(ErrorCode::InvalidArgument, "conjugate match needs equal real reference impedances");
  }
  return s.refs()[0].real();
}

double rollett_or_inf(const TwoPortMatrix& s) {
  if (s(0, 1) * s(1, 0) == cplx{}) return std::numeric_limits<double>::infinity();
  return rollett_k(s);
}

}  // namespace

double rollett_k(const TwoPortMatrix& s) {
  if (s.kind() != ParamKind::S) fail(ErrorCode::KindMismatch, "Rollett K needs an S matrix");
  const cplx s12s21 = s(0, 1) * s(1, 0);
  if (s12s21 == cplx{}) fail(ErrorCode::UnilateralNetwork, "S12*S21 = 0, K is undefined");
  const cplx delta = s(0, 0) * s(1, 1) - s12s21;
  return (1.0 - std::norm(s(0, 0)) - std::norm(s(1, 1)) + std::norm(delta)) / (2.0 * std::abs(s12s21));
}

double max_available_gain(const TwoPortMatrix& s) {
  const double k = rollett_k(s);
  if (k < 1.0) throw InfeasibleMatchError(k);
  return std::abs(s(1, 0) / s(0, 1)) * (k - std::sqrt(k * k - 1.0));
}

MatchSolution conjugate_match(const TwoPortMatrix& s, double f_design_hz) {
  const double z0 = equal_real_reference(s);
  MatchSolution sol;
  sol.f_design_hz = f_design_hz;
  sol.z0 = z0;
  sol.delta = s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  sol.rollett_k = rollett_or_inf(s);
  sol.feasible = true;

  bool on_circle[2] = {false, false};
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    const cplx sii = s(i, i);
    const cplx sjj = s(j, j);
    const double b = 1.0 + std::norm(sii) - std::norm(sjj) - std::norm(sol.delta);
    const cplx c = sii - sol.delta * std::conj(sjj);
    sol.b[i] = b;
    sol.c[i] = c;

    double disc = b * b - 4.0 * std::norm(c);
    if (disc < 0.0) {
      if (disc < -kUnitTol * std::max(1.0, b * b)) throw InfeasibleMatchError(sol.rollett_k);
      disc = 0.0;
    }
    if (std::abs(c) < kTinyC) {
      sol.gamma_m[i] = 0.0;
    } else {
      const double root = std::sqrt(disc);
      const cplx minus = (b - root) / (2.0 * c);
      const cplx plus = (b + root) / (2.0 * c);
      sol.gamma_m[i] = std::abs(minus) <= 1.0 ? minus : plus;
      on_circle[i] = std::abs(std::abs(minus) - 1.0) <= kUnitTol && std::abs(std::abs(plus) - 1.0) <= kUnitTol;
    }

    const cplx den = 1.0 - sol.gamma_m[i];
    if (std::abs(den) < kTinyC) {
      sol.z0_match[i] = std::nullopt;
    } else {
      sol.z0_match[i] = z0 * (1.0 + sol.gamma_m[i]) / den;
    }
  }
  sol.boundary = on_circle[0] || on_circle[1];
  return sol;
}

SweepResponse apply_match(const SweepResponse& r, const MatchSolution& sol) {
  if (!sol.feasible) throw InfeasibleMatchError(sol.rollett_k);
  if (sol.degenerate()) {
    fail(ErrorCode::DegenerateDenominator, "matched impedance diverges (match at an open circuit)");
  }
  const RefPair refs{*sol.z0_match[0], *sol.z0_match[1]};
  for (const auto& z : refs) {
    if (!(z.real() > 0.0)) fail(ErrorCode::NonPositiveMatchResistance, "matched impedance has Re <= 0");
  }
  return renormalize(r, refs);
}

std::size_t max_transmission_index(const SweepResponse& r) {
  if (r.kind() != ParamKind::S) fail(ErrorCode::KindMismatch, "sweep must hold S parameters");
  std::size_t best = 0;
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (std::abs(r.matrix(i)(1, 0)) > std::abs(r.matrix(best)(1, 0))) best = i;
  }
  return best;
}

MatchSolution conjugate_match(const SweepResponse& r, std::optional<double> at_hz) {
  std::size_t idx = 0;
  if (at_hz) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double d = std::abs(r.grid()[i] - *at_hz);
      if (d < best) {
        best = d;
        idx = i;
      }
    }
  } else {
    idx = max_transmission_index(r);
  }
  return conjugate_match(r.at(idx), r.grid()[idx]);
}

cplx input_reflection(const TwoPortMatrix& s, cplx gamma_l) {
  return s(0, 0) + s(0, 1) * s(1, 0) * gamma_l / (1.0 - s(1, 1) * gamma_l);
}

cplx output_reflection(const TwoPortMatrix& s, cplx gamma_s) {
  return s(1, 1) + s(0, 1) * s(1, 0) * gamma_s / (1.0 - s(0, 0) * gamma_s);
}

LSection synthesize_l_section(cplx z_load, double r_source, double f_hz) {
  const double rl = z_load.real();
  const double xl = z_load.imag();
  if (!(rl > 0.0) || !(r_source > 0.0) || !(f_hz > 0.0)) {
    fail(ErrorCode::InvalidArgument, "L-section needs Re{Z_L} > 0, R_source > 0 and f > 0");
  }
  const double w = 2.0 * kPi * f_hz;
  double b = 0.0;
  double x = 0.0;
  LSection out;
  if (rl > r_source) {
    // shunt susceptance across the load, series reactance toward the source
    const double mag2 = rl * rl + xl * xl;
    b = (xl + std::sqrt(rl / r_source) * std::sqrt(mag2 - r_source * rl)) / mag2;
    x = 1.0 / b + xl * r_source / rl - r_source / (b * rl);
    out.shunt_at_load = true;
  } else {
    // series reactance at the load, shunt susceptance across the source
    x = std::sqrt(rl * (r_source - rl)) - xl;
    b = std::sqrt((r_source - rl) / rl) / r_source;
    out.shunt_at_load = false;
  }
  if (b >= 0.0) {
    out.shunt_kind = LSection::Element::Capacitor;
    out.shunt_value = b / w;
  } else {
    out.shunt_kind = LSection::Element::Inductor;
    out.shunt_value = -1.0 / (w * b);
  }
  if (x >= 0.0) {
    out.series_kind = LSection::Element::Inductor;
    out.series_value = x / w;
  } else {
    out.series_kind = LSection::Element::Capacitor;
    out.series_value = -1.0 / (w * x);
  }
  return out;
}

}  // namespace xlat
