#pragma once

#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "xlat/errors.hpp"
#include "xlat/netcore.hpp"
#include "xlat/resonator.hpp"

namespace xt {

using xlat::cplx;
using xlat::Matrix2c;

inline double max_abs_diff(const Matrix2c& a, const Matrix2c& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline double rel_diff(const Matrix2c& a, const Matrix2c& b) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff());
  return scale == 0.0 ? 0.0 : max_abs_diff(a, b) / scale;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

inline cplx random_cplx(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng)};
}

/// A well-behaved single-branch resonator near f_s with coupling k2.
inline xlat::MbvdParams resonator(double fs, double k2 = 0.3, double c0 = 100e-15, double q = 200.0,
                                  double rs = 0.5, double r0 = 0.3) {
  xlat::MbvdParams p;
  p.c0 = c0;
  p.r0 = r0;
  p.rs = rs;
  p.branches.push_back(xlat::branch_from_resonance(fs, c0 * k2 / (1.0 - k2), q, xlat::ModeLabel::parse("S2")));
  return p;
}

inline xlat::MbvdParams lossless(xlat::MbvdParams p) {
  p.r0 = p.rs = 0.0;
  for (auto& b : p.branches) b.rm = 0.0;
  return p;
}

// Error-code check that keeps the code in the failure message.
#define XT_CHECK_CODE(expr, expected)                                     \
  do {                                                                    \
    bool thrown_ = false;                                                 \
    try {                                                                 \
      (void)(expr);                                                       \
    } catch (const xlat::Error& e_) {                                     \
      thrown_ = true;                                                     \
      CHECK_MESSAGE(e_.code() == (expected), e_.what());                  \
    }                                                                     \
    CHECK_MESSAGE(thrown_, "expected " << std::string(xlat::to_string(expected)));     \
  } while (0)

}  // namespace xt
