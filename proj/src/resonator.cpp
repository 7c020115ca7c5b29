#include "xlat/resonator.hpp"

#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "xlat/errors.hpp"

namespace xlat {

namespace {

constexpr double kMinSeparation = 1e-3;  // relative spacing of branch resonances
constexpr double kLargeAdmittance = 1e300;

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

void check_distinct(const std::vector<MotionalBranch>& branches) {
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (branches[i].is_null()) continue;
    const double fi = series_resonance(branches[i]);
    for (std::size_t j = i + 1; j < branches.size(); ++j) {
      if (branches[j].is_null()) continue;
      const double fj = series_resonance(branches[j]);
      if (std::abs(fi - fj) <= kMinSeparation * std::max(fi, fj)) {
        std::ostringstream os;
        os << "branches " << i << " and " << j << " resonate within 0.1 % (" << fi << " Hz, " << fj
           << " Hz)";
        fail(ErrorCode::DuplicateResonance, os.str());
      }
    }
  }
}

}  // namespace

std::string ModeLabel::str() const {
  return (family == ModeFamily::Symmetric ? "S" : "A") + std::to_string(order);
}

ModeLabel ModeLabel::parse(const std::string& text) {
  if (text.size() < 2 || (text[0] != 'S' && text[0] != 'A')) {
    fail(ErrorCode::InvalidArgument, "mode label '" + text + "' must look like S2 or A1");
  }
  int order = 0;
  for (std::size_t i = 1; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') fail(ErrorCode::InvalidArgument, "bad mode label '" + text + "'");
    order = order * 10 + (text[i] - '0');
  }
  if (order < 1) fail(ErrorCode::InvalidArgument, "mode order must be >= 1");
  return {text[0] == 'S' ? ModeFamily::Symmetric : ModeFamily::Antisymmetric, order};
}

void MotionalBranch::validate() const {
  if (!finite_nonneg(rm)) fail(ErrorCode::InvalidArgument, "rm must be >= 0");
  if (!finite_nonneg(cm)) fail(ErrorCode::InvalidArgument, "cm must be >= 0");
  if (!is_null() && !(lm > 0.0 && std::isfinite(lm))) fail(ErrorCode::InvalidArgument, "lm must be > 0");
  if (mode.order < 1) fail(ErrorCode::InvalidArgument, "mode order must be >= 1");
}

void MbvdParams::validate() const {
  if (!(c0 > 0.0) || !std::isfinite(c0)) fail(ErrorCode::InvalidArgument, "c0 must be > 0");
  if (!finite_nonneg(r0) || !finite_nonneg(rs) || !finite_nonneg(ls)) {
    fail(ErrorCode::InvalidArgument, "r0, rs and ls must be >= 0");
  }
  if (branches.empty()) fail(ErrorCode::InvalidArgument, "mBVD model needs at least one motional branch");
  for (const auto& b : branches) b.validate();
  check_distinct(branches);
}

void ResonatorGeometry::validate() const {
  if (n_e < 1) fail(ErrorCode::InvalidArgument, "electrode count must be >= 1");
  for (double v : {l_e, w_e, w_g, t1, t2}) {
    if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorCode::InvalidArgument, "geometry lengths must be > 0");
  }
}

double area_ratio(const ResonatorGeometry& target, const ResonatorGeometry& reference) {
  target.validate();
  reference.validate();
  return target.active_area() / reference.active_area();
}

cplx admittance(const MbvdParams& p, double f_hz) {
  const double w = 2.0 * kPi * f_hz;
  const cplx jwc0(0.0, w * p.c0);
  cplx ycore = jwc0 / (1.0 + jwc0 * p.r0);
  bool shorted = false;
  for (const auto& b : p.branches) {
    if (b.is_null()) continue;
    const cplx zb(b.rm, w * b.lm - 1.0 / (w * b.cm));
    if (zb == cplx{}) {
      shorted = true;
      break;
    }
    ycore += 1.0 / zb;
  }
  const cplx zcore = shorted ? cplx{} : 1.0 / ycore;
  const cplx z = cplx(p.rs, w * p.ls) + zcore;
  if (z == cplx{} || !std::isfinite(std::abs(1.0 / z))) return {kLargeAdmittance, 0.0};
  return 1.0 / z;
}

double series_resonance(const MotionalBranch& b) {
  if (!(b.lm > 0.0) || !(b.cm > 0.0)) {
    fail(ErrorCode::InvalidArgument, "series resonance needs lm > 0 and cm > 0");
  }
  return 1.0 / (2.0 * kPi * std::sqrt(b.lm * b.cm));
}

double antiresonance(const MbvdParams& p, std::size_t branch) {
  if (branch >= p.branches.size()) fail(ErrorCode::InvalidArgument, "branch index out of range");
  const MotionalBranch& b = p.branches[branch];
  const double fs = series_resonance(b);
  const double seed = fs * std::sqrt(1.0 + b.cm / p.c0);
  auto im = [&](double f) { return admittance(p, f).imag(); };

  // Sample points cluster geometrically around the seed so that closely
  // spaced resonance/antiresonance pairs are still resolved.
  std::vector<double> pts{seed};
  for (double d = 1e-9; d <= 0.1; d *= 1.05) {
    pts.push_back(seed * (1.0 - d));
    pts.push_back(seed * (1.0 + d));
  }
  pts.push_back(seed * 0.9);
  pts.push_back(seed * 1.1);
  std::sort(pts.begin(), pts.end());

  double best_lo = 0.0, best_hi = 0.0, best_dist = std::numeric_limits<double>::infinity();
  double prev_f = pts.front();
  double prev_v = im(prev_f);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double v = im(pts[i]);
    if (prev_v < 0.0 && v >= 0.0) {
      const double dist = std::min(std::abs(prev_f - seed), std::abs(pts[i] - seed));
      if (dist < best_dist) {
        best_dist = dist;
        best_lo = prev_f;
        best_hi = pts[i];
      }
    }
    prev_f = pts[i];
    prev_v = v;
  }
  if (!std::isfinite(best_dist)) {
    std::ostringstream os;
    os << "no rising zero of Im{Y} within 10 % of " << seed << " Hz";
    fail(ErrorCode::RootNotBracketed, os.str());
  }
  if (im(best_hi) == 0.0) return best_hi;

  boost::uintmax_t max_iter = 200;
  auto tol = [](double a, double c) { return std::abs(c - a) <= 1e-10 * std::min(a, c); };
  const auto [lo, hi] = boost::math::tools::toms748_solve(im, best_lo, best_hi, tol, max_iter);
  return 0.5 * (lo + hi);
}

double coupling(const MbvdParams& p, std::size_t branch) {
  const double fp = antiresonance(p, branch);
  const double fs = series_resonance(p.branches.at(branch));
  return (fp * fp - fs * fs) / (fp * fp);
}

double quality_factor(const MotionalBranch& b) {
  if (b.rm == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(b.lm / b.cm) / b.rm;
}

MbvdParams scale(const MbvdParams& p, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) fail(ErrorCode::InvalidArgument, "scale factor must be > 0");
  MbvdParams out = p;
  out.c0 = p.c0 * alpha;
  out.r0 = p.r0 / alpha;
  out.rs = p.rs / alpha;
  out.ls = p.ls / alpha;
  for (auto& b : out.branches) {
    b.cm *= alpha;
    b.lm /= alpha;
    b.rm /= alpha;
  }
  return out;
}

MbvdParams add_spur(const MbvdParams& p, const MotionalBranch& spur) {
  spur.validate();
  MbvdParams out = p;
  out.branches.push_back(spur);
  check_distinct(out.branches);
  return out;
}

MotionalBranch branch_from_resonance(double f_s_hz, double cm, double q, ModeLabel mode) {
  if (!(f_s_hz > 0.0) || !(cm > 0.0) || !(q > 0.0)) {
    fail(ErrorCode::InvalidArgument, "branch_from_resonance needs positive f_s, cm and Q");
  }
  const double w = 2.0 * kPi * f_s_hz;
  MotionalBranch b;
  b.cm = cm;
  b.lm = 1.0 / (w * w * cm);
  b.rm = std::isinf(q) ? 0.0 : std::sqrt(b.lm / b.cm) / q;
  b.mode = mode;
  return b;
}

}  // namespace xlat
