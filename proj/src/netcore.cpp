#include "xlat/netcore.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "xlat/errors.hpp"

namespace xlat {

namespace {

constexpr double kSingularRatio = 1e-15;

// Every two-port is held here as two linear constraints on the port
// quantities x = [V1, V2, I1, I2]: mv * V + mi * I = 0.
struct Implicit {
  Matrix2c mv;
  Matrix2c mi;
};

void check_refs(const RefPair& refs) {
  for (const auto& z : refs) {
    if (!(z.real() > 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      std::ostringstream os;
      os << "reference impedance " << z << " must have a positive, finite real part";
      fail(ErrorCode::NonPositiveReference, os.str());
    }
  }
}

void check_finite(const Matrix2c& m) {
  for (int i = 0; i < 4; ++i) {
    const cplx v = m(i / 2, i % 2);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      fail(ErrorCode::InvalidArgument, "two-port matrix has non-finite entries");
    }
  }
}

// Scale-free singularity test: the row scaling of the constraint pair is
// arbitrary, so compare det(n) against the norms of the full constraint rows.
Matrix2c solve_block(const Matrix2c& n, const Matrix2c& rhs, const Implicit& imp,
                     const char* what) {
  const double row0 = std::sqrt(imp.mv.row(0).squaredNorm() + imp.mi.row(0).squaredNorm());
  const double row1 = std::sqrt(imp.mv.row(1).squaredNorm() + imp.mi.row(1).squaredNorm());
  const cplx det = n.determinant();
  if (std::abs(det) < kSingularRatio * row0 * row1) {
    fail(ErrorCode::SingularConversion, std::string("matrix is singular for conversion to ") + what);
  }
  Matrix2c inv;
  inv << n(1, 1), -n(0, 1), -n(1, 0), n(0, 0);
  return (inv / det) * rhs;
}

// Power waves: V = diag(Z*/sqrt(R)) a + diag(Z/sqrt(R)) b,  I = diag(1/sqrt(R)) (a - b).
struct WaveMaps {
  Matrix2c va, vb, ia, ib;
};

WaveMaps wave_maps(const RefPair& refs) {
  WaveMaps w;
  w.va.setZero();
  w.vb.setZero();
  w.ia.setZero();
  w.ib.setZero();
  for (int k = 0; k < 2; ++k) {
    const double sr = std::sqrt(refs[k].real());
    w.va(k, k) = std::conj(refs[k]) / sr;
    w.vb(k, k) = refs[k] / sr;
    w.ia(k, k) = 1.0 / sr;
    w.ib(k, k) = -1.0 / sr;
  }
  return w;
}

Implicit to_implicit(const TwoPortMatrix& t) {
  const Matrix2c& m = t.m();
  const Matrix2c id = Matrix2c::Identity();
  switch (t.kind()) {
    case ParamKind::Y:
      return {-m, id};
    case ParamKind::Z:
      return {id, -m};
    case ParamKind::ABCD: {
      // V1 - A V2 + B I2 = 0,  I1 - C V2 + D I2 = 0
      Implicit imp;
      imp.mv << 1.0, -m(0, 0), 0.0, -m(1, 0);
      imp.mi << 0.0, m(0, 1), 1.0, m(1, 1);
      return imp;
    }
    case ParamKind::S: {
      // a = Da (V + Zr I), b = Da (V - Zr* I); constraint b - S a = 0.
      Matrix2c da = Matrix2c::Zero();
      Matrix2c zr = Matrix2c::Zero();
      Matrix2c zc = Matrix2c::Zero();
      for (int k = 0; k < 2; ++k) {
        da(k, k) = 0.5 / std::sqrt(t.refs()[k].real());
        zr(k, k) = t.refs()[k];
        zc(k, k) = std::conj(t.refs()[k]);
      }
      return {da - m * da, -da * zc - m * da * zr};
    }
  }
  return {};
}

TwoPortMatrix from_implicit(const Implicit& imp, ParamKind target, const RefPair& refs) {
  switch (target) {
    case ParamKind::Y:
      return TwoPortMatrix::y(solve_block(imp.mi, -imp.mv, imp, "Y"));
    case ParamKind::Z:
      return TwoPortMatrix::z(solve_block(imp.mv, -imp.mi, imp, "Z"));
    case ParamKind::ABCD: {
      Matrix2c left, right;
      left << imp.mv(0, 0), imp.mi(0, 0), imp.mv(1, 0), imp.mi(1, 0);
      right << imp.mv(0, 1), imp.mi(0, 1), imp.mv(1, 1), imp.mi(1, 1);
      Matrix2c k = solve_block(left, -right, imp, "ABCD");
      k.col(1) = -k.col(1);
      return TwoPortMatrix::abcd(k);
    }
    case ParamKind::S: {
      const WaveMaps w = wave_maps(refs);
      const Matrix2c na = imp.mv * w.va + imp.mi * w.ia;
      const Matrix2c nb = imp.mv * w.vb + imp.mi * w.ib;
      return TwoPortMatrix::s(solve_block(nb, -na, imp, "S"), refs);
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown parameter kind");
}

}  // namespace

FrequencyGrid::FrequencyGrid(std::vector<double> points, Spacing spacing)
    : points_(std::move(points)), spacing_(spacing) {
  if (points_.size() < 2) fail(ErrorCode::InvalidArgument, "frequency grid needs at least 2 points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i] > 0.0) || !std::isfinite(points_[i])) {
      fail(ErrorCode::InvalidArgument, "frequency grid points must be positive and finite");
    }
    if (i > 0 && !(points_[i] > points_[i - 1])) {
      fail(ErrorCode::NonMonotoneFrequency, "frequency grid must be strictly increasing");
    }
  }
}

FrequencyGrid FrequencyGrid::linear(double start_hz, double stop_hz, std::size_t n) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "frequency grid needs at least 2 points");
  std::vector<double> pts(n);
  const double step = (stop_hz - start_hz) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) pts[i] = start_hz + step * static_cast<double>(i);
  pts.back() = stop_hz;
  return FrequencyGrid(std::move(pts), Spacing::Linear);
}

FrequencyGrid FrequencyGrid::logarithmic(double start_hz, double stop_hz, std::size_t n) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "frequency grid needs at least 2 points");
  if (!(start_hz > 0.0) || !(stop_hz > 0.0)) {
    fail(ErrorCode::InvalidArgument, "logarithmic grid bounds must be positive");
  }
  std::vector<double> pts(n);
  const double l0 = std::log(start_hz);
  const double step = (std::log(stop_hz) - l0) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) pts[i] = std::exp(l0 + step * static_cast<double>(i));
  pts.front() = start_hz;
  pts.back() = stop_hz;
  return FrequencyGrid(std::move(pts), Spacing::Logarithmic);
}

FrequencyGrid FrequencyGrid::scaled(double factor) const {
  if (!(factor > 0.0)) fail(ErrorCode::InvalidArgument, "grid scale factor must be positive");
  std::vector<double> pts(points_);
  for (double& p : pts) p *= factor;
  return FrequencyGrid(std::move(pts), spacing_);
}

const char* to_string(ParamKind kind) noexcept {
  switch (kind) {
    case ParamKind::S: return "S";
    case ParamKind::Y: return "Y";
    case ParamKind::Z: return "Z";
    case ParamKind::ABCD: return "ABCD";
  }
  return "?";
}

TwoPortMatrix::TwoPortMatrix(ParamKind kind, const Matrix2c& m, RefPair refs)
    : kind_(kind), m_(m), refs_(refs) {
  check_finite(m_);
  if (kind_ == ParamKind::S) check_refs(refs_);
}

TwoPortMatrix TwoPortMatrix::s(const Matrix2c& m, RefPair refs) {
  return TwoPortMatrix(ParamKind::S, m, refs);
}
TwoPortMatrix TwoPortMatrix::y(const Matrix2c& m) {
  return TwoPortMatrix(ParamKind::Y, m, {cplx{50.0}, cplx{50.0}});
}
TwoPortMatrix TwoPortMatrix::z(const Matrix2c& m) {
  return TwoPortMatrix(ParamKind::Z, m, {cplx{50.0}, cplx{50.0}});
}
TwoPortMatrix TwoPortMatrix::abcd(const Matrix2c& m) {
  return TwoPortMatrix(ParamKind::ABCD, m, {cplx{50.0}, cplx{50.0}});
}

TwoPortMatrix convert(const TwoPortMatrix& m, ParamKind target, RefPair refs) {
  if (target == ParamKind::S) check_refs(refs);
  if (m.kind() == target) {
    if (target != ParamKind::S) return m;
    return renormalize(m, refs);
  }
  return from_implicit(to_implicit(m), target, refs);
}

TwoPortMatrix cascade(const TwoPortMatrix& a, const TwoPortMatrix& b) {
  if (a.kind() != ParamKind::ABCD || b.kind() != ParamKind::ABCD) {
    fail(ErrorCode::KindMismatch, "cascade requires two ABCD matrices");
  }
  return TwoPortMatrix::abcd(a.m() * b.m());
}

TwoPortMatrix renormalize(const TwoPortMatrix& s, RefPair new_refs) {
  if (s.kind() != ParamKind::S) fail(ErrorCode::KindMismatch, "renormalize requires an S matrix");
  check_refs(new_refs);
  if (s.refs() == new_refs) return s;
  return from_implicit(to_implicit(s), ParamKind::S, new_refs);
}

double passivity_margin(const TwoPortMatrix& s) {
  if (s.kind() != ParamKind::S) fail(ErrorCode::KindMismatch, "passivity margin requires an S matrix");
  const Matrix2c h = Matrix2c::Identity() - s.m().adjoint() * s.m();
  // Hermitian 2x2: closed-form smaller eigenvalue.
  const double a = h(0, 0).real();
  const double d = h(1, 1).real();
  const double half = 0.5 * (a - d);
  return 0.5 * (a + d) - std::sqrt(half * half + std::norm(h(0, 1)));
}

TwoPortMatrix abcd_series(cplx z) {
  Matrix2c m;
  m << 1.0, z, 0.0, 1.0;
  return TwoPortMatrix::abcd(m);
}

TwoPortMatrix abcd_shunt(cplx y) {
  Matrix2c m;
  m << 1.0, 0.0, y, 1.0;
  return TwoPortMatrix::abcd(m);
}

bool refs_are_real(const RefPair& refs) noexcept {
  return refs[0].imag() == 0.0 && refs[1].imag() == 0.0;
}

SweepResponse::SweepResponse(FrequencyGrid grid, ParamKind kind, std::vector<Matrix2c> data,
                             RefPair refs)
    : grid_(std::move(grid)), kind_(kind), data_(std::move(data)), refs_(refs) {
  if (data_.size() != grid_.size()) {
    fail(ErrorCode::InvalidArgument, "sweep data length does not match the frequency grid");
  }
  if (kind_ == ParamKind::S) check_refs(refs_);
  for (const auto& m : data_) check_finite(m);
}

TwoPortMatrix SweepResponse::at(std::size_t i) const {
  switch (kind_) {
    case ParamKind::S: return TwoPortMatrix::s(data_[i], refs_);
    case ParamKind::Y: return TwoPortMatrix::y(data_[i]);
    case ParamKind::Z: return TwoPortMatrix::z(data_[i]);
    case ParamKind::ABCD: return TwoPortMatrix::abcd(data_[i]);
  }
  fail(ErrorCode::InvalidArgument, "unknown parameter kind");
}

std::vector<cplx> SweepResponse::entry(int row, int col) const {
  std::vector<cplx> out(data_.size());
  std::transform(data_.begin(), data_.end(), out.begin(),
                 [&](const Matrix2c& m) { return m(row, col); });
  return out;
}

SweepResponse convert(const SweepResponse& r, ParamKind target, RefPair refs) {
  std::vector<Matrix2c> out;
  out.reserve(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out.push_back(convert(r.at(i), target, refs).m());
  return SweepResponse(r.grid(), target, std::move(out), target == ParamKind::S ? refs : r.refs());
}

SweepResponse renormalize(const SweepResponse& r, RefPair new_refs) {
  if (r.kind() != ParamKind::S) fail(ErrorCode::KindMismatch, "renormalize requires an S sweep");
  check_refs(new_refs);
  std::vector<Matrix2c> out;
  out.reserve(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out.push_back(renormalize(r.at(i), new_refs).m());
  return SweepResponse(r.grid(), ParamKind::S, std::move(out), new_refs);
}

double passivity_margin(const SweepResponse& r) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < r.size(); ++i) worst = std::min(worst, passivity_margin(r.at(i)));
  return worst;
}

}  // namespace xlat
