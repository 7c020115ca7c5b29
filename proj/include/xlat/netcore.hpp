#pragma once

#include <Eigen/Core>
#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace xlat {

using cplx = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using RefPair = std::array<cplx, 2>;

inline constexpr double kPi = 3.14159265358979323846;

enum class Spacing { Linear, Logarithmic };

/// Strictly increasing list of positive frequencies (Hz), at least two points.
class FrequencyGrid {
 public:
  FrequencyGrid(std::vector<double> points, Spacing spacing);

  static FrequencyGrid linear(double start_hz, double stop_hz, std::size_t n);
  static FrequencyGrid logarithmic(double start_hz, double stop_hz, std::size_t n);

  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }
  std::span<const double> points() const noexcept { return points_; }
  Spacing spacing() const noexcept { return spacing_; }

  /// Every point multiplied by `factor` (> 0).
  FrequencyGrid scaled(double factor) const;

 private:
  std::vector<double> points_;
  Spacing spacing_;
};

enum class ParamKind { S, Y, Z, ABCD };

const char* to_string(ParamKind kind) noexcept;

/// A 2x2 network description. S matrices carry per-port reference impedances
/// (power-wave definition); the other kinds do not.
class TwoPortMatrix {
 public:
  static TwoPortMatrix s(const Matrix2c& m, RefPair refs = {cplx{50.0}, cplx{50.0}});
  static TwoPortMatrix y(const Matrix2c& m);
  static TwoPortMatrix z(const Matrix2c& m);
  static TwoPortMatrix abcd(const Matrix2c& m);

  ParamKind kind() const noexcept { return kind_; }
  const Matrix2c& m() const noexcept { return m_; }
  cplx operator()(int row, int col) const { return m_(row, col); }
  /// Reference impedances; only meaningful for kind() == S.
  const RefPair& refs() const noexcept { return refs_; }

 private:
  TwoPortMatrix(ParamKind kind, const Matrix2c& m, RefPair refs);

  ParamKind kind_;
  Matrix2c m_;
  RefPair refs_;
};

/// Convert between representations. `refs` is used when the target is S.
TwoPortMatrix convert(const TwoPortMatrix& m, ParamKind target,
                      RefPair refs = {cplx{50.0}, cplx{50.0}});

/// Chain two ABCD networks (port 2 of `a` feeds port 1 of `b`).
TwoPortMatrix cascade(const TwoPortMatrix& a, const TwoPortMatrix& b);

/// Re-express an S matrix against new reference impedances (power waves).
TwoPortMatrix renormalize(const TwoPortMatrix& s, RefPair new_refs);

/// Smallest eigenvalue of (I - S^H S); non-negative for passive networks.
double passivity_margin(const TwoPortMatrix& s);

// Elementary ABCD sections.
TwoPortMatrix abcd_series(cplx z);
TwoPortMatrix abcd_shunt(cplx y);

/// One matrix per grid point, all of one kind (and, for S, one reference pair).
class SweepResponse {
 public:
  SweepResponse(FrequencyGrid grid, ParamKind kind, std::vector<Matrix2c> data,
                RefPair refs = {cplx{50.0}, cplx{50.0}});

  const FrequencyGrid& grid() const noexcept { return grid_; }
  ParamKind kind() const noexcept { return kind_; }
  const RefPair& refs() const noexcept { return refs_; }
  std::size_t size() const noexcept { return data_.size(); }
  const Matrix2c& matrix(std::size_t i) const { return data_[i]; }
  std::span<const Matrix2c> data() const noexcept { return data_; }
  TwoPortMatrix at(std::size_t i) const;

  /// Values of one entry across the sweep.
  std::vector<cplx> entry(int row, int col) const;

 private:
  FrequencyGrid grid_;
  ParamKind kind_;
  std::vector<Matrix2c> data_;
  RefPair refs_;
};

SweepResponse convert(const SweepResponse& r, ParamKind target,
                      RefPair refs = {cplx{50.0}, cplx{50.0}});
SweepResponse renormalize(const SweepResponse& r, RefPair new_refs);
/// Worst case over the sweep.
double passivity_margin(const SweepResponse& r);

/// True when both references are real (imaginary parts exactly zero).
bool refs_are_real(const RefPair& refs) noexcept;

}  // namespace xlat
