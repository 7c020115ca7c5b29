#include "support.hpp"

#include <functional>

#include "xlat/metrics.hpp"

using namespace xlat;

namespace {

// Series R-L-C between two z0 ports; S21 = 2 z0 / (2 z0 + Z).
struct SeriesRlc {
  double r, l, c, z0 = 50.0;

  cplx s21(double f) const {
    const double w = 2 * kPi * f;
    return 2 * z0 / (2 * z0 + cplx{r, w * l - 1.0 / (w * c)});
  }
  double f0() const { return 1.0 / (2 * kPi * std::sqrt(l * c)); }
  double loaded_q() const { return 2 * kPi * f0() * l / (2 * z0 + r); }
  // Edges where the loss is `drop_db` above the minimum.
  std::pair<double, double> edges(double drop_db) const {
    const double x = (2 * z0 + r) * std::sqrt(std::pow(10.0, drop_db / 10.0) - 1.0);
    auto solve = [&](double sign) {
      // l w^2 - sign x w - 1/c = 0
      const double w = (sign * x + std::sqrt(x * x + 4 * l / c)) / (2 * l);
      return w / (2 * kPi);
    };
    return {solve(-1.0), solve(1.0)};
  }
};

SweepResponse through_sweep(const FrequencyGrid& grid, const std::function<cplx(double)>& s21) {
  std::vector<Matrix2c> data;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Matrix2c m;
    const cplx t = s21(grid[i]);
    m << 0, t, t, 0;
    data.push_back(m);
  }
  return SweepResponse(grid, ParamKind::S, std::move(data));
}

}  // namespace

TEST_CASE("insertion loss values") {
  CHECK(insertion_loss_db(1.0) == 0.0);
  CHECK(insertion_loss_db(0.5) == doctest::Approx(6.0206).epsilon(1e-5));
  CHECK(insertion_loss_db(std::pow(10.0, -0.044)) == doctest::Approx(0.88).epsilon(1e-12));
  CHECK(insertion_loss_db(0.0) == kInfiniteLossDb);
  CHECK(insertion_loss_db(1e-300) >= 400.0);
  CHECK(insertion_loss_db(cplx{0.0, -0.5}) == insertion_loss_db(0.5));
}

TEST_CASE("edges to centre and fractional bandwidth") {
  const auto m = metrics_from_edges(17.0e9, 22.4e9);
  CHECK(m.f_c_hz == doctest::Approx(19.7e9).epsilon(1e-12));
  CHECK(m.fbw_3db * 100 == doctest::Approx(27.41).epsilon(1e-4));
  const auto g = metrics_from_edges(17.0e9, 22.4e9, CenterConvention::Geometric);
  CHECK(g.f_c_hz == doctest::Approx(std::sqrt(17.0e9 * 22.4e9)));
  XT_CHECK_CODE(metrics_from_edges(22e9, 17e9), ErrorCode::InvalidArgument);
}

TEST_CASE("ideal flat passband") {
  const auto grid = FrequencyGrid::linear(10e9, 30e9, 2001);
  const double step = grid[1] - grid[0];
  const double f1 = 17.0e9, f2 = 22.4e9;
  std::vector<double> il(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) il[i] = grid[i] >= f1 && grid[i] <= f2 ? 0.0 : kInfiniteLossDb;
  const auto m = extract_metrics(grid, il, {{11e9, 13e9}, {27e9, 29e9}});
  CHECK(m.il_min_db == 0.0);
  CHECK(std::abs(m.f_lo_hz - f1) <= step);
  CHECK(std::abs(m.f_hi_hz - f2) <= step);
  CHECK(m.ripple_db == 0.0);
  REQUIRE(m.oob_rejection_db.size() == 2);
  CHECK(m.oob_rejection_db[0] == kInfiniteLossDb);
  CHECK(m.worst_oob_db() == kInfiniteLossDb);
  CHECK(std::isnan(FilterMetrics{}.worst_oob_db()));
}

TEST_CASE("series RLC bandwidth matches f0/Q") {
  const SeriesRlc rlc{2.0, 80e-9, 0.0};
  SeriesRlc tuned = rlc;
  tuned.c = 1.0 / (std::pow(2 * kPi * 1e9, 2) * tuned.l);  // f0 = 1 GHz
  const auto grid = FrequencyGrid::linear(0.5e9, 2e9, 300001);
  const auto r = through_sweep(grid, [&](double f) { return tuned.s21(f); });

  // Half-power drop with the geometric centre: edges are exact f0 and f0/Q.
  MetricsOptions half;
  half.band_drop_db = 10 * std::log10(2.0);
  half.center = CenterConvention::Geometric;
  const auto m = extract_metrics(r, {}, half);
  CHECK(xt::rel(m.f_c_hz, tuned.f0()) < 1e-6);
  CHECK(xt::rel(m.f_hi_hz - m.f_lo_hz, tuned.f0() / tuned.loaded_q()) < 1e-6);
  CHECK(xt::rel(m.fbw_3db, 1.0 / tuned.loaded_q()) < 1e-6);
  CHECK(m.il_min_db == doctest::Approx(-20 * std::log10(100.0 / 102.0)).epsilon(1e-9));

  // Default 3.000 dB drop against its own closed form.
  const auto d = extract_metrics(r);
  const auto [lo, hi] = tuned.edges(3.0);
  CHECK(xt::rel(d.f_lo_hz, lo) < 1e-6);
  CHECK(xt::rel(d.f_hi_hz, hi) < 1e-6);
  CHECK(xt::rel(d.f_c_hz, 0.5 * (lo + hi)) < 1e-6);
}

TEST_CASE("metric invariances") {
  SeriesRlc rlc{1.0, 20e-9, 0.0};
  rlc.c = 1.0 / (std::pow(2 * kPi * 3e9, 2) * rlc.l);
  const auto grid = FrequencyGrid::linear(1e9, 6e9, 20001);
  const auto base = extract_metrics(through_sweep(grid, [&](double f) { return rlc.s21(f); }), {{1.2001e9, 1.6001e9}});

  // Frequency scaling moves the edges and keeps the FBW.
  const double k = 1.7;
  const auto scaled = extract_metrics(
      through_sweep(grid.scaled(k), [&](double f) { return rlc.s21(f / k); }), {{1.2001e9 * k, 1.6001e9 * k}});
  CHECK(xt::rel(scaled.f_c_hz, k * base.f_c_hz) < 1e-9);
  CHECK(xt::rel(scaled.fbw_3db, base.fbw_3db) < 1e-9);
  CHECK(scaled.oob_rejection_db[0] == doctest::Approx(base.oob_rejection_db[0]).epsilon(1e-12));

  // A flat extra loss shifts IL and rejection, not the band.
  const double pad = std::pow(10.0, -2.0 / 20.0);
  const auto lossy = extract_metrics(through_sweep(grid, [&](double f) { return pad * rlc.s21(f); }), {{1.2001e9, 1.6001e9}});
  CHECK(lossy.il_min_db == doctest::Approx(base.il_min_db + 2.0).epsilon(1e-9));
  CHECK(lossy.oob_rejection_db[0] == doctest::Approx(base.oob_rejection_db[0] + 2.0).epsilon(1e-9));
  CHECK(xt::rel(lossy.f_lo_hz, base.f_lo_hz) < 1e-9);
  CHECK(xt::rel(lossy.f_hi_hz, base.f_hi_hz) < 1e-9);

  // Re-extracting from the IL trace is idempotent.
  const auto r = through_sweep(grid, [&](double f) { return rlc.s21(f); });
  const auto again = extract_metrics(grid, insertion_loss_trace(r), {{1.2001e9, 1.6001e9}});
  CHECK(again.f_lo_hz == base.f_lo_hz);
  CHECK(again.f_hi_hz == base.f_hi_hz);
  CHECK(again.il_min_db == base.il_min_db);
}

TEST_CASE("metric failures") {
  const auto grid = FrequencyGrid::linear(1e9, 2e9, 101);
  std::vector<double> high(grid.size(), 60.0);
  XT_CHECK_CODE(extract_metrics(grid, high), ErrorCode::NoPassband);

  std::vector<double> ramp(grid.size());
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = 0.1 * static_cast<double>(i);
  XT_CHECK_CODE(extract_metrics(grid, ramp), ErrorCode::BandTouchesSweepEdge);

  std::vector<double> bump(grid.size());
  for (std::size_t i = 0; i < bump.size(); ++i) bump[i] = 0.01 * std::pow(static_cast<double>(i) - 50.0, 2);
  CHECK_NOTHROW(extract_metrics(grid, bump));
  XT_CHECK_CODE(extract_metrics(grid, bump, {{1.3e9, 1.2e9}}), ErrorCode::InvalidArgument);
  XT_CHECK_CODE(extract_metrics(grid, bump, {{3e9, 4e9}}), ErrorCode::InvalidArgument);
  XT_CHECK_CODE(extract_metrics(grid, std::vector<double>(5, 0.0)), ErrorCode::InvalidArgument);
}
