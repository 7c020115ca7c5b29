#include "support.hpp"

#include "xlat/optim.hpp"

using namespace xlat;

TEST_CASE("simplex minimizes a shifted quadratic") {
  const Objective f = [](std::span<const double> x) {
    return std::pow(x[0] - 1.5, 2) + 3 * std::pow(x[1] + 0.5, 2);
  };
  const auto r = minimize_simplex(f, {0.0, 0.0}, {0.5, 0.5});
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(r.x[1] == doctest::Approx(-0.5).epsilon(1e-5));
  CHECK(r.value < 1e-10);
  for (std::size_t i = 1; i < r.best_trace.size(); ++i) CHECK(r.best_trace[i] <= r.best_trace[i - 1]);
}

TEST_CASE("Rosenbrock valley") {
  const Objective f = [](std::span<const double> x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  SimplexOptions opt;
  opt.max_iterations = 5000;
  const auto r = minimize_simplex(f, {-1.2, 1.0}, {0.1, 0.1}, opt);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("evaluation cap and non-finite values") {
  long calls = 0;
  const Objective f = [&](std::span<const double> x) {
    ++calls;
    return x[0] < -1.0 ? std::nan("") : std::pow(x[0] - 2.0, 2) + x[1] * x[1];
  };
  SimplexOptions opt;
  opt.max_evaluations = 25;
  const auto r = minimize_simplex(f, {0.0, 1.0}, {0.5, 0.5}, opt);
  CHECK(calls <= 25);
  CHECK(r.evaluations == calls);
  CHECK_FALSE(r.converged);
  CHECK(std::isfinite(r.value));

  calls = 0;
  const auto r2 = minimize_simplex(f, {-0.5, 0.0}, {2.0, 0.5});
  CHECK(r2.x[0] == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("bad simplex input") {
  const Objective f = [](std::span<const double> x) { return x[0] * x[0]; };
  XT_CHECK_CODE(minimize_simplex(f, {}, {}), ErrorCode::InvalidArgument);
  XT_CHECK_CODE(minimize_simplex(f, {1.0}, {0.1, 0.2}), ErrorCode::InvalidArgument);
}
