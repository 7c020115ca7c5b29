#pragma once

#include <functional>
#include <span>
#include <vector>

namespace xlat {

using Objective = std::function<double(std::span<const double>)>;

struct SimplexOptions {
  int max_iterations = 2000;
  /// Hard cap on objective calls (0 = unlimited).
  long max_evaluations = 0;
  /// Converged when the best value improves by less than
  /// stall_tolerance * (|f| + stall_tolerance) over `stall_window` iterations.
  int stall_window = 50;
  double stall_tolerance = 1e-12;
  /// Also stop once the simplex characteristic size falls below this.
  double min_size = 1e-14;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  long evaluations = 0;
  bool converged = false;
  /// Best value after each iteration (non-increasing).
  std::vector<double> best_trace;
};

/// Nelder-Mead simplex minimization (GSL nmsimplex2). Non-finite objective
/// values are treated as very large.
SimplexResult minimize_simplex(const Objective& f, std::vector<double> x0, std::vector<double> steps,
                               const SimplexOptions& options = {});

}  // namespace xlat
