#include "xlat/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "xlat/errors.hpp"
#include "xlat/optim.hpp"

namespace xlat {

namespace {

constexpr double kOutOfBounds = 1e100;
constexpr int kPolishCycles = 12;

struct Peak {
  std::size_t index;
  double prominence;
};

// Topographic prominence of every interior local maximum of `h`.
std::vector<Peak> find_peaks(const std::vector<double>& h) {
  std::vector<Peak> peaks;
  const std::size_t n = h.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(h[i] > h[i - 1] && h[i] >= h[i + 1])) continue;
    double left_min = h[i];
    std::size_t j = i;
    while (j > 0 && h[j - 1] <= h[i]) left_min = std::min(left_min, h[--j]);
    double right_min = h[i];
    j = i;
    while (j + 1 < n && h[j + 1] <= h[i]) right_min = std::min(right_min, h[++j]);
    peaks.push_back({i, h[i] - std::max(left_min, right_min)});
  }
  return peaks;
}

std::vector<std::size_t> local_maxima(const std::vector<cplx>& y) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (std::abs(y[i]) > std::abs(y[i - 1]) && std::abs(y[i]) >= std::abs(y[i + 1])) out.push_back(i);
  }
  return out;
}

// Maps the unconstrained search vector onto mBVD parameters around a seed.
class Parametrization {
 public:
  Parametrization(const MbvdParams& seed, const MeasuredOnePort& m, const FitOptions& opt)
      : seed_(seed), log_c_lo_(std::log(opt.c_lower)), log_c_hi_(std::log(opt.c_upper)) {
    double ymax = 0.0;
    for (const auto& y : m.admittance) ymax = std::max(ymax, std::abs(y));
    r_scale_ = 1.0 / ymax;
    for (const auto& b : seed.branches) r_scale_ = std::max(r_scale_, b.rm);
    const double f_mid = std::sqrt(m.grid.front() * m.grid.back());
    l_scale_ = r_scale_ / (2.0 * kPi * f_mid);
    for (auto& b : seed_.branches) {
      if (!(b.rm > 0.0)) b.rm = 1e-6 * r_scale_;
      fs_.push_back(series_resonance(b));
    }
  }

  std::size_t size() const { return 4 + 3 * seed_.branches.size(); }

  std::vector<double> start(const MbvdParams& init) const {
    std::vector<double> x(size());
    x[0] = std::log(init.c0 / seed_.c0);
    x[1] = std::sqrt(init.r0 / r_scale_);
    x[2] = std::sqrt(init.rs / r_scale_);
    x[3] = std::sqrt(init.ls / l_scale_);
    for (std::size_t k = 0; k < seed_.branches.size(); ++k) {
      const auto& b = init.branches[k];
      x[4 + 3 * k] = std::log(series_resonance(b) / fs_[k]);
      x[5 + 3 * k] = std::log(b.cm / seed_.branches[k].cm);
      x[6 + 3 * k] = std::log(std::max(b.rm, 1e-6 * r_scale_) / seed_.branches[k].rm);
    }
    return x;
  }

  std::vector<double> steps() const {
    std::vector<double> s(size());
    s[0] = 0.05;
    s[1] = s[2] = s[3] = 0.3;
    for (std::size_t k = 0; k < seed_.branches.size(); ++k) {
      s[4 + 3 * k] = 0.002;
      s[5 + 3 * k] = 0.1;
      s[6 + 3 * k] = 0.3;
    }
    return s;
  }

  bool in_bounds(std::span<const double> x) const {
    auto ok = [&](double v) { return v >= log_c_lo_ && v <= log_c_hi_; };
    if (!ok(x[0])) return false;
    for (std::size_t k = 0; k < seed_.branches.size(); ++k) {
      if (!ok(x[5 + 3 * k])) return false;
    }
    return true;
  }

  MbvdParams params(std::span<const double> x) const {
    MbvdParams p = seed_;
    p.c0 = seed_.c0 * std::exp(x[0]);
    p.r0 = r_scale_ * x[1] * x[1];
    p.rs = r_scale_ * x[2] * x[2];
    p.ls = l_scale_ * x[3] * x[3];
    for (std::size_t k = 0; k < p.branches.size(); ++k) {
      auto& b = p.branches[k];
      const double fs = fs_[k] * std::exp(x[4 + 3 * k]);
      b.cm = seed_.branches[k].cm * std::exp(x[5 + 3 * k]);
      b.rm = seed_.branches[k].rm * std::exp(x[6 + 3 * k]);
      const double w = 2.0 * kPi * fs;
      b.lm = 1.0 / (w * w * b.cm);
    }
    return p;
  }

 private:
  MbvdParams seed_;
  std::vector<double> fs_;
  double r_scale_ = 1.0;
  double l_scale_ = 1e-12;
  double log_c_lo_;
  double log_c_hi_;
};

double objective_with_logs(const MeasuredOnePort& m, const std::vector<cplx>& log_data,
                           const MbvdParams& p, const std::vector<double>& w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < log_data.size(); ++i) {
    const cplx r = std::log(admittance(p, m.grid[i])) - log_data[i];
    const double phase = std::remainder(r.imag(), 2.0 * kPi);
    acc += w[i] * r.real() * r.real() + phase * phase;
  }
  return acc;
}

std::vector<cplx> log_admittance(const MeasuredOnePort& m) {
  std::vector<cplx> out(m.admittance.size());
  std::transform(m.admittance.begin(), m.admittance.end(), out.begin(),
                 [](cplx y) { return std::log(y); });
  return out;
}

}  // namespace

void MeasuredOnePort::validate() const {
  if (admittance.size() != grid.size()) {
    fail(ErrorCode::InvalidArgument, "admittance data length does not match the grid");
  }
  for (const auto& y : admittance) {
    if (!std::isfinite(y.real()) || !std::isfinite(y.imag())) {
      fail(ErrorCode::InvalidArgument, "admittance data contains non-finite values");
    }
    if (y == cplx{}) fail(ErrorCode::InvalidArgument, "admittance data contains exact zeros");
  }
}

MeasuredOnePort one_port_from_s11(const FrequencyGrid& grid, const std::vector<cplx>& s11, double z0,
                                  std::string source) {
  std::vector<cplx> y(s11.size());
  for (std::size_t i = 0; i < s11.size(); ++i) y[i] = (1.0 - s11[i]) / (z0 * (1.0 + s11[i]));
  MeasuredOnePort m{grid, std::move(y), std::move(source)};
  m.validate();
  return m;
}

std::vector<cplx> s11_from_admittance(const std::vector<cplx>& y, double z0) {
  std::vector<cplx> s(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) s[i] = (1.0 - z0 * y[i]) / (1.0 + z0 * y[i]);
  return s;
}

MeasuredOnePort synthesize_one_port(const MbvdParams& p, const FrequencyGrid& grid, double noise_rel,
                                    std::uint64_t seed) {
  p.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cplx> y(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    y[i] = admittance(p, grid[i]);
    if (noise_rel > 0.0) {
      const double nr = gauss(rng);
      const double ni = gauss(rng);
      y[i] *= cplx(1.0 + noise_rel * nr, noise_rel * ni);
    }
  }
  std::ostringstream tag;
  tag << "synthetic(noise=" << noise_rel << ", seed=" << seed << ")";
  return {grid, std::move(y), tag.str()};
}

MbvdParams initial_guess(const MeasuredOnePort& m, std::size_t n_branches, const GuessOptions& options) {
  m.validate();
  if (n_branches < 1) fail(ErrorCode::InvalidArgument, "need at least one branch");
  const std::size_t n = m.grid.size();
  std::vector<double> logmag(n);
  for (std::size_t i = 0; i < n; ++i) logmag[i] = std::log10(std::abs(m.admittance[i]));

  auto peaks = find_peaks(logmag);
  std::erase_if(peaks, [&](const Peak& p) { return p.prominence < options.min_prominence_decades; });
  if (peaks.size() < n_branches) {
    std::ostringstream os;
    os << "found " << peaks.size() << " resonance peak(s), need " << n_branches;
    fail(ErrorCode::InsufficientPeaks, os.str());
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak& a, const Peak& b) { return a.prominence > b.prominence; });
  peaks.resize(n_branches);
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.index < b.index; });

  // Antiresonance seeds: |Y| minimum between consecutive peaks.
  std::vector<double> fs(n_branches), fp(n_branches), ratio(n_branches);
  for (std::size_t k = 0; k < n_branches; ++k) {
    const std::size_t from = peaks[k].index;
    const std::size_t to = k + 1 < n_branches ? peaks[k + 1].index : n - 1;
    std::size_t imin = from;
    for (std::size_t i = from; i <= to; ++i) {
      if (logmag[i] < logmag[imin]) imin = i;
    }
    fs[k] = m.grid[from];
    fp[k] = m.grid[imin] > fs[k] ? m.grid[imin] : fs[k] * 1.01;
    ratio[k] = (fp[k] / fs[k]) * (fp[k] / fs[k]) - 1.0;
  }

  // Im{Y} = w c0 g(f) away from resonances, g = 1 + sum r_k / (1 - (f/fs_k)^2).
  const double decade_top = 10.0 * m.grid.front();
  auto near_feature = [&](double f) {
    for (std::size_t k = 0; k < n_branches; ++k) {
      if (std::abs(f / fs[k] - 1.0) < 0.05 || std::abs(f / fp[k] - 1.0) < 0.05) return true;
    }
    return false;
  };
  double num = 0.0, den = 0.0;
  for (int pass = 0; pass < 2 && den == 0.0; ++pass) {
    for (std::size_t i = 0; i < n; ++i) {
      const double f = m.grid[i];
      if (f > decade_top || (pass == 0 && near_feature(f))) continue;
      double g = 1.0;
      for (std::size_t k = 0; k < n_branches; ++k) g += ratio[k] / (1.0 - (f / fs[k]) * (f / fs[k]));
      const double x = 2.0 * kPi * f * g;
      num += m.admittance[i].imag() * x;
      den += x * x;
    }
  }
  double c0 = den > 0.0 ? num / den : 0.0;
  if (!(c0 > 0.0)) {
    c0 = std::abs(m.admittance.front().imag()) / (2.0 * kPi * m.grid.front());
  }

  MbvdParams p;
  p.c0 = c0;
  for (std::size_t k = 0; k < n_branches; ++k) {
    MotionalBranch b;
    b.cm = std::max(ratio[k], 1e-4) * c0;
    const double w = 2.0 * kPi * fs[k];
    b.lm = 1.0 / (w * w * b.cm);
    b.rm = 1.0 / std::abs(m.admittance[peaks[k].index]);
    b.mode = ModeLabel{ModeFamily::Symmetric, 1};
    p.branches.push_back(b);
  }
  p.validate();
  return p;
}

double fit_objective(const MeasuredOnePort& m, const MbvdParams& p, const std::vector<double>& weights) {
  return objective_with_logs(m, log_admittance(m), p, weights);
}

double one_port_passivity_margin(const MbvdParams& p, const FrequencyGrid& grid, double z0) {
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const cplx y = admittance(p, grid[i]);
    const cplx s = (1.0 - z0 * y) / (1.0 + z0 * y);
    worst = std::min(worst, 1.0 - std::norm(s));
  }
  return worst;
}

FitResult fit_mbvd(const MeasuredOnePort& m, const MbvdParams& init, const FitOptions& options) {
  m.validate();
  init.validate();
  for (const auto& b : init.branches) {
    if (b.is_null()) fail(ErrorCode::InvalidArgument, "initial model has a null branch");
  }
  if (options.restarts < 1 || options.max_iterations < 1) {
    fail(ErrorCode::InvalidArgument, "restarts and max_iterations must be >= 1");
  }

  std::vector<double> weights(m.grid.size(), 1.0);
  if (options.peak_weight != 1.0) {
    for (const auto& b : init.branches) {
      const double fs = series_resonance(b);
      for (std::size_t i = 0; i < weights.size(); ++i) {
        if (std::abs(m.grid[i] / fs - 1.0) <= options.peak_window) weights[i] = options.peak_weight;
      }
    }
  }
  const std::vector<cplx> log_data = log_admittance(m);
  const Parametrization map(init, m, options);
  const Objective objective = [&](std::span<const double> x) {
    if (!map.in_bounds(x)) return kOutOfBounds;
    return objective_with_logs(m, log_data, map.params(x), weights);
  };

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::vector<double> x_init = map.start(init);
  const std::vector<double> steps = map.steps();

  SimplexOptions so;
  so.max_iterations = options.max_iterations;
  so.stall_tolerance = options.tolerance;

  FitResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.restarts; ++r) {
    std::vector<double> x0 = x_init;
    if (r > 0) {
      for (std::size_t i = 0; i < x0.size(); ++i) x0[i] += steps[i] * gauss(rng);
    }
    SimplexResult run = minimize_simplex(objective, x0, steps, so);
    int iters = run.iterations;
    // Re-seed the simplex at the optimum until a fresh start stops paying;
    // Nelder-Mead collapses along elongated valleys long before the minimum.
    std::vector<double> fine(steps);
    for (double& s : fine) s *= 0.1;
    bool converged = false;
    for (int cycle = 0; cycle < kPolishCycles; ++cycle) {
      SimplexResult polish = minimize_simplex(objective, run.x, fine, so);
      iters += polish.iterations;
      const double gain = run.value - polish.value;
      if (polish.value <= run.value) run = std::move(polish);
      if (gain <= options.tolerance * (std::abs(run.value) + options.tolerance)) {
        converged = true;
        break;
      }
    }
    const SimplexResult& final_run = run;
    if (final_run.value < best.objective) {
      best.objective = final_run.value;
      best.params = map.params(final_run.x);
      best.converged = converged;
      best.iterations = iters;
      best.best_restart = r;
    }
  }

  best.residual_rms = std::sqrt(best.objective / static_cast<double>(m.grid.size()));
  const auto maxima = local_maxima(m.admittance);
  for (const auto& b : best.params.branches) {
    const double fs = series_resonance(b);
    double err = std::numeric_limits<double>::quiet_NaN();
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t i : maxima) {
      const double d = std::abs(m.grid[i] - fs);
      if (d < dist) {
        dist = d;
        err = d / m.grid[i];
      }
    }
    best.branch_frequency_errors.push_back(err);
  }
  // Parameters outside the admissible set would fail validation here.
  best.params.validate();
  if (one_port_passivity_margin(best.params, m.grid) < -1e-9) {
    fail(ErrorCode::PassivityViolation, "fitted model is not passive");
  }
  return best;
}

}  // namespace xlat
