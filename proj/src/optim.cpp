#include "xlat/optim.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <memory>

#include "xlat/errors.hpp"

namespace xlat {

namespace {

constexpr double kPenalty = 1e100;

struct Context {
  const Objective* f;
  long cap = 0;  // 0 = unlimited
  long evaluations = 0;
};

double trampoline(const gsl_vector* v, void* params) {
  auto* ctx = static_cast<Context*>(params);
  // Past the cap, points are rejected without calling the objective.
  if (ctx->cap > 0 && ctx->evaluations >= ctx->cap) return kPenalty;
  ++ctx->evaluations;
  const double value = (*ctx->f)(std::span<const double>(v->data, v->size));
  return std::isfinite(value) ? value : kPenalty;
}

struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

}  // namespace

SimplexResult minimize_simplex(const Objective& f, std::vector<double> x0, std::vector<double> steps,
                               const SimplexOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0 || steps.size() != n) fail(ErrorCode::InvalidArgument, "simplex needs matching x0/steps");
  static const bool handler_off = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)handler_off;

  Context ctx{&f, options.max_evaluations};
  gsl_multimin_function fn{&trampoline, n, &ctx};

  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(n));
  std::unique_ptr<gsl_vector, VectorDeleter> ss(gsl_vector_alloc(n));
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x.get(), i, x0[i]);
    gsl_vector_set(ss.get(), i, steps[i]);
  }
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> s(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
  SimplexResult out;
  if (gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), ss.get()) != GSL_SUCCESS) {
    out.x = x0;
    out.value = trampoline(x.get(), &ctx);
    out.evaluations = ctx.evaluations;
    return out;
  }

  for (int it = 0; it < options.max_iterations; ++it) {
    if (options.max_evaluations > 0 && ctx.evaluations >= options.max_evaluations) break;
    const int status = gsl_multimin_fminimizer_iterate(s.get());
    out.iterations = it + 1;
    out.best_trace.push_back(s->fval);
    if (status != GSL_SUCCESS) break;
    const std::size_t k = out.best_trace.size();
    if (k > static_cast<std::size_t>(options.stall_window)) {
      const double before = out.best_trace[k - 1 - options.stall_window];
      if (before - s->fval <= options.stall_tolerance * (std::abs(s->fval) + options.stall_tolerance)) {
        out.converged = true;
        break;
      }
    }
    if (gsl_multimin_fminimizer_size(s.get()) < options.min_size) {
      out.converged = true;
      break;
    }
  }
  out.x.assign(s->x->data, s->x->data + n);
  out.value = s->fval;
  out.evaluations = ctx.evaluations;
  return out;
}

}  // namespace xlat
