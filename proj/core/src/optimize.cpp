#include "lou/optimize.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multifit_nlinear.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <exception>
#include <limits>

#include "lou/errors.hpp"

namespace lou {
namespace {

constexpr double kWall = 1e100;

void silence_gsl() {
  static const bool once = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)once;
}

Eigen::Map<const Eigen::VectorXd> view(const gsl_vector* v) {
  return {v->data, static_cast<Eigen::Index>(v->size)};
}

struct LsContext {
  const Residuals* f;
  std::exception_ptr error;
};

int ls_callback(const gsl_vector* x, void* params, gsl_vector* out) {
  auto* ctx = static_cast<LsContext*>(params);
  try {
    const Eigen::VectorXd r = (*ctx->f)(view(x));
    for (std::size_t i = 0; i < out->size; ++i) gsl_vector_set(out, i, r(static_cast<Eigen::Index>(i)));
    return GSL_SUCCESS;
  } catch (...) {
    ctx->error = std::current_exception();
    return GSL_EBADFUNC;
  }
}

struct MinContext {
  const Objective* f;
};

double min_callback(const gsl_vector* x, void* params) {
  auto* ctx = static_cast<MinContext*>(params);
  try {
    const double v = (*ctx->f)(view(x));
    return std::isfinite(v) ? std::min(v, kWall) : kWall;
  } catch (const Error&) {
    return kWall;
  }
}

}  // namespace

Eigen::MatrixXd central_jacobian(const Residuals& f, const Eigen::VectorXd& x) {
  const Eigen::VectorXd r0 = f(x);
  Eigen::MatrixXd jac(r0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
    Eigen::VectorXd xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    jac.col(j) = (f(xp) - f(xm)) / (xp(j) - xm(j));
  }
  return jac;
}

LeastSquaresResult levenberg_marquardt(const Residuals& f, std::size_t n_residuals, const Eigen::VectorXd& x0,
                                       const LeastSquaresOptions& options) {
  silence_gsl();
  const std::size_t p = static_cast<std::size_t>(x0.size());
  if (n_residuals < p) throw Error(ErrorCode::kInvalidParameter, "fewer residuals than parameters");

  LsContext ctx{&f, nullptr};
  gsl_multifit_nlinear_fdf fdf{};
  fdf.f = ls_callback;
  fdf.df = nullptr;
  fdf.fvv = nullptr;
  fdf.n = n_residuals;
  fdf.p = p;
  fdf.params = &ctx;

  gsl_multifit_nlinear_parameters params = gsl_multifit_nlinear_default_parameters();
  params.trs = gsl_multifit_nlinear_trs_lm;
  params.fdtype = GSL_MULTIFIT_NLINEAR_CTRDIFF;
  gsl_multifit_nlinear_workspace* w = gsl_multifit_nlinear_alloc(gsl_multifit_nlinear_trust, &params, n_residuals, p);

  gsl_vector* start = gsl_vector_alloc(p);
  for (std::size_t i = 0; i < p; ++i) gsl_vector_set(start, i, x0(static_cast<Eigen::Index>(i)));
  gsl_multifit_nlinear_init(start, &fdf, w);

  int info = 0;
  const int status = gsl_multifit_nlinear_driver(static_cast<std::size_t>(options.max_iterations), options.xtol,
                                                 options.gtol, options.ftol, nullptr, nullptr, &info, w);
  LeastSquaresResult result;
  result.x = view(gsl_multifit_nlinear_position(w));
  result.iterations = static_cast<int>(gsl_multifit_nlinear_niter(w));
  gsl_vector_free(start);
  gsl_multifit_nlinear_free(w);

  if (ctx.error) std::rethrow_exception(ctx.error);
  if (status == GSL_EMAXITER) {
    throw Error(ErrorCode::kNonConvergence, "Levenberg-Marquardt did not converge in " +
                                                std::to_string(options.max_iterations) + " iterations");
  }
  // GSL_ENOPROG means no further reduction is possible at machine precision.
  if (status != GSL_SUCCESS && status != GSL_ENOPROG) {
    throw Error(ErrorCode::kNonConvergence, std::string("Levenberg-Marquardt failed: ") + gsl_strerror(status));
  }
  result.residuals = f(result.x);
  result.chi2 = result.residuals.squaredNorm();
  result.jacobian = central_jacobian(f, result.x);
  return result;
}

MinimizeResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const SimplexOptions& options) {
  silence_gsl();
  const std::size_t n = static_cast<std::size_t>(x0.size());
  MinContext ctx{&f};
  gsl_multimin_function fn{min_callback, n, &ctx};

  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* step = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x, i, x0(static_cast<Eigen::Index>(i)));
  gsl_vector_set_all(step, options.initial_step);

  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &fn, x, step);

  MinimizeResult result;
  int status = GSL_CONTINUE;
  while (status == GSL_CONTINUE && result.iterations < options.max_iterations) {
    ++result.iterations;
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), options.size_tol);
  }
  result.converged = status == GSL_SUCCESS;
  result.x = view(s->x);
  result.value = s->fval;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(x);
  gsl_vector_free(step);
  return result;
}

Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& x, const Eigen::VectorXd& steps) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += steps(i);
    xm(i) -= steps(i);
    g(i) = (f(xp) - f(xm)) / (2.0 * steps(i));
  }
  return g;
}

Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x, const Eigen::VectorXd& steps) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd h(n, n);
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += steps(i);
    xm(i) -= steps(i);
    h(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (steps(i) * steps(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
      pp(i) += steps(i), pp(j) += steps(j);
      pm(i) += steps(i), pm(j) -= steps(j);
      mp(i) -= steps(i), mp(j) += steps(j);
      mm(i) -= steps(i), mm(j) -= steps(j);
      h(i, j) = h(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * steps(i) * steps(j));
    }
  }
  return h;
}

}  // namespace lou
