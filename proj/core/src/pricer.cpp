#include "lou/pricer.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "lou/errors.hpp"
#include "lou/parallel.hpp"

namespace lou {
namespace {

constexpr cplx kI{0.0, 1.0};

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// -(S0/pi) e^{D(c-1)} times the integral over [0, inf) of
// Re[e^{-i w D} f(-z) / (z^2 - i z)], z = w + i c; the w < 0 half is the
// complex conjugate of this one.
double contour_price(double s0, double log_fwd, double c, const LinearCf& cf, const ContourConfig& cc) {
  const double scale = s0 / std::numbers::pi * std::exp(log_fwd * (c - 1.0));
  FourierQuadOptions opt;
  opt.abs_tol = cc.quad_abs_tol * s0 / scale;
  opt.rel_tol = cc.quad_rel_tol;
  opt.omega_max = cc.omega_max;
  opt.envelope_tol = opt.abs_tol;
  auto amplitudes = [&](double w) {
    const cplx z(w, c);
    const cplx weighted = cf(-z) / (z * z - kI * z);
    return std::pair{weighted.real(), weighted.imag()};
  };
  const QuadResult q = integrate_fourier(amplitudes, log_fwd, opt);
  return -scale * q.value;
}

}  // namespace

ContourConfig contour_offset(const ModelParams& p, double lambda) {
  if (!(p.rho > -1.0 && p.rho < 1.0)) {
    throw Error(ErrorCode::kInvalidParameter, "contour offset needs rho in (-1, 1)");
  }
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw Error(ErrorCode::kInvalidParameter, "lambda must lie in (0, 1]");
  }
  const PoleOrdinates poles = pole_ordinates(p);
  ContourConfig cc;
  cc.lambda = lambda;
  // With no upper pole the strip is unbounded above; any c > 1 will do.
  cc.c = std::isfinite(poles.c_plus) ? lambda * poles.c_plus : 1.0 + lambda;
  cc.c_minus = poles.c_minus;
  cc.c_plus = poles.c_plus;
  if (!(cc.c > 1.0 && cc.c > cc.c_minus && cc.c < cc.c_plus)) {
    std::ostringstream msg;
    msg << "c = " << cc.c << " not in {c > 1} and (" << cc.c_minus << ", " << cc.c_plus << ")";
    throw Error(ErrorCode::kEmptyContourRegion, msg.str());
  }
  return cc;
}

double lewis_call(double s0, double strike, double r, const LinearCf& cf, const ContourConfig& cc) {
  const double tau = cf.tau();
  if (!(tau > 0.0)) throw Error(ErrorCode::kInvalidParameter, "tau must be positive");
  if (!(strike > 0.0) || !(s0 > 0.0)) throw Error(ErrorCode::kInvalidParameter, "S0 and K must be positive");
  const double log_fwd = std::log(s0 / strike) + r * tau;
  // Size of the integrand at omega = 0 on the line Im z = c, in logs.
  const double log_scale = log_fwd * (cc.c - 1.0) + cf.log_value(cplx(0.0, -cc.c)).real();
  if (log_scale > cc.max_log_amplification) {
    // Shift the line below z = i; the residue there is S0 because f(-i) = 1.
    const double c_inner = 0.5;
    return s0 + contour_price(s0, log_fwd, c_inner, cf, cc);
  }
  return contour_price(s0, log_fwd, cc.c, cf, cc);
}

double lewis_call(double s0, double strike, double r, double tau, const ModelParams& p, double x0,
                  const ContourConfig& cc) {
  return lewis_call(s0, strike, r, LinearCf(p, tau, x0), cc);
}

double black_scholes(double s0, double strike, double r, double tau, double sigma) {
  const double disc_k = strike * std::exp(-r * tau);
  const double vol = sigma * std::sqrt(tau);
  if (vol <= 0.0) return std::max(s0 - disc_k, 0.0);
  const double d1 = (std::log(s0 / disc_k) + 0.5 * vol * vol) / vol;
  return s0 * norm_cdf(d1) - disc_k * norm_cdf(d1 - vol);
}

double black_scholes_vega(double s0, double strike, double r, double tau, double sigma) {
  const double vol = sigma * std::sqrt(tau);
  const double d1 = (std::log(s0 / strike) + r * tau + 0.5 * vol * vol) / vol;
  return s0 * std::sqrt(tau) * std::exp(-0.5 * d1 * d1) / std::sqrt(2.0 * std::numbers::pi);
}

double implied_vol(double price, double s0, double strike, double r, double tau) {
  const double lower = std::max(s0 - strike * std::exp(-r * tau), 0.0);
  if (!(price > lower && price < s0)) {
    std::ostringstream msg;
    msg << "price " << price << " outside (" << lower << ", " << s0 << ")";
    throw Error(ErrorCode::kOutOfBounds, msg.str());
  }
  double lo = kImpliedVolLow;
  double hi = kImpliedVolHigh;
  const double f_lo = black_scholes(s0, strike, r, tau, lo) - price;
  const double f_hi = black_scholes(s0, strike, r, tau, hi) - price;
  if (f_lo > 0.0 || f_hi < 0.0) {
    throw Error(ErrorCode::kOutOfBounds, "price outside the implied-vol bracket [1e-4, 5]");
  }
  const double price_tol = 1e-13 * s0;
  double sigma = 0.3;
  for (int iter = 0; iter < 200; ++iter) {
    const double diff = black_scholes(s0, strike, r, tau, sigma) - price;
    if (std::abs(diff) <= price_tol) return sigma;
    if (diff > 0.0) {
      hi = sigma;
    } else {
      lo = sigma;
    }
    if (hi - lo < 1e-15 * hi) return sigma;
    const double vega = black_scholes_vega(s0, strike, r, tau, sigma);
    double next = vega > 0.0 ? sigma - diff / vega : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    sigma = next;
  }
  throw Error(ErrorCode::kNoConvergence, "implied vol did not converge in 200 iterations");
}

double pdf_from_cf(double x, const LinearCf& cf, const PdfOptions& options) {
  if (!(cf.tau() > 0.0)) throw Error(ErrorCode::kInvalidParameter, "tau must be positive");
  FourierQuadOptions opt;
  opt.abs_tol = options.abs_tol;
  opt.rel_tol = options.rel_tol;
  opt.envelope_tol = options.abs_tol;
  opt.omega_max = options.omega_max;
  auto amplitudes = [&](double phi) {
    const cplx f = cf(cplx(phi, 0.0));
    return std::pair{f.real(), f.imag()};
  };
  return integrate_fourier(amplitudes, x, opt).value / std::numbers::pi;
}

double pdf_from_cf(double x, double tau, double x0, const ModelParams& p, const PdfOptions& options) {
  return pdf_from_cf(x, LinearCf(p, tau, x0), options);
}

std::vector<double> pdf_curve(const std::vector<double>& xs, double tau, const ModelParams& p, double x0,
                              const PdfOptions& options) {
  const LinearCf cf(p, tau, x0);
  std::vector<double> out(xs.size());
  parallel_for(xs.size(), [&](std::size_t i) { out[i] = pdf_from_cf(xs[i], cf, options); });
  return out;
}

std::vector<OptionQuote> smile_curve(const ModelParams& p, double s0, const std::vector<StrikePoint>& points,
                                     const ContourConfig& cc, double x0) {
  std::vector<OptionQuote> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) {
    const StrikePoint& pt = points[i];
    OptionQuote q{s0, pt.strike, pt.r, pt.tau, 0.0, 0.0};
    q.price = lewis_call(s0, pt.strike, pt.r, pt.tau, p, x0, cc);
    q.implied_vol = implied_vol(q.price, s0, pt.strike, pt.r, pt.tau);
    out[i] = q;
  });
  return out;
}

ParamVector to_vector(const ModelParams& p) { return {p.alpha, p.k, p.m, p.rho}; }

ModelParams with_vector(ModelParams p, const ParamVector& v) {
  p.alpha = v[0];
  p.k = v[1];
  p.m = v[2];
  p.rho = v[3];
  return p;
}

std::vector<double> smile_error_band(const ModelParams& p, const ParamCovariance& cov, double s0,
                                     const std::vector<StrikePoint>& points, const ContourConfig& cc) {
  std::vector<double> band(points.size(), 0.0);
  if (cov.isZero(0.0)) return band;
  const ParamVector theta = to_vector(p);
  std::vector<Eigen::Matrix<double, 4, 1>> jac(points.size(), Eigen::Matrix<double, 4, 1>::Zero());
  for (int j = 0; j < 4; ++j) {
    const double step = std::max(1e-3 * std::abs(theta[j]), 1e-5);
    ParamVector up = theta;
    ParamVector down = theta;
    up[j] += step;
    down[j] -= step;
    const ModelParams p_up = with_vector(p, up);
    const ModelParams p_down = with_vector(p, down);
    const auto smile_up = smile_curve(p_up, s0, points, contour_offset(p_up, cc.lambda));
    const auto smile_down = smile_curve(p_down, s0, points, contour_offset(p_down, cc.lambda));
    for (std::size_t i = 0; i < points.size(); ++i) {
      jac[i][j] = (smile_up[i].implied_vol - smile_down[i].implied_vol) / (2.0 * step);
    }
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    band[i] = std::sqrt(std::max(0.0, jac[i].dot(cov * jac[i])));
  }
  return band;
}

}  // namespace lou
