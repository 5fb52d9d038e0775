#pragma once

#include <Eigen/Core>
#include <vector>

#include "lou/charfn.hpp"
#include "lou/model.hpp"
#include "lou/quadrature.hpp"

namespace lou {

inline constexpr double kDefaultLambda = 0.5;

// Integration line Im(z) = c for the contour-integral call price.
struct ContourConfig {
  double lambda = kDefaultLambda;
  double c = 0.0;
  double c_minus = 0.0;
  double c_plus = 0.0;
  double quad_abs_tol = 1e-9;  // per unit of spot
  double quad_rel_tol = 1e-8;
  double omega_max = 1e4;
  // When ln|integrand| at omega = 0, i.e. D (c - 1) + ln f(-ic), exceeds
  // this, the line Im z = c would cancel away the price (deep in the money
  // or a very large c); such prices use a line inside (0, 1) plus the
  // residue at z = i.
  double max_log_amplification = 12.0;
};

struct OptionQuote {
  double s0 = 0.0;
  double strike = 0.0;
  double r = 0.0;
  double tau = 0.0;
  double price = 0.0;
  double implied_vol = 0.0;
};

struct StrikePoint {
  double tau = 0.0;
  double strike = 0.0;
  double r = 0.0;
};

// c = lambda alpha / (k m (1 + rho)), or 1 + lambda when k m = 0; throws
// EmptyContourRegion unless c > 1 and c_minus < c < c_plus.
ContourConfig contour_offset(const ModelParams& p, double lambda = kDefaultLambda);

// Price with a prebuilt characteristic function; cf.tau() is the maturity.
double lewis_call(double s0, double strike, double r, const LinearCf& cf, const ContourConfig& cc);
double lewis_call(double s0, double strike, double r, double tau, const ModelParams& p, double x0,
                  const ContourConfig& cc);

double black_scholes(double s0, double strike, double r, double tau, double sigma);
double black_scholes_vega(double s0, double strike, double r, double tau, double sigma);

inline constexpr double kImpliedVolLow = 1e-4;
inline constexpr double kImpliedVolHigh = 5.0;

// Safeguarded Newton on [1e-4, 5]. OutOfBounds when the price is not
// strictly inside the no-arbitrage interval or the bracket.
double implied_vol(double price, double s0, double strike, double r, double tau);

struct PdfOptions {
  double abs_tol = 1e-11;
  double rel_tol = 1e-9;
  double omega_max = 1e4;
};

// Density of X(tau) by Fourier inversion of the characteristic function.
double pdf_from_cf(double x, const LinearCf& cf, const PdfOptions& options = {});
double pdf_from_cf(double x, double tau, double x0, const ModelParams& p, const PdfOptions& options = {});
std::vector<double> pdf_curve(const std::vector<double>& xs, double tau, const ModelParams& p,
                              double x0 = 0.0, const PdfOptions& options = {});

// Model call prices and implied vols at each point; points may be given in
// any order and are evaluated independently.
std::vector<OptionQuote> smile_curve(const ModelParams& p, double s0, const std::vector<StrikePoint>& points,
                                     const ContourConfig& cc, double x0 = 0.0);

// Parameter order for covariance matrices: alpha, k, m, rho.
using ParamVector = Eigen::Vector4d;
using ParamCovariance = Eigen::Matrix4d;

ParamVector to_vector(const ModelParams& p);
ModelParams with_vector(ModelParams p, const ParamVector& v);

// First-order propagation of parameter uncertainty to implied vols:
// band^2 = J' Cov J with J from central differences (step 1e-3 |theta|,
// floor 1e-5). The contour is rebuilt with cc.lambda for each bump.
std::vector<double> smile_error_band(const ModelParams& p, const ParamCovariance& cov, double s0,
                                     const std::vector<StrikePoint>& points, const ContourConfig& cc);

}  // namespace lou
