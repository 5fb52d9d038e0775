#pragma once

#include "lou/model.hpp"

namespace lou {

struct CumulantSet {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double k4 = 0.0;
  double tau = 0.0;
};

// Horizon standard deviation, skewness and excess kurtosis of the log-return,
// with standard errors (zero on the analytic path).
struct SmileStats {
  double tau = 0.0;
  double sigma = 0.0;
  double zeta = 0.0;
  double kappa = 0.0;
  double sigma_err = 0.0;
  double zeta_err = 0.0;
  double kappa_err = 0.0;
};

struct SkewKurtosis {
  double zeta = 0.0;
  double kappa = 0.0;
};

// Closed-form first four cumulants of the Linear model log-return X(tau).
CumulantSet analytic_cumulants(double tau, const ModelParams& p, double x0 = 0.0);

// sigma = sqrt(k2), zeta = k3 / sigma^3, kappa = k4 / sigma^4.
// Throws NonPositiveVariance when k2 <= 0.
SmileStats smile_stats_from_cumulants(const CumulantSet& c);

// Leading small-tau behaviour:
//   zeta ~ 3 k rho sqrt(tau) / Z0,  kappa ~ 4 k^2 (1 + 2 rho^2) tau / Z0^2.
SkewKurtosis small_tau_asymptotics(double tau, const ModelParams& p);

}  // namespace lou
