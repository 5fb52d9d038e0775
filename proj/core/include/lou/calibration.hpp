#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "lou/cumulants.hpp"
#include "lou/model.hpp"
#include "lou/montecarlo.hpp"
#include "lou/pricer.hpp"

namespace lou {

struct MarketQuote {
  double tau = 0.0;
  double r = 0.0;
  double log_moneyness = 0.0;  // ln(S0 / K)
  double implied_vol = 0.0;
};

// [ln(S0/K) + r tau + sigma_tau^2 / 2] / sigma_tau, with sigma_tau the
// horizon (not annualized) standard deviation.
double d1(double tau, double strike, double s0, double r, double sigma_tau);
double d1_from_log_moneyness(double log_moneyness, double r, double tau, double sigma_tau);

// Gram-Charlier smile: (sigma_tau / sqrt tau) [1 - zeta d1 / 6 - kappa (1 - d1^2) / 24].
double backus_iv(double d1, const SmileStats& stats, double tau);

// The expansion is only trusted near the money with a small horizon vol.
inline constexpr double kBackusMaxAbsD1 = 1.5;
inline constexpr double kBackusMaxSigma = 0.5;
bool outside_backus_validity(double d1, double sigma_tau);

inline constexpr int kSmileFitMaxIterations = 500;

struct SmileFit {
  SmileStats stats;
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
  Eigen::VectorXd residuals;  // model minus market implied vol
  Eigen::MatrixXd jacobian;   // d residuals / d (sigma, zeta, kappa)
  double chi2 = 0.0;
  int dof = 0;
  int iterations = 0;
  int quotes_outside_validity = 0;
};

// Least-squares fit of the Gram-Charlier smile to one maturity. Errors are
// the linearized covariance scaled by the residual variance chi2 / dof.
SmileFit fit_smile(const std::vector<MarketQuote>& quotes);
SmileStats fit_smile_stats(const std::vector<MarketQuote>& quotes);

// Model-side term structure of (sigma, zeta, kappa). Linear and Stein-Stein
// use the closed-form cumulants; ExpOU is simulated with `sim`.
std::vector<SmileStats> model_smile_stats(ModelKind kind, const ModelParams& p, const std::vector<double>& taus,
                                          const SimConfig& sim = {});

// Chi-square with eps^2 = eps_market^2 + eps_model^2 per statistic.
double global_objective(const std::vector<SmileStats>& model, const std::vector<SmileStats>& market);
double global_objective(const ModelParams& p, ModelKind kind, const std::vector<SmileStats>& market,
                        const SimConfig& sim = {});

struct CalibrationOptions {
  std::vector<ModelParams> seed_points;  // empty: default_seed_points()
  SimConfig sim{100000, 250, 20071122, Scheme::kEulerMaruyama};
  int max_iterations = 4000;
  double simplex_tol = 1e-7;
  // ExpOU only: number of extra MC seeds used to measure the spread of the
  // optimum under simulation noise. Zero disables it.
  int error_seeds = 0;
};

std::vector<ModelParams> default_seed_points();

struct CalibrationResult {
  ModelKind kind = ModelKind::kLinear;
  ModelParams params;
  ParamVector errors = ParamVector::Zero();
  ParamCovariance covariance = ParamCovariance::Zero();
  double objective = 0.0;
  int dof = 0;
  double beta = 0.0;
  double beta_err = 0.0;
  std::vector<SmileStats> per_maturity_fit;  // market targets
  std::vector<SmileStats> model_stats;       // model at the optimum
  std::vector<double> start_objectives;      // one per seed point, +inf if failed
  std::optional<ParamVector> seed_errors;    // ExpOU seed-resampled spread
  bool hessian_positive_definite = true;
};

// Multistart simplex over (log alpha, log k, log m, atanh rho), a Newton
// polish on the numerical Hessian, and covariance 2 H^-1 (the chi-square
// rises by one at one standard error).
CalibrationResult calibrate(const std::vector<SmileStats>& market, ModelKind kind,
                            const CalibrationOptions& options = {});

Eigen::Vector4d to_unconstrained(const ModelParams& p);
ModelParams from_unconstrained(const Eigen::Vector4d& u);

}  // namespace lou
