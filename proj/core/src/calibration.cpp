#include "lou/calibration.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lou/errors.hpp"
#include "lou/optimize.hpp"
#include "lou/parallel.hpp"

namespace lou {

double d1_from_log_moneyness(double log_moneyness, double r, double tau, double sigma_tau) {
  return (log_moneyness + r * tau + 0.5 * sigma_tau * sigma_tau) / sigma_tau;
}

double d1(double tau, double strike, double s0, double r, double sigma_tau) {
  return d1_from_log_moneyness(std::log(s0 / strike), r, tau, sigma_tau);
}

double backus_iv(double d, const SmileStats& s, double tau) {
  return s.sigma / std::sqrt(tau) * (1.0 - s.zeta / 6.0 * d - s.kappa / 24.0 * (1.0 - d * d));
}

bool outside_backus_validity(double d, double sigma_tau) {
  return std::abs(d) > kBackusMaxAbsD1 || sigma_tau > kBackusMaxSigma;
}

SmileFit fit_smile(const std::vector<MarketQuote>& quotes) {
  if (quotes.size() < 4) {
    throw Error(ErrorCode::kInsufficientQuotes,
                "smile fit needs at least 4 quotes, got " + std::to_string(quotes.size()));
  }
  const double tau = quotes.front().tau;
  double mean_iv = 0.0;
  for (const auto& q : quotes) {
    if (q.tau != tau) throw Error(ErrorCode::kInvalidParameter, "smile fit quotes must share one maturity");
    if (!(q.tau > 0.0) || !(q.implied_vol > 0.0)) {
      throw Error(ErrorCode::kInvalidParameter, "quotes need tau > 0 and implied_vol > 0");
    }
    mean_iv += q.implied_vol / static_cast<double>(quotes.size());
  }

  const Residuals residuals = [&](const Eigen::VectorXd& x) {
    SmileStats s;
    s.sigma = x(0);
    s.zeta = x(1);
    s.kappa = x(2);
    Eigen::VectorXd r(static_cast<Eigen::Index>(quotes.size()));
    for (std::size_t i = 0; i < quotes.size(); ++i) {
      const auto& q = quotes[i];
      r(static_cast<Eigen::Index>(i)) =
          backus_iv(d1_from_log_moneyness(q.log_moneyness, q.r, tau, s.sigma), s, tau) - q.implied_vol;
    }
    return r;
  };

  LeastSquaresOptions options;
  options.max_iterations = kSmileFitMaxIterations;
  const Eigen::Vector3d start(mean_iv * std::sqrt(tau), 0.0, 0.0);
  const LeastSquaresResult ls = levenberg_marquardt(residuals, quotes.size(), start, options);

  SmileFit fit;
  fit.iterations = ls.iterations;
  fit.residuals = ls.residuals;
  fit.jacobian = ls.jacobian;
  fit.chi2 = ls.chi2;
  fit.dof = static_cast<int>(quotes.size()) - 3;
  const Eigen::Matrix3d jtj = ls.jacobian.transpose() * ls.jacobian;
  fit.covariance = jtj.inverse() * (fit.chi2 / fit.dof);
  fit.stats.tau = tau;
  fit.stats.sigma = ls.x(0);
  fit.stats.zeta = ls.x(1);
  fit.stats.kappa = ls.x(2);
  fit.stats.sigma_err = std::sqrt(fit.covariance(0, 0));
  fit.stats.zeta_err = std::sqrt(fit.covariance(1, 1));
  fit.stats.kappa_err = std::sqrt(fit.covariance(2, 2));
  if (!(fit.stats.sigma > 0.0)) throw Error(ErrorCode::kNonConvergence, "smile fit produced sigma <= 0");
  for (const auto& q : quotes) {
    if (outside_backus_validity(d1_from_log_moneyness(q.log_moneyness, q.r, tau, fit.stats.sigma),
                                fit.stats.sigma)) {
      ++fit.quotes_outside_validity;
    }
  }
  return fit;
}

SmileStats fit_smile_stats(const std::vector<MarketQuote>& quotes) { return fit_smile(quotes).stats; }

std::vector<SmileStats> model_smile_stats(ModelKind kind, const ModelParams& p, const std::vector<double>& taus,
                                          const SimConfig& sim) {
  std::vector<SmileStats> out(taus.size());
  if (kind != ModelKind::kExpOU) {
    for (std::size_t i = 0; i < taus.size(); ++i) {
      out[i] = smile_stats_from_cumulants(analytic_cumulants(taus[i], p));
    }
    return out;
  }
  std::vector<std::size_t> order(taus.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return taus[a] < taus[b]; });
  std::vector<double> sorted;
  for (auto i : order) sorted.push_back(taus[i]);
  const auto ensembles = simulate_term_structure(kind, p, sorted, sim);
  for (std::size_t j = 0; j < order.size(); ++j) out[order[j]] = mc_smile_stats(ensembles[j]);
  return out;
}

double global_objective(const std::vector<SmileStats>& model, const std::vector<SmileStats>& market) {
  if (model.size() != market.size()) throw Error(ErrorCode::kInvalidParameter, "stat lists differ in length");
  auto term = [](double a, double b, double ea, double eb) {
    const double d = a - b;
    return d * d / (ea * ea + eb * eb);
  };
  double chi2 = 0.0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto& m = model[i];
    const auto& t = market[i];
    chi2 += term(m.sigma, t.sigma, m.sigma_err, t.sigma_err) + term(m.zeta, t.zeta, m.zeta_err, t.zeta_err) +
            term(m.kappa, t.kappa, m.kappa_err, t.kappa_err);
  }
  return chi2;
}

double global_objective(const ModelParams& p, ModelKind kind, const std::vector<SmileStats>& market,
                        const SimConfig& sim) {
  std::vector<double> taus;
  for (const auto& s : market) taus.push_back(s.tau);
  return global_objective(model_smile_stats(kind, p, taus, sim), market);
}

Eigen::Vector4d to_unconstrained(const ModelParams& p) {
  return {std::log(p.alpha), std::log(p.k), std::log(p.m), std::atanh(p.rho)};
}

ModelParams from_unconstrained(const Eigen::Vector4d& u) {
  ModelParams p;
  p.alpha = std::exp(u(0));
  p.k = std::exp(u(1));
  p.m = std::exp(u(2));
  p.rho = std::tanh(u(3));
  p.z0 = 1.0;
  p.r = 0.0;
  return p;
}

std::vector<ModelParams> default_seed_points() {
  // Half fraction of a two-level design at the lower and upper quartiles of
  // alpha in [1, 20], k in [0.2, 4], m in [0.05, 0.8] (log scale) and
  // rho in [-0.9, 0.9] (atanh scale).
  auto level = [](double lo, double hi, bool up) { return lo * std::pow(hi / lo, up ? 0.75 : 0.25); };
  const double rho_level = std::tanh(0.5 * std::atanh(0.9));
  std::vector<ModelParams> seeds;
  for (int i = 0; i < 8; ++i) {
    const bool a = i & 1, b = i & 2, c = i & 4;
    ModelParams p;
    p.alpha = level(1.0, 20.0, a);
    p.k = level(0.2, 4.0, b);
    p.m = level(0.05, 0.8, c);
    p.rho = (a ^ b ^ c) ? rho_level : -rho_level;
    p.z0 = 1.0;
    seeds.push_back(p);
  }
  return seeds;
}

namespace {

constexpr double kInvalid = std::numeric_limits<double>::infinity();

Objective natural_objective(ModelKind kind, const std::vector<SmileStats>& market, const SimConfig& sim) {
  return [kind, &market, sim](const Eigen::VectorXd& theta) {
    ModelParams p;
    p.alpha = theta(0);
    p.k = theta(1);
    p.m = theta(2);
    p.rho = theta(3);
    if (!(p.alpha > 0.0 && p.k > 0.0 && p.m > 0.0 && std::abs(p.rho) < 1.0)) return kInvalid;
    try {
      return global_objective(p, kind, market, sim);
    } catch (const Error&) {
      return kInvalid;
    }
  };
}

Objective unconstrained_objective(const Objective& natural) {
  return [natural](const Eigen::VectorXd& u) {
    const ModelParams p = from_unconstrained(u);
    return natural(to_vector(p));
  };
}

struct Start {
  MinimizeResult result;
  bool ok = false;
};

std::vector<Start> multistart(const Objective& f, const std::vector<ModelParams>& seeds,
                              const SimplexOptions& options) {
  std::vector<Start> starts(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) {
    starts[i].result = nelder_mead(f, to_unconstrained(seeds[i]), options);
    starts[i].ok = std::isfinite(starts[i].result.value) && starts[i].result.value < 1e99;
  });
  return starts;
}

std::size_t best_start(const std::vector<Start>& starts) {
  std::size_t best = starts.size();
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (starts[i].ok && (best == starts.size() || starts[i].result.value < starts[best].result.value)) best = i;
  }
  if (best == starts.size()) throw Error(ErrorCode::kAllStartsFailed, "no seed point produced a finite objective");
  return best;
}

Eigen::Vector4d hessian_steps(const Eigen::Vector4d& theta) {
  Eigen::Vector4d h;
  for (int i = 0; i < 3; ++i) h(i) = 1e-3 * std::abs(theta(i));
  h(3) = 1e-3 * std::max(1.0 - std::abs(theta(3)), 1e-3);
  return h;
}

}  // namespace

CalibrationResult calibrate(const std::vector<SmileStats>& market, ModelKind kind,
                            const CalibrationOptions& options) {
  if (market.size() < 2) throw Error(ErrorCode::kInvalidParameter, "calibration needs at least 2 maturities");
  require_valid(options.sim);
  const std::vector<ModelParams> seeds = options.seed_points.empty() ? default_seed_points() : options.seed_points;

  SimplexOptions simplex;
  simplex.max_iterations = options.max_iterations;
  simplex.size_tol = options.simplex_tol;

  // ExpOU is screened on its linearization, which is cheap and shares the
  // optimum's neighbourhood, then polished on simulated statistics.
  const ModelKind screen_kind = kind == ModelKind::kExpOU ? ModelKind::kLinear : kind;
  const Objective screen = natural_objective(screen_kind, market, options.sim);
  const auto starts = multistart(unconstrained_objective(screen), seeds, simplex);
  const std::size_t best = best_start(starts);

  CalibrationResult result;
  result.kind = kind;
  result.per_maturity_fit = market;
  for (const auto& s : starts) result.start_objectives.push_back(s.ok ? s.result.value : kInvalid);

  const Objective f = natural_objective(kind, market, options.sim);
  MinimizeResult opt = starts[best].result;
  if (kind == ModelKind::kExpOU) {
    SimplexOptions polish = simplex;
    polish.initial_step = 0.05;
    opt = nelder_mead(unconstrained_objective(f), opt.x, polish);
  }
  if (!opt.converged) {
    throw Error(ErrorCode::kNonConvergence,
                "simplex did not converge in " + std::to_string(options.max_iterations) + " iterations");
  }

  Eigen::Vector4d theta = to_vector(from_unconstrained(opt.x));
  double value = f(theta);

  // One Newton step on the local quadratic model, kept only if it helps.
  Eigen::MatrixXd hess = numerical_hessian(f, theta, hessian_steps(theta));
  {
    const Eigen::VectorXd grad = numerical_gradient(f, theta, hessian_steps(theta));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
    if (eig.eigenvalues().minCoeff() > 0.0) {
      const Eigen::Vector4d trial = theta - hess.ldlt().solve(grad);
      const double trial_value = f(trial);
      if (trial_value < value) {
        theta = trial;
        value = trial_value;
        hess = numerical_hessian(f, theta, hessian_steps(theta));
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
  const Eigen::VectorXd lambda = eig.eigenvalues();
  result.hessian_positive_definite = lambda.minCoeff() > 0.0;
  // Directions with no curvature are left out of the covariance.
  const double floor = 1e-12 * std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(4);
  for (int i = 0; i < 4; ++i) {
    if (std::abs(lambda(i)) > floor) inv(i) = 2.0 / std::abs(lambda(i));
  }
  result.covariance = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();

  result.params = with_vector(ModelParams{}, theta);
  result.params.z0 = 1.0;
  result.objective = value;
  result.dof = 3 * static_cast<int>(market.size()) - 4;
  for (int i = 0; i < 4; ++i) result.errors(i) = std::sqrt(std::max(result.covariance(i, i), 0.0));

  result.beta = result.params.beta();
  const Eigen::Vector4d grad_beta(-result.params.k * result.params.k / (2.0 * result.params.alpha * result.params.alpha),
                                  result.params.k / result.params.alpha, 0.0, 0.0);
  result.beta_err = std::sqrt(std::max(grad_beta.dot(result.covariance * grad_beta), 0.0));

  std::vector<double> taus;
  for (const auto& s : market) taus.push_back(s.tau);
  result.model_stats = model_smile_stats(kind, result.params, taus, options.sim);

  if (kind == ModelKind::kExpOU && options.error_seeds > 1) {
    std::vector<Eigen::Vector4d> optima;
    SimplexOptions polish = simplex;
    polish.initial_step = 0.05;
    for (int s = 1; s <= options.error_seeds; ++s) {
      SimConfig sim = options.sim;
      sim.seed = options.sim.seed + static_cast<std::uint64_t>(s);
      const Objective fs = natural_objective(kind, market, sim);
      const MinimizeResult r = nelder_mead(unconstrained_objective(fs), to_unconstrained(result.params), polish);
      optima.push_back(to_vector(from_unconstrained(r.x)));
    }
    Eigen::Vector4d mean = Eigen::Vector4d::Zero();
    for (const auto& o : optima) mean += o / static_cast<double>(optima.size());
    Eigen::Vector4d var = Eigen::Vector4d::Zero();
    for (const auto& o : optima) var += (o - mean).cwiseAbs2() / static_cast<double>(optima.size() - 1);
    result.seed_errors = var.cwiseSqrt();
  }
  return result;
}

}  // namespace lou
