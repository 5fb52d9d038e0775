#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "lou/calibration.hpp"
#include "lou/charfn.hpp"
#include "lou/cumulants.hpp"
#include "lou/market_data.hpp"
#include "lou/montecarlo.hpp"
#include "lou/pipeline.hpp"
#include "lou/pricer.hpp"
#include "oracles.hpp"

using namespace lou;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const ModelParams kLin{5.6, 1.9, 0.264, -0.41, 1.0, 0.0};
const ModelParams kExp{6.3, 1.3, 0.266, -0.51, 1.0, 0.0};

const std::string kMarket = std::string(LOU_DATA_DIR) + "/intesa_2007-11-22.csv";

std::vector<SmileStats> reference_stats() {
  auto row = [](double tau, double s, double se, double z, double ze, double k, double ke) {
    return SmileStats{tau, s, z, k, se, ze, ke};
  };
  return {row(0.0795, 0.0885, 0.0063, -0.80, 0.20, 2.0, 2.1),  row(0.1562, 0.1145, 0.0012, -0.578, 0.064, 1.44, 0.31),
          row(0.2329, 0.164, 0.013, -1.11, 0.16, 4.6, 1.8),    row(0.3260, 0.210, 0.071, -1.82, 0.92, 5.3, 7.8),
          row(0.5781, 0.235, 0.011, -0.587, 0.066, 1.7, 1.2),  row(0.8274, 0.269, 0.011, -0.760, 0.068, 0.2, 1.0)};
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Outcome cf_identities() {
  std::mt19937_64 rng(1);
  double worst_zero = 0.0, worst_mart = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto p = testing::random_params(rng);
    for (double tau : {0.01, 0.1, 1.0, 5.0}) {
      const LinearCf f(p, tau);
      worst_zero = std::max(worst_zero, std::abs(f(cplx(0.0, 0.0)) - 1.0));
      worst_mart = std::max(worst_mart, std::abs(f(cplx(0.0, -1.0)) - 1.0));
    }
  }
  return {worst_zero == 0.0 && worst_mart < 1e-9, fmt("max|f(0)-1| = %.1e, max|f(-i)-1| = %.2e", worst_zero, worst_mart)};
}

Outcome cumulant_oracle() {
  std::mt19937_64 rng(2);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto p = testing::random_params(rng);
    for (double tau : {0.1, 1.0, 3.0}) {
      const auto a = analytic_cumulants(tau, p);
      const auto fd = testing::fd_cumulants(tau, p, testing::fd_base_step(tau, p));
      const double an[4] = {a.k1, a.k2, a.k3, a.k4};
      for (int n = 0; n < 4; ++n) worst = std::max(worst, rel(an[n], fd[n]));
    }
  }
  return {worst < 1e-5, fmt("max relative error %.2e over 150 (set, tau)", worst)};
}

Outcome black_scholes_limit() {
  ModelParams p = kLin;
  p.k = 0.0;
  p.z0 = 1.0;
  p.r = 0.03;
  auto cc = contour_offset(p);
  cc.quad_abs_tol = 1e-11;
  cc.quad_rel_tol = 1e-13;
  const double s0 = 100.0;
  double worst = 0.0;
  int n = 0;
  for (double tau : {0.02, 0.25, 1.0, 5.0}) {
    for (double strike : {50.0, 85.0, 100.0, 120.0, 200.0}) {
      const double v = lewis_call(s0, strike, p.r, tau, p, 0.0, cc);
      worst = std::max(worst, std::abs(v - testing::bs_call(s0, strike, p.r, tau, p.m)));
      ++n;
    }
  }
  return {worst < 1e-8, fmt("max |lewis - BS| = %.2e over %d pairs, S0 = 100", worst, n)};
}

Outcome lambda_insensitivity() {
  const auto data = load_market_csv(kMarket);
  double worst_ratio = 0.0;
  int n = 0;
  for (const auto& b : data.blocks) {
    ModelParams p = kLin;
    p.r = b.r;
    const LinearCf f(p, b.tau);
    for (const auto& q : b.quotes) {
      const double strike = data.s0 * std::exp(-q.log_moneyness);
      const auto ref_cc = contour_offset(p, 0.5);
      const double ref = lewis_call(data.s0, strike, b.r, f, ref_cc);
      for (double lambda : {0.3, 0.8}) {
        const auto cc = contour_offset(p, lambda);
        const double v = lewis_call(data.s0, strike, b.r, f, cc);
        const double tol = std::max(cc.quad_abs_tol * data.s0, cc.quad_rel_tol * std::abs(ref));
        worst_ratio = std::max(worst_ratio, std::abs(v - ref) / (2.0 * tol));
      }
      ++n;
    }
  }
  return {worst_ratio <= 1.0, fmt("max |dprice| / (2 tol) = %.3f over %d strikes x 3 lambdas", worst_ratio, n)};
}

Outcome mc_concordance() {
  const auto data = load_market_csv(kMarket);
  std::vector<double> taus;
  for (const auto& b : data.blocks) taus.push_back(b.tau);
  SimConfig sim;
  sim.n_paths = 1'000'000;
  sim.seed = 20071122;
  // Euler's weak bias at 250 steps/yr is about 2 standard errors at this N
  // for the longest maturity; 2000/yr puts it well inside the band.
  sim.steps_per_year = 2000;
  const auto ensembles = simulate_term_structure(ModelKind::kLinear, kLin, taus, sim);
  int n = 0, within1 = 0, within3 = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < data.blocks.size(); ++i) {
    const auto& b = data.blocks[i];
    ModelParams p = kLin;
    p.r = b.r;
    const LinearCf f(p, b.tau);
    const auto cc = contour_offset(p);
    for (const auto& q : b.quotes) {
      const double strike = data.s0 * std::exp(-q.log_moneyness);
      const double iv_quad = implied_vol(lewis_call(data.s0, strike, b.r, f, cc), data.s0, strike, b.r, b.tau);
      const auto mc = mc_call_price(ensembles[i], data.s0, strike, b.r);
      const double iv_mc = implied_vol(mc.value, data.s0, strike, b.r, b.tau);
      const double iv_err = mc.std_error / black_scholes_vega(data.s0, strike, b.r, b.tau, iv_mc);
      const double z = std::abs(iv_quad - iv_mc) / iv_err;
      worst = std::max(worst, z);
      within1 += z <= 1.0;
      within3 += z <= 3.0;
      ++n;
    }
  }
  // A 68% band holds each point with probability 0.68; prices at one
  // maturity share paths, so the count is checked against a loose binomial floor.
  const int floor68 = static_cast<int>(std::floor(0.68 * n - 3.0 * std::sqrt(0.68 * 0.32 * n)));
  return {within1 >= floor68 && within3 == n,
          fmt("%d steps/yr: %d/%d inside 68%% band (floor %d), %d/%d inside 3 sigma, max |z| = %.2f", sim.steps_per_year, within1, n, floor68,
              within3, n, worst)};
}

Outcome step1_regression() {
  const auto data = load_market_csv(kMarket);
  const auto it = std::find_if(data.blocks.begin(), data.blocks.end(), [](const QuoteBlock& b) { return b.tau == 0.1562; });
  if (it == data.blocks.end()) return {false, "no tau = 0.1562 block"};
  const auto fit = fit_smile(it->quotes);
  const auto& s = fit.stats;
  const bool central = rel(s.sigma, 0.1145) < 0.01 && rel(s.zeta, -0.578) < 0.02 && rel(s.kappa, 1.44) < 0.05;
  const bool errors = rel(s.sigma_err, 0.0012) < 0.3 && rel(s.zeta_err, 0.064) < 0.3 && rel(s.kappa_err, 0.31) < 0.3;
  return {central && errors, fmt("sigma %.4f+-%.4f  zeta %.3f+-%.3f  kappa %.2f+-%.2f", s.sigma, s.sigma_err, s.zeta,
                                 s.zeta_err, s.kappa, s.kappa_err)};
}

Outcome linear_calibration() {
  const auto r = calibrate(reference_stats(), ModelKind::kLinear);
  const auto& p = r.params;
  const bool ok = std::abs(p.alpha - 5.6) < 2 * 1.3 && std::abs(p.k - 1.9) < 2 * 0.4 &&
                  std::abs(p.m - 0.264) < 2 * 0.008 && std::abs(p.rho + 0.41) < 2 * 0.07 &&
                  std::abs(r.beta - 0.34) < 2 * 0.15;
  return {ok, fmt("alpha %.2f+-%.2f  k %.3f+-%.3f  m %.4f+-%.4f  rho %.3f+-%.3f  beta %.3f+-%.3f  chi2 %.2f", p.alpha,
                  r.errors[0], p.k, r.errors[1], p.m, r.errors[2], p.rho, r.errors[3], r.beta, r.beta_err,
                  r.objective)};
}

Outcome expou_calibration() {
  CalibrationOptions options;
  options.sim.n_paths = 100'000;
  const auto r = calibrate(reference_stats(), ModelKind::kExpOU, options);
  const double ref[4] = {6.3, 1.3, 0.266, -0.51};
  const double ref_err[4] = {1.5, 0.1, 0.018, 0.09};
  const auto v = to_vector(r.params);
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double combined = std::hypot(ref_err[i], r.errors[i]);
    worst = std::max(worst, std::abs(v[i] - ref[i]) / combined);
  }
  return {worst < 3.0, fmt("alpha %.2f+-%.2f  k %.3f+-%.3f  m %.4f+-%.4f  rho %.3f+-%.3f  max pull %.2f", v[0],
                           r.errors[0], v[1], r.errors[1], v[2], r.errors[2], v[3], r.errors[3], worst)};
}

Outcome pdf_properties() {
  const double tau = 1.0;
  const int points = 801;
  const double x_min = -2.0, x_max = 2.0, h = (x_max - x_min) / (points - 1);
  std::vector<double> xs(points);
  for (int i = 0; i < points; ++i) xs[i] = x_min + i * h;
  double worst_mass = 0.0;
  std::vector<double> lin_pdf;
  for (const auto& p : {kExp, kLin}) {
    const auto d = pdf_curve(xs, tau, p);
    double mass = 0.5 * (d.front() + d.back());
    for (int i = 1; i + 1 < points; ++i) mass += d[i];
    worst_mass = std::max(worst_mass, std::abs(mass * h - 1.0));
    if (lin_pdf.empty()) lin_pdf = d;
  }

  SimConfig sim;
  sim.n_paths = 1'000'000;
  sim.seed = 4;
  const auto e = simulate(ModelKind::kExpOU, kExp, tau, sim);
  const double n = static_cast<double>(e.terminal_x.size());

  // Peak: density averaged over [-w, w] against the same average of the Linear pdf.
  const double w = 0.05;
  const double in_bin = std::count_if(e.terminal_x.begin(), e.terminal_x.end(), [&](double x) { return std::abs(x) <= w; });
  const double p_bin = in_bin / n;
  const double mc_peak = p_bin / (2 * w), mc_peak_err = std::sqrt(p_bin * (1 - p_bin) / n) / (2 * w);
  double lin_bin = 0.0;
  for (int i = 0; i < points; ++i) {
    if (std::abs(xs[i]) <= w + 1e-12) lin_bin += (std::abs(std::abs(xs[i]) - w) < 1e-12 ? 0.5 : 1.0) * lin_pdf[i] * h;
  }
  const double lin_peak = lin_bin / (2 * w);

  // Tails: mass beyond |x| > 0.8.
  const double tail_cut = 0.8;
  const double in_tail =
      std::count_if(e.terminal_x.begin(), e.terminal_x.end(), [&](double x) { return std::abs(x) > tail_cut; });
  const double mc_tail = in_tail / n, mc_tail_err = std::sqrt(mc_tail * (1 - mc_tail) / n);
  double lin_core = 0.0;
  for (int i = 0; i < points; ++i) {
    if (std::abs(xs[i]) <= tail_cut + 1e-12) {
      lin_core += (std::abs(std::abs(xs[i]) - tail_cut) < 1e-12 ? 0.5 : 1.0) * lin_pdf[i] * h;
    }
  }
  const double lin_tail = 1.0 - lin_core;

  const double z_peak = (lin_peak - mc_peak) / mc_peak_err;
  const double z_tail = (mc_tail - lin_tail) / mc_tail_err;
  return {worst_mass < 1e-4 && z_peak > 3.0 && z_tail > 3.0,
          fmt("|mass-1| = %.1e; peak lin %.4f vs ExpOU %.4f (z %.1f); tail lin %.5f vs ExpOU %.5f (z %.1f)",
              worst_mass, lin_peak, mc_peak, z_peak, lin_tail, mc_tail, z_tail)};
}

Outcome small_tau() {
  std::mt19937_64 rng(3);
  const double tau = 1e-3;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    auto p = testing::random_params(rng);
    // Relative error of the skew asymptote is undefined as rho -> 0.
    if (std::abs(p.rho) < 0.2) p.rho = std::copysign(0.2 + std::abs(p.rho), p.rho);
    const auto full = smile_stats_from_cumulants(analytic_cumulants(tau, p));
    const auto asym = small_tau_asymptotics(tau, p);
    worst = std::max({worst, rel(full.zeta, asym.zeta), rel(full.kappa, asym.kappa)});
  }
  return {worst < 0.05, fmt("max relative deviation %.2e over 20 sets", worst)};
}

Outcome determinism() {
  RunManifest m;
  m.version = std::string(tool_version());
  m.market_path = kMarket;
  m.market_sha256 = sha256_file(kMarket);
  m.config.pdf = true;
  const auto a = run_from_manifest(m);
  const auto b = run_from_manifest(manifest_from_json(manifest_to_json(m)));
  int differing = 0;
  for (const auto& [name, text] : a.files) {
    const auto it = b.files.find(name);
    differing += it == b.files.end() || it->second != text;
  }
  const bool same = a.files.size() == b.files.size() && differing == 0;
  return {same, fmt("%zu files, %d differ", a.files.size(), differing)};
}

}  // namespace

// Optional arguments select criteria by number.
int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const std::vector<Criterion> criteria{
      {1, "cf-identities", 10, cf_identities},
      {2, "cumulant-oracle", 30, cumulant_oracle},
      {3, "black-scholes-limit", 5, black_scholes_limit},
      {4, "lambda-insensitivity", 5, lambda_insensitivity},
      {5, "mc-quadrature-concordance", 600, mc_concordance},
      {6, "step1-regression", 1, step1_regression},
      {7, "linear-calibration", 60, linear_calibration},
      {8, "expou-calibration", 7200, expou_calibration},
      {9, "pdf-properties", 300, pdf_properties},
      {10, "small-tau-asymptotics", 5, small_tau},
      {11, "determinism", 600, determinism},
  };
  int failures = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs < c.budget_s;
    const bool pass = o.pass && in_budget;
    failures += !pass;
    std::printf("[%s] %2d %-26s %8.2fs (budget %gs%s)  %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, c.budget_s,
                in_budget ? "" : ", exceeded", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failures, ran);
  return failures == 0 ? 0 : 1;
}
