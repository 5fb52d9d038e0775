#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lou/calibration.hpp"
#include "lou/cumulants.hpp"
#include "lou/errors.hpp"
#include "lou/market_data.hpp"
#include "lou/montecarlo.hpp"
#include "lou/pipeline.hpp"
#include "lou/pricer.hpp"
#include "lou/text.hpp"

namespace {

struct Globals {
  std::string model = "linear";
  std::uint64_t seed = 20071122;
  std::size_t paths = 100000;
  int steps_per_year = 250;
  double lambda = lou::kDefaultLambda;
  double quad_tol = 1e-9;
  std::string out_dir;
};

lou::SimConfig sim_config(const Globals& g) {
  lou::SimConfig sim;
  sim.seed = g.seed;
  sim.n_paths = g.paths;
  sim.steps_per_year = g.steps_per_year;
  return sim;
}

lou::ModelParams load_params(const std::string& path) {
  auto p = lou::params_from_key_values(lou::parse_key_values(lou::read_text_file(path)));
  lou::require_valid(p);
  return p;
}

// Prints to stdout, or writes under --out-dir when one is given.
void emit(const Globals& g, const std::string& name, const std::string& text) {
  if (g.out_dir.empty()) {
    std::cout << text;
  } else {
    lou::write_text_file(std::filesystem::path(g.out_dir) / name, text);
    std::cerr << "wrote " << (std::filesystem::path(g.out_dir) / name).string() << "\n";
  }
}

int exit_code(const lou::Error& e) {
  switch (lou::classify(e.code())) {
    case lou::ErrorClass::kInput: return 2;
    case lou::ErrorClass::kNumerical: return 3;
    case lou::ErrorClass::kConvergence: return 4;
  }
  return 3;
}

std::vector<lou::SmileStats> fit_all(const lou::MarketDataset& data) {
  std::vector<lou::SmileStats> stats;
  for (const auto& b : data.blocks) stats.push_back(lou::fit_smile_stats(b.quotes));
  return stats;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear Ornstein-Uhlenbeck stochastic volatility: smile fitting, calibration, pricing"};
  app.set_version_flag("--version", std::string(lou::tool_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--model", g.model, "linear, expou or s2")->capture_default_str();
  app.add_option("--seed", g.seed, "Monte Carlo seed")->capture_default_str();
  app.add_option("--paths", g.paths, "Monte Carlo paths")->capture_default_str();
  app.add_option("--steps-per-year", g.steps_per_year, "Euler steps per year")->capture_default_str();
  app.add_option("--lambda", g.lambda, "contour offset fraction in (0, 1]")->capture_default_str();
  app.add_option("--quad-tol", g.quad_tol, "absolute quadrature tolerance per unit spot")->capture_default_str();
  app.add_option("--out-dir", g.out_dir, "write outputs here instead of stdout");

  std::string market_path;
  std::string params_path;

  auto* fit = app.add_subcommand("fit-smile", "fit sigma, skewness and kurtosis per maturity");
  fit->add_option("--market", market_path, "market CSV")->required();

  int error_seeds = 0;
  auto* cal = app.add_subcommand("calibrate", "fit model parameters to the market smiles");
  cal->add_option("--market", market_path, "market CSV")->required();
  cal->add_option("--error-seeds", error_seeds, "ExpOU: extra MC seeds for the seed-resampled error");

  double s0 = 0.0, tau = 0.0, rate = 0.0;
  std::vector<double> strikes;
  auto* price = app.add_subcommand("price", "European call prices by contour integration");
  price->add_option("--params-file", params_path, "key = value parameter file")->required();
  price->add_option("--s0", s0, "spot")->required();
  price->add_option("--strike", strikes, "one or more strikes")->required();
  price->add_option("--tau", tau, "maturity in years")->required();
  price->add_option("--r", rate, "risk-free rate");

  auto* smile = app.add_subcommand("smile", "model smile on the market's maturities and strikes");
  smile->add_option("--params-file", params_path, "key = value parameter file")->required();
  smile->add_option("--market", market_path, "market CSV")->required();

  double x_min = -1.5, x_max = 1.5;
  int points = 301;
  auto* pdf = app.add_subcommand("pdf", "density of the log-return by Fourier inversion");
  pdf->add_option("--params-file", params_path, "key = value parameter file")->required();
  pdf->add_option("--tau", tau, "maturity in years")->required();
  pdf->add_option("--x-min", x_min)->capture_default_str();
  pdf->add_option("--x-max", x_max)->capture_default_str();
  pdf->add_option("--points", points)->capture_default_str();

  std::vector<double> taus;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo terminal log-returns and their statistics");
  sim->add_option("--params-file", params_path, "key = value parameter file")->required();
  sim->add_option("--tau", taus, "one or more increasing maturities")->required();

  std::string manifest_path;
  bool want_pdf = false;
  double pdf_tau = 1.0;
  auto* run = app.add_subcommand("run", "fit, calibrate, price and report, with a run manifest");
  run->add_option("--market", market_path, "market CSV");
  run->add_option("--params-file", params_path, "skip calibration and use these parameters");
  run->add_option("--manifest", manifest_path, "re-run exactly as recorded in a manifest");
  run->add_option("--error-seeds", error_seeds, "ExpOU: extra MC seeds for the seed-resampled error");
  run->add_flag("--pdf", want_pdf, "also emit the log-return density");
  run->add_option("--pdf-tau", pdf_tau, "maturity of the density")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const lou::ModelKind kind = lou::parse_model_kind(g.model);

    if (fit->parsed()) {
      const auto data = lou::load_market_csv(market_path);
      const auto stats = fit_all(data);
      emit(g, "fitted_stats.txt", lou::format_stats_text(stats));
      if (!g.out_dir.empty()) emit(g, "fitted_stats.csv", lou::format_stats_csv(stats));
    } else if (cal->parsed()) {
      const auto data = lou::load_market_csv(market_path);
      lou::CalibrationOptions options;
      options.sim = sim_config(g);
      options.error_seeds = error_seeds;
      const auto result = lou::calibrate(fit_all(data), kind, options);
      emit(g, "parameters.txt", lou::format_params_text(result));
      if (!g.out_dir.empty()) {
        emit(g, "parameters.csv", lou::format_params_csv(result));
        emit(g, "calibrated.params", lou::format_params(result.params));
      }
    } else if (price->parsed()) {
      auto p = load_params(params_path);
      p.r = rate;
      auto cc = lou::contour_offset(p, g.lambda);
      cc.quad_abs_tol = g.quad_tol;
      const lou::LinearCf cf(p, tau, 0.0);
      std::string out = "strike,price,implied_vol\n";
      for (double k : strikes) {
        const double v = lou::lewis_call(s0, k, rate, cf, cc);
        std::string iv;
        try {
          iv = lou::format_double(lou::implied_vol(v, s0, k, rate, tau));
        } catch (const lou::Error&) {
        }
        out += lou::format_double(k) + ',' + lou::format_double(v) + ',' + iv + '\n';
      }
      emit(g, "prices.csv", out);
    } else if (smile->parsed()) {
      lou::PipelineConfig config;
      config.model = kind;
      config.sim = sim_config(g);
      config.lambda = g.lambda;
      config.quad_tol = g.quad_tol;
      config.params = load_params(params_path);
      const auto result = lou::run_pipeline(lou::load_market_csv(market_path), config);
      emit(g, "smile.csv", result.files.at("smile.csv"));
    } else if (pdf->parsed()) {
      const auto p = load_params(params_path);
      std::vector<double> xs;
      for (int i = 0; i < points; ++i) xs.push_back(x_min + (x_max - x_min) * i / std::max(points - 1, 1));
      const auto density = lou::pdf_curve(xs, tau, p);
      std::string out = "x,density\n";
      for (std::size_t i = 0; i < xs.size(); ++i) {
        out += lou::format_double(xs[i]) + ',' + lou::format_double(density[i]) + '\n';
      }
      emit(g, "pdf.csv", out);
    } else if (sim->parsed()) {
      const auto p = load_params(params_path);
      const auto ensembles = lou::simulate_term_structure(kind, p, taus, sim_config(g));
      std::vector<lou::SmileStats> stats;
      std::string martingale = "tau_yr,mean_exp_x,std_error\n";
      for (std::size_t i = 0; i < ensembles.size(); ++i) {
        const auto& e = ensembles[i];
        stats.push_back(lou::mc_smile_stats(e));
        const auto m = lou::mc_martingale_mean(e);
        martingale += lou::format_double(e.tau) + ',' + lou::format_double(m.value) + ',' +
                      lou::format_double(m.std_error) + '\n';
        if (!g.out_dir.empty()) {
          char name[64];
          std::snprintf(name, sizeof name, "ensemble_%02zu", i);
          std::filesystem::create_directories(g.out_dir);
          lou::write_ensemble(e, std::filesystem::path(g.out_dir) / name);
        }
      }
      emit(g, "mc_stats.txt", lou::format_stats_text(stats));
      emit(g, "martingale.csv", martingale);
    } else if (run->parsed()) {
      lou::RunManifest manifest;
      if (!manifest_path.empty()) {
        manifest = lou::manifest_from_json(lou::read_text_file(manifest_path));
      } else {
        if (market_path.empty()) throw lou::Error(lou::ErrorCode::kInvalidParameter, "run needs --market or --manifest");
        manifest.market_path = market_path;
        manifest.market_sha256 = lou::sha256_file(market_path);
        if (!params_path.empty()) {
          manifest.params_path = params_path;
          manifest.params_sha256 = lou::sha256_file(params_path);
        }
        manifest.config.model = kind;
        manifest.config.sim = sim_config(g);
        manifest.config.lambda = g.lambda;
        manifest.config.quad_tol = g.quad_tol;
        manifest.config.error_seeds = error_seeds;
        manifest.config.pdf = want_pdf;
        manifest.config.pdf_tau = pdf_tau;
      }
      manifest.version = std::string(lou::tool_version());
      const auto result = lou::run_from_manifest(manifest);
      const std::filesystem::path out = g.out_dir.empty() ? std::filesystem::path("lou-run") : std::filesystem::path(g.out_dir);
      lou::write_bundle(result.files, out);
      std::cout << result.files.at("parameters.txt");
      std::cerr << "wrote " << result.files.size() << " files to " << out.string() << "\n";
    }
  } catch (const lou::Error& e) {
    std::cerr << "lou: " << lou::to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "lou: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
