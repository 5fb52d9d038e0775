#include "lou/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <limits>
#include <sstream>

#include "lou/errors.hpp"
#include "lou/text.hpp"

namespace lou {
namespace {

std::string printf_string(const char* format, auto... args) {
  const int n = std::snprintf(nullptr, 0, format, args...);
  std::string out(static_cast<std::size_t>(n), '\0');
  std::snprintf(out.data(), out.size() + 1, format, args...);
  return out;
}

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

std::string smile_csv_header() { return "tau_yr,log_moneyness,model_iv,band_std\n"; }

struct GridPoint {
  double tau;
  double r;
  double log_moneyness;
};

std::vector<GridPoint> smile_grid(const MarketDataset& data, const PipelineConfig& cfg) {
  std::vector<GridPoint> grid;
  for (const auto& b : data.blocks) {
    double lo = b.quotes.front().log_moneyness;
    double hi = lo;
    for (const auto& q : b.quotes) {
      lo = std::min(lo, q.log_moneyness);
      hi = std::max(hi, q.log_moneyness);
    }
    lo -= cfg.smile_margin;
    hi += cfg.smile_margin;
    const int n = std::max(cfg.smile_points, 2);
    for (int i = 0; i < n; ++i) grid.push_back({b.tau, b.r, lo + (hi - lo) * i / (n - 1)});
  }
  return grid;
}

struct SmileRows {
  std::vector<double> iv;
  std::vector<double> band;
};

SmileRows quadrature_smile(const ModelParams& p, const std::optional<CalibrationResult>& cal, double s0,
                           const std::vector<GridPoint>& grid, const PipelineConfig& cfg) {
  ContourConfig cc = contour_offset(p, cfg.lambda);
  cc.quad_abs_tol = cfg.quad_tol;
  std::vector<StrikePoint> points;
  for (const auto& g : grid) points.push_back({g.tau, s0 * std::exp(-g.log_moneyness), g.r});
  const auto quotes = smile_curve(p, s0, points, cc);
  SmileRows rows;
  for (const auto& q : quotes) rows.iv.push_back(q.implied_vol);
  if (cal) {
    rows.band = smile_error_band(p, cal->covariance, s0, points, cc);
  } else {
    rows.band.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  }
  return rows;
}

SmileRows simulated_smile(const ModelParams& p, double s0, const std::vector<GridPoint>& grid,
                          const PipelineConfig& cfg) {
  std::vector<double> taus;
  for (const auto& g : grid) {
    if (taus.empty() || taus.back() != g.tau) taus.push_back(g.tau);
  }
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
  const auto ensembles = simulate_term_structure(ModelKind::kExpOU, p, taus, cfg.sim);
  SmileRows rows;
  for (const auto& g : grid) {
    const auto idx = static_cast<std::size_t>(std::lower_bound(taus.begin(), taus.end(), g.tau) - taus.begin());
    const double strike = s0 * std::exp(-g.log_moneyness);
    const McEstimate est = mc_call_price(ensembles[idx], s0, strike, g.r);
    double iv = std::numeric_limits<double>::quiet_NaN();
    double band = iv;
    try {
      iv = implied_vol(est.value, s0, strike, g.r, g.tau);
      band = est.std_error / black_scholes_vega(s0, strike, g.r, g.tau, iv);
    } catch (const Error&) {
    }
    rows.iv.push_back(iv);
    rows.band.push_back(band);
  }
  return rows;
}

nlohmann::ordered_json config_to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["model"] = std::string(to_string(c.model));
  j["seed"] = c.sim.seed;
  j["paths"] = c.sim.n_paths;
  j["steps_per_year"] = c.sim.steps_per_year;
  j["scheme"] = "EulerMaruyama";
  j["lambda"] = c.lambda;
  j["quad_tol"] = c.quad_tol;
  j["error_seeds"] = c.error_seeds;
  j["smile_points"] = c.smile_points;
  j["smile_margin"] = c.smile_margin;
  j["pdf"] = c.pdf;
  j["pdf_tau"] = c.pdf_tau;
  j["pdf_x_min"] = c.pdf_x_min;
  j["pdf_x_max"] = c.pdf_x_max;
  j["pdf_points"] = c.pdf_points;
  return j;
}

PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  c.model = parse_model_kind(j.at("model").get<std::string>());
  c.sim.seed = j.at("seed").get<std::uint64_t>();
  c.sim.n_paths = j.at("paths").get<std::size_t>();
  c.sim.steps_per_year = j.at("steps_per_year").get<int>();
  c.lambda = j.at("lambda").get<double>();
  c.quad_tol = j.at("quad_tol").get<double>();
  c.error_seeds = j.at("error_seeds").get<int>();
  c.smile_points = j.at("smile_points").get<int>();
  c.smile_margin = j.at("smile_margin").get<double>();
  c.pdf = j.at("pdf").get<bool>();
  c.pdf_tau = j.at("pdf_tau").get<double>();
  c.pdf_x_min = j.at("pdf_x_min").get<double>();
  c.pdf_x_max = j.at("pdf_x_max").get<double>();
  c.pdf_points = j.at("pdf_points").get<int>();
  return c;
}

}  // namespace

std::string_view tool_version() { return LOU_VERSION; }

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIoError, "SHA-256 digest failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += printf_string("%02x", digest[i]);
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text_file(path)); }

std::string format_stats_text(const std::vector<SmileStats>& stats) {
  std::string out = printf_string("%-8s %9s %9s %9s %9s %9s %9s\n", "tau", "sigma", "err", "zeta", "err", "kappa",
                                  "err");
  for (const auto& s : stats) {
    out += printf_string("%-8.4f %9.5f %9.5f %9.4f %9.4f %9.3f %9.3f\n", s.tau, s.sigma, s.sigma_err, s.zeta,
                         s.zeta_err, s.kappa, s.kappa_err);
  }
  return out;
}

std::string format_stats_csv(const std::vector<SmileStats>& stats) {
  std::string out = "tau_yr,sigma,sigma_err,zeta,zeta_err,kappa,kappa_err\n";
  for (const auto& s : stats) {
    out += format_double(s.tau) + ',' + format_double(s.sigma) + ',' + format_double(s.sigma_err) + ',' +
           format_double(s.zeta) + ',' + format_double(s.zeta_err) + ',' + format_double(s.kappa) + ',' +
           format_double(s.kappa_err) + '\n';
  }
  return out;
}

std::string format_params_text(const CalibrationResult& r) {
  const bool fitted = std::isfinite(r.objective);
  auto cell = [&](double v, double e, const char* fmt) {
    return fitted ? printf_string(fmt, v, e) : printf_string(fmt, v, std::numeric_limits<double>::quiet_NaN());
  };
  std::string out = printf_string("%-10s %-18s %-18s %-18s %-18s %-18s\n", "model", "alpha", "k", "m", "rho", "beta");
  out += printf_string("%-10s ", std::string(to_string(r.kind)).c_str());
  out += cell(r.params.alpha, r.errors(0), "%7.3f +- %-7.3f ");
  out += cell(r.params.k, r.errors(1), "%7.3f +- %-7.3f ");
  out += cell(r.params.m, r.errors(2), "%7.4f +- %-7.4f ");
  out += cell(r.params.rho, r.errors(3), "%7.3f +- %-7.3f ");
  out += cell(r.beta, r.beta_err, "%7.3f +- %-7.3f");
  out += '\n';
  if (fitted) {
    out += printf_string("chi2 = %.4f  dof = %d\n", r.objective, r.dof);
  } else {
    out += "parameters supplied, not calibrated\n";
  }
  if (r.seed_errors) {
    const auto& s = *r.seed_errors;
    out += printf_string("seed-resampled errors: alpha %.3f  k %.3f  m %.4f  rho %.3f\n", s(0), s(1), s(2), s(3));
  }
  return out;
}

std::string format_params_csv(const CalibrationResult& r) {
  const bool fitted = std::isfinite(r.objective);
  auto err = [&](double e) { return fitted ? format_double(e) : std::string(); };
  std::string out =
      "model,alpha,alpha_err,k,k_err,m,m_err,rho,rho_err,beta,beta_err,chi2,dof,alpha_seed_err,k_seed_err,"
      "m_seed_err,rho_seed_err\n";
  out += std::string(to_string(r.kind)) + ',' + format_double(r.params.alpha) + ',' + err(r.errors(0)) + ',' +
         format_double(r.params.k) + ',' + err(r.errors(1)) + ',' + format_double(r.params.m) + ',' +
         err(r.errors(2)) + ',' + format_double(r.params.rho) + ',' + err(r.errors(3)) + ',' +
         format_double(r.beta) + ',' + err(r.beta_err) + ',' + csv_number(r.objective) + ',' +
         (fitted ? std::to_string(r.dof) : std::string());
  for (int i = 0; i < 4; ++i) out += ',' + (r.seed_errors ? format_double((*r.seed_errors)(i)) : std::string());
  out += '\n';
  return out;
}

std::string manifest_to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["version"] = m.version;
  j["inputs"]["market"] = {{"path", m.market_path.string()}, {"sha256", m.market_sha256}};
  if (m.params_path) j["inputs"]["params"] = {{"path", m.params_path->string()}, {"sha256", m.params_sha256}};
  j["config"] = config_to_json(m.config);
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(std::string_view text) {
  RunManifest m;
  try {
    const auto j = nlohmann::json::parse(text);
    m.command = j.at("command").get<std::string>();
    m.version = j.at("version").get<std::string>();
    const auto& inputs = j.at("inputs");
    m.market_path = inputs.at("market").at("path").get<std::string>();
    m.market_sha256 = inputs.at("market").at("sha256").get<std::string>();
    if (inputs.contains("params")) {
      m.params_path = inputs.at("params").at("path").get<std::string>();
      m.params_sha256 = inputs.at("params").at("sha256").get<std::string>();
    }
    m.config = config_from_json(j.at("config"));
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kSchemaMismatch, std::string("manifest: ") + ex.what());
  }
  return m;
}

PipelineResult run_pipeline(const MarketDataset& data, const PipelineConfig& config) {
  if (data.blocks.empty()) throw Error(ErrorCode::kEmptyBlock, "dataset has no quotes");
  PipelineResult result;
  std::vector<SmileStats> market;
  for (const auto& b : data.blocks) {
    try {
      result.fits.push_back(fit_smile(b.quotes));
    } catch (const Error& e) {
      throw Error(e.code(), "smile fit at tau=" + format_double(b.tau) + ": " + e.what());
    }
    market.push_back(result.fits.back().stats);
  }

  CalibrationResult table;
  if (config.params) {
    result.params = *config.params;
    require_valid(result.params);
    table.kind = config.model;
    table.params = result.params;
    table.objective = std::numeric_limits<double>::quiet_NaN();
    table.beta = result.params.beta();
  } else {
    CalibrationOptions options;
    options.sim = config.sim;
    options.error_seeds = config.error_seeds;
    result.calibration = calibrate(market, config.model, options);
    result.params = result.calibration->params;
    table = *result.calibration;
  }

  ReportBundle& files = result.files;
  files["fitted_stats.txt"] = format_stats_text(market);
  files["fitted_stats.csv"] = format_stats_csv(market);
  files["parameters.txt"] = format_params_text(table);
  files["parameters.csv"] = format_params_csv(table);

  const auto grid = smile_grid(data, config);
  const SmileRows rows = config.model == ModelKind::kExpOU
                             ? simulated_smile(result.params, data.s0, grid, config)
                             : quadrature_smile(result.params, result.calibration, data.s0, grid, config);
  std::string smile = smile_csv_header();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    smile += format_double(grid[i].tau) + ',' + format_double(grid[i].log_moneyness) + ',' + csv_number(rows.iv[i]) +
             ',' + csv_number(rows.band[i]) + '\n';
  }
  files["smile.csv"] = smile;

  std::string quotes = "tau_yr,log_moneyness,market_iv,gram_charlier_iv\n";
  for (std::size_t b = 0; b < data.blocks.size(); ++b) {
    const SmileStats& s = market[b];
    for (const auto& q : data.blocks[b].quotes) {
      const double d = d1_from_log_moneyness(q.log_moneyness, q.r, q.tau, s.sigma);
      quotes += format_double(q.tau) + ',' + format_double(q.log_moneyness) + ',' + format_double(q.implied_vol) +
                ',' + format_double(backus_iv(d, s, q.tau)) + '\n';
    }
  }
  files["quotes.csv"] = quotes;

  if (config.pdf) {
    std::vector<double> xs;
    const int n = std::max(config.pdf_points, 2);
    for (int i = 0; i < n; ++i) xs.push_back(config.pdf_x_min + (config.pdf_x_max - config.pdf_x_min) * i / (n - 1));
    const auto density = pdf_curve(xs, config.pdf_tau, result.params);
    std::string pdf = "x,density\n";
    for (std::size_t i = 0; i < xs.size(); ++i) pdf += format_double(xs[i]) + ',' + format_double(density[i]) + '\n';
    files["pdf.csv"] = pdf;
  }
  return result;
}

PipelineResult run_from_manifest(const RunManifest& manifest) {
  const std::string market_text = read_text_file(manifest.market_path);
  if (sha256_hex(market_text) != manifest.market_sha256) {
    throw Error(ErrorCode::kSchemaMismatch, manifest.market_path.string() + " does not match the manifest digest");
  }
  PipelineConfig config = manifest.config;
  if (manifest.params_path) {
    const std::string params_text = read_text_file(*manifest.params_path);
    if (sha256_hex(params_text) != manifest.params_sha256) {
      throw Error(ErrorCode::kSchemaMismatch, manifest.params_path->string() + " does not match the manifest digest");
    }
    config.params = params_from_key_values(parse_key_values(params_text));
  }
  PipelineResult result = run_pipeline(parse_market_csv(market_text, manifest.market_path.string()), config);
  RunManifest echo = manifest;
  echo.version = std::string(tool_version());
  result.files["manifest.json"] = manifest_to_json(echo);
  return result;
}

void write_bundle(const ReportBundle& files, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& [name, text] : files) write_text_file(out_dir / name, text);
}

}  // namespace lou
