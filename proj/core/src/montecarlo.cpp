#include "lou/montecarlo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "lou/charfn.hpp"
#include "lou/errors.hpp"
#include "lou/parallel.hpp"

namespace lou {
namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

// Driver description shared by the three dynamics.
struct Dynamics {
  ModelKind kind;
  double alpha;
  double mean;  // long-run level of the driver: 1 for Linear, gamma otherwise
  double k;
  double rho;
  double m;
  double start;
};

struct Grid {
  std::vector<double> times;            // t_0 = 0 < t_1 < ... (fine)
  std::vector<std::size_t> record;      // fine index at which each maturity sits
  std::vector<double> martingale_step;  // Linear only: G(t_{i+1}) - G(t_i)
};

Grid build_grid(const std::vector<double>& taus, int steps_per_year, int refine) {
  Grid g;
  g.times.push_back(0.0);
  double prev = 0.0;
  for (double tau : taus) {
    const int coarse = std::max(1, static_cast<int>(std::ceil((tau - prev) * steps_per_year - 1e-9)));
    const int n = coarse * refine;
    for (int i = 1; i <= n; ++i) g.times.push_back(i == n ? tau : prev + (tau - prev) * i / n);
    g.record.push_back(g.times.size() - 1);
    prev = tau;
  }
  return g;
}

void check_taus(const std::vector<double>& taus) {
  if (taus.empty()) throw Error(ErrorCode::kInvalidParameter, "no maturities requested");
  double prev = 0.0;
  for (double t : taus) {
    if (!(t > prev)) throw Error(ErrorCode::kInvalidParameter, "maturities must be positive and increasing");
    prev = t;
  }
}

Dynamics dynamics_from(ModelKind kind, const ObjectiveParams& rn) {
  return {kind, rn.alpha, rn.gamma, rn.k, rn.rho, rn.m, rn.y0};
}

Dynamics dynamics_from(ModelKind kind, const ModelParams& p) {
  switch (kind) {
    case ModelKind::kLinear: return {kind, p.alpha, 1.0, p.k, p.rho, p.m, p.z0};
    case ModelKind::kExpOU: return {kind, p.alpha, 0.0, p.k, p.rho, p.m, p.z0 - 1.0};
    case ModelKind::kSteinStein: return {kind, p.alpha, 1.0, p.k, p.rho, p.m, p.z0};
  }
  return {};
}

struct PathState {
  double x = 0.0;
  double y = 0.0;
};

// One Euler-Maruyama step of length dt with Brownian increments dw1, dw2.
inline void advance(const Dynamics& dyn, double martingale_step, double dt, double dw1, double dw2,
                    PathState& s) {
  const double y = s.y;
  double vol = 0.0;
  double drift = 0.0;
  switch (dyn.kind) {
    case ModelKind::kLinear:
      vol = dyn.m * y;
      drift = -0.5 * dyn.m * dyn.m * (2.0 * y - 1.0) * dt - martingale_step;
      break;
    case ModelKind::kExpOU:
      vol = dyn.m * std::exp(y);
      drift = -0.5 * vol * vol * dt;
      break;
    case ModelKind::kSteinStein:
      vol = dyn.m * y;
      drift = -0.5 * vol * vol * dt;
      break;
  }
  s.x += drift + vol * dw1;
  s.y += dyn.alpha * (dyn.mean - y) * dt + dyn.k * (dyn.rho * dw1 + std::sqrt(1.0 - dyn.rho * dyn.rho) * dw2);
}

std::vector<double> martingale_steps(const Dynamics& dyn, const std::vector<double>& times) {
  std::vector<double> steps(times.size() - 1, 0.0);
  if (dyn.kind != ModelKind::kLinear) return steps;
  ModelParams p;
  p.alpha = dyn.alpha;
  p.k = dyn.k;
  p.m = dyn.m;
  p.rho = dyn.rho;
  p.z0 = dyn.start;
  double prev = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double cur = martingale_bracket(times[i], p);
    steps[i - 1] = cur - prev;
    prev = cur;
  }
  return steps;
}

std::vector<McEnsemble> make_ensembles(ModelKind kind, const std::vector<double>& taus, const SimConfig& cfg) {
  std::vector<McEnsemble> out(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    out[i].terminal_x.resize(cfg.n_paths);
    out[i].tau = taus[i];
    out[i].config = cfg;
    out[i].kind = kind;
  }
  return out;
}

// Simulates on the fine grid; when `coarse` is given, a second state is
// advanced every `refine` fine steps with the summed increments.
void run_paths(const Dynamics& dyn, const Grid& grid, const SimConfig& cfg, std::vector<McEnsemble>& fine,
               std::vector<McEnsemble>* coarse, int refine) {
  const std::vector<double> mart = martingale_steps(dyn, grid.times);
  const std::size_t n_steps = grid.times.size() - 1;
  parallel_for(cfg.n_paths, [&](std::size_t path) {
    PathRng rng(cfg.seed, path);
    std::normal_distribution<double> normal;
    PathState s{0.0, dyn.start};
    PathState sc{0.0, dyn.start};
    double acc_dt = 0.0, acc_w1 = 0.0, acc_w2 = 0.0, acc_m = 0.0;
    std::size_t next_record = 0;
    for (std::size_t i = 0; i < n_steps; ++i) {
      const double dt = grid.times[i + 1] - grid.times[i];
      const double sq = std::sqrt(dt);
      const double dw1 = sq * normal(rng);
      const double dw2 = sq * normal(rng);
      advance(dyn, mart[i], dt, dw1, dw2, s);
      if (coarse != nullptr) {
        acc_dt += dt;
        acc_w1 += dw1;
        acc_w2 += dw2;
        acc_m += mart[i];
        if ((i + 1) % refine == 0) {
          advance(dyn, acc_m, acc_dt, acc_w1, acc_w2, sc);
          acc_dt = acc_w1 = acc_w2 = acc_m = 0.0;
        }
      }
      if (next_record < grid.record.size() && grid.record[next_record] == i + 1) {
        fine[next_record].terminal_x[path] = s.x;
        if (coarse != nullptr) (*coarse)[next_record].terminal_x[path] = sc.x;
        ++next_record;
      }
    }
  });
}

struct PowerSums {
  double n = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;

  PowerSums& operator+=(const PowerSums& o) {
    n += o.n;
    s1 += o.s1;
    s2 += o.s2;
    s3 += o.s3;
    s4 += o.s4;
    return *this;
  }
  PowerSums& operator-=(const PowerSums& o) {
    n -= o.n;
    s1 -= o.s1;
    s2 -= o.s2;
    s3 -= o.s3;
    s4 -= o.s4;
    return *this;
  }
};

struct Triple {
  double sigma, zeta, kappa;
};

// k-statistics from raw sums of shifted data.
Triple stats_from_sums(const PowerSums& ps) {
  const double n = ps.n;
  const double mean = ps.s1 / n;
  const double m2 = ps.s2 / n - mean * mean;
  const double m3 = ps.s3 / n - 3.0 * mean * ps.s2 / n + 2.0 * mean * mean * mean;
  const double m4 = ps.s4 / n - 4.0 * mean * ps.s3 / n + 6.0 * mean * mean * ps.s2 / n - 3.0 * std::pow(mean, 4);
  const double k2 = n / (n - 1.0) * m2;
  const double k3 = n * n / ((n - 1.0) * (n - 2.0)) * m3;
  const double k4 = n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) / ((n - 1.0) * (n - 2.0) * (n - 3.0));
  return {std::sqrt(k2), k3 / std::pow(k2, 1.5), k4 / (k2 * k2)};
}

}  // namespace

PathRng::PathRng(std::uint64_t seed, std::uint64_t path)
    : state_(splitmix(splitmix(seed) ^ (path * kGolden + 0x632be59bd9b4e019ULL))) {}

PathRng::result_type PathRng::operator()() {
  state_ += kGolden;
  return splitmix(state_);
}

void require_valid(const SimConfig& cfg) {
  if (cfg.n_paths < 100) throw Error(ErrorCode::kInvalidParameter, "n_paths must be at least 100");
  if (cfg.steps_per_year < 50) throw Error(ErrorCode::kInvalidParameter, "steps_per_year must be at least 50");
}

std::vector<McEnsemble> simulate_term_structure(ModelKind kind, const ObjectiveParams& rn,
                                                const std::vector<double>& taus, const SimConfig& cfg) {
  if (kind == ModelKind::kLinear) {
    throw Error(ErrorCode::kInvalidParameter, "Linear paths take ModelParams");
  }
  require_valid(cfg);
  check_taus(taus);
  const Grid grid = build_grid(taus, cfg.steps_per_year, 1);
  auto out = make_ensembles(kind, taus, cfg);
  run_paths(dynamics_from(kind, rn), grid, cfg, out, nullptr, 1);
  return out;
}

std::vector<McEnsemble> simulate_term_structure(ModelKind kind, const ModelParams& p,
                                                const std::vector<double>& taus, const SimConfig& cfg) {
  require_valid(cfg);
  check_taus(taus);
  const Grid grid = build_grid(taus, cfg.steps_per_year, 1);
  auto out = make_ensembles(kind, taus, cfg);
  run_paths(dynamics_from(kind, p), grid, cfg, out, nullptr, 1);
  return out;
}

McEnsemble simulate(ModelKind kind, const ModelParams& p, double tau, const SimConfig& cfg) {
  return std::move(simulate_term_structure(kind, p, {tau}, cfg).front());
}

CoupledEnsembles simulate_coupled(ModelKind kind, const ModelParams& p, double tau, const SimConfig& cfg) {
  require_valid(cfg);
  if (cfg.steps_per_year % 2 != 0) {
    throw Error(ErrorCode::kInvalidParameter, "coupled simulation needs an even steps_per_year");
  }
  check_taus({tau});
  SimConfig coarse_cfg = cfg;
  coarse_cfg.steps_per_year = cfg.steps_per_year / 2;
  const Grid grid = build_grid({tau}, coarse_cfg.steps_per_year, 2);
  auto fine = make_ensembles(kind, {tau}, cfg);
  auto coarse = make_ensembles(kind, {tau}, coarse_cfg);
  run_paths(dynamics_from(kind, p), grid, cfg, fine, &coarse, 2);
  return {std::move(fine.front()), std::move(coarse.front())};
}

SmileStats mc_smile_stats(const McEnsemble& e) {
  const auto& xs = e.terminal_x;
  const std::size_t n = xs.size();
  if (n < static_cast<std::size_t>(4 * kJackknifeBatches)) {
    throw Error(ErrorCode::kInvalidParameter, "ensemble too small for jackknife statistics");
  }
  double shift = 0.0;
  for (double x : xs) shift += x;
  shift /= static_cast<double>(n);

  std::vector<PowerSums> batches(kJackknifeBatches);
  for (int b = 0; b < kJackknifeBatches; ++b) {
    const std::size_t lo = n * b / kJackknifeBatches;
    const std::size_t hi = n * (b + 1) / kJackknifeBatches;
    PowerSums ps;
    for (std::size_t i = lo; i < hi; ++i) {
      const double d = xs[i] - shift;
      const double d2 = d * d;
      ps.n += 1.0;
      ps.s1 += d;
      ps.s2 += d2;
      ps.s3 += d2 * d;
      ps.s4 += d2 * d2;
    }
    batches[b] = ps;
  }
  PowerSums total;
  for (const auto& b : batches) total += b;

  const Triple full = stats_from_sums(total);
  std::vector<Triple> loo(kJackknifeBatches);
  Triple mean{0.0, 0.0, 0.0};
  for (int b = 0; b < kJackknifeBatches; ++b) {
    PowerSums ps = total;
    ps -= batches[b];
    loo[b] = stats_from_sums(ps);
    mean.sigma += loo[b].sigma / kJackknifeBatches;
    mean.zeta += loo[b].zeta / kJackknifeBatches;
    mean.kappa += loo[b].kappa / kJackknifeBatches;
  }
  Triple var{0.0, 0.0, 0.0};
  for (const auto& t : loo) {
    var.sigma += (t.sigma - mean.sigma) * (t.sigma - mean.sigma);
    var.zeta += (t.zeta - mean.zeta) * (t.zeta - mean.zeta);
    var.kappa += (t.kappa - mean.kappa) * (t.kappa - mean.kappa);
  }
  const double scale = (kJackknifeBatches - 1.0) / kJackknifeBatches;

  SmileStats s;
  s.tau = e.tau;
  s.sigma = full.sigma;
  s.zeta = full.zeta;
  s.kappa = full.kappa;
  s.sigma_err = std::sqrt(scale * var.sigma);
  s.zeta_err = std::sqrt(scale * var.zeta);
  s.kappa_err = std::sqrt(scale * var.kappa);
  return s;
}

namespace {

template <typename F>
McEstimate sample_mean(const std::vector<double>& xs, F&& f) {
  // Welford keeps the reduction order fixed and the variance stable.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t count = 0;
  for (double x : xs) {
    const double v = f(x);
    ++count;
    const double delta = v - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (v - mean);
  }
  McEstimate est;
  est.value = mean;
  est.n = count;
  est.std_error = count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1) / static_cast<double>(count)) : 0.0;
  return est;
}

}  // namespace

McEstimate mc_call_price(const McEnsemble& e, double s0, double strike, double r) {
  const double fwd = s0 * std::exp(r * e.tau);
  const double disc = std::exp(-r * e.tau);
  McEstimate est = sample_mean(e.terminal_x, [&](double x) { return std::max(fwd * std::exp(x) - strike, 0.0); });
  est.value *= disc;
  est.std_error *= disc;
  return est;
}

McEstimate mc_martingale_mean(const McEnsemble& e) {
  return sample_mean(e.terminal_x, [](double x) { return std::exp(x); });
}

void write_ensemble(const McEnsemble& e, const std::filesystem::path& base) {
  const auto bin_path = std::filesystem::path(base.string() + ".bin");
  const auto meta_path = std::filesystem::path(base.string() + ".json");
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw Error(ErrorCode::kIoError, "cannot write " + bin_path.string());
  static_assert(std::endian::native == std::endian::little, "ensemble files are little-endian");
  bin.write(reinterpret_cast<const char*>(e.terminal_x.data()),
            static_cast<std::streamsize>(e.terminal_x.size() * sizeof(double)));

  nlohmann::ordered_json meta;
  meta["format"] = "float64-le";
  meta["n"] = e.terminal_x.size();
  meta["tau"] = e.tau;
  meta["seed"] = e.config.seed;
  meta["steps_per_year"] = e.config.steps_per_year;
  meta["scheme"] = "EulerMaruyama";
  meta["model_kind"] = std::string(to_string(e.kind));
  std::ofstream meta_out(meta_path);
  if (!meta_out) throw Error(ErrorCode::kIoError, "cannot write " + meta_path.string());
  meta_out << meta.dump(2) << "\n";
}

McEnsemble read_ensemble(const std::filesystem::path& base) {
  const auto bin_path = std::filesystem::path(base.string() + ".bin");
  const auto meta_path = std::filesystem::path(base.string() + ".json");
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw Error(ErrorCode::kIoError, "cannot read " + meta_path.string());
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kParseError, meta_path.string() + ": " + ex.what());
  }
  McEnsemble e;
  const auto n = meta.at("n").get<std::size_t>();
  e.tau = meta.at("tau").get<double>();
  e.config.seed = meta.at("seed").get<std::uint64_t>();
  e.config.steps_per_year = meta.at("steps_per_year").get<int>();
  e.config.n_paths = n;
  e.kind = parse_model_kind(meta.at("model_kind").get<std::string>());
  e.terminal_x.resize(n);
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw Error(ErrorCode::kIoError, "cannot read " + bin_path.string());
  bin.read(reinterpret_cast<char*>(e.terminal_x.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (bin.gcount() != static_cast<std::streamsize>(n * sizeof(double))) {
    throw Error(ErrorCode::kSchemaMismatch, bin_path.string() + " is shorter than its sidecar says");
  }
  return e;
}

}  // namespace lou
