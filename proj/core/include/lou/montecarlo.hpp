#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <vector>

#include "lou/cumulants.hpp"
#include "lou/model.hpp"

namespace lou {

enum class Scheme { kEulerMaruyama };

struct SimConfig {
  std::size_t n_paths = 100000;
  int steps_per_year = 250;
  std::uint64_t seed = 20071122;
  Scheme scheme = Scheme::kEulerMaruyama;
};

void require_valid(const SimConfig& cfg);

struct McEnsemble {
  std::vector<double> terminal_x;  // centred log-returns X(tau)
  double tau = 0.0;
  SimConfig config;
  ModelKind kind = ModelKind::kLinear;
};

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

// Counter-based generator: output i of stream (seed, path) is a SplitMix64
// mix of a key derived from both, so every path owns an independent,
// schedule-free stream.
class PathRng {
 public:
  using result_type = std::uint64_t;

  PathRng(std::uint64_t seed, std::uint64_t path);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

 private:
  std::uint64_t state_;
};

// Exact-dynamics paths for ExpOU (sigma = m e^Y) and Stein-Stein
// (sigma = m Y) from risk-neutral parameters with general gamma and Y0.
std::vector<McEnsemble> simulate_term_structure(ModelKind kind, const ObjectiveParams& rn,
                                                const std::vector<double>& taus, const SimConfig& cfg);

// Simulation driven by Linear-model parameters. For ExpOU the driver starts
// from gamma = 0, Y0 = Z0 - 1; for Stein-Stein gamma = 1, Y0 = Z0 (the
// inverse of the linearization map). Linear paths carry the martingale drift
// correction, integrated exactly over each step.
std::vector<McEnsemble> simulate_term_structure(ModelKind kind, const ModelParams& p,
                                                const std::vector<double>& taus, const SimConfig& cfg);

McEnsemble simulate(ModelKind kind, const ModelParams& p, double tau, const SimConfig& cfg);

// Same Brownian paths at cfg.steps_per_year (fine) and half that (coarse).
struct CoupledEnsembles {
  McEnsemble fine;
  McEnsemble coarse;
};
CoupledEnsembles simulate_coupled(ModelKind kind, const ModelParams& p, double tau, const SimConfig& cfg);

inline constexpr int kJackknifeBatches = 100;

// Unbiased cumulant estimates turned into (sigma, zeta, kappa), with
// delete-one-batch jackknife standard errors over 100 batches.
SmileStats mc_smile_stats(const McEnsemble& e);

// e^{-r tau} mean[(S0 e^{r tau + X} - K)^+].
McEstimate mc_call_price(const McEnsemble& e, double s0, double strike, double r);

// mean e^X, which is 1 for a martingale ensemble.
McEstimate mc_martingale_mean(const McEnsemble& e);

// <base>.bin holds terminal_x as raw little-endian float64; <base>.json is
// the sidecar with tau, seed, n, steps_per_year and model kind.
void write_ensemble(const McEnsemble& e, const std::filesystem::path& base);
McEnsemble read_ensemble(const std::filesystem::path& base);

}  // namespace lou
