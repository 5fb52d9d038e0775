#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace lou {

// Objective-measure parameters of the OU-driven volatility class.
// mu is carried for completeness; pricing always uses the risk-free rate.
struct ObjectiveParams {
  double mu = 0.0;
  double alpha = 1.0;
  double gamma = 0.0;
  double k = 0.1;
  double rho = 0.0;
  double m = 0.2;
  double y0 = 0.0;
  double s0 = 1.0;
};

// eta(Y) = eta0 + eta1 * Y, dimensionless multipliers of k in the Y drift.
struct MarketPriceOfRisk {
  double eta0 = 0.0;
  double eta1 = 0.0;
};

// Risk-neutral parameters of the Linear model (tildes dropped).
struct ModelParams {
  double alpha = 1.0;
  double k = 0.1;
  double m = 0.2;
  double rho = 0.0;
  double z0 = 1.0;
  double r = 0.0;

  // Stationary variance of the OU driver.
  double beta() const { return k * k / (2.0 * alpha); }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

enum class ModelKind { kLinear, kExpOU, kSteinStein };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

inline constexpr double kLinearizationBetaThreshold = 0.10;

struct ValidationReport {
  std::vector<std::string> violations;
  bool linearization_warning = false;
  double beta = 0.0;

  bool ok() const { return violations.empty(); }
};

// alpha -> alpha + k eta1, gamma -> (alpha gamma - k eta0) / (alpha + k eta1).
// Throws StationarityViolation when the transformed alpha is not positive.
ObjectiveParams risk_neutral_transform(const ObjectiveParams& obj, const MarketPriceOfRisk& eta);

// First-order expansion around Y = gamma. `obj` must already be risk-neutral.
// ExpOU: m -> m e^gamma, k -> k, Z0 = Y0 + 1 - gamma.
// Stein-Stein: m -> m gamma, k -> k / gamma, Z0 = Y0 / gamma.
ModelParams linearize(const ObjectiveParams& obj, ModelKind kind);

ValidationReport validate(const ModelParams& params);

// Throws InvalidParameter listing every violated invariant.
void require_valid(const ModelParams& params);

// Flat "key = value" text, one pair per line; keys alpha, k, m, rho, z0, r.
std::string format_params(const ModelParams& params);
std::map<std::string, double> parse_key_values(std::string_view text);
ModelParams params_from_key_values(const std::map<std::string, double>& values);

}  // namespace lou
