#include "lou/model.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "lou/errors.hpp"
#include "lou/text.hpp"

namespace lou {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinear: return "Linear";
    case ModelKind::kExpOU: return "ExpOU";
    case ModelKind::kSteinStein: return "SteinStein";
  }
  return "Linear";
}

ModelKind parse_model_kind(std::string_view text) {
  const std::string lower = to_lower(text);
  if (lower == "linear" || lower == "lin") return ModelKind::kLinear;
  if (lower == "expou") return ModelKind::kExpOU;
  if (lower == "steinstein" || lower == "stein-stein" || lower == "s2") return ModelKind::kSteinStein;
  throw Error(ErrorCode::kInvalidParameter, "unknown model kind '" + std::string(text) + "'");
}

ObjectiveParams risk_neutral_transform(const ObjectiveParams& obj, const MarketPriceOfRisk& eta) {
  const double alpha_rn = obj.alpha + obj.k * eta.eta1;
  if (!(alpha_rn > 0.0)) {
    std::ostringstream msg;
    msg << "alpha + k*eta1 = " << alpha_rn << " must be positive";
    throw Error(ErrorCode::kStationarityViolation, msg.str());
  }
  ObjectiveParams out = obj;
  out.alpha = alpha_rn;
  out.gamma = (obj.alpha * obj.gamma - obj.k * eta.eta0) / alpha_rn;
  return out;
}

ModelParams linearize(const ObjectiveParams& obj, ModelKind kind) {
  ModelParams p;
  p.alpha = obj.alpha;
  p.rho = obj.rho;
  switch (kind) {
    case ModelKind::kExpOU:
      p.m = obj.m * std::exp(obj.gamma);
      p.k = obj.k;
      p.z0 = obj.y0 + 1.0 - obj.gamma;
      break;
    case ModelKind::kSteinStein:
      if (obj.gamma == 0.0) {
        throw Error(ErrorCode::kDegenerateGamma, "Stein-Stein linearization needs gamma != 0");
      }
      p.m = obj.m * obj.gamma;
      p.k = obj.k / obj.gamma;
      p.z0 = obj.y0 / obj.gamma;
      break;
    case ModelKind::kLinear:
      throw Error(ErrorCode::kInvalidParameter, "linearize expects ExpOU or SteinStein");
  }
  return p;
}

ValidationReport validate(const ModelParams& params) {
  ValidationReport report;
  auto check = [&](bool ok, const char* what) {
    if (!ok) report.violations.emplace_back(what);
  };
  check(std::isfinite(params.alpha) && params.alpha > 0.0, "alpha > 0");
  check(std::isfinite(params.k) && params.k > 0.0, "k > 0");
  check(std::isfinite(params.m) && params.m > 0.0, "m > 0");
  check(std::isfinite(params.rho) && params.rho >= -1.0 && params.rho <= 1.0, "rho in [-1, 1]");
  check(std::isfinite(params.z0) && params.z0 > 0.0, "z0 > 0");
  check(std::isfinite(params.r), "r finite");
  report.beta = params.beta();
  report.linearization_warning = report.beta > kLinearizationBetaThreshold;
  return report;
}

void require_valid(const ModelParams& params) {
  const ValidationReport report = validate(params);
  if (report.ok()) return;
  std::string msg = "violated:";
  for (const auto& v : report.violations) msg += " [" + v + "]";
  throw Error(ErrorCode::kInvalidParameter, msg);
}

std::string format_params(const ModelParams& params) {
  std::string out;
  auto line = [&](const char* key, double v) { out += std::string(key) + " = " + format_double(v) + "\n"; };
  line("alpha", params.alpha);
  line("k", params.k);
  line("m", params.m);
  line("rho", params.rho);
  line("z0", params.z0);
  line("r", params.r);
  return out;
}

std::map<std::string, double> parse_key_values(std::string_view text) {
  std::map<std::string, double> values;
  int line_no = 0;
  for (std::string_view line : split_lines(text)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(line.substr(0, eq)));
    const auto value = parse_double(trim(line.substr(eq + 1)));
    if (key.empty() || !value) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": malformed entry");
    }
    values[key] = *value;
  }
  return values;
}

ModelParams params_from_key_values(const std::map<std::string, double>& values) {
  ModelParams p;
  auto take = [&](const char* key, double& dst, bool required) {
    const auto it = values.find(key);
    if (it != values.end()) {
      dst = it->second;
    } else if (required) {
      throw Error(ErrorCode::kSchemaMismatch, std::string("missing key '") + key + "'");
    }
  };
  take("alpha", p.alpha, true);
  take("k", p.k, true);
  take("m", p.m, true);
  take("rho", p.rho, true);
  take("z0", p.z0, false);
  take("r", p.r, false);
  return p;
}

}  // namespace lou
