#include "lou/charfn.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "lou/errors.hpp"

namespace lou {
namespace {

constexpr cplx kI{0.0, 1.0};

void check_denominator(cplx value, const char* what) {
  if (std::abs(value) < kDenominatorTolerance || !std::isfinite(std::abs(value))) {
    throw Error(ErrorCode::kSingularDenominator, std::string(what) + " vanishes");
  }
}

void require_strip(cplx phi, const ModelParams& p) {
  if (!in_regularity_strip(phi, p)) {
    const PoleOrdinates poles = pole_ordinates(p);
    std::ostringstream msg;
    msg << "Im(phi) = " << phi.imag() << " outside (" << -poles.c_plus << ", " << -poles.c_minus << ")";
    throw Error(ErrorCode::kStripViolation, msg.str());
  }
}

}  // namespace

PoleOrdinates pole_ordinates(const ModelParams& p) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double km = p.k * p.m;
  PoleOrdinates out{-inf, inf};
  if (km <= 0.0) return out;
  if (p.rho < 1.0) out.c_minus = p.alpha / (km * (p.rho - 1.0));
  if (p.rho > -1.0) out.c_plus = p.alpha / (km * (p.rho + 1.0));
  return out;
}

bool in_regularity_strip(cplx phi, const ModelParams& p) {
  const PoleOrdinates poles = pole_ordinates(p);
  const double c = -phi.imag();
  return c > poles.c_minus && c < poles.c_plus;
}

AuxCoefficients aux_coefficients(cplx phi, const ModelParams& p) {
  const double a = p.alpha;
  const double k2 = p.k * p.k;
  const cplx m2phi2 = p.m * p.m * phi * phi;

  AuxCoefficients x;
  x.phi_cap = p.k * p.m * phi / a;
  x.b = 2.0 * a * (1.0 - kI * p.rho * x.phi_cap);
  // d^2 - b^2 = 4 alpha^2 Phi^2 = 4 k^2 m^2 phi^2
  x.d = std::sqrt(x.b * x.b + 4.0 * k2 * m2phi2);
  const cplx b_plus_d = x.b + x.d;
  check_denominator(b_plus_d, "b + d");
  x.c_inf = -m2phi2 / b_plus_d;
  x.b_minus_d = 4.0 * k2 * x.c_inf;
  x.g = x.b_minus_d / b_plus_d;
  x.h = kI * p.m * p.m * phi;
  x.n = 2.0 * a * x.c_inf;
  return x;
}

AbcCoefficients abc(cplx phi, double tau, const ModelParams& p) {
  if (tau < 0.0) throw Error(ErrorCode::kInvalidParameter, "tau must be non-negative");
  if (tau == 0.0 || phi == cplx(0.0, 0.0)) return {};

  const AuxCoefficients x = aux_coefficients(phi, p);
  if (std::abs(x.d) < kDenominatorTolerance) {
    throw Error(ErrorCode::kContourSingularity, "phi sits on a branch point of d");
  }
  const double a = p.alpha;
  const double k2 = p.k * p.k;
  const cplx& b = x.b;
  const cplx& d = x.d;
  const cplx& g = x.g;
  const cplx& h = x.h;
  const cplx& n = x.n;

  const cplx e_half = std::exp(-0.5 * d * tau);
  const cplx e_full = e_half * e_half;
  const cplx one_m_g = 1.0 - g;
  const cplx one_m_ge = 1.0 - g * e_full;
  check_denominator(one_m_g, "1 - g");
  check_denominator(one_m_ge, "1 - g exp(-d tau)");

  const cplx d3 = d * d * d;
  const cplx q = (n - h) / d;
  const cplx s = (g + 1.0) * h - 2.0 * n;  // recurring (g+1)h - 2n

  AbcCoefficients out;
  out.c = x.c_inf * (1.0 - e_full) / one_m_ge;
  out.b = 2.0 * (e_half * s + n + e_full * (n - g * h) - h) / (d * one_m_ge);

  const cplx linear = (0.5 * h + 2.0 * a * q + 2.0 * k2 * q * q + k2 * x.c_inf) * tau;
  const cplx logs = -0.5 * (std::log(one_m_ge) - std::log(one_m_g));
  // 2k^2 g [alpha (b+d) / (2k^2) - h]^2 with the k^-2 poles cancelled.
  const cplx p_term = -2.0 * a * a * p.m * p.m * phi * phi - 2.0 * a * x.b_minus_d * h + 2.0 * k2 * g * h * h;
  const cplx brace = p_term + 2.0 * k2 * (s * s + 2.0 * (n - g * h) * (n - h) + g * (n - h) * (n - h));
  const cplx third = -(e_full - 1.0) / (one_m_g * one_m_ge) * brace / d3;
  const cplx fourth = -s / d3 * (4.0 * a * b - 8.0 * k2 * h) * (1.0 + g * e_half) * (e_half - 1.0) /
                      (one_m_g * one_m_ge);
  out.a = linear + logs + third + fourth;
  return out;
}

double martingale_bracket(double tau, const ModelParams& p) {
  if (tau == 0.0) return 0.0;
  const cplx minus_i{0.0, -1.0};
  require_strip(minus_i, p);
  const AbcCoefficients c = abc(minus_i, tau, p);
  return (c.a + c.b * p.z0 + c.c * p.z0 * p.z0).real();
}

double martingale_integral(double tau, const ModelParams& p) {
  return 2.0 / (p.m * p.m) * martingale_bracket(tau, p);
}

int count_log_windings(cplx phi, double tau, const ModelParams& p) {
  if (tau == 0.0) return 0;
  const AuxCoefficients x = aux_coefficients(phi, p);
  const cplx e_full = std::exp(-x.d * tau);
  // With |g e^{-dt}| < 1 along the path, 1 - g e^{-dt} stays in Re > 0.
  if (std::abs(x.g) < 1.0 && std::abs(x.g * e_full) < 1.0) return 0;
  constexpr int kSamples = 256;
  int windings = 0;
  double prev = std::arg(1.0 - x.g);
  for (int i = 1; i <= kSamples; ++i) {
    const double t = tau * i / kSamples;
    const double cur = std::arg(1.0 - x.g * std::exp(-x.d * t));
    if (std::abs(cur - prev) >= std::numbers::pi) ++windings;
    prev = cur;
  }
  return windings;
}

LinearCf::LinearCf(const ModelParams& p, double tau, double x0)
    : p_(p), tau_(tau), x0_(x0), bracket_(martingale_bracket(tau, p)) {
  if (tau < 0.0) throw Error(ErrorCode::kInvalidParameter, "tau must be non-negative");
}

cplx LinearCf::log_value(cplx phi) const {
  const cplx i_phi = kI * phi;
  if (tau_ == 0.0) return i_phi * x0_;
  require_strip(phi, p_);
  const AbcCoefficients c = abc(phi, tau_, p_);
  return -i_phi * bracket_ + c.a + c.b * p_.z0 + c.c * p_.z0 * p_.z0 + i_phi * x0_;
}

CfValue LinearCf::evaluate(cplx phi) const {
  CfValue out;
  out.value = std::exp(log_value(phi));
  out.log_arg_windings = count_log_windings(phi, tau_, p_);
  return out;
}

CfValue cf(cplx phi, double tau, double x0, const ModelParams& p) {
  return LinearCf(p, tau, x0).evaluate(phi);
}

cplx log_cf(cplx phi, double tau, double x0, const ModelParams& p) {
  return LinearCf(p, tau, x0).log_value(phi);
}

BranchScan scan_log_branch(double phi_max, double step, double tau, const ModelParams& p) {
  BranchScan scan;
  auto arg_at = [&](double phi) {
    const AuxCoefficients x = aux_coefficients(cplx(phi, 0.0), p);
    return std::arg(1.0 - x.g * std::exp(-x.d * tau));
  };
  double prev = arg_at(0.0);
  const int n = static_cast<int>(std::ceil(phi_max / step));
  for (int i = 1; i <= n; ++i) {
    const double cur = arg_at(std::min(phi_max, i * step));
    const double jump = std::abs(cur - prev);
    scan.max_step = std::max(scan.max_step, jump);
    if (jump >= std::numbers::pi) ++scan.jumps;
    prev = cur;
  }
  return scan;
}

}  // namespace lou
