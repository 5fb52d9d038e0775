#include "lou/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "lou/errors.hpp"

namespace lou {
namespace {

struct PanelResult {
  double value = 0.0;
  double error = 0.0;
  double envelope = 0.0;
  long evaluations = 0;
  bool converged = false;
};

// Romberg on [a, b]; fa, fb are the endpoint values. `envelope` tracks the
// largest |f| seen, which the Fourier driver uses for truncation.
template <typename F>
PanelResult romberg_panel(const F& f, double a, double b, double fa, double fb, double tol,
                          const FourierQuadOptions& opt, double& envelope_out) {
  PanelResult out;
  std::vector<double> prev, cur;
  const double width = b - a;
  double trap = 0.5 * width * (fa + fb);
  double envelope = std::max(std::abs(fa), std::abs(fb));
  prev.push_back(trap);
  long points = 1;
  for (int level = 1; level <= opt.max_levels; ++level) {
    const double h = width / static_cast<double>(2 * points);
    double sum = 0.0;
    for (long i = 0; i < points; ++i) {
      const double v = f(a + static_cast<double>(2 * i + 1) * h);
      envelope = std::max(envelope, std::abs(v));
      sum += v;
    }
    out.evaluations += points;
    points *= 2;
    trap = 0.5 * trap + h * sum;

    cur.assign(level + 1, 0.0);
    cur[0] = trap;
    double factor = 1.0;
    for (int j = 1; j <= level; ++j) {
      factor *= 4.0;
      cur[j] = cur[j - 1] + (cur[j - 1] - prev[j - 1]) / (factor - 1.0);
    }
    const double diff = std::abs(cur[level] - prev[level - 1]);
    if (level >= opt.min_levels && diff <= tol) {
      out.value = cur[level];
      out.error = diff;
      out.converged = true;
      break;
    }
    out.value = cur[level];
    out.error = diff;
    prev.swap(cur);
  }
  envelope_out = envelope;
  out.envelope = envelope;
  return out;
}

template <typename F>
PanelResult adaptive_panel(const F& f, double a, double b, double fa, double fb, double tol,
                           const FourierQuadOptions& opt, int depth) {
  double envelope = 0.0;
  PanelResult r = romberg_panel(f, a, b, fa, fb, tol, opt, envelope);
  if (r.converged || depth >= opt.max_depth) return r;
  const double mid = 0.5 * (a + b);
  const double fm = f(mid);
  PanelResult left = adaptive_panel(f, a, mid, fa, fm, 0.5 * tol, opt, depth + 1);
  PanelResult right = adaptive_panel(f, mid, b, fm, fb, 0.5 * tol, opt, depth + 1);
  PanelResult out;
  out.value = left.value + right.value;
  out.error = left.error + right.error;
  out.envelope = std::max({left.envelope, right.envelope, r.envelope});
  out.evaluations = r.evaluations + left.evaluations + right.evaluations + 1;
  out.converged = left.converged && right.converged;
  return out;
}

}  // namespace

QuadResult integrate_romberg(const std::function<double(double)>& f, double a, double b,
                             double abs_tol, const FourierQuadOptions& options) {
  const double fa = f(a);
  const double fb = f(b);
  const PanelResult r = adaptive_panel(f, a, b, fa, fb, abs_tol, options, 0);
  if (!r.converged) {
    throw Error(ErrorCode::kQuadratureNonConvergence, "Romberg did not converge on finite interval");
  }
  return {r.value, r.error, r.evaluations + 2, b};
}

QuadResult integrate_fourier(const FourierAmplitudes& amplitudes, double freq,
                             const FourierQuadOptions& options) {
  double envelope_at = 0.0;
  auto integrand = [&](double w) {
    const auto [ca, sa] = amplitudes(w);
    envelope_at = std::hypot(ca, sa);
    return std::cos(freq * w) * ca + std::sin(freq * w) * sa;
  };

  double panel = options.max_panel;
  if (freq != 0.0) panel = std::min(panel, std::numbers::pi / std::abs(freq));

  QuadResult result;
  double a = 0.0;
  double fa = integrand(a);
  result.evaluations = 1;
  int quiet_panels = 0;
  while (true) {
    if (a >= options.omega_max) {
      std::ostringstream msg;
      msg << "integrand envelope still " << envelope_at << " at omega_max = " << options.omega_max;
      throw Error(ErrorCode::kQuadratureNonConvergence, msg.str());
    }
    const double b = a + panel;
    const double fb = integrand(b);
    const double tol = std::max(options.abs_tol, options.rel_tol * std::abs(result.value)) / 16.0;
    const PanelResult r = adaptive_panel(integrand, a, b, fa, fb, tol, options, 0);
    if (!r.converged) {
      std::ostringstream msg;
      msg << "panel [" << a << ", " << b << "] did not converge (error " << r.error << ")";
      throw Error(ErrorCode::kQuadratureNonConvergence, msg.str());
    }
    result.value += r.value;
    result.error += r.error;
    result.evaluations += r.evaluations + 1;
    a = b;
    fa = fb;

    // Tail bound assumes at least 1/w^2 decay beyond the current panel.
    const bool small = r.envelope < options.envelope_tol && r.envelope * b < 0.1 * options.abs_tol;
    quiet_panels = small ? quiet_panels + 1 : 0;
    if (quiet_panels >= 2) break;
  }
  result.omega_end = a;
  return result;
}

}  // namespace lou
