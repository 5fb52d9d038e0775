#pragma once

#include <functional>
#include <utility>

namespace lou {

struct FourierQuadOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  // Truncate once the amplitude envelope drops below this on two
  // consecutive panels (and the tail bound is within abs_tol).
  double envelope_tol = 1e-12;
  double omega_max = 1e4;
  double max_panel = 2.0;
  int min_levels = 3;
  int max_levels = 12;
  int max_depth = 10;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
  double omega_end = 0.0;
};

// cos and sin amplitudes of the integrand at omega.
using FourierAmplitudes = std::function<std::pair<double, double>(double)>;

// Integral over [0, inf) of cos(freq w) a(w) + sin(freq w) b(w).
//
// The half line is cut into panels no longer than half an oscillation
// period; each panel is integrated by Romberg (trapezoid refinement with
// Richardson extrapolation) and bisected when the extrapolation table does
// not settle within max_levels. Throws QuadratureNonConvergence when a
// panel cannot be resolved or omega_max is reached before the envelope
// decays.
QuadResult integrate_fourier(const FourierAmplitudes& amplitudes, double freq,
                             const FourierQuadOptions& options);

// Romberg on a finite interval, exposed for testing.
QuadResult integrate_romberg(const std::function<double(double)>& f, double a, double b,
                             double abs_tol, const FourierQuadOptions& options);

}  // namespace lou
